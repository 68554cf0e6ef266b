//! Sign-vector samplers: exact sampling without replacement, i.i.d.
//! Rademacher paths, and the stopping-time coupling between the two.
//!
//! Every draw is a pure function of `(seed, stream label, replicate index)`.
//! There is no shared mutable RNG state, so replicates can be partitioned
//! across any number of workers and still reproduce a serial run exactly.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Counter-based randomness source. Identical `(seed, stream, replicate)`
/// triples always yield identical draws, independently of execution order
/// or worker count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngSpec {
    pub seed: u64,
    pub stream: String,
}

impl RngSpec {
    pub fn new(seed: u64, stream: impl Into<String>) -> Self {
        Self {
            seed,
            stream: stream.into(),
        }
    }

    /// Derive the generator for one replicate. The ChaCha key is a hash of
    /// the full triple, so distinct labels and indices never collide.
    pub fn rng(&self, replicate: u64) -> ChaCha8Rng {
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update((self.stream.len() as u64).to_le_bytes());
        hasher.update(self.stream.as_bytes());
        hasher.update(replicate.to_le_bytes());
        ChaCha8Rng::from_seed(hasher.finalize().into())
    }
}

/// Balanced vector of signs: length `n` even, exactly `n/2` entries `+1`.
/// Encodes which indices a without-replacement draw picked.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignVector {
    signs: Vec<i8>,
}

impl SignVector {
    /// Validate length, sign entries and balance.
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() || !signs.len().is_multiple_of(2) {
            return Err(Error::OddLength(signs.len()));
        }
        let mut sum: i64 = 0;
        for (index, &s) in signs.iter().enumerate() {
            if s != 1 && s != -1 {
                return Err(Error::NotASign { index, value: s });
            }
            sum += i64::from(s);
        }
        if sum != 0 {
            return Err(Error::Unbalanced { sum });
        }
        Ok(Self { signs })
    }

    pub fn n(&self) -> usize {
        self.signs.len()
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.signs {
            f.write_str(if s == 1 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl Serialize for SignVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Unconstrained vector of i.i.d. signs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RademacherPath {
    signs: Vec<i8>,
}

impl RademacherPath {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::OddLength(0));
        }
        for (index, &s) in signs.iter().enumerate() {
            if s != 1 && s != -1 {
                return Err(Error::NotASign { index, value: s });
            }
        }
        Ok(Self { signs })
    }

    pub fn n(&self) -> usize {
        self.signs.len()
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }
}

impl fmt::Display for RademacherPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.signs {
            f.write_str(if s == 1 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl Serialize for RademacherPath {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// An i.i.d. path together with its stopping time and the balanced vector
/// the coupling induces from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoupledDraw {
    pub path: RademacherPath,
    /// First time (1-based) at which one sign's running count reaches `n/2`.
    pub stopping_time: usize,
    pub coupled: SignVector,
}

/// The three sampling schemes a chaos value can be evaluated under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "swr")]
    WithoutReplacement,
    #[serde(rename = "iid")]
    IidRademacher,
    #[serde(rename = "coupled")]
    Coupled,
}

impl Scheme {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "swr" | "without-replacement" => Ok(Self::WithoutReplacement),
            "iid" | "iid-rademacher" => Ok(Self::IidRademacher),
            "coupled" => Ok(Self::Coupled),
            other => Err(Error::Parse {
                context: "scheme".to_string(),
                message: format!("unknown scheme {other:?}, expected swr | iid | coupled"),
            }),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::WithoutReplacement => "swr",
            Scheme::IidRademacher => "iid",
            Scheme::Coupled => "coupled",
        })
    }
}

fn check_even(n: usize) -> Result<()> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::OddLength(n));
    }
    Ok(())
}

/// Uniform draw over all `C(n, n/2)` balanced sign vectors: a partial
/// Fisher-Yates shuffle picks the `n/2` indices that get `+1`.
pub fn draw_without_replacement(n: usize, rng: &RngSpec, replicate: u64) -> Result<SignVector> {
    check_even(n)?;
    let mut r = rng.rng(replicate);
    let mut idx: Vec<usize> = (0..n).collect();
    let half = n / 2;
    for k in 0..half {
        let j = r.random_range(k..n);
        idx.swap(k, j);
    }
    let mut signs = vec![-1i8; n];
    for &i in &idx[..half] {
        signs[i] = 1;
    }
    Ok(SignVector { signs })
}

/// A path of `n` independent uniform signs.
pub fn draw_iid(n: usize, rng: &RngSpec, replicate: u64) -> Result<RademacherPath> {
    if n == 0 {
        return Err(Error::OddLength(0));
    }
    let mut r = rng.rng(replicate);
    let signs = (0..n)
        .map(|_| if r.random::<bool>() { 1i8 } else { -1i8 })
        .collect();
    Ok(RademacherPath { signs })
}

/// First 1-based time `t` at which the running count of `+1`s or of `-1`s
/// among `path[..t]` reaches `n/2`. Always lands in `[n/2, n-1]`: one sign
/// must reach `n/2` among the first `n-1` steps.
///
/// The path length must be even and at least 2.
pub fn stopping_time(path: &RademacherPath) -> usize {
    let n = path.n();
    assert!(n >= 2 && n.is_multiple_of(2), "stopping time needs an even path length");
    let half = n / 2;
    let mut plus = 0usize;
    let mut minus = 0usize;
    for (t, &s) in path.signs.iter().enumerate() {
        if s == 1 {
            plus += 1;
        } else {
            minus += 1;
        }
        if plus == half || minus == half {
            return t + 1;
        }
    }
    unreachable!("one sign count always reaches n/2 by step n-1");
}

/// Transform an i.i.d. path into a balanced vector: keep the path up to its
/// stopping time `T`, then fill every later entry with `-path[T]`. The
/// result depends only on the first `T` path entries.
pub fn couple(path: &RademacherPath) -> CoupledDraw {
    let t = stopping_time(path);
    let pivot = path.signs[t - 1];
    let signs: Vec<i8> = path
        .signs
        .iter()
        .enumerate()
        .map(|(i, &s)| if i < t { s } else { -pivot })
        .collect();
    let coupled = SignVector::new(signs).expect("coupled vector is balanced by construction");
    CoupledDraw {
        path: path.clone(),
        stopping_time: t,
        coupled,
    }
}

/// Draw an i.i.d. path and couple it. The stored path is generated to full
/// length so the draw stays inspectable past `T`.
pub fn draw_coupled(n: usize, rng: &RngSpec, replicate: u64) -> Result<CoupledDraw> {
    check_even(n)?;
    let path = draw_iid(n, rng, replicate)?;
    Ok(couple(&path))
}
