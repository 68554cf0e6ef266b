//! Named coefficient-matrix generators used for calibration runs and by the
//! `gen-matrix` subcommand. Every ensemble is deterministic in its seed.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::coeff::CoefficientMatrix;
use crate::error::{Error, Result};
use crate::samplers::RngSpec;

/// Reproducible matrix families.
#[derive(Debug, Clone, PartialEq)]
pub enum Ensemble {
    /// Every off-diagonal entry is 1; seed is ignored.
    AllOnes,
    /// I.i.d. uniform on `[-1, 1)`.
    Uniform,
    /// I.i.d. standard normal.
    Gaussian,
    /// `a_ij = u_i * u_j` for a standard normal vector `u`.
    RankOne,
    /// Independent signs of fixed magnitude: entries `+M` or `-M`.
    Pm { magnitude: f64 },
}

impl Ensemble {
    /// Resolve a name from the command line; `magnitude` only matters for
    /// the `pm` family.
    pub fn from_name(name: &str, magnitude: f64) -> Result<Self> {
        match name {
            "all-ones" => Ok(Self::AllOnes),
            "uniform" => Ok(Self::Uniform),
            "gaussian" => Ok(Self::Gaussian),
            "rank-one" => Ok(Self::RankOne),
            "pm" => {
                if magnitude.is_nan() || magnitude <= 0.0 {
                    return Err(Error::NonpositiveConstant {
                        name: "M",
                        value: magnitude,
                    });
                }
                Ok(Self::Pm { magnitude })
            }
            other => Err(Error::UnknownEnsemble(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::AllOnes => "all-ones",
            Self::Uniform => "uniform",
            Self::Gaussian => "gaussian",
            Self::RankOne => "rank-one",
            Self::Pm { .. } => "pm",
        }
    }

    /// Generate an `n x n` zero-diagonal matrix. Entries are drawn in
    /// row-major order, so equal `(ensemble, n, seed)` always yields the
    /// same matrix.
    pub fn generate(&self, n: usize, seed: u64) -> Result<CoefficientMatrix> {
        let spec = RngSpec::new(seed, format!("ensemble/{}", self.name()));
        let mut rng = spec.rng(0);
        match self {
            Self::AllOnes => CoefficientMatrix::from_fn(n, |_, _| 1.0),
            Self::Uniform => CoefficientMatrix::from_fn(n, |_, _| rng.random_range(-1.0..1.0)),
            Self::Gaussian => {
                CoefficientMatrix::from_fn(n, |_, _| StandardNormal.sample(&mut rng))
            }
            Self::RankOne => {
                let u: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                CoefficientMatrix::from_fn(n, |i, j| u[i] * u[j])
            }
            Self::Pm { magnitude } => CoefficientMatrix::from_fn(n, |_, _| {
                if rng.random::<bool>() {
                    *magnitude
                } else {
                    -magnitude
                }
            }),
        }
    }
}
