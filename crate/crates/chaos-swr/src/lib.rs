//! Order-2 sign chaos under sampling without replacement: exact samplers,
//! a stopping-time coupling to i.i.d. signs, enumeration oracles for small
//! instances, tail bounds as computable functions, Monte Carlo verification
//! and a permutation-bootstrap two-sample test.
//!
//! The quantity of interest is `Z = sum_{i != j} eps_i eps_j a_ij`, where
//! the signs `eps` mark which half of `{1..n}` a uniform without-replacement
//! draw picked. The crate provides:
//!
//! - [`coeff`]: the coefficient family and its derived norms;
//! - [`samplers`]: balanced draws, i.i.d. sign paths, and the coupling that
//!   stops an i.i.d. path once one sign count reaches `n/2`;
//! - [`chaos`]: evaluation of `Z` (and of its i.i.d. analogue);
//! - [`oracle`]: exhaustive enumeration of exact laws, tails and total
//!   variation diagnostics;
//! - [`bounds`]: closed-form thresholds/probabilities with per-term
//!   breakdowns and cut-parameter policies;
//! - [`montecarlo`]: seeded, worker-count-invariant estimation plus exact
//!   calibration of the bound constants;
//! - [`two_sample`]: the permutation-bootstrap two-sample U-statistic test;
//! - [`cli`]: the batch front-end behind the `chaos-swr` binary.
//!
//! Runnable walkthroughs for each capability live in `examples/`.

pub mod bounds;
pub mod chaos;
pub mod cli;
pub mod coeff;
pub mod ensembles;
pub mod error;
pub mod montecarlo;
pub mod oracle;
pub mod samplers;
pub mod two_sample;

pub use bounds::{BoundConstants, BoundReport};
pub use coeff::{CoefficientMatrix, TruncatedNorms};
pub use error::{Error, Result};
pub use oracle::{DiscreteLaw, EnumerationCaps, TailMode};
pub use samplers::{CoupledDraw, RademacherPath, RngSpec, Scheme, SignVector};
