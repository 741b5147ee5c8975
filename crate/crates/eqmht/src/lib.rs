//! Dependent multiple hypothesis testing under an equicorrelated Gaussian
//! mixture model.
//!
//! The model observes `n` coordinates that share two latent factors, one in
//! the noise and one in the prior, with a sparse set of high-variance
//! signals mixed in. Conditioning on the factors makes coordinates
//! independent, which yields a per-coordinate fixed-cutoff test whose size
//! can be calibrated exactly, a Neyman-Pearson comparator it can be measured
//! against, and closed-form expected Type II error in the strong-signal
//! limit. The [`sim`] module reproduces the reference Monte Carlo tables.
//!
//! Replication loops are data-parallel via rayon when the `parallel` feature
//! (default) is enabled; a sequential fallback compiles without it. Results
//! are bitwise identical either way.

pub mod checks;
pub mod error;
pub mod math;
pub mod model;
pub mod quad;
pub mod sim;
pub mod testing;

pub use error::{Error, Result};
pub use math::{Probability, TrimOrder};
pub use model::{ConditionalParams, DatasetDraw, LatentDraw, ModelParams};
pub use sim::{CutoffMode, ReplicationOutcome, SimConfig, TableRow};
pub use testing::{FixedCutoffTest, NpRegion, PowerReport, TestKind};
