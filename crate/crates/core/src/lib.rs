//! Convergence analysis of Σ sinⁿ(πnθ)/n^α and Σ cosⁿ(πnθ)/n^α.
//!
//! Every numeric result is a [`BoundedReal`], a ball that provably contains the true value.

pub mod ball;
pub mod error;
pub mod elementary;
pub mod angle;
pub mod precision;
pub mod classify;
pub mod series;
pub mod polylog;
pub mod cf;
pub mod shells;
pub mod liouville;
pub mod measure;
pub mod report;

pub use angle::{parse_exact, parse_interval, AngleForm, NamedConstant};
pub use ball::{BoundedReal, Mag};
pub use cf::{convergents, estimate_mu, expand, ContinuedFractionExpansion, MuEstimate};
pub use classify::{classify, ClassificationReport, ConvergenceClass};
pub use error::{Error, Result};
pub use liouville::{build_schedule, certify, demo_divergence, LiouvilleSchedule, SparseBinary};
pub use measure::{expected_abs_sum, mc_estimate, wallis, MonteCarloReport, WallisValue};
pub use polylog::{gelfond_asymptotic, polylog_sum};
pub use precision::{reduce_angle, PrecisionBudget, SeriesKind};
pub use series::{accelerated_value, partial_sum, rate_certificate, PartialSumResult, RateCertificate};
pub use shells::{analyze_shells, fit_gap_exponent, ShellAnalysis, ShellRecord};
