//! Bell-nonlocality and entanglement witnesses of two-qubit states computed
//! from the correlation matrix `R = T^T T`, a simulator of the two-copy
//! swapping measurement that estimates `R` directly, maximum-likelihood
//! projection of noisy `R` onto the physical set, and a random-state study of
//! how much entanglement each witness misses.
//!
//! Conventions: `sigma_2 = [[0, -i], [i, 0]]`, two-qubit basis ordered
//! `|HH>, |HV>, |VH>, |VV>` row-major, `T_ij = Tr[rho sigma_i (x) sigma_j]`.

pub mod error;
pub mod formats;
pub mod linalg;
pub mod mle;
pub mod montecarlo;
pub mod optimize;
pub mod state;
pub mod swap;
pub mod witness;

pub use error::{Error, Result};
pub use mle::{ml_reconstruct, LikelihoodProblem, MLResult};
pub use montecarlo::{family_curve, family_scan, scatter, thresholds, CurvePoint, ScatterRecord, ThresholdReport};
pub use state::{make_family, DensityMatrix, FamilyKind, RandomStateMeasure, StateFamily};
pub use swap::{estimate_r, simulate_counts, CoincidenceTable, MeasuredR, MeasurementSetting};
pub use witness::{report, report_with_oracle, witnesses_from_r, RMatrix, WitnessReport};
