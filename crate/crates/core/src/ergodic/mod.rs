//! Random products of semicontractions driven by an ergodic system.

pub mod cocycle;
pub mod curves;
pub mod driver;
pub mod family;
pub mod lyapunov;
pub mod records;

pub use cocycle::{compose_cocycle, CocycleTrace};
pub use curves::{curve_growth, default_basis, dominant_curve, CurveGrowth, DominantCurve};
pub use driver::{ChoiceProcess, CocycleDriver};
pub use family::{CocycleFamily, MappingClassFamily, MatrixFamily, PointFamily};
pub use lyapunov::{across_seeds, lyapunov_estimate, top_lyapunov, LyapunovEstimate};
pub use records::{km_record_times, KmRecords};
