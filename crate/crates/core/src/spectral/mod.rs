//! Iteration of a single semicontraction: drift, displacement, record times
//! and the extraction of a functional that decreases linearly along the orbit.

pub mod displacement;
pub mod mean_ergodic;
pub mod orbit;
pub mod principle;
pub mod semicontraction;
pub mod tracial;
pub mod wolff;

pub use displacement::{
    classify, drift_below_displacement, min_displacement, BallWindow, Budget, Classification,
    DiskWindow, Kind, Window,
};
pub use mean_ergodic::{mean_ergodic, MeanErgodicReport};
pub use orbit::{drift, orbit, DriftEstimate, OrbitTrace};
pub use principle::{
    extract_functional, isometry_inverse_bound, record_times, record_times_with, verify_descent,
    Extraction, Slack,
};
pub use semicontraction::{Boundary, Oracle, Semicontraction};
pub use tracial::{tracial_check, TracialReport};
pub use wolff::{wolff_denjoy, WolffDenjoyReport};
