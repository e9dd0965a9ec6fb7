//! Numerical tools for metric spectral theory.
//!
//! Hemi-metric spaces and metric functionals are computable objects here:
//! orbits of semicontractions yield drift and minimal-displacement estimates,
//! record times along an orbit yield a functional that decreases at the rate
//! of the drift, and random products over spectral metrics yield top
//! Lyapunov exponents and curve growth rates on the flat torus.

// `!(x > 0.0)` style guards reject NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ergodic;
pub mod error;
pub mod functional;
pub mod metric;
pub mod report;
pub mod spaces;
pub mod spectral;
pub mod tolerances;

pub use error::{Error, Result};
pub use functional::{
    busemann_along_ray, check_functional, internal_functional, lipschitz_extend, ExtensionMode,
    FunctionalClass, FunctionalTag, LipschitzExtension, MetricFunctional, Ray,
};
pub use metric::{
    check_separation, check_triangle, gromov_product, sample_points, sym_dist, Space,
};
pub use report::{Check, CheckList};
pub use tolerances::{default_eps_schedule, Tolerances};
