use serde::{Deserialize, Serialize};

/// Slacks used by checks across the crate.
///
/// `algebraic` covers identities that hold exactly up to rounding,
/// `geometric` covers limits with exponential convergence and `ergodic`
/// covers averages converging at polynomial rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub algebraic: f64,
    pub geometric: f64,
    pub ergodic: f64,
    pub point_eq: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            algebraic: 1e-9,
            geometric: 1e-6,
            ergodic: 1e-3,
            point_eq: 1e-12,
        }
    }
}

/// Default decreasing epsilon schedule for record-time extraction: 1/2, 1/4, ..., 2^-10.
pub fn default_eps_schedule() -> Vec<f64> {
    (1..=10).map(|i| 0.5f64.powi(i)).collect()
}
