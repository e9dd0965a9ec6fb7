//! The experiment catalog printed by `metspec list`.

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::CliError;

pub struct Entry {
    pub kind: ExperimentKind,
    pub topic: &'static str,
    /// Sections and keys the experiment reads, beyond `schema`, `experiment`,
    /// `seed`, `tolerances`, `output`.
    pub schema: &'static str,
    pub example: &'static str,
}

pub const CATALOG: [Entry; 8] = [
    Entry {
        kind: ExperimentKind::Drift,
        topic: "drift and minimal displacement of a semicontraction",
        schema: "space, maps (>= 1), horizon = 1000, eps_schedule, samples = 1000, expect.tau",
        example: include_str!("../configs/drift.toml"),
    },
    Entry {
        kind: ExperimentKind::Functional,
        topic: "metric spectral principle: record-time functional with linear descent",
        schema: "space, maps (>= 1), horizon = 1000, eps_schedule, samples = 1000, expect.tau",
        example: include_str!("../configs/functional.toml"),
    },
    Entry {
        kind: ExperimentKind::WolffDenjoy,
        topic: "Wolff-Denjoy theorem for holomorphic self-maps of the disk",
        schema: "space = poincare-disk, maps (>= 1), horizon = 1000, eps_schedule",
        example: include_str!("../configs/wolff-denjoy.toml"),
    },
    Entry {
        kind: ExperimentKind::MeanErgodic,
        topic: "von Neumann mean ergodic theorem via affine isometries",
        schema: "space = euclidean (p = 2), maps = [affine], horizon = 100000, expect.rate_constant",
        example: include_str!("../configs/mean-ergodic.toml"),
    },
    Entry {
        kind: ExperimentKind::Lyapunov,
        topic: "top Lyapunov exponent of random matrix products",
        schema: "driver.process, driver.matrices, driver.seeds, driver.record_eps, horizon = 100000, expect.lyapunov",
        example: include_str!("../configs/lyapunov.toml"),
    },
    Entry {
        kind: ExperimentKind::Thurston,
        topic: "Thurston's asymmetric metric on the Teichmuller space of the torus",
        schema: "thurston.bound = 50, thurston.pairs = 100",
        example: include_str!("../configs/thurston.toml"),
    },
    Entry {
        kind: ExperimentKind::CurveGrowth,
        topic: "curve growth and record times under random mapping classes (torus model)",
        schema: "driver.process, driver.classes, driver.modulus, driver.seeds, curves.basis, curves.eps = 0.1, \
                 horizon = 10000, expect.dominant_curve",
        example: include_str!("../configs/curve-growth.toml"),
    },
    Entry {
        kind: ExperimentKind::Invariants,
        topic: "hemi-metric, semicontraction and functional property suites",
        schema: "space, maps, horizon = 200, samples = 1000",
        example: include_str!("../configs/invariants.toml"),
    },
];

/// Parses and validates an entry's example config.
pub fn check_example(entry: &Entry) -> Result<ExperimentConfig, CliError> {
    let cfg = ExperimentConfig::parse(entry.example)?;
    if cfg.experiment != entry.kind {
        return Err(CliError::Usage(format!(
            "example for `{}` runs `{}`",
            entry.kind.name(),
            cfg.experiment.name()
        )));
    }
    crate::experiments::validate(&cfg)?;
    Ok(cfg)
}

pub fn render() -> String {
    let mut out = String::new();
    for e in &CATALOG {
        let status = match check_example(e) {
            Ok(_) => "valid".to_string(),
            Err(err) => format!("INVALID ({err})"),
        };
        out.push_str(&format!(
            "{} -> {}\n    keys: {}\n    example config: {status}\n",
            e.kind.name(),
            e.topic,
            e.schema
        ));
    }
    out
}
