//! Turns config descriptors into spaces, maps and drivers.

use metric_spectral::ergodic::{CocycleDriver, MappingClassFamily, MatrixFamily};
use metric_spectral::spaces::{
    cone, euclidean, operator, torus, Blaschke, ConeMetric, Euclidean, Mobius, OperatorSpace,
    PoincareDisk, PositiveCone, TorusTeich,
};
use metric_spectral::spectral::Semicontraction;
use metric_spectral::Space;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::config::{ConeMetricSpec, DriverSpec, ExperimentConfig, MapSpec, SpaceSpec};
use crate::error::CliError;

/// A space together with the configured maps on it.
pub enum System {
    Euclidean(Euclidean, Vec<Semicontraction<Euclidean>>),
    Disk(PoincareDisk, Vec<Semicontraction<PoincareDisk>>),
    Cone(PositiveCone, Vec<Semicontraction<PositiveCone>>),
    Operator(OperatorSpace, Vec<Semicontraction<OperatorSpace>>),
    Torus(TorusTeich, Vec<Semicontraction<TorusTeich>>),
}

/// Runs a block generic over the space of a [`System`].
#[macro_export]
macro_rules! with_system {
    ($system:expr, |$space:ident, $maps:ident| $body:expr) => {
        match $system {
            $crate::build::System::Euclidean($space, $maps) => $body,
            $crate::build::System::Disk($space, $maps) => $body,
            $crate::build::System::Cone($space, $maps) => $body,
            $crate::build::System::Operator($space, $maps) => $body,
            $crate::build::System::Torus($space, $maps) => $body,
        }
    };
}

fn at(key: String) -> impl Fn(metric_spectral::Error) -> CliError {
    move |e| CliError::Usage(format!("config key `{key}`: {e}"))
}

fn usage(key: &str, msg: &str) -> CliError {
    CliError::Usage(format!("config key `{key}`: {msg}"))
}

pub fn matrix(rows: &[Vec<f64>], key: &str) -> Result<DMatrix<f64>, CliError> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    if n == 0 || m == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(usage(
            key,
            "matrix must be a nonempty list of rows of equal length",
        ));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(usage(key, "matrix entries must be finite"));
    }
    Ok(DMatrix::from_row_iterator(
        n,
        m,
        rows.iter().flatten().copied(),
    ))
}

fn complex(z: crate::config::ComplexSpec) -> Complex64 {
    z.value()
}

fn wrong_space(key: &str, map: &MapSpec, space: &SpaceSpec) -> CliError {
    let kind = serde_json::to_value(map)
        .ok()
        .and_then(|v| v["kind"].as_str().map(String::from))
        .unwrap_or_default();
    usage(
        key,
        &format!("map kind `{kind}` does not act on space `{}`", space.kind()),
    )
}

fn disk_map(
    spec: &MapSpec,
    key: &str,
    label: String,
) -> Result<Semicontraction<PoincareDisk>, CliError> {
    let err = at(key.to_string());
    match spec {
        MapSpec::Mobius {
            matrix,
            alpha,
            beta,
        } => {
            let m = match (matrix, alpha, beta) {
                (Some(m), None, None) => Mobius::from_matrix(m.map(|row| row.map(complex)))
                    .map_err(at(format!("{key}.matrix")))?,
                (None, Some(a), Some(b)) => Mobius::new(complex(*a), complex(*b)).map_err(err)?,
                _ => {
                    return Err(usage(
                        key,
                        "mobius takes either `matrix` or both `alpha` and `beta`",
                    ))
                }
            };
            Ok(m.into_map(label))
        }
        MapSpec::DiskRotation { angle } => Ok(Mobius::rotation(*angle).into_map(label)),
        MapSpec::Blaschke {
            rotation,
            zeros,
            boundary,
        } => {
            let b = Blaschke::new(
                complex(*rotation),
                zeros.iter().map(|z| complex(*z)).collect(),
            )
            .map_err(err)?;
            match boundary {
                Some(zeta) => b
                    .into_map(label, complex(*zeta))
                    .map_err(at(format!("{key}.boundary"))),
                None => Ok(b.into_plain_map(label)),
            }
        }
        other => Err(wrong_space(key, other, &SpaceSpec::PoincareDisk)),
    }
}

pub fn system(config: &ExperimentConfig) -> Result<System, CliError> {
    let space = config
        .space
        .as_ref()
        .ok_or_else(|| usage("space", "missing"))?;
    let label = |i: usize, spec: &MapSpec| {
        let kind = serde_json::to_value(spec)
            .ok()
            .and_then(|v| v["kind"].as_str().map(String::from));
        format!("maps[{i}] {}", kind.unwrap_or_default())
    };
    let keyed = config
        .maps
        .iter()
        .enumerate()
        .map(|(i, m)| (format!("maps[{i}]"), label(i, m), m));
    Ok(match space {
        SpaceSpec::Euclidean { dim, p } => {
            let s = Euclidean::new(*dim, *p).map_err(at("space".into()))?;
            let maps = keyed
                .map(|(key, label, spec)| {
                    let err = at(key.clone());
                    let f = match spec {
                        MapSpec::Translation { offset } => {
                            euclidean::translation(&s, offset).map_err(err)?
                        }
                        MapSpec::Rotation { angle } => {
                            euclidean::rotation(&s, *angle).map_err(err)?
                        }
                        MapSpec::Scaling { factor } => {
                            euclidean::scaling(&s, *factor).map_err(err)?
                        }
                        MapSpec::Affine { matrix: m, offset } => {
                            let u = matrix(m, &format!("{key}.matrix"))?;
                            euclidean::affine_isometry(&s, &u, offset).map_err(err)?
                        }
                        other => return Err(wrong_space(&key, other, space)),
                    };
                    Ok(f.with_label(label))
                })
                .collect::<Result<_, CliError>>()?;
            System::Euclidean(s, maps)
        }
        SpaceSpec::PoincareDisk => {
            let maps = keyed
                .map(|(key, label, spec)| disk_map(spec, &key, label))
                .collect::<Result<_, _>>()?;
            System::Disk(PoincareDisk, maps)
        }
        SpaceSpec::Cone { dim, metric } => {
            let metric = match metric {
                ConeMetricSpec::Thompson => ConeMetric::Thompson,
                ConeMetricSpec::Funk => ConeMetric::Funk,
            };
            let s = PositiveCone::new(*dim, metric).map_err(at("space".into()))?;
            let maps = keyed
                .map(|(key, label, spec)| match spec {
                    MapSpec::PositiveLinear { matrix: m } => {
                        let a = matrix(m, &format!("{key}.matrix"))?;
                        Ok(cone::positive_linear(&s, &a)
                            .map_err(at(key))?
                            .with_label(label))
                    }
                    other => Err(wrong_space(&key, other, space)),
                })
                .collect::<Result<_, _>>()?;
            System::Cone(s, maps)
        }
        SpaceSpec::Operator { dim } => {
            let s = OperatorSpace::new(*dim).map_err(at("space".into()))?;
            let maps = keyed
                .map(|(key, label, spec)| match spec {
                    MapSpec::LeftMultiplication { matrix: m } => {
                        let a = matrix(m, &format!("{key}.matrix"))?;
                        Ok(operator::left_multiplication(&s, &a)
                            .map_err(at(key))?
                            .with_label(label))
                    }
                    other => Err(wrong_space(&key, other, space)),
                })
                .collect::<Result<_, _>>()?;
            System::Operator(s, maps)
        }
        SpaceSpec::Torus => {
            let maps = keyed
                .map(|(key, label, spec)| match spec {
                    MapSpec::MappingClass { matrix: m } => Ok(torus::mapping_class_map(m)
                        .map_err(at(key))?
                        .with_label(label)),
                    other => Err(wrong_space(&key, other, space)),
                })
                .collect::<Result<_, _>>()?;
            System::Torus(TorusTeich, maps)
        }
    })
}

fn seeds(driver: &DriverSpec, seed: u64) -> Vec<u64> {
    let mut s = driver.seeds.clone().unwrap_or_else(|| vec![seed]);
    s.sort_unstable();
    s.dedup();
    s
}

pub fn matrix_driver(
    config: &ExperimentConfig,
) -> Result<(CocycleDriver<MatrixFamily>, Vec<u64>), CliError> {
    let spec = config
        .driver
        .as_ref()
        .ok_or_else(|| usage("driver", "missing"))?;
    let rows = spec
        .matrices
        .as_ref()
        .ok_or_else(|| usage("driver.matrices", "missing"))?;
    let mats = rows
        .iter()
        .enumerate()
        .map(|(i, m)| matrix(m, &format!("driver.matrices[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let family = MatrixFamily::new(mats).map_err(at("driver.matrices".into()))?;
    let s = seeds(spec, config.seed);
    let driver = CocycleDriver::new(spec.process.clone(), s[0], family)
        .map_err(at("driver.process".into()))?;
    Ok((driver, s))
}

pub fn class_driver(
    config: &ExperimentConfig,
) -> Result<(CocycleDriver<MappingClassFamily>, Vec<u64>), CliError> {
    let spec = config
        .driver
        .as_ref()
        .ok_or_else(|| usage("driver", "missing"))?;
    let classes = spec
        .classes
        .clone()
        .ok_or_else(|| usage("driver.classes", "missing"))?;
    let x0 = spec.modulus.map_or_else(
        || TorusTeich.base_point(),
        |[re, im]| Complex64::new(re, im),
    );
    let family = MappingClassFamily::new(classes, x0).map_err(at("driver".into()))?;
    let s = seeds(spec, config.seed);
    let driver = CocycleDriver::new(spec.process.clone(), s[0], family)
        .map_err(at("driver.process".into()))?;
    Ok((driver, s))
}
