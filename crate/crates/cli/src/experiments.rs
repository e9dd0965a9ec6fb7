//! One function per experiment. Each returns an [`Outcome`]; library errors
//! inside a run become failing checks named after the step that failed.

use metric_spectral::ergodic::{
    across_seeds, compose_cocycle, curve_growth, dominant_curve, km_record_times,
    lyapunov_estimate, CocycleFamily,
};
use metric_spectral::spaces::euclidean::{
    check_convexity, check_homogeneity, hilbert_functional, Radius,
};
use metric_spectral::spaces::torus::{primitive_pairs, thurston_dist, ThurstonMode};
use metric_spectral::spaces::{disk_busemann, Curve, Euclidean, PoincareDisk, TorusTeich};
use metric_spectral::spectral::{
    drift, drift_below_displacement, extract_functional, mean_ergodic, orbit, record_times_with,
    tracial_check, verify_descent, wolff_denjoy, OrbitTrace, Semicontraction, Slack,
};
use metric_spectral::{
    check_functional, check_separation, check_triangle, internal_functional, sample_points, Check,
    MetricFunctional, Result, Space,
};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::build::{self, System};
use crate::config::{ExperimentConfig, ExperimentKind, MapSpec};
use crate::error::CliError;
use crate::output::{Estimate, Outcome, Table};
use crate::with_system;

/// Column contract of the per-map orbit tables.
pub const ORBIT_COLUMNS: [&str; 6] = ["k", "a_k", "a_k_over_k", "b_k", "record", "h_k"];
/// Leading columns of the per-trajectory cocycle tables; curve-growth
/// appends one `log_l_<p>_<q>` column per basis curve.
pub const COCYCLE_COLUMNS: [&str; 4] = ["k", "a_k", "a_k_over_k", "record"];
pub const MEAN_ERGODIC_COLUMNS: [&str; 3] = ["k", "avg_error", "scaled_error"];
pub const THURSTON_COLUMNS: [&str; 10] = [
    "pair",
    "x_re",
    "x_im",
    "y_re",
    "y_im",
    "closed_form",
    "enumerated",
    "gap",
    "argmax_p",
    "argmax_q",
];

/// Records a library failure as a failing check and yields `None`.
fn attempt<T>(
    out: &mut Outcome,
    module: &'static str,
    operation: &'static str,
    what: &str,
    r: Result<T>,
) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            out.check(
                module,
                operation,
                Check::flag(format!("{what}: {e}"), false, "completed without error"),
            );
            None
        }
    }
}

/// Validates the config against the library by constructing every object it
/// describes. Nothing is iterated.
pub fn validate(config: &ExperimentConfig) -> std::result::Result<(), CliError> {
    match config.experiment {
        ExperimentKind::Lyapunov => build::matrix_driver(config).map(|_| ()),
        ExperimentKind::CurveGrowth => {
            build::class_driver(config)?;
            let curves = config.curves.as_ref().expect("defaults filled");
            for (i, c) in curves.basis.iter().enumerate() {
                Curve::new(c.p, c.q)
                    .map_err(|e| CliError::Usage(format!("config key `curves.basis[{i}]`: {e}")))?;
            }
            Ok(())
        }
        ExperimentKind::Thurston => Ok(()),
        _ => build::system(config).map(|_| ()),
    }
}

pub fn run(config: &ExperimentConfig) -> std::result::Result<Outcome, CliError> {
    validate(config)?;
    let mut out = Outcome::default();
    match config.experiment {
        ExperimentKind::Drift => with_system!(build::system(config)?, |s, maps| drift_experiment(
            &s, &maps, config, &mut out
        )),
        ExperimentKind::Functional => {
            with_system!(build::system(config)?, |s, maps| functional_experiment(
                &s, &maps, config, &mut out
            ))
        }
        ExperimentKind::WolffDenjoy => match build::system(config)? {
            System::Disk(_, maps) => wolff_denjoy_experiment(&maps, config, &mut out),
            _ => unreachable!("config check restricts wolff-denjoy to the disk"),
        },
        ExperimentKind::MeanErgodic => mean_ergodic_experiment(config, &mut out),
        ExperimentKind::Lyapunov => lyapunov_experiment(config, &mut out)?,
        ExperimentKind::Thurston => thurston_experiment(config, &mut out),
        ExperimentKind::CurveGrowth => curve_growth_experiment(config, &mut out)?,
        ExperimentKind::Invariants => {
            with_system!(build::system(config)?, |s, maps| invariants_experiment(
                &s, &maps, config, &mut out
            ))
        }
    }
    Ok(out)
}

fn cell(x: f64) -> Option<f64> {
    Some(x)
}

fn orbit_table<S: Space>(
    name: String,
    space: &S,
    trace: &OrbitTrace<S::Point>,
    tau_hat: f64,
    eps: f64,
    h: Option<&MetricFunctional<S>>,
) -> Result<Table> {
    let records = record_times_with(&trace.dists, tau_hat, eps)?;
    let mut flags = vec![0.0; trace.dists.len()];
    for r in records {
        flags[r] = 1.0;
    }
    let mut t = Table::new(name, &ORBIT_COLUMNS);
    for (k, a) in trace.dists.iter().enumerate() {
        let rate = if k == 0 { None } else { cell(a / k as f64) };
        let b = a - (tau_hat - eps) * k as f64;
        let hk = h.map(|h| h.eval(space, &trace.points[k]));
        t.push(vec![
            cell(k as f64),
            cell(*a),
            rate,
            cell(b),
            cell(flags[k]),
            hk,
        ]);
    }
    Ok(t)
}

fn drift_experiment<S: Space>(
    space: &S,
    maps: &[Semicontraction<S>],
    cfg: &ExperimentConfig,
    out: &mut Outcome,
) {
    let n = cfg.horizon();
    let tol = cfg.tolerances;
    let schedule = cfg.eps_schedule();
    for (i, f) in maps.iter().enumerate() {
        let label = f.label().to_string();
        let Some(trace) = attempt(
            out,
            "spectral",
            "orbit",
            &label,
            orbit(space, f, &space.base_point(), n),
        ) else {
            continue;
        };
        out.labelled("spectral", "orbit", &label, trace.checks.clone());
        let Some(d) = attempt(out, "spectral", "drift", &label, drift(&trace)) else {
            continue;
        };
        let mut est = Estimate::new(format!("{label}: tau_hat"), d.tau_hat, "spectral", "drift");
        if let Some(tau) = cfg.expect.tau {
            est = est.within(tol.ergodic, "expect.tau");
            out.check(
                "spectral",
                "drift",
                Check::at_most(
                    format!("{label}: |tau_hat - expect.tau|"),
                    (d.tau_hat - tau).abs(),
                    tol.ergodic,
                    "expect.tau",
                ),
            );
        }
        out.estimate(est);
        if let Some(tau) = f.oracle().tau {
            out.estimate(
                Estimate::new(format!("{label}: oracle tau"), tau, "spectral", "drift")
                    .within(tol.ergodic, "map oracle"),
            );
            out.check(
                "spectral",
                "drift",
                Check::at_most(
                    format!("{label}: |tau_hat - oracle tau|"),
                    d.oracle_gap(tau),
                    tol.ergodic,
                    "map oracle",
                ),
            );
        }
        out.estimate(Estimate::new(
            format!("{label}: Fekete infimum of a_k/k"),
            d.fekete_final(),
            "spectral",
            "drift",
        ));
        let bound = drift_below_displacement(
            space,
            f,
            n,
            cfg.samples().min(1000),
            cfg.seed,
            tol.algebraic,
        );
        if let Some(c) = attempt(out, "spectral", "min_displacement", &label, bound) {
            out.check("spectral", "min_displacement", c);
        }
        // the functional column is filled when extraction succeeds
        let ex = extract_functional(space, f, &space.base_point(), &schedule, n).ok();
        let eps = ex
            .as_ref()
            .map_or(*schedule.last().expect("nonempty schedule"), |e| e.eps);
        let table = orbit_table(
            format!("orbit_{i}"),
            space,
            &trace,
            d.tau_hat,
            eps,
            ex.as_ref().map(|e| &e.functional),
        );
        if let Some(t) = attempt(out, "spectral", "record_times", &label, table) {
            out.tables.push(t);
        }
    }
}

fn functional_experiment<S: Space>(
    space: &S,
    maps: &[Semicontraction<S>],
    cfg: &ExperimentConfig,
    out: &mut Outcome,
) {
    let n = cfg.horizon();
    let tol = cfg.tolerances;
    for (i, f) in maps.iter().enumerate() {
        let label = f.label().to_string();
        let r = extract_functional(space, f, &space.base_point(), &cfg.eps_schedule(), n);
        let Some(ex) = attempt(out, "spectral", "extract_functional", &label, r) else {
            continue;
        };
        out.labelled("spectral", "orbit", &label, ex.trace.checks.clone());
        out.labelled(
            "spectral",
            "extract_functional",
            &label,
            ex.certificate.clone(),
        );
        for (name, value) in [
            ("tau_hat", ex.tau_hat),
            ("eps", ex.eps),
            ("record time", ex.record_time as f64),
            ("record count", ex.record_count as f64),
        ] {
            out.estimate(Estimate::new(
                format!("{label}: {name}"),
                value,
                "spectral",
                "extract_functional",
            ));
        }
        let slack = Slack {
            absolute: tol.algebraic,
            per_step: ex.eps,
        };
        let descent = verify_descent(
            space,
            &ex.functional,
            &ex.trace,
            ex.tau_hat,
            slack,
            tol.ergodic,
        );
        out.estimate(
            Estimate::new(
                format!("{label}: terminal rate -h(f^n x0)/n"),
                descent.terminal_rate,
                "spectral",
                "verify_descent",
            )
            .within(tol.ergodic, "rate of descent equals drift"),
        );
        out.labelled("spectral", "verify_descent", &label, descent.checks);
        out.labelled(
            "core",
            "check_functional",
            &label,
            check_functional(
                space,
                &ex.functional,
                cfg.samples(),
                cfg.seed,
                tol.algebraic,
            ),
        );
        if let Some(m) = &ex.catalog_match {
            out.estimate(
                Estimate::new(
                    format!("{label}: probe gap to {}", m.functional.tag().kind_name()),
                    m.max_probe_gap,
                    "spectral",
                    "match_catalog",
                )
                .within(tol.ergodic, "closed-form boundary catalog"),
            );
            out.check(
                "spectral",
                "match_catalog",
                Check::at_most(
                    format!("{label}: probe gap to the boundary catalog"),
                    m.max_probe_gap,
                    tol.ergodic,
                    "closed-form boundary catalog",
                ),
            );
        }
        if let Some(tau) = cfg.expect.tau {
            out.check(
                "spectral",
                "drift",
                Check::at_most(
                    format!("{label}: |tau_hat - expect.tau|"),
                    (ex.tau_hat - tau).abs(),
                    tol.ergodic,
                    "expect.tau",
                ),
            );
        }
        let table = orbit_table(
            format!("orbit_{i}"),
            space,
            &ex.trace,
            ex.tau_hat,
            ex.eps,
            Some(&ex.functional),
        );
        if let Some(t) = attempt(out, "spectral", "record_times", &label, table) {
            out.tables.push(t);
        }
    }
}

fn wolff_denjoy_experiment(
    maps: &[Semicontraction<PoincareDisk>],
    cfg: &ExperimentConfig,
    out: &mut Outcome,
) {
    let n = cfg.horizon();
    let tol = cfg.tolerances;
    let schedule = cfg.eps_schedule();
    for (i, f) in maps.iter().enumerate() {
        let label = f.label().to_string();
        let r = wolff_denjoy(f, n, &schedule, tol.geometric, tol.ergodic);
        let Some(r) = attempt(out, "spectral", "wolff_denjoy", &label, r) else {
            continue;
        };
        let est = |name: &str, v: f64| {
            Estimate::new(format!("{label}: {name}"), v, "spectral", "wolff_denjoy")
        };
        out.estimate(est("zeta re", r.zeta[0]));
        out.estimate(est("zeta im", r.zeta[1]));
        out.estimate(
            est("|f^n(0) - zeta|", r.euclidean_gap).within(tol.geometric, "Denjoy-Wolff point"),
        );
        out.estimate(
            est("probe gap to the Busemann function", r.probe_gap)
                .within(tol.ergodic, "disk Busemann closed form"),
        );
        out.estimate(est("tau_hat", r.tau_hat));
        out.labelled("spectral", "wolff_denjoy", &label, r.checks);
        let table = extract_functional(&PoincareDisk, f, &PoincareDisk.base_point(), &schedule, n)
            .and_then(|ex| {
                orbit_table(
                    format!("orbit_{i}"),
                    &PoincareDisk,
                    &ex.trace,
                    ex.tau_hat,
                    ex.eps,
                    Some(&ex.functional),
                )
            });
        if let Some(t) = attempt(out, "spectral", "record_times", &label, table) {
            out.tables.push(t);
        }
    }
}

fn mean_ergodic_experiment(cfg: &ExperimentConfig, out: &mut Outcome) {
    let MapSpec::Affine { matrix, offset } = &cfg.maps[0] else {
        unreachable!("checked by config")
    };
    let u = build::matrix(matrix, "maps[0].matrix").expect("validated");
    let n = cfg.horizon();
    let tol = cfg.tolerances;
    let rate_constant = cfg.expect.rate_constant.expect("checked by config");
    // |tau_hat - |Pv|| <= |avg_n - Pv| <= C / n
    let drift_tol = (rate_constant / n as f64).max(tol.algebraic);
    let r = mean_ergodic(&u, offset, n, rate_constant, drift_tol, tol.ergodic);
    let Some(r) = attempt(out, "spectral", "mean_ergodic", "maps[0]", r) else {
        return;
    };
    let est = |name: &str, v: f64| Estimate::new(name, v, "spectral", "mean_ergodic");
    out.estimate(est("|avg_n - Pv|", r.error));
    out.estimate(
        est("max k |avg_k - Pv|", r.scaled_error).within(rate_constant, "expect.rate_constant"),
    );
    out.estimate(est("tau_hat", r.tau_hat));
    out.estimate(est("|tau_hat - |Pv||", r.tau_gap).within(drift_tol, "rate_constant / n"));
    for (j, p) in r.projection.iter().enumerate() {
        out.estimate(est(&format!("Pv[{j}]"), *p));
    }
    if let Some(g) = r.functional_gap {
        out.estimate(est("probe gap to -(y, Pv/|Pv|)", g).within(tol.ergodic, "linear dual"));
    }
    out.checks("spectral", "mean_ergodic", r.checks);

    let v = DVector::from_column_slice(offset);
    let p = DVector::from_column_slice(&r.projection);
    let mut w = v.clone();
    let mut sum = DVector::zeros(v.len());
    let mut t = Table::new("averages", &MEAN_ERGODIC_COLUMNS);
    for k in 1..=n {
        sum += &w;
        w = &u * w;
        if k <= 1000 || k % 100 == 0 || k == n {
            let err = (&sum / k as f64 - &p).norm();
            t.push(vec![cell(k as f64), cell(err), cell(k as f64 * err)]);
        }
    }
    out.tables.push(t);
}

fn record_flags<F: CocycleFamily>(
    family: &F,
    trace: &metric_spectral::ergodic::CocycleTrace<F::Point>,
    eps: Option<f64>,
    out: &mut Outcome,
    label: &str,
) -> Vec<Option<f64>> {
    let n = trace.horizon();
    let Some(eps) = eps else {
        return vec![None; n + 1];
    };
    let Some(r) = attempt(
        out,
        "ergodic",
        "km_record_times",
        label,
        km_record_times(family, trace, eps, None),
    ) else {
        return vec![None; n + 1];
    };
    out.estimate(Estimate::new(
        format!("{label}: record count"),
        r.indices.len() as f64,
        "ergodic",
        "km_record_times",
    ));
    if let Some(k) = r.k_eps {
        out.estimate(Estimate::new(
            format!("{label}: K_eps"),
            k as f64,
            "ergodic",
            "km_record_times",
        ));
    }
    out.labelled("ergodic", "km_record_times", label, r.checks);
    let mut flags = vec![Some(0.0); n + 1];
    for i in r.indices {
        flags[i] = Some(1.0);
    }
    flags
}

fn lyapunov_experiment(
    cfg: &ExperimentConfig,
    out: &mut Outcome,
) -> std::result::Result<(), CliError> {
    let (driver, seeds) = build::matrix_driver(cfg)?;
    let n = cfg.horizon();
    let tol = cfg.tolerances;
    let runs = across_seeds(&driver, &seeds, |d| {
        let trace = compose_cocycle(d, n)?;
        let est = lyapunov_estimate(&trace)?;
        Ok((trace, est))
    });
    let Some(runs) = attempt(out, "ergodic", "top_lyapunov", "trajectories", runs) else {
        return Ok(());
    };
    let record_eps = cfg.driver.as_ref().and_then(|d| d.record_eps);
    for (seed, (trace, est)) in runs {
        let label = format!("seed {seed}");
        out.labelled("ergodic", "compose_cocycle", &label, trace.checks.clone());
        // the CLT band vanishes for deterministic products, whose O(1/n) bias the ergodic tolerance covers
        let band = est.clt_tolerance.max(tol.ergodic);
        let e = |name: &str, v: f64| {
            Estimate::new(format!("{label}: {name}"), v, "ergodic", "top_lyapunov")
        };
        let mut exponent = e("exponent", est.exponent);
        if let Some(expected) = cfg.expect.lyapunov {
            exponent = exponent.within(band, "expect.lyapunov");
            out.check(
                "ergodic",
                "top_lyapunov",
                Check::at_most(
                    format!("{label}: |exponent - expect.lyapunov|"),
                    (est.exponent - expected).abs(),
                    band,
                    "expect.lyapunov",
                ),
            );
        }
        out.estimate(exponent);
        out.estimate(e("Fekete infimum", est.fekete_inf));
        out.estimate(e("sigma_hat", est.sigma_hat));
        out.estimate(e("CLT tolerance 4 sigma_hat / sqrt(n)", est.clt_tolerance));
        let flags = record_flags(&driver.family, &trace, record_eps, out, &label);
        let mut t = Table::new(format!("trajectory_seed_{seed}"), &COCYCLE_COLUMNS);
        for (k, a) in trace.a.iter().enumerate() {
            let rate = if k == 0 { None } else { cell(a / k as f64) };
            t.push(vec![cell(k as f64), cell(*a), rate, flags[k]]);
        }
        out.tables.push(t);
    }
    Ok(())
}

fn curve_growth_experiment(
    cfg: &ExperimentConfig,
    out: &mut Outcome,
) -> std::result::Result<(), CliError> {
    let (driver, seeds) = build::class_driver(cfg)?;
    let n = cfg.horizon();
    let curves = cfg.curves.clone().expect("defaults filled");
    let runs = across_seeds(&driver, &seeds, |d| {
        let dominant = dominant_curve(d, &curves.basis, n, curves.eps)?;
        let growth = curves
            .basis
            .iter()
            .map(|c| curve_growth(d, *c, n))
            .collect::<Result<Vec<_>>>()?;
        let trace = compose_cocycle(d, n)?;
        Ok((dominant, growth, trace))
    });
    let Some(runs) = attempt(out, "ergodic", "dominant_curve", "trajectories", runs) else {
        return Ok(());
    };
    for (seed, (dominant, growth, trace)) in runs {
        let label = format!("seed {seed}");
        let e = |name: String, v: f64, op: &'static str| {
            Estimate::new(format!("{label}: {name}"), v, "ergodic", op)
        };
        out.estimate(e("tau_hat".into(), dominant.tau_hat, "dominant_curve"));
        out.estimate(e(
            "dominant curve p".into(),
            dominant.curve.p as f64,
            "dominant_curve",
        ));
        out.estimate(e(
            "dominant curve q".into(),
            dominant.curve.q as f64,
            "dominant_curve",
        ));
        if let Some(m) = dominant.top_record {
            out.estimate(e("top record".into(), m as f64, "dominant_curve"));
        }
        if let Some(k) = dominant.records.k_eps {
            out.estimate(e("K_eps".into(), k as f64, "km_record_times"));
        }
        out.estimate(e(
            "record count".into(),
            dominant.records.indices.len() as f64,
            "km_record_times",
        ));
        out.estimate(
            e(
                "additive gap bound".into(),
                dominant.gap_bound,
                "dominant_curve",
            )
            .within(dominant.gap_bound, "angular spread of the basis"),
        );
        out.labelled("ergodic", "dominant_curve", &label, dominant.checks.clone());
        if let Some(expected) = cfg.expect.dominant_curve {
            out.check(
                "ergodic",
                "dominant_curve",
                Check::flag(
                    format!(
                        "{label}: dominant curve is ({}, {})",
                        expected.p, expected.q
                    ),
                    dominant.curve == expected,
                    "expect.dominant_curve",
                ),
            );
        }
        for g in &growth {
            let c = g.curve;
            out.estimate(
                e(
                    format!("terminal rate of ({}, {})", c.p, c.q),
                    g.terminal_rate,
                    "curve_growth",
                )
                .within(dominant.tau_hat + curves.eps, "tau_hat + eps"),
            );
            out.labelled(
                "ergodic",
                "curve_growth",
                &format!("{label} ({}, {})", c.p, c.q),
                g.checks.clone(),
            );
        }
        let mut flags = vec![Some(0.0); n + 1];
        for i in &dominant.records.indices {
            flags[*i] = Some(1.0);
        }
        let mut header: Vec<String> = COCYCLE_COLUMNS.iter().map(|s| s.to_string()).collect();
        header.extend(
            growth
                .iter()
                .map(|g| format!("log_l_{}_{}", g.curve.p, g.curve.q)),
        );
        let refs: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut t = Table::new(format!("trajectory_seed_{seed}"), &refs);
        for (k, a) in trace.a.iter().enumerate() {
            let rate = if k == 0 { None } else { cell(a / k as f64) };
            let mut row = vec![cell(k as f64), cell(*a), rate, flags[k]];
            row.extend(growth.iter().map(|g| cell(g.log_lengths[k])));
            t.push(row);
        }
        out.tables.push(t);
    }
    Ok(())
}

fn thurston_experiment(cfg: &ExperimentConfig, out: &mut Outcome) {
    let spec = cfg.thurston.clone().expect("defaults filled");
    let tol = cfg.tolerances;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut t = Table::new("pairs", &THURSTON_COLUMNS);
    let mut worst = 0.0f64;
    for j in 0..spec.pairs {
        let x = TorusTeich.sample_point(&mut rng);
        let y = TorusTeich.sample_point(&mut rng);
        let cf = thurston_dist(x, y, ThurstonMode::ClosedForm);
        let en = thurston_dist(x, y, ThurstonMode::Enumerate(spec.bound));
        let (Some(cf), Some(en)) = (
            attempt(out, "spaces", "thurston_dist", "closed form", cf),
            attempt(out, "spaces", "thurston_dist", "enumeration", en),
        ) else {
            continue;
        };
        let gap = (cf.value - en.value).abs();
        worst = worst.max(gap);
        let (p, q) = en
            .argmax
            .map_or((None, None), |c| (cell(c.p as f64), cell(c.q as f64)));
        t.push(vec![
            cell(j as f64),
            cell(x.re),
            cell(x.im),
            cell(y.re),
            cell(y.im),
            cell(cf.value),
            cell(en.value),
            cell(gap),
            p,
            q,
        ]);
    }
    let curves = primitive_pairs(spec.bound).len();
    out.estimate(Estimate::new(
        "enumerated curves",
        curves as f64,
        "spaces",
        "thurston_dist",
    ));
    out.estimate(
        Estimate::new(
            "max |enumerated - closed form|",
            worst,
            "spaces",
            "thurston_dist",
        )
        .within(tol.geometric, "largest eigenvalue of the Gram quotient"),
    );
    out.check(
        "spaces",
        "thurston_dist",
        Check::at_most(
            format!(
                "enumeration with bound {} matches the closed form on {} pairs",
                spec.bound, spec.pairs
            ),
            worst,
            tol.geometric,
            "largest eigenvalue of the Gram quotient",
        ),
    );
    let l = thurston_dist(
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, 2.0),
        ThurstonMode::ClosedForm,
    );
    if let Some(l) = attempt(out, "spaces", "thurston_dist", "L(i, 2i)", l) {
        out.check(
            "spaces",
            "thurston_dist",
            Check::at_most(
                "|L(i, 2i) - ln(2)/2|",
                (l.value - 0.5 * 2f64.ln()).abs(),
                tol.algebraic,
                "stretch of a vertical scaling",
            ),
        );
    }
    out.tables.push(t);
}

fn invariants_experiment<S>(
    space: &S,
    maps: &[Semicontraction<S>],
    cfg: &ExperimentConfig,
    out: &mut Outcome,
) where
    S: Space + CatalogFunctionals,
{
    let n = cfg.horizon();
    let samples = cfg.samples();
    let seed = cfg.seed;
    let tol = cfg.tolerances;
    let name = space.name();
    out.labelled(
        "core",
        "check_triangle",
        &name,
        check_triangle(space, samples, seed, tol.algebraic).into(),
    );
    if space.is_separating() {
        out.labelled(
            "core",
            "check_separation",
            &name,
            check_separation(space, samples, seed, tol.algebraic).into(),
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for anchor in sample_points(space, 5, rng.random()) {
        if let Some(h) = attempt(
            out,
            "core",
            "internal_functional",
            &name,
            internal_functional(space, &anchor),
        ) {
            out.labelled(
                "core",
                "check_functional",
                &name,
                check_functional(space, &h, samples, seed, tol.algebraic),
            );
        }
    }
    space.catalog_checks(samples, seed, tol.algebraic, out);
    for f in maps {
        let label = f.label().to_string();
        out.check(
            "spectral",
            "semicontraction",
            f.check_contraction(space, samples, seed, tol.algebraic),
        );
        if let Some(trace) = attempt(
            out,
            "spectral",
            "orbit",
            &label,
            orbit(space, f, &space.base_point(), n),
        ) {
            out.labelled("spectral", "orbit", &label, trace.checks);
        }
        let bound = drift_below_displacement(space, f, n, samples.min(1000), seed, tol.algebraic);
        if let Some(c) = attempt(out, "spectral", "min_displacement", &label, bound) {
            out.check("spectral", "min_displacement", c);
        }
    }
    for i in 0..maps.len() {
        for j in i + 1..maps.len() {
            let r = tracial_check(space, &maps[i], &maps[j], n, tol.algebraic);
            if let Some(r) = attempt(
                out,
                "spectral",
                "tracial_check",
                &format!("maps {i}, {j}"),
                r,
            ) {
                out.estimate(
                    Estimate::new(
                        format!("|tau(fg) - tau(gf)| for maps {i}, {j}"),
                        r.difference,
                        "spectral",
                        "tracial_check",
                    )
                    .within(r.check.tolerance, "tracial property"),
                );
                out.check("spectral", "tracial_check", r.check);
            }
        }
    }
}

/// Space-specific closed-form functionals for the invariants suite.
pub trait CatalogFunctionals: Space {
    fn catalog_checks(&self, _samples: usize, _seed: u64, _tol: f64, _out: &mut Outcome) {}
}

impl CatalogFunctionals for Euclidean {
    fn catalog_checks(&self, samples: usize, seed: u64, tol: f64, out: &mut Outcome) {
        if !self.is_hilbert() {
            return;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6b);
        for j in 0..4u64 {
            let v: Vec<f64> = (0..self.dim())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
            let v: Vec<f64> = v.iter().map(|x| x / norm).collect();
            for r in [Radius::Finite(0.0), Radius::Finite(1.0), Radius::Infinite] {
                let Some(h) = attempt(
                    out,
                    "spaces",
                    "hilbert_functional",
                    "catalog",
                    hilbert_functional(self, r, &v),
                ) else {
                    continue;
                };
                let label = format!("hilbert functional {j} r = {r:?}");
                out.labelled(
                    "core",
                    "check_functional",
                    &label,
                    check_functional(self, &h, samples, seed + j, tol),
                );
                out.labelled(
                    "spaces",
                    "check_convexity",
                    &label,
                    check_convexity(self, &h, samples, seed + j, tol).into(),
                );
                if r == Radius::Infinite {
                    let c = check_homogeneity(self, &h, samples, seed + j, tol);
                    out.labelled("spaces", "check_homogeneity", &label, c.into());
                }
            }
        }
    }
}

impl CatalogFunctionals for PoincareDisk {
    fn catalog_checks(&self, samples: usize, seed: u64, tol: f64, out: &mut Outcome) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd5);
        for _ in 0..4 {
            let zeta = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            if let Some(h) = attempt(
                out,
                "spaces",
                "disk_busemann",
                "catalog",
                disk_busemann(zeta),
            ) {
                let label = format!("busemann at angle {:.6}", zeta.arg());
                out.labelled(
                    "core",
                    "check_functional",
                    &label,
                    check_functional(self, &h, samples, seed, tol),
                );
            }
        }
    }
}

impl CatalogFunctionals for metric_spectral::spaces::PositiveCone {}
impl CatalogFunctionals for metric_spectral::spaces::OperatorSpace {}
impl CatalogFunctionals for TorusTeich {}
