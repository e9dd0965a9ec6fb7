use serde::Serialize;

use crate::ergodic::cocycle::{compose_cocycle, CocycleTrace};
use crate::ergodic::driver::CocycleDriver;
use crate::ergodic::family::{CocycleFamily, MatrixFamily};
use crate::error::{parameter, Result};
use crate::report::CheckList;

/// Blocks used to estimate the per-step standard deviation.
pub const CLT_BLOCKS: usize = 20;

#[derive(Debug, Clone, Serialize)]
pub struct LyapunovEstimate {
    /// `(1/n) ln ||Z_n||`.
    pub exponent: f64,
    /// Running infimum of `a(k)/k`, final value.
    pub fekete_inf: f64,
    /// `(k, a(k)/k)` at 16 evenly spaced checkpoints.
    pub checkpoints: Vec<(usize, f64)>,
    /// Per-step standard deviation estimated from block means.
    pub sigma_hat: f64,
    /// `4 sigma_hat / sqrt(n)`.
    pub clt_tolerance: f64,
    pub horizon: usize,
    pub checks: CheckList,
}

/// Per-step standard deviation of the increments of `a`, from the spread
/// of `CLT_BLOCKS` block means (zero for horizons shorter than the block count).
pub fn block_sigma(a: &[f64]) -> f64 {
    let n = a.len() - 1;
    let len = n / CLT_BLOCKS;
    if len == 0 {
        return 0.0;
    }
    let means: Vec<f64> = (0..CLT_BLOCKS)
        .map(|b| (a[(b + 1) * len] - a[b * len]) / len as f64)
        .collect();
    let mean = means.iter().sum::<f64>() / CLT_BLOCKS as f64;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (CLT_BLOCKS - 1) as f64;
    (var * len as f64).sqrt()
}

/// Exponent, Fekete infimum and CLT tolerance of an already composed cocycle.
pub fn lyapunov_estimate<P>(trace: &CocycleTrace<P>) -> Result<LyapunovEstimate> {
    let d = trace.drift()?;
    let n = trace.horizon();
    let checkpoints = (1..=16)
        .map(|j| ((j * n / 16).max(1), d.sequence[(j * n / 16).max(1) - 1]))
        .collect();
    let sigma_hat = block_sigma(&trace.a);
    Ok(LyapunovEstimate {
        exponent: d.tau_hat,
        fekete_inf: d.fekete_final(),
        checkpoints,
        sigma_hat,
        clt_tolerance: 4.0 * sigma_hat / (n as f64).sqrt(),
        horizon: n,
        checks: trace.checks.clone(),
    })
}

/// The drift of the left-multiplication cocycle, `(1/n) ln ||A_{c_0} ... A_{c_{n-1}}||`.
pub fn top_lyapunov(driver: &CocycleDriver<MatrixFamily>, n: usize) -> Result<LyapunovEstimate> {
    lyapunov_estimate(&compose_cocycle(driver, n)?)
}

/// Runs `run` for each seed on its own thread; results come back in seed order.
pub fn across_seeds<F, T, R>(
    driver: &CocycleDriver<F>,
    seeds: &[u64],
    run: R,
) -> Result<Vec<(u64, T)>>
where
    F: CocycleFamily + Clone,
    T: Send,
    R: Fn(&CocycleDriver<F>) -> Result<T> + Sync,
{
    if seeds.is_empty() {
        return Err(parameter("no seeds given"));
    }
    let mut sorted = seeds.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let run = &run;
    std::thread::scope(|scope| {
        let handles: Vec<_> = sorted
            .iter()
            .map(|&seed| {
                let d = driver.with_seed(seed);
                scope.spawn(move || run(&d).map(|r| (seed, r)))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("trajectory thread panicked"))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ergodic::driver::ChoiceProcess;
    use nalgebra::{DMatrix, DVector};

    fn diag(d: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(d))
    }

    fn iid(mats: Vec<DMatrix<f64>>, seed: u64) -> CocycleDriver<MatrixFamily> {
        let w = vec![1.0 / mats.len() as f64; mats.len()];
        CocycleDriver::new(
            ChoiceProcess::Iid { weights: w },
            seed,
            MatrixFamily::new(mats).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn single_diagonal_matrix() {
        let driver =
            CocycleDriver::deterministic(MatrixFamily::new(vec![diag(&[2.0, 0.5])]).unwrap())
                .unwrap();
        let est = top_lyapunov(&driver, 10_000).unwrap();
        assert!((est.exponent - 2f64.ln()).abs() < 1e-12);
        assert!(est.sigma_hat < 1e-12);
        assert!(est.checks.all_passed());
    }

    #[test]
    fn independent_diagonal_walks() {
        // exponents of the diagonal entries drift at ln4/2 and ln2/2
        let est =
            top_lyapunov(&iid(vec![diag(&[4.0, 1.0]), diag(&[1.0, 2.0])], 5), 20_000).unwrap();
        assert!(
            (est.exponent - 2f64.ln()).abs() < est.clt_tolerance.max(1e-3),
            "{est:?}"
        );
    }

    #[test]
    fn symmetric_walk_has_zero_exponent() {
        let est =
            top_lyapunov(&iid(vec![diag(&[2.0, 0.5]), diag(&[0.5, 2.0])], 17), 40_000).unwrap();
        // |walk| / n has mean of order sigma sqrt(2 / (pi n))
        assert!(est.exponent.abs() < est.clt_tolerance, "{est:?}");
        assert!(est.exponent >= 0.0);
    }

    #[test]
    fn seeds_run_in_parallel_deterministically() {
        let driver = iid(
            vec![
                diag(&[2.0, 0.5]),
                DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]),
            ],
            0,
        );
        let a = across_seeds(&driver, &[5, 1, 3], |d| {
            top_lyapunov(d, 2000).map(|e| e.exponent)
        })
        .unwrap();
        let b = across_seeds(&driver, &[3, 5, 1], |d| {
            top_lyapunov(d, 2000).map(|e| e.exponent)
        })
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().map(|p| p.0).collect::<Vec<_>>(), vec![1, 3, 5]);
        assert_eq!(
            a[0].1,
            top_lyapunov(&driver.with_seed(1), 2000).unwrap().exponent
        );
    }
}
