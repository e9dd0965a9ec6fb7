use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ergodic::family::CocycleFamily;
use crate::error::{parameter, Result};
use crate::metric::seeded;

/// The ergodic system `(Omega, T)` together with the partition that selects
/// which family member acts at each time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ChoiceProcess {
    /// Independent draws with the given weights.
    Iid { weights: Vec<f64> },
    /// Stationary Markov chain with the given row-stochastic transition matrix.
    Markov { transition: Vec<Vec<f64>> },
    /// Circle rotation `omega -> omega + angle mod 1`; the cell of `omega`
    /// among the sorted `cuts` selects the map.
    Rotation { angle: f64, cuts: Vec<f64> },
}

fn check_distribution(p: &[f64], what: &str) -> Result<()> {
    if p.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(parameter(format!("{what} must be nonnegative")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(parameter(format!("{what} must sum to 1, got {total}")));
    }
    Ok(())
}

fn strongly_connected(t: &[Vec<f64>]) -> bool {
    let n = t.len();
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let edge = if forward { t[i][j] } else { t[j][i] };
                if edge > 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

/// Stationary distribution of an irreducible chain.
pub fn stationary(t: &[Vec<f64>]) -> Vec<f64> {
    let n = t.len();
    // (P^t - I) pi = 0 with the last equation replaced by sum(pi) = 1
    let mut a = DMatrix::from_fn(n, n, |i, j| t[j][i] - if i == j { 1.0 } else { 0.0 });
    let mut b = DVector::zeros(n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    b[n - 1] = 1.0;
    let pi = a
        .lu()
        .solve(&b)
        .expect("irreducible chain has a unique stationary law");
    pi.iter().map(|p| p.max(0.0)).collect()
}

fn draw(cdf: &[f64], u: f64) -> usize {
    cdf.iter().position(|c| u < *c).unwrap_or(cdf.len() - 1)
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    p.iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}

impl ChoiceProcess {
    /// Checks the process against a family of `n` maps.
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            ChoiceProcess::Iid { weights } => {
                if weights.len() != n {
                    return Err(parameter(format!("{} weights for {n} maps", weights.len())));
                }
                check_distribution(weights, "i.i.d. weights")
            }
            ChoiceProcess::Markov { transition } => {
                if transition.len() != n || transition.iter().any(|r| r.len() != n) {
                    return Err(parameter(format!("transition matrix must be {n}x{n}")));
                }
                for row in transition {
                    check_distribution(row, "transition rows")?;
                }
                if !strongly_connected(transition) {
                    return Err(parameter("Markov chain is not irreducible"));
                }
                Ok(())
            }
            ChoiceProcess::Rotation { angle, cuts } => {
                if !(angle.is_finite() && *angle > 0.0 && *angle < 1.0) {
                    return Err(parameter("rotation angle must lie in (0, 1)"));
                }
                if cuts.len() + 1 != n {
                    return Err(parameter(format!(
                        "{} cuts give {} cells for {n} maps",
                        cuts.len(),
                        cuts.len() + 1
                    )));
                }
                if cuts.iter().any(|c| !(*c > 0.0 && *c < 1.0))
                    || cuts.windows(2).any(|w| w[1] <= w[0])
                {
                    return Err(parameter("cuts must be strictly increasing inside (0, 1)"));
                }
                Ok(())
            }
        }
    }

    /// The first `n` choices; bit-identical for identical seeds.
    pub fn choices(&self, seed: u64, n: usize) -> Vec<usize> {
        let mut rng = seeded(seed);
        match self {
            ChoiceProcess::Iid { weights } => {
                let cdf = cumulative(weights);
                (0..n).map(|_| draw(&cdf, rng.random::<f64>())).collect()
            }
            ChoiceProcess::Markov { transition } => {
                let rows: Vec<Vec<f64>> = transition.iter().map(|r| cumulative(r)).collect();
                let mut state = draw(&cumulative(&stationary(transition)), rng.random::<f64>());
                (0..n)
                    .map(|_| {
                        let current = state;
                        state = draw(&rows[state], rng.random::<f64>());
                        current
                    })
                    .collect()
            }
            ChoiceProcess::Rotation { angle, cuts } => {
                let omega0: f64 = rng.random();
                (0..n)
                    .map(|k| {
                        let omega = (omega0 + k as f64 * angle).fract();
                        cuts.iter().take_while(|c| **c <= omega).count()
                    })
                    .collect()
            }
        }
    }
}

/// A seeded source of the map sequence `f_omega, f_{T omega}, ...`.
#[derive(Debug, Clone)]
pub struct CocycleDriver<F> {
    pub process: ChoiceProcess,
    pub seed: u64,
    pub family: F,
}

impl<F: CocycleFamily> CocycleDriver<F> {
    pub fn new(process: ChoiceProcess, seed: u64, family: F) -> Result<Self> {
        if family.len() == 0 {
            return Err(parameter("map family is empty"));
        }
        process.validate(family.len())?;
        Ok(Self {
            process,
            seed,
            family,
        })
    }

    /// A driver that always applies the single map of `family`.
    pub fn deterministic(family: F) -> Result<Self> {
        Self::new(ChoiceProcess::Iid { weights: vec![1.0] }, 0, family)
    }

    pub fn with_seed(&self, seed: u64) -> Self
    where
        F: Clone,
    {
        Self {
            process: self.process.clone(),
            seed,
            family: self.family.clone(),
        }
    }

    pub fn choices(&self, n: usize) -> Vec<usize> {
        self.process.choices(self.seed, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iid_frequencies_and_determinism() {
        let p = ChoiceProcess::Iid {
            weights: vec![0.25, 0.75],
        };
        let a = p.choices(9, 40_000);
        assert_eq!(a, p.choices(9, 40_000));
        assert_ne!(a, p.choices(10, 40_000));
        let ones = a.iter().filter(|c| **c == 1).count() as f64 / a.len() as f64;
        assert!((ones - 0.75).abs() < 0.01);
    }

    #[test]
    fn markov_validation_and_stationarity() {
        let t = vec![vec![0.9, 0.1], vec![0.3, 0.7]];
        let p = ChoiceProcess::Markov {
            transition: t.clone(),
        };
        p.validate(2).unwrap();
        let pi = stationary(&t);
        assert!((pi[0] - 0.75).abs() < 1e-12 && (pi[1] - 0.25).abs() < 1e-12);
        let c = p.choices(3, 100_000);
        let zeros = c.iter().filter(|x| **x == 0).count() as f64 / c.len() as f64;
        assert!((zeros - 0.75).abs() < 0.02);
        let reducible = ChoiceProcess::Markov {
            transition: vec![vec![1.0, 0.0], vec![0.5, 0.5]],
        };
        assert!(reducible.validate(2).is_err());
        let bad_rows = ChoiceProcess::Markov {
            transition: vec![vec![0.5, 0.4], vec![0.5, 0.5]],
        };
        assert!(bad_rows.validate(2).is_err());
    }

    #[test]
    fn rotation_cells_have_lebesgue_frequency() {
        let p = ChoiceProcess::Rotation {
            angle: (5f64.sqrt() - 1.0) / 2.0,
            cuts: vec![0.3],
        };
        p.validate(2).unwrap();
        let c = p.choices(1, 10_000);
        let zeros = c.iter().filter(|x| **x == 0).count() as f64 / c.len() as f64;
        assert!((zeros - 0.3).abs() < 1e-2);
        assert!(ChoiceProcess::Rotation {
            angle: 0.3,
            cuts: vec![]
        }
        .validate(2)
        .is_err());
    }

    #[test]
    fn weights_must_sum_to_one() {
        assert!(ChoiceProcess::Iid {
            weights: vec![0.5, 0.6]
        }
        .validate(2)
        .is_err());
        assert!(ChoiceProcess::Iid { weights: vec![1.0] }
            .validate(2)
            .is_err());
    }
}
