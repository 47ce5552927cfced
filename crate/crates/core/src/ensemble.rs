//! Ranges of disorder realizations and the order-preserving parallel map
//! every Monte Carlo estimator runs on.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disorder::Realization;
use crate::error::{config_err, Result};

/// Realizations `first .. first + count` of the ensemble seeded by `master_seed`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ensemble {
    pub master_seed: u64,
    pub first: u64,
    pub count: usize,
}

impl Ensemble {
    pub fn new(master_seed: u64, count: usize) -> Self {
        Self {
            master_seed,
            first: 0,
            count,
        }
    }

    /// The next `count` realizations after this range.
    pub fn following(&self, count: usize) -> Self {
        Self {
            master_seed: self.master_seed,
            first: self.first + self.count as u64,
            count,
        }
    }

    pub fn realization(&self, k: usize) -> Realization {
        Realization::new(self.master_seed, self.first + k as u64)
    }

    pub fn require(&self, min: usize, what: &str) -> Result<()> {
        if self.count < min {
            return Err(config_err!("{what} needs at least {min} realizations, got {}", self.count));
        }
        Ok(())
    }

    /// `f` over every realization, in parallel, results in realization order.
    ///
    /// Each task depends only on its realization, so the output is identical
    /// for any number of worker threads.
    pub fn map<R, F>(&self, f: F) -> Result<Vec<R>>
    where
        R: Send,
        F: Fn(Realization) -> Result<R> + Sync + Send,
    {
        (0..self.count).into_par_iter().map(|k| f(self.realization(k))).collect()
    }
}

/// Mean and standard error of the mean, summed in input order.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order_across_pool_sizes() {
        let e = Ensemble {
            master_seed: 3,
            first: 10,
            count: 257,
        };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| e.map(|r| Ok(r.index * 2)).unwrap())
        };
        let one = run(1);
        assert_eq!(one, (10..267).map(|i| i * 2).collect::<Vec<_>>());
        assert_eq!(run(4), one);
    }

    #[test]
    fn following_ranges_are_disjoint() {
        let a = Ensemble::new(1, 5);
        let b = a.following(3);
        assert_eq!(b.realization(0).index, 5);
    }

    #[test]
    fn mean_and_error() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }
}
