//! Monte Carlo estimate reports with error quantification.

use serde::{Deserialize, Serialize};

/// Point estimate of a probability or Laplace-transform value together with
/// its sampling error, confidence interval and reproducibility metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimate: f64,
    pub std_error: f64,
    /// 95% confidence interval, clipped to [0, 1].
    pub ci95: (f64, f64),
    pub n_samples: u64,
    /// One-sided truncation bias bound e^{-s * T_trunc} for Laplace
    /// estimates; 0 for finite-horizon probabilities.
    pub truncation_bias_bound: f64,
    pub seed: u64,
    /// Thread count used for this run; in-memory metadata only. Not
    /// serialized: results are worker-count invariant, and persisted outputs
    /// must be byte-identical across --workers values.
    #[serde(skip)]
    pub worker_count: usize,
}

impl EstimateReport {
    /// Report for a raw proportion (mean of 0/1 indicators) with a Wilson
    /// 95% interval, which stays sane near 0 and 1.
    pub fn proportion(hits: u64, n: u64, seed: u64, workers: usize) -> Self {
        let nf = n as f64;
        let p = hits as f64 / nf;
        let se = (p * (1.0 - p) / nf).sqrt();
        let ci95 = wilson_interval(hits, n, 1.959963984540054);
        EstimateReport {
            estimate: p,
            std_error: se,
            ci95,
            n_samples: n,
            truncation_bias_bound: 0.0,
            seed,
            worker_count: workers,
        }
    }

    /// Report for the mean of a bounded [0, 1] variable with a
    /// normal-approximation interval.
    pub fn bounded_mean(
        sum: f64,
        sum_sq: f64,
        n: u64,
        bias_bound: f64,
        seed: u64,
        workers: usize,
    ) -> Self {
        let nf = n as f64;
        let mean = sum / nf;
        let var = ((sum_sq / nf) - mean * mean).max(0.0);
        let se = (var / nf).sqrt();
        let z = 1.959963984540054;
        EstimateReport {
            estimate: mean,
            std_error: se,
            ci95: ((mean - z * se).max(0.0), (mean + z * se).min(1.0)),
            n_samples: n,
            truncation_bias_bound: bias_bound,
            seed,
            worker_count: workers,
        }
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(hits: u64, n: u64, z: f64) -> (f64, f64) {
    let nf = n as f64;
    let p = hits as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Compensated (Kahan) accumulator for order-stable summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    pub fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_contains_point_estimate() {
        for (hits, n) in [(0u64, 100u64), (1, 100), (50, 100), (100, 100)] {
            let (lo, hi) = wilson_interval(hits, n, 1.96);
            let p = hits as f64 / n as f64;
            // Wilson center is shrunk toward 1/2; the interval still covers p.
            assert!(lo <= p + 1e-12 && p <= hi + 1e-12);
            assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        }
    }

    #[test]
    fn kahan_beats_naive_on_adversarial_sum() {
        let mut k = Kahan::default();
        k.add(1e16);
        for _ in 0..1000 {
            k.add(1.0);
        }
        k.add(-1e16);
        assert_eq!(k.value(), 1000.0);
    }
}
