//! Monte Carlo estimators for finite-time ruin probabilities and ruin-time
//! Laplace transforms.
//!
//! Determinism contract: every path index owns its own counter-based RNG
//! stream (see `rng`), per-path values are reduced chunk-by-chunk in index
//! order with compensated summation, and the chunk size is fixed. The result
//! is therefore a pure function of (params, reserves, estimand, n, seed) and
//! does not change with the worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::claims::ClaimDistribution;
use crate::model::{InitialReserves, ModelParams};
use crate::report::{EstimateReport, Kahan};
use crate::rng::path_rng;
use crate::simulate::{eventwise_joint_indicators, ruin_times};

const CHUNK: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error("truncation bias e^(-s*T_trunc) = {bound:e} exceeds the budget {budget:e}")]
    BiasBudgetExceeded { bound: f64, budget: f64 },
    #[error("invalid estimator parameter: {0}")]
    InvalidParameter(String),
}

/// Finite-horizon ruin event to estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiniteRuinKind {
    /// At least one component ruined by T.
    Min,
    /// Both components negative at the same instant by T.
    MaxSimultaneous,
    /// Both components ruined by T, possibly at different instants.
    BothEvents,
    /// Component 1 ruined by T.
    Psi1,
    /// Component 2 ruined by T.
    Psi2,
}

pub const ALL_FINITE_KINDS: [FiniteRuinKind; 5] = [
    FiniteRuinKind::Min,
    FiniteRuinKind::MaxSimultaneous,
    FiniteRuinKind::BothEvents,
    FiniteRuinKind::Psi1,
    FiniteRuinKind::Psi2,
];

/// Ruin time whose Laplace transform is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplaceKind {
    Min,
    MaxSimultaneous,
    Tau1,
    Tau2,
}

fn pool(workers: usize) -> rayon::ThreadPool {
    // 0 = rayon's default (all available cores); estimates are invariant
    // to the worker count either way
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("failed to build worker pool")
}

/// Estimate all five finite-horizon ruin probabilities from one common set
/// of paths, so the pathwise set-algebra identities hold exactly between the
/// returned estimates.
pub fn estimate_finite_ruin_all(
    params: &ModelParams,
    reserves: &InitialReserves,
    claim: &ClaimDistribution,
    horizon: f64,
    n: u64,
    seed: u64,
    workers: usize,
) -> [EstimateReport; 5] {
    let n_chunks = n.div_ceil(CHUNK);
    let hits: Vec<[u64; 5]> = pool(workers).install(|| {
        (0..n_chunks)
            .into_par_iter()
            .map(|chunk| {
                let lo = chunk * CHUNK;
                let hi = (lo + CHUNK).min(n);
                let mut counts = [0u64; 5];
                for i in lo..hi {
                    let mut rng = path_rng(seed, i);
                    let times = ruin_times(params, reserves, horizon, claim, &mut rng);
                    let ind = eventwise_joint_indicators(&times, horizon);
                    let flags = [
                        ind.ind_a_or_b,
                        ind.ind_simultaneous,
                        ind.ind_a_and_b,
                        ind.ind_a,
                        ind.ind_b,
                    ];
                    for (c, f) in counts.iter_mut().zip(flags) {
                        *c += f as u64;
                    }
                }
                counts
            })
            .collect()
    });
    let mut totals = [0u64; 5];
    for h in hits {
        for (t, c) in totals.iter_mut().zip(h) {
            *t += c;
        }
    }
    totals.map(|hits| EstimateReport::proportion(hits, n, seed, workers))
}

/// Estimate one finite-horizon ruin probability.
pub fn estimate_finite_ruin(
    params: &ModelParams,
    reserves: &InitialReserves,
    claim: &ClaimDistribution,
    horizon: f64,
    kind: FiniteRuinKind,
    n: u64,
    seed: u64,
    workers: usize,
) -> EstimateReport {
    let all = estimate_finite_ruin_all(params, reserves, claim, horizon, n, seed, workers);
    let idx = ALL_FINITE_KINDS.iter().position(|&k| k == kind).unwrap();
    all[idx].clone()
}

/// Estimate E[e^{-s tau} 1{tau <= T_trunc}]. The untruncated Laplace value
/// lies in [estimate, estimate + e^{-s T_trunc}].
#[allow(clippy::too_many_arguments)]
pub fn estimate_laplace(
    params: &ModelParams,
    reserves: &InitialReserves,
    claim: &ClaimDistribution,
    s: f64,
    kind: LaplaceKind,
    n: u64,
    t_trunc: f64,
    bias_budget: f64,
    seed: u64,
    workers: usize,
) -> Result<EstimateReport, EstimateError> {
    if !(s > 0.0) {
        return Err(EstimateError::InvalidParameter(format!(
            "Laplace argument s must be positive (got {s})"
        )));
    }
    let bias = (-s * t_trunc).exp();
    if bias > bias_budget {
        return Err(EstimateError::BiasBudgetExceeded {
            bound: bias,
            budget: bias_budget,
        });
    }
    let n_chunks = n.div_ceil(CHUNK);
    let partials: Vec<(f64, f64)> = pool(workers).install(|| {
        (0..n_chunks)
            .into_par_iter()
            .map(|chunk| {
                let lo = chunk * CHUNK;
                let hi = (lo + CHUNK).min(n);
                let mut sum = Kahan::default();
                let mut sum_sq = Kahan::default();
                for i in lo..hi {
                    let mut rng = path_rng(seed, i);
                    let times = ruin_times(params, reserves, t_trunc, claim, &mut rng);
                    let tau = match kind {
                        LaplaceKind::Min => times.t_min,
                        LaplaceKind::MaxSimultaneous => times.t_max,
                        LaplaceKind::Tau1 => times.tau1,
                        LaplaceKind::Tau2 => times.tau2,
                    };
                    if tau <= t_trunc {
                        let v = (-s * tau).exp();
                        sum.add(v);
                        sum_sq.add(v * v);
                    }
                }
                (sum.value(), sum_sq.value())
            })
            .collect()
    });
    let mut sum = Kahan::default();
    let mut sum_sq = Kahan::default();
    for (a, b) in partials {
        sum.add(a);
        sum_sq.add(b);
    }
    Ok(EstimateReport::bounded_mean(
        sum.value(),
        sum_sq.value(),
        n,
        bias,
        seed,
        workers,
    ))
}

/// Default truncation horizon for a bias budget: smallest T with
/// e^{-s T} <= budget, rounded up to a whole time unit.
pub fn default_t_trunc(s: f64, bias_budget: f64) -> f64 {
    (-bias_budget.ln() / s).ceil()
}

/// Univariate ruin-time Laplace estimates along the diagonal boundary line
/// u1/delta1 = u2/delta2. `boundary_points` are normalized coordinates
/// v = u1/delta1; each yields the Dirichlet value used by the IDE solver.
#[allow(clippy::too_many_arguments)]
pub fn boundary_laplace_table(
    params: &ModelParams,
    claim: &ClaimDistribution,
    s: f64,
    kind: LaplaceKind,
    boundary_points: &[f64],
    n: u64,
    t_trunc: f64,
    bias_budget: f64,
    seed: u64,
    workers: usize,
) -> Result<Vec<(f64, EstimateReport)>, EstimateError> {
    match kind {
        LaplaceKind::Tau1 | LaplaceKind::Tau2 => {}
        _ => {
            return Err(EstimateError::InvalidParameter(
                "boundary table supports only the univariate kinds Tau1 and Tau2".into(),
            ))
        }
    }
    boundary_points
        .iter()
        .map(|&v| {
            let reserves = InitialReserves {
                u1: params.delta1 * v,
                u2: params.delta2 * v,
            };
            estimate_laplace(
                params, &reserves, claim, s, kind, n, t_trunc, bias_budget, seed, workers,
            )
            .map(|rep| (v, rep))
        })
        .collect()
}
