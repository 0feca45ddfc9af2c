//! Heavy-tail finite-horizon approximations of the joint ruin probabilities
//! and their empirical verification against Monte Carlo.
//!
//! For regularly varying claims the probability that a given ruin event
//! happens by horizon T is asymptotically driven by one large discounted
//! claim: the first-order approximation is lambda * T * F_T_bar(x), where
//! F_T_bar is the tail of the uniformly-discounted single-claim law and x is
//! the normalized reserve of the component that determines the event (x2 for
//! simultaneous ruin, x1 for first ruin, x_i for the univariate events).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::claims::{ClaimDistribution, DiscountedClaimLaw};
use crate::estimate::{estimate_finite_ruin_all, FiniteRuinKind, ALL_FINITE_KINDS};
use crate::model::{InitialReserves, ModelParams};
use crate::report::EstimateReport;

/// Approximations larger than this are flagged "not in asymptotic regime":
/// the first-order formula degrades when the event is not rare.
pub const DEFAULT_REGIME_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AsymptoticsError {
    #[error("degenerate regime: x1 = {x1} > x2 = {x2}; the joint asymptotics assume x1 <= x2")]
    Degenerate { x1: f64, x2: f64 },
    #[error(
        "MC budget {n} cannot reach SE < 20% of the approximation {approx:e} \
         at the largest grid point (needs about {needed} samples)"
    )]
    Budget { n: u64, approx: f64, needed: u64 },
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// Ruin functional being approximated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AsymptoticKind {
    /// Simultaneous ruin of both components by T.
    Max,
    /// Ruin of at least one component by T.
    Min,
    Psi1,
    Psi2,
}

impl AsymptoticKind {
    /// Normalized reserve that drives the first-order term.
    pub fn x_target(&self, x1: f64, x2: f64) -> f64 {
        match self {
            AsymptoticKind::Max | AsymptoticKind::Psi2 => x2,
            AsymptoticKind::Min | AsymptoticKind::Psi1 => x1,
        }
    }

    fn finite_kind(&self) -> FiniteRuinKind {
        match self {
            AsymptoticKind::Max => FiniteRuinKind::MaxSimultaneous,
            AsymptoticKind::Min => FiniteRuinKind::Min,
            AsymptoticKind::Psi1 => FiniteRuinKind::Psi1,
            AsymptoticKind::Psi2 => FiniteRuinKind::Psi2,
        }
    }
}

/// First-order approximation value with its qualifiers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxValue {
    /// lambda * T * F_T_bar(x_target); not clipped, may exceed 1.
    pub value: f64,
    /// value < regime threshold: the event is rare enough for the
    /// first-order formula to be meaningful.
    pub in_regime: bool,
    /// The claim family is regularly varying, as the limit theorems assume.
    pub hypothesis_met: bool,
}

/// First-order approximation of the chosen ruin probability.
pub fn approx_ruin(
    params: &ModelParams,
    claim: &ClaimDistribution,
    x1: f64,
    x2: f64,
    horizon: f64,
    kind: AsymptoticKind,
    regime_threshold: f64,
) -> Result<ApproxValue, AsymptoticsError> {
    if x1 > x2 {
        return Err(AsymptoticsError::Degenerate { x1, x2 });
    }
    if !(horizon > 0.0) {
        return Err(AsymptoticsError::Invalid(format!(
            "horizon must be positive (got {horizon})"
        )));
    }
    let law = DiscountedClaimLaw::new(claim.clone(), params.r, horizon);
    let value = params.lambda * horizon * law.survival_t(kind.x_target(x1, x2));
    Ok(ApproxValue {
        value,
        in_regime: value < regime_threshold,
        hypothesis_met: claim.as_reg_varying().is_some(),
    })
}

/// Approximation, MC estimate and their ratio for one ruin functional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEntry {
    pub approximation: f64,
    pub in_regime: bool,
    pub mc: EstimateReport,
    pub ratio: f64,
    /// MC confidence interval propagated through the deterministic
    /// denominator.
    pub ratio_ci95: (f64, f64),
}

/// One grid point of the empirical verification: all four ruin functionals
/// estimated from common paths, each against its approximation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub x1: f64,
    pub x2: f64,
    pub horizon: f64,
    pub hypothesis_met: bool,
    pub max: RatioEntry,
    pub min: RatioEntry,
    pub psi1: RatioEntry,
    pub psi2: RatioEntry,
    /// Both components ruined by T, possibly at different instants; kept for
    /// inclusion-exclusion checks against min/psi1/psi2.
    pub both_events: EstimateReport,
}

impl AsymptoticReport {
    pub fn entry(&self, kind: AsymptoticKind) -> &RatioEntry {
        match kind {
            AsymptoticKind::Max => &self.max,
            AsymptoticKind::Min => &self.min,
            AsymptoticKind::Psi1 => &self.psi1,
            AsymptoticKind::Psi2 => &self.psi2,
        }
    }
}

fn ratio_entry(approx: ApproxValue, mc: EstimateReport) -> RatioEntry {
    let a = approx.value;
    RatioEntry {
        approximation: a,
        in_regime: approx.in_regime,
        ratio: mc.estimate / a,
        ratio_ci95: (mc.ci95.0 / a, mc.ci95.1 / a),
        mc,
    }
}

#[allow(clippy::too_many_arguments)]
fn report_at(
    params: &ModelParams,
    claim: &ClaimDistribution,
    x1: f64,
    x2: f64,
    horizon: f64,
    regime_threshold: f64,
    n: u64,
    seed: u64,
    workers: usize,
) -> Result<AsymptoticReport, AsymptoticsError> {
    let reserves = InitialReserves {
        u1: params.delta1 * x1,
        u2: params.delta2 * x2,
    };
    let all = estimate_finite_ruin_all(params, &reserves, claim, horizon, n, seed, workers);
    let mc = |k: FiniteRuinKind| {
        let idx = ALL_FINITE_KINDS.iter().position(|&x| x == k).unwrap();
        all[idx].clone()
    };
    let entry = |kind: AsymptoticKind| -> Result<RatioEntry, AsymptoticsError> {
        let approx = approx_ruin(params, claim, x1, x2, horizon, kind, regime_threshold)?;
        Ok(ratio_entry(approx, mc(kind.finite_kind())))
    };
    Ok(AsymptoticReport {
        x1,
        x2,
        horizon,
        hypothesis_met: claim.as_reg_varying().is_some(),
        max: entry(AsymptoticKind::Max)?,
        min: entry(AsymptoticKind::Min)?,
        psi1: entry(AsymptoticKind::Psi1)?,
        psi2: entry(AsymptoticKind::Psi2)?,
        both_events: mc(FiniteRuinKind::BothEvents),
    })
}

/// Empirical verification sweep: at each grid point (x1, x2), MC estimates
/// from common random numbers (same master seed at every point, for
/// variance-stable trend curves) against the approximations.
///
/// The budget precheck requires the per-point sample count to be large
/// enough that the binomial SE at the largest grid point stays below 20% of
/// the approximation for the focal kind.
#[allow(clippy::too_many_arguments)]
pub fn ratio_sweep(
    params: &ModelParams,
    claim: &ClaimDistribution,
    grid: &[(f64, f64)],
    horizon: f64,
    kind: AsymptoticKind,
    n: u64,
    seed: u64,
    workers: usize,
    regime_threshold: f64,
) -> Result<Vec<AsymptoticReport>, AsymptoticsError> {
    if grid.is_empty() {
        return Err(AsymptoticsError::Invalid("empty sweep grid".into()));
    }
    if grid
        .windows(2)
        .any(|w| w[1].0 < w[0].0 || w[1].1 < w[0].1)
    {
        return Err(AsymptoticsError::Invalid(
            "sweep grid must be nondecreasing in both coordinates".into(),
        ));
    }
    let &(lx1, lx2) = grid.last().unwrap();
    let approx_last = approx_ruin(params, claim, lx1, lx2, horizon, kind, regime_threshold)?;
    // SE ~ sqrt(p (1-p) / n) with p ~ approximation; SE < 0.2 p needs
    // n > (1 - p) / (0.04 p)
    let p = approx_last.value.min(0.5);
    let needed = ((1.0 - p) / (0.04 * p)).ceil() as u64;
    if n < needed {
        return Err(AsymptoticsError::Budget {
            n,
            approx: approx_last.value,
            needed,
        });
    }
    grid.iter()
        .map(|&(x1, x2)| {
            report_at(params, claim, x1, x2, horizon, regime_threshold, n, seed, workers)
        })
        .collect()
}

/// Inclusion-exclusion decomposition at one point, all from common paths:
/// psi1 + psi2 - min equals "both events by T" exactly, and its gap to
/// "both negative simultaneously" isolates the recovery-between-ruins mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IeDecomposition {
    pub psi1: EstimateReport,
    pub psi2: EstimateReport,
    pub min: EstimateReport,
    pub both_events: EstimateReport,
    pub max_simultaneous: EstimateReport,
    /// psi1 + psi2 - min, which matches both_events.estimate exactly.
    pub both_from_ie: f64,
    /// both_events - max_simultaneous >= 0: simultaneous ruin implies both
    /// events, never the other way around.
    pub gap: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn ie_decomposition(
    params: &ModelParams,
    claim: &ClaimDistribution,
    x1: f64,
    x2: f64,
    horizon: f64,
    n: u64,
    seed: u64,
    workers: usize,
) -> IeDecomposition {
    let reserves = InitialReserves {
        u1: params.delta1 * x1,
        u2: params.delta2 * x2,
    };
    let all = estimate_finite_ruin_all(params, &reserves, claim, horizon, n, seed, workers);
    let [min, max_sim, both, psi1, psi2] = all;
    IeDecomposition {
        both_from_ie: psi1.estimate + psi2.estimate - min.estimate,
        gap: both.estimate - max_sim.estimate,
        psi1,
        psi2,
        min,
        both_events: both,
        max_simultaneous: max_sim,
    }
}

/// Plot-ready CSV for one sweep:
/// x1, x2, T, estimate, SE, approximation, ratio, ratio CI, in-regime flag.
pub fn sweep_csv(reports: &[AsymptoticReport], kind: AsymptoticKind) -> String {
    let mut out = String::from(
        "x1,x2,horizon,estimate,std_error,approximation,ratio,ratio_ci_lo,ratio_ci_hi,in_regime,hypothesis_met\n",
    );
    for rep in reports {
        let e = rep.entry(kind);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            rep.x1,
            rep.x2,
            rep.horizon,
            e.mc.estimate,
            e.mc.std_error,
            e.approximation,
            e.ratio,
            e.ratio_ci95.0,
            e.ratio_ci95.1,
            e.in_regime,
            rep.hypothesis_met,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::claims::s_of_x;
    use approx::assert_relative_eq;

    fn params() -> ModelParams {
        ModelParams {
            r: 0.05,
            lambda: 1.0,
            c1: 2.0,
            c2: 1.0,
            delta1: 0.5,
            delta2: 0.5,
        }
    }

    fn heavy() -> ClaimDistribution {
        ClaimDistribution::reg_varying(1.5, 1.0).unwrap()
    }

    #[test]
    fn equal_reserves_collapse_min_and_max() {
        let p = params();
        let x = 50.0;
        let min = approx_ruin(&p, &heavy(), x, x, 10.0, AsymptoticKind::Min, 0.1).unwrap();
        let max = approx_ruin(&p, &heavy(), x, x, 10.0, AsymptoticKind::Max, 0.1).unwrap();
        assert_eq!(min.value, max.value);
        assert!(min.value > 0.0);
        assert!(min.hypothesis_met);
    }

    #[test]
    fn small_reserves_flagged_out_of_regime() {
        let p = params();
        let a = approx_ruin(&p, &heavy(), 0.5, 0.5, 10.0, AsymptoticKind::Min, 0.1).unwrap();
        assert!(a.value > 1.0, "approximation {} should exceed 1", a.value);
        assert!(!a.in_regime);
    }

    #[test]
    fn degenerate_order_rejected() {
        let p = params();
        let err = approx_ruin(&p, &heavy(), 3.0, 1.0, 10.0, AsymptoticKind::Min, 0.1).unwrap_err();
        assert!(matches!(err, AsymptoticsError::Degenerate { .. }));
    }

    #[test]
    fn reference_point_matches_slowly_varying_route() {
        // alpha=1.5, beta=1, r=0.05, T=10, x2=500: the approximation computed
        // through F_T_bar quadrature must agree with the independent
        // S(x)/x^alpha change-of-variable route
        let p = params();
        let claim = heavy();
        let rv = claim.as_reg_varying().unwrap();
        let a = approx_ruin(&p, &claim, 100.0, 500.0, 10.0, AsymptoticKind::Max, 0.1).unwrap();
        let s_route = s_of_x(rv, p.r, 10.0, 500.0).unwrap() / 500.0f64.powf(rv.alpha);
        let direct = p.lambda * 10.0 * s_route;
        assert_relative_eq!(a.value, direct, max_relative = 1e-6);
        assert!(a.in_regime);
    }

    #[test]
    fn min_to_max_ratio_is_tail_ratio() {
        let p = params();
        let (x1, x2) = (40.0, 90.0);
        let t = 10.0;
        let min = approx_ruin(&p, &heavy(), x1, x2, t, AsymptoticKind::Min, 0.1).unwrap();
        let max = approx_ruin(&p, &heavy(), x1, x2, t, AsymptoticKind::Max, 0.1).unwrap();
        let law = DiscountedClaimLaw::new(heavy(), p.r, t);
        assert_relative_eq!(
            min.value / max.value,
            law.survival_t(x1) / law.survival_t(x2),
            max_relative = 1e-12
        );
        assert!(min.value >= max.value);
    }

    #[test]
    fn approximation_inherits_regular_variation() {
        // approx(t x) / approx(x) trends toward t^{-alpha}
        let p = params();
        let t = 1.5f64;
        let mut prev_gap = f64::INFINITY;
        for x in [50.0, 200.0, 800.0] {
            let base = approx_ruin(&p, &heavy(), x, x, 10.0, AsymptoticKind::Min, 0.1).unwrap();
            let scaled =
                approx_ruin(&p, &heavy(), t * x, t * x, 10.0, AsymptoticKind::Min, 0.1).unwrap();
            let gap = (scaled.value / base.value - t.powf(-1.5)).abs();
            assert!(gap < prev_gap, "gap {gap} did not shrink at x = {x}");
            prev_gap = gap;
        }
    }

    #[test]
    fn exponential_claims_fail_hypothesis() {
        let p = params();
        let claim = ClaimDistribution::exponential(1.0).unwrap();
        let a = approx_ruin(&p, &claim, 10.0, 20.0, 5.0, AsymptoticKind::Min, 0.1).unwrap();
        assert!(!a.hypothesis_met);
    }

    #[test]
    fn sweep_trends_toward_one_and_obeys_set_algebra() {
        let p = params();
        let grid = [(10.0, 10.0), (160.0, 160.0)];
        let reports = ratio_sweep(
            &p,
            &heavy(),
            &grid,
            5.0,
            AsymptoticKind::Min,
            100_000,
            42,
            4,
            0.1,
        )
        .unwrap();
        assert_eq!(reports.len(), 2);
        for rep in &reports {
            // inclusion-exclusion exact with common paths
            let ie = rep.min.mc.estimate - rep.psi1.mc.estimate - rep.psi2.mc.estimate
                + rep.both_events.estimate;
            assert!(ie.abs() < 1e-15, "set algebra violated: {ie}");
            assert!(rep.min.ratio_ci95.0 <= rep.min.ratio && rep.min.ratio <= rep.min.ratio_ci95.1);
        }
        // trend toward the limit as reserves grow
        let first = (reports[0].min.ratio - 1.0).abs();
        let last = (reports[1].min.ratio - 1.0).abs();
        assert!(
            last <= first,
            "|ratio-1| grew along the sweep: {first} -> {last}"
        );
    }

    #[test]
    fn sweep_budget_precheck() {
        let p = params();
        let grid = [(100.0, 100.0), (2000.0, 2000.0)];
        let err = ratio_sweep(
            &p,
            &heavy(),
            &grid,
            5.0,
            AsymptoticKind::Min,
            100,
            42,
            2,
            0.1,
        )
        .unwrap_err();
        assert!(matches!(err, AsymptoticsError::Budget { .. }));
    }

    #[test]
    fn sweep_rejects_decreasing_grid() {
        let p = params();
        let grid = [(100.0, 100.0), (50.0, 120.0)];
        let err = ratio_sweep(
            &p,
            &heavy(),
            &grid,
            5.0,
            AsymptoticKind::Min,
            100_000,
            42,
            2,
            0.1,
        )
        .unwrap_err();
        assert!(matches!(err, AsymptoticsError::Invalid(_)));
    }

    #[test]
    fn decomposition_gap_nonnegative_and_ie_exact() {
        let p = params();
        let d = ie_decomposition(&p, &heavy(), 3.0, 8.0, 5.0, 50_000, 7, 4);
        assert!(
            (d.both_from_ie - d.both_events.estimate).abs() < 1e-15,
            "IE identity violated"
        );
        assert!(d.gap >= 0.0);
    }

    #[test]
    fn decomposition_gap_vanishes_in_degenerate_regime() {
        // x1 > x2: the ordering never crosses, so component-1 ruin happens
        // while component 2 is already negative -- both-events and
        // simultaneous ruin coincide pathwise
        let p = params();
        let d = ie_decomposition(&p, &heavy(), 9.0, 2.0, 5.0, 50_000, 7, 4);
        assert_eq!(d.gap, 0.0);
        assert_eq!(d.both_events.estimate, d.max_simultaneous.estimate);
    }

    #[test]
    fn csv_has_one_row_per_point_plus_header() {
        let p = params();
        let grid = [(20.0, 20.0), (40.0, 40.0), (80.0, 80.0)];
        let reports = ratio_sweep(
            &p,
            &heavy(),
            &grid,
            5.0,
            AsymptoticKind::Min,
            20_000,
            42,
            2,
            0.1,
        )
        .unwrap();
        let csv = sweep_csv(&reports, AsymptoticKind::Min);
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("x1,x2,horizon,"));
        for line in csv.lines().skip(1) {
            assert_eq!(line.split(',').count(), 11);
        }
    }
}
