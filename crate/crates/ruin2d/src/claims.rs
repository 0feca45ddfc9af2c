//! Claim-size distributions: sampling, survival/density interface, the
//! discounted-claim law F_T of e^{-rV} sigma with V uniform on (0, T], and
//! convolution-tail Monte Carlo oracles.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quad::{integrate_adaptive, GaussRule};
use crate::report::EstimateReport;
use crate::rng::path_rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClaimError {
    #[error("x = {x} is not beyond the splice point x0 = {x0}")]
    BelowSplice { x: f64, x0: f64 },
    #[error("survival inversion did not converge at u = {0}")]
    InversionFailed(f64),
    #[error("invalid claim parameter: {0}")]
    InvalidParameter(String),
}

/// Regularly varying claim family with survival L(x)/x^alpha beyond the
/// splice point x0 and survival 1 below it. The slowly varying factor is
/// L(x) = beta * ln(e + x), which is continuous and diverges at infinity.
/// x0 is the unique point where L(x0) = x0^alpha, making survival continuous.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegVaryingClaim {
    pub alpha: f64,
    pub beta: f64,
    #[serde(skip, default)]
    x0: f64,
}

impl RegVaryingClaim {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, ClaimError> {
        if !(alpha > 0.0) {
            return Err(ClaimError::InvalidParameter(format!(
                "tail index alpha must be positive (got {alpha})"
            )));
        }
        if !(beta > 0.0) {
            return Err(ClaimError::InvalidParameter(format!(
                "slowly varying scale beta must be positive (got {beta})"
            )));
        }
        let mut claim = RegVaryingClaim { alpha, beta, x0: 0.0 };
        claim.x0 = claim.solve_splice()?;
        Ok(claim)
    }

    pub fn splice_point(&self) -> f64 {
        self.x0
    }

    pub fn slowly_varying(&self, x: f64) -> f64 {
        self.beta * (std::f64::consts::E + x).ln()
    }

    /// Root of x^alpha = L(x): bracket by doubling, then bisect.
    fn solve_splice(&self) -> Result<f64, ClaimError> {
        let g = |x: f64| x.powf(self.alpha) - self.slowly_varying(x);
        let mut hi = 1.0;
        let mut guard = 0;
        while g(hi) < 0.0 {
            hi *= 2.0;
            guard += 1;
            if guard > 2000 {
                return Err(ClaimError::InversionFailed(hi));
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    fn survival(&self, x: f64) -> f64 {
        if x <= self.x0 {
            1.0
        } else {
            self.slowly_varying(x) / x.powf(self.alpha)
        }
    }

    fn density(&self, x: f64) -> f64 {
        if x <= self.x0 {
            0.0
        } else {
            // -(d/dx) [L(x) x^{-alpha}]
            let l = self.slowly_varying(x);
            let lp = self.beta / (std::f64::consts::E + x);
            (self.alpha * l / x - lp) / x.powf(self.alpha)
        }
    }

    /// Invert survival(x) = u for u in (0, 1]. The fixed-point map
    /// x -> (L(x)/u)^{1/alpha} converges fast because L is slowly varying;
    /// bisection is the fallback.
    fn quantile_from_survival(&self, u: f64) -> Result<f64, ClaimError> {
        if u >= 1.0 {
            return Ok(self.x0);
        }
        if u <= 0.0 {
            return Err(ClaimError::InversionFailed(u));
        }
        let mut x = self.x0.max(1.0);
        for _ in 0..100 {
            let next = (self.slowly_varying(x) / u).powf(1.0 / self.alpha);
            if (next - x).abs() <= 1e-12 * next.abs() {
                return Ok(next.max(self.x0));
            }
            x = next;
        }
        // bracketed bisection to 1e-10 relative
        let mut lo = self.x0;
        let mut hi = self.x0.max(1.0);
        let mut guard = 0;
        while self.survival(hi) > u {
            hi *= 2.0;
            guard += 1;
            if guard > 2000 {
                return Err(ClaimError::InversionFailed(u));
            }
        }
        loop {
            let mid = 0.5 * (lo + hi);
            if self.survival(mid) > u {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-10 * hi {
                return Ok(0.5 * (lo + hi));
            }
        }
    }
}

/// Claim-size distribution: sampling plus survival/density interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ClaimDistribution {
    Exponential { mean: f64 },
    RegVarying(RegVaryingClaim),
}

impl ClaimDistribution {
    pub fn exponential(mean: f64) -> Result<Self, ClaimError> {
        if !(mean > 0.0) {
            return Err(ClaimError::InvalidParameter(format!(
                "exponential mean must be positive (got {mean})"
            )));
        }
        Ok(ClaimDistribution::Exponential { mean })
    }

    pub fn reg_varying(alpha: f64, beta: f64) -> Result<Self, ClaimError> {
        Ok(ClaimDistribution::RegVarying(RegVaryingClaim::new(alpha, beta)?))
    }

    /// P{sigma > x}.
    pub fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        match self {
            ClaimDistribution::Exponential { mean } => (-x / mean).exp(),
            ClaimDistribution::RegVarying(rv) => rv.survival(x),
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match self {
            ClaimDistribution::Exponential { mean } => (-x / mean).exp() / mean,
            ClaimDistribution::RegVarying(rv) => rv.density(x),
        }
    }

    /// Mean claim size; +infinity for tail index alpha <= 1.
    pub fn mean(&self) -> f64 {
        match self {
            ClaimDistribution::Exponential { mean } => *mean,
            ClaimDistribution::RegVarying(rv) => {
                if rv.alpha <= 1.0 {
                    return f64::INFINITY;
                }
                // E[sigma] = integral of survival; split at the plateau edge,
                // then sum dyadic intervals of the tail until they vanish.
                let mut total = rv.x0;
                let mut a = rv.x0;
                loop {
                    let b = a * 2.0;
                    let piece = integrate_adaptive(a, b, 1e-12, 32, |x| rv.survival(x));
                    total += piece;
                    if piece < 1e-12 * total {
                        break;
                    }
                    a = b;
                }
                total
            }
        }
    }

    /// Draw a claim size by inversion of the survival function.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            ClaimDistribution::Exponential { mean } => {
                let u: f64 = rng.gen(); // in [0, 1)
                -mean * (1.0 - u).ln()
            }
            ClaimDistribution::RegVarying(rv) => {
                let u: f64 = rng.gen();
                // u == 0 maps to the survival = 1 plateau edge
                rv.quantile_from_survival(1.0 - u)
                    .expect("survival inversion failed for a validated claim family")
            }
        }
    }

    /// Revalidate parameters and recompute derived state (the regularly
    /// varying splice point is not serialized) after deserialization.
    pub fn normalized(&self) -> Result<Self, ClaimError> {
        match self {
            ClaimDistribution::Exponential { mean } => ClaimDistribution::exponential(*mean),
            ClaimDistribution::RegVarying(rv) => ClaimDistribution::reg_varying(rv.alpha, rv.beta),
        }
    }

    pub fn as_reg_varying(&self) -> Option<&RegVaryingClaim> {
        match self {
            ClaimDistribution::RegVarying(rv) => Some(rv),
            _ => None,
        }
    }
}

/// Law of one uniformly-timed discounted claim e^{-rV} sigma, V ~ U(0, T].
#[derive(Debug, Clone)]
pub struct DiscountedClaimLaw {
    pub base: ClaimDistribution,
    pub r: f64,
    pub horizon: f64,
    /// Starting Gauss-Legendre node count; doubled until stable.
    pub nodes: usize,
}

impl DiscountedClaimLaw {
    pub fn new(base: ClaimDistribution, r: f64, horizon: f64) -> Self {
        DiscountedClaimLaw {
            base,
            r,
            horizon,
            nodes: 64,
        }
    }

    /// Tail of F_T: (1/T) * integral over y in [0, T] of survival(x e^{ry}).
    pub fn survival_t(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        let t = self.horizon;
        let integrand = |y: f64| self.base.survival(x * (self.r * y).exp());
        let mut n = self.nodes;
        let mut prev = GaussRule::new(n).integrate(0.0, t, integrand) / t;
        loop {
            n *= 2;
            let cur = GaussRule::new(n).integrate(0.0, t, integrand) / t;
            if (cur - prev).abs() < 1e-9 || n >= 2048 {
                return cur.clamp(0.0, 1.0);
            }
            prev = cur;
        }
    }

    /// One draw of e^{-rV} sigma.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let v: f64 = rng.gen::<f64>() * self.horizon;
        (-self.r * v).exp() * self.base.sample(rng)
    }
}

/// The slowly varying factor of the discounted tail: S(x) such that
/// survival_T(x) = S(x)/x^alpha, via the change-of-variable form
/// S(x) = (x^alpha / (rT)) * integral over u in [x, e^{rT} x] of L(u)/u^{alpha+1}.
/// Only valid beyond the splice point, where the pure tail form holds.
pub fn s_of_x(claim: &RegVaryingClaim, r: f64, horizon: f64, x: f64) -> Result<f64, ClaimError> {
    if x <= claim.splice_point() {
        return Err(ClaimError::BelowSplice {
            x,
            x0: claim.splice_point(),
        });
    }
    // substitute u = x w to keep the integrand O(1) regardless of x
    let alpha = claim.alpha;
    let upper = (r * horizon).exp();
    let integral = integrate_adaptive(1.0, upper, 1e-13, 64, |w| {
        claim.slowly_varying(x * w) / w.powf(alpha + 1.0)
    });
    Ok(integral / (r * horizon))
}

/// Monte Carlo estimate of the n-fold convolution tail of F_T:
/// P{ sum of n i.i.d. discounted claims > x }.
pub fn convolution_tail_mc(
    law: &DiscountedClaimLaw,
    n_fold: usize,
    x: f64,
    samples: u64,
    seed: u64,
) -> EstimateReport {
    assert!(n_fold >= 1);
    let mut hits = 0u64;
    for i in 0..samples {
        let mut rng: ChaCha8Rng = path_rng(seed, i);
        let mut sum = 0.0;
        for _ in 0..n_fold {
            sum += law.sample(&mut rng);
        }
        if sum > x {
            hits += 1;
        }
    }
    EstimateReport::proportion(hits, samples, seed, 1)
}
