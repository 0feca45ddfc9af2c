//! Model parameters, domain validation, coordinate normalization and
//! degenerate-case classification for the two-dimensional risk model
//!
//! ```text
//! U_i(t) = e^{rt} u_i + (c_i/r)(e^{rt} - 1) - delta_i * sum_{k<=N(t)} e^{r(t-theta_k)} sigma_k
//! ```
//!
//! with constant interest rate `r`, Poisson claim arrivals of intensity
//! `lambda` and claim splitting fractions `delta_1 + delta_2 = 1`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

const DELTA_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("interest rate must be strictly positive (got {0})")]
    NonPositiveInterest(f64),
    #[error("Poisson intensity must be positive (got {0})")]
    NonPositiveIntensity(f64),
    #[error("premium rate c{index} must be positive (got {value})")]
    NonPositivePremium { index: u8, value: f64 },
    #[error("splitting fraction delta{index} must lie in (0, 1) (got {value})")]
    FractionOutOfRange { index: u8, value: f64 },
    #[error("fractions do not sum to 1: delta1 + delta2 = {0}")]
    FractionsDoNotSumToOne(f64),
    #[error("premium ordering violated: c1/delta1 = {0} must exceed c2/delta2 = {1}")]
    PremiumOrdering(f64, f64),
    #[error("initial reserve u{index} must be finite (got {value})")]
    NonFiniteReserve { index: u8, value: f64 },
}

/// Parameters of the two-dimensional risk model. Immutable once validated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Interest rate per unit time, strictly positive.
    pub r: f64,
    /// Poisson claim-arrival intensity.
    pub lambda: f64,
    /// Premium rate of component 1.
    pub c1: f64,
    /// Premium rate of component 2.
    pub c2: f64,
    /// Splitting fraction of component 1.
    pub delta1: f64,
    /// Splitting fraction of component 2.
    pub delta2: f64,
}

impl ModelParams {
    /// Validate all model invariants. Every violated constraint is reported.
    pub fn validate(&self) -> Result<&Self, Vec<ValidationError>> {
        let mut errors = Vec::new();
        if !(self.r > 0.0) {
            errors.push(ValidationError::NonPositiveInterest(self.r));
        }
        if !(self.lambda > 0.0) {
            errors.push(ValidationError::NonPositiveIntensity(self.lambda));
        }
        for (index, value) in [(1u8, self.c1), (2u8, self.c2)] {
            if !(value > 0.0) {
                errors.push(ValidationError::NonPositivePremium { index, value });
            }
        }
        let mut fractions_ok = true;
        for (index, value) in [(1u8, self.delta1), (2u8, self.delta2)] {
            if !(value > 0.0 && value < 1.0) {
                errors.push(ValidationError::FractionOutOfRange { index, value });
                fractions_ok = false;
            }
        }
        if fractions_ok && (self.delta1 + self.delta2 - 1.0).abs() > DELTA_SUM_TOL {
            errors.push(ValidationError::FractionsDoNotSumToOne(
                self.delta1 + self.delta2,
            ));
        }
        if fractions_ok
            && self.c1 > 0.0
            && self.c2 > 0.0
            && !(self.c1 / self.delta1 > self.c2 / self.delta2)
        {
            errors.push(ValidationError::PremiumOrdering(
                self.c1 / self.delta1,
                self.c2 / self.delta2,
            ));
        }
        if errors.is_empty() {
            Ok(self)
        } else {
            Err(errors)
        }
    }

    /// Normalized drift coefficients p_i = c_i / (r * delta_i).
    pub fn p1(&self) -> f64 {
        self.c1 / (self.r * self.delta1)
    }

    pub fn p2(&self) -> f64 {
        self.c2 / (self.r * self.delta2)
    }
}

/// Initial capital of the two components. Nonnegative in the studied regime;
/// negative values are legal input and mean immediate ruin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialReserves {
    pub u1: f64,
    pub u2: f64,
}

impl InitialReserves {
    pub fn validate(&self) -> Result<&Self, Vec<ValidationError>> {
        let mut errors = Vec::new();
        for (index, value) in [(1u8, self.u1), (2u8, self.u2)] {
            if !value.is_finite() {
                errors.push(ValidationError::NonFiniteReserve { index, value });
            }
        }
        if errors.is_empty() {
            Ok(self)
        } else {
            Err(errors)
        }
    }
}

/// Normalized coordinates: v_i = u_i / delta_i, p_i = c_i / (r * delta_i).
/// In these coordinates a claim of size z shifts (v1, v2) by (-z, -z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedState {
    pub v1: f64,
    pub v2: f64,
    pub p1: f64,
    pub p2: f64,
}

impl NormalizedState {
    pub fn new(params: &ModelParams, reserves: &InitialReserves) -> Self {
        NormalizedState {
            v1: reserves.u1 / params.delta1,
            v2: reserves.u2 / params.delta2,
            p1: params.p1(),
            p2: params.p2(),
        }
    }
}

/// Regime classification by the ordering of normalized reserves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// u1/delta1 <= u2/delta2: the joint problem is genuinely two-dimensional.
    NonDegenerate,
    /// u1/delta1 > u2/delta2: joint quantities reduce to univariate ones,
    /// Psi_min = psi_2(u2) and Psi_max = psi_1(u1).
    DegenerateMinIsPsi2MaxIsPsi1,
}

/// Classify the regime. Equality of normalized reserves is the boundary line
/// and counts as NonDegenerate.
pub fn classify_regime(params: &ModelParams, reserves: &InitialReserves) -> Regime {
    if reserves.u1 / params.delta1 > reserves.u2 / params.delta2 {
        Regime::DegenerateMinIsPsi2MaxIsPsi1
    } else {
        Regime::NonDegenerate
    }
}

/// The unique time t* at which the deterministic difference
/// X2(t) - X1(t) = (x2 - x1) + (p2 - p1)(1 - e^{-rt}) hits zero, or
/// +infinity if the gap never closes. The claim sum is common to both
/// components, so this difference is deterministic.
pub fn ordering_cross_time(params: &ModelParams, reserves: &InitialReserves) -> f64 {
    let state = NormalizedState::new(params, reserves);
    let gap = state.v2 - state.v1;
    let drift = state.p1 - state.p2;
    debug_assert!(drift > 0.0);
    if gap <= 0.0 {
        return 0.0;
    }
    if gap >= drift {
        return f64::INFINITY;
    }
    -(1.0 - gap / drift).ln() / params.r
}
