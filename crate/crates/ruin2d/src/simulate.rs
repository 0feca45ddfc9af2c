//! Event-driven simulation of the coupled reserve processes and exact
//! per-path ruin functionals.
//!
//! Reserves are strictly increasing between claims (starting from a
//! nonnegative level), so sign changes can only happen at claim instants.
//! Checking the post-claim reserves at arrival times is therefore an exact
//! discrete scan of the continuous-time first-passage problem.

use rand::Rng;

use crate::model::{InitialReserves, ModelParams};

/// Per-path ruin functionals. `f64::INFINITY` means "no ruin within the
/// horizon".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuinTimes {
    /// First time component 1 goes negative.
    pub tau1: f64,
    /// First time component 2 goes negative.
    pub tau2: f64,
    /// First time at least one component is negative: min(tau1, tau2).
    pub t_min: f64,
    /// First time both components are negative at the same instant.
    pub t_max: f64,
}

impl RuinTimes {
    fn none() -> Self {
        RuinTimes {
            tau1: f64::INFINITY,
            tau2: f64::INFINITY,
            t_min: f64::INFINITY,
            t_max: f64::INFINITY,
        }
    }
}

/// One simulated trajectory: arrival times, claim sizes, post-claim reserves
/// and derived ruin functionals.
#[derive(Debug, Clone)]
pub struct PathRecord {
    pub arrivals: Vec<f64>,
    pub claims: Vec<f64>,
    /// Post-claim reserves (U1, U2) at each arrival.
    pub reserves: Vec<(f64, f64)>,
    pub horizon: f64,
    pub times: RuinTimes,
}

/// Core event loop shared by the recording and the lean path generators.
/// `on_event(k, t, z, u1_post, u2_post)` is called at every claim instant.
fn drive_path<R: Rng, F: FnMut(usize, f64, f64, f64, f64)>(
    params: &ModelParams,
    reserves: &InitialReserves,
    horizon: f64,
    claim: &crate::claims::ClaimDistribution,
    rng: &mut R,
    mut on_event: F,
) -> RuinTimes {
    let mut times = RuinTimes::none();
    let mut u1 = reserves.u1;
    let mut u2 = reserves.u2;
    // immediate ruin at t = 0 for negative initial capital
    if u1 < 0.0 {
        times.tau1 = 0.0;
    }
    if u2 < 0.0 {
        times.tau2 = 0.0;
    }
    if u1 < 0.0 || u2 < 0.0 {
        times.t_min = 0.0;
    }
    if u1 < 0.0 && u2 < 0.0 {
        times.t_max = 0.0;
    }

    let r = params.r;
    let mut t = 0.0;
    let mut k = 0usize;
    loop {
        let u: f64 = rng.gen();
        let dt = -(1.0 - u).ln() / params.lambda;
        let t_next = t + dt;
        if t_next > horizon {
            break;
        }
        let z = claim.sample(rng);
        let growth = (r * dt).exp();
        u1 = growth * u1 + params.c1 / r * (growth - 1.0) - params.delta1 * z;
        u2 = growth * u2 + params.c2 / r * (growth - 1.0) - params.delta2 * z;
        t = t_next;
        on_event(k, t, z, u1, u2);
        if u1 < 0.0 && times.tau1.is_infinite() {
            times.tau1 = t;
        }
        if u2 < 0.0 && times.tau2.is_infinite() {
            times.tau2 = t;
        }
        if (u1 < 0.0 || u2 < 0.0) && times.t_min.is_infinite() {
            times.t_min = t;
        }
        if u1 < 0.0 && u2 < 0.0 && times.t_max.is_infinite() {
            times.t_max = t;
        }
        k += 1;
    }
    times
}

/// Simulate one path on [0, horizon], recording every claim instant.
pub fn simulate_path<R: Rng>(
    params: &ModelParams,
    reserves: &InitialReserves,
    horizon: f64,
    claim: &crate::claims::ClaimDistribution,
    rng: &mut R,
) -> PathRecord {
    let mut arrivals = Vec::new();
    let mut claims = Vec::new();
    let mut post = Vec::new();
    let times = drive_path(params, reserves, horizon, claim, rng, |_, t, z, a, b| {
        arrivals.push(t);
        claims.push(z);
        post.push((a, b));
    });
    PathRecord {
        arrivals,
        claims,
        reserves: post,
        horizon,
        times,
    }
}

/// Ruin functionals only, no per-event allocation. Consumes the RNG in the
/// same order as `simulate_path`, so identical seeds give identical paths.
pub fn ruin_times<R: Rng>(
    params: &ModelParams,
    reserves: &InitialReserves,
    horizon: f64,
    claim: &crate::claims::ClaimDistribution,
    rng: &mut R,
) -> RuinTimes {
    drive_path(params, reserves, horizon, claim, rng, |_, _, _, _, _| {})
}

/// Recompute all ruin functionals from the discounted representation
/// X_i(t) = x_i + p_i (1 - e^{-rt}) - sum_{theta_k <= t} e^{-r theta_k} sigma_k.
/// Ruin events must coincide with the compounded representation
/// event-for-event.
pub fn ruin_times_discounted(
    path: &PathRecord,
    params: &ModelParams,
    reserves: &InitialReserves,
) -> RuinTimes {
    let mut times = RuinTimes::none();
    let x1 = reserves.u1 / params.delta1;
    let x2 = reserves.u2 / params.delta2;
    let p1 = params.p1();
    let p2 = params.p2();
    if x1 < 0.0 {
        times.tau1 = 0.0;
    }
    if x2 < 0.0 {
        times.tau2 = 0.0;
    }
    if x1 < 0.0 || x2 < 0.0 {
        times.t_min = 0.0;
    }
    if x1 < 0.0 && x2 < 0.0 {
        times.t_max = 0.0;
    }
    let mut discounted_sum = 0.0;
    for (&t, &z) in path.arrivals.iter().zip(&path.claims) {
        discounted_sum += (-params.r * t).exp() * z;
        let drift = 1.0 - (-params.r * t).exp();
        let xa = x1 + p1 * drift - discounted_sum;
        let xb = x2 + p2 * drift - discounted_sum;
        if xa < 0.0 && times.tau1.is_infinite() {
            times.tau1 = t;
        }
        if xb < 0.0 && times.tau2.is_infinite() {
            times.tau2 = t;
        }
        if (xa < 0.0 || xb < 0.0) && times.t_min.is_infinite() {
            times.t_min = t;
        }
        if xa < 0.0 && xb < 0.0 && times.t_max.is_infinite() {
            times.t_max = t;
        }
    }
    times
}

/// Finite-horizon joint ruin indicators derived from one path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JointIndicators {
    /// tau1 <= T
    pub ind_a: bool,
    /// tau2 <= T
    pub ind_b: bool,
    /// T_min <= T
    pub ind_a_or_b: bool,
    /// tau1 <= T and tau2 <= T (possibly at different instants)
    pub ind_a_and_b: bool,
    /// T_max <= T (both negative at the same instant)
    pub ind_simultaneous: bool,
}

pub fn eventwise_joint_indicators(times: &RuinTimes, horizon: f64) -> JointIndicators {
    let ind_a = times.tau1 <= horizon;
    let ind_b = times.tau2 <= horizon;
    JointIndicators {
        ind_a,
        ind_b,
        ind_a_or_b: times.t_min <= horizon,
        ind_a_and_b: ind_a && ind_b,
        ind_simultaneous: times.t_max <= horizon,
    }
}
