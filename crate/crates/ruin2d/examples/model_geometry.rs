//! Explore the geometry of the two-line model: normalized coordinates, the
//! degenerate regime, and the deterministic time at which the richer line
//! overtakes the poorer one.
//!
//! In normalized coordinates v_i = u_i/delta_i every claim moves the state
//! diagonally, so only the ordering of v1 and v2 matters. When v1 > v2 the
//! joint problem collapses: the first ruin is line 2's and simultaneous ruin
//! is line 1's. When v1 < v2 the drift (line 1 has the higher premium rate
//! per unit exposure) closes the gap at an explicit crossing time.
//!
//! ```bash
//! cargo run --example model_geometry
//! ```

use ruin2d::model::{classify_regime, ordering_cross_time, NormalizedState};
use ruin2d::{InitialReserves, ModelParams, Regime};

fn main() {
    let params = ModelParams {
        r: 0.05,
        lambda: 1.0,
        c1: 2.0,
        c2: 1.0,
        delta1: 0.5,
        delta2: 0.5,
    };
    params.validate().expect("valid model parameters");
    println!(
        "normalized premium levels: p1 = {}, p2 = {} (p1 > p2 required)",
        params.p1(),
        params.p2()
    );

    for (u1, u2) in [(1.0, 3.0), (2.0, 2.0), (4.0, 1.0), (30.0, 45.0)] {
        let reserves = InitialReserves { u1, u2 };
        let state = NormalizedState::new(&params, &reserves);
        let regime = classify_regime(&params, &reserves);
        let cross = ordering_cross_time(&params, &reserves);
        print!(
            "u = ({u1}, {u2}): v = ({}, {}), {:?}, ",
            state.v1, state.v2, regime
        );
        match regime {
            Regime::DegenerateMinIsPsi2MaxIsPsi1 => {
                println!("joint quantities reduce to univariate ones")
            }
            Regime::NonDegenerate if cross.is_finite() => {
                println!("deterministic ordering crosses at t = {cross:.4}")
            }
            Regime::NonDegenerate => {
                println!("gap too wide: the ordering never crosses (t = inf)")
            }
        }
    }
}
