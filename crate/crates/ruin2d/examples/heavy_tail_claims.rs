//! Work with the regularly varying claim-size family and the law of one
//! discounted claim, the two tails the asymptotics are built on.
//!
//! The claim family has survival L(x)/x^alpha beyond a splice point x0, with
//! slowly varying factor L(x) = beta * ln(e + x) and survival 1 below x0.
//! The discounted law F_T describes e^{-rV} * sigma for a uniform arrival
//! time V on (0, T]; subexponentiality shows up as the n-fold convolution
//! tail behaving like n times the single tail.
//!
//! ```bash
//! cargo run --example heavy_tail_claims
//! ```

use ruin2d::claims::convolution_tail_mc;
use ruin2d::rng::path_rng;
use ruin2d::{ClaimDistribution, DiscountedClaimLaw};

fn main() {
    let claim = ClaimDistribution::reg_varying(1.5, 1.0).unwrap();
    let rv = claim.as_reg_varying().unwrap();
    println!("tail index alpha = {}, splice point x0 = {:.4}", rv.alpha, rv.splice_point());

    // tail ratio survival(tx)/survival(x) approaches t^{-alpha}
    let t = 2.0f64;
    println!("\nregular variation: survival({t}x)/survival(x) vs t^-alpha = {:.4}", t.powf(-1.5));
    for x in [10.0, 100.0, 1000.0] {
        let ratio = claim.survival(t * x) / claim.survival(x);
        println!("  x = {x:6}: {ratio:.4}");
    }

    // empirical survival from inversion sampling matches the analytic tail
    let mut rng = path_rng(42, 0);
    let n = 200_000;
    let threshold = 20.0;
    let hits = (0..n).filter(|_| claim.sample(&mut rng) > threshold).count();
    println!(
        "\nsampling: empirical P(sigma > {threshold}) = {:.5}, analytic = {:.5}",
        hits as f64 / n as f64,
        claim.survival(threshold)
    );

    // discounted single-claim tail F_T_bar by quadrature vs simulation
    let law = DiscountedClaimLaw::new(claim.clone(), 0.05, 10.0);
    let x = 30.0;
    let quad = law.survival_t(x);
    let mc = convolution_tail_mc(&law, 1, x, 200_000, 42);
    println!(
        "\ndiscounted tail F_T_bar({x}): quadrature {quad:.5}, MC {:.5} +/- {:.5}",
        mc.estimate, mc.std_error
    );

    // subexponentiality: the n-fold convolution tail is about n single tails
    println!("\nconvolution tails at x = 200 (subexponential ratio -> n):");
    let far = 200.0;
    let single = law.survival_t(far);
    for n_fold in [2usize, 3] {
        let conv = convolution_tail_mc(&law, n_fold, far, 400_000, 42);
        println!(
            "  n = {n_fold}: P(S_n > x)/F_T_bar(x) = {:.3} (target {n_fold})",
            conv.estimate / single
        );
    }
}
