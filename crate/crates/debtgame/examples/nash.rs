//! Nash equilibrium in the intervention regime: the threshold pair
//! (a*, b*), its residuals and cross-checks, and both value functions.

use debtgame::equilibrium::best_response_iteration;
use debtgame::government;
use debtgame::model::{ModelParams, RawParams};
use debtgame::quad::QuadratureSettings;
use debtgame::{solve_nash, NashOutcome};

fn main() {
    let params = ModelParams::validate(RawParams {
        r: 0.025,
        g: 0.02,
        sigma: 0.2,
        rho: 0.3,
        lambda: 0.1,
        alpha: 0.15,
        kappa: 0.6,
        m: 0.6,
        c1: 2.0,
        c2: 1.25,
    })
    .expect("valid parameters");

    let settings = QuadratureSettings::for_gap(params.lambda_gap());
    let eq = match solve_nash(&params, &settings).expect("solvable") {
        NashOutcome::Ceiling(eq) => eq,
        NashOutcome::NoCeiling(_) => unreachable!("lambda = 0.1 is in the intervention regime"),
    };

    println!("Nash equilibrium (both players reflect):");
    println!("  a* = {:.12}   b* = {:.12}", eq.a_star, eq.b_star);
    println!(
        "  |F(a*,b*)| = {:.2e}   |G(a*,b*)| = {:.2e}",
        eq.f_resid, eq.g_resid
    );
    println!(
        "  ceiling floor b0 = {:.6}, linear-branch slope qtilde = {:.6}",
        eq.b0, eq.qtilde
    );
    println!(
        "  consistency: |a(b*) - a*| rel = {:.2e}, |b(a*) - b*| rel = {:.2e}",
        eq.cross_a_rel_gap, eq.cross_b_rel_gap
    );

    // independent route: iterate the composed best-response map
    let a_bar = government::abar(&params).a_bar;
    let (a_fix, iters) = best_response_iteration(&params, a_bar, 1e-12, 200).unwrap();
    println!(
        "  best-response iteration from a_bar: {a_fix:.12} after {iters} rounds \
         (gap to a*: {:.2e})",
        (a_fix - eq.a_star).abs()
    );

    println!("\nvalue functions along the equilibrium:");
    let xmid = 0.5 * (eq.a_star + eq.b_star);
    println!("  {:>9} {:>14} {:>14}", "x", "government", "legislator");
    for x in [eq.a_star, xmid, eq.b_star, 1.5 * eq.b_star] {
        println!(
            "  {x:>9.4} {:>14.8} {:>14.8}",
            eq.gov_value().value(x),
            eq.leg_value().value(x).unwrap()
        );
    }
    println!(
        "\nsmooth fit: U1'(a*) = {} = c2, U1'(b*-) = {:.8} = c1, U2'(a*+) = {:.1e}, \
         U2'(b*-) = {:.8} = kappa",
        eq.gov_value().derivative(eq.a_star),
        eq.gov_value().derivative(eq.b_star * (1.0 - 1e-12)),
        eq.leg_value()
            .derivative(eq.a_star * (1.0 + 1e-12))
            .unwrap(),
        eq.leg_value()
            .derivative(eq.b_star * (1.0 - 1e-12))
            .unwrap()
    );
}
