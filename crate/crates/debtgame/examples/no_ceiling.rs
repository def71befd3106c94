//! Laissez-faire regime: for a high legislator discount rate no debt
//! ceiling is optimal. Computes the closed-form issuance threshold, both
//! players' value functions, and checks the smooth-fit conditions.

use debtgame::model::{classify_regime, ModelParams, RawParams};
use debtgame::quad::QuadratureSettings;
use debtgame::{solve_nash, NashOutcome};

fn main() {
    let params = ModelParams::validate(RawParams {
        r: 0.025,
        g: 0.02,
        sigma: 0.2,
        rho: 0.3,
        lambda: 0.3, // above the boundary r - g + alpha/kappa = 0.255
        alpha: 0.15,
        kappa: 0.6,
        m: 0.6,
        c1: 2.0,
        c2: 1.25,
    })
    .expect("valid parameters");

    let regime = classify_regime(&params);
    println!("regime: {:?} (margin {:+.4})", regime.tag, regime.margin);

    let settings = QuadratureSettings::for_gap(params.lambda_gap());
    let outcome = solve_nash(&params, &settings).expect("solvable");
    let nc = match outcome {
        NashOutcome::NoCeiling(nc) => nc,
        NashOutcome::Ceiling(_) => unreachable!("lambda is above the boundary"),
    };
    println!(
        "equilibrium: no ceiling, issuance threshold a_bar = {:.6}",
        nc.a_bar
    );

    let gov = nc.gov_value();
    let a = nc.a_bar;
    println!("\ngovernment value (reflect upward at a_bar):");
    for x in [0.5 * a, a, 2.0 * a, 5.0 * a] {
        println!(
            "  V1({x:.4}) = {:.6}   V1'({x:.4}) = {:.6}",
            gov.value(x),
            gov.derivative(x)
        );
    }
    println!(
        "smooth fit at a_bar: V1' = {:.12} (marginal issuance benefit c2 = {})",
        gov.derivative(a),
        params.c2()
    );
    println!(
        "second derivative just above a_bar: {:.3e}",
        gov.second_derivative(a * 1.000001)
    );

    let leg = nc.leg_value();
    println!("\nlegislator value under laissez-faire:");
    for x in [a, 0.6, 1.0, 2.0] {
        println!(
            "  V2({x:.4}) = {:.6}   V2'({x:.4}) = {:.6}",
            leg.value(x).unwrap(),
            leg.derivative(x).unwrap()
        );
    }
    println!(
        "slope stays below the intervention cost kappa = {} everywhere, so \
         never intervening is a best response",
        params.kappa()
    );
}
