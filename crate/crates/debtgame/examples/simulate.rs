//! Monte Carlo verification of the closed forms: simulates the reflected
//! ratio at the Nash thresholds and compares both players' discounted costs
//! against the value functions. Modest budget so it runs in about a minute;
//! the acceptance suite runs the full protocol.

use debtgame::model::{ModelParams, RawParams};
use debtgame::quad::QuadratureSettings;
use debtgame::sim::SimConfig;
use debtgame::special::CostIntegrals;
use debtgame::{simulate_cost_pair, solve_nash, NashOutcome};

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
        NashOutcome::NoCeiling(_) => unreachable!(),
    };
    println!(
        "equilibrium band [a*, b*] = [{:.6}, {:.6}]",
        eq.a_star, eq.b_star
    );

    let x0 = 0.5 * (eq.a_star + eq.b_star);
    let mut config = SimConfig::new(x0, Some(eq.a_star), Some(eq.b_star), &params);
    config.n_paths = 20_000;
    config.dt = 2e-3;
    println!(
        "simulating {} antithetic paths, dt = {}, horizon = {:.1}\n",
        config.n_paths, config.dt, config.horizon
    );

    let (gov, leg) = simulate_cost_pair(&config, &params).expect("simulation runs");
    let gov_ref = eq.gov_value().value(x0);
    let leg_ref = eq.leg_value().value(x0).unwrap();

    println!(
        "{:<12} {:>12} {:>12} {:>10} {:>7}",
        "player", "closed form", "MC mean", "MC se", "z"
    );
    println!(
        "{:<12} {:>12.6} {:>12.6} {:>10.2e} {:>+7.2}",
        "government",
        gov_ref,
        gov.mean,
        gov.std_error,
        (gov.mean - gov_ref) / gov.std_error
    );
    println!(
        "{:<12} {:>12.6} {:>12.6} {:>10.2e} {:>+7.2}",
        "legislator",
        leg_ref,
        leg.mean,
        leg.std_error,
        (leg.mean - leg_ref) / leg.std_error
    );
    println!(
        "truncation tail bounds: gov {:.1e}, leg {:.1e}",
        gov.tail_bound, leg.tail_bound
    );

    // uncontrolled check: the resolvent cost is the legislator's cost when
    // nobody reflects
    let integrals = CostIntegrals::with_default_settings(params);
    let mut free = SimConfig::new(params.m(), None, None, &params);
    free.n_paths = 20_000;
    free.dt = 2e-3;
    let (_, leg_free) = simulate_cost_pair(&free, &params).unwrap();
    let h_ref = integrals.h(params.m()).unwrap();
    println!(
        "\nuncontrolled ratio from x0 = m: H(m) = {:.6}, MC = {:.6} (z = {:+.2})",
        h_ref,
        leg_free.mean,
        (leg_free.mean - h_ref) / leg_free.std_error
    );
}
