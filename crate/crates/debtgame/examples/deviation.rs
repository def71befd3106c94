//! Nash deviation certificate: perturbing either equilibrium threshold must
//! not lower the deviating player's own cost. Paired common-random-number
//! runs make the comparison sharp at a small budget.

use debtgame::equilibrium::{deviation_certificate, DeviationBudget, Player};
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
        NashOutcome::NoCeiling(_) => unreachable!(),
    };
    println!(
        "equilibrium (a*, b*) = ({:.6}, {:.6})",
        eq.a_star, eq.b_star
    );

    let budget = DeviationBudget {
        n_paths: 10_000,
        dt: 2e-3,
        seed: 17,
    };
    let report = deviation_certificate(&params, &eq, &[-0.10, -0.05, 0.05, 0.10], &budget).unwrap();

    println!("\npaired cost change when one player deviates (positive = deviation hurts):");
    println!(
        "{:<12} {:>7} {:>12} {:>12} {:>10} {:>6}",
        "player", "eps", "threshold", "mean diff", "paired se", "pass"
    );
    for row in &report.rows {
        println!(
            "{:<12} {:>+7.2} {:>12.6} {:>+12.3e} {:>10.2e} {:>6}",
            match row.player {
                Player::Government => "government",
                Player::Legislator => "legislator",
            },
            row.epsilon,
            row.dev_threshold,
            row.estimate.mean_diff,
            row.estimate.std_error,
            row.pass
        );
    }
    println!(
        "\ncertificate {}",
        if report.all_pass() {
            "PASSED: no profitable unilateral deviation found"
        } else {
            "FAILED"
        }
    );
}
