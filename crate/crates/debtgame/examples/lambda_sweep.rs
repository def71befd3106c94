//! Comparative statics in the legislator's discount rate: the equilibrium
//! ceiling rises without bound as lambda approaches the regime boundary
//! from below, while the issuance threshold returns to its no-ceiling
//! value. Writes the table as CSV to stdout.

use debtgame::equilibrium::lambda_limit_diagnostic;
use debtgame::government;
use debtgame::model::{ModelParams, RawParams};
use debtgame::quad::QuadratureSettings;

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

    let boundary = params.regime_boundary();
    let a_bar = government::abar(&params).a_bar;
    eprintln!("regime boundary at lambda = {boundary}; no-ceiling threshold a_bar = {a_bar:.6}");

    // geometric approach to the boundary over twelve decades
    let d0 = boundary - 0.05;
    let n = 14;
    let ratio = (1e-13f64 / d0).powf(1.0 / (n - 1) as f64);
    let grid: Vec<f64> = (0..n).map(|i| boundary - d0 * ratio.powi(i)).collect();

    let settings = QuadratureSettings::for_gap(params.lambda_gap());
    let diag = lambda_limit_diagnostic(&params, &grid, &settings);

    println!("lambda,boundary_distance,a_star,b_star,a_gap,qtilde,status");
    for row in &diag.rows {
        println!(
            "{:e},{:e},{},{},{},{},{}",
            row.lambda,
            boundary - row.lambda,
            row.a_star.map(|v| format!("{v:e}")).unwrap_or_default(),
            row.b_star.map(|v| format!("{v:e}")).unwrap_or_default(),
            row.a_gap.map(|v| format!("{v:e}")).unwrap_or_default(),
            row.qtilde.map(|v| format!("{v:e}")).unwrap_or_default(),
            row.status
        );
    }

    match diag.check() {
        Ok(()) => eprintln!(
            "shape verified: b* strictly increasing, |a* - a_bar| decreasing \
             (ceiling diverges, threshold returns to a_bar)"
        ),
        Err(e) => eprintln!("shape check FAILED: {e}"),
    }
}
