//! Best-response maps of both players: the government's issuance threshold
//! a(b) against an imposed ceiling, and the legislator's ceiling b(a)
//! against an issuance threshold, with their limits and shape diagnostics.

use debtgame::government::{self, hat_b_diagnostic};
use debtgame::legislator::{self, b0, qtilde};
use debtgame::model::{ModelParams, RawParams};
use debtgame::special::CostIntegrals;

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

    let a_bar = government::abar(&params).a_bar;
    println!("government: a(b), the issuance threshold against a ceiling b");
    println!("  (no-ceiling limit a_bar = {a_bar:.6})");
    println!(
        "  {:>10} {:>12} {:>12} {:>9}",
        "b", "a(b)", "|F| resid", "dF/da"
    );
    for b in [0.01, 0.1, 0.3, 0.7137, 1.0, 10.0, 6000.0] {
        let r = government::solve_a_of_b(b, &params).unwrap();
        println!(
            "  {b:>10.4} {:>12.8} {:>12.2e} {:>9.2}",
            r.a_of_b, r.residual, r.df_da
        );
    }
    let hat = hat_b_diagnostic(&params).unwrap();
    println!(
        "  peak of the map: a({:.4}) = {:.8} (increasing before, decreasing after)",
        hat.b_hat, hat.a_hat
    );

    let integrals = CostIntegrals::with_default_settings(params);
    let q = qtilde(&params).unwrap();
    println!("\nlegislator: b(a), the ceiling against an issuance threshold a");
    println!(
        "  (floor b0 = {:.6}, linear branch b = a/qtilde beyond m with qtilde = {:.6})",
        b0(&params).unwrap(),
        q.value
    );
    println!(
        "  {:>10} {:>12} {:>12} {:>9}",
        "a", "b(a)", "|G| resid", "dG/db"
    );
    for a in [1e-6, 0.1, 0.268, 0.5, 0.9, 1.2, 6.0] {
        let r = legislator::solve_b_of_a(a, &params, &integrals).unwrap();
        println!(
            "  {a:>10.4} {:>12.8} {:>12.2e} {:>9.2}",
            r.b_of_a, r.residual, r.dg_db
        );
    }
    println!("\nboth maps increase where the opponent acts, which is what");
    println!("makes the intersection a fixed point of the pair (see nash.rs)");
}
