//! One-off probe: precise discretization bias at x0 = b* (temporary).
use debtgame::model::{ModelParams, RawParams};
use debtgame::sim::SimConfig;
use debtgame::simulate_cost_pair;

fn main() {
    let p = ModelParams::validate(RawParams {
        r: 0.025, g: 0.02, sigma: 0.2, rho: 0.3, lambda: 0.1,
        alpha: 0.15, kappa: 0.6, m: 0.6, c1: 2.0, c2: 1.25,
    }).unwrap();
    let a = 0.26821825408552186;
    let b = 0.7137606651230886;
    let u1_b = 0.8749058061419245; // closed form at x0 = b*
    let mut c = SimConfig::new(b, Some(a), Some(b), &p);
    c.horizon = (1e6f64).ln() / p.rho(); // gov cost converged at rho
    c.n_paths = 1_200_000;
    c.seed = 0xb1a5;
    let (gov, _) = simulate_cost_pair(&c, &p).unwrap();
    let bias = gov.mean - u1_b;
    println!("n={} dt={} T={:.1}", c.n_paths, c.dt, c.horizon);
    println!("mc={:.7} closed={u1_b:.7} bias={bias:+.3e} se={:.2e}", gov.mean, gov.std_error);
    println!("bias in 1e5-path-SE units: {:+.2}", bias / (gov.std_error * (12f64).sqrt()));
}
