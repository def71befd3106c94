//! Solver and verifier for a two-player singular-control game on the
//! debt-to-GDP ratio.
//!
//! A government reflects the ratio upward at a debt-issuance threshold `a`
//! while a legislative body may reflect it downward at a debt ceiling `b`.
//! Both act on a geometric Brownian ratio and discount at different rates.
//! The crate computes:
//!
//! * closed-form characteristic roots, the no-ceiling issuance threshold and
//!   its value function ([`government`]),
//! * best-response maps `a(b)` and `b(a)` with smooth-fit value functions
//!   ([`government`], [`legislator`]),
//! * the Nash equilibrium of the game, either a threshold pair `(a*, b*)` or
//!   a no-ceiling outcome, with limit and deviation diagnostics
//!   ([`equilibrium`]),
//! * Monte Carlo estimates of both players' discounted costs under Skorokhod
//!   reflection, used to verify every closed form independently ([`sim`]).
//!
//! The library surface is demonstrated by the runnable programs in
//! `examples/`; a thin `debtgame` binary exposes the same operations as CLI
//! subcommands (see [`cli`]).
//!
//! Precondition checks are written in the NaN-rejecting form `!(x > 0.0)`
//! throughout, which is what the negated-comparison lint flags.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dd;
pub mod equilibrium;
pub mod government;
pub mod legislator;
pub mod model;
pub mod quad;
pub mod sim;
pub mod solve;
pub mod special;

pub use equilibrium::{solve_nash, NashOutcome};
pub use model::{char_roots, classify_regime, DiscountRate, ModelParams, RawParams, Regime};
pub use quad::QuadratureSettings;
pub use sim::{simulate_cost_pair, SimConfig, SimEstimate};
