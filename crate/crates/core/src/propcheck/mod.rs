//! Verification suites. Each returns a [`SuiteReport`] with the measured
//! quantities, the violated relations and a CSV table.
//!
//! All suites are deterministic given their inputs and seed: chains and
//! pairs draw from per-index noise streams and results are aggregated in
//! index order, whatever the thread count.

mod contraction;
mod eta;
mod lsi;
mod moment;
mod order;
pub mod report;
mod taming;
mod w2;

pub use contraction::{suite_contraction, NON_EXPANSION_SLACK, RATE_SLACK, RESOLVABLE_RATE};
pub use eta::{default_eta_grid, suite_eta_bounds};
pub use lsi::{suite_lsi_proxies, SIGMA_LAMBDAS};
pub use moment::{suite_moments, MomentConfig};
pub use order::{sample_target, suite_verlet_order, ORDER_LAMBDAS, ORDER_SLOPE_RANGE};
pub use report::{Cell, Failure, SuiteReport, Table};
pub use taming::suite_taming;
pub use w2::{suite_w2_convergence, W2Config};
