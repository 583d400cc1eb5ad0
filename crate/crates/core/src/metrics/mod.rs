//! Weighted norms, Wasserstein-2 estimators, finite-difference Jacobian
//! norms, order fits and moment checks.

mod assignment;
mod fit;
mod jacobian;
mod moments;
mod norm;
mod w2;

pub use assignment::min_cost_assignment;
pub use fit::order_fit;
pub use jacobian::{default_fd_step, jacobian_fd, jacobian_opnorm_fd, largest_singular_value};
pub use moments::{moment_bound, moment_bound_check, MomentReport};
pub use norm::{weighted_norm_sq, weighted_norm_sq_diff, WeightedNormParams};
pub use w2::{gaussian_w2, w2_1d, w2_exact_smalln, w2_to_normal_1d, NormalTransportTable, SampleCloud, EXACT_ASSIGNMENT_CAP};
