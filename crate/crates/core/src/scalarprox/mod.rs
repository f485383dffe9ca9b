//! One-dimensional proximity kernels and the numerics they rely on.

mod grammar;
mod kernel;
pub mod l1ball;
pub mod lambert;
pub mod roots;

pub use grammar::parse_kernel;
pub use kernel::{
    halfsquare_schatten, halfsquare_schatten_implicit, hard, noisy_burg_quartic_coeffs,
    prox_noisy_burg_quartic, soft, Divergence, Penalty, ProxSet, ScalarKernel, BURG_EPS,
};
pub use l1ball::project_l1_ball;
pub use lambert::{lambert_w, lambert_w_exp};
pub use roots::{newton_bisect, poly_real_roots, solve_increasing_root};

