//! Special functions and random samplers.

mod beta;
mod random;
mod sampling;

pub use beta::{d_a_reg_inc_beta, digamma, ln_gamma, log_beta, reg_inc_beta};
pub(crate) use beta::d_a_scaled;
pub use random::RandomStream;
pub use sampling::{
    log_sum_exp, normalize_simplex, sample_categorical, sample_dirichlet, sample_dirichlet_into,
    sample_gamma, shannon_entropy, SimplexVector, SIMPLEX_NEG_TOL, SIMPLEX_SUM_TOL,
};
pub(crate) use sampling::{categorical_unchecked, entropy_of, softmax_in_place};
