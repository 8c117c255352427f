//! Conditional Dirichlet paths, the analytic transport speed, the
//! classifier-reconstructed drift and the gap-aware Euler integrator.

mod field;
mod integrate;
mod state;

pub use field::{conditional_field, conditional_speed, euler_step, posterior_drift, speed_with_clamp, DEFAULT_Z_CLAMP};
pub use integrate::{integrate, integrate_traced, trace_to_text, StepRecord};
pub use state::{decode, decode_aligned, decode_codes, init_state, init_state_with_mask, FlowConfig, SimplexState};
pub(crate) use state::argmax;

use crate::error::Result;
use crate::specfun::{sample_dirichlet, RandomStream, SimplexVector};

/// A draw from `Dir(α + t_max t e_i)`.
pub fn sample_path_point(alpha: &[f64], target: usize, t: f64, t_max: f64, stream: &mut RandomStream) -> Result<SimplexVector> {
    if target >= alpha.len() || !(0.0..=1.0).contains(&t) {
        return crate::error::domain(format!("bad path point request (target {target}, t {t})"));
    }
    let mut a = alpha.to_vec();
    a[target] += t_max * t;
    sample_dirichlet(&a, stream)
}
