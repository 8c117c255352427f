use ndarray::Array2;

use super::state::SimplexState;
use crate::error::{domain, Error, Result};
use crate::specfun::d_a_scaled;

/// Default clamp applied to the target coordinate before evaluating the speed.
pub const DEFAULT_Z_CLAMP: f64 = 1e-6;

/// Scalar transport speed toward a vertex.
///
/// With `a = α_i + t_max t` and `b = Σ_{j≠i} α_j`,
/// `c = -t_max ∂_a I_z(a, b) B(a, b) / (z^{a-1} (1-z)^b)`, after clamping `z`
/// to `[1e-6, 1 - 1e-6]`. The Beta density prefactor cancels against the one
/// inside `∂_a I`, so it is never formed.
pub fn conditional_speed(z: f64, t: f64, alpha_i: f64, b: f64, t_max: f64) -> Result<f64> {
    speed_with_clamp(z, t, alpha_i, b, t_max, DEFAULT_Z_CLAMP)
}

/// [`conditional_speed`] with an explicit clamp.
pub fn speed_with_clamp(z: f64, t: f64, alpha_i: f64, b: f64, t_max: f64, z_clamp: f64) -> Result<f64> {
    if !(alpha_i > 0.0 && b > 0.0 && t_max > 0.0 && alpha_i.is_finite() && b.is_finite()) {
        return domain(format!("speed needs α_i > 0, b > 0, t_max > 0 (α_i={alpha_i}, b={b}, t_max={t_max})"));
    }
    if !(0.0..=1.0).contains(&t) || z.is_nan() {
        return domain(format!("speed needs t in [0, 1] and a number z (t={t}, z={z})"));
    }
    let z = z.clamp(z_clamp, 1.0 - z_clamp);
    let a = alpha_i + t_max * t;
    let (_, s) = d_a_scaled(z, a, b).map_err(|e| Error::Numeric(format!("∂_a I at z={z}, a={a}, b={b}: {e}")))?;
    let c = t_max * z * s.max(0.0);
    if !c.is_finite() {
        return Err(Error::Numeric(format!("speed overflow at z={z}, a={a}, b={b}")));
    }
    Ok(c)
}

/// `c(x_i, t) (e_i - x)`, written so the components sum to zero exactly up to
/// rounding.
pub fn conditional_field(x: &[f64], target: usize, t: f64, alpha: &[f64], t_max: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; x.len()];
    add_conditional_field(x, target, 1.0, t, alpha, t_max, DEFAULT_Z_CLAMP, &mut out)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn add_conditional_field(
    x: &[f64],
    target: usize,
    weight: f64,
    t: f64,
    alpha: &[f64],
    t_max: f64,
    z_clamp: f64,
    out: &mut [f64],
) -> Result<()> {
    if target >= x.len() || alpha.len() != x.len() {
        return domain("target or concentration vector does not match the site");
    }
    let alpha0: f64 = alpha.iter().sum();
    let b = alpha0 - alpha[target];
    let c = weight * speed_with_clamp(x[target], t, alpha[target], b, t_max, z_clamp)?;
    if c == 0.0 {
        return Ok(());
    }
    let mut rest = 0.0;
    for (j, (o, &xj)) in out.iter_mut().zip(x).enumerate() {
        if j != target {
            *o -= c * xj;
            rest += xj;
        }
    }
    out[target] += c * rest;
    Ok(())
}

/// `Σ_i p̂_i u_i(x, t)`: the conditional fields averaged under the classifier
/// probabilities. Targets with zero probability are skipped.
pub fn posterior_drift(x: &[f64], probs: &[f64], t: f64, alpha: &[f64], t_max: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; x.len()];
    drift_into(x, probs, t, alpha, t_max, DEFAULT_Z_CLAMP, &mut out)?;
    Ok(out)
}

pub(crate) fn drift_into(
    x: &[f64],
    probs: &[f64],
    t: f64,
    alpha: &[f64],
    t_max: f64,
    z_clamp: f64,
    out: &mut [f64],
) -> Result<()> {
    if probs.len() != x.len() {
        return domain("classifier output does not match the site");
    }
    out.fill(0.0);
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            add_conditional_field(x, i, p, t, alpha, t_max, z_clamp, out)?;
        }
    }
    Ok(())
}

/// `x ← x + dt·drift` on non-gap rows, then clamp each row to `[0, 1]` and
/// renormalize. Gap rows are left untouched whatever the drift says.
pub fn euler_step(state: &mut SimplexState, drift: &Array2<f64>, dt: f64) -> Result<()> {
    if drift.dim() != state.sites.dim() {
        return domain("drift shape does not match the state");
    }
    for l in 0..state.len() {
        if state.gap_mask[l] {
            continue;
        }
        let row = state.site_mut(l);
        let mut sum = 0.0;
        for (x, &v) in row.iter_mut().zip(drift.row(l)) {
            *x = (*x + dt * v).clamp(0.0, 1.0);
            sum += *x;
        }
        if !(sum > 0.0 && sum.is_finite()) {
            return Err(Error::Numeric(format!("row {l} collapsed during the Euler step")));
        }
        for x in row.iter_mut() {
            *x /= sum;
        }
    }
    state.t = (state.t + dt).min(1.0);
    Ok(())
}
