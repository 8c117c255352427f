use ndarray::Array2;

use super::field::{drift_into, euler_step};
use super::state::{FlowConfig, SimplexState};
use crate::denoiser::Denoiser;
use crate::error::{domain, Error, Result};
use crate::lineage::FamilyPrior;
use crate::specfun::entropy_of;

/// Per-step diagnostics of a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub mean_max_prob: f64,
    pub mean_entropy: f64,
}

/// Fixed-step Euler from `t_from` to `t_to` on the global grid of
/// `config.n_steps` steps; both ends snap to grid indices with `floor`.
///
/// Every step asks the denoiser once for all sites, forms the posterior
/// drift site by site under the prior concentrations and applies
/// [`euler_step`].
pub fn integrate(
    state: &mut SimplexState,
    denoiser: &dyn Denoiser,
    prior: &FamilyPrior,
    t_from: f64,
    t_to: f64,
    config: &FlowConfig,
) -> Result<()> {
    integrate_traced(state, denoiser, prior, t_from, t_to, config, None)
}

/// [`integrate`], optionally appending one [`StepRecord`] per step.
pub fn integrate_traced(
    state: &mut SimplexState,
    denoiser: &dyn Denoiser,
    prior: &FamilyPrior,
    t_from: f64,
    t_to: f64,
    config: &FlowConfig,
    mut trace: Option<&mut Vec<StepRecord>>,
) -> Result<()> {
    config.validate()?;
    if !(0.0 <= t_from && t_from <= t_to && t_to <= 1.0) {
        return domain(format!("need 0 <= t_from <= t_to <= 1, got [{t_from}, {t_to}]"));
    }
    if prior.len() != state.len() || prior.k() != state.k() {
        return domain("prior shape does not match the state");
    }
    let dt = config.dt();
    let (first, last) = (config.step_index(t_from), config.step_index(t_to));
    let mut drift = Array2::zeros(state.sites.raw_dim());
    for step in first..last {
        let t = step as f64 * dt;
        state.t = t;
        let probs = denoiser
            .probs(state, t)
            .map_err(|e| Error::Numeric(format!("denoiser failed at step {step}: {e}")))?;
        for l in 0..state.len() {
            let out = drift.row_mut(l).into_slice().expect("drift rows are contiguous");
            if state.gap_mask[l] {
                out.fill(0.0);
                continue;
            }
            let p = probs.row(l);
            let p = p.as_slice().expect("denoiser rows are contiguous");
            drift_into(state.site(l), p, t, prior.site(l), config.t_max, config.z_clamp, out)
                .map_err(|e| Error::Numeric(format!("drift at step {step}, site {l}: {e}")))?;
        }
        euler_step(state, &drift, dt)?;
        if let Some(trace) = trace.as_deref_mut() {
            trace.push(summarize(state, step));
        }
    }
    state.t = last as f64 * dt;
    Ok(())
}

fn summarize(state: &SimplexState, step: usize) -> StepRecord {
    let valid = state.valid_sites();
    let n = valid.len().max(1) as f64;
    let mean_max_prob = valid
        .iter()
        .map(|&l| state.site(l).iter().copied().fold(0.0, f64::max))
        .sum::<f64>()
        / n;
    let mean_entropy = valid.iter().map(|&l| entropy_of(state.site(l))).sum::<f64>() / n;
    StepRecord {
        step,
        t: state.t,
        mean_max_prob,
        mean_entropy,
    }
}

/// Tab-separated trajectory trace with a single header line.
pub fn trace_to_text(records: &[StepRecord]) -> String {
    let mut out = String::from("step\tt\tmean_max_prob\tmean_entropy\n");
    for r in records {
        out.push_str(&format!("{}\t{}\t{}\t{}\n", r.step, r.t, r.mean_max_prob, r.mean_entropy));
    }
    out
}
