use crate::error::{domain, Result};
use crate::flow::{argmax, SimplexState};
use crate::lineage::Pssm;
use crate::specfun::RandomStream;

/// A fitness `J` for rerouting; higher is better.
///
/// `base` is the particle before the current mutation. Any internal masking
/// must draw only from `stream`.
pub trait FitnessScorer: Sync {
    fn score(&self, state: &SimplexState, base: &SimplexState, stream: &mut RandomStream) -> Result<f64>;
}

fn check_pssm(state: &SimplexState, pssm: &Pssm) -> Result<()> {
    if state.len() != pssm.len() || state.k() != pssm.k() {
        return domain("state and PSSM shapes differ");
    }
    Ok(())
}

/// `(1/|M|) Σ_{l∈M} Σ_a x_{l,a} ln p_l(a)` for a fixed site set.
pub fn masked_score(state: &SimplexState, pssm: &Pssm, sites: &[usize]) -> Result<f64> {
    check_pssm(state, pssm)?;
    if sites.is_empty() {
        return domain("empty site set");
    }
    let total: f64 = sites
        .iter()
        .map(|&l| state.site(l).iter().zip(pssm.log_probs.row(l)).map(|(x, lp)| x * lp).sum::<f64>())
        .sum();
    Ok(total / sites.len() as f64)
}

/// Mean of [`masked_score`] over `n_masks` random masks. Each mask keeps every
/// non-gap site with probability `p_mask`; an empty draw is replaced by one
/// uniformly chosen non-gap site.
pub fn pssm_soft_mask_score(state: &SimplexState, pssm: &Pssm, p_mask: f64, n_masks: usize, stream: &mut RandomStream) -> Result<f64> {
    check_pssm(state, pssm)?;
    if !(p_mask > 0.0 && p_mask < 1.0) || n_masks == 0 {
        return domain("need p_mask in (0, 1) and at least one mask");
    }
    let valid = state.valid_sites();
    if valid.is_empty() {
        return domain("state has no non-gap site");
    }
    let mut total = 0.0;
    let mut mask = Vec::with_capacity(valid.len());
    for _ in 0..n_masks {
        mask.clear();
        mask.extend(valid.iter().copied().filter(|_| stream.bernoulli(p_mask)));
        if mask.is_empty() {
            mask.push(valid[stream.index(valid.len())]);
        }
        total += masked_score(state, pssm, &mask)?;
    }
    Ok(total / n_masks as f64)
}

/// Non-gap sites whose argmax changed or whose total-variation distance from
/// `base` exceeds `delta`.
pub fn changed_sites(state: &SimplexState, base: &SimplexState, delta: f64) -> Result<Vec<usize>> {
    if state.sites.dim() != base.sites.dim() || state.gap_mask != base.gap_mask {
        return domain("states differ in shape or gap mask");
    }
    Ok(state
        .valid_sites()
        .into_iter()
        .filter(|&l| {
            let (x, b) = (state.site(l), base.site(l));
            let tv = 0.5 * x.iter().zip(b).map(|(u, v)| (u - v).abs()).sum::<f64>();
            argmax(x) != argmax(b) || tv > delta
        })
        .collect())
}

/// `J = S_global(X) + S(X; C) - S(X_base; C)`, with `C` from
/// [`changed_sites`] and the second term dropped when `C` is empty.
pub fn hybrid_fitness(
    state: &SimplexState,
    base: &SimplexState,
    pssm: &Pssm,
    delta: f64,
    p_mask: f64,
    n_masks: usize,
    stream: &mut RandomStream,
) -> Result<f64> {
    let changed = changed_sites(state, base, delta)?;
    let global = pssm_soft_mask_score(state, pssm, p_mask, n_masks, stream)?;
    if changed.is_empty() {
        return Ok(global);
    }
    Ok(global + masked_score(state, pssm, &changed)? - masked_score(base, pssm, &changed)?)
}

/// The default scorer: [`hybrid_fitness`] against a family PSSM.
#[derive(Clone, Debug)]
pub struct PssmHybridScorer<'a> {
    pub pssm: &'a Pssm,
    pub delta: f64,
    pub p_mask: f64,
    pub n_masks: usize,
}

impl<'a> PssmHybridScorer<'a> {
    /// `δ = 0.1`, `p_mask = 0.15`, `G = 8`.
    pub fn new(pssm: &'a Pssm) -> Self {
        Self {
            pssm,
            delta: 0.1,
            p_mask: 0.15,
            n_masks: 8,
        }
    }
}

impl FitnessScorer for PssmHybridScorer<'_> {
    fn score(&self, state: &SimplexState, base: &SimplexState, stream: &mut RandomStream) -> Result<f64> {
        hybrid_fitness(state, base, self.pssm, self.delta, self.p_mask, self.n_masks, stream)
    }
}

/// Mean over non-gap sites of `Σ_a x_a ln p_l(a)`: the all-sites version of
/// the soft-mask score, used as a deterministic fitness proxy in reports.
pub fn pssm_fitness_proxy(state: &SimplexState, pssm: &Pssm) -> Result<f64> {
    masked_score(state, pssm, &state.valid_sites())
}
