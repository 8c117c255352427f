use crate::denoiser::Denoiser;
use crate::error::{domain, Result};
use crate::flow::SimplexState;
use crate::lineage::FamilyPrior;
use crate::specfun::{categorical_unchecked, entropy_of, sample_dirichlet_into, softmax_in_place, RandomStream};

#[derive(Clone, Debug, PartialEq)]
pub struct MutationConfig {
    /// Expected fraction of valid sites mutated per particle.
    pub mu: f64,
    /// Exponent of the normalized-entropy gate.
    pub gamma: f64,
    /// Weight of the denoiser in the token distribution.
    pub rho: f64,
    pub tau_tok: f64,
}

impl Default for MutationConfig {
    fn default() -> Self {
        Self {
            mu: 0.25,
            gamma: 1.0,
            rho: 0.8,
            tau_tok: 1.0,
        }
    }
}

impl MutationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.mu)
            || !(self.gamma >= 0.0)
            || !(0.0..=1.0).contains(&self.rho)
            || !(self.tau_tok > 0.0)
        {
            return domain("mutation config needs mu, rho in [0, 1], gamma >= 0, tau_tok > 0");
        }
        Ok(())
    }
}

/// Inclusion probabilities `p_l ∝ (H(ᾱ_l) / ln K)^γ`, scaled so their mean
/// over the valid sites is `μ`, then clipped to `[0, 1]`. Sites outside
/// `valid_sites` get 0.
pub fn mutation_probabilities(prior: &FamilyPrior, mu: f64, gamma: f64, valid_sites: &[usize]) -> Vec<f64> {
    let mut p = vec![0.0; prior.len()];
    if valid_sites.is_empty() {
        return p;
    }
    let ln_k = (prior.k() as f64).ln();
    let mut total = 0.0;
    for &l in valid_sites {
        let h = entropy_of(&prior.mean(l)) / ln_k;
        // powf(0) is 1 even for a zero-entropy site.
        p[l] = h.max(0.0).powf(gamma);
        total += p[l];
    }
    if total > 0.0 {
        let scale = mu * valid_sites.len() as f64 / total;
        for &l in valid_sites {
            p[l] = (p[l] * scale).min(1.0);
        }
    }
    p
}

/// Independent Bernoulli draws of [`mutation_probabilities`]; returns the
/// selected sites in increasing order.
pub fn mutation_mask(prior: &FamilyPrior, mu: f64, gamma: f64, valid_sites: &[usize], stream: &mut RandomStream) -> Vec<usize> {
    let p = mutation_probabilities(prior, mu, gamma, valid_sites);
    let mut sites: Vec<usize> = valid_sites.to_vec();
    sites.sort_unstable();
    sites.into_iter().filter(|&l| stream.bernoulli(p[l])).collect()
}

/// Token-Dirichlet proposal at the state's time `t`.
///
/// For each masked site, `q = ρ softmax(ℓ / τ) + (1 - ρ) ᾱ`, `y ~ Cat(q)` and
/// the site is redrawn from `Dir(α + t_max t e_y)`. The denoiser is not
/// queried when the mask is empty.
pub fn token_dirichlet_mutate(
    state: &SimplexState,
    denoiser: &dyn Denoiser,
    prior: &FamilyPrior,
    config: &MutationConfig,
    t_max: f64,
    stream: &mut RandomStream,
) -> Result<SimplexState> {
    config.validate()?;
    if prior.len() != state.len() || prior.k() != state.k() {
        return domain("prior shape does not match the state");
    }
    let mask = mutation_mask(prior, config.mu, config.gamma, &state.valid_sites(), stream);
    let mut out = state.clone();
    if mask.is_empty() {
        return Ok(out);
    }
    let logits = if config.rho > 0.0 { Some(denoiser.logits(state, state.t)?) } else { None };
    let k = state.k();
    let mut q = vec![0.0; k];
    let mut shifted = vec![0.0; k];
    for &l in &mask {
        let mean = prior.mean(l);
        match &logits {
            Some(lg) => {
                for (dst, &v) in q.iter_mut().zip(lg.row(l)) {
                    *dst = v / config.tau_tok;
                }
                softmax_in_place(&mut q);
                for (dst, m) in q.iter_mut().zip(&mean) {
                    *dst = config.rho * *dst + (1.0 - config.rho) * m;
                }
            }
            None => q.copy_from_slice(&mean),
        }
        let y = categorical_unchecked(&q, q.iter().sum(), stream);
        shifted.copy_from_slice(prior.site(l));
        shifted[y] += t_max * state.t;
        sample_dirichlet_into(&shifted, out.site_mut(l), stream)?;
    }
    Ok(out)
}
