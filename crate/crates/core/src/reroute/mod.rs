//! Mutate / select / amplify at an intermediate flow time.

mod fitness;
mod mutation;
mod selection;

pub use fitness::{
    changed_sites, hybrid_fitness, masked_score, pssm_fitness_proxy, pssm_soft_mask_score, FitnessScorer, PssmHybridScorer,
};
pub use mutation::{mutation_mask, mutation_probabilities, token_dirichlet_mutate, MutationConfig};
pub use selection::{
    effective_sample_size, kl_divergence, kl_objective, resample, resample_indices, resample_n, select_weights,
    tilt_with_log_normalizer, tilted_distribution_oracle, ParticlePopulation, Resampling,
};

use crate::denoiser::Denoiser;
use crate::error::{domain, Result};
use crate::flow::SimplexState;
use crate::lineage::FamilyPrior;
use crate::specfun::RandomStream;

#[derive(Clone, Debug, PartialEq)]
pub struct RerouteConfig {
    pub rounds: usize,
    /// One selection strength per round.
    pub betas: Vec<f64>,
    pub t_int: f64,
    pub population: usize,
    pub scheme: Resampling,
}

impl Default for RerouteConfig {
    fn default() -> Self {
        Self {
            rounds: 3,
            betas: vec![4.0; 3],
            t_int: 0.5,
            population: 8,
            scheme: Resampling::Systematic,
        }
    }
}

impl RerouteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 || self.betas.len() != self.rounds || self.population == 0 {
            return domain("reroute needs R >= 1, one beta per round and M >= 1");
        }
        if self.betas.iter().any(|b| !(*b >= 0.0 && b.is_finite())) || !(0.0..=1.0).contains(&self.t_int) {
            return domain("betas must be finite and >= 0, t_int in [0, 1]");
        }
        Ok(())
    }
}

/// Score summary of one round; round 0 describes the incoming population.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
    pub ess: f64,
}

impl RoundRecord {
    fn new(round: usize, scores: &[f64], weights: &[f64]) -> Self {
        Self {
            round,
            min: scores.iter().copied().fold(f64::INFINITY, f64::min),
            mean: scores.iter().sum::<f64>() / scores.len() as f64,
            max: scores.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ess: effective_sample_size(weights),
        }
    }
}

/// Tab-separated reroute trace with a single header line.
pub fn reroute_trace_to_text(records: &[RoundRecord]) -> String {
    let mut out = String::from("round\tmin_score\tmean_score\tmax_score\tess\n");
    for r in records {
        out.push_str(&format!("{}\t{}\t{}\t{}\t{}\n", r.round, r.min, r.mean, r.max, r.ess));
    }
    out
}

pub struct RerouteOutcome {
    pub best: SimplexState,
    pub best_score: f64,
    pub population: ParticlePopulation,
    pub trace: Vec<RoundRecord>,
}

/// `R` rounds of token-Dirichlet mutation, scoring against each particle's
/// pre-mutation state, exponential-tilt weights and resampling. Returns the
/// highest-scoring particle of the last round (ties to the lowest index).
///
/// Mutation of particle `m` in round `r` draws from the substream
/// `("mutate", r·M + m)`; all particles of a round share the scorer's mask
/// substream `("masks", r)`, so their scores use the same masks.
#[allow(clippy::too_many_arguments)]
pub fn reroute(
    population: ParticlePopulation,
    denoiser: &dyn Denoiser,
    scorer: &dyn FitnessScorer,
    prior: &FamilyPrior,
    mconfig: &MutationConfig,
    rconfig: &RerouteConfig,
    t_max: f64,
    stream: &RandomStream,
) -> Result<RerouteOutcome> {
    rconfig.validate()?;
    mconfig.validate()?;
    if population.is_empty() {
        return domain("empty population");
    }
    let m = population.len();
    let mut current = population;
    let initial_masks = stream.derive("masks", 0);
    current.scores = current
        .particles
        .iter()
        .map(|p| scorer.score(p, p, &mut initial_masks.clone()))
        .collect::<Result<_>>()?;
    let mut trace = vec![RoundRecord::new(0, &current.scores, &current.weights)];

    let mut last = current.clone();
    for r in 0..rconfig.rounds {
        let masks = stream.derive("masks", r as u64 + 1);
        let mut mutated = Vec::with_capacity(m);
        let mut scores = Vec::with_capacity(m);
        for (i, base) in current.particles.iter().enumerate() {
            let mut rng = stream.derive("mutate", (r * m + i) as u64);
            let proposal = token_dirichlet_mutate(base, denoiser, prior, mconfig, t_max, &mut rng)?;
            scores.push(scorer.score(&proposal, base, &mut masks.clone())?);
            mutated.push(proposal);
        }
        let weights = select_weights(&scores, rconfig.betas[r])?;
        trace.push(RoundRecord::new(r + 1, &scores, &weights));
        last = ParticlePopulation {
            particles: mutated,
            scores,
            weights,
        };
        current = resample(&last, rconfig.scheme, &mut stream.derive("resample", r as u64))?;
    }

    let mut best = 0;
    for (i, &s) in last.scores.iter().enumerate() {
        if s > last.scores[best] {
            best = i;
        }
    }
    Ok(RerouteOutcome {
        best: last.particles[best].clone(),
        best_score: last.scores[best],
        population: current,
        trace,
    })
}
