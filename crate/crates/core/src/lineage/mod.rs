//! Aligned families, priors built from root posteriors, synthetic families,
//! PSSMs and the family sampler.

mod alphabet;
mod family;
mod prior;
mod pssm;
mod registry;
mod synth;

pub use alphabet::{code_of, encode, is_missing, letter, render, AMINO, GAP, MAX_K, UNKNOWN};
pub use family::{
    clean_family, estimate_gap_rates, holdout_count, parse_aligned_fasta, parse_aligned_fasta_k, split_family,
    ungapped, AlignedFamily, CleanFilters, CleanOutcome, Rejection, SplitTag,
};
pub use prior::{mix_with_uniform, posterior_to_prior, FamilyPrior, RootPosterior, FILE_ROW_SUM_TOL};
pub use pssm::{build_pssm, Pssm};
pub use registry::{family_sampler, FamilyEntry, FamilyRegistry, FamilySampler};
pub use synth::{
    battery_config, battery_family_id, synth_battery, synth_family, ConservationProfile, GapProfile, SynthConfig,
};
