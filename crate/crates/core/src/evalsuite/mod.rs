//! Family validity, novelty, diversity and length-stratified reports.

mod identity;
mod report;
mod score;

pub use identity::{cluster_assignments, diversity_clusters, novelty_at, novelty_from_identities, nn_identity, pair_identity};
pub use report::{
    evaluate, length_stratified_report, parse_records, parse_summary, Aggregates, EvalConfig, LengthBin, MetricsReport,
    SampleRecord,
};
pub use score::{
    assign_detailed, assign_family, calibrate_hit_threshold, family_accuracy, family_scores, hit_any, nearest_rank,
    pssm_align_score, Assignment,
};

use crate::error::{domain, Result};
use crate::lineage::{is_missing, ungapped, Pssm};

/// One generated (or held-out natural) sequence with its intended family.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedSample {
    pub sequence: String,
    pub intended_family: String,
    /// Aligned residue codes the sequence was decoded from, when known.
    pub aligned: Option<Vec<u8>>,
    pub length: usize,
}

impl GeneratedSample {
    pub fn new(sequence: impl Into<String>, intended_family: impl Into<String>) -> Result<Self> {
        let sequence = sequence.into();
        if sequence.is_empty() {
            return domain("empty sequence");
        }
        Ok(Self {
            length: sequence.len(),
            sequence,
            intended_family: intended_family.into(),
            aligned: None,
        })
    }

    /// Sample from an aligned row; the sequence is its ungapped rendering.
    pub fn from_aligned(aligned: Vec<u8>, intended_family: impl Into<String>) -> Result<Self> {
        let mut s = Self::new(ungapped(&aligned), intended_family)?;
        s.aligned = Some(aligned);
        Ok(s)
    }
}

/// Mean over non-missing columns of `ln p_l(residue)`: the deterministic
/// fitness proxy of an aligned row.
pub fn aligned_fitness(aligned: &[u8], pssm: &Pssm) -> Result<f64> {
    if aligned.len() != pssm.len() {
        return domain("aligned row and PSSM differ in length");
    }
    let (mut total, mut n) = (0.0, 0usize);
    for (l, &c) in aligned.iter().enumerate() {
        if !is_missing(c) && (c as usize) < pssm.k() {
            total += pssm.log_probs[[l, c as usize]];
            n += 1;
        }
    }
    if n == 0 {
        return domain("aligned row has no residue");
    }
    Ok(total / n as f64)
}
