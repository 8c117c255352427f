use crate::error::{domain, Result};
use crate::lineage::{encode, is_missing, FamilyRegistry, Pssm};

use super::GeneratedSample;

/// Best ungapped placement of `sequence` against the PSSM columns.
///
/// The shorter of the two slides along the longer one, so every placement
/// covers the shorter completely. The score is the sum of matched-column
/// log-odds against the background; letters outside the PSSM alphabet score
/// 0. Coverage is the fraction of the shorter side matched by a known letter.
/// Ties keep the leftmost placement.
pub fn pssm_align_score(sequence: &str, pssm: &Pssm) -> Result<(f64, f64)> {
    if sequence.is_empty() || pssm.is_empty() {
        return domain("empty sequence or profile");
    }
    let codes = encode(sequence, pssm.k());
    let (n, len) = (codes.len(), pssm.len());
    let shorter = n.min(len);
    let mut best = (f64::NEG_INFINITY, 0.0);
    for offset in 0..=n.abs_diff(len) {
        let (mut score, mut known) = (0.0, 0usize);
        for i in 0..shorter {
            let (pos, col) = if n <= len { (i, i + offset) } else { (i + offset, i) };
            let c = codes[pos];
            if !is_missing(c) {
                score += pssm.log_odds(col, c as usize);
                known += 1;
            }
        }
        if score > best.0 {
            best = (score, known as f64 / shorter as f64);
        }
    }
    Ok(best)
}

/// Result of scanning one sequence against every family profile.
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    pub family_id: String,
    pub score: f64,
    /// Best score among the other families; `-inf` for a one-family registry.
    pub second_score: f64,
}

/// Scores against every family, in family-id order.
pub fn family_scores(sequence: &str, registry: &FamilyRegistry) -> Result<Vec<(String, f64)>> {
    registry
        .entries()
        .map(|e| Ok((e.family.family_id.clone(), pssm_align_score(sequence, &e.pssm)?.0)))
        .collect()
}

/// Argmax family with runner-up score; ties go to the smallest family id.
pub fn assign_detailed(sequence: &str, registry: &FamilyRegistry) -> Result<Assignment> {
    if registry.is_empty() {
        return domain("empty registry");
    }
    let mut scores = family_scores(sequence, registry)?;
    let mut best = 0;
    for (i, (_, s)) in scores.iter().enumerate() {
        if *s > scores[best].1 {
            best = i;
        }
    }
    let second_score = scores
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != best)
        .map(|(_, (_, s))| *s)
        .fold(f64::NEG_INFINITY, f64::max);
    let (family_id, score) = scores.swap_remove(best);
    Ok(Assignment {
        family_id,
        score,
        second_score,
    })
}

/// `(family_id, score)` of [`assign_detailed`].
pub fn assign_family(sequence: &str, registry: &FamilyRegistry) -> Result<(String, f64)> {
    let a = assign_detailed(sequence, registry)?;
    Ok((a.family_id, a.score))
}

/// Fraction of samples assigned to their intended family.
pub fn family_accuracy(samples: &[GeneratedSample], registry: &FamilyRegistry) -> Result<f64> {
    if samples.is_empty() {
        return domain("no samples");
    }
    let mut correct = 0usize;
    for s in samples {
        if assign_family(&s.sequence, registry)?.0 == s.intended_family {
            correct += 1;
        }
    }
    Ok(correct as f64 / samples.len() as f64)
}

/// Fraction of samples whose best family score reaches `score_threshold`.
pub fn hit_any(samples: &[GeneratedSample], registry: &FamilyRegistry, score_threshold: f64) -> Result<f64> {
    if samples.is_empty() || score_threshold.is_nan() || score_threshold == f64::INFINITY {
        return domain("need samples and a threshold below +inf");
    }
    let mut hits = 0usize;
    for s in samples {
        if assign_family(&s.sequence, registry)?.1 >= score_threshold {
            hits += 1;
        }
    }
    Ok(hits as f64 / samples.len() as f64)
}

/// Nearest-rank quantile of a non-empty slice: the value at rank
/// `max(1, ceil(p n))` of the sorted data.
pub fn nearest_rank(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() || !(0.0..=1.0).contains(&p) || values.iter().any(|v| v.is_nan()) {
        return domain("nearest rank needs data without NaN and p in [0, 1]");
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((p * sorted.len() as f64).ceil() as usize).max(1);
    Ok(sorted[rank - 1])
}

/// Hit threshold: the 1st percentile (nearest rank) of the held-out rows'
/// scores against their own family's PSSM, pooled over the registry.
pub fn calibrate_hit_threshold(registry: &FamilyRegistry) -> Result<f64> {
    let mut scores = Vec::new();
    for e in registry.entries() {
        for seq in e.family.test_sequences() {
            if !seq.is_empty() {
                scores.push(pssm_align_score(&seq, &e.pssm)?.0);
            }
        }
    }
    if scores.is_empty() {
        return domain("registry has no held-out rows to calibrate on");
    }
    nearest_rank(&scores, 0.01)
}
