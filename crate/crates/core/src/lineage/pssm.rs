use ndarray::Array2;

use super::alphabet::is_missing;
use super::family::AlignedFamily;
use crate::error::{domain, Result};

/// Position-specific log-probabilities with a background distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct Pssm {
    pub family_id: String,
    /// `L x K` natural-log probabilities.
    pub log_probs: Array2<f64>,
    /// `K` background log-probabilities.
    pub background: Vec<f64>,
}

impl Pssm {
    pub fn len(&self) -> usize {
        self.log_probs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.log_probs.nrows() == 0
    }

    pub fn k(&self) -> usize {
        self.log_probs.ncols()
    }

    /// Log-odds of letter `a` at column `l` against the background.
    #[inline]
    pub fn log_odds(&self, l: usize, a: usize) -> f64 {
        self.log_probs[[l, a]] - self.background[a]
    }

    /// Per-column most probable letter, ties to the lowest index.
    pub fn consensus(&self) -> Vec<u8> {
        self.log_probs
            .rows()
            .into_iter()
            .map(|row| {
                let mut best = 0;
                for (a, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = a;
                    }
                }
                best as u8
            })
            .collect()
    }
}

/// Column frequencies of the train rows with an additive pseudocount:
/// `P(a) = (n_a + c) / (n + K c)`, missing cells ignored. Columns without any
/// residue fall back to the uniform background.
pub fn build_pssm(family: &AlignedFamily, pseudocount: f64) -> Result<Pssm> {
    if !(pseudocount.is_finite() && pseudocount > 0.0) {
        return domain(format!("pseudocount must be positive, got {pseudocount}"));
    }
    let k = family.k;
    let mut counts = Array2::<f64>::zeros((family.len, k));
    for row in family.train_rows() {
        for (l, &c) in row.iter().enumerate() {
            if !is_missing(c) {
                counts[[l, c as usize]] += 1.0;
            }
        }
    }
    let background = vec![-(k as f64).ln(); k];
    let mut log_probs = Array2::zeros((family.len, k));
    for l in 0..family.len {
        let n: f64 = counts.row(l).sum();
        for a in 0..k {
            log_probs[[l, a]] = if n == 0.0 {
                background[a]
            } else {
                ((counts[[l, a]] + pseudocount) / (n + k as f64 * pseudocount)).ln()
            };
        }
    }
    Ok(Pssm {
        family_id: family.family_id.clone(),
        log_probs,
        background,
    })
}
