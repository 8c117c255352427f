use std::collections::BTreeMap;

use ndarray::Array2;

use super::Denoiser;
use crate::error::{domain, Result};
use crate::flow::SimplexState;
use crate::lineage::{FamilyPrior, RootPosterior};
use crate::specfun::{categorical_unchecked, ln_gamma, log_sum_exp, sample_dirichlet_into, RandomStream, SimplexVector};

/// Smallest coordinate used inside `ln x` by the oracle.
const X_FLOOR: f64 = f64::MIN_POSITIVE;

/// Unnormalized log posterior of the terminal letter at one site:
/// `ln q_i + s ln x_i - [ln Γ(α_i + s) - ln Γ(α_i)]`, `s = t_max t`. The terms
/// shared by every letter are dropped.
pub(crate) fn oracle_log_weights(x: &[f64], s: f64, alpha: &[f64], q: &[f64], out: &mut [f64]) {
    for i in 0..x.len() {
        out[i] = if q[i] > 0.0 {
            let shift = if s == 0.0 { 0.0 } else { ln_gamma(alpha[i] + s) - ln_gamma(alpha[i]) };
            q[i].ln() + s * x[i].max(X_FLOOR).ln() - shift
        } else {
            f64::NEG_INFINITY
        };
    }
}

fn normalize_log_weights(w: &mut [f64]) {
    let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in w.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in w.iter_mut() {
        *v /= sum;
    }
}

/// Exact posterior `p(y = i | x) ∝ q_i Dir(x; α + s e_i)` of the letter a
/// site is travelling toward.
pub fn oracle_posterior(x: &[f64], t: f64, alpha: &[f64], q: &[f64], t_max: f64) -> Result<SimplexVector> {
    if x.len() != alpha.len() || q.len() != alpha.len() {
        return domain("oracle inputs have different lengths");
    }
    if !q.iter().any(|&v| v > 0.0) {
        return domain("label prior has no positive entry");
    }
    if alpha.iter().any(|&a| !(a > 0.0)) {
        return domain("concentrations must be positive");
    }
    let mut w = vec![0.0; x.len()];
    oracle_log_weights(x, t_max * t, alpha, q, &mut w);
    normalize_log_weights(&mut w);
    SimplexVector::new(w)
}

/// Generation concentrations and decoder label prior of one family.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleFamily {
    pub alpha: Array2<f64>,
    pub label_prior: Array2<f64>,
}

/// The Bayes-optimal denoiser for families whose site laws are known.
#[derive(Clone, Debug)]
pub struct BayesOracle {
    pub t_max: f64,
    families: BTreeMap<String, OracleFamily>,
}

impl BayesOracle {
    pub fn new(t_max: f64) -> Self {
        Self {
            t_max,
            families: BTreeMap::new(),
        }
    }

    /// Register a family by its prior and the exact site laws.
    pub fn insert(&mut self, prior: &FamilyPrior, truth: &RootPosterior) -> Result<()> {
        self.insert_with_label_prior(prior, truth.probs.clone())
    }

    /// Register a family whose decoder uses `label_prior` instead of the
    /// true site laws.
    pub fn insert_with_label_prior(&mut self, prior: &FamilyPrior, label_prior: Array2<f64>) -> Result<()> {
        if label_prior.dim() != prior.alpha.dim() {
            return domain("label prior and concentrations differ in shape");
        }
        self.families.insert(
            prior.family_id.clone(),
            OracleFamily {
                alpha: prior.alpha.clone(),
                label_prior: label_prior.as_standard_layout().into_owned(),
            },
        );
        Ok(())
    }
}

impl Denoiser for BayesOracle {
    fn logits(&self, state: &SimplexState, t: f64) -> Result<Array2<f64>> {
        let Some(fam) = self.families.get(&state.family_id) else {
            return domain(format!("oracle knows nothing about family {}", state.family_id));
        };
        if fam.alpha.dim() != state.sites.dim() {
            return domain("state shape does not match the oracle family");
        }
        let mut out = Array2::zeros(state.sites.raw_dim());
        let s = self.t_max * t;
        for l in 0..state.len() {
            if state.gap_mask[l] {
                continue;
            }
            let row = out.row_mut(l).into_slice().expect("fresh rows are contiguous");
            let alpha = fam.alpha.row(l);
            let q = fam.label_prior.row(l);
            oracle_log_weights(
                state.site(l),
                s,
                alpha.as_slice().expect("contiguous"),
                q.as_slice().expect("contiguous"),
                row,
            );
        }
        Ok(out)
    }
}

/// Monte-Carlo mean of `max_i p(y = i | x_t)` at one time, with its standard
/// error.
#[derive(Clone, Debug, PartialEq)]
pub struct AccuracyPoint {
    pub t: f64,
    pub mean: f64,
    pub std_err: f64,
}

/// A set of synthetic families with known site laws, aligned column by
/// column, and their mixture weights.
#[derive(Clone, Debug)]
pub struct OracleBattery {
    pub alphas: Vec<Array2<f64>>,
    pub truths: Vec<Array2<f64>>,
    pub weights: Vec<f64>,
}

impl OracleBattery {
    pub fn new(priors: &[FamilyPrior], truths: &[RootPosterior], weights: Vec<f64>) -> Result<Self> {
        if priors.is_empty() || priors.len() != truths.len() || weights.len() != priors.len() {
            return domain("battery needs matching priors, truths and weights");
        }
        let dim = priors[0].alpha.dim();
        if priors.iter().zip(truths).any(|(p, q)| p.alpha.dim() != dim || q.probs.dim() != dim) {
            return domain("battery families must share one shape");
        }
        let total: f64 = weights.iter().sum();
        Ok(Self {
            alphas: priors.iter().map(|p| p.alpha.clone()).collect(),
            truths: truths.iter().map(|q| q.probs.clone()).collect(),
            weights: weights.iter().map(|w| w / total).collect(),
        })
    }

    /// The same families generated through the all-ones prior.
    pub fn with_uniform_prior(&self) -> Self {
        Self {
            alphas: self.alphas.iter().map(|a| Array2::ones(a.raw_dim())).collect(),
            truths: self.truths.clone(),
            weights: self.weights.clone(),
        }
    }

    fn shape(&self) -> (usize, usize) {
        self.alphas[0].dim()
    }

    /// Draw `(h, l, y, x_t)` from the generative path.
    fn draw(&self, s: f64, stream: &mut RandomStream, x: &mut [f64], shifted: &mut [f64]) -> Result<(usize, usize, usize)> {
        let (len, _) = self.shape();
        let h = categorical_unchecked(&self.weights, 1.0, stream);
        let l = stream.index(len);
        let q = self.truths[h].row(l);
        let y = categorical_unchecked(q.as_slice().expect("contiguous"), 1.0, stream);
        for (dst, &a) in shifted.iter_mut().zip(self.alphas[h].row(l)) {
            *dst = a;
        }
        shifted[y] += s;
        sample_dirichlet_into(shifted, x, stream)?;
        Ok((h, l, y))
    }

    /// `A(X, Z)`: the decoder knows the family of each draw.
    pub fn accuracy_with_context(&self, grid: &[f64], n_mc: usize, t_max: f64, stream: &mut RandomStream) -> Result<Vec<AccuracyPoint>> {
        self.curve(grid, n_mc, t_max, stream, |h, l, x, s, w| {
            let alpha = self.alphas[h].row(l);
            let q = self.truths[h].row(l);
            oracle_log_weights(x, s, alpha.as_slice().expect("contiguous"), q.as_slice().expect("contiguous"), w);
        })
    }

    /// `A(X)`: the decoder marginalizes the family under the battery weights.
    pub fn accuracy_without_context(&self, grid: &[f64], n_mc: usize, t_max: f64, stream: &mut RandomStream) -> Result<Vec<AccuracyPoint>> {
        let k = self.shape().1;
        let n_fam = self.weights.len();
        self.curve(grid, n_mc, t_max, stream, |_, l, x, s, w| {
            let mut per_family = vec![0.0; n_fam];
            let mut scratch = vec![0.0; k];
            for (i, wi) in w.iter_mut().enumerate() {
                for (g, pf) in per_family.iter_mut().enumerate() {
                    let alpha = self.alphas[g].row(l);
                    let alpha = alpha.as_slice().expect("contiguous");
                    let q = self.truths[g][[l, i]];
                    *pf = if q > 0.0 {
                        // Full log density of x under Dir(α + s e_i), family term included.
                        self.weights[g].ln() + q.ln() + log_dirichlet_density(x, alpha, i, s, &mut scratch)
                    } else {
                        f64::NEG_INFINITY
                    };
                }
                *wi = log_sum_exp(&per_family).unwrap_or(f64::NEG_INFINITY);
            }
        })
    }

    fn curve<F>(&self, grid: &[f64], n_mc: usize, t_max: f64, stream: &mut RandomStream, log_weights: F) -> Result<Vec<AccuracyPoint>>
    where
        F: Fn(usize, usize, &[f64], f64, &mut [f64]),
    {
        if n_mc < 2 {
            return domain("need at least two Monte-Carlo draws");
        }
        let k = self.shape().1;
        let mut x = vec![0.0; k];
        let mut shifted = vec![0.0; k];
        let mut w = vec![0.0; k];
        grid.iter()
            .map(|&t| {
                let s = t_max * t;
                let (mut sum, mut sum_sq) = (0.0, 0.0);
                for _ in 0..n_mc {
                    let (h, l, _) = self.draw(s, stream, &mut x, &mut shifted)?;
                    log_weights(h, l, &x, s, &mut w);
                    normalize_log_weights(&mut w);
                    let m = w.iter().copied().fold(0.0, f64::max);
                    sum += m;
                    sum_sq += m * m;
                }
                let n = n_mc as f64;
                let mean = sum / n;
                let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
                Ok(AccuracyPoint {
                    t,
                    mean,
                    std_err: (var / n).sqrt(),
                })
            })
            .collect()
    }
}

/// `ln Dir(x; α + s e_i)`.
fn log_dirichlet_density(x: &[f64], alpha: &[f64], i: usize, s: f64, scratch: &mut [f64]) -> f64 {
    scratch.copy_from_slice(alpha);
    scratch[i] += s;
    let a0: f64 = scratch.iter().sum();
    let mut v = ln_gamma(a0);
    for (&a, &xj) in scratch.iter().zip(x) {
        v += (a - 1.0) * xj.max(X_FLOOR).ln() - ln_gamma(a);
    }
    v
}

/// Bayes-oracle accuracy of one family across a time grid. The decoder uses
/// the same prior that generates the paths and the exact site laws.
pub fn bayes_accuracy_curve(
    prior: &FamilyPrior,
    truth: &RootPosterior,
    time_grid: &[f64],
    n_mc: usize,
    t_max: f64,
    stream: &mut RandomStream,
) -> Result<Vec<AccuracyPoint>> {
    OracleBattery::new(std::slice::from_ref(prior), std::slice::from_ref(truth), vec![1.0])?
        .accuracy_with_context(time_grid, n_mc, t_max, stream)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_zero_returns_label_prior() {
        let q = [0.1, 0.6, 0.3];
        let p = oracle_posterior(&[0.2, 0.3, 0.5], 0.0, &[1.0, 2.0, 3.0], &q, 6.0).unwrap();
        for (a, b) in p.as_slice().iter().zip(q) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn symmetric_case_is_power_of_x() {
        // s = 1: posterior ∝ x_i.
        let p = oracle_posterior(&[0.8, 0.2], 1.0 / 6.0, &[1.0, 1.0], &[0.5, 0.5], 6.0).unwrap();
        assert!((p.as_slice()[0] - 0.8).abs() < 1e-12);
        assert!(oracle_posterior(&[0.5, 0.5], 0.3, &[1.0, 1.0], &[0.0, 0.0], 6.0).is_err());
    }

    #[test]
    fn one_hot_truth_is_always_recovered() {
        let mut probs = Array2::zeros((3, 4));
        for l in 0..3 {
            probs[[l, l]] = 1.0;
        }
        let truth = RootPosterior::new("f", probs).unwrap();
        let prior = FamilyPrior::uniform("f", 3, 4);
        let curve = bayes_accuracy_curve(&prior, &truth, &[0.0, 0.5, 1.0], 200, 6.0, &mut RandomStream::new(1, 0)).unwrap();
        assert!(curve.iter().all(|p| p.mean == 1.0));
    }
}
