use rand_distr::{Distribution, StandardNormal};

use super::RandomStream;
use crate::error::{domain, Result};

/// Inputs are accepted as simplex points when `|sum - 1| <= SIMPLEX_SUM_TOL`...
pub const SIMPLEX_SUM_TOL: f64 = 1e-9;
/// ...and no component is below `-SIMPLEX_NEG_TOL`.
pub const SIMPLEX_NEG_TOL: f64 = 1e-12;

/// A point on the probability simplex.
///
/// Construction validates within [`SIMPLEX_SUM_TOL`] / [`SIMPLEX_NEG_TOL`],
/// clamps tiny negatives to zero and renormalizes.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexVector(Vec<f64>);

impl SimplexVector {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        normalize_simplex(&mut values)?;
        Ok(Self(values))
    }

    pub fn uniform(k: usize) -> Self {
        Self(vec![1.0 / k as f64; k])
    }

    pub fn vertex(k: usize, i: usize) -> Self {
        let mut v = vec![0.0; k];
        v[i] = 1.0;
        Self(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl AsRef<[f64]> for SimplexVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Validate a would-be simplex row in place and renormalize it.
pub fn normalize_simplex(values: &mut [f64]) -> Result<()> {
    if values.is_empty() {
        return domain("simplex vector must be non-empty");
    }
    let mut sum = 0.0;
    for &v in values.iter() {
        if !v.is_finite() || v < -SIMPLEX_NEG_TOL {
            return domain(format!("invalid simplex component {v}"));
        }
        sum += v.max(0.0);
    }
    if (sum - 1.0).abs() > SIMPLEX_SUM_TOL {
        return domain(format!("simplex components sum to {sum}"));
    }
    for v in values.iter_mut() {
        *v = v.max(0.0) / sum;
    }
    Ok(())
}

/// `ln X` for `X ~ Gamma(shape, 1)`.
///
/// Marsaglia-Tsang squeeze / rejection for `shape >= 1`; for `shape < 1` the
/// boost `X = Y U^{1/shape}` with `Y ~ Gamma(shape + 1)`, done in log space so
/// tiny shapes do not underflow to zero.
pub(crate) fn ln_gamma_variate(shape: f64, stream: &mut RandomStream) -> f64 {
    if shape < 1.0 {
        let boost = stream.open01().ln() / shape;
        return ln_gamma_variate(shape + 1.0, stream) + boost;
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x: f64 = StandardNormal.sample(stream);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u = stream.open01();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d.ln() + v.ln();
        }
    }
}

fn check_shape(shape: f64) -> Result<()> {
    if !(shape.is_finite() && shape > 0.0) {
        return domain(format!("gamma shape must be finite and positive, got {shape}"));
    }
    Ok(())
}

/// A `Gamma(shape, 1)` draw. Always strictly positive.
pub fn sample_gamma(shape: f64, stream: &mut RandomStream) -> Result<f64> {
    check_shape(shape)?;
    Ok(ln_gamma_variate(shape, stream).exp().max(f64::MIN_POSITIVE))
}

/// Draw from `Dir(alpha)` into `out`, via normalized log-gamma variates.
///
/// Components below `f64::MIN_POSITIVE` are floored there so every coordinate
/// stays strictly positive.
pub fn sample_dirichlet_into(alpha: &[f64], out: &mut [f64], stream: &mut RandomStream) -> Result<()> {
    debug_assert_eq!(alpha.len(), out.len());
    if alpha.is_empty() {
        return domain("Dirichlet needs at least one component");
    }
    for &a in alpha {
        check_shape(a)?;
    }
    if alpha.len() == 1 {
        out[0] = 1.0;
        return Ok(());
    }
    let mut max = f64::NEG_INFINITY;
    for (o, &a) in out.iter_mut().zip(alpha) {
        *o = ln_gamma_variate(a, stream);
        max = max.max(*o);
    }
    let mut sum = 0.0;
    for o in out.iter_mut() {
        *o = (*o - max).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o = (*o / sum).max(f64::MIN_POSITIVE);
    }
    Ok(())
}

/// A draw from `Dir(alpha)`.
pub fn sample_dirichlet(alpha: &[f64], stream: &mut RandomStream) -> Result<SimplexVector> {
    let mut out = vec![0.0; alpha.len()];
    sample_dirichlet_into(alpha, &mut out, stream)?;
    Ok(SimplexVector(out))
}

/// Zero-based index drawn with probability `probs[i]`.
pub fn sample_categorical(probs: &[f64], stream: &mut RandomStream) -> Result<usize> {
    let mut total = 0.0;
    for &p in probs {
        if !p.is_finite() || p < -SIMPLEX_NEG_TOL {
            return domain(format!("invalid categorical probability {p}"));
        }
        total += p.max(0.0);
    }
    if probs.is_empty() || (total - 1.0).abs() > SIMPLEX_SUM_TOL {
        return domain(format!("categorical probabilities sum to {total}"));
    }
    Ok(categorical_unchecked(probs, total, stream))
}

/// Inverse-CDF draw from non-negative weights with the given positive total.
pub(crate) fn categorical_unchecked(weights: &[f64], total: f64, stream: &mut RandomStream) -> usize {
    let u = stream.uniform() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// Shannon entropy in nats, with `0 ln 0 = 0`.
pub fn shannon_entropy(probs: &SimplexVector) -> f64 {
    entropy_of(probs.as_slice())
}

pub(crate) fn entropy_of(p: &[f64]) -> f64 {
    -p.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()).sum::<f64>()
}

/// `ln Σ exp(v_i)` with a max shift.
pub fn log_sum_exp(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return domain("log_sum_exp of an empty vector");
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Ok(max);
    }
    if !max.is_finite() {
        return domain(format!("log_sum_exp input contains {max}"));
    }
    Ok(max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln())
}

/// In-place softmax of a row.
pub(crate) fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}
