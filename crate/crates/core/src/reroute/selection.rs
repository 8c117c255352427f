use crate::error::{domain, Result};
use crate::flow::SimplexState;
use crate::specfun::RandomStream;

/// Accepted deviation of a weight vector's sum from 1.
const WEIGHT_SUM_TOL: f64 = 1e-9;

/// `w_m ∝ exp(β J_m)` via a max shift.
pub fn select_weights(scores: &[f64], beta: f64) -> Result<Vec<f64>> {
    if scores.is_empty() || scores.iter().any(|s| !s.is_finite()) || !(beta >= 0.0 && beta.is_finite()) {
        return domain("selection needs finite scores and a finite beta >= 0");
    }
    let max = scores.iter().map(|s| beta * s).fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = scores.iter().map(|s| (beta * s - max).exp()).collect();
    let total: f64 = w.iter().sum();
    for v in &mut w {
        *v /= total;
    }
    Ok(w)
}

/// `1 / Σ w²`.
pub fn effective_sample_size(weights: &[f64]) -> f64 {
    1.0 / weights.iter().map(|w| w * w).sum::<f64>()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Resampling {
    Multinomial,
    Systematic,
}

impl std::str::FromStr for Resampling {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "multinomial" => Ok(Self::Multinomial),
            "systematic" => Ok(Self::Systematic),
            other => Err(format!("unknown resampling scheme {other:?}")),
        }
    }
}

impl std::fmt::Display for Resampling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Multinomial => "multinomial",
            Self::Systematic => "systematic",
        })
    }
}

/// `weights.len()` parent indices, in increasing order.
pub fn resample_indices(weights: &[f64], scheme: Resampling, stream: &mut RandomStream) -> Result<Vec<usize>> {
    resample_n(weights, weights.len(), scheme, stream)
}

/// `n` parent indices drawn by `scheme`, in increasing order.
pub fn resample_n(weights: &[f64], n: usize, scheme: Resampling, stream: &mut RandomStream) -> Result<Vec<usize>> {
    let total: f64 = weights.iter().sum();
    if weights.is_empty() || weights.iter().any(|w| !(*w >= 0.0)) || (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return domain("resampling needs non-negative weights summing to 1");
    }
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in weights {
        acc += w;
        cdf.push(acc);
    }
    let last_positive = weights.iter().rposition(|w| *w > 0.0).expect("weights sum to 1");
    let locate = |u: f64| cdf.partition_point(|&c| c <= u).min(last_positive);
    let mut out: Vec<usize> = match scheme {
        Resampling::Multinomial => (0..n).map(|_| locate(stream.uniform() * acc)).collect(),
        Resampling::Systematic => {
            let u0 = stream.uniform();
            (0..n).map(|i| locate((i as f64 + u0) / n as f64 * acc)).collect()
        }
    };
    out.sort_unstable();
    Ok(out)
}

/// Particles with scores and selection weights.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticlePopulation {
    pub particles: Vec<SimplexState>,
    pub scores: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ParticlePopulation {
    /// Uniform weights, zero scores.
    pub fn new(particles: Vec<SimplexState>) -> Result<Self> {
        if particles.is_empty() {
            return domain("population needs at least one particle");
        }
        let m = particles.len();
        Ok(Self {
            particles,
            scores: vec![0.0; m],
            weights: vec![1.0 / m as f64; m],
        })
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }
}

/// Offspring drawn by `scheme`; scores follow their parents, weights reset to
/// uniform.
pub fn resample(population: &ParticlePopulation, scheme: Resampling, stream: &mut RandomStream) -> Result<ParticlePopulation> {
    let idx = resample_indices(&population.weights, scheme, stream)?;
    let m = idx.len();
    Ok(ParticlePopulation {
        particles: idx.iter().map(|&i| population.particles[i].clone()).collect(),
        scores: idx.iter().map(|&i| population.scores[i]).collect(),
        weights: vec![1.0 / m as f64; m],
    })
}

fn check_distribution(p: &[f64], name: &str) -> Result<f64> {
    if p.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
        return domain(format!("{name} has a negative or non-finite entry"));
    }
    let total: f64 = p.iter().sum();
    if total <= 0.0 {
        return domain(format!("{name} has no mass"));
    }
    Ok(total)
}

/// `q_β(x) = e^{β J(x)} p(x) / Z_β` on a finite support.
pub fn tilted_distribution_oracle(p: &[f64], j: &[f64], beta: f64) -> Result<Vec<f64>> {
    Ok(tilt_with_log_normalizer(p, j, beta)?.0)
}

/// [`tilted_distribution_oracle`] together with `ln Z_β`.
pub fn tilt_with_log_normalizer(p: &[f64], j: &[f64], beta: f64) -> Result<(Vec<f64>, f64)> {
    if p.len() != j.len() || j.iter().any(|v| !v.is_finite()) {
        return domain("support and fitness values disagree");
    }
    let total = check_distribution(p, "base distribution")?;
    let max = p
        .iter()
        .zip(j)
        .filter(|(pi, _)| **pi > 0.0)
        .map(|(_, ji)| beta * ji)
        .fold(f64::NEG_INFINITY, f64::max);
    let unnorm: Vec<f64> = p
        .iter()
        .zip(j)
        .map(|(pi, ji)| if *pi > 0.0 { pi / total * (beta * ji - max).exp() } else { 0.0 })
        .collect();
    let z: f64 = unnorm.iter().sum();
    Ok((unnorm.iter().map(|u| u / z).collect(), max + z.ln()))
}

/// `Σ q ln(q / p)`, with `0 ln 0 = 0`; infinite-support violations are errors.
pub fn kl_divergence(q: &[f64], p: &[f64]) -> Result<f64> {
    if q.len() != p.len() {
        return domain("distributions differ in length");
    }
    let mut kl = 0.0;
    for (&qi, &pi) in q.iter().zip(p) {
        if qi > 0.0 {
            if pi <= 0.0 {
                return domain("q puts mass where p has none");
            }
            kl += qi * (qi / pi).ln();
        }
    }
    Ok(kl)
}

/// `E_q[J] - KL(q ‖ p) / β`.
pub fn kl_objective(q: &[f64], p_mut: &[f64], j: &[f64], beta: f64) -> Result<f64> {
    if !(beta > 0.0) || q.len() != j.len() {
        return domain("objective needs beta > 0 and one fitness value per point");
    }
    check_distribution(q, "q")?;
    check_distribution(p_mut, "p")?;
    let expected: f64 = q.iter().zip(j).map(|(qi, ji)| qi * ji).sum();
    Ok(expected - kl_divergence(q, p_mut)? / beta)
}
