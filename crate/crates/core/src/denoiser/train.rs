use ndarray::Array2;

use super::network::{Gradients, TrainableDenoiser};
use crate::error::{domain, Result};
use crate::lineage::{is_missing, AlignedFamily, FamilyPrior};
use crate::specfun::{sample_dirichlet_into, RandomStream};

/// Probability floor inside the logarithm of the loss.
pub const PROB_FLOOR: f64 = 1e-12;
/// Upper end of the early-time window whose token accuracy is tracked.
pub const HARD_REGIME_T: f64 = 0.2;

/// `-(1/|V|) Σ_{l∈V} ln max(p̂_l(target_l), 1e-12)` over the valid sites.
pub fn cross_entropy_loss(predictions: &Array2<f64>, targets: &[usize], valid: &[bool]) -> Result<f64> {
    if targets.len() != predictions.nrows() || valid.len() != predictions.nrows() {
        return domain("targets and mask must have one entry per site");
    }
    let mut total = 0.0;
    let mut n = 0usize;
    for l in 0..targets.len() {
        if valid[l] {
            total -= predictions[[l, targets[l]]].max(PROB_FLOOR).ln();
            n += 1;
        }
    }
    if n == 0 {
        return domain("no valid sites");
    }
    Ok(total / n as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub steps: usize,
    pub t_max: f64,
    pub log_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-2,
            batch_size: 8,
            steps: 2000,
            t_max: 6.0,
            log_every: 100,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.t_max > 0.0) || self.batch_size == 0 || self.log_every == 0 {
            return domain("learning rate, t_max, batch size and log interval must be positive");
        }
        Ok(())
    }
}

/// One row of the loss trace: the mean loss over the logging interval ending
/// at `step`, and the token accuracy of examples with `t <= 0.2` in it.
#[derive(Clone, Debug, PartialEq)]
pub struct LossRecord {
    pub step: u64,
    pub loss: f64,
    pub hard_accuracy: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainOutcome {
    pub trace: Vec<LossRecord>,
    /// Examples drawn with no valid site, which were skipped.
    pub skipped: usize,
}

/// A noisy training example built from one aligned row.
pub(crate) struct Example {
    pub input: Array2<f64>,
    pub targets: Vec<usize>,
    pub valid: Vec<bool>,
    pub t: f64,
}

/// Sample `x_t` for a row: valid sites from `Dir(α_l + t_max t e_{y_l})`,
/// missing sites uniform and flagged.
pub(crate) fn make_example(
    model: &TrainableDenoiser,
    row: &[u8],
    prior: &FamilyPrior,
    t: f64,
    t_max: f64,
    stream: &mut RandomStream,
) -> Result<Example> {
    let (len, k) = (prior.len(), prior.k());
    let valid: Vec<bool> = row.iter().map(|&c| !is_missing(c)).collect();
    let mut sites = Array2::from_elem((len, k), 1.0 / k as f64);
    let mut shifted = vec![0.0; k];
    for l in 0..len {
        if valid[l] {
            shifted.copy_from_slice(prior.site(l));
            shifted[row[l] as usize] += t_max * t;
            let out = sites.row_mut(l).into_slice().expect("fresh rows are contiguous");
            sample_dirichlet_into(&shifted, out, stream)?;
        }
    }
    let missing: Vec<bool> = valid.iter().map(|v| !v).collect();
    Ok(Example {
        input: model.features(&sites, &missing),
        targets: row.iter().map(|&c| if is_missing(c) { 0 } else { c as usize }).collect(),
        valid,
        t,
    })
}

/// Loss of one example and its gradient with respect to the parameters.
/// Also returns `(correct, valid)` token counts.
pub(crate) fn example_loss_and_grad(model: &TrainableDenoiser, ex: &Example) -> (f64, Gradients, (usize, usize)) {
    let fwd = model.forward(ex.input.clone(), ex.t);
    let logits = &fwd.logits;
    let n_valid = ex.valid.iter().filter(|v| **v).count() as f64;
    let mut grad = Array2::zeros(logits.raw_dim());
    let mut loss = 0.0;
    let mut correct = 0;
    for l in 0..logits.nrows() {
        if !ex.valid[l] {
            continue;
        }
        let row = logits.row(l);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        let y = ex.targets[l];
        loss -= (row[y] - lse).max(PROB_FLOOR.ln());
        let mut best = 0;
        for (a, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = a;
            }
            grad[[l, a]] = (v - lse).exp() / n_valid;
        }
        grad[[l, y]] -= 1.0 / n_valid;
        if best == y {
            correct += 1;
        }
    }
    let grads = model.backward(&fwd, &grad);
    (loss / n_valid, grads, (correct, n_valid as usize))
}

/// Mean cross-entropy over valid sites for one simplex input, and its
/// gradient flattened in the order of [`TrainableDenoiser::parameters_mut`].
pub fn loss_and_gradient(
    model: &TrainableDenoiser,
    sites: &Array2<f64>,
    targets: &[usize],
    valid: &[bool],
    t: f64,
) -> Result<(f64, Vec<f64>)> {
    if sites.nrows() != targets.len() || valid.len() != targets.len() || sites.ncols() != model.shape.k {
        return domain("sites, targets and mask disagree in shape");
    }
    if targets.iter().any(|&y| y >= model.shape.k) || !valid.iter().any(|v| *v) {
        return domain("targets out of range or no valid site");
    }
    let missing: Vec<bool> = valid.iter().map(|v| !v).collect();
    let ex = Example {
        input: model.features(sites, &missing),
        targets: targets.to_vec(),
        valid: valid.to_vec(),
        t,
    };
    let (loss, grads, _) = example_loss_and_grad(model, &ex);
    Ok((loss, grads.flatten()))
}

/// Supervised training on noisy paths toward aligned rows.
///
/// Each step draws `batch_size` train rows uniformly across the dataset, a
/// time `t ~ U[0, 1]` per row, and takes one plain gradient step on the mean
/// cross-entropy over valid sites. The randomness of step `n` is a substream
/// of `stream` keyed by `n`, so resuming a saved model continues the same
/// sequence of batches.
pub fn train(
    dataset: &[(AlignedFamily, FamilyPrior)],
    model: &mut TrainableDenoiser,
    config: &TrainConfig,
    stream: &RandomStream,
) -> Result<TrainOutcome> {
    config.validate()?;
    let mut pool: Vec<(usize, usize)> = Vec::new();
    for (f, (family, prior)) in dataset.iter().enumerate() {
        if prior.len() != family.len || prior.k() != model.shape.k || family.k != model.shape.k {
            return domain(format!("family {} does not match its prior or the model", family.family_id));
        }
        for (r, tag) in family.split.iter().enumerate() {
            if *tag == crate::lineage::SplitTag::Train {
                pool.push((f, r));
            }
        }
    }
    if pool.is_empty() {
        return domain("no training rows");
    }

    let mut outcome = TrainOutcome::default();
    let (mut interval_loss, mut interval_n) = (0.0, 0usize);
    let (mut hard_correct, mut hard_total) = (0usize, 0usize);
    for _ in 0..config.steps {
        let mut rng = stream.derive("train-step", model.step);
        let mut total: Option<Gradients> = None;
        let mut used = 0usize;
        for _ in 0..config.batch_size {
            let (f, r) = pool[rng.index(pool.len())];
            let (family, prior) = &dataset[f];
            let t = rng.uniform();
            let ex = make_example(model, &family.rows[r], prior, t, config.t_max, &mut rng)?;
            if !ex.valid.iter().any(|v| *v) {
                outcome.skipped += 1;
                continue;
            }
            let (loss, grads, (correct, n)) = example_loss_and_grad(model, &ex);
            interval_loss += loss;
            interval_n += 1;
            if t <= HARD_REGIME_T {
                hard_correct += correct;
                hard_total += n;
            }
            used += 1;
            total = Some(match total {
                None => grads,
                Some(mut acc) => {
                    acc.add(&grads);
                    acc
                }
            });
        }
        match total {
            Some(g) => model.apply(&g, config.learning_rate / used as f64),
            None => model.step += 1,
        }
        if model.step % config.log_every as u64 == 0 {
            outcome.trace.push(LossRecord {
                step: model.step,
                loss: if interval_n > 0 { interval_loss / interval_n as f64 } else { f64::NAN },
                hard_accuracy: (hard_total > 0).then(|| hard_correct as f64 / hard_total as f64),
            });
            interval_loss = 0.0;
            interval_n = 0;
            hard_correct = 0;
            hard_total = 0;
        }
    }
    Ok(outcome)
}

/// Tab-separated loss trace with a single header line; missing hard-regime
/// accuracies are written as `nan`.
pub fn loss_trace_to_text(trace: &[LossRecord]) -> String {
    let mut out = String::from("step\tloss\thard_regime_accuracy\n");
    for r in trace {
        let acc = r.hard_accuracy.map_or_else(|| "nan".to_string(), |a| a.to_string());
        out.push_str(&format!("{}\t{}\t{}\n", r.step, r.loss, acc));
    }
    out
}

impl Gradients {
    pub(crate) fn add(&mut self, other: &Gradients) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.w += &b.w;
            a.b += &b.b;
        }
        self.time += &other.time;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn loss_examples() {
        let perfect = array![[1.0, 0.0], [0.0, 1.0]];
        assert_eq!(cross_entropy_loss(&perfect, &[0, 1], &[true, true]).unwrap(), 0.0);
        let uniform = Array2::from_elem((3, 4), 0.25);
        assert!((cross_entropy_loss(&uniform, &[0, 1, 2], &[true; 3]).unwrap() - 4f64.ln()).abs() < 1e-15);
        let mut changed = uniform.clone();
        changed[[1, 1]] = 0.9;
        assert_eq!(
            cross_entropy_loss(&uniform, &[0, 1, 2], &[true, false, true]).unwrap(),
            cross_entropy_loss(&changed, &[0, 1, 2], &[true, false, true]).unwrap()
        );
        assert!(cross_entropy_loss(&uniform, &[0, 1, 2], &[false; 3]).is_err());
        assert!(cross_entropy_loss(&array![[0.0, 1.0]], &[0], &[true]).unwrap().is_finite());
    }
}
