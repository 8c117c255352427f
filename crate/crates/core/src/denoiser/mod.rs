//! Classifiers `p̂(x₁ | x_t, t)`: the exact Bayes oracle for synthetic
//! families and a small trainable network with its training loop.

mod network;
mod oracle;
mod train;

pub use network::{Gradients, NetworkShape, TrainableDenoiser, TIME_FREQS};
pub use oracle::{bayes_accuracy_curve, oracle_posterior, AccuracyPoint, BayesOracle, OracleBattery, OracleFamily};
pub use train::{cross_entropy_loss, loss_and_gradient, loss_trace_to_text, train, LossRecord, TrainConfig, TrainOutcome, HARD_REGIME_T, PROB_FLOOR};

use ndarray::Array2;

use crate::error::Result;
use crate::flow::SimplexState;
use crate::specfun::softmax_in_place;

/// A per-site classifier over terminal letters.
pub trait Denoiser: Sync {
    /// `L x K` unnormalized log-probabilities. Gap rows may hold anything.
    fn logits(&self, state: &SimplexState, t: f64) -> Result<Array2<f64>>;

    /// Row-wise softmax of [`Denoiser::logits`].
    fn probs(&self, state: &SimplexState, t: f64) -> Result<Array2<f64>> {
        let mut out = self.logits(state, t)?;
        for mut row in out.rows_mut() {
            softmax_in_place(row.as_slice_mut().expect("logit rows are contiguous"));
        }
        Ok(out)
    }
}
