use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::Denoiser;
use crate::error::{domain, Error, Result};
use crate::flow::SimplexState;
use crate::specfun::RandomStream;

/// Number of sinusoidal time frequencies.
pub const TIME_FREQS: usize = 8;
const TIME_DIM: usize = 2 * TIME_FREQS;
/// Coordinates below this are clipped before taking logs in the input.
const LOG_FLOOR: f64 = 1e-6;
const CHECKPOINT_VERSION: u32 = 1;

/// Shape of the windowed classifier.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkShape {
    pub k: usize,
    pub radius: usize,
    pub hidden: Vec<usize>,
}

impl NetworkShape {
    /// Per-site features: `x`, scaled `ln x`, missing flag.
    fn site_features(&self) -> usize {
        2 * self.k + 1
    }

    pub fn input_dim(&self) -> usize {
        (2 * self.radius + 1) * self.site_features()
    }

    fn validate(&self) -> Result<()> {
        if self.k < 2 || self.hidden.is_empty() || self.hidden.contains(&0) {
            return domain("network needs K >= 2 and at least one non-empty hidden layer");
        }
        Ok(())
    }
}

impl Default for NetworkShape {
    fn default() -> Self {
        Self {
            k: 20,
            radius: 5,
            hidden: vec![128, 128],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub(crate) struct Dense {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Dense {
    fn init(fan_in: usize, fan_out: usize, stream: &mut RandomStream) -> Self {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let w = Array2::from_shape_fn((fan_in, fan_out), |_| limit * (2.0 * stream.uniform() - 1.0));
        Self {
            w,
            b: Array1::zeros(fan_out),
        }
    }

    fn zeros_like(&self) -> Self {
        Self {
            w: Array2::zeros(self.w.raw_dim()),
            b: Array1::zeros(self.b.raw_dim()),
        }
    }
}

/// A windowed feed-forward classifier: for each site, the simplex rows of the
/// `2r + 1` surrounding sites (each as `x`, `1 + ln max(x, 1e-6) / ln 1e6` and
/// a missing flag; out-of-range and gap sites are uniform with the flag set)
/// go through tanh layers, with a sinusoidal time embedding added as a bias
/// after the first layer, then to `K` logits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainableDenoiser {
    pub shape: NetworkShape,
    pub(crate) layers: Vec<Dense>,
    pub(crate) time: Array2<f64>,
    /// Optimizer steps taken so far.
    pub step: u64,
}

/// Parameter gradients, laid out like the network.
#[derive(Clone, Debug)]
pub struct Gradients {
    pub(crate) layers: Vec<Dense>,
    pub(crate) time: Array2<f64>,
}

/// Activations kept for the backward pass.
pub(crate) struct Forward {
    input: Array2<f64>,
    embed: Array1<f64>,
    hidden: Vec<Array2<f64>>,
    pub(crate) logits: Array2<f64>,
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format_version: u32,
    model: TrainableDenoiser,
}

pub(crate) fn time_embedding(t: f64) -> Array1<f64> {
    let mut e = Array1::zeros(TIME_DIM);
    for f in 0..TIME_FREQS {
        // Frequencies log-spaced over [1, 100].
        let omega = (100f64.ln() * f as f64 / (TIME_FREQS - 1) as f64).exp();
        e[2 * f] = (omega * t).sin();
        e[2 * f + 1] = (omega * t).cos();
    }
    e
}

impl TrainableDenoiser {
    pub fn new(shape: NetworkShape, stream: &mut RandomStream) -> Result<Self> {
        shape.validate()?;
        let mut layers = Vec::new();
        let mut fan_in = shape.input_dim();
        for &h in &shape.hidden {
            layers.push(Dense::init(fan_in, h, stream));
            fan_in = h;
        }
        layers.push(Dense::init(fan_in, shape.k, stream));
        let time = Dense::init(TIME_DIM, shape.hidden[0], stream).w;
        Ok(Self {
            shape,
            layers,
            time,
            step: 0,
        })
    }

    pub fn n_parameters(&self) -> usize {
        self.layers.iter().map(|d| d.w.len() + d.b.len()).sum::<usize>() + self.time.len()
    }

    /// Input matrix, one row per site. `missing[l]` marks sites whose content
    /// is hidden from the network.
    pub(crate) fn features(&self, sites: &Array2<f64>, missing: &[bool]) -> Array2<f64> {
        let (len, k) = sites.dim();
        let r = self.shape.radius as isize;
        let per = self.shape.site_features();
        let mut input = Array2::zeros((len, self.shape.input_dim()));
        let uniform = 1.0 / k as f64;
        let scale = -LOG_FLOOR.ln();
        for l in 0..len {
            let mut row = input.row_mut(l);
            for (slot, off) in (-r..=r).enumerate() {
                let j = l as isize + off;
                let base = slot * per;
                let present = j >= 0 && (j as usize) < len && !missing[j as usize];
                for a in 0..k {
                    let x = if present { sites[[j as usize, a]] } else { uniform };
                    row[base + a] = x;
                    row[base + k + a] = 1.0 + x.max(LOG_FLOOR).ln() / scale;
                }
                row[base + 2 * k] = if present { 0.0 } else { 1.0 };
            }
        }
        input
    }

    pub(crate) fn forward(&self, input: Array2<f64>, t: f64) -> Forward {
        let embed = time_embedding(t);
        let time_bias = embed.dot(&self.time);
        let mut hidden = Vec::with_capacity(self.layers.len() - 1);
        let mut current = input.dot(&self.layers[0].w) + &self.layers[0].b + &time_bias;
        current.mapv_inplace(f64::tanh);
        hidden.push(current);
        for layer in &self.layers[1..self.layers.len() - 1] {
            let mut next = hidden.last().expect("at least one hidden layer").dot(&layer.w) + &layer.b;
            next.mapv_inplace(f64::tanh);
            hidden.push(next);
        }
        let out = self.layers.last().expect("output layer");
        let logits = hidden.last().expect("at least one hidden layer").dot(&out.w) + &out.b;
        Forward {
            input,
            embed,
            hidden,
            logits,
        }
    }

    /// Backward pass for `d loss / d logits = grad_logits`.
    pub(crate) fn backward(&self, fwd: &Forward, grad_logits: &Array2<f64>) -> Gradients {
        let n_layers = self.layers.len();
        let mut grads: Vec<Dense> = self.layers.iter().map(Dense::zeros_like).collect();
        let mut delta = grad_logits.clone();
        for i in (0..n_layers).rev() {
            let below = if i == 0 { &fwd.input } else { &fwd.hidden[i - 1] };
            grads[i].w = below.t().dot(&delta);
            grads[i].b = delta.sum_axis(Axis(0));
            if i == 0 {
                break;
            }
            let mut back = delta.dot(&self.layers[i].w.t());
            // tanh' = 1 - h^2
            back.zip_mut_with(&fwd.hidden[i - 1], |g, &h| *g *= 1.0 - h * h);
            delta = back;
        }
        // The time bias enters the first pre-activation of every site.
        let first_delta_sum = grads[0].b.clone();
        let time = fwd
            .embed
            .view()
            .insert_axis(Axis(1))
            .dot(&first_delta_sum.view().insert_axis(Axis(0)));
        Gradients { layers: grads, time }
    }

    /// Plain gradient step.
    pub(crate) fn apply(&mut self, grads: &Gradients, lr: f64) {
        for (layer, g) in self.layers.iter_mut().zip(&grads.layers) {
            layer.w.scaled_add(-lr, &g.w);
            layer.b.scaled_add(-lr, &g.b);
        }
        self.time.scaled_add(-lr, &grads.time);
        self.step += 1;
    }

    /// Logits for a whole state; gap rows see themselves as missing.
    pub fn forward_state(&self, state: &SimplexState, t: f64) -> Array2<f64> {
        let input = self.features(&state.sites, &state.gap_mask);
        self.forward(input, t).logits
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(&Checkpoint {
            format_version: CHECKPOINT_VERSION,
            model: self.clone(),
        })
        .map_err(|e| Error::Parse(format!("cannot serialize model: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(text).map_err(|e| Error::Parse(format!("bad checkpoint: {e}")))?;
        if ck.format_version != CHECKPOINT_VERSION {
            return Err(Error::Parse(format!("unsupported checkpoint version {}", ck.format_version)));
        }
        let m = ck.model;
        m.shape.validate()?;
        let mut fan_in = m.shape.input_dim();
        let dims_ok = m.layers.len() == m.shape.hidden.len() + 1
            && m.layers.iter().zip(m.shape.hidden.iter().chain(std::iter::once(&m.shape.k))).all(|(d, &h)| {
                let ok = d.w.dim() == (fan_in, h) && d.b.len() == h;
                fan_in = h;
                ok
            })
            && m.time.dim() == (TIME_DIM, m.shape.hidden[0]);
        if !dims_ok {
            return Err(Error::Parse("checkpoint parameters do not match its shape".into()));
        }
        Ok(m)
    }
}

impl Gradients {
    /// All gradient entries in a fixed order, for tests.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::new();
        for d in &self.layers {
            v.extend(d.w.iter());
            v.extend(d.b.iter());
        }
        v.extend(self.time.iter());
        v
    }
}

impl TrainableDenoiser {
    /// Mutable references to all parameters in the order of
    /// [`Gradients::flatten`].
    pub fn parameters_mut(&mut self) -> Vec<&mut f64> {
        let mut v: Vec<&mut f64> = Vec::new();
        for d in &mut self.layers {
            v.extend(d.w.iter_mut());
            v.extend(d.b.iter_mut());
        }
        v.extend(self.time.iter_mut());
        v
    }
}

impl Denoiser for TrainableDenoiser {
    fn logits(&self, state: &SimplexState, t: f64) -> Result<Array2<f64>> {
        if state.k() != self.shape.k {
            return domain(format!("model expects K={}, state has K={}", self.shape.k, state.k()));
        }
        Ok(self.forward_state(state, t))
    }
}
