use ndarray::{Array2, ArrayView1};

use crate::error::{domain, Result};
use crate::lineage::{letter, FamilyPrior, GAP};
use crate::specfun::{sample_dirichlet_into, RandomStream};

/// Per-site simplex points of one sequence at flow time `t`.
///
/// Gap rows hold the uniform vector and never move.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexState {
    pub family_id: String,
    pub sites: Array2<f64>,
    pub gap_mask: Vec<bool>,
    pub t: f64,
}

impl SimplexState {
    /// Checks that non-gap rows lie on the simplex within `tol` and gap rows
    /// are uniform.
    pub fn new(family_id: impl Into<String>, sites: Array2<f64>, gap_mask: Vec<bool>, t: f64, tol: f64) -> Result<Self> {
        let sites = sites.as_standard_layout().into_owned();
        if sites.nrows() != gap_mask.len() || sites.ncols() < 2 {
            return domain("state rows and gap mask disagree, or fewer than two letters");
        }
        if !(0.0..=1.0).contains(&t) {
            return domain(format!("flow time {t} outside [0, 1]"));
        }
        let k = sites.ncols() as f64;
        for (l, row) in sites.rows().into_iter().enumerate() {
            if gap_mask[l] {
                if row.iter().any(|&v| v != 1.0 / k) {
                    return domain(format!("gap row {l} is not uniform"));
                }
            } else {
                let sum: f64 = row.sum();
                if row.iter().any(|&v| !(v >= 0.0)) || (sum - 1.0).abs() > tol {
                    return domain(format!("row {l} is not on the simplex"));
                }
            }
        }
        Ok(Self {
            family_id: family_id.into(),
            sites,
            gap_mask,
            t,
        })
    }

    pub fn len(&self) -> usize {
        self.sites.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.nrows() == 0
    }

    pub fn k(&self) -> usize {
        self.sites.ncols()
    }

    pub fn site(&self, l: usize) -> &[f64] {
        self.sites.row(l).to_slice().expect("state rows are contiguous")
    }

    pub fn site_mut(&mut self, l: usize) -> &mut [f64] {
        self.sites.row_mut(l).into_slice().expect("state rows are contiguous")
    }

    pub fn row(&self, l: usize) -> ArrayView1<'_, f64> {
        self.sites.row(l)
    }

    /// Indices of the non-gap sites.
    pub fn valid_sites(&self) -> Vec<usize> {
        (0..self.len()).filter(|&l| !self.gap_mask[l]).collect()
    }

    pub fn n_valid(&self) -> usize {
        self.gap_mask.iter().filter(|g| !**g).count()
    }
}

/// Integrator settings.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowConfig {
    pub t_max: f64,
    pub n_steps: usize,
    pub z_clamp: f64,
    pub simplex_tolerance: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            t_max: 6.0,
            n_steps: 100,
            z_clamp: 1e-6,
            simplex_tolerance: 1e-9,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return domain(format!("t_max must be positive, got {}", self.t_max));
        }
        if self.n_steps == 0 {
            return domain("n_steps must be at least 1");
        }
        if !(self.z_clamp > 0.0 && self.z_clamp < 0.5) {
            return domain(format!("z_clamp must lie in (0, 0.5), got {}", self.z_clamp));
        }
        if !(self.simplex_tolerance > 0.0) {
            return domain("simplex tolerance must be positive");
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.n_steps as f64
    }

    /// Index of the grid step at time `t`: `floor(t / dt)`, with a small
    /// allowance so that e.g. `0.3 * 100` lands on 30.
    pub fn step_index(&self, t: f64) -> usize {
        ((t * self.n_steps as f64 + 1e-9).floor() as usize).min(self.n_steps)
    }
}

/// Time-zero state: each column is a gap with probability `m_l`; gap rows are
/// uniform, the rest are drawn from `Dir(α_l)`.
pub fn init_state(prior: &FamilyPrior, stream: &mut RandomStream) -> Result<SimplexState> {
    let gap_mask: Vec<bool> = prior.gap_rates.iter().map(|&m| stream.bernoulli(m)).collect();
    init_state_with_mask(prior, gap_mask, stream)
}

/// Time-zero state for a given gap mask.
pub fn init_state_with_mask(prior: &FamilyPrior, gap_mask: Vec<bool>, stream: &mut RandomStream) -> Result<SimplexState> {
    let (len, k) = (prior.len(), prior.k());
    if gap_mask.len() != len {
        return domain("gap mask length does not match the prior");
    }
    let mut sites = Array2::from_elem((len, k), 1.0 / k as f64);
    for l in 0..len {
        if !gap_mask[l] {
            let row = sites.row_mut(l).into_slice().expect("fresh array rows are contiguous");
            sample_dirichlet_into(prior.site(l), row, stream)?;
        }
    }
    Ok(SimplexState {
        family_id: prior.family_id.clone(),
        sites,
        gap_mask,
        t: 0.0,
    })
}

/// Argmax letter of every non-gap site, ties to the lowest index.
pub fn decode(state: &SimplexState) -> String {
    decode_codes(state).into_iter().map(letter).collect()
}

/// Residue codes of [`decode`].
pub fn decode_codes(state: &SimplexState) -> Vec<u8> {
    (0..state.len())
        .filter(|&l| !state.gap_mask[l])
        .map(|l| argmax(state.site(l)) as u8)
        .collect()
}

/// Argmax codes of every column, with [`GAP`] on gap rows.
pub fn decode_aligned(state: &SimplexState) -> Vec<u8> {
    (0..state.len())
        .map(|l| if state.gap_mask[l] { GAP } else { argmax(state.site(l)) as u8 })
        .collect()
}

pub(crate) fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}
