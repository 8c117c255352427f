use std::fmt::Write as _;

use ndarray::{Array2, ArrayView1};

use crate::error::{domain, Error, Result};
use crate::specfun::{SIMPLEX_NEG_TOL, SIMPLEX_SUM_TOL};

/// Row-sum tolerance accepted when reading posterior files.
pub const FILE_ROW_SUM_TOL: f64 = 1e-6;

/// Per-site root residue distributions for one family.
#[derive(Clone, Debug, PartialEq)]
pub struct RootPosterior {
    pub family_id: String,
    pub probs: Array2<f64>,
}

impl RootPosterior {
    /// Validates every row to within the simplex tolerance and renormalizes.
    pub fn new(family_id: impl Into<String>, probs: Array2<f64>) -> Result<Self> {
        Self::with_tolerance(family_id.into(), probs, SIMPLEX_SUM_TOL)
    }

    fn with_tolerance(family_id: String, probs: Array2<f64>, tol: f64) -> Result<Self> {
        let mut probs = probs.as_standard_layout().into_owned();
        if probs.nrows() == 0 || probs.ncols() < 2 {
            return domain("posterior needs at least one site and two letters");
        }
        for (l, mut row) in probs.rows_mut().into_iter().enumerate() {
            let sum: f64 = row.iter().map(|v| v.max(0.0)).sum();
            if row.iter().any(|v| !v.is_finite() || *v < -SIMPLEX_NEG_TOL) || (sum - 1.0).abs() > tol {
                return domain(format!("posterior row {} of {family_id} is not a distribution", l + 1));
            }
            row.mapv_inplace(|v| v.max(0.0) / sum);
        }
        Ok(Self { family_id, probs })
    }

    pub fn len(&self) -> usize {
        self.probs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.nrows() == 0
    }

    pub fn k(&self) -> usize {
        self.probs.ncols()
    }

    pub fn site(&self, l: usize) -> ArrayView1<'_, f64> {
        self.probs.row(l)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\t{}\t{}\n", self.family_id, self.len(), self.k());
        for row in self.probs.rows() {
            push_row(&mut out, row.iter().copied());
        }
        out
    }

    /// Reads the tab-separated layout; rows must sum to 1 within 1e-6.
    pub fn from_text(text: &str) -> Result<Self> {
        let (id, matrix) = read_table(text, 0)?;
        Self::with_tolerance(id, matrix.0, FILE_ROW_SUM_TOL)
    }
}

/// Per-site Dirichlet concentrations and per-column missing rates.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyPrior {
    pub family_id: String,
    pub alpha: Array2<f64>,
    pub gap_rates: Vec<f64>,
}

impl FamilyPrior {
    pub fn new(family_id: impl Into<String>, alpha: Array2<f64>, gap_rates: Vec<f64>) -> Result<Self> {
        let family_id = family_id.into();
        let alpha = alpha.as_standard_layout().into_owned();
        if alpha.nrows() == 0 || alpha.ncols() < 2 {
            return domain("prior needs at least one site and two letters");
        }
        if gap_rates.len() != alpha.nrows() {
            return domain(format!("{} gap rates for {} sites", gap_rates.len(), alpha.nrows()));
        }
        if alpha.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return domain(format!("prior of {family_id} has a non-positive concentration"));
        }
        if gap_rates.iter().any(|m| !(0.0..=1.0).contains(m)) {
            return domain(format!("prior of {family_id} has a gap rate outside [0, 1]"));
        }
        Ok(Self {
            family_id,
            alpha,
            gap_rates,
        })
    }

    /// The all-ones prior with no gaps.
    pub fn uniform(family_id: impl Into<String>, len: usize, k: usize) -> Self {
        Self {
            family_id: family_id.into(),
            alpha: Array2::ones((len, k)),
            gap_rates: vec![0.0; len],
        }
    }

    /// Same gap rates, every concentration replaced by 1.
    pub fn to_uniform(&self) -> Self {
        Self {
            family_id: self.family_id.clone(),
            alpha: Array2::ones(self.alpha.raw_dim()),
            gap_rates: self.gap_rates.clone(),
        }
    }

    pub fn with_gap_rates(mut self, gap_rates: Vec<f64>) -> Result<Self> {
        self.gap_rates = gap_rates;
        Self::new(self.family_id, self.alpha, self.gap_rates)
    }

    pub fn len(&self) -> usize {
        self.alpha.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.nrows() == 0
    }

    pub fn k(&self) -> usize {
        self.alpha.ncols()
    }

    pub fn site(&self, l: usize) -> &[f64] {
        self.alpha.row(l).to_slice().expect("prior rows are contiguous")
    }

    /// Normalized prior mean of site `l`.
    pub fn mean(&self, l: usize) -> Vec<f64> {
        let a = self.site(l);
        let total: f64 = a.iter().sum();
        a.iter().map(|v| v / total).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\t{}\t{}\n", self.family_id, self.len(), self.k());
        for (row, m) in self.alpha.rows().into_iter().zip(&self.gap_rates) {
            push_row(&mut out, row.iter().copied().chain(std::iter::once(*m)));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (id, (alpha, gaps)) = read_table(text, 1)?;
        Self::new(id, alpha, gaps)
    }
}

fn push_row(out: &mut String, values: impl Iterator<Item = f64>) {
    for (i, v) in values.enumerate() {
        if i > 0 {
            out.push('\t');
        }
        let _ = write!(out, "{v}");
    }
    out.push('\n');
}

/// Parse `family_id L K` then `L` rows of `K + extra` numbers. Lines starting
/// with `#` are skipped.
fn read_table(text: &str, extra: usize) -> Result<(String, (Array2<f64>, Vec<f64>))> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("missing table header".into()))?;
    let fields: Vec<&str> = header.split('\t').collect();
    if fields.len() != 3 {
        return Err(Error::Parse(format!("bad table header {header:?}")));
    }
    let parse_usize = |s: &str| s.trim().parse::<usize>().map_err(|e| Error::Parse(format!("bad size {s:?}: {e}")));
    let (len, k) = (parse_usize(fields[1])?, parse_usize(fields[2])?);
    let mut matrix = Array2::zeros((len, k));
    let mut tail = Vec::with_capacity(len);
    for l in 0..len {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("table has fewer than {len} rows")))?;
        let values: Vec<f64> = line
            .split('\t')
            .map(|v| v.trim().parse::<f64>().map_err(|e| Error::Parse(format!("row {}: {e}", l + 1))))
            .collect::<Result<_>>()?;
        if values.len() != k + extra {
            return Err(Error::Parse(format!("row {} has {} fields, expected {}", l + 1, values.len(), k + extra)));
        }
        for (dst, v) in matrix.row_mut(l).iter_mut().zip(&values) {
            *dst = *v;
        }
        if extra == 1 {
            tail.push(values[k]);
        }
    }
    if lines.next().is_some() {
        return Err(Error::Parse(format!("table has more than {len} rows")));
    }
    Ok((fields[0].to_string(), (matrix, tail)))
}

/// `α = ε + λ p_root` per site. Gap rates start at zero; attach estimates with
/// [`FamilyPrior::with_gap_rates`].
pub fn posterior_to_prior(posterior: &RootPosterior, lambda: f64, epsilon: f64) -> Result<FamilyPrior> {
    if !(lambda.is_finite() && lambda > 0.0 && epsilon.is_finite() && epsilon > 0.0) {
        return domain(format!("need λ > 0 and ε > 0, got λ={lambda}, ε={epsilon}"));
    }
    let alpha = posterior.probs.mapv(|p| epsilon + lambda * p);
    Ok(FamilyPrior {
        family_id: posterior.family_id.clone(),
        alpha,
        gap_rates: vec![0.0; posterior.len()],
    })
}

/// `(1 - ρ) α + ρ (‖α‖₁ / K) 1` per site.
pub fn mix_with_uniform(prior: &FamilyPrior, rho: f64) -> Result<FamilyPrior> {
    if !(0.0..=1.0).contains(&rho) {
        return domain(format!("mixing weight {rho} outside [0, 1]"));
    }
    let k = prior.k() as f64;
    let mut alpha = prior.alpha.clone();
    for mut row in alpha.rows_mut() {
        let level = row.sum() / k;
        row.mapv_inplace(|a| (1.0 - rho) * a + rho * level);
    }
    Ok(FamilyPrior {
        family_id: prior.family_id.clone(),
        alpha,
        gap_rates: prior.gap_rates.clone(),
    })
}
