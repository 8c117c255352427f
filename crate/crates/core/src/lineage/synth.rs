use ndarray::Array2;

use super::alphabet::{GAP, MAX_K};
use super::family::AlignedFamily;
use super::prior::RootPosterior;
use crate::error::{domain, Result};
use crate::specfun::{categorical_unchecked, sample_dirichlet_into, RandomStream};

/// How peaked the per-site root distributions are.
///
/// A conserved site draws `q ~ Dir(κ_c m)` with `m = w e_c + (1 - w)/K` around
/// a random consensus letter `c`; a variable site draws `q ~ Dir(κ_v / K · 1)`.
/// An infinite concentration uses the mean itself.
#[derive(Clone, Debug, PartialEq)]
pub struct ConservationProfile {
    pub conserved_fraction: f64,
    pub conserved_concentration: f64,
    pub variable_concentration: f64,
    pub consensus_weight: f64,
}

impl Default for ConservationProfile {
    fn default() -> Self {
        Self {
            conserved_fraction: 0.5,
            conserved_concentration: 50.0,
            variable_concentration: 2.0,
            consensus_weight: 0.9,
        }
    }
}

/// Missing-data pattern of generated rows.
///
/// With probability `terminal_rate` a row gets a leading run of gaps of
/// uniform width in `1..=terminal_width`, and independently a trailing one.
/// Every other cell is a gap with probability `interior_rate`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GapProfile {
    pub terminal_width: usize,
    pub terminal_rate: f64,
    pub interior_rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub len: usize,
    pub k: usize,
    pub depth: usize,
    pub conservation: ConservationProfile,
    /// Probability that a residue is replaced by a uniformly random letter.
    pub mutation_rate: f64,
    pub gaps: GapProfile,
    /// Fixed consensus letters; drawn at random when absent.
    pub consensus: Option<Vec<u8>>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            len: 60,
            k: MAX_K,
            depth: 500,
            conservation: ConservationProfile::default(),
            mutation_rate: 0.0,
            gaps: GapProfile::default(),
            consensus: None,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        let c = &self.conservation;
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if self.len == 0 || !(2..=MAX_K).contains(&self.k) || self.depth < 2 {
            return domain(format!(
                "synthetic family needs L >= 1, 2 <= K <= {MAX_K}, depth >= 2 (got L={}, K={}, depth={})",
                self.len, self.k, self.depth
            ));
        }
        if !unit(c.conserved_fraction) || !unit(c.consensus_weight) || !unit(self.mutation_rate) {
            return domain("fractions and rates must lie in [0, 1]");
        }
        if !(c.conserved_concentration > 0.0 && c.variable_concentration > 0.0) {
            return domain("root concentrations must be positive");
        }
        let g = &self.gaps;
        if !unit(g.terminal_rate) || !unit(g.interior_rate) || (g.terminal_rate > 0.0 && g.terminal_width == 0) {
            return domain("invalid gap profile");
        }
        if let Some(cons) = &self.consensus {
            if cons.len() != self.len || cons.iter().any(|&c| c as usize >= self.k) {
                return domain("consensus must have L letters inside the alphabet");
            }
        }
        Ok(())
    }
}

fn draw_site(mean: &[f64], concentration: f64, out: &mut [f64], stream: &mut RandomStream) -> Result<()> {
    if concentration.is_infinite() {
        out.copy_from_slice(mean);
        return Ok(());
    }
    let alpha: Vec<f64> = mean.iter().map(|m| concentration * m).collect();
    sample_dirichlet_into(&alpha, out, stream)
}

/// Generate a family and the exact per-site distributions its residues were
/// drawn from.
///
/// The returned posterior row at each site is `(1 - μ) q + μ / K`, the law of
/// a residue after mutation, so it equals the generating categorical exactly.
pub fn synth_family(family_id: &str, config: &SynthConfig, stream: &mut RandomStream) -> Result<(AlignedFamily, RootPosterior)> {
    config.validate()?;
    let (len, k) = (config.len, config.k);
    let cons = &config.conservation;

    let consensus: Vec<u8> = match &config.consensus {
        Some(c) => c.clone(),
        None => (0..len).map(|_| stream.index(k) as u8).collect(),
    };
    let n_conserved = (cons.conserved_fraction * len as f64).round() as usize;
    let mut order: Vec<usize> = (0..len).collect();
    stream.shuffle(&mut order);
    let mut conserved = vec![false; len];
    for &l in &order[..n_conserved] {
        conserved[l] = true;
    }

    let uniform = vec![1.0 / k as f64; k];
    let mu = config.mutation_rate;
    let mut probs = Array2::zeros((len, k));
    let mut q = vec![0.0; k];
    for l in 0..len {
        if conserved[l] {
            let w = cons.consensus_weight;
            let mut mean = vec![(1.0 - w) / k as f64; k];
            mean[consensus[l] as usize] += w;
            draw_site(&mean, cons.conserved_concentration, &mut q, stream)?;
        } else {
            draw_site(&uniform, cons.variable_concentration, &mut q, stream)?;
        }
        for (dst, &p) in probs.row_mut(l).iter_mut().zip(&q) {
            *dst = (1.0 - mu) * p + mu / k as f64;
        }
    }
    let posterior = RootPosterior::new(family_id, probs)?;

    let mut rows = Vec::with_capacity(config.depth);
    let gaps = &config.gaps;
    for _ in 0..config.depth {
        let mut row: Vec<u8> = (0..len)
            .map(|l| {
                let site = posterior.site(l);
                let site = site.as_slice().expect("posterior rows are contiguous");
                categorical_unchecked(site, 1.0, stream) as u8
            })
            .collect();
        if gaps.terminal_rate > 0.0 {
            if stream.bernoulli(gaps.terminal_rate) {
                let w = (1 + stream.index(gaps.terminal_width)).min(len);
                row[..w].fill(GAP);
            }
            if stream.bernoulli(gaps.terminal_rate) {
                let w = (1 + stream.index(gaps.terminal_width)).min(len);
                row[len - w..].fill(GAP);
            }
        }
        if gaps.interior_rate > 0.0 {
            for cell in row.iter_mut() {
                if stream.bernoulli(gaps.interior_rate) {
                    *cell = GAP;
                }
            }
        }
        rows.push(row);
    }
    let headers = (0..config.depth).map(|i| format!("{family_id}_{i}")).collect();
    let family = AlignedFamily::new(family_id, k, headers, rows)?;
    Ok((family, posterior))
}

/// Identifier of the `i`-th battery family.
pub fn battery_family_id(i: usize) -> String {
    format!("fam{i:02}")
}

/// The standard test battery: `n` families of the given shape, each drawn
/// from its own substream of `root`.
pub fn synth_battery(n: usize, config: &SynthConfig, root: &RandomStream) -> Result<Vec<(AlignedFamily, RootPosterior)>> {
    (0..n)
        .map(|i| synth_family(&battery_family_id(i), config, &mut root.derive("synth", i as u64)))
        .collect()
}

/// Shape used by the standard battery: 8 families of 60 columns over 20
/// letters, 500 rows, half the sites conserved, ragged ends and rare interior
/// gaps.
pub fn battery_config() -> SynthConfig {
    SynthConfig {
        mutation_rate: 0.0,
        gaps: GapProfile {
            terminal_width: 4,
            terminal_rate: 0.25,
            interior_rate: 0.01,
        },
        ..SynthConfig::default()
    }
}
