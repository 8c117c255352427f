//! Run configuration: a TOML file with sections, overridden by flags.
//!
//! Precedence is flags > file > built-in defaults. Unknown keys anywhere are
//! rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub paths: PathsConfig,
    pub synth: SynthSection,
    pub clean: CleanSection,
    pub prior: PriorSection,
    pub train: TrainSection,
    pub flow: FlowSection,
    pub reroute: RerouteSection,
    pub sampler: SamplerSection,
    pub eval: EvalSection,
    pub oracle: OracleSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            paths: PathsConfig::default(),
            synth: SynthSection::default(),
            clean: CleanSection::default(),
            prior: PriorSection::default(),
            train: TrainSection::default(),
            flow: FlowSection::default(),
            reroute: RerouteSection::default(),
            sampler: SamplerSection::default(),
            eval: EvalSection::default(),
            oracle: OracleSection::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    /// Aligned family FASTA files and root posterior tables.
    pub data_dir: PathBuf,
    pub prior_dir: PathBuf,
    pub checkpoint: PathBuf,
    pub output_dir: PathBuf,
}

impl Default for PathsConfig {
    fn default() -> Self {
        Self {
            data_dir: "data".into(),
            prior_dir: "priors".into(),
            checkpoint: "model.json".into(),
            output_dir: "out".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub n_families: usize,
    pub len: usize,
    pub k: usize,
    pub depth: usize,
    pub conserved_fraction: f64,
    pub conserved_concentration: f64,
    pub variable_concentration: f64,
    pub consensus_weight: f64,
    pub mutation_rate: f64,
    pub terminal_gap_width: usize,
    pub terminal_gap_rate: f64,
    pub interior_gap_rate: f64,
    pub holdout_fraction: f64,
}

impl Default for SynthSection {
    fn default() -> Self {
        let b = dirflow::lineage::battery_config();
        Self {
            n_families: 8,
            len: b.len,
            k: b.k,
            depth: b.depth,
            conserved_fraction: b.conservation.conserved_fraction,
            conserved_concentration: b.conservation.conserved_concentration,
            variable_concentration: b.conservation.variable_concentration,
            consensus_weight: b.conservation.consensus_weight,
            mutation_rate: b.mutation_rate,
            terminal_gap_width: b.gaps.terminal_width,
            terminal_gap_rate: b.gaps.terminal_rate,
            interior_gap_rate: b.gaps.interior_rate,
            holdout_fraction: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CleanSection {
    pub min_len: usize,
    pub max_len: usize,
    pub depth_cap: usize,
    pub col_missing_max: f64,
    pub min_depth: usize,
}

impl Default for CleanSection {
    fn default() -> Self {
        let f = dirflow::lineage::CleanFilters::default();
        Self {
            min_len: f.min_len,
            max_len: f.max_len,
            depth_cap: f.depth_cap,
            col_missing_max: f.col_missing_max,
            min_depth: f.min_depth,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorSection {
    pub lambda: f64,
    pub epsilon: f64,
    /// Upper end of the per-family uniform mixing weight; 0 disables mixing.
    pub rho_max: f64,
    pub pssm_pseudocount: f64,
}

impl Default for PriorSection {
    fn default() -> Self {
        Self {
            lambda: 10.0,
            epsilon: 1e-3,
            rho_max: 0.0,
            pssm_pseudocount: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub steps: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub log_every: usize,
    pub radius: usize,
    pub hidden: Vec<usize>,
    /// Continue from the checkpoint instead of a fresh initialization.
    pub resume: bool,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = dirflow::denoiser::TrainConfig::default();
        let s = dirflow::denoiser::NetworkShape::default();
        Self {
            steps: t.steps,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            log_every: t.log_every,
            radius: s.radius,
            hidden: s.hidden,
            resume: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowSection {
    pub t_max: f64,
    pub n_steps: usize,
    pub t_int: f64,
    /// Replace every family prior by the all-ones Dirichlet (training and
    /// sampling alike).
    pub uniform_prior: bool,
}

impl Default for FlowSection {
    fn default() -> Self {
        Self {
            t_max: 6.0,
            n_steps: 100,
            t_int: 0.5,
            uniform_prior: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RerouteSection {
    pub enabled: bool,
    pub rounds: usize,
    pub betas: Vec<f64>,
    pub population: usize,
    /// `systematic` or `multinomial`.
    pub scheme: String,
    pub mu: f64,
    pub gamma: f64,
    pub rho: f64,
    pub tau_tok: f64,
    pub delta: f64,
    pub p_mask: f64,
    pub n_masks: usize,
}

impl Default for RerouteSection {
    fn default() -> Self {
        let r = dirflow::reroute::RerouteConfig::default();
        let m = dirflow::reroute::MutationConfig::default();
        Self {
            enabled: true,
            rounds: r.rounds,
            betas: r.betas,
            population: r.population,
            scheme: r.scheme.to_string(),
            mu: m.mu,
            gamma: m.gamma,
            rho: m.rho,
            tau_tok: m.tau_tok,
            delta: 0.1,
            p_mask: 0.15,
            n_masks: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerSection {
    pub tau: f64,
    pub family_cap: usize,
    pub n_sequences: usize,
    /// `model` (the trained checkpoint) or `oracle` (exact posteriors).
    pub denoiser: String,
}

impl Default for SamplerSection {
    fn default() -> Self {
        Self {
            tau: 0.5,
            family_cap: 128,
            n_sequences: 512,
            denoiser: "model".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub min_coverage: f64,
    pub cluster_identity: f64,
    pub n_bins: usize,
    /// `self-score` keeps samples whose intended-family score reaches the hit
    /// threshold; `all` keeps everything.
    pub filter: String,
    /// Fixed hit threshold; calibrated on held-out rows when absent.
    pub hit_threshold: Option<f64>,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            min_coverage: 0.8,
            cluster_identity: 0.8,
            n_bins: 3,
            filter: "self-score".into(),
            hit_threshold: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub grid: Vec<f64>,
    pub n_mc: usize,
}

impl Default for OracleSection {
    fn default() -> Self {
        let mut grid = vec![0.05, 0.1, 0.15, 0.2];
        grid.extend((3..=10).map(|i| i as f64 / 10.0));
        Self { grid, n_mc: 20_000 }
    }
}

/// Recursively overlay `top` onto `base`.
fn merge(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Parse the value of `--override key=value` as TOML, falling back to a bare
/// string.
fn parse_override(pair: &str) -> Result<(Vec<String>, toml::Value), CliError> {
    let (key, raw) = pair
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override {pair:?} is not key=value")))?;
    let path: Vec<String> = key.trim().split('.').map(str::to_string).collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("bad override key {key:?}")));
    }
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("just inserted"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    Ok((path, value))
}

fn set_path(table: &mut toml::Table, path: &[String], value: toml::Value) -> Result<(), CliError> {
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut cur = table;
    for p in parents {
        let entry = cur.entry(p.clone()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override path crosses non-table key {p:?}")))?;
    }
    cur.insert(last.clone(), value);
    Ok(())
}

impl RunConfig {
    /// Defaults, then the file, then `--override` pairs, then `--seed`.
    pub fn load(file: Option<&Path>, overrides: &[String], seed: Option<u64>) -> Result<Self, CliError> {
        let mut table = toml::Table::try_from(RunConfig::default()).expect("defaults serialize");
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
            let file_table: toml::Table = text
                .parse()
                .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))?;
            merge(&mut table, file_table);
        }
        for pair in overrides {
            let (path, value) = parse_override(pair)?;
            set_path(&mut table, &path, value)?;
        }
        if let Some(seed) = seed {
            let seed = i64::try_from(seed).map_err(|_| CliError::Config("seed must fit in 63 bits".into()))?;
            table.insert("seed".into(), toml::Value::Integer(seed));
        }
        let config: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if self.synth.depth < 2 {
            return bad("synth.depth must be at least 2 so a held-out split exists");
        }
        if self.synth.n_families == 0 {
            return bad("synth.n_families must be positive");
        }
        if !(self.synth.holdout_fraction > 0.0 && self.synth.holdout_fraction < 1.0) {
            return bad("synth.holdout_fraction must lie in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.prior.rho_max) {
            return bad("prior.rho_max must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.flow.t_int) {
            return bad("flow.t_int must lie in [0, 1]");
        }
        if self.reroute.betas.len() != self.reroute.rounds {
            return bad("reroute.betas needs one entry per round");
        }
        if self.reroute.scheme.parse::<dirflow::reroute::Resampling>().is_err() {
            return bad("reroute.scheme must be systematic or multinomial");
        }
        if !matches!(self.sampler.denoiser.as_str(), "model" | "oracle") {
            return bad("sampler.denoiser must be model or oracle");
        }
        if !matches!(self.eval.filter.as_str(), "all" | "self-score") {
            return bad("eval.filter must be all or self-score");
        }
        if self.eval.n_bins == 0 || self.sampler.n_sequences == 0 || self.oracle.n_mc < 2 {
            return bad("eval.n_bins and sampler.n_sequences must be positive, oracle.n_mc at least 2");
        }
        if self.oracle.grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return bad("oracle.grid times must lie in [0, 1]");
        }
        Ok(())
    }

    /// Canonical TOML text of the whole configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
