//! The pipeline stages.
//!
//! Layout under the configured directories:
//!
//! - `data_dir/{family}.fasta`, `data_dir/{family}.posterior.tsv`
//! - `prior_dir/{family}.prior.tsv`
//! - the checkpoint path (JSON after one `#` line)
//! - `output_dir/`: `loss_trace.tsv`, `samples.fasta`, `trajectories.tsv`,
//!   `reroute_trace.tsv`, `records.tsv`, `summary.txt`,
//!   `reference_records.tsv`, `reference_summary.txt`, `oracle_curves.tsv`,
//!   `oracle_summary.txt`, `manifest.json`
//!
//! Random substreams come from `RandomStream::new(seed, 0)` through `derive`
//! with a stage label (`make-synth`, `clean:{id}`, `split:{id}`,
//! `build-prior:{id}`, `train`, `train-init`, `sample`, `eval-reference:{id}`,
//! `oracle-study`). Sequence `i` of the sample stage uses
//! `derive("sample", i)` and nothing else, so it can be regenerated alone.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use dirflow::denoiser::{
    loss_trace_to_text, train, BayesOracle, Denoiser, NetworkShape, OracleBattery, TrainConfig, TrainableDenoiser,
    HARD_REGIME_T,
};
use dirflow::evalsuite::{
    aligned_fitness, calibrate_hit_threshold, evaluate, EvalConfig, GeneratedSample, MetricsReport,
};
use dirflow::flow::{decode_aligned, init_state, init_state_with_mask, integrate_traced, FlowConfig, StepRecord};
use dirflow::lineage::{
    build_pssm, clean_family, estimate_gap_rates, mix_with_uniform, parse_aligned_fasta_k, posterior_to_prior, render,
    split_family, synth_battery, AlignedFamily, CleanFilters, CleanOutcome, ConservationProfile, FamilyEntry,
    FamilyPrior, FamilyRegistry, FamilySampler, GapProfile, RootPosterior, SynthConfig,
};
use dirflow::reroute::{reroute, MutationConfig, ParticlePopulation, PssmHybridScorer, RerouteConfig, RoundRecord};
use dirflow::specfun::RandomStream;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::{read_text, strip_header, StageWriter};

pub const SAMPLES_FILE: &str = "samples.fasta";
pub const RECORDS_FILE: &str = "records.tsv";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const REFERENCE_RECORDS_FILE: &str = "reference_records.tsv";
pub const REFERENCE_SUMMARY_FILE: &str = "reference_summary.txt";
pub const LOSS_TRACE_FILE: &str = "loss_trace.tsv";
pub const TRAJECTORY_FILE: &str = "trajectories.tsv";
pub const REROUTE_TRACE_FILE: &str = "reroute_trace.tsv";
pub const ORACLE_CURVES_FILE: &str = "oracle_curves.tsv";
pub const ORACLE_SUMMARY_FILE: &str = "oracle_summary.txt";

const CAP_NOTE: &str =
    "family cap: the highest-weight families up to sampler.family_cap are kept and their weights renormalized";

fn root_stream(config: &RunConfig) -> RandomStream {
    RandomStream::new(config.seed, 0)
}

fn family_path(config: &RunConfig, id: &str) -> PathBuf {
    config.paths.data_dir.join(format!("{id}.fasta"))
}

fn posterior_path(config: &RunConfig, id: &str) -> PathBuf {
    config.paths.data_dir.join(format!("{id}.posterior.tsv"))
}

fn prior_path(config: &RunConfig, id: &str) -> PathBuf {
    config.paths.prior_dir.join(format!("{id}.prior.tsv"))
}

fn out_path(config: &RunConfig, name: &str) -> PathBuf {
    config.paths.output_dir.join(name)
}

fn require_file(path: &Path, what: &str) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Io(format!("{what} {} does not exist", path.display())))
    }
}

fn synth_config(config: &RunConfig) -> SynthConfig {
    let s = &config.synth;
    SynthConfig {
        len: s.len,
        k: s.k,
        depth: s.depth,
        conservation: ConservationProfile {
            conserved_fraction: s.conserved_fraction,
            conserved_concentration: s.conserved_concentration,
            variable_concentration: s.variable_concentration,
            consensus_weight: s.consensus_weight,
        },
        mutation_rate: s.mutation_rate,
        gaps: GapProfile {
            terminal_width: s.terminal_gap_width,
            terminal_rate: s.terminal_gap_rate,
            interior_rate: s.interior_gap_rate,
        },
        consensus: None,
    }
}

fn flow_config(config: &RunConfig) -> FlowConfig {
    FlowConfig {
        t_max: config.flow.t_max,
        n_steps: config.flow.n_steps,
        ..FlowConfig::default()
    }
}

fn mutation_config(config: &RunConfig) -> MutationConfig {
    let r = &config.reroute;
    MutationConfig {
        mu: r.mu,
        gamma: r.gamma,
        rho: r.rho,
        tau_tok: r.tau_tok,
    }
}

fn reroute_config(config: &RunConfig) -> CliResult<RerouteConfig> {
    let r = &config.reroute;
    Ok(RerouteConfig {
        rounds: r.rounds,
        betas: r.betas.clone(),
        t_int: config.flow.t_int,
        population: r.population,
        scheme: r.scheme.parse().map_err(|_| CliError::Config(format!("unknown scheme {}", r.scheme)))?,
    })
}

/// Family ids present in `data_dir`, sorted.
pub fn family_ids(config: &RunConfig) -> CliResult<Vec<String>> {
    let dir = &config.paths.data_dir;
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::Io(format!("cannot list {}: {e}", dir.display())))?;
    let mut ids = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| CliError::Io(e.to_string()))?;
        let name = entry.file_name().to_string_lossy().to_string();
        if let Some(id) = name.strip_suffix(".fasta") {
            ids.push(id.to_string());
        }
    }
    ids.sort();
    if ids.is_empty() {
        return Err(CliError::Io(format!("no family files in {}", dir.display())));
    }
    Ok(ids)
}

fn load_family(config: &RunConfig, id: &str) -> CliResult<AlignedFamily> {
    let text = read_text(&family_path(config, id))?;
    Ok(parse_aligned_fasta_k(text.as_bytes(), id, config.synth.k)?)
}

fn load_posterior(config: &RunConfig, id: &str) -> CliResult<RootPosterior> {
    let post = RootPosterior::from_text(&read_text(&posterior_path(config, id))?)?;
    if post.family_id != id {
        return Err(CliError::Io(format!("posterior file for {id} names family {}", post.family_id)));
    }
    Ok(post)
}

fn load_prior(config: &RunConfig, id: &str) -> CliResult<FamilyPrior> {
    let prior = FamilyPrior::from_text(&read_text(&prior_path(config, id))?)?;
    if prior.family_id != id {
        return Err(CliError::Io(format!("prior file for {id} names family {}", prior.family_id)));
    }
    Ok(if config.flow.uniform_prior { prior.to_uniform() } else { prior })
}

/// Families, priors (uniform when configured) and PSSMs.
pub fn load_registry(config: &RunConfig) -> CliResult<FamilyRegistry> {
    let mut entries = Vec::new();
    for id in family_ids(config)? {
        let family = load_family(config, &id)?;
        let prior = load_prior(config, &id)?;
        let pssm = build_pssm(&family, config.prior.pssm_pseudocount)?;
        entries.push(FamilyEntry { family, prior, pssm });
    }
    Ok(FamilyRegistry::new(entries, config.sampler.tau)?)
}

/// Synthesize, clean and split families; write FASTA and posterior files.
pub fn cmd_make_synth(config: &RunConfig) -> CliResult<()> {
    let start = Instant::now();
    if config.synth.depth < 2 {
        return Err(CliError::Config("synth.depth must be at least 2 so a held-out split exists".into()));
    }
    let root = root_stream(config);
    let battery = synth_battery(config.synth.n_families, &synth_config(config), &root.derive("make-synth", 0))?;
    let c = &config.clean;
    let filters = CleanFilters {
        min_len: c.min_len,
        max_len: c.max_len,
        depth_cap: c.depth_cap,
        col_missing_max: c.col_missing_max,
        min_depth: c.min_depth,
    };
    let mut writer = StageWriter::new("make-synth", config);
    let mut notes = Vec::new();
    for (fam, post) in battery {
        let id = fam.family_id.clone();
        let cleaned = match clean_family(&fam, &filters, &mut root.derive(&format!("clean:{id}"), 0)) {
            CleanOutcome::Kept(f) => f,
            CleanOutcome::Rejected(why) => {
                eprintln!("family {id} rejected by cleaning: {why:?}");
                notes.push(format!("family {id} rejected by cleaning: {why:?}"));
                continue;
            }
        };
        if cleaned.len != post.len() {
            return Err(CliError::Config(format!(
                "cleaning dropped columns of synthetic family {id}; relax clean.col_missing_max"
            )));
        }
        let split = split_family(&cleaned, config.synth.holdout_fraction, &mut root.derive(&format!("split:{id}"), 0))?;
        writer.write(&family_path(config, &id), &split.to_fasta())?;
        writer.write(&posterior_path(config, &id), &post.to_text())?;
    }
    if writer.record.outputs.is_empty() {
        return Err(CliError::Config("every synthetic family was rejected by cleaning".into()));
    }
    writer.finish(start.elapsed().as_secs_f64(), &notes)?;
    Ok(())
}

/// Map root posteriors to Dirichlet priors and attach gap rates.
pub fn cmd_build_prior(config: &RunConfig) -> CliResult<()> {
    let start = Instant::now();
    let ids = family_ids(config)?;
    let missing: Vec<&str> = ids
        .iter()
        .filter(|id| !posterior_path(config, id).is_file())
        .map(|s| s.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(CliError::Io(format!("missing root posteriors for: {}", missing.join(", "))));
    }
    let root = root_stream(config);
    let p = &config.prior;
    let mut writer = StageWriter::new("build-prior", config);
    for id in &ids {
        let family = load_family(config, id)?;
        let post = load_posterior(config, id)?;
        if post.len() != family.len || post.k() != family.k {
            return Err(CliError::Config(format!("posterior for {id} does not match its alignment shape")));
        }
        let mut prior = posterior_to_prior(&post, p.lambda, p.epsilon)?;
        if p.rho_max > 0.0 {
            let rho = p.rho_max * root.derive(&format!("build-prior:{id}"), 0).uniform();
            prior = mix_with_uniform(&prior, rho)?;
        }
        let prior = prior.with_gap_rates(estimate_gap_rates(&family)?)?;
        writer.write(&prior_path(config, id), &prior.to_text())?;
    }
    writer.finish(start.elapsed().as_secs_f64(), &[])?;
    Ok(())
}

fn network_shape(config: &RunConfig) -> NetworkShape {
    NetworkShape {
        k: config.synth.k,
        radius: config.train.radius,
        hidden: config.train.hidden.clone(),
    }
}

pub fn load_checkpoint(config: &RunConfig) -> CliResult<TrainableDenoiser> {
    let path = &config.paths.checkpoint;
    require_file(path, "checkpoint")?;
    let model = TrainableDenoiser::from_json(strip_header(&read_text(path)?))?;
    if model.shape.k != config.synth.k {
        return Err(CliError::Config(format!(
            "checkpoint alphabet size {} differs from synth.k {}",
            model.shape.k, config.synth.k
        )));
    }
    Ok(model)
}

/// Train the denoiser (or continue training it) and write the checkpoint and
/// loss trace. With `train.resume` the trace file is extended.
pub fn cmd_train(config: &RunConfig) -> CliResult<()> {
    let start = Instant::now();
    let registry = load_registry(config)?;
    let dataset: Vec<(AlignedFamily, FamilyPrior)> =
        registry.entries().map(|e| (e.family.clone(), e.prior.clone())).collect();
    let root = root_stream(config);
    let trace_path = out_path(config, LOSS_TRACE_FILE);
    let (mut model, mut previous_rows) = if config.train.resume {
        let model = load_checkpoint(config)?;
        if model.shape != network_shape(config) {
            return Err(CliError::Config("checkpoint architecture differs from the train section".into()));
        }
        let rows = match std::fs::read_to_string(&trace_path) {
            Ok(text) => strip_header(&text).lines().skip(1).map(|l| format!("{l}\n")).collect(),
            Err(_) => String::new(),
        };
        (model, rows)
    } else {
        (TrainableDenoiser::new(network_shape(config), &mut root.derive("train-init", 0))?, String::new())
    };
    let t = &config.train;
    let train_config = TrainConfig {
        learning_rate: t.learning_rate,
        batch_size: t.batch_size,
        steps: t.steps,
        t_max: config.flow.t_max,
        log_every: t.log_every,
    };
    let outcome = train(&dataset, &mut model, &train_config, &root.derive("train", 0))?;
    let text = loss_trace_to_text(&outcome.trace);
    let (head, rows) = text.split_once('\n').expect("trace has a header line");
    previous_rows.push_str(rows);
    let mut writer = StageWriter::new("train", config);
    writer.write(&config.paths.checkpoint, &(model.to_json()? + "\n"))?;
    writer.write(&trace_path, &format!("{head}\n{previous_rows}"))?;
    let mut notes = vec![format!("hard-regime accuracy column uses t <= {HARD_REGIME_T}")];
    if outcome.skipped > 0 {
        notes.push(format!("{} training rows without residues were skipped", outcome.skipped));
    }
    writer.finish(start.elapsed().as_secs_f64(), &notes)?;
    Ok(())
}

/// One generated sequence and its diagnostics.
pub struct SampleOutput {
    pub index: usize,
    pub family_id: String,
    pub aligned: Vec<u8>,
    pub fitness: f64,
    pub trajectory: Vec<(char, StepRecord)>,
    pub reroute_trace: Vec<RoundRecord>,
}

fn build_denoiser(config: &RunConfig, registry: &FamilyRegistry) -> CliResult<Box<dyn Denoiser>> {
    match config.sampler.denoiser.as_str() {
        "model" => Ok(Box::new(load_checkpoint(config)?)),
        _ => {
            let mut oracle = BayesOracle::new(config.flow.t_max);
            for entry in registry.entries() {
                let id = &entry.family.family_id;
                oracle.insert(&entry.prior, &load_posterior(config, id)?)?;
            }
            Ok(Box::new(oracle))
        }
    }
}

const MASK_ATTEMPTS: usize = 1000;

/// Generate sequence `index` from its own substream.
pub fn sample_one(
    index: usize,
    config: &RunConfig,
    registry: &FamilyRegistry,
    sampler: &FamilySampler,
    denoiser: &dyn Denoiser,
) -> CliResult<SampleOutput> {
    let stream = root_stream(config).derive("sample", index as u64);
    let family_id = sampler.sample(&mut stream.derive("family", 0)).to_string();
    let entry = registry.get(&family_id).expect("sampler draws registry families");
    let prior = &entry.prior;
    let flow = flow_config(config);
    let t_int = config.flow.t_int;

    // One gap mask shared by every particle; redraw if nothing is left.
    let mut mask_stream = stream.derive("mask", 0);
    let mut first = init_state(prior, &mut mask_stream)?;
    let mut attempts = 1;
    while first.n_valid() == 0 {
        if attempts == MASK_ATTEMPTS {
            return Err(CliError::Numeric(format!("family {family_id}: every gap mask draw was empty")));
        }
        first = init_state(prior, &mut mask_stream)?;
        attempts += 1;
    }
    let mask = first.gap_mask;

    let population = if config.reroute.enabled { config.reroute.population } else { 1 };
    let mut trajectory = Vec::new();
    let mut particles = Vec::with_capacity(population);
    for m in 0..population {
        let mut s = init_state_with_mask(prior, mask.clone(), &mut stream.derive("particle", m as u64))?;
        let mut trace = Vec::new();
        integrate_traced(&mut s, denoiser, prior, 0.0, t_int, &flow, (m == 0).then_some(&mut trace))?;
        trajectory.extend(trace.into_iter().map(|r| ('A', r)));
        particles.push(s);
    }

    let (mut state, reroute_trace) = if config.reroute.enabled {
        let scorer = PssmHybridScorer {
            delta: config.reroute.delta,
            p_mask: config.reroute.p_mask,
            n_masks: config.reroute.n_masks,
            ..PssmHybridScorer::new(&entry.pssm)
        };
        let out = reroute(
            ParticlePopulation::new(particles)?,
            denoiser,
            &scorer,
            prior,
            &mutation_config(config),
            &reroute_config(config)?,
            config.flow.t_max,
            &stream.derive("reroute", 0),
        )?;
        (out.best, out.trace)
    } else {
        (particles.pop().expect("one particle"), Vec::new())
    };
    let mut trace = Vec::new();
    integrate_traced(&mut state, denoiser, prior, t_int, 1.0, &flow, Some(&mut trace))?;
    trajectory.extend(trace.into_iter().map(|r| ('C', r)));
    let aligned = decode_aligned(&state);
    Ok(SampleOutput {
        index,
        fitness: aligned_fitness(&aligned, &entry.pssm)?,
        family_id,
        aligned,
        trajectory,
        reroute_trace,
    })
}

/// FASTA header fields of a generated sequence, in order.
pub fn sample_header(out: &SampleOutput, config: &RunConfig) -> String {
    format!(
        ">s{:05} family={} seed={} reroute={} fitness={} aligned={}",
        out.index,
        out.family_id,
        config.seed,
        config.reroute.enabled,
        out.fitness,
        render(&out.aligned)
    )
}

/// Generate `sampler.n_sequences` sequences.
pub fn cmd_sample(config: &RunConfig) -> CliResult<()> {
    let start = Instant::now();
    let registry = load_registry(config)?;
    let sampler = FamilySampler::new(&registry, config.sampler.family_cap)?;
    let denoiser = build_denoiser(config, &registry)?;
    reroute_config(config)?.validate()?;
    let outputs: Vec<SampleOutput> = (0..config.sampler.n_sequences)
        .into_par_iter()
        .map(|i| sample_one(i, config, &registry, &sampler, denoiser.as_ref()))
        .collect::<CliResult<_>>()?;

    let mut fasta = String::new();
    let mut traj = String::from("index\tphase\tstep\tt\tmean_max_prob\tmean_entropy\n");
    let mut rr = String::from("index\tround\tmin_score\tmean_score\tmax_score\tess\n");
    for out in &outputs {
        let _ = writeln!(fasta, "{}", sample_header(out, config));
        let _ = writeln!(fasta, "{}", dirflow::lineage::ungapped(&out.aligned));
        for (phase, r) in &out.trajectory {
            let _ = writeln!(traj, "{}\t{phase}\t{}\t{}\t{}\t{}", out.index, r.step, r.t, r.mean_max_prob, r.mean_entropy);
        }
        for r in &out.reroute_trace {
            let _ = writeln!(rr, "{}\t{}\t{}\t{}\t{}\t{}", out.index, r.round, r.min, r.mean, r.max, r.ess);
        }
    }
    let mut writer = StageWriter::new("sample", config);
    writer.write(&out_path(config, SAMPLES_FILE), &fasta)?;
    writer.write(&out_path(config, TRAJECTORY_FILE), &traj)?;
    writer.write(&out_path(config, REROUTE_TRACE_FILE), &rr)?;
    let kept: Vec<String> = sampler.support().map(|(id, p)| format!("{id}:{p}")).collect();
    let notes = [CAP_NOTE.to_string(), format!("sampled families: {}", kept.join(" "))];
    writer.finish(start.elapsed().as_secs_f64(), &notes)?;
    Ok(())
}

/// Read generated samples back from the sample FASTA.
pub fn parse_samples(text: &str, k: usize) -> CliResult<Vec<GeneratedSample>> {
    let mut samples = Vec::new();
    for line in text.lines() {
        let Some(header) = line.strip_prefix('>') else {
            continue;
        };
        let fields: BTreeMap<&str, &str> = header.split(' ').filter_map(|f| f.split_once('=')).collect();
        let family = fields
            .get("family")
            .ok_or_else(|| CliError::Io(format!("sample header without family: {line}")))?;
        let aligned = fields
            .get("aligned")
            .ok_or_else(|| CliError::Io(format!("sample header without aligned row: {line}")))?;
        let codes = aligned.bytes().map(|b| dirflow::lineage::code_of(b, k)).collect();
        samples.push(GeneratedSample::from_aligned(codes, *family)?);
    }
    Ok(samples)
}

/// Held-out rows matched to the per-family counts of `samples`: each family's
/// test rows are shuffled and taken in order, cycling when a family has fewer
/// test rows than samples. Families without test rows contribute nothing.
pub fn matched_reference(
    samples: &[GeneratedSample],
    registry: &FamilyRegistry,
    root: &RandomStream,
) -> CliResult<Vec<GeneratedSample>> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for s in samples {
        *counts.entry(s.intended_family.as_str()).or_default() += 1;
    }
    let mut out = Vec::new();
    for (id, n) in counts {
        let entry = registry
            .get(id)
            .ok_or_else(|| CliError::Config(format!("sample names unknown family {id}")))?;
        let mut rows: Vec<&[u8]> = entry.family.test_rows().filter(|r| r.iter().any(|c| !dirflow::lineage::is_missing(*c))).collect();
        if rows.is_empty() {
            continue;
        }
        root.derive(&format!("eval-reference:{id}"), 0).shuffle(&mut rows);
        for i in 0..n {
            out.push(GeneratedSample::from_aligned(rows[i % rows.len()].to_vec(), id)?);
        }
    }
    Ok(out)
}

fn eval_config(config: &RunConfig) -> EvalConfig {
    EvalConfig {
        min_coverage: config.eval.min_coverage,
        cluster_identity: config.eval.cluster_identity,
        n_bins: config.eval.n_bins,
    }
}

/// Score samples (and, when test rows exist, a matched natural set).
pub fn evaluate_samples(
    config: &RunConfig,
    registry: &FamilyRegistry,
    samples: &[GeneratedSample],
    hit_threshold: f64,
) -> CliResult<MetricsReport> {
    let references: Vec<String> = registry
        .entries()
        .flat_map(|e| e.family.train_rows().map(dirflow::lineage::ungapped))
        .filter(|s| !s.is_empty())
        .collect();
    let filter: Box<dyn Fn(&dirflow::evalsuite::SampleRecord) -> bool> = match config.eval.filter.as_str() {
        "all" => Box::new(|_| true),
        _ => Box::new(move |r| r.self_score >= hit_threshold),
    };
    Ok(evaluate(samples, registry, &references, hit_threshold, &eval_config(config), filter.as_ref())?)
}

pub fn cmd_eval(config: &RunConfig) -> CliResult<()> {
    let start = Instant::now();
    let samples_path = out_path(config, SAMPLES_FILE);
    require_file(&samples_path, "sample file")?;
    let registry = load_registry(config)?;
    let samples = parse_samples(&read_text(&samples_path)?, config.synth.k)?;
    let hit_threshold = match config.eval.hit_threshold {
        Some(v) => v,
        None => calibrate_hit_threshold(&registry)?,
    };
    let mut writer = StageWriter::new("eval", config);
    let report = evaluate_samples(config, &registry, &samples, hit_threshold)?;
    writer.write(&out_path(config, RECORDS_FILE), &report.records_text())?;
    writer.write(&out_path(config, SUMMARY_FILE), &report.summary_text())?;
    let reference = matched_reference(&samples, &registry, &root_stream(config))?;
    let mut notes = Vec::new();
    if reference.is_empty() {
        notes.push("no held-out rows: reference evaluation skipped".to_string());
    } else {
        let natural = evaluate_samples(config, &registry, &reference, hit_threshold)?;
        writer.write(&out_path(config, REFERENCE_RECORDS_FILE), &natural.records_text())?;
        writer.write(&out_path(config, REFERENCE_SUMMARY_FILE), &natural.summary_text())?;
    }
    writer.finish(start.elapsed().as_secs_f64(), &notes)?;
    Ok(())
}

/// Bayes-oracle accuracy with the lineage prior (family known), with the
/// lineage prior and the family marginalized, and with the uniform prior.
pub fn cmd_oracle_study(config: &RunConfig) -> CliResult<()> {
    let start = Instant::now();
    let ids = family_ids(config)?;
    let mut priors = Vec::new();
    let mut truths = Vec::new();
    let mut weights = Vec::new();
    for id in &ids {
        let post = load_posterior(config, id)?;
        let path = prior_path(config, id);
        let prior = if path.is_file() {
            FamilyPrior::from_text(&read_text(&path)?)?
        } else {
            posterior_to_prior(&post, config.prior.lambda, config.prior.epsilon)?
        };
        let depth = load_family(config, id)?.depth() as f64;
        weights.push(depth.powf(config.sampler.tau));
        priors.push(prior);
        truths.push(post);
    }
    let battery = OracleBattery::new(&priors, &truths, weights)?;
    let grid = &config.oracle.grid;
    let (n, t_max) = (config.oracle.n_mc, config.flow.t_max);
    let stream = root_stream(config).derive("oracle-study", 0);
    let lineage = battery.accuracy_with_context(grid, n, t_max, &mut stream.clone())?;
    let no_context = battery.accuracy_without_context(grid, n, t_max, &mut stream.clone())?;
    let uniform = battery.with_uniform_prior().accuracy_without_context(grid, n, t_max, &mut stream.clone())?;

    let mut curves = String::from("t\tlineage\tlineage_se\tlineage_no_context\tlineage_no_context_se\tuniform\tuniform_se\n");
    for ((a, b), c) in lineage.iter().zip(&no_context).zip(&uniform) {
        let _ = writeln!(curves, "{}\t{}\t{}\t{}\t{}\t{}\t{}", a.t, a.mean, a.std_err, b.mean, b.std_err, c.mean, c.std_err);
    }
    let hard_mean = |curve: &[dirflow::denoiser::AccuracyPoint]| {
        let v: Vec<f64> = curve.iter().filter(|p| p.t <= HARD_REGIME_T).map(|p| p.mean).collect();
        if v.is_empty() {
            "---".to_string()
        } else {
            (v.iter().sum::<f64>() / v.len() as f64).to_string()
        }
    };
    let summary = format!(
        "hard_regime_t={HARD_REGIME_T}\nlineage_hard_mean={}\nlineage_no_context_hard_mean={}\nuniform_hard_mean={}\n",
        hard_mean(&lineage),
        hard_mean(&no_context),
        hard_mean(&uniform)
    );
    let mut writer = StageWriter::new("oracle-study", config);
    writer.write(&out_path(config, ORACLE_CURVES_FILE), &curves)?;
    writer.write(&out_path(config, ORACLE_SUMMARY_FILE), &summary)?;
    writer.finish(start.elapsed().as_secs_f64(), &[])?;
    Ok(())
}

/// Run every stage of the pipeline in order.
pub fn cmd_pipeline(config: &RunConfig) -> CliResult<()> {
    cmd_make_synth(config)?;
    cmd_build_prior(config)?;
    cmd_train(config)?;
    cmd_sample(config)?;
    cmd_eval(config)
}
