use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::identity::{cluster_assignments, nn_identity, novelty_from_identities};
use super::score::{assign_detailed, pssm_align_score};
use super::{aligned_fitness, GeneratedSample};
use crate::error::{domain, Error, Result};
use crate::lineage::FamilyRegistry;

/// Written in place of an undefined value.
const ABSENT: &str = "---";

#[derive(Clone, Debug, PartialEq)]
pub struct EvalConfig {
    pub min_coverage: f64,
    pub cluster_identity: f64,
    pub n_bins: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            min_coverage: 0.8,
            cluster_identity: 0.8,
            n_bins: 3,
        }
    }
}

/// Per-sample metrics, one row of the per-sample file.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleRecord {
    pub index: usize,
    pub intended_family: String,
    pub length: usize,
    pub assigned_family: String,
    pub top_score: f64,
    pub second_score: f64,
    /// Score against the intended family's PSSM.
    pub self_score: f64,
    pub nn_identity: Option<f64>,
    /// Greedy cluster id among the included samples.
    pub cluster: Option<usize>,
    pub fitness: Option<f64>,
    /// Whether the sample passed the caller's filter predicate.
    pub included: bool,
    pub sequence: String,
}

const RECORD_HEADER: &str = "index\tintended_family\tlength\tassigned_family\ttop_score\tsecond_score\tself_score\tnn_identity\tcluster\tfitness\tincluded\tsequence";

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| ABSENT.to_string(), |x| x.to_string())
}

fn parse_field<T: std::str::FromStr>(field: &str, name: &str, line: usize) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad {name} {field:?}")))
}

fn parse_opt<T: std::str::FromStr>(field: &str, name: &str, line: usize) -> Result<Option<T>> {
    if field == ABSENT {
        Ok(None)
    } else {
        parse_field(field, name, line).map(Some)
    }
}

impl SampleRecord {
    fn to_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.index,
            self.intended_family,
            self.length,
            self.assigned_family,
            self.top_score,
            self.second_score,
            self.self_score,
            opt(self.nn_identity),
            opt(self.cluster),
            opt(self.fitness),
            u8::from(self.included),
            self.sequence
        )
    }

    fn from_line(line: &str, n: usize) -> Result<Self> {
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 12 {
            return Err(Error::Parse(format!("line {n}: expected 12 fields, found {}", f.len())));
        }
        Ok(Self {
            index: parse_field(f[0], "index", n)?,
            intended_family: f[1].to_string(),
            length: parse_field(f[2], "length", n)?,
            assigned_family: f[3].to_string(),
            top_score: parse_field(f[4], "top_score", n)?,
            second_score: parse_field(f[5], "second_score", n)?,
            self_score: parse_field(f[6], "self_score", n)?,
            nn_identity: parse_opt(f[7], "nn_identity", n)?,
            cluster: parse_opt(f[8], "cluster", n)?,
            fitness: parse_opt(f[9], "fitness", n)?,
            included: parse_field::<u8>(f[10], "included", n)? == 1,
            sequence: f[11].to_string(),
        })
    }

    fn correct(&self) -> bool {
        self.assigned_family == self.intended_family
    }
}

/// One quantile bin of ungapped length.
#[derive(Clone, Debug, PartialEq)]
pub struct LengthBin {
    pub bin: usize,
    pub count: usize,
    pub min_length: Option<usize>,
    pub max_length: Option<usize>,
    pub family_validity: Option<f64>,
    pub fitness: Option<f64>,
    /// Mean `1 - NNId` over the bin's samples with a hit.
    pub novelty: Option<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut total, mut n) = (0.0, 0usize);
    for v in values {
        total += v;
        n += 1;
    }
    (n > 0).then(|| total / n as f64)
}

/// Nearest-rank quantile bins over length. Edge `j` is the length at rank
/// `ceil(j N / n_bins)`; a sample goes to the first bin whose upper edge is at
/// least its length, so ties fall to the lower bin.
pub fn length_stratified_report(records: &[SampleRecord], n_bins: usize) -> Result<Vec<LengthBin>> {
    if n_bins == 0 {
        return domain("need at least one bin");
    }
    let mut lengths: Vec<usize> = records.iter().map(|r| r.length).collect();
    lengths.sort_unstable();
    let n = lengths.len();
    let edges: Vec<usize> = (1..n_bins)
        .filter_map(|j| {
            let rank = (j * n).div_ceil(n_bins);
            (rank > 0).then(|| lengths[rank - 1])
        })
        .collect();
    let mut members: Vec<Vec<&SampleRecord>> = vec![Vec::new(); n_bins];
    for r in records {
        let b = edges.iter().position(|&e| r.length <= e).unwrap_or(n_bins - 1);
        members[b].push(r);
    }
    Ok(members
        .into_iter()
        .enumerate()
        .map(|(bin, m)| LengthBin {
            bin,
            count: m.len(),
            min_length: m.iter().map(|r| r.length).min(),
            max_length: m.iter().map(|r| r.length).max(),
            family_validity: mean(m.iter().map(|r| f64::from(u8::from(r.correct())))),
            fitness: mean(m.iter().filter_map(|r| r.fitness)),
            novelty: mean(m.iter().filter_map(|r| r.nn_identity).map(|id| 1.0 - id)),
        })
        .collect())
}

/// Summary statistics over the included samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Aggregates {
    pub n_samples: usize,
    pub n_included: usize,
    pub hit_threshold: f64,
    pub acc_fam: Option<f64>,
    pub hit_any: Option<f64>,
    pub nnid_mean: Option<f64>,
    /// Population standard deviation.
    pub nnid_std: Option<f64>,
    pub novelty_08: Option<f64>,
    pub novelty_06: Option<f64>,
    pub diversity: usize,
    pub fitness_mean: Option<f64>,
    pub bins: Vec<LengthBin>,
}

impl Aggregates {
    /// Everything here is a function of the per-sample records.
    pub fn from_records(records: &[SampleRecord], hit_threshold: f64, n_bins: usize) -> Result<Self> {
        let inc: Vec<SampleRecord> = records.iter().filter(|r| r.included).cloned().collect();
        let ids: Vec<Option<f64>> = inc.iter().map(|r| r.nn_identity).collect();
        let nnid_mean = mean(ids.iter().flatten().copied());
        let nnid_std = nnid_mean.map(|m| mean(ids.iter().flatten().map(|v| (v - m) * (v - m))).unwrap_or(0.0).sqrt());
        let mut clusters: Vec<usize> = inc.iter().filter_map(|r| r.cluster).collect();
        clusters.sort_unstable();
        clusters.dedup();
        Ok(Self {
            n_samples: records.len(),
            n_included: inc.len(),
            hit_threshold,
            acc_fam: mean(inc.iter().map(|r| f64::from(u8::from(r.correct())))),
            hit_any: mean(inc.iter().map(|r| f64::from(u8::from(r.top_score >= hit_threshold)))),
            nnid_mean,
            nnid_std,
            novelty_08: novelty_from_identities(&ids, 0.8),
            novelty_06: novelty_from_identities(&ids, 0.6),
            diversity: clusters.len(),
            fitness_mean: mean(inc.iter().filter_map(|r| r.fitness)),
            bins: length_stratified_report(&inc, n_bins)?,
        })
    }

    /// `key=value` lines in a fixed order; undefined values are `---`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n_samples={}", self.n_samples);
        let _ = writeln!(out, "n_included={}", self.n_included);
        let _ = writeln!(out, "hit_threshold={}", self.hit_threshold);
        let _ = writeln!(out, "acc_fam={}", opt(self.acc_fam));
        let _ = writeln!(out, "hit_any={}", opt(self.hit_any));
        let _ = writeln!(out, "nnid_mean={}", opt(self.nnid_mean));
        let _ = writeln!(out, "nnid_std={}", opt(self.nnid_std));
        let _ = writeln!(out, "novelty_0.8={}", opt(self.novelty_08));
        let _ = writeln!(out, "novelty_0.6={}", opt(self.novelty_06));
        let _ = writeln!(out, "diversity={}", self.diversity);
        let _ = writeln!(out, "fitness_mean={}", opt(self.fitness_mean));
        let _ = writeln!(out, "length_bins={}", self.bins.len());
        for b in &self.bins {
            let p = format!("bin{}", b.bin);
            let _ = writeln!(out, "{p}.count={}", b.count);
            let _ = writeln!(out, "{p}.min_length={}", opt(b.min_length));
            let _ = writeln!(out, "{p}.max_length={}", opt(b.max_length));
            let _ = writeln!(out, "{p}.family_validity={}", opt(b.family_validity));
            let _ = writeln!(out, "{p}.fitness={}", opt(b.fitness));
            let _ = writeln!(out, "{p}.novelty={}", opt(b.novelty));
        }
        out
    }
}

/// Per-sample records plus their aggregates.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub records: Vec<SampleRecord>,
    pub aggregates: Aggregates,
}

impl MetricsReport {
    /// Tab-separated per-sample table with one header line.
    pub fn records_text(&self) -> String {
        let mut out = String::from(RECORD_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&r.to_line());
            out.push('\n');
        }
        out
    }

    pub fn summary_text(&self) -> String {
        self.aggregates.to_text()
    }
}

/// Per-sample table written by [`MetricsReport::records_text`]; `#` lines are
/// skipped.
pub fn parse_records(text: &str) -> Result<Vec<SampleRecord>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.starts_with('#') && !l.is_empty());
    match lines.next() {
        Some((_, h)) if h == RECORD_HEADER => {}
        _ => return Err(Error::Parse("missing per-sample header".into())),
    }
    lines.map(|(i, l)| SampleRecord::from_line(l, i + 1)).collect()
}

/// `key=value` summary lines; `#` lines are skipped.
pub fn parse_summary(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", i + 1)))?;
        map.insert(k.to_string(), v.to_string());
    }
    Ok(map)
}

/// Score every sample, apply `filter`, cluster the included samples in input
/// order and aggregate.
///
/// `references` are the ungapped natural sequences novelty is measured
/// against. Every intended family must be in the registry.
pub fn evaluate(
    samples: &[GeneratedSample],
    registry: &FamilyRegistry,
    references: &[String],
    hit_threshold: f64,
    config: &EvalConfig,
    filter: &dyn Fn(&SampleRecord) -> bool,
) -> Result<MetricsReport> {
    if hit_threshold.is_nan() {
        return domain("hit threshold is NaN");
    }
    let mut records = Vec::with_capacity(samples.len());
    for (index, s) in samples.iter().enumerate() {
        let entry = registry
            .get(&s.intended_family)
            .ok_or_else(|| Error::Domain(format!("unknown intended family {}", s.intended_family)))?;
        let a = assign_detailed(&s.sequence, registry)?;
        let fitness = match &s.aligned {
            Some(row) => Some(aligned_fitness(row, &entry.pssm)?),
            None => None,
        };
        let mut rec = SampleRecord {
            index,
            intended_family: s.intended_family.clone(),
            length: s.length,
            assigned_family: a.family_id,
            top_score: a.score,
            second_score: a.second_score,
            self_score: pssm_align_score(&s.sequence, &entry.pssm)?.0,
            nn_identity: nn_identity(&s.sequence, references, config.min_coverage),
            cluster: None,
            fitness,
            included: false,
            sequence: s.sequence.clone(),
        };
        rec.included = filter(&rec);
        records.push(rec);
    }
    let included: Vec<usize> = (0..records.len()).filter(|&i| records[i].included).collect();
    let seqs: Vec<&str> = included.iter().map(|&i| records[i].sequence.as_str()).collect();
    let clusters = cluster_assignments(&seqs, config.cluster_identity, config.min_coverage);
    for (&i, c) in included.iter().zip(clusters) {
        records[i].cluster = Some(c);
    }
    let aggregates = Aggregates::from_records(&records, hit_threshold, config.n_bins)?;
    Ok(MetricsReport { records, aggregates })
}
