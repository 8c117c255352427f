use std::fmt::Write as _;

use super::alphabet::{code_of, is_missing, render, MAX_K};
use crate::error::{domain, Error, Result};
use crate::specfun::RandomStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitTag {
    Train,
    Test,
}

/// An alignment of equal-length rows over a `k`-letter alphabet plus the gap
/// and unknown codes.
#[derive(Clone, Debug, PartialEq)]
pub struct AlignedFamily {
    pub family_id: String,
    pub k: usize,
    pub len: usize,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<u8>>,
    pub split: Vec<SplitTag>,
}

impl AlignedFamily {
    /// Build from residue-code rows; every row starts in the train split.
    pub fn new(family_id: impl Into<String>, k: usize, headers: Vec<String>, rows: Vec<Vec<u8>>) -> Result<Self> {
        if !(2..=MAX_K).contains(&k) {
            return domain(format!("alphabet size {k} outside [2, {MAX_K}]"));
        }
        if rows.is_empty() || headers.len() != rows.len() {
            return domain("family needs at least one row and one header per row");
        }
        let len = rows[0].len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != len {
                return Err(Error::Parse(format!(
                    "row {} has length {}, expected {len}",
                    i + 1,
                    row.len()
                )));
            }
            if row.iter().any(|&c| !is_missing(c) && c as usize >= k) {
                return domain(format!("row {} has a residue code outside the alphabet", i + 1));
            }
        }
        let split = vec![SplitTag::Train; rows.len()];
        Ok(Self {
            family_id: family_id.into(),
            k,
            len,
            headers,
            rows,
            split,
        })
    }

    pub fn depth(&self) -> usize {
        self.rows.len()
    }

    pub fn train_rows(&self) -> impl Iterator<Item = &[u8]> {
        self.tagged_rows(SplitTag::Train)
    }

    pub fn test_rows(&self) -> impl Iterator<Item = &[u8]> {
        self.tagged_rows(SplitTag::Test)
    }

    fn tagged_rows(&self, tag: SplitTag) -> impl Iterator<Item = &[u8]> {
        self.rows
            .iter()
            .zip(&self.split)
            .filter(move |(_, &s)| s == tag)
            .map(|(r, _)| r.as_slice())
    }

    /// Ungapped sequences of the held-out rows.
    pub fn test_sequences(&self) -> Vec<String> {
        self.test_rows().map(ungapped).collect()
    }

    /// Aligned FASTA text. Test rows carry a ` split=test` header suffix so
    /// a written split can be read back.
    pub fn to_fasta(&self) -> String {
        let mut out = String::new();
        for ((h, row), s) in self.headers.iter().zip(&self.rows).zip(&self.split) {
            let suffix = if *s == SplitTag::Test { " split=test" } else { "" };
            let _ = writeln!(out, ">{h}{suffix}");
            let _ = writeln!(out, "{}", render(row));
        }
        out
    }

    fn select_rows(&self, keep: &[usize]) -> Self {
        Self {
            family_id: self.family_id.clone(),
            k: self.k,
            len: self.len,
            headers: keep.iter().map(|&i| self.headers[i].clone()).collect(),
            rows: keep.iter().map(|&i| self.rows[i].clone()).collect(),
            split: keep.iter().map(|&i| self.split[i]).collect(),
        }
    }

    fn select_columns(&self, keep: &[usize]) -> Self {
        Self {
            family_id: self.family_id.clone(),
            k: self.k,
            len: keep.len(),
            headers: self.headers.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| keep.iter().map(|&c| r[c]).collect())
                .collect(),
            split: self.split.clone(),
        }
    }
}

/// The ungapped residue string of an aligned row (unknowns kept as `X`).
pub fn ungapped(row: &[u8]) -> String {
    render(row).chars().filter(|&c| c != '-').collect()
}

/// Parse aligned FASTA over the 20-letter alphabet.
///
/// `.` becomes a gap, letters are uppercased and non-standard residues become
/// `X`. A header ending in ` split=test` restores the held-out tag.
pub fn parse_aligned_fasta(text: &[u8], family_id: &str) -> Result<AlignedFamily> {
    parse_aligned_fasta_k(text, family_id, MAX_K)
}

/// [`parse_aligned_fasta`] for a reduced alphabet of the first `k` letters.
pub fn parse_aligned_fasta_k(text: &[u8], family_id: &str, k: usize) -> Result<AlignedFamily> {
    let text = std::str::from_utf8(text).map_err(|e| Error::Parse(format!("not UTF-8: {e}")))?;
    let mut headers = Vec::new();
    let mut rows: Vec<Vec<u8>> = Vec::new();
    let mut tags = Vec::new();
    for line in text.lines() {
        let line = line.trim_end();
        if line.starts_with('#') {
            continue;
        }
        if let Some(h) = line.strip_prefix('>') {
            let (h, tag) = match h.strip_suffix(" split=test") {
                Some(base) => (base, SplitTag::Test),
                None => (h, SplitTag::Train),
            };
            headers.push(h.to_string());
            tags.push(tag);
            rows.push(Vec::new());
        } else if !line.is_empty() {
            let Some(row) = rows.last_mut() else {
                return Err(Error::Parse("sequence data before the first header".into()));
            };
            row.extend(line.bytes().filter(|b| !b.is_ascii_whitespace()).map(|b| code_of(b, k)));
        }
    }
    if rows.is_empty() {
        return Err(Error::Parse("no FASTA records".into()));
    }
    let mut family = AlignedFamily::new(family_id, k, headers, rows)?;
    family.split = tags;
    Ok(family)
}

/// Cleaning thresholds.
#[derive(Clone, Debug, PartialEq)]
pub struct CleanFilters {
    pub min_len: usize,
    pub max_len: usize,
    pub depth_cap: usize,
    pub col_missing_max: f64,
    pub min_depth: usize,
}

impl Default for CleanFilters {
    fn default() -> Self {
        Self {
            min_len: 20,
            max_len: 2000,
            depth_cap: 5000,
            col_missing_max: 0.95,
            min_depth: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Rejection {
    Length { len: usize },
    Depth { depth: usize },
    ColumnsDropped { remaining: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub enum CleanOutcome {
    Kept(AlignedFamily),
    Rejected(Rejection),
}

impl CleanOutcome {
    pub fn kept(self) -> Option<AlignedFamily> {
        match self {
            CleanOutcome::Kept(f) => Some(f),
            CleanOutcome::Rejected(_) => None,
        }
    }
}

/// Length filter, uniform subsample to `depth_cap`, column missing-rate
/// filter, depth filter; in that order.
///
/// The subsample keeps the original row order. A family whose column filter
/// leaves fewer than `min_len` columns is rejected as well, which keeps the
/// operation idempotent.
pub fn clean_family(family: &AlignedFamily, filters: &CleanFilters, stream: &mut RandomStream) -> CleanOutcome {
    if family.len < filters.min_len || family.len > filters.max_len {
        return CleanOutcome::Rejected(Rejection::Length { len: family.len });
    }
    let mut current = if family.depth() > filters.depth_cap {
        let mut idx: Vec<usize> = (0..family.depth()).collect();
        stream.shuffle(&mut idx);
        idx.truncate(filters.depth_cap);
        idx.sort_unstable();
        family.select_rows(&idx)
    } else {
        family.clone()
    };
    let n = current.depth() as f64;
    let keep: Vec<usize> = (0..current.len)
        .filter(|&c| {
            let missing = current.rows.iter().filter(|r| is_missing(r[c])).count() as f64;
            missing / n <= filters.col_missing_max
        })
        .collect();
    if keep.len() < current.len {
        current = current.select_columns(&keep);
    }
    if current.len < filters.min_len {
        return CleanOutcome::Rejected(Rejection::ColumnsDropped { remaining: current.len });
    }
    if current.depth() < filters.min_depth {
        return CleanOutcome::Rejected(Rejection::Depth { depth: current.depth() });
    }
    CleanOutcome::Kept(current)
}

/// Number of held-out rows for a family of `n` rows.
pub fn holdout_count(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64).round() as usize).clamp(1, n - 1)
}

/// Tag `clamp(round(fraction * N), 1, N - 1)` rows as held out, chosen by a
/// shuffle drawn from `stream`.
pub fn split_family(family: &AlignedFamily, fraction: f64, stream: &mut RandomStream) -> Result<AlignedFamily> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return domain(format!("holdout fraction {fraction} outside (0, 1)"));
    }
    let n = family.depth();
    if n < 2 {
        return domain(format!("cannot split a family of {n} rows"));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    stream.shuffle(&mut idx);
    let mut out = family.clone();
    out.split = vec![SplitTag::Train; n];
    for &i in &idx[..holdout_count(n, fraction)] {
        out.split[i] = SplitTag::Test;
    }
    Ok(out)
}

/// Per-column fraction of train rows that are gaps or unknowns.
pub fn estimate_gap_rates(family: &AlignedFamily) -> Result<Vec<f64>> {
    let mut counts = vec![0usize; family.len];
    let mut n = 0usize;
    for row in family.train_rows() {
        n += 1;
        for (c, &code) in counts.iter_mut().zip(row) {
            if is_missing(code) {
                *c += 1;
            }
        }
    }
    if n == 0 {
        return domain(format!("family {} has no train rows", family.family_id));
    }
    Ok(counts.into_iter().map(|c| c as f64 / n as f64).collect())
}
