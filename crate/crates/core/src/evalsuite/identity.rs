use super::GeneratedSample;

/// Best identity between two ungapped sequences over all relative offsets
/// whose overlap covers at least `min_coverage` of both. `None` when no
/// offset qualifies.
pub fn pair_identity(a: &[u8], b: &[u8], min_coverage: f64) -> Option<f64> {
    let (n, m) = (a.len(), b.len());
    if n == 0 || m == 0 {
        return None;
    }
    let mut best: Option<f64> = None;
    for shift in 0..n + m - 1 {
        // `b[j]` sits under `a[j + shift - (m - 1)]`.
        let (start_a, start_b) = if shift + 1 >= m { (shift + 1 - m, 0) } else { (0, m - 1 - shift) };
        let overlap = (n - start_a).min(m - start_b);
        if (overlap as f64 / n as f64) < min_coverage || (overlap as f64 / m as f64) < min_coverage {
            continue;
        }
        let same = a[start_a..start_a + overlap]
            .iter()
            .zip(&b[start_b..start_b + overlap])
            .filter(|(x, y)| x == y)
            .count();
        let id = same as f64 / overlap as f64;
        if best.map_or(true, |v| id > v) {
            best = Some(id);
        }
    }
    best
}

/// Nearest-neighbour identity of `sequence` against a reference set, by
/// exhaustive ungapped offset search (`O(R L²)` per query). `None` is a no-hit.
pub fn nn_identity(sequence: &str, reference_set: &[String], min_coverage: f64) -> Option<f64> {
    let q = sequence.as_bytes();
    let mut best: Option<f64> = None;
    for r in reference_set {
        if let Some(id) = pair_identity(q, r.as_bytes(), min_coverage) {
            if best.map_or(true, |v| id > v) {
                best = Some(id);
                if id == 1.0 {
                    break;
                }
            }
        }
    }
    best
}

/// Among the identities with a hit, the fraction below `delta`; `None` when
/// there is no hit at all.
pub fn novelty_from_identities(identities: &[Option<f64>], delta: f64) -> Option<f64> {
    let hits: Vec<f64> = identities.iter().flatten().copied().collect();
    if hits.is_empty() {
        return None;
    }
    Some(hits.iter().filter(|&&id| id < delta).count() as f64 / hits.len() as f64)
}

/// Novelty rate at identity threshold `delta`.
pub fn novelty_at(samples: &[GeneratedSample], reference_set: &[String], delta: f64, min_coverage: f64) -> Option<f64> {
    let ids: Vec<Option<f64>> = samples
        .iter()
        .map(|s| nn_identity(&s.sequence, reference_set, min_coverage))
        .collect();
    novelty_from_identities(&ids, delta)
}

/// Greedy clustering in input order. Returns the cluster index of each
/// sequence; a sequence joins the first cluster whose representative reaches
/// `identity_threshold` under the coverage rule.
pub fn cluster_assignments(sequences: &[&str], identity_threshold: f64, min_coverage: f64) -> Vec<usize> {
    let mut reps: Vec<&[u8]> = Vec::new();
    sequences
        .iter()
        .map(|s| {
            let s = s.as_bytes();
            match reps
                .iter()
                .position(|r| pair_identity(s, r, min_coverage).is_some_and(|id| id >= identity_threshold))
            {
                Some(c) => c,
                None => {
                    reps.push(s);
                    reps.len() - 1
                }
            }
        })
        .collect()
}

/// Number of greedy identity clusters.
pub fn diversity_clusters(samples: &[GeneratedSample], identity_threshold: f64, min_coverage: f64) -> usize {
    let seqs: Vec<&str> = samples.iter().map(|s| s.sequence.as_str()).collect();
    cluster_assignments(&seqs, identity_threshold, min_coverage)
        .into_iter()
        .max()
        .map_or(0, |c| c + 1)
}
