use std::collections::BTreeMap;

use super::family::AlignedFamily;
use super::prior::FamilyPrior;
use super::pssm::Pssm;
use crate::error::{domain, Result};
use crate::specfun::{categorical_unchecked, RandomStream};

#[derive(Clone, Debug)]
pub struct FamilyEntry {
    pub family: AlignedFamily,
    pub prior: FamilyPrior,
    pub pssm: Pssm,
}

/// Families keyed by id with sampling weights `π_h ∝ n_h^τ`, `n_h` the
/// family's row count.
#[derive(Clone, Debug)]
pub struct FamilyRegistry {
    families: BTreeMap<String, FamilyEntry>,
    weights: BTreeMap<String, f64>,
}

impl FamilyRegistry {
    pub fn new(entries: Vec<FamilyEntry>, tau: f64) -> Result<Self> {
        if entries.is_empty() {
            return domain("registry needs at least one family");
        }
        if !(tau.is_finite() && tau >= 0.0) {
            return domain(format!("family weight exponent must be >= 0, got {tau}"));
        }
        let mut families = BTreeMap::new();
        for e in entries {
            let id = e.family.family_id.clone();
            if e.prior.family_id != id || e.pssm.family_id != id {
                return domain(format!("entry for {id} mixes family ids"));
            }
            if e.prior.len() != e.family.len || e.pssm.len() != e.family.len {
                return domain(format!("entry for {id} has mismatched lengths"));
            }
            if families.insert(id.clone(), e).is_some() {
                return domain(format!("duplicate family {id}"));
            }
        }
        let raw: Vec<(String, f64)> = families
            .iter()
            .map(|(id, e)| (id.clone(), (e.family.depth() as f64).powf(tau)))
            .collect();
        let total: f64 = raw.iter().map(|(_, w)| w).sum();
        let weights = raw.into_iter().map(|(id, w)| (id, w / total)).collect();
        Ok(Self { families, weights })
    }

    pub fn get(&self, family_id: &str) -> Option<&FamilyEntry> {
        self.families.get(family_id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.families.keys().map(|s| s.as_str())
    }

    pub fn entries(&self) -> impl Iterator<Item = &FamilyEntry> {
        self.families.values()
    }

    pub fn len(&self) -> usize {
        self.families.len()
    }

    pub fn is_empty(&self) -> bool {
        self.families.is_empty()
    }

    pub fn weight(&self, family_id: &str) -> Option<f64> {
        self.weights.get(family_id).copied()
    }

    pub fn weights(&self) -> &BTreeMap<String, f64> {
        &self.weights
    }
}

/// Draws family ids from the registry weights restricted to the `cap`
/// heaviest families (ties by id), renormalized.
#[derive(Clone, Debug)]
pub struct FamilySampler {
    ids: Vec<String>,
    probs: Vec<f64>,
}

impl FamilySampler {
    pub fn new(registry: &FamilyRegistry, cap: usize) -> Result<Self> {
        if cap == 0 {
            return domain("family cap must be positive");
        }
        let mut ranked: Vec<(&String, f64)> = registry.weights.iter().map(|(id, &w)| (id, w)).collect();
        // Stable sort keeps id order among equal weights.
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
        ranked.truncate(cap);
        ranked.sort_by(|a, b| a.0.cmp(b.0));
        let total: f64 = ranked.iter().map(|(_, w)| w).sum();
        Ok(Self {
            ids: ranked.iter().map(|(id, _)| (*id).clone()).collect(),
            probs: ranked.iter().map(|(_, w)| w / total).collect(),
        })
    }

    /// The retained families and their renormalized probabilities.
    pub fn support(&self) -> impl Iterator<Item = (&str, f64)> {
        self.ids.iter().map(|s| s.as_str()).zip(self.probs.iter().copied())
    }

    pub fn sample(&self, stream: &mut RandomStream) -> &str {
        &self.ids[categorical_unchecked(&self.probs, 1.0, stream)]
    }
}

/// Draw one family id with `π_h ∝ n_h^τ` among the `cap` heaviest families.
pub fn family_sampler(registry: &FamilyRegistry, cap: usize, stream: &mut RandomStream) -> Result<String> {
    Ok(FamilySampler::new(registry, cap)?.sample(stream).to_string())
}
