use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Candidate, EmbeddingTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynonymCluster {
    pub representative: Vec<String>,
    pub members: Vec<Vec<String>>,
    pub pooled_freq: usize,
}

/// Mean of the in-vocabulary lemma vectors; `None` if no lemma is known.
pub fn candidate_vector(c: &Candidate, table: &EmbeddingTable) -> Option<Vec<f64>> {
    let mut sum = vec![0.0f64; table.dim()];
    let mut n = 0usize;
    for v in c.phrase.iter().filter_map(|w| table.get(w)) {
        for (s, x) in sum.iter_mut().zip(v) {
            *s += f64::from(*x);
        }
        n += 1;
    }
    (n > 0).then(|| sum.into_iter().map(|s| s / n as f64).collect())
}

pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.0[hi] = lo;
        }
    }
}

/// Single-linkage clustering of candidates whose mean vectors have cosine
/// similarity of at least `tau`.
///
/// Repeated phrases are pooled first. Candidates without a vector (or with a
/// zero vector) stay singletons. The representative is the member with the
/// highest pooled frequency, ties broken by the smaller phrase.
pub fn cluster_synonyms(
    candidates: &[Candidate],
    table: &EmbeddingTable,
    tau: f64,
) -> Result<Vec<SynonymCluster>> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::Validation(format!("tau must be in (0, 1], got {tau}")));
    }
    let mut pooled: BTreeMap<Vec<String>, usize> = BTreeMap::new();
    for c in candidates {
        *pooled.entry(c.phrase.clone()).or_default() += c.freq;
    }
    let phrases: Vec<(Vec<String>, usize)> = pooled.into_iter().collect();

    let unit: Vec<Option<Vec<f64>>> = phrases
        .iter()
        .map(|(p, _)| {
            let c = Candidate {
                phrase: p.clone(),
                date: chrono::NaiveDate::MIN,
                freq: 0,
            };
            candidate_vector(&c, table).and_then(|v| {
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                (norm > 0.0).then(|| v.into_iter().map(|x| x / norm).collect())
            })
        })
        .collect();

    let edges: Vec<(usize, usize)> = (0..phrases.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let unit = &unit;
            (i + 1..phrases.len()).filter_map(move |j| {
                let (Some(a), Some(b)) = (&unit[i], &unit[j]) else {
                    return None;
                };
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                (dot.min(1.0) >= tau).then_some((i, j))
            })
        })
        .collect();

    let mut uf = UnionFind((0..phrases.len()).collect());
    for (i, j) in edges {
        uf.union(i, j);
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..phrases.len() {
        let root = uf.find(i);
        groups.entry(root).or_default().push(i);
    }
    Ok(groups
        .into_values()
        .map(|idx| {
            let rep = idx
                .iter()
                .copied()
                .max_by(|&a, &b| {
                    phrases[a]
                        .1
                        .cmp(&phrases[b].1)
                        .then_with(|| phrases[b].0.join(" ").cmp(&phrases[a].0.join(" ")))
                })
                .expect("non-empty group");
            SynonymCluster {
                representative: phrases[rep].0.clone(),
                pooled_freq: idx.iter().map(|&i| phrases[i].1).sum(),
                members: idx.into_iter().map(|i| phrases[i].0.clone()).collect(),
            }
        })
        .collect())
}
