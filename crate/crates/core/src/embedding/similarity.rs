use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use super::store::VectorStore;
use super::EmbeddingError;

/// `dot(u, v) / (|u| |v|)`, clamped to [-1, 1].
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, EmbeddingError> {
    if u.len() != v.len() {
        return Err(EmbeddingError::LengthMismatch { expected: u.len(), found: v.len() });
    }
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(EmbeddingError::ZeroVector);
    }
    Ok((dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0))
}

/// Mean cosine over all cross-class entity pairs whose entities differ.
///
/// Each class is a list of `(entity, vector)`.
pub fn class_similarity(first: &[(&str, &[f64])], second: &[(&str, &[f64])]) -> Result<f64, EmbeddingError> {
    if first.is_empty() || second.is_empty() {
        return Err(EmbeddingError::EmptyClass);
    }
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for (e1, v1) in first {
        for (e2, v2) in second {
            if e1 == e2 {
                continue;
            }
            sum += cosine(v1, v2)?;
            pairs += 1;
        }
    }
    if pairs == 0 {
        return Err(EmbeddingError::UndefinedSimilarity);
    }
    Ok(sum / pairs as f64)
}

/// Anything that can score how related two predicate IRIs are.
pub trait PredicateSimilarity {
    /// Score in [-1, 1]; `UnknownPredicate` when either side cannot be resolved.
    fn score(&self, a: &str, b: &str) -> Result<f64, EmbeddingError>;

    fn resolves(&self, predicate: &str) -> bool;
}

impl PredicateSimilarity for VectorStore {
    fn score(&self, a: &str, b: &str) -> Result<f64, EmbeddingError> {
        let va = self.predicate_vector(a)?;
        let vb = self.predicate_vector(b)?;
        cosine(&vb, &va)
    }

    fn resolves(&self, predicate: &str) -> bool {
        self.predicate_vector(predicate).is_ok()
    }
}

/// Ground-truth synonym clusters used as a similarity oracle: 1.0 inside a
/// cluster, 0.0 across clusters. Predicates outside every cluster form
/// their own singleton cluster.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClusterSimilarity {
    clusters: Vec<Vec<String>>,
    lookup: HashMap<String, usize>,
}

impl ClusterSimilarity {
    pub fn new(clusters: Vec<Vec<String>>) -> Self {
        let mut clusters: Vec<Vec<String>> = clusters
            .into_iter()
            .map(|c| c.into_iter().collect::<BTreeSet<_>>().into_iter().collect::<Vec<_>>())
            .filter(|c| !c.is_empty())
            .collect();
        clusters.sort();
        let lookup = clusters.iter().enumerate().flat_map(|(i, c)| c.iter().map(move |p| (p.clone(), i))).collect();
        ClusterSimilarity { clusters, lookup }
    }

    pub fn clusters(&self) -> &[Vec<String>] {
        &self.clusters
    }

    pub fn cluster_of(&self, predicate: &str) -> Option<&[String]> {
        self.lookup.get(predicate).map(|&i| self.clusters[i].as_slice())
    }

    pub fn same_cluster(&self, a: &str, b: &str) -> bool {
        a == b || matches!((self.lookup.get(a), self.lookup.get(b)), (Some(x), Some(y)) if x == y)
    }

    /// One cluster per line, members separated by tabs.
    pub fn read<R: BufRead>(reader: R) -> io::Result<Self> {
        let mut clusters = Vec::new();
        for line in reader.lines() {
            let line = line?;
            let members: Vec<String> = line.split('\t').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
            if !members.is_empty() {
                clusters.push(members);
            }
        }
        Ok(Self::new(clusters))
    }

    pub fn write<W: Write>(&self, mut out: W) -> io::Result<()> {
        for c in &self.clusters {
            writeln!(out, "{}", c.join("\t"))?;
        }
        Ok(())
    }
}

impl PredicateSimilarity for ClusterSimilarity {
    fn score(&self, a: &str, b: &str) -> Result<f64, EmbeddingError> {
        Ok(if self.same_cluster(a, b) { 1.0 } else { 0.0 })
    }

    fn resolves(&self, _predicate: &str) -> bool {
        true
    }
}

/// Predicates scoring strictly above a threshold against an anchor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilaritySet {
    pub anchor: String,
    /// Member IRI to score; always contains the anchor with score 1.0.
    pub members: BTreeMap<String, f64>,
    pub threshold: f64,
}

impl SimilaritySet {
    pub fn contains(&self, predicate: &str) -> bool {
        self.members.contains_key(predicate)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityOutcome {
    pub set: SimilaritySet,
    /// Candidates that could not be scored.
    pub unresolved: Vec<String>,
}

pub fn similar_predicates<'a, S, I>(
    similarity: &S,
    anchor: &str,
    candidates: I,
    threshold: f64,
) -> Result<SimilarityOutcome, EmbeddingError>
where
    S: PredicateSimilarity + ?Sized,
    I: IntoIterator<Item = &'a str>,
{
    if !similarity.resolves(anchor) {
        return Err(EmbeddingError::UnknownPredicate(anchor.to_owned()));
    }
    let mut members = BTreeMap::from([(anchor.to_owned(), 1.0)]);
    let mut unresolved = Vec::new();
    let candidates: BTreeSet<&str> = candidates.into_iter().collect();
    for candidate in candidates {
        if candidate == anchor {
            continue;
        }
        match similarity.score(candidate, anchor) {
            Ok(score) if score > threshold => {
                members.insert(candidate.to_owned(), score);
            }
            Ok(_) => {}
            Err(EmbeddingError::UnknownPredicate(_) | EmbeddingError::ZeroVector) => {
                log::warn!("cannot score predicate {candidate} against {anchor}");
                unresolved.push(candidate.to_owned());
            }
            Err(e) => return Err(e),
        }
    }
    Ok(SimilarityOutcome { set: SimilaritySet { anchor: anchor.to_owned(), members, threshold }, unresolved })
}

/// Partitions the anchors of `sets` into clusters. Two anchors are linked
/// when each is a member of the other's set (`mutual`) or when either is
/// (`!mutual`); clusters are the connected components of that relation.
pub fn cluster_anchors(sets: &BTreeMap<String, SimilaritySet>, mutual: bool) -> Vec<BTreeSet<String>> {
    let anchors: Vec<&String> = sets.keys().collect();
    let mut parent: Vec<usize> = (0..anchors.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..anchors.len() {
        for j in i + 1..anchors.len() {
            let ab = sets[anchors[i]].contains(anchors[j]);
            let ba = sets[anchors[j]].contains(anchors[i]);
            if (mutual && ab && ba) || (!mutual && (ab || ba)) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    for (i, a) in anchors.iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().insert((*a).clone());
    }
    groups.into_values().collect()
}
