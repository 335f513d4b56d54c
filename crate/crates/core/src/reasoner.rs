//! Transitive-closure inference layer run before grouping-based summarization.
//!
//! Two rule families are evaluated semi-naively to a least fixpoint:
//! transitivity for every configured predicate, and `rdf:type` propagation
//! along the subclass hierarchy.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rdf::{Graph, IdTriple, TermId, RDFS_SUBCLASS_OF, RDF_TYPE};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReasonerError {
    #[error("no transitive predicates configured")]
    NoTransitivePredicates,
    #[error("fixpoint derived more than {cap} triples")]
    FixpointBudgetExceeded { cap: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleConfig {
    pub transitive_predicates: BTreeSet<String>,
    pub type_predicate: String,
    pub subclass_predicate: String,
    pub type_propagation: bool,
    /// Cap on derived triples as a multiple of the input size; `None` disables the cap.
    pub budget_factor: Option<usize>,
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig {
            transitive_predicates: BTreeSet::from([RDFS_SUBCLASS_OF.to_owned()]),
            type_predicate: RDF_TYPE.to_owned(),
            subclass_predicate: RDFS_SUBCLASS_OF.to_owned(),
            type_propagation: true,
            budget_factor: Some(10),
        }
    }
}

impl RuleConfig {
    pub fn unbounded(mut self) -> Self {
        self.budget_factor = None;
        self
    }
}

struct Index {
    /// (predicate, subject) -> objects
    forward: HashMap<(TermId, TermId), Vec<TermId>>,
    /// (predicate, object) -> subjects
    backward: HashMap<(TermId, TermId), Vec<TermId>>,
}

impl Index {
    fn insert(&mut self, t: IdTriple) {
        self.forward.entry((t.p, t.s)).or_default().push(t.o);
        self.backward.entry((t.p, t.o)).or_default().push(t.s);
    }

    fn objects(&self, p: TermId, s: TermId) -> Vec<TermId> {
        self.forward.get(&(p, s)).cloned().unwrap_or_default()
    }

    fn subjects(&self, p: TermId, o: TermId) -> Vec<TermId> {
        self.backward.get(&(p, o)).cloned().unwrap_or_default()
    }
}

/// Least fixpoint of the configured rules over `graph`. The result contains the input.
pub fn transitive_closure(graph: &Graph, rules: &RuleConfig) -> Result<Graph, ReasonerError> {
    if rules.transitive_predicates.is_empty() {
        return Err(ReasonerError::NoTransitivePredicates);
    }
    let transitive: HashSet<TermId> = rules.transitive_predicates.iter().filter_map(|p| graph.iri_id(p)).collect();
    let (type_id, sub_id) = if rules.type_propagation {
        (graph.iri_id(&rules.type_predicate), graph.iri_id(&rules.subclass_predicate))
    } else {
        (None, None)
    };
    let propagate = type_id.zip(sub_id);
    let relevant = |p: TermId| transitive.contains(&p) || propagate.is_some_and(|(ty, sub)| p == ty || p == sub);

    let cap = rules.budget_factor.map(|f| f.saturating_mul(graph.len()));
    let mut known: HashSet<IdTriple> = HashSet::new();
    let mut index = Index { forward: HashMap::new(), backward: HashMap::new() };
    let mut delta: Vec<IdTriple> = Vec::new();
    for &t in graph.id_triples() {
        if relevant(t.p) {
            known.insert(t);
            index.insert(t);
            delta.push(t);
        }
    }

    let mut derived: Vec<IdTriple> = Vec::new();
    while !delta.is_empty() {
        let mut next = Vec::new();
        let mut add = |t: IdTriple, known: &mut HashSet<IdTriple>, index: &mut Index| -> Result<(), ReasonerError> {
            if known.insert(t) {
                index.insert(t);
                next.push(t);
                derived.push(t);
                if let Some(cap) = cap {
                    if derived.len() > cap {
                        return Err(ReasonerError::FixpointBudgetExceeded { cap });
                    }
                }
            }
            Ok(())
        };
        for t in delta {
            if transitive.contains(&t.p) {
                for z in index.objects(t.p, t.o) {
                    add(IdTriple::new(t.s, t.p, z), &mut known, &mut index)?;
                }
                for w in index.subjects(t.p, t.s) {
                    add(IdTriple::new(w, t.p, t.o), &mut known, &mut index)?;
                }
            }
            if let Some((ty, sub)) = propagate {
                if t.p == ty {
                    for d in index.objects(sub, t.o) {
                        add(IdTriple::new(t.s, ty, d), &mut known, &mut index)?;
                    }
                }
                if t.p == sub {
                    for x in index.subjects(ty, t.s) {
                        add(IdTriple::new(x, ty, t.o), &mut known, &mut index)?;
                    }
                }
            }
        }
        delta = next;
    }
    if derived.is_empty() {
        return Ok(graph.clone());
    }
    Ok(graph.with_added(derived))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::desk;
    use crate::rdf::Triple;

    fn sub(a: &str, b: &str) -> Triple {
        Triple::iris(&format!("urn:{a}"), RDFS_SUBCLASS_OF, &format!("urn:{b}"))
    }

    #[test]
    fn type_propagates_through_subclass() {
        let g = desk::graph();
        let closed = transitive_closure(&g, &RuleConfig::default()).unwrap();
        assert_eq!(closed.len(), g.len() + 1);
        assert!(closed.contains(&Triple::iris(&desk::iri("Germany"), RDF_TYPE, &desk::iri("Country"))));
    }

    #[test]
    fn chain_closure() {
        let g: Graph = vec![sub("A", "B"), sub("B", "C"), sub("C", "D")].into_iter().collect();
        let closed = transitive_closure(&g, &RuleConfig::default()).unwrap();
        let added: BTreeSet<Triple> = closed.triples().filter(|t| !g.contains(t)).collect();
        assert_eq!(added, BTreeSet::from([sub("A", "C"), sub("A", "D"), sub("B", "D")]));
    }

    #[test]
    fn no_rule_predicates_is_identity() {
        let g: Graph = vec![Triple::iris("urn:a", "urn:p", "urn:b")].into_iter().collect();
        assert_eq!(transitive_closure(&g, &RuleConfig::default()).unwrap(), g);
    }

    #[test]
    fn idempotent_on_desk() {
        let rules = RuleConfig::default();
        let once = transitive_closure(&desk::graph(), &rules).unwrap();
        assert_eq!(transitive_closure(&once, &rules).unwrap(), once);
    }

    #[test]
    fn type_propagation_can_be_disabled() {
        let rules = RuleConfig { type_propagation: false, ..RuleConfig::default() };
        let g = desk::graph();
        assert_eq!(transitive_closure(&g, &rules).unwrap(), g);
    }

    #[test]
    fn custom_transitive_predicate() {
        let rules = RuleConfig {
            transitive_predicates: BTreeSet::from(["urn:partOf".to_owned()]),
            ..RuleConfig::default()
        };
        let g: Graph = vec![Triple::iris("urn:a", "urn:partOf", "urn:b"), Triple::iris("urn:b", "urn:partOf", "urn:c")]
            .into_iter()
            .collect();
        let closed = transitive_closure(&g, &rules).unwrap();
        assert!(closed.contains(&Triple::iris("urn:a", "urn:partOf", "urn:c")));
    }

    #[test]
    fn budget_and_config_errors() {
        let chain: Graph = (0..30).map(|i| sub(&format!("n{i}"), &format!("n{}", i + 1))).collect();
        let err = transitive_closure(&chain, &RuleConfig::default()).unwrap_err();
        assert_eq!(err, ReasonerError::FixpointBudgetExceeded { cap: 300 });
        let closed = transitive_closure(&chain, &RuleConfig::default().unbounded()).unwrap();
        assert_eq!(closed.len(), 31 * 30 / 2);

        let empty = RuleConfig { transitive_predicates: BTreeSet::new(), ..RuleConfig::default() };
        assert_eq!(transitive_closure(&chain, &empty), Err(ReasonerError::NoTransitivePredicates));
    }
}
