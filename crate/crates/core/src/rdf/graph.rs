use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::ops::Range;

use super::term::{Term, TermError, Triple};

/// Dense identifier of a term inside one frozen [`Graph`].
///
/// Frozen graphs number their terms in `Term` order, so comparing ids
/// compares the underlying terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(pub u32);

impl TermId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A triple of interned ids. Field order gives subject-predicate-object sort order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IdTriple {
    pub s: TermId,
    pub p: TermId,
    pub o: TermId,
}

impl IdTriple {
    pub fn new(s: TermId, p: TermId, o: TermId) -> Self {
        IdTriple { s, p, o }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    Subject,
    Predicate,
    Object,
}

/// Mutable accumulator for triples. Call [`GraphBuilder::freeze`] to obtain a queryable graph.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    terms: Vec<Term>,
    ids: HashMap<Term, u32>,
    triples: HashSet<[u32; 3]>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn intern(&mut self, term: Term) -> u32 {
        if let Some(&id) = self.ids.get(&term) {
            return id;
        }
        let id = self.terms.len() as u32;
        self.terms.push(term.clone());
        self.ids.insert(term, id);
        id
    }

    /// Inserts a triple; returns `false` if it was already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        let s = self.intern(triple.subject);
        let p = self.intern(triple.predicate);
        let o = self.intern(triple.object);
        self.triples.insert([s, p, o])
    }

    /// Validates positions before inserting.
    pub fn insert_terms(&mut self, s: Term, p: Term, o: Term) -> Result<bool, TermError> {
        Ok(self.insert(Triple::new(s, p, o)?))
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn freeze(self) -> Graph {
        let mut used = vec![false; self.terms.len()];
        for t in &self.triples {
            for &id in t {
                used[id as usize] = true;
            }
        }
        let mut order: Vec<u32> = (0..self.terms.len() as u32).filter(|&i| used[i as usize]).collect();
        order.sort_by(|&a, &b| self.terms[a as usize].cmp(&self.terms[b as usize]));
        let mut remap = vec![u32::MAX; self.terms.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old as usize] = new as u32;
        }
        let mut terms_by_old: Vec<Option<Term>> = self.terms.into_iter().map(Some).collect();
        let terms: Vec<Term> = order.iter().map(|&old| terms_by_old[old as usize].take().unwrap()).collect();
        let triples = self
            .triples
            .into_iter()
            .map(|[s, p, o]| {
                IdTriple::new(
                    TermId(remap[s as usize]),
                    TermId(remap[p as usize]),
                    TermId(remap[o as usize]),
                )
            })
            .collect();
        Graph::from_canonical(terms, triples)
    }
}

impl Extend<Triple> for GraphBuilder {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        for t in iter {
            self.insert(t);
        }
    }
}

/// Frozen, indexed, immutable set of triples.
///
/// Triples are kept sorted in subject-predicate-object order with two
/// permutation indexes (predicate-object-subject and object-subject-predicate),
/// which give the subject, (predicate, object) and object access paths.
#[derive(Clone, Default)]
pub struct Graph {
    terms: Vec<Term>,
    ids: HashMap<Term, TermId>,
    spo: Vec<IdTriple>,
    pos: Vec<u32>,
    osp: Vec<u32>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        // Canonical numbering makes structural equality coincide with set equality.
        self.terms == other.terms && self.spo == other.spo
    }
}

impl Eq for Graph {}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph").field("triples", &self.spo.len()).field("terms", &self.terms.len()).finish()
    }
}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        let mut b = GraphBuilder::new();
        b.extend(iter);
        b.freeze()
    }
}

impl Graph {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `terms` must be sorted and every term must be used by some triple.
    fn from_canonical(terms: Vec<Term>, mut spo: Vec<IdTriple>) -> Self {
        spo.sort_unstable();
        spo.dedup();
        let ids = terms.iter().enumerate().map(|(i, t)| (t.clone(), TermId(i as u32))).collect();
        let mut pos: Vec<u32> = (0..spo.len() as u32).collect();
        pos.sort_unstable_by_key(|&i| {
            let t = spo[i as usize];
            (t.p, t.o, t.s)
        });
        let mut osp: Vec<u32> = (0..spo.len() as u32).collect();
        osp.sort_unstable_by_key(|&i| {
            let t = spo[i as usize];
            (t.o, t.s, t.p)
        });
        Graph { terms, ids, spo, pos, osp }
    }

    /// Builds a graph from id triples of `self`, dropping terms that become unused.
    pub fn derive(&self, triples: impl IntoIterator<Item = IdTriple>) -> Graph {
        let triples: Vec<IdTriple> = triples.into_iter().collect();
        let mut used = vec![false; self.terms.len()];
        for t in &triples {
            used[t.s.index()] = true;
            used[t.p.index()] = true;
            used[t.o.index()] = true;
        }
        let mut remap = vec![u32::MAX; self.terms.len()];
        let mut terms = Vec::new();
        for (old, term) in self.terms.iter().enumerate() {
            if used[old] {
                remap[old] = terms.len() as u32;
                terms.push(term.clone());
            }
        }
        let r = |id: TermId| TermId(remap[id.index()]);
        let spo = triples.into_iter().map(|t| IdTriple::new(r(t.s), r(t.p), r(t.o))).collect();
        Graph::from_canonical(terms, spo)
    }

    /// Returns the subgraph of triples satisfying `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&IdTriple) -> bool) -> Graph {
        self.derive(self.spo.iter().copied().filter(|t| keep(t)))
    }

    /// Returns `self` plus `extra`, where `extra` uses only ids of `self`.
    pub fn with_added(&self, extra: impl IntoIterator<Item = IdTriple>) -> Graph {
        let mut spo = self.spo.clone();
        spo.extend(extra);
        Graph::from_canonical(self.terms.clone(), spo)
    }

    /// Set union with another graph (term tables may differ).
    pub fn union(&self, other: &Graph) -> Graph {
        let mut b = GraphBuilder::new();
        b.extend(self.triples());
        b.extend(other.triples());
        b.freeze()
    }

    pub fn len(&self) -> usize {
        self.spo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spo.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn term(&self, id: TermId) -> &Term {
        &self.terms[id.index()]
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn id_of(&self, term: &Term) -> Option<TermId> {
        self.ids.get(term).copied()
    }

    pub fn iri_id(&self, iri: &str) -> Option<TermId> {
        self.id_of(&Term::iri(iri))
    }

    /// All triples in subject-predicate-object id order.
    pub fn id_triples(&self) -> &[IdTriple] {
        &self.spo
    }

    pub fn triples(&self) -> impl Iterator<Item = Triple> + '_ {
        self.spo.iter().map(move |t| self.resolve(*t))
    }

    pub fn resolve(&self, t: IdTriple) -> Triple {
        Triple {
            subject: self.term(t.s).clone(),
            predicate: self.term(t.p).clone(),
            object: self.term(t.o).clone(),
        }
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        match (self.id_of(&triple.subject), self.id_of(&triple.predicate), self.id_of(&triple.object)) {
            (Some(s), Some(p), Some(o)) => self.spo.binary_search(&IdTriple::new(s, p, o)).is_ok(),
            _ => false,
        }
    }

    pub fn has_literals(&self) -> bool {
        self.terms.iter().any(Term::is_literal)
    }

    fn spo_range(&self, s: TermId, p: Option<TermId>) -> Range<usize> {
        let lo = self.spo.partition_point(|t| (t.s, p.map(|_| t.p)) < (s, p));
        let hi = self.spo.partition_point(|t| (t.s, p.map(|_| t.p)) <= (s, p));
        lo..hi
    }

    fn pos_range(&self, p: TermId, o: Option<TermId>) -> Range<usize> {
        let key = |i: &u32| {
            let t = self.spo[*i as usize];
            (t.p, o.map(|_| t.o))
        };
        let lo = self.pos.partition_point(|i| key(i) < (p, o));
        let hi = self.pos.partition_point(|i| key(i) <= (p, o));
        lo..hi
    }

    fn osp_range(&self, o: TermId, s: Option<TermId>) -> Range<usize> {
        let key = |i: &u32| {
            let t = self.spo[*i as usize];
            (t.o, s.map(|_| t.s))
        };
        let lo = self.osp.partition_point(|i| key(i) < (o, s));
        let hi = self.osp.partition_point(|i| key(i) <= (o, s));
        lo..hi
    }

    /// Triples with the given subject, in predicate-object order.
    pub fn out_edges(&self, s: TermId) -> &[IdTriple] {
        &self.spo[self.spo_range(s, None)]
    }

    /// Triples agreeing with every bound position, in subject-predicate-object order.
    pub fn match_ids(&self, s: Option<TermId>, p: Option<TermId>, o: Option<TermId>) -> Vec<IdTriple> {
        match (s, p, o) {
            (Some(s), Some(p), Some(o)) => {
                let t = IdTriple::new(s, p, o);
                if self.spo.binary_search(&t).is_ok() {
                    vec![t]
                } else {
                    Vec::new()
                }
            }
            (Some(s), p, None) => self.spo[self.spo_range(s, p)].to_vec(),
            (Some(s), None, Some(o)) => {
                self.osp[self.osp_range(o, Some(s))].iter().map(|&i| self.spo[i as usize]).collect()
            }
            (None, Some(p), o) => {
                let mut out: Vec<IdTriple> =
                    self.pos[self.pos_range(p, o)].iter().map(|&i| self.spo[i as usize]).collect();
                if o.is_none() {
                    out.sort_unstable();
                }
                // With (p, o) fixed the index yields subject order, which is already SPO order.
                out
            }
            (None, None, Some(o)) => self.osp[self.osp_range(o, None)].iter().map(|&i| self.spo[i as usize]).collect(),
            (None, None, None) => self.spo.clone(),
        }
    }

    /// Term-level pattern matching. A bound term absent from the graph matches nothing.
    pub fn matches(&self, s: Option<&Term>, p: Option<&Term>, o: Option<&Term>) -> Vec<Triple> {
        fn lookup(g: &Graph, t: Option<&Term>) -> Result<Option<TermId>, ()> {
            match t {
                None => Ok(None),
                Some(t) => g.id_of(t).map(Some).ok_or(()),
            }
        }
        let (Ok(s), Ok(p), Ok(o)) = (lookup(self, s), lookup(self, p), lookup(self, o)) else {
            return Vec::new();
        };
        self.match_ids(s, p, o).into_iter().map(|t| self.resolve(t)).collect()
    }

    /// Number of triples matching (p, o) without materializing them.
    pub fn count_po(&self, p: TermId, o: Option<TermId>) -> usize {
        self.pos_range(p, o).len()
    }

    pub fn project_ids(&self, position: Position) -> Vec<TermId> {
        let set: BTreeSet<TermId> = self
            .spo
            .iter()
            .map(|t| match position {
                Position::Subject => t.s,
                Position::Predicate => t.p,
                Position::Object => t.o,
            })
            .collect();
        set.into_iter().collect()
    }

    /// Distinct terms at `position`, in term order.
    pub fn project(&self, position: Position) -> Vec<Term> {
        self.project_ids(position).into_iter().map(|id| self.term(id).clone()).collect()
    }

    pub fn predicates(&self) -> Vec<String> {
        self.project(Position::Predicate).into_iter().filter_map(|t| t.as_iri().map(str::to_owned)).collect()
    }
}
