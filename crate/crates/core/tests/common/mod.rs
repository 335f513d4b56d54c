//! Independent reference implementations and random case generators shared
//! by the integration suites.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use graph_squash::rdf::{Graph, Term, Triple, RDFS_SUBCLASS_OF, RDF_TYPE};
use graph_squash::sparql::{GraphPattern, Projection, Query, TermPattern, TriplePattern, Variable};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Binding = BTreeMap<String, Term>;

fn compatible(a: &Binding, b: &Binding) -> bool {
    a.iter().all(|(k, v)| b.get(k).is_none_or(|w| w == v))
}

fn merged(a: &Binding, b: &Binding) -> Binding {
    let mut m = a.clone();
    m.extend(b.iter().map(|(k, v)| (k.clone(), v.clone())));
    m
}

fn bgp_variables(patterns: &[TriplePattern]) -> Vec<String> {
    let mut vars = BTreeSet::new();
    for tp in patterns {
        for pos in tp.positions() {
            if let TermPattern::Variable(v) = pos {
                vars.insert(v.name().to_owned());
            }
        }
    }
    vars.into_iter().collect()
}

fn instantiate(pos: &TermPattern, binding: &Binding) -> Term {
    match pos {
        TermPattern::Term(t) => t.clone(),
        TermPattern::Variable(v) => binding[v.name()].clone(),
    }
}

/// Every assignment of the BGP's variables to graph terms under which all
/// patterns are graph triples.
fn brute_bgp(graph: &Graph, triples: &BTreeSet<(Term, Term, Term)>, patterns: &[TriplePattern]) -> Vec<Binding> {
    let vars = bgp_variables(patterns);
    let terms = graph.terms();
    let mut out = Vec::new();
    let mut idx = vec![0usize; vars.len()];
    if !vars.is_empty() && terms.is_empty() {
        return out;
    }
    loop {
        let binding: Binding = vars.iter().zip(&idx).map(|(v, &i)| (v.clone(), terms[i].clone())).collect();
        let ok = patterns.iter().all(|tp| {
            let key = (instantiate(&tp.subject, &binding), instantiate(&tp.predicate, &binding), instantiate(&tp.object, &binding));
            triples.contains(&key)
        });
        if ok {
            out.push(binding);
        }
        // Odometer increment over all assignments.
        let mut k = 0;
        loop {
            if k == idx.len() {
                return out;
            }
            idx[k] += 1;
            if idx[k] < terms.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn brute_pattern(graph: &Graph, triples: &BTreeSet<(Term, Term, Term)>, gp: &GraphPattern) -> Vec<Binding> {
    match gp {
        GraphPattern::Bgp(ps) => brute_bgp(graph, triples, ps),
        GraphPattern::Union(a, b) => {
            let mut out = brute_pattern(graph, triples, a);
            out.extend(brute_pattern(graph, triples, b));
            out
        }
        GraphPattern::Join(a, b) => {
            let (l, r) = (brute_pattern(graph, triples, a), brute_pattern(graph, triples, b));
            let mut out = Vec::new();
            for x in &l {
                for y in &r {
                    if compatible(x, y) {
                        out.push(merged(x, y));
                    }
                }
            }
            out
        }
        GraphPattern::Optional(a, b) => {
            let (l, r) = (brute_pattern(graph, triples, a), brute_pattern(graph, triples, b));
            let mut out = Vec::new();
            for x in &l {
                let mut any = false;
                for y in &r {
                    if compatible(x, y) {
                        out.push(merged(x, y));
                        any = true;
                    }
                }
                if !any {
                    out.push(x.clone());
                }
            }
            out
        }
    }
}

/// Reference evaluation: sorted rows over the projected variables.
pub fn brute_force(graph: &Graph, query: &Query) -> Vec<Vec<Option<Term>>> {
    let triples: BTreeSet<(Term, Term, Term)> =
        graph.triples().map(|t| (t.subject, t.predicate, t.object)).collect();
    let vars: Vec<Variable> = match &query.projection {
        Projection::All => query.pattern.variables(),
        Projection::Variables(vs) => vs.clone(),
    };
    let mut rows: Vec<Vec<Option<Term>>> = brute_pattern(graph, &triples, &query.pattern)
        .into_iter()
        .map(|b| vars.iter().map(|v| b.get(v.name()).cloned()).collect())
        .collect();
    rows.sort();
    if query.distinct {
        rows.dedup();
    }
    rows
}

/// A random graph over at most `max_terms` distinct terms.
pub fn random_small_graph(rng: &mut ChaCha8Rng, max_terms: usize) -> Graph {
    let entities = rng.gen_range(1..=10);
    let predicates = rng.gen_range(1..=4);
    let n = rng.gen_range(0..=25);
    let mut triples = Vec::new();
    for _ in 0..n {
        let s = format!("urn:e{}", rng.gen_range(0..entities));
        let p = format!("urn:p{}", rng.gen_range(0..predicates));
        let object = if rng.gen_bool(0.1) {
            Term::literal(format!("v{}", rng.gen_range(0..3)))
        } else {
            Term::iri(format!("urn:e{}", rng.gen_range(0..entities)))
        };
        triples.push(Triple::new(Term::iri(s), Term::iri(p), object).unwrap());
    }
    let g: Graph = triples.into_iter().collect();
    assert!(g.term_count() <= max_terms);
    g
}

fn random_position(rng: &mut ChaCha8Rng, graph: &Graph, vars: &[&str], allow_literal: bool) -> TermPattern {
    if graph.term_count() > 0 && rng.gen_bool(0.35) {
        let t = graph.terms().choose(rng).unwrap().clone();
        if allow_literal || !t.is_literal() {
            return TermPattern::Term(t);
        }
    }
    if rng.gen_bool(0.05) {
        return TermPattern::iri("urn:absent");
    }
    TermPattern::var(vars.choose(rng).unwrap())
}

pub fn random_triple_pattern(rng: &mut ChaCha8Rng, graph: &Graph, vars: &[&str]) -> TriplePattern {
    let subject = random_position(rng, graph, vars, false);
    let predicate = if rng.gen_bool(0.7) {
        match graph.predicates().choose(rng) {
            Some(p) => TermPattern::iri(p.clone()),
            None => TermPattern::var(vars.choose(rng).unwrap()),
        }
    } else {
        TermPattern::var(vars.choose(rng).unwrap())
    };
    let object = random_position(rng, graph, vars, true);
    TriplePattern::new(subject, predicate, object)
}

fn random_pattern_tree(rng: &mut ChaCha8Rng, graph: &Graph, vars: &[&str], budget: usize) -> GraphPattern {
    if budget == 1 || rng.gen_bool(0.4) {
        let n = rng.gen_range(1..=budget);
        return GraphPattern::Bgp((0..n).map(|_| random_triple_pattern(rng, graph, vars)).collect());
    }
    let left = rng.gen_range(1..budget);
    let a = random_pattern_tree(rng, graph, vars, left);
    let b = random_pattern_tree(rng, graph, vars, budget - left);
    match rng.gen_range(0..3) {
        0 => GraphPattern::join(a, b),
        1 => GraphPattern::union(a, b),
        _ => GraphPattern::optional(a, b),
    }
}

/// A random query of at most `max_patterns` triple patterns over three variables.
pub fn random_query(rng: &mut ChaCha8Rng, graph: &Graph, max_patterns: usize) -> Query {
    let vars = ["x", "y", "z"];
    let budget = rng.gen_range(1..=max_patterns);
    let pattern = random_pattern_tree(rng, graph, &vars, budget);
    let body = pattern.variables();
    let projection = if body.is_empty() || rng.gen_bool(0.5) {
        Projection::All
    } else {
        Projection::Variables(body.iter().filter(|_| rng.gen_bool(0.7)).cloned().collect::<Vec<_>>())
    };
    let projection = match projection {
        Projection::Variables(v) if v.is_empty() => Projection::All,
        p => p,
    };
    Query { prefixes: Vec::new(), projection, distinct: rng.gen_bool(0.3), pattern }
}

/// A random DAG over `n` class nodes as `rdfs:subClassOf` edges (edges go
/// from lower to higher index), plus a few typed instances.
pub type Edges = Vec<(usize, usize)>;

pub fn random_dag(rng: &mut ChaCha8Rng, n: usize) -> (Graph, Edges, Edges) {
    let density = rng.gen_range(0.5..3.0) / n as f64;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density.min(1.0)) {
                edges.push((i, j));
            }
        }
    }
    let instances: Vec<(usize, usize)> = (0..rng.gen_range(0..10)).map(|k| (k, rng.gen_range(0..n))).collect();
    let mut triples: Vec<Triple> =
        edges.iter().map(|&(a, b)| Triple::iris(&class(a), RDFS_SUBCLASS_OF, &class(b))).collect();
    triples.extend(instances.iter().map(|&(k, c)| Triple::iris(&instance(k), RDF_TYPE, &class(c))));
    (triples.into_iter().collect(), edges, instances)
}

pub fn class(i: usize) -> String {
    format!("urn:class{i}")
}

pub fn instance(i: usize) -> String {
    format!("urn:thing{i}")
}

/// Expected closure: reachability over subclass edges plus type propagation.
pub fn reachability_closure(n: usize, edges: &[(usize, usize)], instances: &[(usize, usize)]) -> BTreeSet<Triple> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
    }
    let reach = |start: usize| -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut stack = adj[start].clone();
        while let Some(x) = stack.pop() {
            if seen.insert(x) {
                stack.extend(adj[x].iter().copied());
            }
        }
        seen
    };
    let mut out = BTreeSet::new();
    for a in 0..n {
        for b in reach(a) {
            out.insert(Triple::iris(&class(a), RDFS_SUBCLASS_OF, &class(b)));
        }
    }
    for &(k, c) in instances {
        out.insert(Triple::iris(&instance(k), RDF_TYPE, &class(c)));
        for d in reach(c) {
            out.insert(Triple::iris(&instance(k), RDF_TYPE, &class(d)));
        }
    }
    out
}
