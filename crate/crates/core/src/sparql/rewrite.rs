use std::collections::{BTreeMap, BTreeSet};

use super::ast::{GraphPattern, Query, TermPattern, TriplePattern};
use crate::rdf::Term;

/// Every constant predicate IRI in the query.
pub fn extract_predicates(query: &Query) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    query.pattern.for_each_pattern(&mut |tp| {
        if let Some(p) = tp.predicate_iri() {
            out.insert(p.to_owned());
        }
    });
    out
}

/// Every constant object term in the query.
pub fn extract_objects(query: &Query) -> BTreeSet<Term> {
    let mut out = BTreeSet::new();
    query.pattern.for_each_pattern(&mut |tp| {
        if let Some(o) = tp.object.as_term() {
            out.insert(o.clone());
        }
    });
    out
}

/// Replaces constant predicates by their image under `substitution`, then
/// simplifies the result. Projection and prefixes are left untouched, and a
/// substitution that changes no predicate returns the query as it was.
pub fn rewrite(query: &Query, substitution: &BTreeMap<String, String>) -> Query {
    let pattern = query.pattern.map_patterns(&mut |tp| match tp.predicate_iri().and_then(|p| substitution.get(p)) {
        Some(image) => TriplePattern::new(tp.subject.clone(), TermPattern::iri(image.clone()), tp.object.clone()),
        None => tp.clone(),
    });
    if pattern == query.pattern {
        return query.clone();
    }
    Query { pattern: simplify(pattern), ..query.clone() }
}

fn union_branches(gp: GraphPattern, out: &mut Vec<GraphPattern>) {
    match gp {
        GraphPattern::Union(a, b) => {
            union_branches(*a, out);
            union_branches(*b, out);
        }
        other => out.push(other),
    }
}

fn simplify_once(gp: GraphPattern) -> GraphPattern {
    match gp {
        GraphPattern::Bgp(ps) => {
            let mut seen = BTreeSet::new();
            GraphPattern::Bgp(ps.into_iter().filter(|tp| seen.insert(tp.clone())).collect())
        }
        GraphPattern::Join(a, b) => GraphPattern::join(simplify_once(*a), simplify_once(*b)),
        GraphPattern::Optional(a, b) => GraphPattern::optional(simplify_once(*a), simplify_once(*b)),
        GraphPattern::Union(a, b) => {
            let (a, b) = (simplify_once(*a), simplify_once(*b));
            if a == b {
                return a;
            }
            let mut branches = Vec::new();
            union_branches(GraphPattern::union(a.clone(), b.clone()), &mut branches);
            let mut seen = BTreeSet::new();
            let distinct: Vec<GraphPattern> = branches.iter().filter(|b| seen.insert(*b)).cloned().collect();
            if distinct.len() == branches.len() {
                GraphPattern::union(a, b)
            } else {
                GraphPattern::union_all(distinct)
            }
        }
    }
}

/// Drops duplicate patterns inside each BGP and duplicate UNION branches,
/// repeated until nothing changes. A union chain that loses a branch is
/// re-associated to the left.
pub fn simplify(mut gp: GraphPattern) -> GraphPattern {
    loop {
        let next = simplify_once(gp.clone());
        if next == gp {
            return gp;
        }
        gp = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::desk;
    use crate::sparql::parse_query;

    fn subst(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(a, b)| (desk::iri(a), desk::iri(b))).collect()
    }

    #[test]
    fn extraction_on_desk_query() {
        let q = parse_query(desk::QUERY).unwrap();
        let preds: Vec<String> = extract_predicates(&q).into_iter().collect();
        assert_eq!(preds, [desk::iri("birthPlace"), desk::iri("country"), desk::iri("nationality")]);
        assert_eq!(extract_objects(&q).into_iter().collect::<Vec<_>>(), [desk::term("Germany")]);

        let q = parse_query("SELECT * WHERE { ?s ?p ?o }").unwrap();
        assert!(extract_predicates(&q).is_empty());
        assert!(extract_objects(&q).is_empty());
    }

    #[test]
    fn desk_query_collapses_to_one_pattern() {
        let q = parse_query(desk::QUERY).unwrap();
        let s = subst(&[("country", "birthPlace"), ("nationality", "birthPlace"), ("birthPlace", "birthPlace")]);
        let r = rewrite(&q, &s);
        assert_eq!(r.projection, q.projection);
        assert_eq!(
            r.pattern,
            GraphPattern::Bgp(vec![TriplePattern::new(
                TermPattern::var("p"),
                TermPattern::iri(desk::iri("birthPlace")),
                TermPattern::iri(desk::iri("Germany")),
            )])
        );
    }

    #[test]
    fn identity_cases() {
        let q = parse_query(desk::QUERY).unwrap();
        assert_eq!(rewrite(&q, &BTreeMap::new()), q);
        assert_eq!(rewrite(&q, &subst(&[("deathPlace", "birthPlace")])), q);

        let twice = parse_query("SELECT ?s WHERE { { ?s <urn:a> ?o } UNION { ?s <urn:a> ?o } }").unwrap();
        assert_eq!(rewrite(&twice, &BTreeMap::new()), twice);
    }

    #[test]
    fn partial_collapse_keeps_other_branches() {
        let q = parse_query(desk::QUERY).unwrap();
        let r = rewrite(&q, &subst(&[("nationality", "country")]));
        assert_eq!(r.pattern.pattern_count(), 2);
    }

    #[test]
    fn duplicate_patterns_in_bgp() {
        let q = parse_query("SELECT * WHERE { ?s <urn:a> ?o . ?s <urn:b> ?o }").unwrap();
        let mut s = BTreeMap::new();
        s.insert("urn:b".to_owned(), "urn:a".to_owned());
        assert_eq!(rewrite(&q, &s).pattern.pattern_count(), 1);
    }
}
