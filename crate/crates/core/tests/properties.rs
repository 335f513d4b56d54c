mod common;

use std::collections::{BTreeMap, BTreeSet};

use graph_squash::bench::{generate_queries, generate_synthetic_graph, summarization_ratio, GeneratorSpec, QueryGenSpec};
use graph_squash::gbs::{gbs_answer, gbs_summarize, GbsOptions};
use graph_squash::qbs::{qbs_run_query, QbsOptions, SimilaritySource};
use graph_squash::rdf::{parse_ntriples_str, to_ntriples_string, LiteralPolicy, ParseOptions, Triple};
use graph_squash::reasoner::transitive_closure;
use graph_squash::sparql::{evaluate, extract_predicates, parse_query, rewrite, GraphPattern, Query};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_case(seed: u64) -> (graph_squash::rdf::Graph, Query) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = common::random_small_graph(&mut rng, 60);
    let query = common::random_query(&mut rng, &graph, 4);
    (graph, query)
}

fn spec_strategy() -> impl Strategy<Value = GeneratorSpec> {
    (4usize..10, 0usize..3, 10usize..60, 2usize..12, any::<u64>()).prop_map(|(predicates, n, per, pool, seed)| {
        GeneratorSpec {
            entities: 60 + 10 * predicates,
            predicates,
            clusters: vec![2; n.min(predicates / 2)],
            triples_per_predicate: per,
            object_pool: pool,
            seed,
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn display_then_parse_is_identity(seed in any::<u64>()) {
        let (_, q) = small_case(seed);
        let text = q.to_string();
        prop_assert_eq!(parse_query(&text).unwrap(), q, "{}", text);
    }

    #[test]
    fn empty_substitution_leaves_queries_alone(seed in any::<u64>()) {
        let (_, q) = small_case(seed);
        prop_assert_eq!(rewrite(&q, &BTreeMap::new()), q);
    }

    #[test]
    fn rewriting_keeps_projection_and_modifiers(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let (_, q) = small_case(seed);
        let predicates: Vec<String> = extract_predicates(&q).into_iter().collect();
        prop_assume!(!predicates.is_empty());
        let target = predicates[pick.index(predicates.len())].clone();
        let substitution: BTreeMap<String, String> = predicates.iter().map(|p| (p.clone(), target.clone())).collect();
        let r = rewrite(&q, &substitution);
        prop_assert_eq!(r.projected_variables(), q.projected_variables());
        prop_assert_eq!(r.distinct, q.distinct);
        prop_assert!(r.pattern.pattern_count() <= q.pattern.pattern_count());
        prop_assert!(extract_predicates(&r).iter().all(|p| p == &target));
    }

    #[test]
    fn distinct_collapses_the_bag(seed in any::<u64>()) {
        let (g, q) = small_case(seed);
        let bag = evaluate(&g, &q.clone().with_distinct(false));
        let set = evaluate(&g, &q.with_distinct(true));
        let collapsed: Vec<_> = bag.distinct().into_iter().collect();
        prop_assert_eq!(set.rows, collapsed);
    }

    #[test]
    fn ntriples_round_trip(seed in any::<u64>()) {
        let (g, _) = small_case(seed);
        let again = parse_ntriples_str(&to_ntriples_string(&g), ParseOptions::default()).unwrap();
        prop_assert_eq!(to_ntriples_string(&again), to_ntriples_string(&g));
    }

    #[test]
    fn closure_is_idempotent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (g, _, _) = common::random_dag(&mut rng, 30);
        let rules = graph_squash::reasoner::RuleConfig::default().unbounded();
        let once = transitive_closure(&g, &rules).unwrap();
        let twice = transitive_closure(&once, &rules).unwrap();
        prop_assert_eq!(to_ntriples_string(&once), to_ntriples_string(&twice));
        prop_assert!(g.triples().all(|t| once.contains(&t)));
    }

    #[test]
    fn gbs_summary_is_compact_and_sound(spec in spec_strategy(), keep in any::<bool>()) {
        let (g, _) = generate_synthetic_graph(&spec).unwrap();
        let options = GbsOptions { keep_singletons: keep, inference: None, literals: LiteralPolicy::Reject };
        let summary = gbs_summarize(&g, &options).unwrap();
        prop_assert!(summary.graph.len() <= g.len());
        let groups: BTreeSet<(String, String)> =
            g.triples().map(|t| (t.predicate.to_string(), t.object.to_string())).collect();
        prop_assert_eq!(summary.graph.len() + summary.dropped_singletons, groups.len());
        for node in &summary.super_nodes {
            prop_assert!(node.members.len() >= 2);
            for m in &node.members {
                let t = Triple::new(m.clone(), graph_squash::rdf::Term::iri(node.predicate.clone()), node.object.clone()).unwrap();
                prop_assert!(g.contains(&t));
            }
        }
        let everything = parse_query("SELECT * WHERE { ?s ?p ?o }").unwrap();
        let expanded = gbs_answer(&summary, &everything);
        prop_assert!(expanded.rows.len() <= g.len());
        prop_assert!(expanded.distinct().is_subset(&evaluate(&g, &everything).distinct()));
        let sr = summarization_ratio(g.len(), summary.graph.len()).unwrap();
        prop_assert!((0.0..=100.0).contains(&sr));
    }

    #[test]
    fn qbs_additions_have_witnesses(spec in spec_strategy(), qseed in any::<u64>()) {
        let (g, planted) = generate_synthetic_graph(&spec).unwrap();
        let queries = generate_queries(&g, &planted, &QueryGenSpec { count: 3, seed: qseed, ..QueryGenSpec::default() });
        for q in &queries {
            let run = qbs_run_query(&g, q, SimilaritySource::Fixed(&planted), &QbsOptions::default()).unwrap();
            let b = &run.bundle;
            prop_assert!(b.subgraph.triples().all(|t| b.augmented.contains(&t)));
            prop_assert_eq!(b.new_triples, b.augmented.len() - b.subgraph.len());
            for t in b.augmented.triples().filter(|t| !b.subgraph.contains(t)) {
                let canonical = t.predicate.as_iri().unwrap();
                let witnessed = b.substitution.iter().any(|(q, r)| {
                    r == canonical
                        && g.contains(&Triple::new(t.subject.clone(), graph_squash::rdf::Term::iri(q.clone()), t.object.clone()).unwrap())
                });
                prop_assert!(witnessed, "no witness for {:?}", t);
            }
            let direct = evaluate(&g, &q.clone().with_distinct(true)).distinct();
            let summary = evaluate(&b.augmented, &b.rewritten.clone().with_distinct(true)).distinct();
            prop_assert_eq!(summary, direct);
        }
    }

    #[test]
    fn generation_is_deterministic(spec in spec_strategy()) {
        let (a, ca) = generate_synthetic_graph(&spec).unwrap();
        let (b, cb) = generate_synthetic_graph(&spec).unwrap();
        prop_assert_eq!(to_ntriples_string(&a), to_ntriples_string(&b));
        prop_assert_eq!(ca.clusters(), cb.clusters());
        let qs = QueryGenSpec { count: 4, seed: spec.seed, ..QueryGenSpec::default() };
        let qa: Vec<String> = generate_queries(&a, &ca, &qs).iter().map(ToString::to_string).collect();
        let qb: Vec<String> = generate_queries(&b, &cb, &qs).iter().map(ToString::to_string).collect();
        prop_assert_eq!(qa, qb);
    }

    #[test]
    fn planted_rewrite_reaches_one_predicate_per_cluster(spec in spec_strategy(), qseed in any::<u64>()) {
        let (g, planted) = generate_synthetic_graph(&spec).unwrap();
        let q = generate_queries(&g, &planted, &QueryGenSpec { count: 1, seed: qseed, ..QueryGenSpec::default() })
            .pop()
            .unwrap();
        let run = qbs_run_query(&g, &q, SimilaritySource::Fixed(&planted), &QbsOptions::default()).unwrap();
        let used = extract_predicates(&run.bundle.rewritten);
        let clusters: BTreeSet<Vec<String>> =
            used.iter().map(|p| planted.cluster_of(p).map(<[String]>::to_vec).unwrap_or_else(|| vec![p.clone()])).collect();
        prop_assert_eq!(clusters.len(), used.len());
    }
}

#[test]
fn unions_of_one_pattern_collapse() {
    let q = parse_query("SELECT ?s WHERE { { ?s <urn:p> ?o } UNION { ?s <urn:q> ?o } }").unwrap();
    let substitution = BTreeMap::from([("urn:q".to_owned(), "urn:p".to_owned())]);
    let r = rewrite(&q, &substitution);
    assert!(matches!(r.pattern, GraphPattern::Bgp(ref ps) if ps.len() == 1));
}
