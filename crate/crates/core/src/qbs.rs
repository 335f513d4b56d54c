//! Query-based summarization: extract the part of the graph a query can
//! touch, canonicalize synonym predicates onto one representative, and
//! answer the rewritten query over that summary without losing answers.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};
use std::path::Path;

use crate::embedding::{
    cluster_anchors, generate_walks, similar_predicates, train_skipgram, EmbeddingError, PredicateSimilarity,
    Rdf2VecConfig, SimilaritySet,
};
use crate::gbs::substitution_for;
use crate::rdf::{to_ntriples_string, Graph, GraphBuilder, Term, Triple};
use crate::reasoner::{transitive_closure, ReasonerError, RuleConfig};
use crate::sparql::{evaluate, extract_objects, extract_predicates, parse_query, rewrite, Query, QueryError, Solutions};
use crate::timing::Stopwatch;

#[derive(Debug, thiserror::Error)]
pub enum QbsError {
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Reasoner(#[from] ReasonerError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone)]
pub struct QbsOptions {
    pub threshold: f64,
    /// Score candidates from the whole graph's predicates instead of the subgraph's.
    pub whole_graph_candidates: bool,
    /// Pair witness subjects with the query's constant objects instead of
    /// the witness object. Fabricates triples; for experiments only.
    pub unsafe_query_objects: bool,
    /// Run the reasoner over the source graph first. Off by default.
    pub inference: Option<RuleConfig>,
}

impl Default for QbsOptions {
    fn default() -> Self {
        QbsOptions { threshold: 0.5, whole_graph_candidates: false, unsafe_query_objects: false, inference: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QbsBundle {
    /// Triples whose predicate or object occurs as a constant in the query.
    pub subgraph: Graph,
    /// The subgraph plus canonicalized synonym triples.
    pub augmented: Graph,
    pub rewritten: Query,
    /// Similarity set per query predicate that the similarity could resolve.
    pub similarity: BTreeMap<String, SimilaritySet>,
    pub substitution: BTreeMap<String, String>,
    /// Triples of `augmented` that are not in `subgraph`.
    pub new_triples: usize,
    pub unresolved: BTreeSet<String>,
}

/// All triples whose predicate is a constant query predicate or whose
/// object is a constant query object.
pub fn qbs_extract_subgraph(graph: &Graph, query: &Query) -> Graph {
    let predicates = extract_predicates(query);
    let objects = extract_objects(query);
    if predicates.is_empty() && objects.is_empty() {
        log::warn!("query has no constant predicates or objects; the summary is empty");
        return Graph::empty();
    }
    let mut keep = Vec::new();
    for p in predicates.iter().filter_map(|p| graph.iri_id(p)) {
        keep.extend(graph.match_ids(None, Some(p), None));
    }
    for o in objects.iter().filter_map(|o| graph.id_of(o)) {
        keep.extend(graph.match_ids(None, None, Some(o)));
    }
    graph.derive(keep)
}

pub fn qbs_augment<S: PredicateSimilarity + ?Sized>(
    graph: &Graph,
    subgraph: &Graph,
    query: &Query,
    similarity: &S,
    options: &QbsOptions,
) -> Result<QbsBundle, QbsError> {
    let query_predicates = extract_predicates(query);
    let candidates = if options.whole_graph_candidates { graph.predicates() } else { subgraph.predicates() };
    let mut sets = BTreeMap::new();
    let mut unresolved = BTreeSet::new();
    for p in &query_predicates {
        let pool = candidates.iter().map(String::as_str).chain(query_predicates.iter().map(String::as_str));
        match similar_predicates(similarity, p, pool, options.threshold) {
            Ok(outcome) => {
                unresolved.extend(outcome.unresolved);
                sets.insert(p.clone(), outcome.set);
            }
            Err(EmbeddingError::UnknownPredicate(_)) => {
                log::warn!("no embedding for query predicate {p}; left as is");
                unresolved.insert(p.clone());
            }
            Err(e) => return Err(e.into()),
        }
    }
    let clusters = cluster_anchors(&sets, false);
    let substitution = substitution_for(&clusters);
    let rewritten = rewrite(query, &substitution);

    let query_objects: Vec<Term> = extract_objects(query).into_iter().collect();
    let mut builder = GraphBuilder::new();
    builder.extend(subgraph.triples());
    for cluster in &clusters {
        let representative = Term::iri(cluster.first().expect("clusters are non-empty").clone());
        let witnesses: BTreeSet<&str> =
            cluster.iter().flat_map(|anchor| sets[anchor].members.keys().map(String::as_str)).collect();
        for q in witnesses {
            let Some(q_id) = graph.iri_id(q) else { continue };
            for t in graph.match_ids(None, Some(q_id), None) {
                let subject = graph.term(t.s).clone();
                if options.unsafe_query_objects {
                    for o in &query_objects {
                        builder.insert(Triple { subject: subject.clone(), predicate: representative.clone(), object: o.clone() });
                    }
                } else {
                    let object = graph.term(t.o).clone();
                    builder.insert(Triple { subject, predicate: representative.clone(), object });
                }
            }
        }
    }
    let augmented = builder.freeze();
    let new_triples = augmented.len() - subgraph.len();
    Ok(QbsBundle {
        subgraph: subgraph.clone(),
        augmented,
        rewritten,
        similarity: sets,
        substitution,
        new_triples,
        unresolved,
    })
}

/// Where QBS similarity scores come from.
#[derive(Clone, Copy)]
pub enum SimilaritySource<'a> {
    /// Train skip-gram on walks over the extracted subgraph.
    SubgraphWalks(&'a Rdf2VecConfig),
    /// Train skip-gram on walks over the whole source graph.
    GraphWalks(&'a Rdf2VecConfig),
    Fixed(&'a dyn PredicateSimilarity),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QbsRun {
    pub bundle: QbsBundle,
    pub solutions: Solutions,
    /// Summarization time: extraction, embedding and augmentation.
    pub st_seconds: f64,
    /// Query answering time over the summary.
    pub qa_seconds: f64,
    pub original_triples: usize,
}

/// Parses, summarizes and answers `query_text` over `graph`.
pub fn qbs_run(
    graph: &Graph,
    query_text: &str,
    source: SimilaritySource<'_>,
    options: &QbsOptions,
) -> Result<QbsRun, QbsError> {
    let query = parse_query(query_text)?;
    qbs_run_query(graph, &query, source, options)
}

pub fn qbs_run_query(
    graph: &Graph,
    query: &Query,
    source: SimilaritySource<'_>,
    options: &QbsOptions,
) -> Result<QbsRun, QbsError> {
    let clock = Stopwatch::start();
    let inferred;
    let graph = match &options.inference {
        Some(rules) => {
            inferred = transitive_closure(graph, rules)?;
            &inferred
        }
        None => graph,
    };
    let subgraph = qbs_extract_subgraph(graph, query);
    let bundle = match source {
        SimilaritySource::Fixed(sim) => qbs_augment(graph, &subgraph, query, sim, options)?,
        SimilaritySource::SubgraphWalks(cfg) | SimilaritySource::GraphWalks(cfg) => {
            let walk_graph = if matches!(source, SimilaritySource::SubgraphWalks(_)) { &subgraph } else { graph };
            let corpus = generate_walks(walk_graph, &cfg.walks);
            if corpus.is_empty() {
                qbs_augment(graph, &subgraph, query, &crate::embedding::ClusterSimilarity::default(), options)?
            } else {
                let store = train_skipgram(&corpus, &cfg.train)?;
                qbs_augment(graph, &subgraph, query, &store, options)?
            }
        }
    };
    let st_seconds = clock.seconds();
    let clock = Stopwatch::start();
    let solutions = evaluate(&bundle.augmented, &bundle.rewritten);
    let qa_seconds = clock.seconds();
    Ok(QbsRun { bundle, solutions, st_seconds, qa_seconds, original_triples: graph.len() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LosslessReport {
    pub equal: bool,
    pub original_answers: usize,
    pub summary_answers: usize,
    /// Distinct answers of the original query missing from the summary.
    pub missing: Vec<Vec<Option<Term>>>,
    /// Distinct summary answers the original query does not produce.
    pub extra: Vec<Vec<Option<Term>>>,
}

/// Compares distinct answers of `query` over `graph` with distinct answers
/// of the bundle's rewritten query over its augmented graph.
pub fn verify_lossless(graph: &Graph, query: &Query, bundle: &QbsBundle) -> LosslessReport {
    let original = evaluate(graph, &query.clone().with_distinct(true)).distinct();
    let summary = evaluate(&bundle.augmented, &bundle.rewritten.clone().with_distinct(true)).distinct();
    let missing: Vec<_> = original.difference(&summary).cloned().collect();
    let extra: Vec<_> = summary.difference(&original).cloned().collect();
    LosslessReport {
        equal: missing.is_empty() && extra.is_empty(),
        original_answers: original.len(),
        summary_answers: summary.len(),
        missing,
        extra,
    }
}

impl QbsBundle {
    /// Writes `g.nt`, `summary.nt`, `query.rq` and `similarity.tsv` into `dir`.
    pub fn dump(&self, dir: &Path) -> io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("g.nt"), to_ntriples_string(&self.subgraph))?;
        std::fs::write(dir.join("summary.nt"), to_ntriples_string(&self.augmented))?;
        std::fs::write(dir.join("query.rq"), self.rewritten.to_string())?;
        let mut out = io::BufWriter::new(std::fs::File::create(dir.join("similarity.tsv"))?);
        self.write_similarity(&mut out)?;
        out.flush()
    }

    /// `query-predicate \t member \t score` per similarity-set member.
    pub fn write_similarity<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (anchor, set) in &self.similarity {
            for (member, score) in &set.members {
                writeln!(out, "{anchor}\t{member}\t{score}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::desk;
    use crate::embedding::{load_vectors_str, ClusterSimilarity};

    fn desk_clusters() -> ClusterSimilarity {
        ClusterSimilarity::new(vec![vec![desk::iri("birthPlace"), desk::iri("country"), desk::iri("nationality")]])
    }

    #[test]
    fn desk_subgraph() {
        let q = parse_query(desk::QUERY).unwrap();
        let g = qbs_extract_subgraph(&desk::graph(), &q);
        assert_eq!(g.len(), 4);
        assert!(g.predicates().iter().all(|p| !p.ends_with("deathPlace") && !p.ends_with("type")));
    }

    #[test]
    fn constant_free_or_absent_queries_give_empty_subgraph() {
        let g = desk::graph();
        let q = parse_query("SELECT * WHERE { ?s ?p ?o }").unwrap();
        assert!(qbs_extract_subgraph(&g, &q).is_empty());
        let q = parse_query("SELECT * WHERE { ?s <urn:absent> <urn:nowhere> }").unwrap();
        assert!(qbs_extract_subgraph(&g, &q).is_empty());
    }

    #[test]
    fn desk_augmentation() {
        let graph = desk::graph();
        let q = parse_query(desk::QUERY).unwrap();
        let g = qbs_extract_subgraph(&graph, &q);
        let bundle = qbs_augment(&graph, &g, &q, &desk_clusters(), &QbsOptions::default()).unwrap();
        assert_eq!(bundle.new_triples, 2);
        let bp = desk::iri("birthPlace");
        let germany = desk::iri("Germany");
        assert!(bundle.augmented.contains(&Triple::iris(&desk::iri("Anna"), &bp, &germany)));
        assert!(bundle.augmented.contains(&Triple::iris(&desk::iri("Markus"), &bp, &germany)));
        assert_eq!(bundle.rewritten.pattern.pattern_count(), 1);
        assert!(verify_lossless(&graph, &q, &bundle).equal);
    }

    #[test]
    fn word_vectors_give_the_same_summary() {
        let graph = desk::graph();
        let vectors = load_vectors_str(desk::WORD_VECTORS).unwrap();
        let run = qbs_run(&graph, desk::QUERY, SimilaritySource::Fixed(&vectors), &QbsOptions::default()).unwrap();
        assert_eq!(run.solutions.distinct().len(), 4);
        assert_eq!(run.bundle.new_triples, 2);
    }

    #[test]
    fn no_synonyms_means_identity() {
        let graph = desk::graph();
        let q = parse_query(desk::QUERY).unwrap();
        let g = qbs_extract_subgraph(&graph, &q);
        let bundle = qbs_augment(&graph, &g, &q, &ClusterSimilarity::default(), &QbsOptions::default()).unwrap();
        assert_eq!(bundle.new_triples, 0);
        assert_eq!(bundle.rewritten, q);
        assert!(verify_lossless(&graph, &q, &bundle).equal);
    }

    #[test]
    fn variable_object_keeps_witness_objects() {
        let graph = desk::graph();
        let q = parse_query(
            "PREFIX : <http://example.org/> SELECT ?s ?o WHERE { { ?s :birthPlace ?o } UNION { ?s :deathPlace ?o } }",
        )
        .unwrap();
        let sim = ClusterSimilarity::new(vec![vec![desk::iri("birthPlace"), desk::iri("deathPlace")]]);
        let run = qbs_run_query(&graph, &q, SimilaritySource::Fixed(&sim), &QbsOptions::default()).unwrap();
        assert!(run.bundle.augmented.contains(&Triple::iris(&desk::iri("Markus"), &desk::iri("birthPlace"), &desk::iri("France"))));
        assert!(verify_lossless(&graph, &q, &run.bundle).equal);
    }

    #[test]
    fn literal_reading_fabricates_answers() {
        let graph = desk::graph();
        let q = parse_query(
            "PREFIX : <http://example.org/> SELECT ?s WHERE { { ?s :birthPlace :Germany } UNION { ?s :deathPlace :Germany } }",
        )
        .unwrap();
        let sim = ClusterSimilarity::new(vec![vec![desk::iri("birthPlace"), desk::iri("deathPlace")]]);
        let options = QbsOptions { unsafe_query_objects: true, ..QbsOptions::default() };
        let run = qbs_run_query(&graph, &q, SimilaritySource::Fixed(&sim), &options).unwrap();
        let report = verify_lossless(&graph, &q, &run.bundle);
        assert!(!report.equal);
        assert_eq!(report.extra, vec![vec![Some(desk::term("Markus"))]]);
    }

    #[test]
    fn corrupted_bundle_is_detected() {
        let graph = desk::graph();
        let q = parse_query(desk::QUERY).unwrap();
        let g = qbs_extract_subgraph(&graph, &q);
        let mut bundle = qbs_augment(&graph, &g, &q, &desk_clusters(), &QbsOptions::default()).unwrap();
        let anna = bundle.augmented.id_of(&desk::term("Anna")).unwrap();
        bundle.augmented = bundle.augmented.filter(|t| t.s != anna);
        let report = verify_lossless(&graph, &q, &bundle);
        assert!(!report.equal);
        assert_eq!(report.missing, vec![vec![Some(desk::term("Anna"))]]);
    }

    #[test]
    fn empty_graph_run() {
        let run = qbs_run(&Graph::empty(), desk::QUERY, SimilaritySource::Fixed(&desk_clusters()), &QbsOptions::default())
            .unwrap();
        assert!(run.solutions.is_empty());
        assert_eq!(run.bundle.new_triples, 0);
    }

    #[test]
    fn learned_similarity_on_desk() {
        let run = qbs_run(
            &desk::graph(),
            desk::QUERY,
            SimilaritySource::SubgraphWalks(&Rdf2VecConfig::default()),
            &QbsOptions::default(),
        )
        .unwrap();
        assert!(verify_lossless(&desk::graph(), &parse_query(desk::QUERY).unwrap(), &run.bundle).equal);
    }
}
