//! Grouping-based summarization: subjects sharing a `(predicate, object)`
//! pair collapse into one super-node, and queries are rewritten onto a
//! representative predicate before running over the summary.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, BufRead, Write};

use sha2::{Digest, Sha256};

use crate::embedding::{cluster_anchors, similar_predicates, EmbeddingError, PredicateSimilarity, SimilaritySet};
use crate::rdf::{Graph, GraphBuilder, LiteralPolicy, Term, TermId, Triple};
use crate::reasoner::{transitive_closure, ReasonerError, RuleConfig};
use crate::sparql::{evaluate, extract_predicates, rewrite, Query, Solutions};

pub const SUPER_NODE_PREFIX: &str = "urn:sn:";

#[derive(Debug, thiserror::Error)]
pub enum GbsError {
    #[error("graph contains {0} literal-valued triples")]
    LiteralPresent(usize),
    #[error(transparent)]
    Reasoner(#[from] ReasonerError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error("membership line {line}: {message}")]
    Membership { line: usize, message: String },
    #[error("answer expansion exceeds {0} rows")]
    ExpansionLimit(usize),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperNode {
    pub id: String,
    pub members: Vec<Term>,
    pub predicate: String,
    pub object: Term,
}

#[derive(Debug, Clone)]
pub struct GbsOptions {
    pub keep_singletons: bool,
    /// `None` summarizes the graph as given.
    pub inference: Option<RuleConfig>,
    pub literals: LiteralPolicy,
}

impl Default for GbsOptions {
    fn default() -> Self {
        GbsOptions { keep_singletons: false, inference: Some(RuleConfig::default()), literals: LiteralPolicy::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbsSummary {
    pub graph: Graph,
    /// Super-node IRI to its sorted members.
    pub membership: BTreeMap<String, Vec<Term>>,
    pub super_nodes: Vec<SuperNode>,
    pub dropped_singletons: usize,
    pub inferred_triples: usize,
}

/// Deterministic super-node IRI for a member set.
pub fn super_node_id(members: &[Term]) -> String {
    let mut sorted: Vec<String> = members.iter().map(ToString::to_string).collect();
    sorted.sort();
    let digest = Sha256::digest(sorted.join("\n").as_bytes());
    let hex: String = digest[..16].iter().map(|b| format!("{b:02x}")).collect();
    format!("{SUPER_NODE_PREFIX}{hex}")
}

pub fn gbs_summarize(graph: &Graph, options: &GbsOptions) -> Result<GbsSummary, GbsError> {
    let graph = options.literals.apply(graph).map_err(GbsError::LiteralPresent)?;
    let inferred = match &options.inference {
        Some(rules) => transitive_closure(&graph, rules)?,
        None => graph.into_owned(),
    };

    let mut groups: BTreeMap<(TermId, TermId), Vec<TermId>> = BTreeMap::new();
    for t in inferred.id_triples() {
        groups.entry((t.p, t.o)).or_default().push(t.s);
    }

    let mut builder = GraphBuilder::new();
    let mut membership = BTreeMap::new();
    let mut super_nodes = Vec::new();
    let mut dropped = 0;
    for ((p, o), subjects) in groups {
        let predicate = inferred.term(p).clone();
        let object = inferred.term(o).clone();
        if subjects.len() == 1 {
            if options.keep_singletons {
                builder.insert(Triple { subject: inferred.term(subjects[0]).clone(), predicate, object });
            } else {
                dropped += 1;
            }
            continue;
        }
        let members: Vec<Term> = subjects.iter().map(|&s| inferred.term(s).clone()).collect();
        let id = super_node_id(&members);
        builder.insert(Triple { subject: Term::iri(id.clone()), predicate: predicate.clone(), object: object.clone() });
        membership.insert(id.clone(), members.clone());
        super_nodes.push(SuperNode { id, members, predicate: predicate.as_iri().unwrap_or_default().to_owned(), object });
    }
    Ok(GbsSummary {
        graph: builder.freeze(),
        membership,
        super_nodes,
        dropped_singletons: dropped,
        inferred_triples: inferred.len(),
    })
}

/// Rewrites `query` so that each cluster of mutually similar query
/// predicates is replaced by its lexicographically smallest member.
/// Predicates the similarity cannot resolve stay as they are.
pub fn gbs_rewrite<S: PredicateSimilarity + ?Sized>(
    query: &Query,
    similarity: &S,
    threshold: f64,
) -> Result<(Query, BTreeMap<String, SimilaritySet>), GbsError> {
    let predicates = extract_predicates(query);
    let mut sets = BTreeMap::new();
    for p in &predicates {
        match similar_predicates(similarity, p, predicates.iter().map(String::as_str), threshold) {
            Ok(outcome) => {
                sets.insert(p.clone(), outcome.set);
            }
            Err(EmbeddingError::UnknownPredicate(_)) => log::warn!("no embedding for query predicate {p}; left as is"),
            Err(e) => return Err(e.into()),
        }
    }
    let substitution = substitution_for(&cluster_anchors(&sets, true));
    Ok((rewrite(query, &substitution), sets))
}

pub(crate) fn substitution_for(clusters: &[BTreeSet<String>]) -> BTreeMap<String, String> {
    let mut substitution = BTreeMap::new();
    for cluster in clusters {
        let representative = cluster.first().expect("clusters are non-empty");
        for p in cluster {
            substitution.insert(p.clone(), representative.clone());
        }
    }
    substitution
}

/// Evaluates an already rewritten query over the summary and expands every
/// super-node binding into one solution per member.
pub fn gbs_answer(summary: &GbsSummary, query: &Query) -> Solutions {
    let raw = evaluate(&summary.graph, query);
    let mut rows = Vec::new();
    for row in &raw.rows {
        expand_row(summary, row, |r| {
            rows.push(r);
            true
        });
    }
    rows.sort();
    if query.distinct {
        rows.dedup();
    }
    Solutions { variables: raw.variables, rows }
}

/// Number of rows [`gbs_answer`] would produce, computed without expanding.
pub fn gbs_answer_count(summary: &GbsSummary, query: &Query) -> u128 {
    if query.distinct {
        return gbs_answer(summary, query).len() as u128;
    }
    let raw = evaluate(&summary.graph, query);
    raw.rows
        .iter()
        .map(|row| row.iter().map(|cell| members_of(summary, cell).map_or(1, |m| m.len() as u128)).product::<u128>())
        .sum()
}

/// Distinct expanded answers, giving up once more than `limit` distinct rows
/// have been produced.
pub fn gbs_distinct_answers(
    summary: &GbsSummary,
    query: &Query,
    limit: usize,
) -> Result<BTreeSet<Vec<Option<Term>>>, GbsError> {
    let raw = evaluate(&summary.graph, &query.clone().with_distinct(true));
    let mut out = BTreeSet::new();
    for row in &raw.rows {
        let complete = expand_row(summary, row, |r| {
            out.insert(r);
            out.len() <= limit
        });
        if !complete {
            return Err(GbsError::ExpansionLimit(limit));
        }
    }
    Ok(out)
}

fn members_of<'a>(summary: &'a GbsSummary, cell: &Option<Term>) -> Option<&'a Vec<Term>> {
    match cell {
        Some(Term::Iri(iri)) => summary.membership.get(iri.as_str()),
        _ => None,
    }
}

/// Feeds every member combination of `row` to `sink`; stops early and
/// returns `false` when `sink` does.
fn expand_row(summary: &GbsSummary, row: &[Option<Term>], mut sink: impl FnMut(Vec<Option<Term>>) -> bool) -> bool {
    let choices: Vec<Option<&Vec<Term>>> = row.iter().map(|c| members_of(summary, c)).collect();
    if choices.iter().flatten().any(|m| m.is_empty()) {
        return true;
    }
    let mut idx = vec![0usize; row.len()];
    loop {
        let current = row
            .iter()
            .zip(&choices)
            .zip(&idx)
            .map(|((cell, members), &i)| match members {
                Some(m) => Some(m[i].clone()),
                None => cell.clone(),
            })
            .collect();
        if !sink(current) {
            return false;
        }
        let mut k = row.len();
        loop {
            if k == 0 {
                return true;
            }
            k -= 1;
            if let Some(m) = choices[k] {
                idx[k] += 1;
                if idx[k] < m.len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
}

/// One line per super-node: id, a tab, then members in N-Triples term
/// syntax separated by commas.
pub fn write_membership<W: Write>(membership: &BTreeMap<String, Vec<Term>>, mut out: W) -> io::Result<()> {
    for (id, members) in membership {
        let cells: Vec<String> = members.iter().map(ToString::to_string).collect();
        writeln!(out, "{id}\t{}", cells.join(","))?;
    }
    Ok(())
}

fn parse_members(text: &str) -> Result<Vec<Term>, String> {
    let mut members = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let (term, tail) = if let Some(body) = rest.strip_prefix('<') {
            let end = body.find('>').ok_or("unterminated IRI")?;
            (Term::try_iri(&body[..end]).map_err(|e| e.to_string())?, &body[end + 1..])
        } else if let Some(body) = rest.strip_prefix("_:") {
            let end = body.find(',').unwrap_or(body.len());
            (Term::blank(&body[..end]).map_err(|e| e.to_string())?, &body[end..])
        } else {
            return Err(format!("expected a member term at {rest:?}"));
        };
        members.push(term);
        rest = match tail.strip_prefix(',') {
            Some(t) => t,
            None if tail.is_empty() => tail,
            None => return Err(format!("expected ',' before {tail:?}")),
        };
    }
    if members.is_empty() {
        return Err("super-node without members".into());
    }
    Ok(members)
}

pub fn read_membership<R: BufRead>(reader: R) -> Result<BTreeMap<String, Vec<Term>>, GbsError> {
    let mut out = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| GbsError::Membership { line: i + 1, message };
        let (id, members) = line.split_once('\t').ok_or_else(|| err("missing tab".into()))?;
        out.insert(id.to_owned(), parse_members(members).map_err(err)?);
    }
    Ok(out)
}

impl GbsSummary {
    /// Rebuilds a summary from its serialized graph and membership map.
    pub fn from_parts(graph: Graph, membership: BTreeMap<String, Vec<Term>>) -> Self {
        GbsSummary { graph, membership, super_nodes: Vec::new(), dropped_singletons: 0, inferred_triples: 0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::desk;
    use crate::embedding::{load_vectors_str, ClusterSimilarity};
    use crate::rdf::RDF_TYPE;
    use crate::sparql::parse_query;

    fn keep() -> GbsOptions {
        GbsOptions { keep_singletons: true, ..GbsOptions::default() }
    }

    #[test]
    fn desk_summary_with_singletons() {
        let s = gbs_summarize(&desk::graph(), &keep()).unwrap();
        assert_eq!(s.inferred_triples, 8);
        // Eight inferred triples, one pair of which merges into a super-node.
        assert_eq!(s.graph.len(), 7);
        assert_eq!(s.membership.len(), 1);
        let (id, members) = s.membership.iter().next().unwrap();
        assert_eq!(members, &vec![desk::term("Gertrud"), desk::term("Lena")]);
        assert!(s.graph.contains(&Triple::iris(id, &desk::iri("birthPlace"), &desk::iri("Germany"))));
        assert!(s.graph.contains(&Triple::iris(&desk::iri("Germany"), RDF_TYPE, &desk::iri("Country"))));
    }

    #[test]
    fn desk_summary_drops_singletons() {
        let s = gbs_summarize(&desk::graph(), &GbsOptions::default()).unwrap();
        assert_eq!(s.graph.len(), 1);
        assert_eq!(s.dropped_singletons, 6);
    }

    #[test]
    fn unique_pairs_keep_the_inferred_graph() {
        let g: Graph = (0..5).map(|i| Triple::iris(&format!("urn:s{i}"), "urn:p", &format!("urn:o{i}"))).collect();
        let s = gbs_summarize(&g, &keep()).unwrap();
        assert_eq!(s.graph, g);
        assert!(s.membership.is_empty());
    }

    #[test]
    fn super_node_ids_are_content_hashes() {
        let a = super_node_id(&[desk::term("Lena"), desk::term("Gertrud")]);
        let b = super_node_id(&[desk::term("Gertrud"), desk::term("Lena")]);
        assert_eq!(a, b);
        assert!(a.starts_with(SUPER_NODE_PREFIX));
        assert_ne!(a, super_node_id(&[desk::term("Gertrud")]));
    }

    #[test]
    fn literals_are_rejected_by_default() {
        let g: Graph = vec![Triple::new(Term::iri("urn:s"), Term::iri("urn:p"), Term::literal("x")).unwrap()]
            .into_iter()
            .collect();
        assert!(matches!(gbs_summarize(&g, &GbsOptions::default()), Err(GbsError::LiteralPresent(1))));
        let strip = GbsOptions { literals: LiteralPolicy::Strip, ..keep() };
        assert!(gbs_summarize(&g, &strip).unwrap().graph.is_empty());
    }

    #[test]
    fn desk_rewrite_and_lossy_answer() {
        let vectors = load_vectors_str(desk::WORD_VECTORS).unwrap();
        let q = parse_query(desk::QUERY).unwrap();
        let (rewritten, sets) = gbs_rewrite(&q, &vectors, 0.5).unwrap();
        assert_eq!(sets.len(), 3);
        assert_eq!(rewritten.pattern.pattern_count(), 1);
        let mut only = None;
        rewritten.pattern.for_each_pattern(&mut |tp| only = tp.predicate_iri().map(str::to_owned));
        assert_eq!(only.unwrap(), desk::iri("birthPlace"));

        let summary = gbs_summarize(&desk::graph(), &keep()).unwrap();
        let answers = gbs_answer(&summary, &rewritten);
        assert_eq!(answers.rows, vec![vec![Some(desk::term("Gertrud"))], vec![Some(desk::term("Lena"))]]);
    }

    #[test]
    fn dissimilar_predicates_are_untouched() {
        let q = parse_query(desk::QUERY).unwrap();
        let (rewritten, _) = gbs_rewrite(&q, &ClusterSimilarity::default(), 0.5).unwrap();
        assert_eq!(rewritten, q);
        let single = parse_query("SELECT ?s WHERE { ?s <urn:p> ?o }").unwrap();
        assert_eq!(gbs_rewrite(&single, &ClusterSimilarity::default(), 0.5).unwrap().0, single);
    }

    #[test]
    fn no_match_gives_no_answers() {
        let summary = gbs_summarize(&desk::graph(), &keep()).unwrap();
        let q = parse_query("SELECT ?s WHERE { ?s <urn:nothing> ?o }").unwrap();
        assert!(gbs_answer(&summary, &q).is_empty());
    }

    #[test]
    fn membership_round_trip() {
        let mut m = BTreeMap::new();
        m.insert("urn:sn:1".to_owned(), vec![Term::iri("urn:a,b"), Term::blank("x").unwrap(), Term::iri("urn:c")]);
        let mut out = Vec::new();
        write_membership(&m, &mut out).unwrap();
        assert_eq!(read_membership(out.as_slice()).unwrap(), m);
        assert!(matches!(read_membership("urn:sn:1\t<urn:a".as_bytes()), Err(GbsError::Membership { line: 1, .. })));
    }
}
