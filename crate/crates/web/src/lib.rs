//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each exported function takes text inputs and returns a JSON string. The
//! `*_json` functions underneath are plain Rust and usable natively.

use graph_squash::bench::summarization_ratio;
use graph_squash::desk;
use graph_squash::embedding::{load_vectors_str, Rdf2VecConfig};
use graph_squash::gbs::{gbs_summarize, GbsOptions};
use graph_squash::qbs::{qbs_run, verify_lossless, QbsOptions, SimilaritySource};
use graph_squash::rdf::{parse_ntriples_str, to_ntriples_string, Graph, LiteralPolicy, ParseOptions};
use graph_squash::sparql::{evaluate, parse_query};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn graph(text: &str) -> Result<Graph, String> {
    parse_ntriples_str(text, ParseOptions::default()).map_err(|e| format!("graph: {e}"))
}

fn ratio(original: usize, summary: usize) -> Value {
    summarization_ratio(original, summary).map_or(Value::Null, |r| json!(r))
}

/// The example graph, query and word vectors.
pub fn example_json() -> Value {
    json!({ "graph": desk::ntriples(), "query": desk::QUERY, "vectors": desk::WORD_VECTORS })
}

/// Answers `query` directly over the graph.
pub fn query_json(graph_text: &str, query: &str) -> Result<Value, String> {
    let g = graph(graph_text)?;
    let q = parse_query(query).map_err(|e| format!("query: {e}"))?;
    let solutions = evaluate(&g, &q);
    let mut out = solutions.to_json();
    out["count"] = json!(solutions.len());
    Ok(out)
}

/// Query-based summarization plus the lossless check. Empty `vectors`
/// trains rdf2vec on the extracted subgraph with `seed`.
pub fn qbs_json(graph_text: &str, query: &str, vectors: &str, threshold: f64, seed: u64) -> Result<Value, String> {
    let g = graph(graph_text)?;
    let options = QbsOptions { threshold, ..QbsOptions::default() };
    let store;
    let rdf2vec = Rdf2VecConfig::default().with_seed(seed);
    let source = if vectors.trim().is_empty() {
        SimilaritySource::SubgraphWalks(&rdf2vec)
    } else {
        store = load_vectors_str(vectors).map_err(|e| format!("vectors: {e}"))?;
        SimilaritySource::Fixed(&store)
    };
    let run = qbs_run(&g, query, source, &options).map_err(|e| e.to_string())?;
    let q = parse_query(query).map_err(|e| e.to_string())?;
    let report = verify_lossless(&g, &q, &run.bundle);
    let similarity: Vec<Value> = run
        .bundle
        .similarity
        .iter()
        .flat_map(|(anchor, set)| set.members.iter().map(move |(m, s)| json!([anchor, m, s])))
        .collect();
    Ok(json!({
        "original_triples": g.len(),
        "subgraph_triples": run.bundle.subgraph.len(),
        "summary_triples": run.bundle.augmented.len(),
        "new_triples": run.bundle.new_triples,
        "sr_percent": ratio(g.len(), run.bundle.augmented.len()),
        "rewritten": run.bundle.rewritten.to_string(),
        "summary": to_ntriples_string(&run.bundle.augmented),
        "similarity": similarity,
        "answers": run.solutions.to_json(),
        "lossless": report.equal,
        "original_answers": report.original_answers,
        "summary_answers": report.summary_answers,
    }))
}

/// Grouping-based summarization with the default reasoner.
pub fn gbs_json(graph_text: &str, keep_singletons: bool) -> Result<Value, String> {
    let g = graph(graph_text)?;
    let options = GbsOptions { keep_singletons, literals: LiteralPolicy::Strip, ..GbsOptions::default() };
    let summary = gbs_summarize(&g, &options).map_err(|e| e.to_string())?;
    let members: serde_json::Map<String, Value> = summary
        .membership
        .iter()
        .map(|(id, m)| (id.clone(), json!(m.iter().map(ToString::to_string).collect::<Vec<_>>())))
        .collect();
    Ok(json!({
        "original_triples": g.len(),
        "summary_triples": summary.graph.len(),
        "sr_percent": ratio(g.len(), summary.graph.len()),
        "inferred_triples": summary.inferred_triples,
        "dropped_singletons": summary.dropped_singletons,
        "summary": to_ntriples_string(&summary.graph),
        "membership": members,
    }))
}

fn finish(result: Result<Value, String>) -> Result<String, JsError> {
    result.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn example() -> String {
    example_json().to_string()
}

#[wasm_bindgen(js_name = runQuery)]
pub fn run_query(graph: &str, query: &str) -> Result<String, JsError> {
    finish(query_json(graph, query))
}

#[wasm_bindgen(js_name = summarizeQbs)]
pub fn summarize_qbs(graph: &str, query: &str, vectors: &str, threshold: f64, seed: u32) -> Result<String, JsError> {
    finish(qbs_json(graph, query, vectors, threshold, u64::from(seed)))
}

#[wasm_bindgen(js_name = summarizeGbs)]
pub fn summarize_gbs(graph: &str, keep_singletons: bool) -> Result<String, JsError> {
    finish(gbs_json(graph, keep_singletons))
}
