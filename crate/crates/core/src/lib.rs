//! Graph summarization for query answering over RDF.
//!
//! Two summarizers share one pipeline. Grouping-based summarization ([`gbs`])
//! collapses subjects that share a `(predicate, object)` pair into super-nodes.
//! Query-based summarization ([`qbs`]) cuts out the part of the graph a query
//! can touch and folds synonym predicates onto one representative, so the
//! rewritten query over the summary returns exactly the original answers.

pub mod desk;
pub mod embedding;
pub mod rdf;
pub mod reasoner;
pub mod sparql;
pub mod bench;
pub mod gbs;
pub mod qbs;
mod timing;
