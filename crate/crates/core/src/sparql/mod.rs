//! The SELECT subset of SPARQL used by both summarizers: basic graph
//! patterns combined with UNION and OPTIONAL.

mod ast;
mod eval;
mod parser;
mod rewrite;

pub use ast::{GraphPattern, Projection, Query, TermPattern, TriplePattern, Variable};
pub use eval::{evaluate, Solutions};
pub use parser::parse_query;
pub use rewrite::{extract_objects, extract_predicates, rewrite, simplify};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unsupported feature: {0}")]
    UnsupportedFeature(String),
}
