//! RDF data model, N-Triples I/O and the frozen in-memory triple store.

mod graph;
mod ntriples;
mod term;

pub use graph::{Graph, GraphBuilder, IdTriple, Position, TermId};
pub use ntriples::{
    parse_line, parse_ntriples, parse_ntriples_str, to_ntriples_string, write_ntriples, NTriplesError, ParseOptions,
};
pub use term::{is_valid_blank_label, is_valid_iri, Literal, Term, TermError, Triple, RDF_LANG_STRING, XSD_INTEGER, XSD_STRING};

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDFS_SUBCLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";

/// What summarization pipelines do with literal-valued triples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiteralPolicy {
    /// Refuse graphs that contain literals.
    #[default]
    Reject,
    /// Drop literal-valued triples before summarizing.
    Strip,
    /// Summarize literals like any other object.
    Keep,
}

impl LiteralPolicy {
    /// Applies the policy; `Err` carries the number of literal triples found under `Reject`.
    pub fn apply(self, graph: &Graph) -> Result<std::borrow::Cow<'_, Graph>, usize> {
        use std::borrow::Cow;
        if !graph.has_literals() || self == LiteralPolicy::Keep {
            return Ok(Cow::Borrowed(graph));
        }
        match self {
            LiteralPolicy::Reject => {
                Err(graph.id_triples().iter().filter(|t| graph.term(t.o).is_literal()).count())
            }
            LiteralPolicy::Strip => Ok(Cow::Owned(graph.filter(|t| !graph.term(t.o).is_literal()))),
            LiteralPolicy::Keep => unreachable!(),
        }
    }
}
