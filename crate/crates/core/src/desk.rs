//! The seven-triple "desk" graph used throughout the docs, tests and demo:
//! people born in, holding nationality of, or living in Germany, plus a
//! two-level class hierarchy for the reasoner.

use crate::rdf::{Graph, Term, Triple, RDFS_SUBCLASS_OF, RDF_TYPE};

pub const NS: &str = "http://example.org/";

pub fn iri(local: &str) -> String {
    format!("{NS}{local}")
}

pub fn term(local: &str) -> Term {
    Term::iri(iri(local))
}

pub fn triples() -> Vec<Triple> {
    let t = |s: &str, p: &str, o: &str| Triple::iris(&iri(s), &iri(p), &iri(o));
    vec![
        t("Gertrud", "birthPlace", "Germany"),
        t("Lena", "birthPlace", "Germany"),
        t("Markus", "nationality", "Germany"),
        t("Anna", "country", "Germany"),
        t("Markus", "deathPlace", "France"),
        Triple::iris(&iri("Germany"), RDF_TYPE, &iri("EuropeanCountry")),
        Triple::iris(&iri("EuropeanCountry"), RDFS_SUBCLASS_OF, &iri("Country")),
    ]
}

pub fn graph() -> Graph {
    triples().into_iter().collect()
}

pub fn ntriples() -> String {
    crate::rdf::to_ntriples_string(&graph())
}

/// Three union branches asking who is connected to Germany through a
/// country-like predicate.
pub const QUERY: &str = "PREFIX : <http://example.org/>
SELECT ?p WHERE {
  { ?p :country :Germany }
  UNION { ?p :nationality :Germany }
  UNION { ?p :birthPlace :Germany }
}
";

/// A small word-vector table in which `country`, `nationality` and
/// `birthPlace` are mutually similar and `deathPlace` is not.
pub const WORD_VECTORS: &str = "7 3
country 1.0 0.2 0.0
nationality 0.9 0.3 0.1
birth 0.9 0.0 0.3
place 0.7 0.4 0.1
death -0.6 0.0 1.0
type 0.0 1.0 0.0
sub 0.1 -0.5 0.6
";
