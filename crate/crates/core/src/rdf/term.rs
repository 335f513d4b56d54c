use std::fmt;

use thiserror::Error;

pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const RDF_LANG_STRING: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("invalid IRI <{0}>")]
    InvalidIri(String),
    #[error("invalid blank node label {0:?}")]
    InvalidBlankNode(String),
    #[error("{term} is not allowed in {position} position")]
    Position { term: String, position: &'static str },
}

/// An RDF literal. Plain literals carry `xsd:string` and language-tagged
/// literals carry `rdf:langString`, so equality is purely structural.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub lexical: String,
    pub datatype: String,
    pub language: Option<String>,
}

impl Literal {
    pub fn simple(lexical: impl Into<String>) -> Self {
        Literal { lexical: lexical.into(), datatype: XSD_STRING.to_owned(), language: None }
    }

    pub fn typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        Literal { lexical: lexical.into(), datatype: datatype.into(), language: None }
    }

    pub fn lang(lexical: impl Into<String>, language: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: RDF_LANG_STRING.to_owned(),
            language: Some(language.into().to_ascii_lowercase()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(String),
    BlankNode(String),
    Literal(Literal),
}

impl Term {
    /// Builds an IRI term without validation. Use [`Term::try_iri`] for untrusted input.
    pub fn iri(iri: impl Into<String>) -> Self {
        Term::Iri(iri.into())
    }

    pub fn try_iri(iri: impl Into<String>) -> Result<Self, TermError> {
        let iri = iri.into();
        if is_valid_iri(&iri) {
            Ok(Term::Iri(iri))
        } else {
            Err(TermError::InvalidIri(iri))
        }
    }

    pub fn blank(label: impl Into<String>) -> Result<Self, TermError> {
        let label = label.into();
        if is_valid_blank_label(&label) {
            Ok(Term::BlankNode(label))
        } else {
            Err(TermError::InvalidBlankNode(label))
        }
    }

    pub fn literal(lexical: impl Into<String>) -> Self {
        Term::Literal(Literal::simple(lexical))
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Term::BlankNode(_))
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    /// Token used for this term in walk corpora and vector stores.
    pub fn token(&self) -> String {
        match self {
            Term::Iri(iri) => iri.clone(),
            other => other.to_string(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => write!(f, "<{iri}>"),
            Term::BlankNode(label) => write!(f, "_:{label}"),
            Term::Literal(lit) => {
                f.write_str("\"")?;
                write_escaped(f, &lit.lexical)?;
                f.write_str("\"")?;
                if let Some(lang) = &lit.language {
                    write!(f, "@{lang}")
                } else if lit.datatype != XSD_STRING {
                    write!(f, "^^<{}>", lit.datatype)
                } else {
                    Ok(())
                }
            }
        }
    }
}

fn write_escaped(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    for c in s.chars() {
        match c {
            '\\' => f.write_str("\\\\")?,
            '"' => f.write_str("\\\"")?,
            '\n' => f.write_str("\\n")?,
            '\r' => f.write_str("\\r")?,
            c => write!(f, "{c}")?,
        }
    }
    Ok(())
}

/// Characters that may never appear (unescaped or decoded) inside an IRI.
pub(crate) fn is_forbidden_iri_char(c: char) -> bool {
    c <= ' ' || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\')
}

pub fn is_valid_iri(iri: &str) -> bool {
    !iri.is_empty() && !iri.chars().any(is_forbidden_iri_char)
}

pub(crate) fn is_blank_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '\u{00B7}')
}

pub fn is_valid_blank_label(label: &str) -> bool {
    let mut chars = label.chars();
    match chars.next() {
        Some(c) if c.is_alphanumeric() || c == '_' => {}
        _ => return false,
    }
    !label.ends_with('.') && chars.all(is_blank_char)
}

/// A statement whose positions satisfy the RDF constraints.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Result<Self, TermError> {
        if subject.is_literal() {
            return Err(TermError::Position { term: subject.to_string(), position: "subject" });
        }
        if !predicate.is_iri() {
            return Err(TermError::Position { term: predicate.to_string(), position: "predicate" });
        }
        Ok(Triple { subject, predicate, object })
    }

    /// Shorthand for an all-IRI triple.
    pub fn iris(s: &str, p: &str, o: &str) -> Self {
        Triple { subject: Term::iri(s), predicate: Term::iri(p), object: Term::iri(o) }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_position_rules() {
        let lit = Term::literal("x");
        assert!(Triple::new(lit.clone(), Term::iri("urn:p"), Term::iri("urn:o")).is_err());
        assert!(Triple::new(Term::iri("urn:s"), lit.clone(), Term::iri("urn:o")).is_err());
        assert!(Triple::new(Term::iri("urn:s"), Term::iri("urn:p"), lit).is_ok());
        let bnode = Term::blank("b0").unwrap();
        assert!(Triple::new(Term::iri("urn:s"), bnode, Term::iri("urn:o")).is_err());
    }

    #[test]
    fn iri_validation() {
        assert!(Term::try_iri("urn:a").is_ok());
        assert!(Term::try_iri("").is_err());
        assert!(Term::try_iri("urn:a b").is_err());
        assert!(Term::try_iri("urn:<a>").is_err());
    }

    #[test]
    fn literal_display_escapes() {
        let t = Term::literal("a\"b\\c\nd");
        assert_eq!(t.to_string(), r#""a\"b\\c\nd""#);
        let t = Term::Literal(Literal::lang("hallo", "DE"));
        assert_eq!(t.to_string(), "\"hallo\"@de");
        let t = Term::Literal(Literal::typed("1", XSD_INTEGER));
        assert_eq!(t.to_string(), format!("\"1\"^^<{XSD_INTEGER}>"));
    }

    #[test]
    fn blank_labels() {
        assert!(Term::blank("b1").is_ok());
        assert!(Term::blank("_x.y").is_ok());
        assert!(Term::blank("b.").is_err());
        assert!(Term::blank("-b").is_err());
    }
}
