//! Recursive-descent parser for the supported SELECT subset.
//!
//! Grammar (keywords case-insensitive):
//!
//! ```text
//! query    := ("PREFIX" pname_ns IRIREF)* "SELECT" "DISTINCT"? ("*" | var+) "WHERE"? group
//! group    := "{" element* "}"
//! element  := triples | group ("UNION" group)* | "OPTIONAL" group | "."
//! triples  := subject predicate-object-list     (with ";" and "," shorthands)
//! ```

use super::ast::{GraphPattern, Projection, Query, TermPattern, TriplePattern, Variable};
use super::QueryError;
use crate::rdf::{is_valid_iri, Literal, Term, RDF_TYPE, XSD_INTEGER};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Iri(String),
    Prefixed(String, String),
    Var(String),
    Word(String),
    Literal(Term),
    Punct(char),
    Eof,
}

/// Words that name SPARQL features outside the supported subset.
const UNSUPPORTED: &[&str] = &[
    "FILTER", "LIMIT", "OFFSET", "ORDER", "GROUP", "HAVING", "BIND", "VALUES", "MINUS", "SERVICE", "GRAPH",
    "CONSTRUCT", "ASK", "DESCRIBE", "FROM", "NAMED", "REDUCED", "BASE", "EXISTS", "NOT", "INSERT", "DELETE", "LOAD",
    "CLEAR", "CREATE", "DROP", "WITH", "USING",
];

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn peek_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek_char()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn syntax(&self, position: usize, message: impl Into<String>) -> QueryError {
        QueryError::Syntax { position, message: message.into() }
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek_char() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                _ => return,
            }
        }
    }

    fn next(&mut self) -> Result<(usize, Tok), QueryError> {
        self.skip_trivia();
        let start = self.pos;
        let Some(c) = self.peek_char() else {
            return Ok((start, Tok::Eof));
        };
        let tok = match c {
            '<' => {
                self.bump();
                let body_start = self.pos;
                loop {
                    match self.bump() {
                        Some('>') => break,
                        Some(c) if c.is_whitespace() => return Err(self.syntax(start, "whitespace in IRI")),
                        Some(_) => {}
                        None => return Err(self.syntax(start, "unterminated IRI")),
                    }
                }
                let iri = &self.src[body_start..self.pos - 1];
                if !is_valid_iri(iri) {
                    return Err(self.syntax(start, format!("invalid IRI <{iri}>")));
                }
                Tok::Iri(iri.to_owned())
            }
            '?' | '$' => {
                self.bump();
                let name_start = self.pos;
                while matches!(self.peek_char(), Some(c) if c.is_alphanumeric() || c == '_') {
                    self.bump();
                }
                if self.pos == name_start {
                    return Err(QueryError::UnsupportedFeature("property path".into()));
                }
                Tok::Var(self.src[name_start..self.pos].to_owned())
            }
            '"' | '\'' => self.literal(c)?,
            '{' | '}' | '.' | '*' | ';' | ',' | '(' | ')' => {
                self.bump();
                if c == '(' || c == ')' {
                    return Err(QueryError::UnsupportedFeature("expression".into()));
                }
                Tok::Punct(c)
            }
            '[' => return Err(QueryError::UnsupportedFeature("blank node".into())),
            '/' | '|' | '^' | '+' | '!' => return Err(QueryError::UnsupportedFeature("property path".into())),
            '_' if self.src[self.pos..].starts_with("_:") => return Err(QueryError::UnsupportedFeature("blank node".into())),
            c if c.is_ascii_digit() || c == '-' || c == '+' => {
                while matches!(self.peek_char(), Some(c) if c.is_ascii_digit() || c == '-' || c == '+') {
                    self.bump();
                }
                if matches!(self.peek_char(), Some('.' | 'e' | 'E')) && self.src[self.pos + 1..].starts_with(|c: char| c.is_ascii_digit()) {
                    return Err(QueryError::UnsupportedFeature("decimal literal".into()));
                }
                let text = &self.src[start..self.pos];
                if text.trim_start_matches(['-', '+']).is_empty() || text[1..].contains(['-', '+']) {
                    return Err(self.syntax(start, format!("malformed number {text:?}")));
                }
                Tok::Literal(Term::Literal(Literal::typed(text, XSD_INTEGER)))
            }
            c if c.is_alphabetic() || c == ':' || c == '_' => {
                while matches!(self.peek_char(), Some(c) if c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | ':' | '%')) {
                    self.bump();
                }
                // A trailing '.' ends the triple rather than the name.
                while self.src[..self.pos].ends_with('.') {
                    self.pos -= 1;
                }
                let word = &self.src[start..self.pos];
                match word.split_once(':') {
                    Some((prefix, local)) => Tok::Prefixed(prefix.to_owned(), local.to_owned()),
                    None => Tok::Word(word.to_owned()),
                }
            }
            other => return Err(self.syntax(start, format!("unexpected character {other:?}"))),
        };
        Ok((start, tok))
    }

    fn literal(&mut self, quote: char) -> Result<Tok, QueryError> {
        let start = self.pos;
        self.bump();
        let mut lexical = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => return Err(self.syntax(start, "unterminated string")),
                Some(c) if c == quote => break,
                Some('\\') => lexical.push(match self.bump() {
                    Some('t') => '\t',
                    Some('n') => '\n',
                    Some('r') => '\r',
                    Some('b') => '\u{8}',
                    Some('f') => '\u{c}',
                    Some('"') => '"',
                    Some('\'') => '\'',
                    Some('\\') => '\\',
                    _ => return Err(self.syntax(self.pos, "invalid escape")),
                }),
                Some(c) => lexical.push(c),
            }
        }
        if self.peek_char() == Some('@') {
            self.bump();
            let tag_start = self.pos;
            while matches!(self.peek_char(), Some(c) if c.is_ascii_alphanumeric() || c == '-') {
                self.bump();
            }
            if self.pos == tag_start {
                return Err(self.syntax(tag_start, "empty language tag"));
            }
            let tag = &self.src[tag_start..self.pos];
            return Ok(Tok::Literal(Term::Literal(Literal::lang(lexical, tag))));
        }
        if self.src[self.pos..].starts_with("^^") {
            self.pos += 2;
            // The datatype is resolved by the parser, which knows the prefixes.
            return Ok(Tok::Literal(Term::Literal(Literal::typed(lexical, "\u{0}pending"))));
        }
        Ok(Tok::Literal(Term::literal(lexical)))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    at: usize,
    prefixes: Vec<(String, String)>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, QueryError> {
        let mut lexer = Lexer { src, pos: 0 };
        let (at, tok) = lexer.next()?;
        Ok(Parser { lexer, tok, at, prefixes: Vec::new() })
    }

    fn advance(&mut self) -> Result<Tok, QueryError> {
        let (at, tok) = self.lexer.next()?;
        self.at = at;
        Ok(std::mem::replace(&mut self.tok, tok))
    }

    fn error(&self, message: impl Into<String>) -> QueryError {
        if let Tok::Word(w) = &self.tok {
            let upper = w.to_ascii_uppercase();
            if UNSUPPORTED.contains(&upper.as_str()) {
                return QueryError::UnsupportedFeature(upper);
            }
        }
        QueryError::Syntax { position: self.at, message: message.into() }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(&self.tok, Tok::Word(w) if w.eq_ignore_ascii_case(kw))
    }

    fn eat_keyword(&mut self, kw: &str) -> Result<bool, QueryError> {
        if self.is_keyword(kw) {
            self.advance()?;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    fn expect_punct(&mut self, c: char) -> Result<(), QueryError> {
        if self.tok == Tok::Punct(c) {
            self.advance()?;
            Ok(())
        } else {
            Err(self.error(format!("expected '{c}'")))
        }
    }

    fn expand(&self, prefix: &str, local: &str) -> Result<String, QueryError> {
        let ns = self
            .prefixes
            .iter()
            .rev()
            .find(|(p, _)| p == prefix)
            .map(|(_, ns)| ns)
            .ok_or_else(|| QueryError::Syntax { position: self.at, message: format!("undeclared prefix {prefix:?}") })?;
        Ok(format!("{ns}{local}"))
    }

    fn query(mut self) -> Result<Query, QueryError> {
        while self.eat_keyword("PREFIX")? {
            let Tok::Prefixed(prefix, local) = self.tok.clone() else {
                return Err(self.error("expected prefix name"));
            };
            if !local.is_empty() {
                return Err(self.error("prefix declaration must end with ':'"));
            }
            self.advance()?;
            let Tok::Iri(ns) = self.advance()? else {
                return Err(self.error("expected namespace IRI"));
            };
            self.prefixes.push((prefix, ns));
        }
        if !self.eat_keyword("SELECT")? {
            return Err(self.error("expected SELECT"));
        }
        let distinct = self.eat_keyword("DISTINCT")?;
        let projection = if self.tok == Tok::Punct('*') {
            self.advance()?;
            Projection::All
        } else {
            let mut vars = Vec::new();
            let mut positions = Vec::new();
            while let Tok::Var(name) = &self.tok {
                vars.push(Variable::new(name.clone()));
                positions.push(self.at);
                self.advance()?;
            }
            if vars.is_empty() {
                return Err(self.error("expected '*' or variables after SELECT"));
            }
            Projection::Variables(vars)
        };
        self.eat_keyword("WHERE")?;
        let pattern = self.group()?;
        if self.tok != Tok::Eof {
            return Err(self.error("unexpected content after query body"));
        }
        if let Projection::Variables(vars) = &projection {
            let body = pattern.variables();
            if let Some(v) = vars.iter().find(|v| !body.contains(v)) {
                return Err(QueryError::Syntax {
                    position: self.lexer.src.find(&v.to_string()).unwrap_or(0),
                    message: format!("projected variable {v} does not occur in the query body"),
                });
            }
        }
        Ok(Query { prefixes: self.prefixes, projection, distinct, pattern })
    }

    fn group(&mut self) -> Result<GraphPattern, QueryError> {
        let open = self.at;
        self.expect_punct('{')?;
        let mut acc: Option<GraphPattern> = None;
        let mut triples: Vec<TriplePattern> = Vec::new();
        fn flush(acc: &mut Option<GraphPattern>, triples: &mut Vec<TriplePattern>) {
            if !triples.is_empty() {
                let bgp = GraphPattern::Bgp(std::mem::take(triples));
                *acc = Some(match acc.take() {
                    None => bgp,
                    Some(prev) => GraphPattern::join(prev, bgp),
                });
            }
        }
        loop {
            match &self.tok {
                Tok::Punct('}') => {
                    self.advance()?;
                    break;
                }
                Tok::Punct('.') => {
                    self.advance()?;
                }
                Tok::Punct('{') => {
                    flush(&mut acc, &mut triples);
                    let mut g = self.group()?;
                    while self.eat_keyword("UNION")? {
                        g = GraphPattern::union(g, self.group()?);
                    }
                    acc = Some(match acc.take() {
                        None => g,
                        Some(prev) => GraphPattern::join(prev, g),
                    });
                }
                Tok::Word(w) if w.eq_ignore_ascii_case("OPTIONAL") => {
                    self.advance()?;
                    flush(&mut acc, &mut triples);
                    let right = self.group()?;
                    let left = acc.take().unwrap_or(GraphPattern::Bgp(Vec::new()));
                    acc = Some(GraphPattern::optional(left, right));
                }
                Tok::Eof => return Err(QueryError::Syntax { position: open, message: "unclosed '{'".into() }),
                _ => self.triples_block(&mut triples)?,
            }
        }
        flush(&mut acc, &mut triples);
        acc.ok_or(QueryError::Syntax { position: open, message: "empty group pattern".into() })
    }

    fn triples_block(&mut self, out: &mut Vec<TriplePattern>) -> Result<(), QueryError> {
        let subject = self.term_pattern("subject")?;
        if matches!(&subject, TermPattern::Term(t) if t.is_literal()) {
            return Err(self.error("literal in subject position"));
        }
        loop {
            let predicate = if self.is_keyword("a") {
                self.advance()?;
                TermPattern::iri(RDF_TYPE)
            } else {
                let p = self.term_pattern("predicate")?;
                if matches!(&p, TermPattern::Term(t) if !t.is_iri()) {
                    return Err(self.error("predicate must be an IRI or a variable"));
                }
                p
            };
            loop {
                let object = self.term_pattern("object")?;
                out.push(TriplePattern::new(subject.clone(), predicate.clone(), object));
                if self.tok == Tok::Punct(',') {
                    self.advance()?;
                } else {
                    break;
                }
            }
            if self.tok == Tok::Punct(';') {
                self.advance()?;
                while self.tok == Tok::Punct(';') {
                    self.advance()?;
                }
                if matches!(self.tok, Tok::Punct('.' | '}')) {
                    break;
                }
            } else {
                break;
            }
        }
        match self.tok {
            Tok::Punct('.' | '}' | '{') => Ok(()),
            Tok::Word(ref w) if w.eq_ignore_ascii_case("OPTIONAL") => Ok(()),
            _ => Err(self.error("expected '.' or '}' after triple pattern")),
        }
    }

    fn term_pattern(&mut self, role: &str) -> Result<TermPattern, QueryError> {
        let at = self.at;
        let tp = match self.tok.clone() {
            Tok::Var(name) => TermPattern::Variable(Variable::new(name)),
            Tok::Iri(iri) => TermPattern::iri(iri),
            Tok::Prefixed(prefix, local) => TermPattern::iri(self.expand(&prefix, &local)?),
            Tok::Literal(Term::Literal(lit)) if lit.datatype == "\u{0}pending" => {
                self.advance()?;
                let datatype = match self.tok.clone() {
                    Tok::Iri(iri) => iri,
                    Tok::Prefixed(prefix, local) => self.expand(&prefix, &local)?,
                    _ => return Err(self.error("expected datatype IRI after '^^'")),
                };
                self.advance()?;
                return Ok(TermPattern::Term(Term::Literal(Literal::typed(lit.lexical, datatype))));
            }
            Tok::Literal(t) => TermPattern::Term(t),
            _ => {
                // Surface unsupported keywords rather than a generic syntax error.
                return Err(match self.error("") {
                    unsupported @ QueryError::UnsupportedFeature(_) => unsupported,
                    _ => QueryError::Syntax { position: at, message: format!("expected {role}") },
                });
            }
        };
        self.advance()?;
        Ok(tp)
    }
}

pub fn parse_query(text: &str) -> Result<Query, QueryError> {
    Parser::new(text)?.query()
}
