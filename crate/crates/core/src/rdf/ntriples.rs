//! N-Triples reading and writing.
//!
//! Accepts LF or CRLF line ends and emits LF. Output lines are sorted by
//! interned id, which for frozen graphs is term order, so serialization is
//! byte-reproducible.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::graph::{Graph, GraphBuilder};
use super::term::{is_forbidden_iri_char, Literal, Term, Triple, XSD_STRING};

#[derive(Debug, Error)]
pub enum NTriplesError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("literal rejected at line {line}, column {column}")]
    LiteralRejected { line: usize, column: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Fail on the first triple that has a literal object.
    pub reject_literals: bool,
}

pub fn parse_ntriples<R: BufRead>(mut reader: R, options: ParseOptions) -> Result<Graph, NTriplesError> {
    let mut builder = GraphBuilder::new();
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let text = std::str::from_utf8(&buf).map_err(|e| NTriplesError::Syntax {
            line: line_no,
            column: e.valid_up_to() + 1,
            message: "invalid UTF-8".into(),
        })?;
        let text = text.strip_suffix('\n').unwrap_or(text);
        let text = text.strip_suffix('\r').unwrap_or(text);
        if let Some(triple) = parse_line(text, line_no, options)? {
            builder.insert(triple);
        }
    }
    Ok(builder.freeze())
}

pub fn parse_ntriples_str(input: &str, options: ParseOptions) -> Result<Graph, NTriplesError> {
    parse_ntriples(input.as_bytes(), options)
}

/// Parses one line; `Ok(None)` for blank and comment-only lines.
pub fn parse_line(text: &str, line: usize, options: ParseOptions) -> Result<Option<Triple>, NTriplesError> {
    let mut cur = Cursor { chars: text.char_indices().collect(), pos: 0, line };
    cur.skip_ws();
    if cur.at_end() || cur.peek() == Some('#') {
        return Ok(None);
    }
    let subject = match cur.peek() {
        Some('<') => Term::Iri(cur.iri()?),
        Some('_') => cur.blank()?,
        _ => return Err(cur.error("expected IRI or blank node as subject")),
    };
    cur.skip_ws();
    let predicate = match cur.peek() {
        Some('<') => Term::Iri(cur.iri()?),
        _ => return Err(cur.error("expected IRI as predicate")),
    };
    cur.skip_ws();
    let object_column = cur.column();
    let object = match cur.peek() {
        Some('<') => Term::Iri(cur.iri()?),
        Some('_') => cur.blank()?,
        Some('"') => {
            if options.reject_literals {
                return Err(NTriplesError::LiteralRejected { line, column: object_column });
            }
            cur.literal()?
        }
        _ => return Err(cur.error("expected IRI, blank node or literal as object")),
    };
    cur.skip_ws();
    if cur.peek() != Some('.') {
        return Err(cur.error("expected '.'"));
    }
    cur.pos += 1;
    cur.skip_ws();
    if !cur.at_end() && cur.peek() != Some('#') {
        return Err(cur.error("unexpected content after '.'"));
    }
    Ok(Some(Triple { subject, predicate, object }))
}

struct Cursor {
    chars: Vec<(usize, char)>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn next(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn error(&self, message: impl Into<String>) -> NTriplesError {
        NTriplesError::Syntax { line: self.line, column: self.column(), message: message.into() }
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: char) -> Result<(), NTriplesError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected '{c}'")))
        }
    }

    fn uchar(&mut self, len: usize) -> Result<char, NTriplesError> {
        let mut value = 0u32;
        for _ in 0..len {
            let d = self.next().and_then(|c| c.to_digit(16)).ok_or_else(|| self.error("invalid unicode escape"))?;
            value = value * 16 + d;
        }
        char::from_u32(value).ok_or_else(|| self.error("escape is not a unicode scalar value"))
    }

    fn iri(&mut self) -> Result<String, NTriplesError> {
        let start = self.column();
        self.expect('<')?;
        let mut out = String::new();
        loop {
            match self.next() {
                None => return Err(self.error("unterminated IRI")),
                Some('>') => break,
                Some('\\') => {
                    let c = match self.next() {
                        Some('u') => self.uchar(4)?,
                        Some('U') => self.uchar(8)?,
                        _ => return Err(self.error("invalid escape in IRI")),
                    };
                    if is_forbidden_iri_char(c) {
                        return Err(self.error("escaped character not allowed in IRI"));
                    }
                    out.push(c);
                }
                Some(c) if is_forbidden_iri_char(c) => {
                    self.pos -= 1;
                    return Err(self.error(format!("character {c:?} not allowed in IRI")));
                }
                Some(c) => out.push(c),
            }
        }
        if !out.contains(':') {
            return Err(NTriplesError::Syntax {
                line: self.line,
                column: start,
                message: format!("relative IRI <{out}>"),
            });
        }
        Ok(out)
    }

    fn blank(&mut self) -> Result<Term, NTriplesError> {
        self.expect('_')?;
        self.expect(':')?;
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_alphanumeric() || c == '_' => {}
            _ => return Err(self.error("invalid blank node label")),
        }
        while matches!(self.peek(), Some(c) if super::term::is_blank_char(c)) {
            self.pos += 1;
        }
        // A trailing '.' terminates the statement rather than the label.
        while self.pos > start + 1 && self.chars[self.pos - 1].1 == '.' {
            self.pos -= 1;
        }
        let label: String = self.chars[start..self.pos].iter().map(|&(_, c)| c).collect();
        Ok(Term::BlankNode(label))
    }

    fn literal(&mut self) -> Result<Term, NTriplesError> {
        self.expect('"')?;
        let mut lexical = String::new();
        loop {
            match self.next() {
                None => return Err(self.error("unterminated literal")),
                Some('"') => break,
                Some('\\') => {
                    let c = match self.next() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') => self.uchar(4)?,
                        Some('U') => self.uchar(8)?,
                        _ => return Err(self.error("invalid escape in literal")),
                    };
                    lexical.push(c);
                }
                Some('\n' | '\r') => return Err(self.error("raw line break in literal")),
                Some(c) => lexical.push(c),
            }
        }
        match self.peek() {
            Some('@') => {
                self.pos += 1;
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphabetic()) {
                    self.pos += 1;
                }
                if self.pos == start {
                    return Err(self.error("empty language tag"));
                }
                while self.peek() == Some('-') {
                    self.pos += 1;
                    let sub = self.pos;
                    while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric()) {
                        self.pos += 1;
                    }
                    if self.pos == sub {
                        return Err(self.error("empty language subtag"));
                    }
                }
                let tag: String = self.chars[start..self.pos].iter().map(|&(_, c)| c).collect();
                Ok(Term::Literal(Literal::lang(lexical, tag)))
            }
            Some('^') => {
                self.pos += 1;
                self.expect('^')?;
                let datatype = self.iri()?;
                Ok(Term::Literal(Literal::typed(lexical, datatype)))
            }
            _ => Ok(Term::Literal(Literal { lexical, datatype: XSD_STRING.to_owned(), language: None })),
        }
    }
}

pub fn write_ntriples<W: Write>(graph: &Graph, mut out: W) -> io::Result<()> {
    for t in graph.id_triples() {
        writeln!(out, "{} {} {} .", graph.term(t.s), graph.term(t.p), graph.term(t.o))?;
    }
    Ok(())
}

pub fn to_ntriples_string(graph: &Graph) -> String {
    let mut out = Vec::new();
    write_ntriples(graph, &mut out).expect("writing to a Vec cannot fail");
    String::from_utf8(out).expect("terms are valid UTF-8")
}
