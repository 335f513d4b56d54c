use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use crate::rdf::Term;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variable(String);

impl Variable {
    pub fn new(name: impl Into<String>) -> Self {
        Variable(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermPattern {
    Variable(Variable),
    Term(Term),
}

impl TermPattern {
    pub fn var(name: &str) -> Self {
        TermPattern::Variable(Variable::new(name))
    }

    pub fn iri(iri: impl Into<String>) -> Self {
        TermPattern::Term(Term::iri(iri))
    }

    pub fn as_term(&self) -> Option<&Term> {
        match self {
            TermPattern::Term(t) => Some(t),
            TermPattern::Variable(_) => None,
        }
    }

    pub fn as_variable(&self) -> Option<&Variable> {
        match self {
            TermPattern::Variable(v) => Some(v),
            TermPattern::Term(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TriplePattern {
    pub subject: TermPattern,
    pub predicate: TermPattern,
    pub object: TermPattern,
}

impl TriplePattern {
    pub fn new(subject: TermPattern, predicate: TermPattern, object: TermPattern) -> Self {
        TriplePattern { subject, predicate, object }
    }

    pub fn positions(&self) -> [&TermPattern; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    /// Constant predicate IRI, if any.
    pub fn predicate_iri(&self) -> Option<&str> {
        self.predicate.as_term().and_then(Term::as_iri)
    }
}

/// Query body: basic graph patterns combined by binary operators.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GraphPattern {
    Bgp(Vec<TriplePattern>),
    Join(Box<GraphPattern>, Box<GraphPattern>),
    Union(Box<GraphPattern>, Box<GraphPattern>),
    /// Left outer join of a required and an optional side.
    Optional(Box<GraphPattern>, Box<GraphPattern>),
}

impl GraphPattern {
    pub fn join(a: GraphPattern, b: GraphPattern) -> Self {
        GraphPattern::Join(Box::new(a), Box::new(b))
    }

    pub fn union(a: GraphPattern, b: GraphPattern) -> Self {
        GraphPattern::Union(Box::new(a), Box::new(b))
    }

    pub fn optional(a: GraphPattern, b: GraphPattern) -> Self {
        GraphPattern::Optional(Box::new(a), Box::new(b))
    }

    /// Left-associated union of the given branches. Panics when empty.
    pub fn union_all(branches: impl IntoIterator<Item = GraphPattern>) -> Self {
        let mut it = branches.into_iter();
        let first = it.next().expect("union of no branches");
        it.fold(first, GraphPattern::union)
    }

    /// Visits every triple pattern, left to right.
    pub fn for_each_pattern<'a>(&'a self, f: &mut impl FnMut(&'a TriplePattern)) {
        match self {
            GraphPattern::Bgp(ps) => ps.iter().for_each(f),
            GraphPattern::Join(a, b) | GraphPattern::Union(a, b) | GraphPattern::Optional(a, b) => {
                a.for_each_pattern(f);
                b.for_each_pattern(f);
            }
        }
    }

    pub fn map_patterns(&self, f: &mut impl FnMut(&TriplePattern) -> TriplePattern) -> GraphPattern {
        match self {
            GraphPattern::Bgp(ps) => GraphPattern::Bgp(ps.iter().map(&mut *f).collect()),
            GraphPattern::Join(a, b) => GraphPattern::join(a.map_patterns(f), b.map_patterns(f)),
            GraphPattern::Union(a, b) => GraphPattern::union(a.map_patterns(f), b.map_patterns(f)),
            GraphPattern::Optional(a, b) => GraphPattern::optional(a.map_patterns(f), b.map_patterns(f)),
        }
    }

    pub fn pattern_count(&self) -> usize {
        let mut n = 0;
        self.for_each_pattern(&mut |_| n += 1);
        n
    }

    /// Variables in order of first appearance.
    pub fn variables(&self) -> Vec<Variable> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        self.for_each_pattern(&mut |tp| {
            for pos in tp.positions() {
                if let TermPattern::Variable(v) = pos {
                    if seen.insert(v.clone()) {
                        out.push(v.clone());
                    }
                }
            }
        });
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Projection {
    All,
    Variables(Vec<Variable>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Query {
    /// Prefix declarations (prefix without colon, namespace IRI), in source order.
    pub prefixes: Vec<(String, String)>,
    pub projection: Projection,
    pub distinct: bool,
    pub pattern: GraphPattern,
}

impl Query {
    pub fn select_all(pattern: GraphPattern) -> Self {
        Query { prefixes: Vec::new(), projection: Projection::All, distinct: false, pattern }
    }

    /// Projected variables; for `*` every body variable in order of first appearance.
    pub fn projected_variables(&self) -> Vec<Variable> {
        match &self.projection {
            Projection::All => self.pattern.variables(),
            Projection::Variables(vs) => vs.clone(),
        }
    }

    pub fn with_distinct(mut self, distinct: bool) -> Self {
        self.distinct = distinct;
        self
    }
}

struct Writer<'a> {
    prefixes: &'a [(String, String)],
    out: String,
}

impl Writer<'_> {
    fn term(&mut self, t: &TermPattern) {
        match t {
            TermPattern::Variable(v) => write!(self.out, "{v}").unwrap(),
            TermPattern::Term(Term::Iri(iri)) => {
                let compact = self.prefixes.iter().find_map(|(p, ns)| {
                    let local = iri.strip_prefix(ns.as_str())?;
                    let simple = local.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
                        && !local.starts_with('-');
                    simple.then(|| format!("{p}:{local}"))
                });
                match compact {
                    Some(c) => self.out.push_str(&c),
                    None => write!(self.out, "<{iri}>").unwrap(),
                }
            }
            TermPattern::Term(other) => write!(self.out, "{other}").unwrap(),
        }
    }

    fn indent(&mut self, depth: usize) {
        for _ in 0..depth {
            self.out.push_str("  ");
        }
    }

    /// Writes group elements whose parse folds back into exactly `gp`.
    fn body(&mut self, gp: &GraphPattern, depth: usize) {
        match gp {
            GraphPattern::Bgp(ps) => {
                for tp in ps {
                    self.indent(depth);
                    self.term(&tp.subject);
                    self.out.push(' ');
                    self.term(&tp.predicate);
                    self.out.push(' ');
                    self.term(&tp.object);
                    self.out.push_str(" .\n");
                }
            }
            GraphPattern::Union(a, b) => {
                self.group(a, depth);
                self.indent(depth);
                self.out.push_str("UNION\n");
                self.group(b, depth);
            }
            GraphPattern::Join(a, b) => {
                self.body(a, depth);
                self.group(b, depth);
            }
            GraphPattern::Optional(a, b) => {
                self.body(a, depth);
                self.indent(depth);
                self.out.push_str("OPTIONAL\n");
                self.group(b, depth);
            }
        }
    }

    fn group(&mut self, gp: &GraphPattern, depth: usize) {
        self.indent(depth);
        self.out.push_str("{\n");
        self.body(gp, depth + 1);
        self.indent(depth);
        self.out.push_str("}\n");
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, ns) in &self.prefixes {
            writeln!(f, "PREFIX {p}: <{ns}>")?;
        }
        f.write_str("SELECT ")?;
        if self.distinct {
            f.write_str("DISTINCT ")?;
        }
        match &self.projection {
            Projection::All => f.write_str("*")?,
            Projection::Variables(vs) => {
                let names: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
                f.write_str(&names.join(" "))?;
            }
        }
        f.write_str(" WHERE ")?;
        let mut w = Writer { prefixes: &self.prefixes, out: String::new() };
        w.group(&self.pattern, 0);
        f.write_str(&w.out)
    }
}
