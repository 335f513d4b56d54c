use std::borrow::Cow;
use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use super::EmbeddingError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbeddingMode {
    /// Tokens are full term IRIs (vectors trained over graph walks).
    Graph,
    /// Tokens are natural-language words; predicates resolve via their local names.
    Word,
}

/// Token to vector table with a fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorStore {
    dims: usize,
    mode: EmbeddingMode,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl VectorStore {
    pub fn new(dims: usize, mode: EmbeddingMode) -> Self {
        assert!(dims > 0, "vector stores need a positive dimension");
        VectorStore { dims, mode, vectors: BTreeMap::new() }
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn mode(&self) -> EmbeddingMode {
        self.mode
    }

    /// Switches how predicate IRIs are looked up, e.g. after reloading a
    /// store that was trained on graph walks.
    pub fn with_mode(mut self, mode: EmbeddingMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn insert(&mut self, token: impl Into<String>, vector: Vec<f64>) -> Result<(), EmbeddingError> {
        if vector.len() != self.dims {
            return Err(EmbeddingError::LengthMismatch { expected: self.dims, found: vector.len() });
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(EmbeddingError::NonFinite(token.into()));
        }
        self.vectors.insert(token.into(), vector);
        Ok(())
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.vectors.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Vector standing for a predicate IRI.
    ///
    /// Graph mode looks the IRI up directly. Word mode splits the IRI's
    /// local name into lowercase words and averages the ones present.
    pub fn predicate_vector(&self, predicate: &str) -> Result<Cow<'_, [f64]>, EmbeddingError> {
        let unknown = || EmbeddingError::UnknownPredicate(predicate.to_owned());
        match self.mode {
            EmbeddingMode::Graph => self.get(predicate).map(Cow::Borrowed).ok_or_else(unknown),
            EmbeddingMode::Word => {
                let mut sum = vec![0.0; self.dims];
                let mut n = 0usize;
                for word in split_identifier(local_name(predicate)) {
                    if let Some(v) = self.get(&word) {
                        sum.iter_mut().zip(v).for_each(|(a, b)| *a += b);
                        n += 1;
                    }
                }
                if n == 0 {
                    return Err(unknown());
                }
                sum.iter_mut().for_each(|x| *x /= n as f64);
                Ok(Cow::Owned(sum))
            }
        }
    }
}

/// Substring after the last '/', '#' or ':'.
pub fn local_name(iri: &str) -> &str {
    match iri.rfind(['/', '#', ':']) {
        Some(i) => &iri[i + 1..],
        None => iri,
    }
}

/// Splits camelCase and non-alphanumeric separators into lowercase words.
///
/// `birthPlace` gives `birth place`, `HTTPServer` gives `http server`,
/// `has_part-of` gives `has part of`.
pub fn split_identifier(name: &str) -> Vec<String> {
    let chars: Vec<char> = name.chars().collect();
    let mut words = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if !c.is_alphanumeric() {
            if !current.is_empty() {
                words.push(std::mem::take(&mut current));
            }
            continue;
        }
        if c.is_uppercase() && !current.is_empty() {
            let prev = chars[i - 1];
            let next_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
            if !prev.is_uppercase() || next_lower {
                words.push(std::mem::take(&mut current));
            }
        }
        current.extend(c.to_lowercase());
    }
    if !current.is_empty() {
        words.push(current);
    }
    words
}

/// Reads the classic word-vector text layout: an optional `count dims`
/// header followed by one `token v1 .. vd` line per token.
pub fn load_vectors<R: BufRead>(reader: R) -> Result<VectorStore, EmbeddingError> {
    let mut store: Option<VectorStore> = None;
    let mut header_dims: Option<usize> = None;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if line_no == 1 && fields.len() == 2 {
            if let (Ok(_), Ok(dims)) = (fields[0].parse::<usize>(), fields[1].parse::<usize>()) {
                if dims == 0 {
                    return Err(EmbeddingError::Parse { line: 1, message: "zero dimension in header".into() });
                }
                header_dims = Some(dims);
                continue;
            }
        }
        let found = fields.len() - 1;
        let store = store.get_or_insert_with(|| VectorStore::new(header_dims.unwrap_or(found.max(1)), EmbeddingMode::Word));
        if found != store.dims {
            return Err(EmbeddingError::DimensionMismatch { line: line_no, expected: store.dims, found });
        }
        let mut vector = Vec::with_capacity(found);
        for f in &fields[1..] {
            let x: f64 = f
                .parse()
                .map_err(|_| EmbeddingError::Parse { line: line_no, message: format!("not a number: {f:?}") })?;
            if !x.is_finite() {
                return Err(EmbeddingError::Parse { line: line_no, message: format!("non-finite component {f:?}") });
            }
            vector.push(x);
        }
        store.vectors.insert(fields[0].to_owned(), vector);
    }
    store.ok_or(EmbeddingError::Parse { line: 0, message: "no vectors found".into() })
}

pub fn load_vectors_str(text: &str) -> Result<VectorStore, EmbeddingError> {
    load_vectors(text.as_bytes())
}

/// Writes the store in the same text layout [`load_vectors`] reads, with a header.
pub fn write_vectors<W: Write>(store: &VectorStore, mut out: W) -> io::Result<()> {
    writeln!(out, "{} {}", store.len(), store.dims)?;
    for (token, v) in store.iter() {
        write!(out, "{token}")?;
        for x in v {
            write!(out, " {x}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}
