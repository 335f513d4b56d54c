use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::rdf::{Graph, Position, TermId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WalkConfig {
    /// Maximum number of hops per walk.
    pub walk_length: usize,
    pub walks_per_entity: usize,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig { walk_length: 4, walks_per_entity: 10, seed: 0 }
    }
}

/// Random-walk sequences over a graph. Tokens index into `vocab`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkCorpus {
    pub vocab: Vec<String>,
    pub sequences: Vec<Vec<u32>>,
    pub walk_length: usize,
    pub walks_per_entity: usize,
    pub seed: u64,
}

impl WalkCorpus {
    /// Builds a corpus from literal token sequences (one vocabulary entry per distinct token).
    pub fn from_sequences<S: AsRef<str>>(sequences: &[Vec<S>]) -> Self {
        let mut vocab: Vec<String> = Vec::new();
        let mut index = std::collections::HashMap::new();
        let sequences = sequences
            .iter()
            .map(|seq| {
                seq.iter()
                    .map(|tok| {
                        *index.entry(tok.as_ref().to_owned()).or_insert_with(|| {
                            vocab.push(tok.as_ref().to_owned());
                            (vocab.len() - 1) as u32
                        })
                    })
                    .collect()
            })
            .collect();
        WalkCorpus { vocab, sequences, walk_length: 0, walks_per_entity: 0, seed: 0 }
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.iter().all(Vec::is_empty)
    }

    pub fn token_count(&self) -> usize {
        self.sequences.iter().map(Vec::len).sum()
    }

    pub fn tokens(&self, sequence: usize) -> impl Iterator<Item = &str> {
        self.sequences[sequence].iter().map(move |&t| self.vocab[t as usize].as_str())
    }

    /// One space-separated sequence per line, for external trainers.
    pub fn write<W: Write>(&self, mut out: W) -> io::Result<()> {
        for seq in &self.sequences {
            let mut first = true;
            for &t in seq {
                if !first {
                    out.write_all(b" ")?;
                }
                out.write_all(self.vocab[t as usize].as_bytes())?;
                first = false;
            }
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn walks_from(graph: &Graph, start: TermId, rank: u64, config: &WalkConfig) -> Vec<Vec<u32>> {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(config.seed ^ splitmix64(rank)));
    (0..config.walks_per_entity)
        .map(|_| {
            let mut seq = vec![start.0];
            let mut current = start;
            for _ in 0..config.walk_length {
                let edges = graph.out_edges(current);
                if edges.is_empty() {
                    break;
                }
                let e = edges[rng.gen_range(0..edges.len())];
                seq.push(e.p.0);
                seq.push(e.o.0);
                current = e.o;
            }
            seq
        })
        .collect()
}

/// Uniform random walks `s, p1, o1, p2, o2, ...` from every subject.
///
/// Each start entity draws from its own sub-seeded generator, so the corpus
/// is identical whether entities are processed in parallel or not.
pub fn generate_walks(graph: &Graph, config: &WalkConfig) -> WalkCorpus {
    assert!(config.walk_length >= 1, "walk length must be at least 1");
    let starts = graph.project_ids(Position::Subject);
    #[cfg(feature = "parallel")]
    let per_entity: Vec<Vec<Vec<u32>>> = {
        use rayon::prelude::*;
        starts.par_iter().map(|&s| walks_from(graph, s, s.0 as u64, config)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let per_entity: Vec<Vec<Vec<u32>>> = starts.iter().map(|&s| walks_from(graph, s, s.0 as u64, config)).collect();

    WalkCorpus {
        vocab: graph.terms().iter().map(|t| t.token()).collect(),
        sequences: per_entity.into_iter().flatten().collect(),
        walk_length: config.walk_length,
        walks_per_entity: config.walks_per_entity,
        seed: config.seed,
    }
}
