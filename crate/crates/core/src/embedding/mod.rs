//! Predicate embeddings: random walks, a skip-gram trainer, word-vector
//! loading, and cosine-based similarity sets.

mod similarity;
mod skipgram;
mod store;
mod walks;

use thiserror::Error;

pub use similarity::{
    class_similarity, cluster_anchors, cosine, similar_predicates, ClusterSimilarity, PredicateSimilarity, SimilarityOutcome,
    SimilaritySet,
};
pub use skipgram::{train_skipgram, TrainConfig};
pub use store::{load_vectors, load_vectors_str, local_name, split_identifier, write_vectors, EmbeddingMode, VectorStore};
pub use walks::{generate_walks, WalkConfig, WalkCorpus};

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("vector length {found} does not match dimension {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("line {line}: expected {expected} components, found {found}")]
    DimensionMismatch { line: usize, expected: usize, found: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("vector for {0:?} has non-finite components")]
    NonFinite(String),
    #[error("cosine similarity undefined for a zero vector")]
    ZeroVector,
    #[error("class has no entities")]
    EmptyClass,
    #[error("no pair of distinct entities to compare")]
    UndefinedSimilarity,
    #[error("no vector for predicate <{0}>")]
    UnknownPredicate(String),
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// How a pipeline obtains predicate vectors.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Rdf2VecConfig {
    pub walks: WalkConfig,
    pub train: TrainConfig,
}

impl Rdf2VecConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.walks.seed = seed;
        self.train.seed = seed;
        self
    }

    /// Walks over `graph` followed by skip-gram training.
    pub fn embed(&self, graph: &crate::rdf::Graph) -> Result<VectorStore, EmbeddingError> {
        train_skipgram(&generate_walks(graph, &self.walks), &self.train)
    }
}
