use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::store::{EmbeddingMode, VectorStore};
use super::walks::WalkCorpus;
use super::EmbeddingError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub dims: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    /// Initial learning rate, decayed linearly towards zero over training.
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { dims: 64, window: 5, negatives: 5, epochs: 5, learning_rate: 0.025, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), EmbeddingError> {
        let bad = |what: &str| Err(EmbeddingError::InvalidConfig(what.to_owned()));
        if self.dims == 0 || self.dims > 1024 {
            return bad("dims must be in 1..=1024");
        }
        if self.window == 0 || self.negatives == 0 || self.epochs == 0 {
            return bad("window, negatives and epochs must be positive");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning rate must be positive");
        }
        Ok(())
    }
}

const MIN_LR_FRACTION: f64 = 1e-4;
const MAX_EXP: f64 = 6.0;

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x.clamp(-MAX_EXP, MAX_EXP)).exp())
}

/// Sampler for the unigram distribution raised to the 3/4 power.
struct NegativeTable {
    cumulative: Vec<f64>,
}

impl NegativeTable {
    fn new(counts: &[u64]) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(0.75);
                acc
            })
            .collect();
        NegativeTable { cumulative }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let total = *self.cumulative.last().unwrap();
        let x = rng.gen::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= x).min(self.cumulative.len() - 1)
    }
}

/// Skip-gram with negative sampling over the corpus token sequences.
///
/// Single-threaded; the same corpus and config always produce a
/// bitwise-identical store.
pub fn train_skipgram(corpus: &WalkCorpus, config: &TrainConfig) -> Result<VectorStore, EmbeddingError> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(EmbeddingError::EmptyCorpus);
    }
    // Dense re-numbering of tokens that actually occur, in vocabulary order.
    let mut counts_by_vocab = vec![0u64; corpus.vocab.len()];
    for seq in &corpus.sequences {
        for &t in seq {
            counts_by_vocab[t as usize] += 1;
        }
    }
    let mut dense = vec![u32::MAX; corpus.vocab.len()];
    let mut words: Vec<usize> = Vec::new();
    for (v, &c) in counts_by_vocab.iter().enumerate() {
        if c > 0 {
            dense[v] = words.len() as u32;
            words.push(v);
        }
    }
    let counts: Vec<u64> = words.iter().map(|&v| counts_by_vocab[v]).collect();
    let sequences: Vec<Vec<u32>> =
        corpus.sequences.iter().map(|s| s.iter().map(|&t| dense[t as usize]).collect()).collect();

    let dims = config.dims;
    let n = words.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut input: Vec<f64> = (0..n * dims).map(|_| (rng.gen::<f64>() - 0.5) / dims as f64).collect();
    let mut output = vec![0.0f64; n * dims];
    let table = NegativeTable::new(&counts);

    let total = (config.epochs * corpus.token_count()) as f64;
    let mut processed = 0usize;
    let mut grad = vec![0.0f64; dims];
    for _ in 0..config.epochs {
        for seq in &sequences {
            for (i, &center) in seq.iter().enumerate() {
                let lr = config.learning_rate * (1.0 - processed as f64 / total).max(MIN_LR_FRACTION);
                processed += 1;
                let shrink = rng.gen_range(0..config.window);
                let reach = config.window - shrink;
                let lo = i.saturating_sub(reach);
                let hi = (i + reach).min(seq.len() - 1);
                for (j, &context) in seq.iter().enumerate().take(hi + 1).skip(lo) {
                    if j == i {
                        continue;
                    }
                    let context = context as usize;
                    let c = center as usize;
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    for k in 0..=config.negatives {
                        let (target, label) = if k == 0 {
                            (context, 1.0)
                        } else {
                            let t = table.sample(&mut rng);
                            if t == context {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let h = &input[c * dims..(c + 1) * dims];
                        let w = &mut output[target * dims..(target + 1) * dims];
                        let dot: f64 = h.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
                        let g = (label - sigmoid(dot)) * lr;
                        for d in 0..dims {
                            grad[d] += g * w[d];
                            w[d] += g * h[d];
                        }
                    }
                    input[c * dims..(c + 1) * dims].iter_mut().zip(&grad).for_each(|(x, g)| *x += g);
                }
            }
        }
    }

    let mut store = VectorStore::new(dims, EmbeddingMode::Graph);
    for (dense_id, &v) in words.iter().enumerate() {
        store.insert(corpus.vocab[v].clone(), input[dense_id * dims..(dense_id + 1) * dims].to_vec())?;
    }
    Ok(store)
}
