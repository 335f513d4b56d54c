//! Synthetic graphs with planted synonym predicates, random query suites,
//! and the benchmark driver that compares direct evaluation with both
//! summarizers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::{
    load_vectors, ClusterSimilarity, EmbeddingError, PredicateSimilarity, Rdf2VecConfig, SimilaritySet,
    VectorStore,
};
use crate::gbs::{gbs_answer, gbs_answer_count, gbs_distinct_answers, gbs_rewrite, gbs_summarize, GbsError, GbsOptions};
use crate::qbs::{qbs_run_query, QbsError, QbsOptions, SimilaritySource};
use crate::rdf::{parse_ntriples, Graph, GraphBuilder, NTriplesError, ParseOptions, Term, Triple};
use crate::sparql::{
    evaluate, parse_query, GraphPattern, Projection, Query, QueryError, TermPattern, TriplePattern, Variable,
};
use crate::timing::Stopwatch;

/// Largest expanded GBS answer a benchmark cell will materialise.
pub const GBS_EXPANSION_LIMIT: usize = 5_000_000;

pub const SYNTH_NS: &str = "http://example.org/synth/";

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid generator spec: {0}")]
    SpecInvalid(String),
    #[error("summarization ratio needs a non-empty original graph")]
    ZeroOriginal,
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Input { path: PathBuf, source: NTriplesError },
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub entities: usize,
    pub predicates: usize,
    /// Sizes of the planted synonym clusters; predicates not covered are singletons.
    #[serde(default)]
    pub clusters: Vec<usize>,
    pub triples_per_predicate: usize,
    pub object_pool: usize,
    #[serde(default)]
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: &str| Err(BenchError::SpecInvalid(m.to_owned()));
        if self.entities < 2 || self.predicates == 0 || self.triples_per_predicate == 0 || self.object_pool == 0 {
            return bad("entities must be at least 2 and all counts positive");
        }
        if self.clusters.contains(&0) {
            return bad("cluster sizes must be at least 1");
        }
        if self.clusters.iter().sum::<usize>() > self.predicates {
            return bad("clusters need more predicates than the generator has");
        }
        if self.entities < 2 * self.planted_clusters().len() {
            return bad("need at least two entities per cluster");
        }
        Ok(())
    }

    /// Predicate IRIs grouped by planted cluster, singletons included.
    pub fn planted_clusters(&self) -> Vec<Vec<String>> {
        let mut next = 0;
        let mut out = Vec::new();
        let sizes = self.clusters.iter().copied().chain(std::iter::repeat(1));
        for size in sizes {
            if next >= self.predicates {
                break;
            }
            let size = size.min(self.predicates - next);
            out.push((next..next + size).map(synth_predicate).collect());
            next += size;
        }
        out
    }
}

pub fn synth_predicate(i: usize) -> String {
    format!("{SYNTH_NS}p{i}")
}

pub fn synth_entity(i: usize) -> String {
    format!("{SYNTH_NS}e{i}")
}

/// Generates a graph in which every planted cluster owns a disjoint block
/// of entities: its predicates draw subjects from the whole block and
/// objects from one shared pool inside it, so synonym predicates connect
/// the same nodes and random walks see them in the same contexts. Returns
/// the graph and the planted clusters.
pub fn generate_synthetic_graph(spec: &GeneratorSpec) -> Result<(Graph, ClusterSimilarity), BenchError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let clusters = spec.planted_clusters();
    let mut entities: Vec<usize> = (0..spec.entities).collect();
    entities.shuffle(&mut rng);
    let block = spec.entities / clusters.len();
    let mut builder = GraphBuilder::new();
    for (i, cluster) in clusters.iter().enumerate() {
        let subjects = &entities[i * block..(i + 1) * block];
        let pool = spec.object_pool.min(block);
        let start = rng.gen_range(0..block);
        let objects: Vec<usize> = (0..pool).map(|k| subjects[(start + k) % block]).collect();
        let target = spec.triples_per_predicate.min(subjects.len() * objects.len());
        for predicate in cluster {
            let mut seen = BTreeSet::new();
            while seen.len() < target {
                let k = seen.len();
                // The first pass cycles through the pool so synonyms share their objects.
                let o = if k < objects.len() { objects[k] } else { *objects.choose(&mut rng).unwrap() };
                let s = *subjects.choose(&mut rng).unwrap();
                if seen.insert((s, o)) {
                    builder.insert(Triple::iris(&synth_entity(s), predicate, &synth_entity(o)));
                }
            }
        }
    }
    Ok((builder.freeze(), ClusterSimilarity::new(clusters)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryGenSpec {
    pub count: usize,
    /// Logical patterns per query, each expanded to a UNION over its synonym cluster.
    #[serde(default = "default_max_patterns")]
    pub max_patterns: usize,
    /// Cap on the number of distinct predicates one query may touch.
    #[serde(default)]
    pub max_predicates: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

fn default_max_patterns() -> usize {
    4
}

impl Default for QueryGenSpec {
    fn default() -> Self {
        QueryGenSpec { count: 10, max_patterns: 4, max_predicates: None, seed: 0 }
    }
}

const VARS: [&str; 4] = ["a", "b", "c", "d"];

/// Random SELECT queries built from 1 to `max_patterns` logical patterns
/// combined with joins, UNION and OPTIONAL. Every logical pattern whose
/// predicate has planted synonyms is written as a UNION over the whole
/// cluster, which is the query shape the summarizers are meant to shrink.
pub fn generate_queries(graph: &Graph, clusters: &ClusterSimilarity, spec: &QueryGenSpec) -> Vec<Query> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let predicates = graph.predicates();
    if predicates.is_empty() {
        return Vec::new();
    }
    let mut queries = Vec::with_capacity(spec.count);
    while queries.len() < spec.count {
        let n = rng.gen_range(1..=spec.max_patterns.max(1));
        let mut touched: BTreeSet<String> = BTreeSet::new();
        let mut parts: Vec<GraphPattern> = Vec::new();
        for _ in 0..n {
            let p = predicates.choose(&mut rng).unwrap();
            let cluster: Vec<String> = clusters.cluster_of(p).map(<[String]>::to_vec).unwrap_or_else(|| vec![p.clone()]);
            if let Some(cap) = spec.max_predicates {
                let after: BTreeSet<&String> = touched.iter().chain(&cluster).collect();
                if after.len() > cap {
                    continue;
                }
            }
            touched.extend(cluster.iter().cloned());
            parts.push(logical_pattern(graph, &cluster, p, &mut rng));
        }
        if parts.is_empty() {
            continue;
        }
        let mut iter = parts.into_iter();
        let mut body = iter.next().unwrap();
        for part in iter {
            body = match rng.gen_range(0..4) {
                0 => GraphPattern::union(body, part),
                1 => GraphPattern::optional(body, part),
                _ => join(body, part),
            };
        }
        let vars = body.variables();
        if vars.is_empty() {
            // Fully ground patterns have nothing to project.
            continue;
        }
        let projection = if rng.gen_bool(0.5) {
            Projection::All
        } else {
            let mut chosen: Vec<Variable> = vars.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect();
            if chosen.is_empty() {
                chosen.push(vars[0].clone());
            }
            Projection::Variables(chosen)
        };
        queries.push(Query {
            prefixes: vec![("s".to_owned(), SYNTH_NS.to_owned())],
            projection,
            distinct: rng.gen_bool(0.5),
            pattern: body,
        });
    }
    queries
}

fn join(a: GraphPattern, b: GraphPattern) -> GraphPattern {
    match (a, b) {
        (GraphPattern::Bgp(mut x), GraphPattern::Bgp(y)) => {
            x.extend(y);
            GraphPattern::Bgp(x)
        }
        (a, b) => GraphPattern::join(a, b),
    }
}

fn logical_pattern(graph: &Graph, cluster: &[String], p: &str, rng: &mut ChaCha8Rng) -> GraphPattern {
    let var = |rng: &mut ChaCha8Rng| TermPattern::var(VARS[rng.gen_range(0..VARS.len())]);
    let sample = graph.iri_id(p).map(|pid| graph.match_ids(None, Some(pid), None)).unwrap_or_default();
    let pick = |rng: &mut ChaCha8Rng| sample.choose(rng).copied();
    let subject = match pick(rng) {
        Some(t) if rng.gen_bool(0.15) => TermPattern::Term(graph.term(t.s).clone()),
        _ => var(rng),
    };
    let object = match pick(rng) {
        Some(t) if rng.gen_bool(0.35) => TermPattern::Term(graph.term(t.o).clone()),
        _ => var(rng),
    };
    let branch = |q: &String| GraphPattern::Bgp(vec![TriplePattern::new(subject.clone(), TermPattern::iri(q.clone()), object.clone())]);
    GraphPattern::union_all(cluster.iter().map(branch))
}

/// Percentage reduction `(1 - summary / original) * 100`. Negative when the
/// summary is larger than the original.
pub fn summarization_ratio(original: usize, summary: usize) -> Result<f64, BenchError> {
    if original == 0 {
        return Err(BenchError::ZeroOriginal);
    }
    Ok((1.0 - summary as f64 / original as f64) * 100.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Direct,
    Gbs,
    Qbs,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Direct => "direct",
            Engine::Gbs => "gbs",
            Engine::Qbs => "qbs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimilarityKind {
    /// Skip-gram over random walks.
    #[default]
    Rdf2vec,
    /// The generator's planted clusters, or a cluster TSV for file graphs.
    Clusters,
    WordVectors,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphInput {
    pub name: String,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub generator: Option<GeneratorSpec>,
    /// Cluster TSV used with `similarity = "clusters"` for file graphs.
    #[serde(default)]
    pub clusters: Option<PathBuf>,
    /// Random queries generated against this graph and its clusters.
    #[serde(default)]
    pub generated_queries: Option<QueryGenSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryInput {
    pub id: String,
    #[serde(default)]
    pub text: Option<String>,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

/// Benchmark configuration, read from TOML.
///
/// ```toml
/// repetitions = 3
/// threshold = 0.5
/// engines = ["direct", "gbs", "qbs"]
/// similarity = "rdf2vec"          # or "clusters", "word-vectors"
/// seed = 7
///
/// [[graphs]]
/// name = "synthetic"
/// generator = { entities = 2000, predicates = 20, clusters = [3, 2], triples_per_predicate = 200, object_pool = 40 }
/// generated_queries = { count = 5 }
///
/// [[queries]]
/// id = "q1"
/// path = "q1.rq"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_engines")]
    pub engines: Vec<Engine>,
    #[serde(default)]
    pub similarity: SimilarityKind,
    #[serde(default)]
    pub vectors: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub keep_singletons: bool,
    #[serde(default)]
    pub embedding: Rdf2VecConfig,
    pub graphs: Vec<GraphInput>,
    /// Queries run against every graph.
    #[serde(default)]
    pub queries: Vec<QueryInput>,
}

fn default_repetitions() -> usize {
    3
}

fn default_threshold() -> f64 {
    0.5
}

fn default_engines() -> Vec<Engine> {
    vec![Engine::Direct, Engine::Gbs, Engine::Qbs]
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        let config: BenchConfig = toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        if config.repetitions == 0 {
            return Err(BenchError::Config("repetitions must be at least 1".into()));
        }
        if !(config.threshold > 0.0 && config.threshold < 1.0) {
            return Err(BenchError::Config("threshold must lie strictly between 0 and 1".into()));
        }
        for g in &config.graphs {
            if g.path.is_some() == g.generator.is_some() {
                return Err(BenchError::Config(format!("graph {:?} needs exactly one of path or generator", g.name)));
            }
        }
        for q in &config.queries {
            if q.path.is_some() == q.text.is_some() {
                return Err(BenchError::Config(format!("query {:?} needs exactly one of path or text", q.id)));
            }
        }
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub graph: String,
    pub query_id: String,
    pub engine: Engine,
    pub original_triples: usize,
    pub summary_triples: usize,
    /// Reduction percentage, clamped to [0, 100].
    pub sr_percent: f64,
    /// Unclamped `summary / original`.
    pub size_ratio: f64,
    pub st_seconds: f64,
    pub qa_seconds: f64,
    pub distinct_answers: usize,
    pub bag_answers: usize,
    /// Distinct answers equal direct evaluation; absent for direct rows.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lossless: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl BenchRow {
    fn failed(graph: &str, query_id: &str, engine: Engine, original: usize, error: String) -> Self {
        BenchRow {
            graph: graph.to_owned(),
            query_id: query_id.to_owned(),
            engine,
            original_triples: original,
            summary_triples: 0,
            sr_percent: 0.0,
            size_ratio: 0.0,
            st_seconds: 0.0,
            qa_seconds: 0.0,
            distinct_answers: 0,
            bag_answers: 0,
            lossless: None,
            error: Some(error),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

struct Loaded {
    name: String,
    graph: Graph,
    clusters: Option<ClusterSimilarity>,
    queries: Vec<(String, Query)>,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn load_graph(path: &Path) -> Result<Graph, BenchError> {
    let file = std::fs::File::open(path)?;
    parse_ntriples(io::BufReader::new(file), ParseOptions::default())
        .map_err(|source| BenchError::Input { path: path.to_owned(), source })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn row(graph: &str, query_id: &str, engine: Engine, original: usize, summary: usize) -> BenchRow {
    let sr = summarization_ratio(original.max(1), summary).unwrap_or(0.0);
    BenchRow {
        graph: graph.to_owned(),
        query_id: query_id.to_owned(),
        engine,
        original_triples: original,
        summary_triples: summary,
        sr_percent: sr.clamp(0.0, 100.0),
        size_ratio: summary as f64 / original.max(1) as f64,
        st_seconds: 0.0,
        qa_seconds: 0.0,
        distinct_answers: 0,
        bag_answers: 0,
        lossless: None,
        error: None,
    }
}

/// Runs every configured (graph, query, engine) cell. Timings are means over
/// `repetitions`; a failing cell is recorded in its row and does not abort
/// the run. Relative paths resolve against `base`.
pub fn run_benchmark(config: &BenchConfig, base: &Path) -> Result<BenchReport, BenchError> {
    let shared_queries: Vec<(String, Query)> = config
        .queries
        .iter()
        .map(|q| {
            let text = match (&q.text, &q.path) {
                (Some(t), _) => t.clone(),
                (None, Some(p)) => std::fs::read_to_string(resolve(base, p))?,
                (None, None) => unreachable!("validated by from_toml"),
            };
            Ok((q.id.clone(), parse_query(&text)?))
        })
        .collect::<Result<_, BenchError>>()?;
    let word_vectors = match (&config.similarity, &config.vectors) {
        (SimilarityKind::WordVectors, Some(p)) => {
            let file = std::fs::File::open(resolve(base, p))?;
            Some(load_vectors(io::BufReader::new(file))?)
        }
        (SimilarityKind::WordVectors, None) => {
            return Err(BenchError::Config("similarity = \"word-vectors\" needs a vectors path".into()))
        }
        _ => None,
    };
    let embedding = config.embedding.with_seed(config.seed);

    let mut report = BenchReport::default();
    for input in &config.graphs {
        let loaded = load(input, base, &shared_queries)?;
        let similarity: Option<Box<dyn PredicateSimilarity>> = match config.similarity {
            SimilarityKind::Clusters => match &loaded.clusters {
                Some(c) => Some(Box::new(c.clone())),
                None => return Err(BenchError::Config(format!("graph {:?} has no clusters", loaded.name))),
            },
            SimilarityKind::WordVectors => Some(Box::new(word_vectors.clone().unwrap())),
            SimilarityKind::Rdf2vec => None,
        };
        run_graph(config, &embedding, &loaded, similarity.as_deref(), &mut report);
    }
    Ok(report)
}

fn load(input: &GraphInput, base: &Path, shared: &[(String, Query)]) -> Result<Loaded, BenchError> {
    let (graph, planted) = match (&input.path, &input.generator) {
        (Some(p), _) => (load_graph(&resolve(base, p))?, None),
        (None, Some(spec)) => {
            let (g, c) = generate_synthetic_graph(spec)?;
            (g, Some(c))
        }
        (None, None) => return Err(BenchError::Config(format!("graph {:?} has no source", input.name))),
    };
    let clusters = match &input.clusters {
        Some(p) => Some(ClusterSimilarity::read(io::BufReader::new(std::fs::File::open(resolve(base, p))?))?),
        None => planted,
    };
    let mut queries = shared.to_vec();
    if let Some(spec) = &input.generated_queries {
        let oracle = clusters.clone().unwrap_or_default();
        for (i, q) in generate_queries(&graph, &oracle, spec).into_iter().enumerate() {
            queries.push((format!("gen{i}"), q));
        }
    }
    Ok(Loaded { name: input.name.clone(), graph, clusters, queries })
}

fn run_graph(
    config: &BenchConfig,
    embedding: &Rdf2VecConfig,
    loaded: &Loaded,
    fixed: Option<&dyn PredicateSimilarity>,
    report: &mut BenchReport,
) {
    let graph = &loaded.graph;
    let original = graph.len();
    let reps = config.repetitions;

    // GBS summarizes once per graph, offline.
    let gbs = if config.engines.contains(&Engine::Gbs) {
        let options = GbsOptions { keep_singletons: config.keep_singletons, ..GbsOptions::default() };
        let mut times = Vec::new();
        let mut summary = None;
        for _ in 0..reps {
            let clock = Stopwatch::start();
            summary = Some(gbs_summarize(graph, &options));
            times.push(clock.seconds());
        }
        let learned = match fixed {
            Some(_) => None,
            None => Some(embedding.embed(graph)),
        };
        Some((summary.unwrap(), mean(&times), learned))
    } else {
        None
    };

    for (qid, query) in &loaded.queries {
        let distinct_query = query.clone().with_distinct(true);
        let mut times = Vec::new();
        let mut direct = None;
        for _ in 0..reps {
            let clock = Stopwatch::start();
            direct = Some(evaluate(graph, query));
            times.push(clock.seconds());
        }
        let direct = direct.unwrap();
        let truth = evaluate(graph, &distinct_query).distinct();
        if config.engines.contains(&Engine::Direct) {
            let mut r = row(&loaded.name, qid, Engine::Direct, original, original);
            r.qa_seconds = mean(&times);
            r.distinct_answers = direct.distinct().len();
            r.bag_answers = direct.len();
            report.rows.push(r);
        }

        if let Some((summary, st, learned)) = &gbs {
            let cell = (|| -> Result<BenchRow, String> {
                let summary = summary.as_ref().map_err(GbsError::to_string)?;
                let sim: &dyn PredicateSimilarity = match (fixed, learned) {
                    (Some(f), _) => f,
                    (None, Some(Ok(store))) => store as &VectorStore,
                    (None, Some(Err(e))) => return Err(e.to_string()),
                    (None, None) => unreachable!(),
                };
                let (rewritten, _) = gbs_rewrite(query, sim, config.threshold).map_err(|e| e.to_string())?;
                if gbs_answer_count(summary, &rewritten) > GBS_EXPANSION_LIMIT as u128 {
                    return Err(GbsError::ExpansionLimit(GBS_EXPANSION_LIMIT).to_string());
                }
                let mut times = Vec::new();
                let mut answers = None;
                for _ in 0..reps {
                    let clock = Stopwatch::start();
                    answers = Some(gbs_answer(summary, &rewritten));
                    times.push(clock.seconds());
                }
                let answers = answers.unwrap();
                let distinct =
                    gbs_distinct_answers(summary, &rewritten, GBS_EXPANSION_LIMIT).map_err(|e| e.to_string())?;
                let mut r = row(&loaded.name, qid, Engine::Gbs, original, summary.graph.len());
                r.st_seconds = *st;
                r.qa_seconds = mean(&times);
                r.distinct_answers = distinct.len();
                r.bag_answers = answers.len();
                r.lossless = Some(distinct == truth);
                Ok(r)
            })();
            report.rows.push(cell.unwrap_or_else(|e| BenchRow::failed(&loaded.name, qid, Engine::Gbs, original, e)));
        }

        if config.engines.contains(&Engine::Qbs) {
            let options = QbsOptions { threshold: config.threshold, ..QbsOptions::default() };
            let source = match fixed {
                Some(f) => SimilaritySource::Fixed(f),
                None => SimilaritySource::SubgraphWalks(embedding),
            };
            let cell = (|| -> Result<BenchRow, QbsError> {
                let mut st = Vec::new();
                let mut qa = Vec::new();
                let mut last = None;
                for _ in 0..reps {
                    let run = qbs_run_query(graph, query, source, &options)?;
                    st.push(run.st_seconds);
                    qa.push(run.qa_seconds);
                    last = Some(run);
                }
                let run = last.unwrap();
                let distinct = evaluate(&run.bundle.augmented, &run.bundle.rewritten.clone().with_distinct(true)).distinct();
                let mut r = row(&loaded.name, qid, Engine::Qbs, original, run.bundle.augmented.len());
                r.st_seconds = mean(&st);
                r.qa_seconds = mean(&qa);
                r.distinct_answers = distinct.len();
                r.bag_answers = run.solutions.len();
                r.lossless = Some(distinct == truth);
                Ok(r)
            })();
            report
                .rows
                .push(cell.unwrap_or_else(|e| BenchRow::failed(&loaded.name, qid, Engine::Qbs, original, e.to_string())));
        }
    }
}

impl BenchReport {
    /// One JSON object per row.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for r in &self.rows {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Same as [`write_jsonl`](Self::write_jsonl) with timing fields zeroed,
    /// for byte-level reproducibility checks.
    pub fn write_jsonl_untimed<W: Write>(&self, out: W) -> io::Result<()> {
        let mut copy = self.clone();
        for r in &mut copy.rows {
            r.st_seconds = 0.0;
            r.qa_seconds = 0.0;
        }
        copy.write_jsonl(out)
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let mut sizes: BTreeMap<(String, Engine), Vec<&BenchRow>> = BTreeMap::new();
        for r in self.rows.iter().filter(|r| r.error.is_none()) {
            sizes.entry((r.graph.clone(), r.engine)).or_default().push(r);
        }

        s.push_str("Summarization ratio\n");
        let _ = writeln!(s, "{:<20} {:<7} {:>12} {:>14} {:>8} {:>10}", "graph", "engine", "original", "summary (avg)", "SR %", "ST (s)");
        for ((graph, engine), rows) in &sizes {
            if *engine == Engine::Direct {
                continue;
            }
            let summary = rows.iter().map(|r| r.summary_triples as f64).sum::<f64>() / rows.len() as f64;
            let sr = rows.iter().map(|r| r.sr_percent).sum::<f64>() / rows.len() as f64;
            let st = rows.iter().map(|r| r.st_seconds).sum::<f64>() / rows.len() as f64;
            let _ = writeln!(
                s,
                "{:<20} {:<7} {:>12} {:>14.1} {:>8.2} {:>10.4}",
                graph,
                engine.name(),
                rows[0].original_triples,
                summary,
                sr,
                st
            );
        }

        s.push_str("\nNumber of answers (distinct / bag)\n");
        let mut by_query: BTreeMap<(String, String), BTreeMap<Engine, &BenchRow>> = BTreeMap::new();
        for r in &self.rows {
            by_query.entry((r.graph.clone(), r.query_id.clone())).or_default().insert(r.engine, r);
        }
        let _ = writeln!(s, "{:<20} {:<8} {:>14} {:>14} {:>14}", "graph", "query", "direct", "gbs", "qbs");
        let cell = |m: &BTreeMap<Engine, &BenchRow>, e: Engine| match m.get(&e) {
            None => "-".to_owned(),
            Some(r) if r.error.is_some() => "error".to_owned(),
            Some(r) => {
                let mark = match r.lossless {
                    Some(false) => "*",
                    _ => "",
                };
                format!("{}/{}{}", r.distinct_answers, r.bag_answers, mark)
            }
        };
        for ((graph, q), m) in &by_query {
            let _ = writeln!(
                s,
                "{:<20} {:<8} {:>14} {:>14} {:>14}",
                graph,
                q,
                cell(m, Engine::Direct),
                cell(m, Engine::Gbs),
                cell(m, Engine::Qbs)
            );
        }
        s.push_str("(* distinct answers differ from direct evaluation)\n");

        s.push_str("\nExecution time in seconds (ST + QA)\n");
        let _ = writeln!(s, "{:<20} {:<8} {:>12} {:>20} {:>20}", "graph", "query", "direct", "gbs", "qbs");
        let time = |m: &BTreeMap<Engine, &BenchRow>, e: Engine| match m.get(&e) {
            Some(r) if r.error.is_none() => format!("{:.4}+{:.4}", r.st_seconds, r.qa_seconds),
            _ => "-".to_owned(),
        };
        for ((graph, q), m) in &by_query {
            let direct = m.get(&Engine::Direct).map(|r| format!("{:.4}", r.qa_seconds)).unwrap_or_else(|| "-".into());
            let _ = writeln!(s, "{:<20} {:<8} {:>12} {:>20} {:>20}", graph, q, direct, time(m, Engine::Gbs), time(m, Engine::Qbs));
        }
        for r in self.rows.iter().filter(|r| r.error.is_some()) {
            let _ = writeln!(s, "error in {} {} {}: {}", r.graph, r.query_id, r.engine.name(), r.error.as_deref().unwrap());
        }
        s
    }
}

/// Members of each similarity set that fall outside the anchor's planted
/// cluster, as `(anchor, member)` pairs.
pub fn recovery_misses(sets: &BTreeMap<String, SimilaritySet>, planted: &ClusterSimilarity) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (anchor, set) in sets {
        for member in set.members.keys() {
            if !planted.same_cluster(anchor, member) {
                out.push((anchor.clone(), member.clone()));
            }
        }
    }
    out
}

/// Whether every row of `found` agrees with some row of `reference` on all
/// variables `found` binds.
pub fn subsumed(found: &BTreeSet<Vec<Option<Term>>>, reference: &BTreeSet<Vec<Option<Term>>>) -> bool {
    let mut by_mask: BTreeMap<Vec<bool>, BTreeSet<Vec<Option<&Term>>>> = BTreeMap::new();
    found.iter().all(|row| {
        let mask: Vec<bool> = row.iter().map(Option::is_some).collect();
        let keys = by_mask.entry(mask).or_insert_with_key(|mask| {
            reference
                .iter()
                .map(|r| r.iter().zip(mask).map(|(cell, &bound)| if bound { cell.as_ref() } else { None }).collect())
                .collect()
        });
        keys.contains(&row.iter().map(Option::as_ref).collect::<Vec<_>>())
    })
}
