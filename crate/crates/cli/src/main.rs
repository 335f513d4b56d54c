use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use graph_squash::bench::{generate_queries, generate_synthetic_graph, run_benchmark, BenchConfig, GeneratorSpec, QueryGenSpec};
use graph_squash::embedding::{
    generate_walks, load_vectors, ClusterSimilarity, PredicateSimilarity, Rdf2VecConfig, VectorStore,
};
use graph_squash::gbs::{gbs_answer, gbs_rewrite, gbs_summarize, write_membership, GbsOptions};
use graph_squash::qbs::{qbs_run_query, verify_lossless, QbsOptions, SimilaritySource};
use graph_squash::rdf::{parse_ntriples, write_ntriples, Graph, LiteralPolicy, ParseOptions};
use graph_squash::reasoner::RuleConfig;
use graph_squash::sparql::{evaluate, parse_query, Query, Solutions};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

fn data<E: std::fmt::Display>(context: impl std::fmt::Display) -> impl FnOnce(E) -> CliError {
    move |e| CliError::Data(format!("{context}: {e}"))
}

/// Graph summarization and query rewriting over RDF graphs.
#[derive(Parser, Debug)]
#[command(name = "graph-squash", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic graph with planted predicate synonyms.
    Gen(GenArgs),
    /// Summarize a graph offline (gbs) or for one query (qbs).
    Summarize(SummarizeArgs),
    /// Answer a query with one of the engines and write TSV results.
    Query(QueryArgs),
    /// Check that the query-based summary answers a query like the source graph.
    Verify(VerifyArgs),
    /// Run a benchmark configuration.
    Bench(BenchArgs),
    /// Dump random walks, one space-separated sequence per line.
    Walks(WalksArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    /// TOML generator settings.
    #[arg(long)]
    spec: PathBuf,
    /// Overrides the seed in the generator file.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    /// Also write the planted clusters as TSV.
    #[arg(long)]
    clusters_out: Option<PathBuf>,
    /// Also write this many random queries into --queries-dir.
    #[arg(long, requires = "queries_dir")]
    queries: Option<usize>,
    #[arg(long)]
    queries_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct InputArgs {
    /// N-Triples graph.
    #[arg(long)]
    input: PathBuf,
    /// Fail on literal-valued triples while parsing.
    #[arg(long)]
    reject_literals: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum EmbeddingKind {
    Rdf2vec,
    WordVectors,
    Clusters,
}

#[derive(Args, Debug)]
struct SimilarityArgs {
    /// Cosine threshold; a predicate is similar when its score is strictly above it.
    #[arg(long, env = "GRAPH_SQUASH_THRESHOLD", default_value_t = 0.5)]
    threshold: f64,
    #[arg(long, value_enum, default_value_t = EmbeddingKind::Rdf2vec)]
    embedding: EmbeddingKind,
    /// Word-vector file for `--embedding word-vectors`.
    #[arg(long)]
    vectors: Option<PathBuf>,
    /// Cluster TSV for `--embedding clusters`.
    #[arg(long)]
    clusters: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct InferenceArgs {
    /// Run the reasoner before query-based summarization.
    #[arg(long)]
    infer: bool,
    /// Skip the reasoner before grouping-based summarization.
    #[arg(long)]
    no_infer: bool,
    #[arg(long)]
    no_type_prop: bool,
    /// Transitive predicate IRI; repeatable. Defaults to rdfs:subClassOf.
    #[arg(long = "transitive-pred")]
    transitive_pred: Vec<String>,
}

impl InferenceArgs {
    fn rules(&self) -> RuleConfig {
        let mut rules = RuleConfig::default();
        if !self.transitive_pred.is_empty() {
            rules.transitive_predicates = self.transitive_pred.iter().cloned().collect();
        }
        rules.type_propagation = !self.no_type_prop;
        rules
    }

    fn gbs(&self) -> Option<RuleConfig> {
        (!self.no_infer).then(|| self.rules())
    }

    fn qbs(&self) -> Option<RuleConfig> {
        self.infer.then(|| self.rules())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Gbs,
    Qbs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum EngineArg {
    Direct,
    Gbs,
    Qbs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum LiteralArg {
    Reject,
    Strip,
    Keep,
}

#[derive(Args, Debug)]
struct GbsArgs {
    /// Keep super-nodes with a single member.
    #[arg(long)]
    keep_singletons: bool,
    /// Literal handling for grouping-based summarization.
    #[arg(long, value_enum, default_value_t = LiteralArg::Reject)]
    literals: LiteralArg,
}

#[derive(Args, Debug)]
struct SummarizeArgs {
    #[arg(long, value_enum)]
    method: Method,
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    query: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    similarity: SimilarityArgs,
    #[command(flatten)]
    inference: InferenceArgs,
    #[command(flatten)]
    gbs: GbsArgs,
}

#[derive(Args, Debug)]
struct QueryArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    query: PathBuf,
    #[arg(long, value_enum, default_value_t = EngineArg::Direct)]
    engine: EngineArg,
    /// TSV output; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    similarity: SimilarityArgs,
    #[command(flatten)]
    inference: InferenceArgs,
    #[command(flatten)]
    gbs: GbsArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    query: PathBuf,
    #[command(flatten)]
    similarity: SimilarityArgs,
    #[command(flatten)]
    inference: InferenceArgs,
    /// Also write the summary bundle into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory for report.jsonl and report.txt.
    #[arg(long)]
    out: PathBuf,
    /// Omit timing fields from report.jsonl.
    #[arg(long)]
    untimed: bool,
}

#[derive(Args, Debug)]
struct WalksArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn read_graph(args: &InputArgs) -> Result<Graph, CliError> {
    let file = File::open(&args.input).map_err(data(args.input.display()))?;
    let options = ParseOptions { reject_literals: args.reject_literals };
    parse_ntriples(BufReader::new(file), options).map_err(data(args.input.display()))
}

fn read_query(path: &Path) -> Result<Query, CliError> {
    let text = fs::read_to_string(path).map_err(data(path.display()))?;
    parse_query(&text).map_err(data(path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(data(parent.display()))?;
    }
    File::create(path).map(BufWriter::new).map_err(data(path.display()))
}

fn io_err(e: io::Error) -> CliError {
    CliError::Data(e.to_string())
}

/// The similarity chosen on the command line.
enum LoadedSimilarity {
    Vectors(VectorStore),
    Clusters(ClusterSimilarity),
    Rdf2vec(Rdf2VecConfig),
}

impl LoadedSimilarity {
    fn load(args: &SimilarityArgs) -> Result<Self, CliError> {
        if !(args.threshold > 0.0 && args.threshold < 1.0) {
            return Err(CliError::Usage(format!("--threshold must lie in (0, 1), got {}", args.threshold)));
        }
        match args.embedding {
            EmbeddingKind::Rdf2vec => Ok(Self::Rdf2vec(Rdf2VecConfig::default().with_seed(args.seed))),
            EmbeddingKind::WordVectors => {
                let path = args.vectors.as_ref().ok_or_else(|| CliError::Usage("--embedding word-vectors needs --vectors".into()))?;
                let file = File::open(path).map_err(data(path.display()))?;
                load_vectors(BufReader::new(file)).map(Self::Vectors).map_err(data(path.display()))
            }
            EmbeddingKind::Clusters => {
                let path = args.clusters.as_ref().ok_or_else(|| CliError::Usage("--embedding clusters needs --clusters".into()))?;
                let file = File::open(path).map_err(data(path.display()))?;
                ClusterSimilarity::read(BufReader::new(file)).map(Self::Clusters).map_err(data(path.display()))
            }
        }
    }

    fn qbs_source(&self) -> SimilaritySource<'_> {
        match self {
            Self::Vectors(v) => SimilaritySource::Fixed(v),
            Self::Clusters(c) => SimilaritySource::Fixed(c),
            Self::Rdf2vec(cfg) => SimilaritySource::SubgraphWalks(cfg),
        }
    }
}

fn gbs_options(inference: &InferenceArgs, gbs: &GbsArgs) -> GbsOptions {
    let literals = match gbs.literals {
        LiteralArg::Reject => LiteralPolicy::Reject,
        LiteralArg::Strip => LiteralPolicy::Strip,
        LiteralArg::Keep => LiteralPolicy::Keep,
    };
    GbsOptions { keep_singletons: gbs.keep_singletons, inference: inference.gbs(), literals }
}

fn qbs_options(similarity: &SimilarityArgs, inference: &InferenceArgs) -> QbsOptions {
    QbsOptions { threshold: similarity.threshold, inference: inference.qbs(), ..QbsOptions::default() }
}

fn gen(args: GenArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.spec).map_err(data(args.spec.display()))?;
    let mut spec: GeneratorSpec = toml::from_str(&text).map_err(data(args.spec.display()))?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let (graph, clusters) = generate_synthetic_graph(&spec).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut out = create(&args.out)?;
    write_ntriples(&graph, &mut out).and_then(|_| out.flush()).map_err(io_err)?;
    if let Some(path) = &args.clusters_out {
        let mut out = create(path)?;
        clusters.write(&mut out).and_then(|_| out.flush()).map_err(io_err)?;
    }
    if let (Some(count), Some(dir)) = (args.queries, &args.queries_dir) {
        let qspec = QueryGenSpec { count, seed: spec.seed, ..QueryGenSpec::default() };
        fs::create_dir_all(dir).map_err(data(dir.display()))?;
        for (i, q) in generate_queries(&graph, &clusters, &qspec).iter().enumerate() {
            let path = dir.join(format!("q{i:03}.rq"));
            fs::write(&path, format!("{q}\n")).map_err(data(path.display()))?;
        }
    }
    eprintln!("wrote {} triples to {}", graph.len(), args.out.display());
    Ok(())
}

fn summarize(args: SummarizeArgs) -> Result<(), CliError> {
    match (args.method, &args.query) {
        (Method::Gbs, Some(_)) => {
            return Err(CliError::Usage("grouping-based summarization runs offline and takes no --query".into()))
        }
        (Method::Qbs, None) => return Err(CliError::Usage("query-based summarization needs --query".into())),
        _ => {}
    }
    let graph = read_graph(&args.input)?;
    fs::create_dir_all(&args.out).map_err(data(args.out.display()))?;
    match args.method {
        Method::Gbs => {
            let summary = gbs_summarize(&graph, &gbs_options(&args.inference, &args.gbs)).map_err(data("summarize"))?;
            let mut out = create(&args.out.join("summary.nt"))?;
            write_ntriples(&summary.graph, &mut out).and_then(|_| out.flush()).map_err(io_err)?;
            let mut out = create(&args.out.join("membership.tsv"))?;
            write_membership(&summary.membership, &mut out).and_then(|_| out.flush()).map_err(io_err)?;
            eprintln!(
                "{} triples -> {} triples, {} super-nodes, {} inferred, {} singletons dropped",
                graph.len(),
                summary.graph.len(),
                summary.super_nodes.len(),
                summary.inferred_triples,
                summary.dropped_singletons
            );
        }
        Method::Qbs => {
            let query = read_query(args.query.as_deref().unwrap())?;
            let similarity = LoadedSimilarity::load(&args.similarity)?;
            let options = qbs_options(&args.similarity, &args.inference);
            let run = qbs_run_query(&graph, &query, similarity.qbs_source(), &options).map_err(data("summarize"))?;
            run.bundle.dump(&args.out).map_err(io_err)?;
            eprintln!(
                "{} triples -> {} triples ({} new), summarized in {:.3}s",
                graph.len(),
                run.bundle.augmented.len(),
                run.bundle.new_triples,
                run.st_seconds
            );
        }
    }
    Ok(())
}

fn write_solutions(solutions: &Solutions, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let mut w = create(path)?;
            solutions.write_tsv(&mut w).and_then(|_| w.flush()).map_err(io_err)
        }
        None => solutions.write_tsv(io::stdout().lock()).map_err(io_err),
    }
}

fn query(args: QueryArgs) -> Result<(), CliError> {
    let graph = read_graph(&args.input)?;
    let query = read_query(&args.query)?;
    let solutions = match args.engine {
        EngineArg::Direct => evaluate(&graph, &query),
        EngineArg::Qbs => {
            let similarity = LoadedSimilarity::load(&args.similarity)?;
            let options = qbs_options(&args.similarity, &args.inference);
            qbs_run_query(&graph, &query, similarity.qbs_source(), &options).map_err(data("query"))?.solutions
        }
        EngineArg::Gbs => {
            let similarity = LoadedSimilarity::load(&args.similarity)?;
            let summary = gbs_summarize(&graph, &gbs_options(&args.inference, &args.gbs)).map_err(data("summarize"))?;
            let trained;
            let sim: &dyn PredicateSimilarity = match &similarity {
                LoadedSimilarity::Vectors(v) => v,
                LoadedSimilarity::Clusters(c) => c,
                LoadedSimilarity::Rdf2vec(cfg) => {
                    trained = cfg.embed(&graph).map_err(data("embedding"))?;
                    &trained
                }
            };
            let (rewritten, _) = gbs_rewrite(&query, sim, args.similarity.threshold).map_err(data("rewrite"))?;
            gbs_answer(&summary, &rewritten)
        }
    };
    write_solutions(&solutions, args.out.as_deref())
}

fn verify(args: VerifyArgs) -> Result<(), CliError> {
    let graph = read_graph(&args.input)?;
    let query = read_query(&args.query)?;
    let similarity = LoadedSimilarity::load(&args.similarity)?;
    let options = qbs_options(&args.similarity, &args.inference);
    let run = qbs_run_query(&graph, &query, similarity.qbs_source(), &options).map_err(data("summarize"))?;
    if let Some(dir) = &args.out {
        run.bundle.dump(dir).map_err(io_err)?;
    }
    let report = verify_lossless(&graph, &query, &run.bundle);
    println!(
        "original answers {}, summary answers {}, missing {}, extra {}",
        report.original_answers,
        report.summary_answers,
        report.missing.len(),
        report.extra.len()
    );
    if report.equal {
        println!("lossless");
        Ok(())
    } else {
        Err(CliError::Verification("summary answers differ from the source graph".into()))
    }
}

fn bench(args: BenchArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.config).map_err(data(args.config.display()))?;
    let config = BenchConfig::from_toml(&text).map_err(|e| CliError::Usage(e.to_string()))?;
    let base = args.config.parent().unwrap_or(Path::new("."));
    let report = run_benchmark(&config, base).map_err(data("bench"))?;
    fs::create_dir_all(&args.out).map_err(data(args.out.display()))?;
    let mut out = create(&args.out.join("report.jsonl"))?;
    let written = if args.untimed { report.write_jsonl_untimed(&mut out) } else { report.write_jsonl(&mut out) };
    written.and_then(|_| out.flush()).map_err(io_err)?;
    let table = report.to_table();
    fs::write(args.out.join("report.txt"), &table).map_err(io_err)?;
    print!("{table}");
    Ok(())
}

fn walks(args: WalksArgs) -> Result<(), CliError> {
    let graph = read_graph(&args.input)?;
    let config = Rdf2VecConfig::default().with_seed(args.seed);
    let corpus = generate_walks(&graph, &config.walks);
    let mut out = create(&args.out)?;
    corpus.write(&mut out).and_then(|_| out.flush()).map_err(io_err)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Summarize(a) => summarize(a),
        Command::Query(a) => query(a),
        Command::Verify(a) => verify(a),
        Command::Bench(a) => bench(a),
        Command::Walks(a) => walks(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Usage(_)) {
                eprintln!("run `graph-squash --help` for usage");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
