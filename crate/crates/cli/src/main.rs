use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spatembed_cli::{run_all, run_stage, LevelSelection, PipelineConfig, Stage, SynthModel};

#[derive(Parser, Debug)]
#[command(name = "spatembed", version, about = "Spatial-embedding group tests on labeled graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// ITDK-style links file
    #[arg(long, global = true)]
    links: Option<PathBuf>,
    /// Canonical edge list (name_a<TAB>name_b)
    #[arg(long, global = true)]
    edges: Option<PathBuf>,
    /// Geolocation TSV (node<TAB>country<TAB>region)
    #[arg(long, global = true)]
    geo: Option<PathBuf>,
    /// Output / artifact directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Random sets per null set size
    #[arg(long, global = true, default_value_t = 100)]
    sets: usize,
    /// Null set sizes, comma separated
    #[arg(long, global = true, value_delimiter = ',', default_value = "10,20,50,100,200,500")]
    sizes: Vec<usize>,
    #[arg(long, global = true, default_value_t = 2_000_000)]
    pair_budget: u64,
    /// Relative eigenvalue floor for retained components
    #[arg(long, global = true, default_value_t = 1e-12)]
    eig_tol: f64,
    /// Pin the null scaling exponent instead of fitting it
    #[arg(long, global = true)]
    fix_alpha: Option<f64>,
    #[arg(long, global = true, default_value_t = 2)]
    min_group_size: usize,
    /// country | region | both
    #[arg(long, global = true, default_value = "country")]
    level: LevelSelection,
    /// Fail on the first malformed input line
    #[arg(long, global = true)]
    strict: bool,
    /// Fit the embedding on geolocated nodes only
    #[arg(long, global = true)]
    fit_labeled_only: bool,
    /// Draw null sets from geolocated nodes only
    #[arg(long, global = true)]
    null_labeled_only: bool,
    /// Null spread from pooled pair distances instead of set means
    #[arg(long, global = true)]
    pooled_null: bool,

    /// synth: gravity | er | pa
    #[arg(long, global = true, default_value = "gravity")]
    model: SynthModel,
    #[arg(long, global = true, default_value_t = 20_000)]
    nodes: usize,
    /// synth gravity: edges per arrival for each group (group count = list length)
    #[arg(long, global = true, value_delimiter = ',', default_value = "1,2,3,4,5,1,2,3,4,5,1,2,3,4,5,1,2,3,4,5")]
    stubs: Vec<usize>,
    #[arg(long, global = true, default_value_t = 4.0)]
    beta: f64,
    /// synth er: edge probability
    #[arg(long, global = true, default_value_t = 0.0003)]
    edge_prob: f64,
    /// synth pa: edges per arrival
    #[arg(long, global = true, default_value_t = 3)]
    attach: usize,
    /// synth er/pa: sizes of random label groups, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    random_groups: Vec<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Parse topology (+ geolocation) into the graph cache and canonical TSVs
    Ingest,
    /// Per-node degree statistics
    Features,
    /// Fit the whitened feature space
    Embed,
    /// Random-set null samples and scaling fit
    Null,
    /// Per-group mean distance Z-scores
    Test,
    /// Generate a labeled synthetic graph
    Synth,
    /// Histogram and counts of the group Z-scores
    Report,
    /// ingest, features, embed, null, test, report
    All,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = PipelineConfig::new(cli.out);
    cfg.links = cli.links;
    cfg.edges = cli.edges;
    cfg.geo = cli.geo;
    cfg.seed = cli.seed;
    cfg.sets = cli.sets;
    cfg.sizes = cli.sizes;
    cfg.pair_budget = cli.pair_budget;
    cfg.eig_tol = cli.eig_tol;
    cfg.fix_alpha = cli.fix_alpha;
    cfg.min_group_size = cli.min_group_size;
    cfg.level = cli.level;
    cfg.strict = cli.strict;
    cfg.fit_labeled_only = cli.fit_labeled_only;
    cfg.null_labeled_only = cli.null_labeled_only;
    cfg.pooled_null = cli.pooled_null;
    cfg.synth.model = cli.model;
    cfg.synth.nodes = cli.nodes;
    cfg.synth.stubs = cli.stubs;
    cfg.synth.beta = cli.beta;
    cfg.synth.edge_prob = cli.edge_prob;
    cfg.synth.attach = cli.attach;
    cfg.synth.random_groups = cli.random_groups;

    let outcome = match cli.command {
        Command::All => run_all(&cfg),
        Command::Ingest => run_stage(Stage::Ingest, &cfg),
        Command::Features => run_stage(Stage::Features, &cfg),
        Command::Embed => run_stage(Stage::Embed, &cfg),
        Command::Null => run_stage(Stage::Null, &cfg),
        Command::Test => run_stage(Stage::Test, &cfg),
        Command::Synth => run_stage(Stage::Synth, &cfg),
        Command::Report => run_stage(Stage::Report, &cfg),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
