use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rpnmf::harness::{
    self, parse_corpus_layout, CommandOutcome, HarnessError, InputFormat, MatrixFormat,
    PlanSettings,
};
use rpnmf::Algorithm;

#[derive(Parser)]
#[command(name = "rpnmf", version, about = "NMF with random-projection compression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One run; writes factors, trace and summary.
    Factorize(RunArgs),
    /// All algorithms across seeds; writes traces, per-run summary and a cost table.
    Compare(RunArgs),
    /// Cartesian grid over k, q, w, alpha, beta and seeds.
    Sweep(RunArgs),
    /// Writes the compressed matrices and a distortion report.
    Project(RunArgs),
    /// Prints the FLOP and memory estimate for given dimensions.
    Estimate(EstimateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Algorithm(s): mu, mu-rp, hals, hals-rp, fasthals, fasthals-rp.
    #[arg(long, value_delimiter = ',')]
    algo: Vec<Algorithm>,
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    /// Sketch width(s) r + r_ov; defaults to k + 5.
    #[arg(long, value_delimiter = ',')]
    q: Vec<usize>,
    /// Power iterations.
    #[arg(long, value_delimiter = ',')]
    w: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    beta: Vec<f64>,
    #[arg(long = "seeds", visible_alias = "seed", value_delimiter = ',')]
    seeds: Vec<u64>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    error_interval: Option<usize>,
    /// Data path, or a synthetic spec such as `d=200,n=100,rank=5,decay=1`.
    #[arg(long)]
    input: Option<String>,
    /// csv, mm, pgm-dir, corpus or synthetic (inferred when omitted).
    #[arg(long)]
    format: Option<InputFormat>,
    /// CSV input has a header row.
    #[arg(long)]
    header: bool,
    /// Corpus layout: lines (one document per line) or files.
    #[arg(long)]
    corpus_layout: Option<String>,
    #[arg(long)]
    vocab_size: Option<usize>,
    #[arg(long)]
    max_docs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Skip normalizing columns of A (FastHALS variants).
    #[arg(long)]
    no_normalize: bool,
    /// Point pairs sampled for the distortion report.
    #[arg(long)]
    sample_pairs: Option<usize>,
    /// Format of projected matrices: csv or mm.
    #[arg(long)]
    output_format: Option<MatrixFormat>,
    /// Plain `key = value` file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    algo: Algorithm,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    q: Option<usize>,
}

fn some<T>(v: Vec<T>) -> Option<Vec<T>> {
    (!v.is_empty()).then_some(v)
}

impl RunArgs {
    fn settings(self) -> Result<PlanSettings, HarnessError> {
        let base = match &self.config {
            Some(p) => PlanSettings::from_config_file(p)?,
            None => PlanSettings::default(),
        };
        let flags = PlanSettings {
            algorithms: some(self.algo),
            k: some(self.k),
            q: some(self.q),
            w: some(self.w),
            alpha: some(self.alpha),
            beta: some(self.beta),
            seeds: some(self.seeds),
            iters: self.iters,
            tol: self.tol,
            error_interval: self.error_interval,
            input: self.input,
            format: self.format,
            header: self.header.then_some(true),
            corpus_layout: self.corpus_layout.as_deref().map(parse_corpus_layout).transpose()?,
            vocab_size: self.vocab_size,
            max_docs: self.max_docs,
            out: self.out,
            jobs: self.jobs,
            normalize: self.no_normalize.then_some(false),
            sample_pairs: self.sample_pairs,
            output_format: self.output_format,
        };
        Ok(base.merged(flags))
    }
}

fn execute(command: Command) -> Result<CommandOutcome, HarnessError> {
    let (args, defaults, cmd): (RunArgs, &[Algorithm], fn(_) -> _) = match command {
        Command::Estimate(e) => {
            println!("{}", harness::estimate(e.algo, e.d, e.n, e.k, e.q)?);
            return Ok(CommandOutcome::default());
        }
        Command::Factorize(a) => (a, &[Algorithm::FastHals], harness::factorize),
        Command::Compare(a) => (a, &Algorithm::ALL, harness::compare),
        Command::Sweep(a) => (a, &[Algorithm::FastHalsRp], harness::sweep),
        Command::Project(a) => (a, &[Algorithm::FastHalsRp], harness::project),
    };
    let plan = args.settings()?.into_plan(defaults)?;
    cmd(&plan)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(outcome) => {
            for p in &outcome.outputs {
                eprintln!("wrote {}", p.display());
            }
            if outcome.success() {
                ExitCode::SUCCESS
            } else {
                eprintln!("rpnmf: {} of {} runs failed", outcome.failed, outcome.runs);
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("rpnmf: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
