use std::path::PathBuf;
use std::process::ExitCode;

use advx::pipeline::{DatasetSpec, Outcome, Run, RunConfig, Stage, REPORT_CSV};
use advx::Error;
use clap::{Args, Parser, Subcommand};

/// Train a GCN, distill deletion ground truth, train the adversarial
/// explainer and score its top-K explanations.
#[derive(Parser)]
#[command(name = "advx", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or load the dataset and split it.
    GenData(Opts),
    /// Train the target GCN.
    TrainGnn(Opts),
    /// Score edges by single-edge deletion.
    Distill(Opts),
    /// Train the generator and discriminator.
    TrainExplainer(Opts),
    /// Explanation accuracy for every K; writes report.csv and records.json.
    Evaluate(Opts),
    /// DOT files for a few test instances at the first K.
    Visualize(Opts),
    /// Every stage in order, reusing current artifacts.
    Pipeline(Opts),
    /// Print the resolved config as TOML.
    Config(Opts),
}

#[derive(Args)]
struct Opts {
    /// TOML run config.
    #[arg(long, short, conflicts_with = "dataset")]
    config: Option<PathBuf>,
    /// Builtin dataset, used instead of a config file.
    #[arg(long, value_parser = ["ba-shapes", "tree-cycles"])]
    dataset: Option<String>,
    /// Seed for data, target model and explainer.
    #[arg(long)]
    seed: Option<u64>,
    /// Run directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated K list.
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    /// Fidelity weight.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, short)]
    verbose: bool,
}

impl Opts {
    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut cfg = match (&self.config, &self.dataset) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(name)) => {
                let seed = self.seed.unwrap_or(0);
                RunConfig::for_dataset(DatasetSpec::builtin(name), seed, PathBuf::from("runs").join(name))?
            }
            (None, None) => return Err(Error::Config("pass --config <file> or --dataset <name>".into())),
        };
        if let Some(seed) = self.seed {
            cfg.set_seed(seed);
        }
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        if let Some(k) = &self.k {
            cfg.set_k(k.clone());
        }
        if let Some(l) = self.lambda {
            cfg.explainer.lambda = l;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let (stage, opts) = match &cli.command {
        Command::GenData(o) => (Some(Stage::GenData), o),
        Command::TrainGnn(o) => (Some(Stage::TrainGnn), o),
        Command::Distill(o) => (Some(Stage::Distill), o),
        Command::TrainExplainer(o) => (Some(Stage::TrainExplainer), o),
        Command::Evaluate(o) => (Some(Stage::Evaluate), o),
        Command::Visualize(o) => (Some(Stage::Visualize), o),
        Command::Pipeline(o) | Command::Config(o) => (None, o),
    };
    let level = if opts.verbose { "debug" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let cfg = match opts.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Command::Config(_) = cli.command {
        return match cfg.to_toml() {
            Ok(t) => {
                print!("{t}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        };
    }
    match execute(cfg, stage) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(cfg: RunConfig, stage: Option<Stage>) -> Result<(), Error> {
    let mut run = Run::open(cfg)?;
    let outcomes = match stage {
        Some(s) => vec![(s, run.run_stage(s)?)],
        None => run.pipeline()?,
    };
    for (s, o) in &outcomes {
        let what = match o {
            Outcome::Ran => "ran",
            Outcome::Cached => "cached",
        };
        eprintln!("{s}: {what}");
    }
    if outcomes.iter().any(|(s, _)| *s == Stage::Evaluate) {
        let csv = run.dir().join(REPORT_CSV);
        print!("{}", std::fs::read_to_string(&csv).map_err(|e| Error::Io { path: csv, source: e })?);
    }
    Ok(())
}
