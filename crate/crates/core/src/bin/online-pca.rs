use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use online_pca::algorithms::{BoundMode, Regime};
use online_pca::analysis::{bracket_experiment, lemma_constant, two_expert_winner_mc, LossGenerator};
use online_pca::capped_simplex::{decompose_corners, entropic_project, euclidean_project};
use online_pca::harness::{
    bound_report, estimate_regret, fmt_g12, parse_config_file, parse_list, run_seeds, sweep_eta, write_report,
    write_summaries, write_sweep, write_traces, BoundPoint, EtaChoice, GameConfig, LossMode, Measurement,
};

#[derive(Parser)]
#[command(name = "online-pca", version, about = "Online PCA learners, adversaries and regret experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play one game per seed and write per-trial cumulative losses.
    Run(GameArgs),
    /// Play every seed and write one summary row per seed (or one row per
    /// learning rate with --eta-sweep).
    Estimate(GameArgs),
    /// Closed-form bounds, optionally with measured regret.
    Bounds(BoundsArgs),
    /// Project a vector onto the capped simplex.
    Project(ProjectArgs),
    /// Tournament and two-expert Monte-Carlo experiments.
    Lemma(LemmaArgs),
}

/// Game options. Values given here override the config file.
#[derive(Args)]
struct GameArgs {
    /// Flat `key = value` file with any of the options below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long, conflicts_with = "budget")]
    horizon: Option<String>,
    #[arg(long)]
    budget: Option<String>,
    /// sparse | dense
    #[arg(long)]
    regime: Option<String>,
    /// loss-meg | gain-meg | gd
    #[arg(long)]
    algorithm: Option<String>,
    /// first2k | uniform | dense-bernoulli | gd-killer | zero
    #[arg(long)]
    adversary: Option<String>,
    /// Learning rate or `auto`.
    #[arg(long, conflicts_with = "eta_sweep")]
    eta: Option<String>,
    /// Comma-separated learning rates.
    #[arg(long)]
    eta_sweep: Option<String>,
    /// `a..b` or a comma-separated list.
    #[arg(long)]
    seeds: Option<String>,
    /// expected | sampled
    #[arg(long)]
    loss_mode: Option<String>,
    /// vector | matrix
    #[arg(long)]
    representation: Option<String>,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl GameArgs {
    fn resolve(&self) -> Result<(GameConfig, Option<PathBuf>)> {
        let mut pairs = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                parse_config_file(&text)?
            }
            None => BTreeMap::new(),
        };
        let flags = [
            ("n", &self.n),
            ("k", &self.k),
            ("horizon", &self.horizon),
            ("budget", &self.budget),
            ("regime", &self.regime),
            ("algorithm", &self.algorithm),
            ("adversary", &self.adversary),
            ("eta", &self.eta),
            ("eta-sweep", &self.eta_sweep),
            ("seeds", &self.seeds),
            ("loss-mode", &self.loss_mode),
            ("representation", &self.representation),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                // A flag replaces its file counterpart and any alternative to it.
                match key {
                    "horizon" => drop(pairs.remove("budget")),
                    "budget" => drop(pairs.remove("horizon")),
                    "eta" => drop(pairs.remove("eta-sweep")),
                    "eta-sweep" => drop(pairs.remove("eta")),
                    _ => {}
                }
                pairs.insert(key.to_string(), v.clone());
            }
        }
        let out = match (&self.out, pairs.remove("out")) {
            (Some(p), _) => Some(p.clone()),
            (None, file) => file.map(PathBuf::from),
        };
        Ok((GameConfig::from_pairs(&pairs)?, out))
    }
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    n: usize,
    /// Comma-separated values of k.
    #[arg(long)]
    k: String,
    #[arg(long, conflicts_with = "budget")]
    horizon: Option<f64>,
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long, default_value = "sparse")]
    regime: String,
    /// Also measure regret on this adversary with tuned learning rates.
    #[arg(long)]
    adversary: Option<String>,
    #[arg(long, default_value = "1..10")]
    seeds: String,
    #[arg(long, default_value = "expected")]
    loss_mode: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Euclidean,
    Entropic,
}

#[derive(Args)]
struct ProjectArgs {
    #[arg(long, value_enum)]
    method: Method,
    /// Capped-simplex sum.
    #[arg(long)]
    m: usize,
    /// Comma-separated input vector.
    #[arg(long, allow_hyphen_values = true)]
    values: String,
    /// Also print the corner decomposition of the result.
    #[arg(long)]
    corners: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    /// Two-expert winner loss against `Tp - c sqrt(Tp)`.
    Winner,
    /// Minimum expert loss against the bracket bound.
    Tournament,
}

#[derive(Args)]
struct LemmaArgs {
    #[arg(value_enum)]
    experiment: Experiment,
    #[arg(long)]
    horizon: usize,
    /// Per-expert hit probability (winner), or the Bernoulli rate
    /// (tournament with --generator bernoulli).
    #[arg(long, default_value_t = 0.125)]
    p: f64,
    /// Tournament rounds S (n = 2^S experts).
    #[arg(long, default_value_t = 3)]
    rounds: u32,
    /// single | bernoulli
    #[arg(long, default_value = "single")]
    generator: String,
    #[arg(long, default_value_t = 100_000)]
    replicates: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(args: &GameArgs) -> Result<()> {
    let (config, out) = args.resolve()?;
    let etas = config.etas()?;
    if etas.len() != 1 {
        bail!("`run` plays a single learning rate; use `estimate` with --eta-sweep");
    }
    let traces = run_seeds(&config, etas[0])?;
    let mut w = output(&out)?;
    write_traces(&mut w, &traces)?;
    w.flush()?;
    Ok(())
}

fn estimate(args: &GameArgs) -> Result<()> {
    let (config, out) = args.resolve()?;
    let mut w = output(&out)?;
    if let EtaChoice::Sweep(_) = config.eta {
        write_sweep(&mut w, &sweep_eta(&config)?)?;
    } else {
        let eta = config.etas()?[0];
        let traces = run_seeds(&config, eta)?;
        write_summaries(&mut w, &traces)?;
        if config.seeds.len() >= 2 {
            let e = estimate_regret(&config)?;
            log::info!("eta {} mean regret {} (se {}) bound {}", e.eta, e.mean, e.std_error, e.bound);
        }
    }
    w.flush()?;
    Ok(())
}

fn bounds(args: &BoundsArgs) -> Result<()> {
    let regime: Regime = args.regime.parse()?;
    let mode = match (args.horizon, args.budget) {
        (Some(t), None) => BoundMode::Horizon(t),
        (None, Some(b)) => BoundMode::Budget(b),
        _ => bail!("give exactly one of --horizon and --budget"),
    };
    let ks: Vec<usize> = parse_list(&args.k, "k")?;
    let grid: Vec<BoundPoint> = ks.into_iter().map(|k| BoundPoint { n: args.n, k, regime, mode }).collect();
    let measurement = match &args.adversary {
        Some(a) => Some(Measurement {
            adversary: a.parse()?,
            seeds: online_pca::harness::parse_seeds(&args.seeds)?,
            loss_mode: args.loss_mode.parse::<LossMode>()?,
        }),
        None => None,
    };
    let rows = bound_report(&grid, measurement.as_ref())?;
    let mut w = output(&args.out)?;
    write_report(&mut w, &rows)?;
    w.flush()?;
    Ok(())
}

fn project(args: &ProjectArgs) -> Result<()> {
    let v: Vec<f64> = parse_list(&args.values, "values")?;
    let w = match args.method {
        Method::Euclidean => euclidean_project(&v, args.m)?,
        Method::Entropic => entropic_project(&v, args.m)?,
    };
    let join = |xs: &[f64]| xs.iter().map(|x| fmt_g12(*x)).collect::<Vec<_>>().join(",");
    println!("{}", join(w.as_slice()));
    if args.corners {
        for c in decompose_corners(&w)?.entries {
            let set: Vec<String> = c.set.iter().map(usize::to_string).collect();
            println!("{} {{{}}}", fmt_g12(c.probability), set.join(","));
        }
    }
    Ok(())
}

fn lemma(args: &LemmaArgs) -> Result<()> {
    match args.experiment {
        Experiment::Winner => {
            let est = two_expert_winner_mc(args.horizon as u64, args.p, args.replicates, args.seed)?;
            let tp = args.horizon as f64 * args.p;
            println!("T,p,Tp,mean_winner,std_error,c_hat");
            println!(
                "{},{},{},{},{},{}",
                args.horizon,
                fmt_g12(args.p),
                fmt_g12(tp),
                fmt_g12(est.mean),
                fmt_g12(est.std_error),
                fmt_g12(lemma_constant(args.horizon as f64, args.p, est.mean))
            );
        }
        Experiment::Tournament => {
            let generator = match args.generator.as_str() {
                "single" => LossGenerator::SingleRandomExpert,
                "bernoulli" => LossGenerator::Bernoulli(args.p),
                other => bail!("unknown generator '{other}'"),
            };
            let c = bracket_experiment(generator, args.rounds, args.horizon, args.replicates, args.seed)?;
            println!("mean_min,se_min,mean_tournament,se_tournament,bound,se_bound,holds_3se");
            println!(
                "{},{},{},{},{},{},{}",
                fmt_g12(c.min_loss.mean),
                fmt_g12(c.min_loss.std_error),
                fmt_g12(c.tournament.mean),
                fmt_g12(c.tournament.std_error),
                fmt_g12(c.bound()),
                fmt_g12(c.bound_std_error()),
                c.holds_within(3.0)
            );
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run(a) => run(&a),
        Command::Estimate(a) => estimate(&a),
        Command::Bounds(a) => bounds(&a),
        Command::Project(a) => project(&a),
        Command::Lemma(a) => lemma(&a),
    }
}
