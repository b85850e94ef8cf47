//! Command-line entry points: `train`, `eval`, `verify`, and `sweep`.
//!
//! Exit codes: 0 success, 1 runtime or suite failure, 2 unreadable/invalid
//! config, 3 unknown environment id, 4 missing checkpoint.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wbsac::agents::WbsacAgent;
use wbsac::harness::{self, ExperimentConfig, HarnessError};
use wbsac::rngs::seeded;

#[derive(Parser)]
#[command(name = "wbsac", about = "Barycentric-exploration actor-critic trainer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Path to the experiment TOML file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory override.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Agent kind override: wbsac | sac | wbsac-fixed.
    #[arg(long)]
    agent: Option<String>,
    /// Train-seed list override, e.g. "0,1,2".
    #[arg(long)]
    seed_set: Option<String>,
    /// Config overrides as dotted key=value pairs.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment (all train seeds) from a config file.
    Train(ConfigArgs),
    /// Evaluate a saved checkpoint for a number of deterministic episodes.
    Eval {
        #[command(flatten)]
        config: ConfigArgs,
        /// Path to a checkpoint written by `train`.
        #[arg(long)]
        checkpoint: PathBuf,
        /// Number of evaluation episodes.
        #[arg(long, default_value_t = 10)]
        episodes: u32,
        /// Evaluation seed.
        #[arg(long, default_value_t = 1000)]
        seed: u64,
    },
    /// Run the numeric verification suites (barycenter and W2 oracles,
    /// the entropy bound, gradient checks).
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Grid sweep over beta_o / lambda / fixed xi_o values; one run per
    /// grid point in its own subdirectory.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Comma-separated beta_o values.
        #[arg(long)]
        beta_o: Option<String>,
        /// Comma-separated lambda values.
        #[arg(long)]
        lambda: Option<String>,
        /// Comma-separated fixed xi_o values (switches agent to wbsac-fixed).
        #[arg(long)]
        fixed_xi: Option<String>,
    },
}

fn exit_code_for(err: &HarnessError) -> u8 {
    match err {
        HarnessError::Config(_) => 2,
        HarnessError::UnknownEnv(_) => 3,
        HarnessError::UnknownAgent(_) => 2,
        HarnessError::MissingCheckpoint(_) => 4,
        _ => 1,
    }
}

fn load_config(args: &ConfigArgs) -> Result<ExperimentConfig, HarnessError> {
    let mut overrides = args.overrides.clone();
    if let Some(agent) = &args.agent {
        overrides.push(format!("agent={agent}"));
    }
    if let Some(out) = &args.out {
        overrides.push(format!("out_dir=\"{}\"", out.display()));
    }
    if let Some(seeds) = &args.seed_set {
        overrides.push(format!("train_seeds=[{seeds}]"));
    }
    ExperimentConfig::load(&args.config, &overrides)
}

fn run_train(args: &ConfigArgs) -> Result<(), HarnessError> {
    let mut cfg = load_config(args)?;
    cfg.verbose = true;
    let record = harness::run_experiment(&cfg)?;
    for seed in &record.seeds {
        match &seed.aborted {
            Some(msg) => println!("seed {}: ABORTED ({msg})", seed.seed),
            None => {
                let last = seed.rows.last();
                println!(
                    "seed {}: final return {} coverage {} goal_reached {}",
                    seed.seed,
                    last.map_or(f64::NAN, |r| r.eval_return),
                    last.map_or(f64::NAN, |r| r.coverage),
                    seed.goal_reached
                );
            }
        }
    }
    if record.seeds.iter().any(|s| s.aborted.is_some()) {
        return Err(HarnessError::Config("one or more seeds aborted".into()));
    }
    println!("artifacts written to {}", cfg.out_dir.display());
    Ok(())
}

fn run_eval(
    args: &ConfigArgs,
    checkpoint: &PathBuf,
    episodes: u32,
    seed: u64,
) -> Result<(), HarnessError> {
    let cfg = load_config(args)?;
    if !checkpoint.exists() {
        return Err(HarnessError::MissingCheckpoint(
            checkpoint.display().to_string(),
        ));
    }
    let agent = WbsacAgent::load_checkpoint(checkpoint)
        .map_err(|e| HarnessError::MissingCheckpoint(e.to_string()))?;
    let mut total = 0.0;
    let mut reached = 0u32;
    for episode in 0..episodes {
        let mut env = build_env_for(&cfg)?;
        let mut rng = seeded(seed, &format!("cli-eval/{episode}"));
        let mut obs = env.reset(&mut rng);
        loop {
            let action = agent.act_eval(&obs)?;
            let out = env.step(&action);
            total += out.reward;
            if out.terminated {
                reached += 1;
                break;
            }
            if out.truncated {
                break;
            }
            obs = out.observation;
        }
    }
    println!(
        "eval over {episodes} episodes: mean return {}, goal episodes {reached}",
        total / episodes as f64
    );
    Ok(())
}

fn build_env_for(cfg: &ExperimentConfig) -> Result<wbsac::envs::EnvKind, HarnessError> {
    use wbsac::envs::{EnvKind, MazeEnv, MazeSpec, PointMassEnv, PointMassSpec};
    Ok(match cfg.env_id()? {
        harness::EnvId::Maze => {
            let spec = match &cfg.maze_file {
                Some(path) => MazeSpec::from_file(path)?,
                None => MazeSpec::default_medium(),
            };
            EnvKind::Maze(MazeEnv::new(spec))
        }
        harness::EnvId::PointMass => EnvKind::PointMass(PointMassEnv::new(PointMassSpec::default())),
    })
}

fn run_verify(seed: u64) -> Result<(), HarnessError> {
    let results = harness::verify::run_all(seed);
    let mut all_ok = true;
    for r in &results {
        println!("{}", r.line());
        all_ok &= r.passed;
    }
    if all_ok {
        Ok(())
    } else {
        Err(HarnessError::Config("verification suite failed".into()))
    }
}

fn parse_list(raw: &Option<String>, what: &str) -> Result<Vec<f64>, HarnessError> {
    match raw {
        None => Ok(vec![]),
        Some(s) => s
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| HarnessError::Config(format!("bad {what} value {v:?}")))
            })
            .collect(),
    }
}

fn run_sweep(
    args: &ConfigArgs,
    beta_o: &Option<String>,
    lambda: &Option<String>,
    fixed_xi: &Option<String>,
) -> Result<(), HarnessError> {
    let base = load_config(args)?;
    let betas = parse_list(beta_o, "beta_o")?;
    let lambdas = parse_list(lambda, "lambda")?;
    let xis = parse_list(fixed_xi, "fixed_xi")?;
    // Absent axes contribute a single pass-through point.
    let betas = if betas.is_empty() { vec![base.agent_config.beta_o] } else { betas };
    let lambdas = if lambdas.is_empty() {
        vec![base.agent_config.lambda_sched]
    } else {
        lambdas
    };
    let root = base.out_dir.clone();
    let mut count = 0usize;
    for &b in &betas {
        for &l in &lambdas {
            let points: Vec<Option<f64>> = if xis.is_empty() {
                vec![None]
            } else {
                xis.iter().copied().map(Some).collect()
            };
            for xi in points {
                let mut cfg = base.clone();
                cfg.agent_config.beta_o = b;
                cfg.agent_config.lambda_sched = l;
                let mut name = format!("beta{b}_lambda{l}");
                if let Some(xi) = xi {
                    cfg.agent = "wbsac-fixed".into();
                    cfg.fixed_xi_o = Some(xi);
                    name.push_str(&format!("_xi{xi}"));
                }
                cfg.out_dir = root.join(name);
                cfg.verbose = true;
                println!("sweep point: {}", cfg.out_dir.display());
                harness::run_experiment(&cfg)?;
                count += 1;
            }
        }
    }
    println!("sweep complete: {count} runs under {}", root.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train(args) => run_train(args),
        Command::Eval {
            config,
            checkpoint,
            episodes,
            seed,
        } => run_eval(config, checkpoint, *episodes, *seed),
        Command::Verify { seed } => run_verify(*seed),
        Command::Sweep {
            config,
            beta_o,
            lambda,
            fixed_xi,
        } => run_sweep(config, beta_o, lambda, fixed_xi),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
