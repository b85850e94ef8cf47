//! The train/evaluate loop: one deterministic run per seed, per-seed CSVs,
//! cross-seed aggregation, plots, heatmaps, and checkpoints.
//!
//! Determinism contract: given a config and code version, every emitted byte
//! is reproducible except wall-clock timestamps, which live only in
//! `metadata.toml`.

use std::fmt::Write as _;

use crate::agents::{ReplayBuffer, Transition, WbsacAgent};
use crate::envs::{heatmap_export, CoverageGrid, EnvKind, MazeEnv, MazeSpec, PointMassEnv, PointMassSpec};
use crate::gauss_ot::{differential_entropy, wasserstein_barycenter, BarycenterWeights};
use crate::rngs::seeded;

use super::{render_line_plot, ExperimentConfig, HarnessError, Series};

/// One evaluation-cadence row of the per-seed metrics CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub step: u64,
    pub eval_return: f64,
    pub coverage: f64,
    pub critic1_loss: f64,
    pub critic2_loss: f64,
    pub pessimistic_loss: f64,
    pub optimistic_loss: Option<f64>,
    pub alpha: f64,
    pub xi_o: f64,
    /// Exploration-entropy slack over the barycenter bound at this step.
    pub entropy_slack: f64,
}

#[derive(Debug, Clone)]
pub struct SeedRecord {
    pub seed: u64,
    pub rows: Vec<EvalRow>,
    /// Whether any training episode terminated at a goal.
    pub goal_reached: bool,
    pub min_entropy_slack: f64,
    /// Set when a non-finite loss aborted this seed's run.
    pub aborted: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub step: u64,
    pub return_mean: f64,
    pub return_std: f64,
    pub coverage_mean: f64,
    pub coverage_std: f64,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub seeds: Vec<SeedRecord>,
    pub aggregate: Vec<AggregateRow>,
}

/// Trailing moving average: mean over the last `min(window, i+1)` points.
pub fn moving_average(series: &[f64], window: usize) -> Vec<f64> {
    assert!(window >= 1, "window must be >= 1");
    let mut out = Vec::with_capacity(series.len());
    let mut acc = 0.0;
    for i in 0..series.len() {
        acc += series[i];
        if i >= window {
            acc -= series[i - window];
        }
        out.push(acc / (i.min(window - 1) + 1) as f64);
    }
    out
}

/// Per-step mean and population standard deviation across seeds.
/// All records must share the same evaluation steps.
pub fn aggregate_seeds(records: &[&SeedRecord]) -> Result<Vec<AggregateRow>, HarnessError> {
    let Some(first) = records.first() else {
        return Ok(Vec::new());
    };
    for r in records {
        if r.rows.len() != first.rows.len()
            || r.rows
                .iter()
                .zip(&first.rows)
                .any(|(a, b)| a.step != b.step)
        {
            return Err(HarnessError::MisalignedSteps);
        }
    }
    let n = records.len() as f64;
    let mut out = Vec::with_capacity(first.rows.len());
    for i in 0..first.rows.len() {
        let returns: Vec<f64> = records.iter().map(|r| r.rows[i].eval_return).collect();
        let coverages: Vec<f64> = records.iter().map(|r| r.rows[i].coverage).collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / n;
        let std = |v: &[f64], m: f64| (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n).sqrt();
        let (rm, cm) = (mean(&returns), mean(&coverages));
        out.push(AggregateRow {
            step: first.rows[i].step,
            return_mean: rm,
            return_std: std(&returns, rm),
            coverage_mean: cm,
            coverage_std: std(&coverages, cm),
        });
    }
    Ok(out)
}

fn build_env(cfg: &ExperimentConfig) -> Result<EnvKind, HarnessError> {
    Ok(match cfg.env_id()? {
        super::EnvId::Maze => {
            let spec = match &cfg.maze_file {
                Some(path) => MazeSpec::from_file(path)?,
                None => MazeSpec::default_medium(),
            };
            EnvKind::Maze(MazeEnv::new(spec))
        }
        super::EnvId::PointMass => EnvKind::PointMass(PointMassEnv::new(PointMassSpec::default())),
    })
}

/// Runs every train seed of the experiment, writes all artifacts under
/// `cfg.out_dir`, and returns the collected records.
///
/// A non-finite loss aborts only that seed (its CSV gets a diagnostic
/// comment line); config violations abort before any work.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunRecord, HarnessError> {
    cfg.validate()?;
    let out_dir = &cfg.out_dir;
    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    write_metadata(cfg)?;

    let mut seeds = Vec::new();
    for &seed in &cfg.train_seeds {
        let record = run_seed(cfg, seed)?;
        write_seed_csv(cfg, &record)?;
        seeds.push(record);
    }

    let complete: Vec<&SeedRecord> = seeds.iter().filter(|r| r.aborted.is_none()).collect();
    let aggregate = aggregate_seeds(&complete)?;
    write_aggregate_csv(cfg, &aggregate)?;
    emit_plots(cfg, &aggregate)?;
    Ok(RunRecord { seeds, aggregate })
}

fn write_metadata(cfg: &ExperimentConfig) -> Result<(), HarnessError> {
    let path = cfg.out_dir.join("metadata.toml");
    let echo = toml::to_string(cfg).map_err(|e| HarnessError::Config(e.to_string()))?;
    let started = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let text = format!(
        "code_version = \"{}\"\nstarted_unix = {}\ncoverage_denominator = \"free cells\"\n\n[config]\n{}",
        env!("CARGO_PKG_VERSION"),
        started,
        indent_table(&echo),
    );
    std::fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))
}

fn indent_table(toml_text: &str) -> String {
    // Nested tables need their headers re-rooted under [config].
    toml_text.replace("\n[", "\n[config.")
}

struct LossWindow {
    critic1: Vec<f64>,
    critic2: Vec<f64>,
    pessimistic: Vec<f64>,
    optimistic: Vec<f64>,
    alpha: f64,
}

impl LossWindow {
    fn new() -> Self {
        Self {
            critic1: Vec::new(),
            critic2: Vec::new(),
            pessimistic: Vec::new(),
            optimistic: Vec::new(),
            alpha: f64::NAN,
        }
    }

    fn mean(v: &[f64]) -> f64 {
        if v.is_empty() {
            f64::NAN
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    }
}

fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<SeedRecord, HarnessError> {
    let mut env = build_env(cfg)?;
    let agent_cfg = cfg.resolved_agent_config();
    let kind = cfg.agent_kind()?;
    let mut agent = WbsacAgent::new(env.obs_dim(), env.action_dim(), agent_cfg.clone(), kind, seed)?;
    let mut env_rng = seeded(seed, "env");
    let mut agent_rng = seeded(seed, "agent");
    let mut buffer = ReplayBuffer::new(agent_cfg.buffer_capacity);
    let mut coverage = env.coverage_grid();

    let mut record = SeedRecord {
        seed,
        rows: Vec::new(),
        goal_reached: false,
        min_entropy_slack: f64::INFINITY,
        aborted: None,
    };

    let mut obs = env.reset(&mut env_rng);
    coverage.update(env.position())?;
    let mut window = LossWindow::new();

    for t in 1..=cfg.total_env_steps {
        let step_result: Result<(), HarnessError> = (|| {
            let action = agent.act_explore(&obs, &mut agent_rng)?;
            let out = env.step(&action);
            coverage.update(env.position())?;
            if out.terminated {
                record.goal_reached = true;
            }
            buffer.push(Transition {
                state: std::mem::take(&mut obs),
                action,
                reward: out.reward,
                next_state: out.observation.clone(),
                done: out.terminated,
            })?;
            obs = if out.terminated || out.truncated {
                let o = env.reset(&mut env_rng);
                coverage.update(env.position())?;
                o
            } else {
                out.observation
            };
            agent.advance_env_step();

            if t >= agent_cfg.warmup_steps && buffer.len() >= agent_cfg.batch_size {
                for _ in 0..agent_cfg.gradient_steps_per_env_step {
                    let metrics = agent.train_step(&buffer, &mut agent_rng)?;
                    window.critic1.push(metrics.critic1_loss);
                    window.critic2.push(metrics.critic2_loss);
                    window.pessimistic.push(metrics.pessimistic_loss);
                    if let Some(l) = metrics.optimistic_loss {
                        window.optimistic.push(l);
                    }
                    window.alpha = metrics.alpha;
                }
            }
            Ok(())
        })();

        if let Err(e) = step_result {
            record.aborted = Some(format!("step {t}: {e}"));
            return Ok(record);
        }

        if t % cfg.eval_every == 0 {
            let eval_return = evaluate(cfg, &agent, seed, record.rows.len() as u64, None)?;
            let slack = entropy_slack(&agent, &obs)?;
            record.min_entropy_slack = record.min_entropy_slack.min(slack);
            let row = EvalRow {
                step: t,
                eval_return,
                coverage: coverage.coverage_fraction(),
                critic1_loss: LossWindow::mean(&window.critic1),
                critic2_loss: LossWindow::mean(&window.critic2),
                pessimistic_loss: LossWindow::mean(&window.pessimistic),
                optimistic_loss: if kind.train_optimistic() {
                    Some(LossWindow::mean(&window.optimistic))
                } else {
                    None
                },
                alpha: if window.alpha.is_nan() {
                    agent.alpha()
                } else {
                    window.alpha
                },
                xi_o: agent.xi_o(),
                entropy_slack: slack,
            };
            if cfg.verbose {
                println!(
                    "[seed {seed}] step {t}: return {:.4} coverage {:.4} alpha {:.4} xi_o {:.3}",
                    row.eval_return, row.coverage, row.alpha, row.xi_o
                );
            }
            record.rows.push(row);
            window = LossWindow::new();
        }
    }

    // Final artifacts: exploration-visitation heatmap, pessimistic-policy
    // heatmap, checkpoint.
    let base = &cfg.out_dir;
    heatmap_export(
        &coverage,
        &base.join(format!("heatmap_explore_seed{seed}.csv")),
        &base.join(format!("heatmap_explore_seed{seed}.png")),
    )?;
    let mut eval_cov = env.coverage_grid();
    evaluate(cfg, &agent, seed, u64::MAX, Some(&mut eval_cov))?;
    heatmap_export(
        &eval_cov,
        &base.join(format!("heatmap_pessimistic_seed{seed}.csv")),
        &base.join(format!("heatmap_pessimistic_seed{seed}.png")),
    )?;
    agent.save_checkpoint(&base.join(format!("checkpoint_seed{seed}.json")))?;
    Ok(record)
}

/// Mean undiscounted return of `eval_episodes` deterministic episodes on
/// fresh evaluation-seeded environments. Never touches the replay buffer,
/// the training environment, or the agent's step counter.
fn evaluate(
    cfg: &ExperimentConfig,
    agent: &WbsacAgent,
    seed: u64,
    eval_index: u64,
    mut visitation: Option<&mut CoverageGrid>,
) -> Result<f64, HarnessError> {
    let eval_seed = cfg.eval_seed_for(seed);
    let mut total = 0.0;
    for episode in 0..cfg.eval_episodes {
        let mut env = build_env(cfg)?;
        let mut rng = seeded(eval_seed, &format!("eval/{eval_index}/{episode}"));
        let mut obs = env.reset(&mut rng);
        if let Some(grid) = visitation.as_deref_mut() {
            grid.update(env.position())?;
        }
        loop {
            let action = agent.act_eval(&obs)?;
            let out = env.step(&action);
            if let Some(grid) = visitation.as_deref_mut() {
                grid.update(env.position())?;
            }
            total += out.reward;
            if out.terminated || out.truncated {
                break;
            }
            obs = out.observation;
        }
    }
    Ok(total / cfg.eval_episodes as f64)
}

/// Live check of the barycenter entropy bound at the agent's current state:
/// `H(pi_e) - (xi_p H(pi_p) + xi_o H(pi_o))`. Exactly zero for SAC, whose
/// exploration policy is the pessimistic policy itself.
fn entropy_slack(agent: &WbsacAgent, obs: &[f64]) -> Result<f64, HarnessError> {
    let p = agent.pessimistic_policy(obs)?;
    let o = agent.optimistic_policy(obs)?;
    let w = BarycenterWeights::from_xi_o(agent.xi_o()).map_err(crate::agents::AgentError::from)?;
    let e = match agent.kind() {
        crate::agents::AgentKind::Sac => p.clone(),
        _ => wasserstein_barycenter(&p, &o, w).map_err(crate::agents::AgentError::from)?,
    };
    Ok(differential_entropy(&e)
        - (w.xi_p() * differential_entropy(&p) + w.xi_o() * differential_entropy(&o)))
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn write_seed_csv(cfg: &ExperimentConfig, record: &SeedRecord) -> Result<(), HarnessError> {
    let path = cfg.out_dir.join(format!("seed_{}.csv", record.seed));
    let mut text = String::from(
        "step,eval_return,coverage,critic1_loss,critic2_loss,pessimistic_loss,optimistic_loss,alpha,xi_o,entropy_slack\n",
    );
    for r in &record.rows {
        let opt = r.optimistic_loss.map(fmt_f64).unwrap_or_default();
        writeln!(
            text,
            "{},{},{},{},{},{},{},{},{},{}",
            r.step,
            fmt_f64(r.eval_return),
            fmt_f64(r.coverage),
            fmt_f64(r.critic1_loss),
            fmt_f64(r.critic2_loss),
            fmt_f64(r.pessimistic_loss),
            opt,
            fmt_f64(r.alpha),
            fmt_f64(r.xi_o),
            fmt_f64(r.entropy_slack),
        )
        .expect("string write");
    }
    if let Some(diag) = &record.aborted {
        writeln!(text, "# aborted: {diag}").expect("string write");
    }
    std::fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))
}

fn write_aggregate_csv(cfg: &ExperimentConfig, rows: &[AggregateRow]) -> Result<(), HarnessError> {
    let path = cfg.out_dir.join("aggregate.csv");
    let mut text = String::from("step,return_mean,return_std,coverage_mean,coverage_std\n");
    for r in rows {
        writeln!(
            text,
            "{},{},{},{},{}",
            r.step,
            fmt_f64(r.return_mean),
            fmt_f64(r.return_std),
            fmt_f64(r.coverage_mean),
            fmt_f64(r.coverage_std),
        )
        .expect("string write");
    }
    std::fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))
}

fn emit_plots(cfg: &ExperimentConfig, rows: &[AggregateRow]) -> Result<(), HarnessError> {
    if rows.is_empty() {
        let path = cfg.out_dir.join("warnings.txt");
        std::fs::write(&path, "aggregate is empty; no plots rendered\n")
            .map_err(|e| HarnessError::io(&path, e))?;
        return Ok(());
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.step as f64).collect();
    for (file, title, ys, band) in [
        (
            "return.png",
            "EVAL RETURN",
            rows.iter().map(|r| r.return_mean).collect::<Vec<f64>>(),
            rows.iter().map(|r| r.return_std).collect::<Vec<f64>>(),
        ),
        (
            "coverage.png",
            "COVERAGE",
            rows.iter().map(|r| r.coverage_mean).collect(),
            rows.iter().map(|r| r.coverage_std).collect(),
        ),
    ] {
        let smoothed = moving_average(&ys, cfg.ma_window);
        let img = render_line_plot(
            title,
            "ENV STEPS",
            title,
            &Series {
                xs: &xs,
                ys: &ys,
                band: Some(&band),
                smoothed: Some(&smoothed),
            },
        );
        let path = cfg.out_dir.join(file);
        img.save(&path).map_err(|e| HarnessError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
    }
    Ok(())
}
