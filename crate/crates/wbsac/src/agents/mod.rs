//! WBSAC and SAC agents: twin critics with soft-Bellman targets, a
//! pessimistic and an optimistic actor, barycentric exploration with a
//! scheduled weight, automatic temperature, and replay.
//!
//! The SAC baseline is the same machinery with the exploration blend
//! replaced by the pessimistic policy and optimistic updates disabled, so
//! structural-degeneracy comparisons are exact.

pub mod losses;
mod replay;

pub use replay::{Batch, ReplayBuffer, Transition};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gauss_ot::{
    make_diag_gaussian, sample_reparameterized, wasserstein_barycenter, BarycenterWeights,
    DiagGaussian, GaussError,
};
use crate::nn::{adam_step, polyak_update, AdamState, Matrix, MlpParams, NnError, ScalarAdam};
use crate::rngs::normal_vec;

#[derive(Debug, Error, PartialEq)]
pub enum AgentError {
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Gauss(#[from] GaussError),
    #[error("non-finite reward {0} pushed to replay buffer")]
    NonFiniteReward(f64),
    #[error("transition action dim {got}, buffer holds {expected}")]
    ActionDimMismatch { expected: usize, got: usize },
    #[error("cannot sample from an empty replay buffer")]
    EmptyBuffer,
    #[error("buffer holds {have} transitions, need {need} for a batch")]
    BufferTooSmall { need: usize, have: usize },
    #[error("non-finite {0} loss")]
    NonFiniteLoss(&'static str),
    #[error("non-finite {what} at env step {step}")]
    NonFiniteAtStep { what: &'static str, step: u64 },
    #[error("invalid config: {0}")]
    BadConfig(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}

/// Every hyperparameter of the training loop. Defaults follow the shared
/// hyperparameter table (desk-scale runs override network width and step
/// counts in their experiment configs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    pub gamma: f64,
    pub tau: f64,
    pub lr_actor: f64,
    pub lr_critic: f64,
    pub lr_alpha: f64,
    pub batch_size: usize,
    /// Uncertainty bonus weight of the optimistic objective.
    pub beta_o: f64,
    /// Exploration schedule slope: `xi_o = min(1, lambda * t / T)`.
    pub lambda_sched: f64,
    pub total_env_steps: u64,
    pub initial_alpha: f64,
    /// Auto-tune the temperature toward `target_entropy`; when false, alpha
    /// stays frozen at `initial_alpha`.
    pub auto_alpha: bool,
    /// Defaults to `-action_dim` when unset.
    pub target_entropy: Option<f64>,
    pub log_std_min: f64,
    pub log_std_max: f64,
    /// Clamp on the actor heads' pre-squash mean outputs. tanh(3) covers
    /// the action space to 0.995; beyond that the squashing gradient is
    /// numerically dead and Adam can push means arbitrarily far out on
    /// flat objectives, which poisons barycentric blends.
    pub mean_clamp: f64,
    pub hidden_sizes: Vec<usize>,
    /// Uniform-random action steps before the policy (and gradient steps)
    /// kick in.
    pub warmup_steps: u64,
    pub gradient_steps_per_env_step: u32,
    pub buffer_capacity: usize,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            tau: 0.005,
            lr_actor: 3e-4,
            lr_critic: 3e-4,
            lr_alpha: 3e-4,
            batch_size: 256,
            beta_o: 1.5,
            lambda_sched: 10.0,
            total_env_steps: 100_000,
            initial_alpha: 0.2,
            auto_alpha: true,
            target_entropy: None,
            log_std_min: -20.0,
            log_std_max: 2.0,
            mean_clamp: 3.0,
            hidden_sizes: vec![256, 256],
            warmup_steps: 1000,
            gradient_steps_per_env_step: 1,
            buffer_capacity: 1_000_000,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), AgentError> {
        let bad = |msg: String| Err(AgentError::BadConfig(msg));
        if !(0.0..1.0).contains(&self.gamma) {
            return bad(format!("gamma must lie in [0,1), got {}", self.gamma));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad(format!("tau must lie in (0,1], got {}", self.tau));
        }
        if self.beta_o < 0.0 {
            return bad(format!("beta_o must be >= 0, got {}", self.beta_o));
        }
        if self.lambda_sched <= 0.0 {
            return bad(format!("lambda must be > 0, got {}", self.lambda_sched));
        }
        if self.initial_alpha <= 0.0 {
            return bad(format!(
                "initial_alpha must be > 0, got {}",
                self.initial_alpha
            ));
        }
        if self.log_std_min >= self.log_std_max {
            return bad(format!(
                "log_std bounds must satisfy min < max, got [{}, {}]",
                self.log_std_min, self.log_std_max
            ));
        }
        if !(self.mean_clamp > 0.0) {
            return bad(format!("mean_clamp must be > 0, got {}", self.mean_clamp));
        }
        if self.batch_size == 0 || self.buffer_capacity == 0 {
            return bad("batch_size and buffer_capacity must be positive".into());
        }
        if self.hidden_sizes.is_empty() {
            return bad("need at least one hidden layer".into());
        }
        Ok(())
    }

    fn target_entropy_for(&self, action_dim: usize) -> f64 {
        self.target_entropy.unwrap_or(-(action_dim as f64))
    }
}

/// Which policy drives environment interaction and whether the optimistic
/// actor is trained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AgentKind {
    /// Barycentric exploration with the linear weight schedule.
    Wbsac,
    /// Barycentric exploration at a constant optimistic weight.
    WbsacFixed { xi_o: f64, train_optimistic: bool },
    /// Vanilla SAC: explore with the pessimistic policy, no optimistic actor
    /// updates.
    Sac,
}

impl AgentKind {
    pub fn train_optimistic(&self) -> bool {
        match self {
            AgentKind::Wbsac => true,
            AgentKind::WbsacFixed {
                train_optimistic, ..
            } => *train_optimistic,
            AgentKind::Sac => false,
        }
    }
}

/// Scheduled optimistic weight: `xi_o = min(1, lambda * t / T)`, monotone
/// non-decreasing, saturating at one. `T = 0` degenerates to pure pessimism.
pub fn exploration_weight(t: u64, total_steps: u64, lambda: f64) -> BarycenterWeights {
    let xi_o = if total_steps == 0 {
        0.0
    } else {
        (lambda * t as f64 / total_steps as f64).min(1.0)
    };
    BarycenterWeights::from_xi_o(xi_o).expect("schedule stays in [0,1]")
}

/// Clamp intervals applied to raw actor-head outputs before the
/// distribution is built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadBounds {
    pub log_std_min: f64,
    pub log_std_max: f64,
    pub mean_clamp: f64,
}

impl HeadBounds {
    pub fn from_config(config: &AgentConfig) -> Self {
        Self {
            log_std_min: config.log_std_min,
            log_std_max: config.log_std_max,
            mean_clamp: config.mean_clamp,
        }
    }
}

/// Runs an actor head on one state: the first half of the outputs is the
/// mean (clamped to the responsive tanh band), the second half the log-std
/// (clamped before exponentiation).
pub fn actor_policy(
    actor: &MlpParams,
    state: &[f64],
    bounds: HeadBounds,
) -> Result<DiagGaussian, AgentError> {
    let out = actor.forward_value(&Matrix::from_rows(&[state.to_vec()]))?;
    let d = out.cols() / 2;
    let (mean, log_std) = out.row(0).split_at(d);
    let mean: Vec<f64> = mean
        .iter()
        .map(|m| m.clamp(-bounds.mean_clamp, bounds.mean_clamp))
        .collect();
    Ok(make_diag_gaussian(
        &mean,
        log_std,
        bounds.log_std_min,
        bounds.log_std_max,
    )?)
}

/// Mean and disagreement of the twin critic estimates:
/// `mu = (q1+q2)/2`, `sigma = |q1-q2|/2`.
pub fn q_mean_std(q1: f64, q2: f64) -> (f64, f64) {
    ((q1 + q2) / 2.0, (q1 - q2).abs() / 2.0)
}

/// Loss and temperature values produced by one gradient step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepMetrics {
    pub critic1_loss: f64,
    pub critic2_loss: f64,
    pub optimistic_loss: Option<f64>,
    pub pessimistic_loss: f64,
    pub alpha: f64,
    pub xi_o: f64,
}

/// The full agent state: twin critics and targets, both actors, Adam moments,
/// the log-temperature, and the environment step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct WbsacAgent {
    config: AgentConfig,
    kind: AgentKind,
    obs_dim: usize,
    action_dim: usize,
    critic1: MlpParams,
    critic2: MlpParams,
    target1: MlpParams,
    target2: MlpParams,
    pessimistic: MlpParams,
    optimistic: MlpParams,
    adam_critic1: AdamState,
    adam_critic2: AdamState,
    adam_pessimistic: AdamState,
    adam_optimistic: AdamState,
    log_alpha: f64,
    adam_alpha: ScalarAdam,
    env_step: u64,
}

impl WbsacAgent {
    /// Initializes all networks from per-role streams derived from `seed`,
    /// so agents of different kinds share identical initial parameters for
    /// the networks they have in common. Target critics start equal to the
    /// online critics.
    pub fn new(
        obs_dim: usize,
        action_dim: usize,
        config: AgentConfig,
        kind: AgentKind,
        seed: u64,
    ) -> Result<Self, AgentError> {
        config.validate()?;
        if let AgentKind::WbsacFixed { xi_o, .. } = kind {
            if !(0.0..=1.0).contains(&xi_o) {
                return Err(AgentError::BadConfig(format!(
                    "fixed xi_o must lie in [0,1], got {xi_o}"
                )));
            }
        }
        let mut actor_dims = vec![obs_dim];
        actor_dims.extend(&config.hidden_sizes);
        actor_dims.push(2 * action_dim);
        let mut critic_dims = vec![obs_dim + action_dim];
        critic_dims.extend(&config.hidden_sizes);
        critic_dims.push(1);

        use crate::rngs::seeded;
        let critic1 = MlpParams::init(&critic_dims, &mut seeded(seed, "init/critic1"));
        let critic2 = MlpParams::init(&critic_dims, &mut seeded(seed, "init/critic2"));
        let pessimistic = MlpParams::init(&actor_dims, &mut seeded(seed, "init/pessimistic"));
        let optimistic = MlpParams::init(&actor_dims, &mut seeded(seed, "init/optimistic"));
        let target1 = critic1.clone();
        let target2 = critic2.clone();

        Ok(Self {
            adam_critic1: AdamState::new(&critic1),
            adam_critic2: AdamState::new(&critic2),
            adam_pessimistic: AdamState::new(&pessimistic),
            adam_optimistic: AdamState::new(&optimistic),
            log_alpha: config.initial_alpha.ln(),
            adam_alpha: ScalarAdam::default(),
            env_step: 0,
            config,
            kind,
            obs_dim,
            action_dim,
            critic1,
            critic2,
            target1,
            target2,
            pessimistic,
            optimistic,
        })
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn kind(&self) -> AgentKind {
        self.kind
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn env_step(&self) -> u64 {
        self.env_step
    }

    /// Called once per environment step after the transition is stored.
    pub fn advance_env_step(&mut self) {
        self.env_step += 1;
    }

    pub fn alpha(&self) -> f64 {
        self.log_alpha.exp()
    }

    pub fn in_warmup(&self) -> bool {
        self.env_step < self.config.warmup_steps
    }

    /// Current optimistic weight under this agent's kind.
    pub fn xi_o(&self) -> f64 {
        match self.kind {
            AgentKind::Wbsac => exploration_weight(
                self.env_step,
                self.config.total_env_steps,
                self.config.lambda_sched,
            )
            .xi_o(),
            AgentKind::WbsacFixed { xi_o, .. } => xi_o,
            AgentKind::Sac => 0.0,
        }
    }

    fn bounds(&self) -> HeadBounds {
        HeadBounds::from_config(&self.config)
    }

    pub fn pessimistic_policy(&self, state: &[f64]) -> Result<DiagGaussian, AgentError> {
        actor_policy(&self.pessimistic, state, self.bounds())
    }

    pub fn optimistic_policy(&self, state: &[f64]) -> Result<DiagGaussian, AgentError> {
        actor_policy(&self.optimistic, state, self.bounds())
    }

    /// The distribution actions are sampled from at the current step: the
    /// pessimistic policy for SAC, otherwise the Wasserstein barycenter of
    /// the two actor policies at the current weight.
    pub fn exploration_policy(&self, state: &[f64]) -> Result<DiagGaussian, AgentError> {
        match self.kind {
            AgentKind::Sac => self.pessimistic_policy(state),
            _ => {
                let p = self.pessimistic_policy(state)?;
                let o = self.optimistic_policy(state)?;
                let w = BarycenterWeights::from_xi_o(self.xi_o())?;
                Ok(wasserstein_barycenter(&p, &o, w)?)
            }
        }
    }

    /// Samples an environment action. During warmup this is uniform in
    /// (-1,1)^d; afterwards a reparameterized draw from the exploration
    /// policy, squashed by tanh.
    pub fn act_explore<R: Rng>(&self, state: &[f64], rng: &mut R) -> Result<Vec<f64>, AgentError> {
        if self.in_warmup() {
            return Ok((0..self.action_dim)
                .map(|_| rng.random_range(-1.0..1.0))
                .collect());
        }
        let dist = self.exploration_policy(state)?;
        let noise = normal_vec(self.action_dim, rng);
        let (_, squashed) = sample_reparameterized(&dist, &noise)?;
        Ok(squashed)
    }

    /// Deterministic evaluation action: tanh of the pessimistic mean.
    pub fn act_eval(&self, state: &[f64]) -> Result<Vec<f64>, AgentError> {
        let dist = self.pessimistic_policy(state)?;
        Ok(dist.mean().iter().map(|m| m.tanh()).collect())
    }

    /// Soft Bellman targets:
    /// `y = r + gamma * (1-done) * (min_j Q'_j(s', a') - alpha * log pi_p(a'|s'))`
    /// with `a'` freshly reparameterized from the pessimistic actor. No
    /// gradients flow through the result.
    pub fn critic_target<R: Rng>(
        &self,
        batch: &Batch,
        rng: &mut R,
    ) -> Result<Vec<f64>, AgentError> {
        let n = batch.len();
        let noise = Matrix::from_vec(n, self.action_dim, normal_vec(n * self.action_dim, rng));
        let sample = losses::actor_sample(
            &self.pessimistic,
            &batch.next_states,
            &noise,
            self.bounds(),
        )?;
        let input = batch.next_states.hcat(&sample.actions);
        let q1 = self.target1.forward_value(&input)?;
        let q2 = self.target2.forward_value(&input)?;
        let alpha = self.alpha();
        let mut targets = Vec::with_capacity(n);
        for r in 0..n {
            let soft = q1.get(r, 0).min(q2.get(r, 0)) - alpha * sample.log_probs[r];
            let mask = if batch.dones[r] { 0.0 } else { 1.0 };
            let y = batch.rewards[r] + self.config.gamma * mask * soft;
            if !y.is_finite() {
                return Err(AgentError::NonFiniteLoss("critic target"));
            }
            targets.push(y);
        }
        Ok(targets)
    }

    /// One Adam step on each critic against shared targets; targets stay
    /// untouched. Returns the two mean-squared losses.
    pub fn critic_loss_and_update<R: Rng>(
        &mut self,
        batch: &Batch,
        rng: &mut R,
    ) -> Result<(f64, f64), AgentError> {
        let targets = self.critic_target(batch, rng)?;
        let (loss1, grads1) =
            losses::critic_loss_grads(&self.critic1, &batch.states, &batch.actions, &targets)?;
        let (loss2, grads2) =
            losses::critic_loss_grads(&self.critic2, &batch.states, &batch.actions, &targets)?;
        adam_step(
            &mut self.critic1,
            &grads1,
            &mut self.adam_critic1,
            self.config.lr_critic,
        )?;
        adam_step(
            &mut self.critic2,
            &grads2,
            &mut self.adam_critic2,
            self.config.lr_critic,
        )?;
        Ok((loss1, loss2))
    }

    /// One Adam step on the pessimistic actor (critics untouched).
    pub fn pessimistic_actor_update<R: Rng>(
        &mut self,
        batch: &Batch,
        rng: &mut R,
    ) -> Result<f64, AgentError> {
        let n = batch.len();
        let noise = Matrix::from_vec(n, self.action_dim, normal_vec(n * self.action_dim, rng));
        let (loss, grads) = losses::pessimistic_loss(
            &self.pessimistic,
            (&self.critic1, &self.critic2),
            self.alpha(),
            &batch.states,
            &noise,
            self.bounds(),
            true,
        )?;
        adam_step(
            &mut self.pessimistic,
            &grads.expect("grads requested"),
            &mut self.adam_pessimistic,
            self.config.lr_actor,
        )?;
        Ok(loss)
    }

    /// One Adam step on the optimistic actor toward
    /// `max mu_Q + beta_o * sigma_Q` (no entropy term).
    pub fn optimistic_actor_update<R: Rng>(
        &mut self,
        batch: &Batch,
        rng: &mut R,
    ) -> Result<f64, AgentError> {
        let n = batch.len();
        let noise = Matrix::from_vec(n, self.action_dim, normal_vec(n * self.action_dim, rng));
        let (loss, grads) = losses::optimistic_loss(
            &self.optimistic,
            (&self.critic1, &self.critic2),
            self.config.beta_o,
            &batch.states,
            &noise,
            self.bounds(),
            true,
        )?;
        adam_step(
            &mut self.optimistic,
            &grads.expect("grads requested"),
            &mut self.adam_optimistic,
            self.config.lr_actor,
        )?;
        Ok(loss)
    }

    /// One Adam step on the log-temperature against the target entropy,
    /// using fresh pessimistic-actor samples. No-op when `auto_alpha` is
    /// off. Returns the (possibly updated) alpha.
    pub fn temperature_update<R: Rng>(
        &mut self,
        batch: &Batch,
        rng: &mut R,
    ) -> Result<f64, AgentError> {
        if !self.config.auto_alpha {
            return Ok(self.alpha());
        }
        let n = batch.len();
        let noise = Matrix::from_vec(n, self.action_dim, normal_vec(n * self.action_dim, rng));
        let sample =
            losses::actor_sample(&self.pessimistic, &batch.states, &noise, self.bounds())?;
        let h0 = self.config.target_entropy_for(self.action_dim);
        let (loss, grad) = losses::alpha_loss(self.log_alpha, &sample.log_probs, h0);
        if !loss.is_finite() {
            return Err(AgentError::NonFiniteLoss("temperature"));
        }
        self.adam_alpha
            .step(&mut self.log_alpha, grad, self.config.lr_alpha);
        Ok(self.alpha())
    }

    /// One full gradient step in the fixed order: critics, optimistic actor,
    /// pessimistic actor, temperature, then polyak on both targets.
    pub fn train_step<R: Rng>(
        &mut self,
        buffer: &ReplayBuffer,
        rng: &mut R,
    ) -> Result<StepMetrics, AgentError> {
        if buffer.len() < self.config.batch_size {
            return Err(AgentError::BufferTooSmall {
                need: self.config.batch_size,
                have: buffer.len(),
            });
        }
        let step = self.env_step;
        let with_step = |e: AgentError| match e {
            AgentError::NonFiniteLoss(what) => AgentError::NonFiniteAtStep { what, step },
            other => other,
        };
        let batch = buffer.sample_batch(self.config.batch_size, rng)?;
        let (critic1_loss, critic2_loss) = self
            .critic_loss_and_update(&batch, rng)
            .map_err(with_step)?;
        let optimistic_loss = if self.kind.train_optimistic() {
            Some(
                self.optimistic_actor_update(&batch, rng)
                    .map_err(with_step)?,
            )
        } else {
            None
        };
        let pessimistic_loss = self
            .pessimistic_actor_update(&batch, rng)
            .map_err(with_step)?;
        let alpha = self.temperature_update(&batch, rng).map_err(with_step)?;
        polyak_update(&mut self.target1, &self.critic1, self.config.tau)?;
        polyak_update(&mut self.target2, &self.critic2, self.config.tau)?;
        Ok(StepMetrics {
            critic1_loss,
            critic2_loss,
            optimistic_loss,
            pessimistic_loss,
            alpha,
            xi_o: self.xi_o(),
        })
    }

    // Direct parameter access, used by tests and the verification suites.
    pub fn critics(&self) -> (&MlpParams, &MlpParams) {
        (&self.critic1, &self.critic2)
    }

    pub fn targets(&self) -> (&MlpParams, &MlpParams) {
        (&self.target1, &self.target2)
    }

    pub fn pessimistic_params(&self) -> &MlpParams {
        &self.pessimistic
    }

    pub fn optimistic_params(&self) -> &MlpParams {
        &self.optimistic
    }

    pub fn critics_mut(&mut self) -> (&mut MlpParams, &mut MlpParams) {
        (&mut self.critic1, &mut self.critic2)
    }

    pub fn targets_mut(&mut self) -> (&mut MlpParams, &mut MlpParams) {
        (&mut self.target1, &mut self.target2)
    }

    pub fn pessimistic_params_mut(&mut self) -> &mut MlpParams {
        &mut self.pessimistic
    }

    pub fn optimistic_params_mut(&mut self) -> &mut MlpParams {
        &mut self.optimistic
    }
}

pub const CHECKPOINT_VERSION: u32 = 1;

/// Serializable snapshot of the full agent (all six networks, optimizer
/// moments, temperature, and the step counter).
#[derive(Debug, Serialize, Deserialize)]
pub struct AgentCheckpoint {
    pub version: u32,
    pub obs_dim: usize,
    pub action_dim: usize,
    pub config: AgentConfig,
    pub kind: AgentKind,
    pub critic1: MlpParams,
    pub critic2: MlpParams,
    pub target1: MlpParams,
    pub target2: MlpParams,
    pub pessimistic: MlpParams,
    pub optimistic: MlpParams,
    pub adam_critic1: AdamState,
    pub adam_critic2: AdamState,
    pub adam_pessimistic: AdamState,
    pub adam_optimistic: AdamState,
    pub log_alpha: f64,
    pub adam_alpha: ScalarAdam,
    pub env_step: u64,
}

impl WbsacAgent {
    pub fn to_checkpoint(&self) -> AgentCheckpoint {
        AgentCheckpoint {
            version: CHECKPOINT_VERSION,
            obs_dim: self.obs_dim,
            action_dim: self.action_dim,
            config: self.config.clone(),
            kind: self.kind,
            critic1: self.critic1.clone(),
            critic2: self.critic2.clone(),
            target1: self.target1.clone(),
            target2: self.target2.clone(),
            pessimistic: self.pessimistic.clone(),
            optimistic: self.optimistic.clone(),
            adam_critic1: self.adam_critic1.clone(),
            adam_critic2: self.adam_critic2.clone(),
            adam_pessimistic: self.adam_pessimistic.clone(),
            adam_optimistic: self.adam_optimistic.clone(),
            log_alpha: self.log_alpha,
            adam_alpha: self.adam_alpha.clone(),
            env_step: self.env_step,
        }
    }

    pub fn from_checkpoint(cp: AgentCheckpoint) -> Result<Self, AgentError> {
        if cp.version != CHECKPOINT_VERSION {
            return Err(AgentError::Checkpoint(format!(
                "unsupported checkpoint version {} (expected {})",
                cp.version, CHECKPOINT_VERSION
            )));
        }
        cp.config.validate()?;
        Ok(Self {
            config: cp.config,
            kind: cp.kind,
            obs_dim: cp.obs_dim,
            action_dim: cp.action_dim,
            critic1: cp.critic1,
            critic2: cp.critic2,
            target1: cp.target1,
            target2: cp.target2,
            pessimistic: cp.pessimistic,
            optimistic: cp.optimistic,
            adam_critic1: cp.adam_critic1,
            adam_critic2: cp.adam_critic2,
            adam_pessimistic: cp.adam_pessimistic,
            adam_optimistic: cp.adam_optimistic,
            log_alpha: cp.log_alpha,
            adam_alpha: cp.adam_alpha,
            env_step: cp.env_step,
        })
    }

    pub fn save_checkpoint(&self, path: &std::path::Path) -> Result<(), AgentError> {
        let json = serde_json::to_string(&self.to_checkpoint())
            .map_err(|e| AgentError::Checkpoint(e.to_string()))?;
        std::fs::write(path, json)
            .map_err(|e| AgentError::Checkpoint(format!("{}: {e}", path.display())))
    }

    pub fn load_checkpoint(path: &std::path::Path) -> Result<Self, AgentError> {
        let json = std::fs::read_to_string(path)
            .map_err(|e| AgentError::Checkpoint(format!("{}: {e}", path.display())))?;
        let cp: AgentCheckpoint = serde_json::from_str(&json)
            .map_err(|e| AgentError::Checkpoint(format!("{}: {e}", path.display())))?;
        Self::from_checkpoint(cp)
    }
}
