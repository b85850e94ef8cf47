//! Loss graphs for the critic, actor, and temperature updates.
//!
//! Each loss comes in a value-only form (used by finite-difference checks)
//! and a value+gradient form (used by training). The actor losses share the
//! tanh-squashed Gaussian head, whose backward pass is derived here once:
//! for head outputs `(m, l)` per dimension, with `L = clamp(l)`,
//! `s = exp(L)`, `pre = m + s*eps`, `t = tanh(pre)` and the squashed
//! log-density `logp = -ln(2*pi)/2 - L - eps^2/2 - ln(1 - t^2 + eps_t)`:
//!
//! ```text
//! d a / d m    = 1 - t^2              d a / d l    = (1 - t^2) * eps * s * c
//! d logp / d m = u                    d logp / d l = (u * eps * s - 1) * c
//! u = 2 t (1 - t^2) / (1 - t^2 + eps_t),   c = 1 inside the clamp, else 0
//! ```

use crate::gauss_ot::{
    log_prob_squashed, make_diag_gaussian, sample_reparameterized, TANH_EPS,
};
use crate::nn::{value_and_grad, Matrix, MlpParams};

use super::{AgentError, HeadBounds};

/// A reparameterized batch sample from an actor head, with everything the
/// backward pass needs.
pub struct ActorSample {
    /// Raw head outputs, `batch x 2d` (means then log-stds).
    pub head_out: Matrix,
    cache: crate::nn::ForwardCache,
    /// Pre-squash actions, `batch x d`.
    pub pre: Matrix,
    /// Squashed actions in (-1, 1), `batch x d`.
    pub actions: Matrix,
    /// Per-dimension stds after the clamp, `batch x d`.
    pub std: Matrix,
    /// Squashed log-density per row.
    pub log_probs: Vec<f64>,
    bounds: HeadBounds,
    noise: Matrix,
}

/// Runs the actor on a state batch and draws one reparameterized action per
/// row using the provided noise (`batch x d` standard normals).
pub fn actor_sample(
    actor: &MlpParams,
    states: &Matrix,
    noise: &Matrix,
    bounds: HeadBounds,
) -> Result<ActorSample, AgentError> {
    let d = noise.cols();
    let (head_out, cache) = actor.forward(states)?;
    if head_out.cols() != 2 * d {
        return Err(AgentError::ActionDimMismatch {
            expected: head_out.cols() / 2,
            got: d,
        });
    }
    let n = states.rows();
    let (lo, hi) = (bounds.log_std_min, bounds.log_std_max);
    let mc = bounds.mean_clamp;
    let mut pre = Matrix::zeros(n, d);
    let mut actions = Matrix::zeros(n, d);
    let mut std = Matrix::zeros(n, d);
    let mut log_probs = Vec::with_capacity(n);
    for r in 0..n {
        let row = head_out.row(r);
        let (raw_mean, log_std) = row.split_at(d);
        let mean: Vec<f64> = raw_mean.iter().map(|m| m.clamp(-mc, mc)).collect();
        let dist = make_diag_gaussian(&mean, log_std, lo, hi)?;
        let (p, a) = sample_reparameterized(&dist, noise.row(r))?;
        log_probs.push(log_prob_squashed(&dist, &p)?);
        pre.row_mut(r).copy_from_slice(&p);
        actions.row_mut(r).copy_from_slice(&a);
        std.row_mut(r).copy_from_slice(dist.std());
    }
    Ok(ActorSample {
        head_out,
        cache,
        pre,
        actions,
        std,
        log_probs,
        bounds,
        noise: noise.clone(),
    })
}

/// Projected-gradient passthrough for a clamped head output: inside the
/// open interval the gradient passes unchanged; at or beyond a bound only
/// the component pointing back into the interval survives, so a head that
/// drifts onto a clamp stays recoverable instead of freezing.
fn clamp_gradient(raw: f64, lo: f64, hi: f64, grad: f64) -> f64 {
    if raw >= hi {
        grad.max(0.0) // descent direction -grad moves raw downward
    } else if raw <= lo {
        grad.min(0.0)
    } else {
        grad
    }
}

/// Pulls cotangents on the squashed actions (`d_actions`) and on the per-row
/// log-densities (`d_log_prob`) back to the raw actor head outputs, then
/// through the actor network. Returns parameter gradients.
pub fn actor_backward(
    actor: &MlpParams,
    sample: &ActorSample,
    d_actions: Option<&Matrix>,
    d_log_prob: &[f64],
) -> MlpParams {
    let n = sample.pre.rows();
    let d = sample.pre.cols();
    let b = sample.bounds;
    let mut d_head = Matrix::zeros(n, 2 * d);
    for r in 0..n {
        let dlp = d_log_prob[r];
        let raw = sample.head_out.row(r);
        for j in 0..d {
            let t = sample.actions.get(r, j);
            let dtanh = 1.0 - t * t;
            let u = 2.0 * t * dtanh / (dtanh + TANH_EPS);
            let es = sample.noise.get(r, j) * sample.std.get(r, j);
            let da = d_actions.map_or(0.0, |m| m.get(r, j));
            let d_mean = da * dtanh + dlp * u;
            let d_log_std = da * dtanh * es + dlp * (u * es - 1.0);
            d_head.set(
                r,
                j,
                clamp_gradient(raw[j], -b.mean_clamp, b.mean_clamp, d_mean),
            );
            d_head.set(
                r,
                d + j,
                clamp_gradient(raw[d + j], b.log_std_min, b.log_std_max, d_log_std),
            );
        }
    }
    let (grads, _) = actor.backward(&sample.cache, &d_head);
    grads
}

/// Mean squared Bellman error of one critic against fixed targets.
pub fn critic_loss_value(
    critic: &MlpParams,
    states: &Matrix,
    actions: &Matrix,
    targets: &[f64],
) -> Result<f64, AgentError> {
    let q = critic.forward_value(&states.hcat(actions))?;
    Ok(mse(&q, targets))
}

/// Same loss with parameter gradients.
pub fn critic_loss_grads(
    critic: &MlpParams,
    states: &Matrix,
    actions: &Matrix,
    targets: &[f64],
) -> Result<(f64, MlpParams), AgentError> {
    let input = states.hcat(actions);
    let (loss, grads) = value_and_grad(critic, &input, |q| {
        let n = q.rows() as f64;
        let mut d = Matrix::zeros(q.rows(), 1);
        for r in 0..q.rows() {
            d.set(r, 0, 2.0 * (q.get(r, 0) - targets[r]) / n);
        }
        (mse(q, targets), d)
    })?;
    Ok((loss, grads))
}

fn mse(q: &Matrix, targets: &[f64]) -> f64 {
    let n = q.rows() as f64;
    q.data()
        .iter()
        .zip(targets)
        .map(|(&qv, &y)| (qv - y) * (qv - y))
        .sum::<f64>()
        / n
}

/// Pessimistic actor objective: `mean[ alpha * log pi(a|s) - min_i Q_i(s,a) ]`
/// with `a` reparameterized from the actor.
pub fn pessimistic_loss(
    actor: &MlpParams,
    critics: (&MlpParams, &MlpParams),
    alpha: f64,
    states: &Matrix,
    noise: &Matrix,
    bounds: HeadBounds,
    want_grads: bool,
) -> Result<(f64, Option<MlpParams>), AgentError> {
    let sample = actor_sample(actor, states, noise, bounds)?;
    let n = states.rows();
    let input = states.hcat(&sample.actions);
    let (q1, c1) = critics.0.forward(&input)?;
    let (q2, c2) = critics.1.forward(&input)?;

    let mut loss = 0.0;
    for r in 0..n {
        loss += alpha * sample.log_probs[r] - q1.get(r, 0).min(q2.get(r, 0));
    }
    loss /= n as f64;
    if !loss.is_finite() {
        return Err(AgentError::NonFiniteLoss("pessimistic actor"));
    }
    if !want_grads {
        return Ok((loss, None));
    }

    // -min(q1, q2): route the cotangent through whichever critic is active.
    let scale = -1.0 / n as f64;
    let mut dq1 = Matrix::zeros(n, 1);
    let mut dq2 = Matrix::zeros(n, 1);
    for r in 0..n {
        if q1.get(r, 0) <= q2.get(r, 0) {
            dq1.set(r, 0, scale);
        } else {
            dq2.set(r, 0, scale);
        }
    }
    let din1 = critics.0.input_gradient(&c1, &dq1);
    let din2 = critics.1.input_gradient(&c2, &dq2);
    let d_actions = action_columns(&din1, &din2, states.cols(), sample.actions.cols());
    let d_log_prob = vec![alpha / n as f64; n];
    let grads = actor_backward(actor, &sample, Some(&d_actions), &d_log_prob);
    Ok((loss, Some(grads)))
}

/// Optimistic actor objective: `mean[ -(mu_Q + beta_o * sigma_Q) ]` with `a`
/// reparameterized from the optimistic actor.
pub fn optimistic_loss(
    actor: &MlpParams,
    critics: (&MlpParams, &MlpParams),
    beta_o: f64,
    states: &Matrix,
    noise: &Matrix,
    bounds: HeadBounds,
    want_grads: bool,
) -> Result<(f64, Option<MlpParams>), AgentError> {
    let sample = actor_sample(actor, states, noise, bounds)?;
    let n = states.rows();
    let input = states.hcat(&sample.actions);
    let (q1, c1) = critics.0.forward(&input)?;
    let (q2, c2) = critics.1.forward(&input)?;

    let mut loss = 0.0;
    for r in 0..n {
        let (mu, sigma) = super::q_mean_std(q1.get(r, 0), q2.get(r, 0));
        loss += -(mu + beta_o * sigma);
    }
    loss /= n as f64;
    if !loss.is_finite() {
        return Err(AgentError::NonFiniteLoss("optimistic actor"));
    }
    if !want_grads {
        return Ok((loss, None));
    }

    // sigma_Q = |q1 - q2| / 2, so d sigma/d q1 = sign(q1 - q2)/2 a.e.
    let scale = -1.0 / n as f64;
    let mut dq1 = Matrix::zeros(n, 1);
    let mut dq2 = Matrix::zeros(n, 1);
    for r in 0..n {
        let sign = (q1.get(r, 0) - q2.get(r, 0)).signum();
        let sign = if q1.get(r, 0) == q2.get(r, 0) { 0.0 } else { sign };
        dq1.set(r, 0, scale * (0.5 + beta_o * 0.5 * sign));
        dq2.set(r, 0, scale * (0.5 - beta_o * 0.5 * sign));
    }
    let din1 = critics.0.input_gradient(&c1, &dq1);
    let din2 = critics.1.input_gradient(&c2, &dq2);
    let d_actions = action_columns(&din1, &din2, states.cols(), sample.actions.cols());
    let d_log_prob = vec![0.0; n];
    let grads = actor_backward(actor, &sample, Some(&d_actions), &d_log_prob);
    Ok((loss, Some(grads)))
}

/// Temperature objective `mean[-alpha * (log pi + H0)]` as a function of
/// `log alpha`; returns `(loss, d loss / d log alpha)`.
pub fn alpha_loss(log_alpha: f64, log_probs: &[f64], target_entropy: f64) -> (f64, f64) {
    let mean_term = log_probs.iter().map(|lp| lp + target_entropy).sum::<f64>()
        / log_probs.len() as f64;
    let loss = -log_alpha.exp() * mean_term;
    // d/d log_alpha [-e^{log_alpha} * K] = -e^{log_alpha} * K = loss itself.
    (loss, loss)
}

fn action_columns(din1: &Matrix, din2: &Matrix, obs_dim: usize, act_dim: usize) -> Matrix {
    let n = din1.rows();
    let mut out = Matrix::zeros(n, act_dim);
    for r in 0..n {
        for j in 0..act_dim {
            out.set(r, j, din1.get(r, obs_dim + j) + din2.get(r, obs_dim + j));
        }
    }
    out
}
