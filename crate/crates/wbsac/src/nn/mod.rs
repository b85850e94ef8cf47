//! Feed-forward network machinery: MLP forward/backward, Adam updates, and
//! polyak target averaging.
//!
//! Hidden layers use ReLU, the output layer is linear. Gradients are computed
//! by hand-rolled reverse mode over the layer stack; `backward` also returns
//! the gradient with respect to the network input, which actor losses need to
//! push value gradients through critic inputs.

mod matrix;

pub use matrix::Matrix;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NnError {
    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    ShapeMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("tau must lie in (0, 1], got {0}")]
    BadTau(f64),
}

/// One linear layer; weight rows are output units (`out_dim x in_dim`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

/// Parameters of an MLP: a stack of linear layers with ReLU between them.
/// The same shape doubles as the gradient container.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub layers: Vec<LayerParams>,
}

/// Activations cached by [`MlpParams::forward`] for the backward pass.
pub struct ForwardCache {
    input: Matrix,
    /// Post-ReLU activations of each hidden layer.
    hidden: Vec<Matrix>,
    /// Pre-activation values of each hidden layer (for the ReLU mask).
    pre: Vec<Matrix>,
}

impl MlpParams {
    /// Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer for both
    /// weights and biases.
    pub fn init<R: Rng>(dims: &[usize], rng: &mut R) -> Self {
        assert!(dims.len() >= 2, "need at least input and output dims");
        let layers = dims
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let bound = 1.0 / (fan_in as f64).sqrt();
                let weight = Matrix::from_vec(
                    fan_out,
                    fan_in,
                    (0..fan_out * fan_in)
                        .map(|_| rng.random_range(-bound..bound))
                        .collect(),
                );
                let bias = (0..fan_out).map(|_| rng.random_range(-bound..bound)).collect();
                LayerParams { weight, bias }
            })
            .collect();
        Self { layers }
    }

    /// All-zero parameters with the given layer dims (also used for gradient
    /// and moment accumulators).
    pub fn zeros(dims: &[usize]) -> Self {
        assert!(dims.len() >= 2);
        let layers = dims
            .windows(2)
            .map(|w| LayerParams {
                weight: Matrix::zeros(w[1], w[0]),
                bias: vec![0.0; w[1]],
            })
            .collect();
        Self { layers }
    }

    /// Zero parameters shaped like `self`.
    pub fn zeros_like(&self) -> Self {
        Self {
            layers: self
                .layers
                .iter()
                .map(|l| LayerParams {
                    weight: Matrix::zeros(l.weight.rows(), l.weight.cols()),
                    bias: vec![0.0; l.bias.len()],
                })
                .collect(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weight.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().weight.rows()
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.input_dim()];
        dims.extend(self.layers.iter().map(|l| l.weight.rows()));
        dims
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.dims() == other.dims()
    }

    /// Forward pass over a batch (rows are samples). Returns outputs and the
    /// cache needed by [`MlpParams::backward`].
    pub fn forward(&self, input: &Matrix) -> Result<(Matrix, ForwardCache), NnError> {
        if input.cols() != self.input_dim() {
            return Err(NnError::ShapeMismatch {
                context: "mlp input",
                expected: self.input_dim(),
                got: input.cols(),
            });
        }
        let n_hidden = self.layers.len() - 1;
        let mut hidden = Vec::with_capacity(n_hidden);
        let mut pre = Vec::with_capacity(n_hidden);
        let mut x = input.clone();
        for layer in &self.layers[..n_hidden] {
            let mut z = x.matmul_nt(&layer.weight);
            for r in 0..z.rows() {
                for (v, b) in z.row_mut(r).iter_mut().zip(&layer.bias) {
                    *v += b;
                }
            }
            pre.push(z.clone());
            for v in z.data_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
            hidden.push(z.clone());
            x = z;
        }
        let last = self.layers.last().unwrap();
        let mut out = x.matmul_nt(&last.weight);
        for r in 0..out.rows() {
            for (v, b) in out.row_mut(r).iter_mut().zip(&last.bias) {
                *v += b;
            }
        }
        Ok((
            out,
            ForwardCache {
                input: input.clone(),
                hidden,
                pre,
            },
        ))
    }

    /// Forward pass without keeping the cache.
    pub fn forward_value(&self, input: &Matrix) -> Result<Matrix, NnError> {
        self.forward(input).map(|(out, _)| out)
    }

    /// Reverse pass. `d_out` holds dLoss/dOutput per batch row; returns
    /// parameter gradients (summed over the batch) and dLoss/dInput.
    pub fn backward(&self, cache: &ForwardCache, d_out: &Matrix) -> (MlpParams, Matrix) {
        self.backward_impl(cache, d_out, true)
    }

    /// Like [`MlpParams::backward`] but skips the parameter-gradient work;
    /// used when only dLoss/dInput is needed (critics inside actor losses).
    pub fn input_gradient(&self, cache: &ForwardCache, d_out: &Matrix) -> Matrix {
        self.backward_impl(cache, d_out, false).1
    }

    fn backward_impl(
        &self,
        cache: &ForwardCache,
        d_out: &Matrix,
        want_params: bool,
    ) -> (MlpParams, Matrix) {
        assert_eq!(d_out.cols(), self.output_dim(), "d_out width");
        let n_layers = self.layers.len();
        let mut grads = if want_params {
            self.zeros_like()
        } else {
            MlpParams { layers: vec![] }
        };

        let mut delta = d_out.clone();
        for idx in (0..n_layers).rev() {
            let layer = &self.layers[idx];
            let layer_input = if idx == 0 {
                &cache.input
            } else {
                &cache.hidden[idx - 1]
            };
            if want_params {
                grads.layers[idx].weight = delta.matmul_tn(layer_input);
                let bias = &mut grads.layers[idx].bias;
                for r in 0..delta.rows() {
                    for (b, d) in bias.iter_mut().zip(delta.row(r)) {
                        *b += d;
                    }
                }
            }
            // Propagate to the layer below (or the network input).
            let mut d_prev = delta.matmul_nn(&layer.weight);
            if idx > 0 {
                let pre = &cache.pre[idx - 1];
                for (v, &z) in d_prev.data_mut().iter_mut().zip(pre.data()) {
                    if z <= 0.0 {
                        *v = 0.0;
                    }
                }
            }
            delta = d_prev;
        }
        (grads, delta)
    }
}

/// Caller-driven loss: the closure receives network outputs and returns the
/// scalar loss together with dLoss/dOutput. Errors on a non-finite loss.
pub fn value_and_grad<L>(
    params: &MlpParams,
    input: &Matrix,
    loss: L,
) -> Result<(f64, MlpParams), NnError>
where
    L: FnOnce(&Matrix) -> (f64, Matrix),
{
    let (out, cache) = params.forward(input)?;
    let (value, d_out) = loss(&out);
    if !value.is_finite() {
        return Err(NnError::NonFinite("loss"));
    }
    let (grads, _) = params.backward(&cache, &d_out);
    Ok((value, grads))
}

/// Adam moments shaped like the parameters they track, plus the shared
/// hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    m: MlpParams,
    v: MlpParams,
    step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

impl AdamState {
    pub fn new(params: &MlpParams) -> Self {
        Self {
            m: params.zeros_like(),
            v: params.zeros_like(),
            step: 0,
            beta1: ADAM_BETA1,
            beta2: ADAM_BETA2,
            eps: ADAM_EPS,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

fn adam_update_slice(
    p: &mut [f64],
    g: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    lr: f64,
    t: u64,
    beta1: f64,
    beta2: f64,
    eps: f64,
) {
    let bc1 = 1.0 - beta1.powi(t as i32);
    let bc2 = 1.0 - beta2.powi(t as i32);
    for i in 0..p.len() {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}

/// Bias-corrected Adam step; increments the state's step counter.
pub fn adam_step(
    params: &mut MlpParams,
    grads: &MlpParams,
    state: &mut AdamState,
    lr: f64,
) -> Result<(), NnError> {
    if !params.same_shape(grads) {
        return Err(NnError::ShapeMismatch {
            context: "adam grads",
            expected: params.layers.len(),
            got: grads.layers.len(),
        });
    }
    state.step += 1;
    let (b1, b2, eps, t) = (state.beta1, state.beta2, state.eps, state.step);
    for (i, layer) in params.layers.iter_mut().enumerate() {
        adam_update_slice(
            layer.weight.data_mut(),
            grads.layers[i].weight.data(),
            state.m.layers[i].weight.data_mut(),
            state.v.layers[i].weight.data_mut(),
            lr,
            t,
            b1,
            b2,
            eps,
        );
        adam_update_slice(
            &mut layer.bias,
            &grads.layers[i].bias,
            &mut state.m.layers[i].bias,
            &mut state.v.layers[i].bias,
            lr,
            t,
            b1,
            b2,
            eps,
        );
    }
    Ok(())
}

/// Adam over a single scalar (the log-temperature).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarAdam {
    m: f64,
    v: f64,
    step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for ScalarAdam {
    fn default() -> Self {
        Self {
            m: 0.0,
            v: 0.0,
            step: 0,
            beta1: ADAM_BETA1,
            beta2: ADAM_BETA2,
            eps: ADAM_EPS,
        }
    }
}

impl ScalarAdam {
    pub fn step(&mut self, param: &mut f64, grad: f64, lr: f64) {
        self.step += 1;
        let mut p = [*param];
        let mut m = [self.m];
        let mut v = [self.v];
        adam_update_slice(
            &mut p,
            &[grad],
            &mut m,
            &mut v,
            lr,
            self.step,
            self.beta1,
            self.beta2,
            self.eps,
        );
        *param = p[0];
        self.m = m[0];
        self.v = v[0];
    }
}

/// Polyak averaging: every target entry becomes `tau*online + (1-tau)*target`.
pub fn polyak_update(target: &mut MlpParams, online: &MlpParams, tau: f64) -> Result<(), NnError> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(NnError::BadTau(tau));
    }
    if !target.same_shape(online) {
        return Err(NnError::ShapeMismatch {
            context: "polyak shapes",
            expected: target.layers.len(),
            got: online.layers.len(),
        });
    }
    for (t_layer, o_layer) in target.layers.iter_mut().zip(&online.layers) {
        for (t, &o) in t_layer
            .weight
            .data_mut()
            .iter_mut()
            .zip(o_layer.weight.data())
        {
            *t = tau * o + (1.0 - tau) * *t;
        }
        for (t, &o) in t_layer.bias.iter_mut().zip(&o_layer.bias) {
            *t = tau * o + (1.0 - tau) * *t;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rngs::seeded;
    use approx::assert_relative_eq;

    fn identity_net(d: usize) -> MlpParams {
        // Single linear layer with W = I, b = 0.
        let mut p = MlpParams::zeros(&[d, d]);
        for i in 0..d {
            p.layers[0].weight.set(i, i, 1.0);
        }
        p
    }

    #[test]
    fn forward_examples() {
        // Zero net maps anything to zero.
        let zero = MlpParams::zeros(&[2, 3, 2]);
        let out = zero
            .forward_value(&Matrix::from_rows(&[vec![1.0, -4.0]]))
            .unwrap();
        assert_eq!(out.data(), &[0.0, 0.0]);

        // Identity single layer.
        let id = identity_net(2);
        let out = id
            .forward_value(&Matrix::from_rows(&[vec![1.0, -2.0]]))
            .unwrap();
        assert_eq!(out.data(), &[1.0, -2.0]);

        // Affine map [ [1,1] ] + 0.5.
        let mut p = MlpParams::zeros(&[2, 1]);
        p.layers[0].weight.set(0, 0, 1.0);
        p.layers[0].weight.set(0, 1, 1.0);
        p.layers[0].bias[0] = 0.5;
        let out = p
            .forward_value(&Matrix::from_rows(&[vec![2.0, 3.0]]))
            .unwrap();
        assert_eq!(out.data(), &[5.5]);

        // Shape mismatch errors.
        assert!(matches!(
            p.forward_value(&Matrix::from_rows(&[vec![1.0]])),
            Err(NnError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn value_and_grad_examples() {
        // Constant loss: zero gradients.
        let net = MlpParams::init(&[2, 4, 1], &mut seeded(3, "vg"));
        let (v, g) = value_and_grad(&net, &Matrix::from_rows(&[vec![0.3, -0.7]]), |out| {
            (1.25, Matrix::zeros(out.rows(), out.cols()))
        })
        .unwrap();
        assert_eq!(v, 1.25);
        assert_eq!(g, net.zeros_like());

        // loss = 0.5 * ||out||^2 on identity net, input [3] -> bias grad [3].
        let id = identity_net(1);
        let (v, g) = value_and_grad(&id, &Matrix::from_rows(&[vec![3.0]]), |out| {
            let v = 0.5 * out.data().iter().map(|x| x * x).sum::<f64>();
            (v, out.clone())
        })
        .unwrap();
        assert_eq!(v, 4.5);
        assert_eq!(g.layers[0].bias, vec![3.0]);
        assert_eq!(g.layers[0].weight.get(0, 0), 9.0);

        // Non-finite loss surfaces as an error.
        assert_eq!(
            value_and_grad(&id, &Matrix::from_rows(&[vec![1.0]]), |out| {
                (f64::NAN, out.clone())
            }),
            Err(NnError::NonFinite("loss"))
        );
    }

    /// Central finite differences over every parameter of `params`.
    fn finite_diff<F: FnMut(&MlpParams) -> f64>(params: &MlpParams, mut f: F, h: f64) -> MlpParams {
        let mut grads = params.zeros_like();
        for li in 0..params.layers.len() {
            for i in 0..params.layers[li].weight.data().len() {
                let mut plus = params.clone();
                plus.layers[li].weight.data_mut()[i] += h;
                let mut minus = params.clone();
                minus.layers[li].weight.data_mut()[i] -= h;
                grads.layers[li].weight.data_mut()[i] = (f(&plus) - f(&minus)) / (2.0 * h);
            }
            for i in 0..params.layers[li].bias.len() {
                let mut plus = params.clone();
                plus.layers[li].bias[i] += h;
                let mut minus = params.clone();
                minus.layers[li].bias[i] -= h;
                grads.layers[li].bias[i] = (f(&plus) - f(&minus)) / (2.0 * h);
            }
        }
        grads
    }

    fn max_abs_diff(a: &MlpParams, b: &MlpParams) -> (f64, f64) {
        let mut max_diff = 0.0f64;
        let mut max_mag = 0.0f64;
        for (la, lb) in a.layers.iter().zip(&b.layers) {
            for (&x, &y) in la
                .weight
                .data()
                .iter()
                .chain(&la.bias)
                .zip(lb.weight.data().iter().chain(&lb.bias))
            {
                max_diff = max_diff.max((x - y).abs());
                max_mag = max_mag.max(x.abs().max(y.abs()));
            }
        }
        (max_diff, max_mag)
    }

    #[test]
    fn gradients_match_central_differences_on_random_net() {
        // Random 2x8x1 net with a squared loss against fixed targets.
        let mut rng = seeded(17, "fd-net");
        let net = MlpParams::init(&[2, 8, 1], &mut rng);
        let input = Matrix::from_rows(&[
            vec![0.3, -1.2],
            vec![0.9, 0.1],
            vec![-0.5, 0.7],
            vec![1.4, -0.2],
        ]);
        let targets = [0.5, -0.3, 0.2, 0.9];
        let loss = |out: &Matrix| {
            let mut v = 0.0;
            let mut d = Matrix::zeros(out.rows(), out.cols());
            for r in 0..out.rows() {
                let e = out.get(r, 0) - targets[r];
                v += e * e / out.rows() as f64;
                d.set(r, 0, 2.0 * e / out.rows() as f64);
            }
            (v, d)
        };
        let (_, analytic) = value_and_grad(&net, &input, loss).unwrap();
        let numeric = finite_diff(&net, |p| p.forward_value(&input).map(|o| loss(&o).0).unwrap(), 1e-6);
        let (diff, mag) = max_abs_diff(&analytic, &numeric);
        assert!(diff / mag.max(1e-8) < 1e-4, "rel err {}", diff / mag);
    }

    #[test]
    fn input_gradient_matches_finite_differences() {
        let mut rng = seeded(23, "fd-input");
        let net = MlpParams::init(&[3, 8, 2], &mut rng);
        let x = vec![0.2, -0.4, 0.9];
        let input = Matrix::from_rows(&[x.clone()]);
        let (out, cache) = net.forward(&input).unwrap();
        // loss = sum of outputs
        let d_out = Matrix::from_vec(1, 2, vec![1.0, 1.0]);
        let din = net.input_gradient(&cache, &d_out);
        let _ = out;
        let h = 1e-6;
        for i in 0..3 {
            let mut xp = x.clone();
            xp[i] += h;
            let mut xm = x.clone();
            xm[i] -= h;
            let fp: f64 = net
                .forward_value(&Matrix::from_rows(&[xp]))
                .unwrap()
                .data()
                .iter()
                .sum();
            let fm: f64 = net
                .forward_value(&Matrix::from_rows(&[xm]))
                .unwrap()
                .data()
                .iter()
                .sum();
            let numeric = (fp - fm) / (2.0 * h);
            assert_relative_eq!(din.get(0, i), numeric, max_relative = 1e-5, epsilon = 1e-8);
        }
    }

    #[test]
    fn adam_step_examples() {
        // Zero gradient leaves parameters unchanged.
        let mut net = MlpParams::init(&[1, 1], &mut seeded(1, "adam"));
        let before = net.clone();
        let zero_grads = net.zeros_like();
        let mut state = AdamState::new(&net);
        adam_step(&mut net, &zero_grads, &mut state, 0.1).unwrap();
        assert_eq!(net, before);
        assert_eq!(state.step_count(), 1);

        // First step with scalar gradient 1 moves by ~ -lr.
        let mut net = MlpParams::zeros(&[1, 1]);
        let mut g = net.zeros_like();
        g.layers[0].weight.set(0, 0, 1.0);
        let mut state = AdamState::new(&net);
        adam_step(&mut net, &g, &mut state, 0.1).unwrap();
        assert_relative_eq!(net.layers[0].weight.get(0, 0), -0.1, max_relative = 1e-6);

        // Deterministic recurrence: two runs stay bit-identical.
        let mk = || {
            let mut p = MlpParams::init(&[2, 4, 1], &mut seeded(9, "adam-det"));
            let mut st = AdamState::new(&p);
            let mut grad = p.zeros_like();
            grad.layers[0].weight.set(0, 0, 0.5);
            grad.layers[1].bias[0] = -0.25;
            for _ in 0..10 {
                adam_step(&mut p, &grad, &mut st, 3e-4).unwrap();
            }
            p
        };
        assert_eq!(mk(), mk());
    }

    #[test]
    fn polyak_examples_and_contraction() {
        let online = {
            let mut p = MlpParams::zeros(&[1, 1]);
            p.layers[0].weight.set(0, 0, 1.0);
            p
        };
        let mut target = MlpParams::zeros(&[1, 1]);

        let mut t1 = target.clone();
        polyak_update(&mut t1, &online, 1.0).unwrap();
        assert_eq!(t1, online);

        polyak_update(&mut target, &online, 0.005).unwrap();
        assert_relative_eq!(target.layers[0].weight.get(0, 0), 0.005, max_relative = 1e-15);

        let mut target = MlpParams::zeros(&[1, 1]);
        polyak_update(&mut target, &online, 0.5).unwrap();
        polyak_update(&mut target, &online, 0.5).unwrap();
        assert_relative_eq!(target.layers[0].weight.get(0, 0), 0.75, max_relative = 1e-15);

        // Contraction: ||target' - online|| = (1 - tau) ||target - online||
        // elementwise.
        let mut rng = seeded(4, "polyak");
        let online = MlpParams::init(&[3, 5, 2], &mut rng);
        let mut target = MlpParams::init(&[3, 5, 2], &mut rng);
        let tau = 0.1;
        let gap_before: Vec<f64> = online
            .layers
            .iter()
            .zip(&target.layers)
            .flat_map(|(o, t)| {
                o.weight
                    .data()
                    .iter()
                    .zip(t.weight.data())
                    .map(|(a, b)| a - b)
                    .collect::<Vec<_>>()
            })
            .collect();
        polyak_update(&mut target, &online, tau).unwrap();
        let gap_after: Vec<f64> = online
            .layers
            .iter()
            .zip(&target.layers)
            .flat_map(|(o, t)| {
                o.weight
                    .data()
                    .iter()
                    .zip(t.weight.data())
                    .map(|(a, b)| a - b)
                    .collect::<Vec<_>>()
            })
            .collect();
        for (b, a) in gap_before.iter().zip(&gap_after) {
            assert_relative_eq!(*a, (1.0 - tau) * b, max_relative = 1e-12, epsilon = 1e-15);
        }

        // Shape mismatch errors out.
        let mut small = MlpParams::zeros(&[1, 1]);
        assert!(polyak_update(&mut small, &online, 0.5).is_err());
    }

    #[test]
    fn init_respects_fan_in_bounds() {
        let mut rng = seeded(2, "init");
        let p = MlpParams::init(&[16, 8], &mut rng);
        let bound = 1.0 / 4.0;
        for &w in p.layers[0].weight.data() {
            assert!(w.abs() <= bound);
        }
        for &b in &p.layers[0].bias {
            assert!(b.abs() <= bound);
        }
    }

    #[test]
    fn forward_is_deterministic() {
        let net = MlpParams::init(&[4, 16, 16, 3], &mut seeded(8, "det"));
        let x = Matrix::from_rows(&[vec![0.1, 0.2, 0.3, 0.4]]);
        let a = net.forward_value(&x).unwrap();
        let b = net.forward_value(&x).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn params_serialize_roundtrip_exactly() {
        let net = MlpParams::init(&[3, 7, 2], &mut seeded(21, "serde"));
        let state = AdamState::new(&net);
        let json = serde_json::to_string(&(&net, &state)).unwrap();
        let (net2, state2): (MlpParams, AdamState) = serde_json::from_str(&json).unwrap();
        assert_eq!(net, net2);
        assert_eq!(state, state2);
    }
}
