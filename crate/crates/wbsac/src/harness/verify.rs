//! Numeric verification suites behind the `verify` command.
//!
//! Each suite checks an implementation path against an independent oracle:
//! the closed-form barycenter against a grid-plus-refinement minimizer of
//! the weighted W2^2 objective, the closed-form W2 against a discretized
//! 1-d inverse-CDF transport solve, the entropy bound by brute enumeration,
//! and every training-loss gradient against central finite differences.
//! None of the oracles reuse the closed forms they certify.

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::agents::losses::{alpha_loss, critic_loss_value, optimistic_loss, pessimistic_loss};
use crate::agents::losses::critic_loss_grads;
use crate::agents::HeadBounds;
use crate::gauss_ot::{
    entropy_bound_slack, w2_squared_diag, wasserstein_barycenter, BarycenterWeights, DiagGaussian,
};
use crate::nn::{Matrix, MlpParams};
use crate::rngs::{normal_vec, seeded};

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl SuiteResult {
    pub fn line(&self) -> String {
        format!(
            "{}: {} ({:.2}s) - {}",
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.detail
        )
    }
}

/// Central finite differences over every parameter of `params`.
pub fn finite_difference_grad<F: FnMut(&MlpParams) -> f64>(
    params: &MlpParams,
    mut f: F,
    h: f64,
) -> MlpParams {
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

/// Max-norm relative deviation between two gradient sets.
pub fn gradient_rel_err(a: &MlpParams, b: &MlpParams) -> f64 {
    let mut diff = 0.0f64;
    let mut mag = 0.0f64;
    for (la, lb) in a.layers.iter().zip(&b.layers) {
        for (&x, &y) in la
            .weight
            .data()
            .iter()
            .chain(&la.bias)
            .zip(lb.weight.data().iter().chain(&lb.bias))
        {
            diff = diff.max((x - y).abs());
            mag = mag.max(x.abs().max(y.abs()));
        }
    }
    diff / mag.max(1e-8)
}

fn random_gaussian(rng: &mut ChaCha12Rng, d: usize) -> DiagGaussian {
    let mean: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
    let std: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..4.0)).collect();
    DiagGaussian::new(mean, std).unwrap()
}

/// Ternary-search minimum of a unimodal function on [lo, hi].
fn refine_min<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64) -> f64 {
    // Coarse grid seed so a slightly non-unimodal section cannot trap the
    // refinement away from the basin.
    let mut best_x = lo;
    let mut best_v = f64::INFINITY;
    for k in 0..=100 {
        let x = lo + (hi - lo) * k as f64 / 100.0;
        let v = f(x);
        if v < best_v {
            best_v = v;
            best_x = x;
        }
    }
    let width = (hi - lo) / 100.0;
    lo = (best_x - width).max(lo);
    hi = (best_x + width).min(hi);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    0.5 * (lo + hi)
}

/// Barycenter optimality: the closed form must match a per-coordinate
/// grid+ternary minimizer of `xi_p W2^2(., p) + xi_o W2^2(., o)`.
pub fn barycenter_suite(pairs: usize, seed: u64) -> SuiteResult {
    let start = Instant::now();
    let mut rng = seeded(seed, "verify/barycenter");
    let dims = [1usize, 2, 4];
    let mut max_dev = 0.0f64;
    for i in 0..pairs {
        let d = dims[i % dims.len()];
        let p = random_gaussian(&mut rng, d);
        let o = random_gaussian(&mut rng, d);
        let w = BarycenterWeights::from_xi_o(rng.random_range(0.0..=1.0)).unwrap();
        let closed = wasserstein_barycenter(&p, &o, w).unwrap();

        let objective = |mean: &[f64], std: &[f64]| {
            let cand = DiagGaussian::new(mean.to_vec(), std.to_vec()).unwrap();
            w.xi_p() * w2_squared_diag(&cand, &p).unwrap()
                + w.xi_o() * w2_squared_diag(&cand, &o).unwrap()
        };

        // Coordinate descent: the objective is separable per coordinate, so
        // one sweep of 1-d minimizations lands on the optimum.
        let mut mean: Vec<f64> = (0..d)
            .map(|j| 0.5 * (p.mean()[j] + o.mean()[j]))
            .collect();
        let mut std: Vec<f64> = (0..d).map(|j| 0.5 * (p.std()[j] + o.std()[j])).collect();
        for _sweep in 0..2 {
            for j in 0..d {
                let (mut m, mut s) = (mean.clone(), std.clone());
                let lo = p.mean()[j].min(o.mean()[j]) - 1.0;
                let hi = p.mean()[j].max(o.mean()[j]) + 1.0;
                mean[j] = refine_min(
                    |x| {
                        m[j] = x;
                        objective(&m, &std)
                    },
                    lo,
                    hi,
                );
                let lo = 1e-6;
                let hi = p.std()[j].max(o.std()[j]) + 1.0;
                std[j] = refine_min(
                    |x| {
                        s[j] = x;
                        objective(&mean, &s)
                    },
                    lo,
                    hi,
                );
            }
        }
        for j in 0..d {
            max_dev = max_dev.max((mean[j] - closed.mean()[j]).abs());
            max_dev = max_dev.max((std[j] - closed.std()[j]).abs());
        }
    }
    SuiteResult {
        name: "barycenter-oracle",
        passed: max_dev <= 1e-6,
        detail: format!("{pairs} pairs, max parameter deviation {max_dev:.2e} (tol 1e-6)"),
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Squared W2 between two 1-d Gaussians by discretized optimal transport:
/// numeric CDFs on a fine grid, then midpoint quadrature of
/// `(F^-1(u) - G^-1(u))^2` with interpolated numeric inverses.
pub fn w2_discretized_1d(m1: f64, s1: f64, m2: f64, s2: f64) -> f64 {
    let lo = (m1 - 8.0 * s1).min(m2 - 8.0 * s2);
    let hi = (m1 + 8.0 * s1).max(m2 + 8.0 * s2);
    let n = 32_001usize;
    let dx = (hi - lo) / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|i| lo + i as f64 * dx).collect();
    let cdf = |m: f64, s: f64| -> Vec<f64> {
        let pdf: Vec<f64> = grid
            .iter()
            .map(|&x| (-(x - m) * (x - m) / (2.0 * s * s)).exp())
            .collect();
        let mut acc = vec![0.0; n];
        for i in 1..n {
            acc[i] = acc[i - 1] + 0.5 * (pdf[i] + pdf[i - 1]) * dx;
        }
        let total = acc[n - 1];
        for v in &mut acc {
            *v /= total;
        }
        acc
    };
    let f = cdf(m1, s1);
    let g = cdf(m2, s2);
    let invert = |cdf: &[f64], u: f64| -> f64 {
        let idx = cdf.partition_point(|&c| c < u);
        if idx == 0 {
            return grid[0];
        }
        if idx >= n {
            return grid[n - 1];
        }
        let (c0, c1) = (cdf[idx - 1], cdf[idx]);
        let t = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.0 };
        grid[idx - 1] + t * dx
    };
    let k = 20_000usize;
    let mut acc = 0.0;
    for j in 0..k {
        let u = (j as f64 + 0.5) / k as f64;
        let d = invert(&f, u) - invert(&g, u);
        acc += d * d;
    }
    acc / k as f64
}

pub fn w2_suite(pairs: usize, seed: u64) -> SuiteResult {
    let start = Instant::now();
    let mut rng = seeded(seed, "verify/w2");
    let mut max_rel = 0.0f64;
    for _ in 0..pairs {
        let (m1, m2) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let (s1, s2) = (rng.random_range(0.3..2.5), rng.random_range(0.3..2.5));
        let closed = w2_squared_diag(
            &DiagGaussian::new(vec![m1], vec![s1]).unwrap(),
            &DiagGaussian::new(vec![m2], vec![s2]).unwrap(),
        )
        .unwrap();
        let numeric = w2_discretized_1d(m1, s1, m2, s2);
        // Relative to the larger of the two, guarding near-zero distances.
        let rel = (closed - numeric).abs() / closed.max(numeric).max(1e-3);
        max_rel = max_rel.max(rel);
    }
    SuiteResult {
        name: "w2-oracle",
        passed: max_rel <= 1e-3,
        detail: format!("{pairs} pairs, max relative error {max_rel:.2e} (tol 1e-3)"),
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Entropy lower bound: slack >= -1e-12 on random instances, and zero (to
/// 1e-12) at the weight endpoints and for identical inputs.
pub fn proposition1_suite(instances: usize, seed: u64) -> SuiteResult {
    let start = Instant::now();
    let mut rng = seeded(seed, "verify/prop1");
    let mut min_slack = f64::INFINITY;
    let mut max_endpoint = 0.0f64;
    for i in 0..instances {
        let d = rng.random_range(1..=8usize);
        let wide = |rng: &mut ChaCha12Rng| {
            let mean: Vec<f64> = (0..d).map(|_| rng.random_range(-10.0..10.0)).collect();
            let std: Vec<f64> = (0..d)
                .map(|_| 10f64.powf(rng.random_range(-3.0..3.0)))
                .collect();
            DiagGaussian::new(mean, std).unwrap()
        };
        let p = wide(&mut rng);
        let o = wide(&mut rng);
        let xi = rng.random_range(0.0..=1.0);
        let slack = entropy_bound_slack(&p, &o, BarycenterWeights::from_xi_o(xi).unwrap()).unwrap();
        min_slack = min_slack.min(slack);

        // Rotate through the equality cases.
        match i % 3 {
            0 => {
                let s = entropy_bound_slack(&p, &o, BarycenterWeights::from_xi_o(0.0).unwrap())
                    .unwrap();
                max_endpoint = max_endpoint.max(s.abs());
            }
            1 => {
                let s = entropy_bound_slack(&p, &o, BarycenterWeights::from_xi_o(1.0).unwrap())
                    .unwrap();
                max_endpoint = max_endpoint.max(s.abs());
            }
            _ => {
                let s = entropy_bound_slack(&p, &p, BarycenterWeights::from_xi_o(xi).unwrap())
                    .unwrap();
                max_endpoint = max_endpoint.max(s.abs());
            }
        }
    }
    let passed = min_slack >= -1e-12 && max_endpoint <= 1e-12;
    SuiteResult {
        name: "proposition1",
        passed,
        detail: format!(
            "{instances} instances, min slack {min_slack:.2e} (>= -1e-12), max |equality-case| {max_endpoint:.2e} (<= 1e-12)"
        ),
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Analytic gradients of all four training losses against central finite
/// differences (step 1e-6) on networks with <= 64 hidden units.
pub fn gradient_suite(nets_per_family: usize, seed: u64) -> SuiteResult {
    let start = Instant::now();
    let mut rng = seeded(seed, "verify/grad");
    let widths = [8usize, 16, 32, 64];
    let (obs_dim, act_dim, batch) = (3usize, 2usize, 6usize);
    let bounds = HeadBounds { log_std_min: -20.0, log_std_max: 2.0, mean_clamp: 3.0 };
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    let mut worst_family = "";

    for i in 0..nets_per_family {
        let w = widths[i % widths.len()];
        let actor = MlpParams::init(&[obs_dim, w, w, 2 * act_dim], &mut rng);
        let (c1, c2, states, noise) = loop {
            let c1 = MlpParams::init(&[obs_dim + act_dim, w, w, 1], &mut rng);
            let c2 = MlpParams::init(&[obs_dim + act_dim, w, w, 1], &mut rng);
            let states = Matrix::from_vec(
                batch,
                obs_dim,
                (0..batch * obs_dim)
                    .map(|_| rng.random_range(-1.0..1.0))
                    .collect(),
            );
            let noise = Matrix::from_vec(batch, act_dim, normal_vec(batch * act_dim, &mut rng));
            // Step off the measure-zero min/|.| kink: finite differences are
            // meaningless within h of a critic tie.
            let sample =
                crate::agents::losses::actor_sample(&actor, &states, &noise, bounds).unwrap();
            let input = states.hcat(&sample.actions);
            let q1 = c1.forward_value(&input).unwrap();
            let q2 = c2.forward_value(&input).unwrap();
            let min_gap = (0..batch)
                .map(|r| (q1.get(r, 0) - q2.get(r, 0)).abs())
                .fold(f64::INFINITY, f64::min);
            if min_gap > 1e-4 {
                break (c1, c2, states, noise);
            }
        };

        // Soft Bellman residual (critic regression).
        let targets: Vec<f64> = (0..batch).map(|_| rng.random_range(-1.0..1.0)).collect();
        let actions = Matrix::from_vec(
            batch,
            act_dim,
            (0..batch * act_dim)
                .map(|_| rng.random_range(-0.99..0.99))
                .collect(),
        );
        let (_, analytic) = critic_loss_grads(&c1, &states, &actions, &targets).unwrap();
        let numeric = finite_difference_grad(
            &c1,
            |p| critic_loss_value(p, &states, &actions, &targets).unwrap(),
            h,
        );
        let e = gradient_rel_err(&analytic, &numeric);
        if e > worst {
            worst = e;
            worst_family = "critic";
        }

        // Pessimistic actor objective.
        let alpha = 0.2;
        let (_, g) = pessimistic_loss(&actor, (&c1, &c2), alpha, &states, &noise, bounds, true)
            .unwrap();
        let numeric = finite_difference_grad(
            &actor,
            |p| {
                pessimistic_loss(p, (&c1, &c2), alpha, &states, &noise, bounds, false)
                    .unwrap()
                    .0
            },
            h,
        );
        let e = gradient_rel_err(&g.unwrap(), &numeric);
        if e > worst {
            worst = e;
            worst_family = "pessimistic";
        }

        // Optimistic actor objective with the uncertainty bonus.
        let beta_o = 1.5;
        let (_, g) =
            optimistic_loss(&actor, (&c1, &c2), beta_o, &states, &noise, bounds, true).unwrap();
        let numeric = finite_difference_grad(
            &actor,
            |p| {
                optimistic_loss(p, (&c1, &c2), beta_o, &states, &noise, bounds, false)
                    .unwrap()
                    .0
            },
            h,
        );
        let e = gradient_rel_err(&g.unwrap(), &numeric);
        if e > worst {
            worst = e;
            worst_family = "optimistic";
        }

        // Temperature objective over log alpha (scalar).
        let sample = crate::agents::losses::actor_sample(&actor, &states, &noise, bounds).unwrap();
        let log_alpha = rng.random_range(-3.0..0.5);
        let h0 = -(act_dim as f64);
        let (_, analytic) = alpha_loss(log_alpha, &sample.log_probs, h0);
        let fd = (alpha_loss(log_alpha + h, &sample.log_probs, h0).0
            - alpha_loss(log_alpha - h, &sample.log_probs, h0).0)
            / (2.0 * h);
        let e = (analytic - fd).abs() / analytic.abs().max(fd.abs()).max(1e-8);
        if e > worst {
            worst = e;
            worst_family = "temperature";
        }
    }
    SuiteResult {
        name: "gradient-check",
        passed: worst < 1e-4,
        detail: format!(
            "{nets_per_family} nets per loss family, worst relative error {worst:.2e} ({worst_family}) (tol 1e-4)"
        ),
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs all four suites at their acceptance sizes.
pub fn run_all(seed: u64) -> Vec<SuiteResult> {
    vec![
        barycenter_suite(200, seed),
        w2_suite(50, seed),
        proposition1_suite(10_000, seed),
        gradient_suite(20, seed),
    ]
}
