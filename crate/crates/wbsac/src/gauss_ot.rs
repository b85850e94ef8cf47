//! Diagonal-Gaussian distribution math.
//!
//! Everything the actors need at the distribution level: factorized Gaussian
//! construction with clamped log-std, reparameterized sampling with tanh
//! squashing, squashed log-densities, differential entropy, the squared
//! 2-Wasserstein distance, and the closed-form weighted barycenter that
//! blends the pessimistic and optimistic policies into the exploration
//! policy.
//!
//! All functions here are pure over immutable values and safe to call from
//! any thread.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Guard added inside the tanh correction term `ln(1 - tanh^2 + eps)` so the
/// squashed log-density stays finite as |tanh| -> 1.
pub const TANH_EPS: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum GaussError {
    #[error("mean has length {mean_len} but std has length {std_len}")]
    LengthMismatch { mean_len: usize, std_len: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("distribution needs at least one dimension")]
    Empty,
    #[error("std must be strictly positive and finite, got {0}")]
    BadStd(f64),
    #[error("log_std bounds must satisfy min < max, got [{min}, {max}]")]
    BadBounds { min: f64, max: f64 },
    #[error("barycenter weight must lie in [0, 1], got {0}")]
    BadWeight(f64),
}

/// Factorized Gaussian over the pre-squash action space.
///
/// `std[i] > 0` is enforced at construction; the environment-facing action is
/// `tanh` of a sample from this distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagGaussian {
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl DiagGaussian {
    pub fn new(mean: Vec<f64>, std: Vec<f64>) -> Result<Self, GaussError> {
        if mean.len() != std.len() {
            return Err(GaussError::LengthMismatch {
                mean_len: mean.len(),
                std_len: std.len(),
            });
        }
        if mean.is_empty() {
            return Err(GaussError::Empty);
        }
        for &s in &std {
            if !(s > 0.0) || !s.is_finite() {
                return Err(GaussError::BadStd(s));
            }
        }
        Ok(Self { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }
}

/// Blending weights for the barycentric exploration policy.
///
/// Only the optimistic weight is stored; the pessimistic weight is derived as
/// `1 - xi_o` so the pair always sums to one exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarycenterWeights {
    xi_o: f64,
}

impl BarycenterWeights {
    pub fn from_xi_o(xi_o: f64) -> Result<Self, GaussError> {
        if !(0.0..=1.0).contains(&xi_o) {
            return Err(GaussError::BadWeight(xi_o));
        }
        Ok(Self { xi_o })
    }

    pub fn xi_o(&self) -> f64 {
        self.xi_o
    }

    pub fn xi_p(&self) -> f64 {
        1.0 - self.xi_o
    }
}

/// Builds a distribution from actor-head outputs, clamping `log_std` to
/// `[log_std_min, log_std_max]` before exponentiating.
pub fn make_diag_gaussian(
    mean: &[f64],
    log_std: &[f64],
    log_std_min: f64,
    log_std_max: f64,
) -> Result<DiagGaussian, GaussError> {
    if mean.len() != log_std.len() {
        return Err(GaussError::LengthMismatch {
            mean_len: mean.len(),
            std_len: log_std.len(),
        });
    }
    if !(log_std_min < log_std_max) {
        return Err(GaussError::BadBounds {
            min: log_std_min,
            max: log_std_max,
        });
    }
    let std = log_std
        .iter()
        .map(|&l| l.clamp(log_std_min, log_std_max).exp())
        .collect();
    DiagGaussian::new(mean.to_vec(), std)
}

/// Reparameterized sample: `pre = mean + std * noise`, `action = tanh(pre)`.
///
/// Both vectors are returned; gradients with respect to mean/std flow through
/// `pre` for a fixed noise vector.
pub fn sample_reparameterized(
    dist: &DiagGaussian,
    noise: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), GaussError> {
    if noise.len() != dist.dim() {
        return Err(GaussError::DimMismatch {
            left: dist.dim(),
            right: noise.len(),
        });
    }
    let pre: Vec<f64> = dist
        .mean
        .iter()
        .zip(&dist.std)
        .zip(noise)
        .map(|((&m, &s), &e)| m + s * e)
        .collect();
    let squashed = pre.iter().map(|&p| p.tanh()).collect();
    Ok((pre, squashed))
}

/// Log-density of the tanh-squashed action, evaluated at the pre-squash
/// point: `sum_i [ log N(pre_i; mean_i, std_i) - ln(1 - tanh^2(pre_i) + eps) ]`.
pub fn log_prob_squashed(dist: &DiagGaussian, pre_squash: &[f64]) -> Result<f64, GaussError> {
    if pre_squash.len() != dist.dim() {
        return Err(GaussError::DimMismatch {
            left: dist.dim(),
            right: pre_squash.len(),
        });
    }
    const HALF_LN_2PI: f64 = 0.918938533204672742; // ln(2*pi)/2
    let mut total = 0.0;
    for ((&m, &s), &p) in dist.mean.iter().zip(&dist.std).zip(pre_squash) {
        let z = (p - m) / s;
        let t = p.tanh();
        total += -HALF_LN_2PI - s.ln() - 0.5 * z * z - (1.0 - t * t + TANH_EPS).ln();
    }
    Ok(total)
}

/// Pre-squash differential entropy: `(d/2) ln(2*pi*e) + sum_i ln std_i`.
pub fn differential_entropy(dist: &DiagGaussian) -> f64 {
    let d = dist.dim() as f64;
    let ln_2pi_e = (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
    0.5 * d * ln_2pi_e + dist.std.iter().map(|s| s.ln()).sum::<f64>()
}

/// Squared 2-Wasserstein distance between diagonal Gaussians:
/// `||mean_p - mean_q||^2 + sum_i (std_p_i - std_q_i)^2`.
pub fn w2_squared_diag(p: &DiagGaussian, q: &DiagGaussian) -> Result<f64, GaussError> {
    if p.dim() != q.dim() {
        return Err(GaussError::DimMismatch {
            left: p.dim(),
            right: q.dim(),
        });
    }
    let mean_term: f64 = p
        .mean
        .iter()
        .zip(&q.mean)
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum();
    let std_term: f64 = p
        .std
        .iter()
        .zip(&q.std)
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum();
    Ok(mean_term + std_term)
}

/// Weighted Wasserstein barycenter of two diagonal Gaussians.
///
/// Closed form: `mean = xi_p*mean_p + xi_o*mean_o` and, per dimension,
/// `std = xi_p*std_p + xi_o*std_o` (the matrix square roots of diagonal
/// covariances are the std's themselves). At weight endpoints the input is
/// returned unchanged, so degenerate blends are exact.
pub fn wasserstein_barycenter(
    p: &DiagGaussian,
    o: &DiagGaussian,
    w: BarycenterWeights,
) -> Result<DiagGaussian, GaussError> {
    if p.dim() != o.dim() {
        return Err(GaussError::DimMismatch {
            left: p.dim(),
            right: o.dim(),
        });
    }
    if w.xi_o() == 0.0 {
        return Ok(p.clone());
    }
    if w.xi_o() == 1.0 {
        return Ok(o.clone());
    }
    let (xi_p, xi_o) = (w.xi_p(), w.xi_o());
    let mean = p
        .mean
        .iter()
        .zip(&o.mean)
        .map(|(&a, &b)| xi_p * a + xi_o * b)
        .collect();
    let std = p
        .std
        .iter()
        .zip(&o.std)
        .map(|(&a, &b)| xi_p * a + xi_o * b)
        .collect();
    DiagGaussian::new(mean, std)
}

/// Entropy slack of the barycenter over the weighted entropy mixture:
/// `H(barycenter) - (xi_p H(p) + xi_o H(o))`; non-negative up to floating
/// tolerance by concavity of ln.
pub fn entropy_bound_slack(
    p: &DiagGaussian,
    o: &DiagGaussian,
    w: BarycenterWeights,
) -> Result<f64, GaussError> {
    let bary = wasserstein_barycenter(p, o, w)?;
    Ok(differential_entropy(&bary)
        - (w.xi_p() * differential_entropy(p) + w.xi_o() * differential_entropy(o)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn g(mean: &[f64], std: &[f64]) -> DiagGaussian {
        DiagGaussian::new(mean.to_vec(), std.to_vec()).unwrap()
    }

    #[test]
    fn make_diag_gaussian_clamps_log_std() {
        let d = make_diag_gaussian(&[0.0], &[0.0], -20.0, 2.0).unwrap();
        assert_eq!(d.std(), &[1.0]);

        let d = make_diag_gaussian(&[0.0], &[5.0], -20.0, 2.0).unwrap();
        assert_relative_eq!(d.std()[0], 2.0f64.exp(), max_relative = 1e-15);

        let d = make_diag_gaussian(&[1.0, 2.0], &[-30.0, 0.0], -20.0, 2.0).unwrap();
        assert_relative_eq!(d.std()[0], (-20.0f64).exp(), max_relative = 1e-15);
        assert_eq!(d.std()[1], 1.0);
    }

    #[test]
    fn make_diag_gaussian_rejects_bad_inputs() {
        assert_eq!(
            make_diag_gaussian(&[0.0, 1.0], &[0.0], -20.0, 2.0),
            Err(GaussError::LengthMismatch {
                mean_len: 2,
                std_len: 1
            })
        );
        assert!(matches!(
            make_diag_gaussian(&[0.0], &[0.0], 2.0, -20.0),
            Err(GaussError::BadBounds { .. })
        ));
        assert_eq!(DiagGaussian::new(vec![], vec![]), Err(GaussError::Empty));
        assert_eq!(
            DiagGaussian::new(vec![0.0], vec![0.0]),
            Err(GaussError::BadStd(0.0))
        );
    }

    #[test]
    fn sample_reparameterized_examples() {
        let (pre, sq) = sample_reparameterized(&g(&[0.0], &[1.0]), &[0.0]).unwrap();
        assert_eq!(pre, vec![0.0]);
        assert_eq!(sq, vec![0.0]);

        let (pre, sq) = sample_reparameterized(&g(&[1.0], &[2.0]), &[1.0]).unwrap();
        assert_eq!(pre, vec![3.0]);
        assert_relative_eq!(sq[0], 3.0f64.tanh(), max_relative = 1e-15);

        let (pre, sq) = sample_reparameterized(&g(&[0.0, 0.0], &[1.0, 1.0]), &[-1.0, 1.0]).unwrap();
        assert_eq!(pre, vec![-1.0, 1.0]);
        assert_eq!(sq[0], -sq[1]);
    }

    #[test]
    fn log_prob_squashed_at_unit_gaussian_mode() {
        // Independent numeric evaluation of the standard-normal log-pdf plus
        // the tanh correction at pre = 0.
        let expected = -0.5 * (2.0 * std::f64::consts::PI).ln() - (1.0 + TANH_EPS).ln();
        let got = log_prob_squashed(&g(&[0.0], &[1.0]), &[0.0]).unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-12);
        assert_relative_eq!(got, -0.9189, max_relative = 1e-4);
    }

    #[test]
    fn log_prob_squashed_scale_and_factorization() {
        // Doubling std at pre = mean lowers the Gaussian term by ln 2.
        let lp1 = log_prob_squashed(&g(&[0.5], &[1.0]), &[0.5]).unwrap();
        let lp2 = log_prob_squashed(&g(&[0.5], &[2.0]), &[0.5]).unwrap();
        assert_relative_eq!(lp1 - lp2, 2.0f64.ln(), max_relative = 1e-12);

        // Independent dimensions sum.
        let joint = log_prob_squashed(&g(&[0.3, -1.0], &[0.7, 2.0]), &[0.1, 0.4]).unwrap();
        let a = log_prob_squashed(&g(&[0.3], &[0.7]), &[0.1]).unwrap();
        let b = log_prob_squashed(&g(&[-1.0], &[2.0]), &[0.4]).unwrap();
        assert_relative_eq!(joint, a + b, max_relative = 1e-12);
    }

    #[test]
    fn squashed_density_integrates_to_one() {
        // Integrate the squashed density over (-1, 1) by substituting
        // a = tanh(u): integrand becomes q(a(u)) * (1 - tanh^2 u) du.
        for (mean, std) in [(0.0, 1.0), (0.7, 0.5), (-0.3, 2.0)] {
            let dist = g(&[mean], &[std]);
            let lo = mean - 10.0 * std;
            let hi = mean + 10.0 * std;
            let n = 20_000; // Simpson panels (even)
            let h = (hi - lo) / n as f64;
            let f = |u: f64| {
                let t: f64 = u.tanh();
                log_prob_squashed(&dist, &[u]).unwrap().exp() * (1.0 - t * t)
            };
            let mut acc = f(lo) + f(hi);
            for k in 1..n {
                let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * f(lo + k as f64 * h);
            }
            let integral = acc * h / 3.0;
            assert!(
                (integral - 1.0).abs() < 1e-3,
                "integral {integral} for N({mean}, {std})"
            );
        }
    }

    #[test]
    fn differential_entropy_examples() {
        assert_relative_eq!(
            differential_entropy(&g(&[0.0], &[1.0])),
            1.41893853320467,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            differential_entropy(&g(&[0.0], &[std::f64::consts::E])),
            1.41893853320467 + 1.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            differential_entropy(&g(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0])),
            3.0 * 1.41893853320467,
            max_relative = 1e-12
        );
    }

    #[test]
    fn w2_examples() {
        let p = g(&[0.0], &[1.0]);
        assert_eq!(w2_squared_diag(&p, &p).unwrap(), 0.0);
        assert_eq!(w2_squared_diag(&p, &g(&[3.0], &[1.0])).unwrap(), 9.0);
        assert_eq!(w2_squared_diag(&p, &g(&[0.0], &[2.0])).unwrap(), 1.0);
        assert!(matches!(
            w2_squared_diag(&p, &g(&[0.0, 0.0], &[1.0, 1.0])),
            Err(GaussError::DimMismatch { .. })
        ));
    }

    #[test]
    fn barycenter_examples() {
        let p = g(&[0.0], &[1.0]);
        let o = g(&[2.0], &[3.0]);

        let b = wasserstein_barycenter(&p, &o, BarycenterWeights::from_xi_o(0.0).unwrap()).unwrap();
        assert_eq!(b, p);
        let b = wasserstein_barycenter(&p, &o, BarycenterWeights::from_xi_o(1.0).unwrap()).unwrap();
        assert_eq!(b, o);

        let b = wasserstein_barycenter(&p, &o, BarycenterWeights::from_xi_o(0.5).unwrap()).unwrap();
        assert_eq!(b.mean(), &[1.0]);
        assert_eq!(b.std(), &[2.0]);

        // Barycenter of identical measures is the measure, for every weight.
        for xi in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let b =
                wasserstein_barycenter(&p, &p, BarycenterWeights::from_xi_o(xi).unwrap()).unwrap();
            assert_relative_eq!(b.mean()[0], 0.0, epsilon = 1e-15);
            assert_relative_eq!(b.std()[0], 1.0, max_relative = 1e-15);
        }
    }

    #[test]
    fn barycenter_params_are_affine_in_weights() {
        let p = g(&[0.4, -2.0], &[0.3, 5.0]);
        let o = g(&[-1.5, 3.0], &[2.0, 0.01]);
        for xi in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let w = BarycenterWeights::from_xi_o(xi).unwrap();
            let b = wasserstein_barycenter(&p, &o, w).unwrap();
            for i in 0..2 {
                assert_eq!(b.mean()[i], (1.0 - xi) * p.mean()[i] + xi * o.mean()[i]);
                assert_eq!(b.std()[i], (1.0 - xi) * p.std()[i] + xi * o.std()[i]);
            }
        }
    }

    #[test]
    fn entropy_bound_slack_examples() {
        let p = g(&[0.0], &[1.0]);
        let o = g(&[0.0], &[4.0]);
        let w = |xi| BarycenterWeights::from_xi_o(xi).unwrap();

        // Degenerate weight: exact zero (endpoint returns the input).
        assert_eq!(entropy_bound_slack(&p, &o, w(0.0)).unwrap(), 0.0);
        assert_eq!(entropy_bound_slack(&p, &o, w(1.0)).unwrap(), 0.0);

        // Equality case of Jensen at p = o, up to float rounding.
        assert!(entropy_bound_slack(&p, &p, w(0.3)).unwrap().abs() <= 1e-12);

        // ln(2.5) - 0.5 ln 4, evaluated through differential_entropy.
        let slack = entropy_bound_slack(&p, &o, w(0.5)).unwrap();
        assert_relative_eq!(slack, 2.5f64.ln() - 0.5 * 4.0f64.ln(), max_relative = 1e-12);
        assert_relative_eq!(slack, 0.2231, max_relative = 1e-3);
        assert!(slack > 0.0);
    }

    #[test]
    fn barycenter_beats_perturbed_candidates_on_the_objective() {
        // 200 random pairs; nudging any barycenter parameter by +-delta must
        // not improve the weighted W2^2 objective.
        let mut rng = crate::rngs::seeded(11, "bary-perturb");
        for _ in 0..200 {
            let d = *[1usize, 2, 4].iter().nth(rng.random_range(0..3)).unwrap();
            let sample = |rng: &mut rand_chacha::ChaCha12Rng| {
                let mean: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
                let std: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..4.0)).collect();
                DiagGaussian::new(mean, std).unwrap()
            };
            let p = sample(&mut rng);
            let o = sample(&mut rng);
            let w = BarycenterWeights::from_xi_o(rng.random_range(0.0..1.0)).unwrap();
            let b = wasserstein_barycenter(&p, &o, w).unwrap();
            let objective = |cand: &DiagGaussian| {
                w.xi_p() * w2_squared_diag(cand, &p).unwrap()
                    + w.xi_o() * w2_squared_diag(cand, &o).unwrap()
            };
            let best = objective(&b);
            for delta in [1e-2, 1e-3] {
                for i in 0..d {
                    for sign in [-1.0, 1.0] {
                        let mut mean = b.mean().to_vec();
                        mean[i] += sign * delta;
                        let cand = DiagGaussian::new(mean, b.std().to_vec()).unwrap();
                        assert!(objective(&cand) >= best - 1e-12);

                        let mut std = b.std().to_vec();
                        std[i] = (std[i] + sign * delta).max(1e-9);
                        let cand = DiagGaussian::new(b.mean().to_vec(), std).unwrap();
                        assert!(objective(&cand) >= best - 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn proposition_entropy_bound_holds_on_random_instances() {
        let mut rng = crate::rngs::seeded(5, "prop1-unit");
        for _ in 0..2000 {
            let d = rng.random_range(1..=8usize);
            let sample = |rng: &mut rand_chacha::ChaCha12Rng| {
                let mean: Vec<f64> = (0..d).map(|_| rng.random_range(-10.0..10.0)).collect();
                let std: Vec<f64> = (0..d)
                    .map(|_| 10f64.powf(rng.random_range(-3.0..3.0)))
                    .collect();
                DiagGaussian::new(mean, std).unwrap()
            };
            let p = sample(&mut rng);
            let o = sample(&mut rng);
            let w = BarycenterWeights::from_xi_o(rng.random_range(0.0..=1.0)).unwrap();
            let slack = entropy_bound_slack(&p, &o, w).unwrap();
            assert!(slack >= -1e-12, "slack {slack}");
        }
    }

    proptest! {
        #[test]
        fn w2_metric_axioms(
            seed in 0u64..1000,
        ) {
            // Symmetry, non-negativity, zero-iff-equal, and the triangle
            // inequality on sqrt(W2^2), over random triples.
            let mut rng = crate::rngs::seeded(seed, "w2-axioms");
            let d = rng.random_range(1..=4usize);
            let sample = |rng: &mut rand_chacha::ChaCha12Rng| {
                let mean: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
                let std: Vec<f64> = (0..d).map(|_| rng.random_range(0.01..10.0)).collect();
                DiagGaussian::new(mean, std).unwrap()
            };
            let a = sample(&mut rng);
            let b = sample(&mut rng);
            let c = sample(&mut rng);

            let ab = w2_squared_diag(&a, &b).unwrap();
            let ba = w2_squared_diag(&b, &a).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(w2_squared_diag(&a, &a).unwrap(), 0.0);
            if ab == 0.0 {
                prop_assert_eq!(a.clone(), b.clone());
            }

            let (dab, dbc, dac) = (ab.sqrt(), w2_squared_diag(&b, &c).unwrap().sqrt(),
                                   w2_squared_diag(&a, &c).unwrap().sqrt());
            prop_assert!(dac <= dab + dbc + 1e-9);
        }

        #[test]
        fn barycenter_is_valid_and_between(seed in 0u64..500) {
            let mut rng = crate::rngs::seeded(seed, "bary-valid");
            let d = rng.random_range(1..=4usize);
            let sample = |rng: &mut rand_chacha::ChaCha12Rng| {
                let mean: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
                let std: Vec<f64> = (0..d).map(|_| rng.random_range(0.01..10.0)).collect();
                DiagGaussian::new(mean, std).unwrap()
            };
            let p = sample(&mut rng);
            let o = sample(&mut rng);
            let w = BarycenterWeights::from_xi_o(rng.random_range(0.0..=1.0)).unwrap();
            let b = wasserstein_barycenter(&p, &o, w).unwrap();
            for i in 0..d {
                let (lo, hi) = (p.std()[i].min(o.std()[i]), p.std()[i].max(o.std()[i]));
                prop_assert!(b.std()[i] >= lo - 1e-12 && b.std()[i] <= hi + 1e-12);
                let (lo, hi) = (p.mean()[i].min(o.mean()[i]), p.mean()[i].max(o.mean()[i]));
                prop_assert!(b.mean()[i] >= lo - 1e-12 && b.mean()[i] <= hi + 1e-12);
            }
        }
    }
}
