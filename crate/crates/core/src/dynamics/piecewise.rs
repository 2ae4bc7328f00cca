use serde::{Deserialize, Serialize};

/// Closed-form piecewise decline models for a single capability.
///
/// * `A`: plateau at 1 until `t0`, exponential decay at `lambda1` until `t1`,
///   then `beta · e^{−lambda2 (t − t1)}`.
/// * `B`: linear loss `1 − alpha·t` until `t1`, a quadratic latency phase
///   `1 − alpha·t1 − beta (t − t1)²` until `t2`, then `gamma · e^{−delta (t − t2)}`.
///
/// Segments are evaluated literally; nothing forces them to join continuously.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase", deny_unknown_fields)]
pub enum PiecewiseParams {
    A {
        t0: f64,
        t1: f64,
        lambda1: f64,
        lambda2: f64,
        beta: f64,
    },
    B {
        t1: f64,
        t2: f64,
        alpha: f64,
        beta: f64,
        gamma: f64,
        delta: f64,
    },
}

impl PiecewiseParams {
    /// Level at `t`, clamped to `[0, 1]`.
    pub fn eval(&self, t: f64) -> f64 {
        self.eval_raw(t).clamp(0.0, 1.0)
    }

    fn eval_raw(&self, t: f64) -> f64 {
        match *self {
            PiecewiseParams::A {
                t0,
                t1,
                lambda1,
                lambda2,
                beta,
            } => {
                if t < t0 {
                    1.0
                } else if t < t1 {
                    (-lambda1 * (t - t0)).exp()
                } else {
                    beta * (-lambda2 * (t - t1)).exp()
                }
            }
            PiecewiseParams::B {
                t1,
                t2,
                alpha,
                beta,
                gamma,
                delta,
            } => {
                if t < t1 {
                    1.0 - alpha * t
                } else if t < t2 {
                    1.0 - alpha * t1 - beta * (t - t1).powi(2)
                } else {
                    gamma * (-delta * (t - t2)).exp()
                }
            }
        }
    }

    pub fn check(&self) -> Result<(), String> {
        let all_finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match *self {
            PiecewiseParams::A {
                t0,
                t1,
                lambda1,
                lambda2,
                beta,
            } => {
                if !all_finite(&[t0, t1, lambda1, lambda2, beta]) {
                    Err("parameters must be finite".into())
                } else if t0 >= t1 {
                    Err(format!("variant a needs t0 < t1, got {t0} ≥ {t1}"))
                } else if lambda1 < 0.0 || lambda2 < 0.0 {
                    Err("decay rates must be ≥ 0".into())
                } else {
                    Ok(())
                }
            }
            PiecewiseParams::B {
                t1,
                t2,
                alpha,
                beta,
                gamma,
                delta,
            } => {
                if !all_finite(&[t1, t2, alpha, beta, gamma, delta]) {
                    Err("parameters must be finite".into())
                } else if t1 >= t2 {
                    Err(format!("variant b needs t1 < t2, got {t1} ≥ {t2}"))
                } else if alpha < 0.0 || beta < 0.0 || gamma < 0.0 || delta < 0.0 {
                    Err("coefficients must be ≥ 0".into())
                } else if gamma > 1.0 {
                    Err(format!("gamma must be ≤ 1, got {gamma}"))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Largest absolute jump between the left limit and the value at each
    /// segment boundary.
    pub fn max_jump(&self) -> Option<f64> {
        let (left, right): (Vec<f64>, Vec<f64>) = match *self {
            PiecewiseParams::A {
                t0,
                t1,
                lambda1,
                beta,
                ..
            } => (vec![1.0, (-lambda1 * (t1 - t0)).exp()], vec![1.0, beta]),
            PiecewiseParams::B {
                t1,
                t2,
                alpha,
                beta,
                gamma,
                ..
            } => {
                let at_t1 = 1.0 - alpha * t1;
                (vec![at_t1, at_t1 - beta * (t2 - t1).powi(2)], vec![at_t1, gamma])
            }
        };
        left.iter()
            .zip(&right)
            .map(|(a, b)| (a - b).abs())
            .reduce(f64::max)
            .filter(|j| j.is_finite())
    }
}
