//! Policy and suppression signals `P_j(t)`.
//!
//! Every signal is a closed-form function of time, so lagged terms can be read at
//! any shifted time without a history buffer. Negative values suppress capability,
//! positive values restore it (given a positive sensitivity).

use std::f64::consts::TAU;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::grid::TimeGrid;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalError {
    #[error("vulnerability scan needs at least 3 grid points, got {0}")]
    GridTooSmall(usize),
}

/// Default share of the peak |dP/dt| below which a local maximum is not
/// reported as a vulnerability window.
pub const DEFAULT_WINDOW_FLOOR: f64 = 0.05;

mod ssif_defaults {
    pub fn t1() -> f64 {
        6.0
    }
    pub fn t2() -> f64 {
        14.0
    }
    pub fn base_amp() -> f64 {
        0.05
    }
    pub fn pulse_amp() -> f64 {
        1.0
    }
    pub fn decay_rate() -> f64 {
        0.5
    }
    pub fn freq_low() -> f64 {
        0.25
    }
    pub fn freq_high() -> f64 {
        2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalShape {
    Constant {
        value: f64,
    },
    /// 0 before `t0`, `value` from `t0` on.
    Step {
        t0: f64,
        value: f64,
    },
    /// Logistic switch-on `1 / (1 + e^{−k(t − t0)})`.
    Sigmoid {
        k: f64,
        t0: f64,
    },
    /// Three-stage suppression injection: a low-frequency ripple on `[0, t1)`, a
    /// train of negative pulses on `[t1, t2)`, then a decaying residual oscillation.
    Ssif {
        #[serde(default = "ssif_defaults::t1")]
        t1: f64,
        #[serde(default = "ssif_defaults::t2")]
        t2: f64,
        #[serde(default = "ssif_defaults::base_amp")]
        base_amp: f64,
        #[serde(default = "ssif_defaults::pulse_amp")]
        pulse_amp: f64,
        #[serde(default = "ssif_defaults::decay_rate")]
        decay_rate: f64,
        #[serde(default = "ssif_defaults::freq_low")]
        freq_low: f64,
        #[serde(default = "ssif_defaults::freq_high")]
        freq_high: f64,
    },
    /// Linear interpolation between `(t, value)` knots, held constant outside them.
    PiecewiseLinear {
        knots: Vec<(f64, f64)>,
    },
}

impl SignalShape {
    pub fn ssif_default() -> Self {
        SignalShape::Ssif {
            t1: ssif_defaults::t1(),
            t2: ssif_defaults::t2(),
            base_amp: ssif_defaults::base_amp(),
            pulse_amp: ssif_defaults::pulse_amp(),
            decay_rate: ssif_defaults::decay_rate(),
            freq_low: ssif_defaults::freq_low(),
            freq_high: ssif_defaults::freq_high(),
        }
    }
}

/// A named signal. Serialized as one flat object: `{"name": .., "variant": .., ..}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySignal {
    pub name: String,
    pub shape: SignalShape,
}

impl Serialize for PolicySignal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::Error as _;
        let mut value = serde_json::to_value(&self.shape).map_err(S::Error::custom)?;
        if let Some(map) = value.as_object_mut() {
            map.insert("name".into(), serde_json::Value::String(self.name.clone()));
        }
        value.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PolicySignal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let mut map = serde_json::Map::deserialize(deserializer)?;
        let name = match map.remove("name") {
            Some(serde_json::Value::String(s)) => s,
            Some(_) => return Err(D::Error::custom("signal `name` must be a string")),
            None => return Err(D::Error::missing_field("name")),
        };
        let shape = SignalShape::deserialize(serde_json::Value::Object(map)).map_err(D::Error::custom)?;
        Ok(Self { name, shape })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VulnerabilityWindow {
    pub t: f64,
    pub derivative: f64,
}

impl PolicySignal {
    pub fn new(name: &str, shape: SignalShape) -> Self {
        Self {
            name: name.to_string(),
            shape,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        eval_shape(&self.shape, t)
    }

    /// Rate of change at `t`: analytic for constant and sigmoid signals, a
    /// central difference with half-width `h` otherwise.
    pub fn derivative(&self, t: f64, h: f64) -> f64 {
        match self.shape {
            SignalShape::Constant { .. } => 0.0,
            SignalShape::Sigmoid { k, .. } => {
                let p = self.eval(t);
                k * p * (1.0 - p)
            }
            _ => central_difference(|x| self.eval(x), t, h),
        }
    }

    /// Interior grid points whose |derivative| is a strict local maximum, sorted
    /// by magnitude (descending, earlier time first on ties).
    ///
    /// Maxima smaller than `floor` times the largest |derivative| on the grid are
    /// dropped; `floor = 0` keeps every local maximum.
    pub fn vulnerability_windows(&self, grid: &TimeGrid, floor: f64) -> Result<Vec<VulnerabilityWindow>, SignalError> {
        if grid.len < 3 {
            return Err(SignalError::GridTooSmall(grid.len));
        }
        let d: Vec<f64> = grid.times().map(|t| self.derivative(t, grid.step)).collect();
        let peak = d.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let cutoff = floor * peak;
        let mut out: Vec<VulnerabilityWindow> = (1..d.len() - 1)
            .filter(|&k| {
                let m = d[k].abs();
                m > d[k - 1].abs() && m > d[k + 1].abs() && m >= cutoff
            })
            .map(|k| VulnerabilityWindow {
                t: grid.t(k),
                derivative: d[k],
            })
            .collect();
        out.sort_by(|a, b| b.derivative.abs().total_cmp(&a.derivative.abs()).then(a.t.total_cmp(&b.t)));
        Ok(out)
    }

    /// Checks the shape invariants; returns a description of the first violation.
    pub fn check(&self) -> Result<(), String> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match &self.shape {
            SignalShape::Constant { value } if !value.is_finite() => Err("value must be finite".into()),
            SignalShape::Step { t0, value } if !finite(&[*t0, *value]) => Err("t0 and value must be finite".into()),
            SignalShape::Sigmoid { k, t0 } => {
                if !(k.is_finite() && *k > 0.0) {
                    Err(format!("sigmoid k must be > 0, got {k}"))
                } else if !t0.is_finite() {
                    Err("sigmoid t0 must be finite".into())
                } else {
                    Ok(())
                }
            }
            SignalShape::Ssif {
                t1,
                t2,
                base_amp,
                pulse_amp,
                decay_rate,
                freq_low,
                freq_high,
            } => {
                if !finite(&[*t1, *t2, *base_amp, *pulse_amp, *decay_rate, *freq_low, *freq_high]) {
                    Err("ssif parameters must be finite".into())
                } else if t1 >= t2 {
                    Err(format!("ssif needs t1 < t2, got {t1} ≥ {t2}"))
                } else if *decay_rate < 0.0 || *freq_low < 0.0 || *freq_high < 0.0 {
                    Err("ssif rates and frequencies must be ≥ 0".into())
                } else {
                    Ok(())
                }
            }
            SignalShape::PiecewiseLinear { knots } => {
                if knots.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
                    Err("knots must be finite".into())
                } else if knots.windows(2).any(|w| w[0].0 >= w[1].0) {
                    Err("knot times must be strictly increasing".into())
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// True when the signal can go negative, i.e. acts as suppression.
    pub fn is_suppressive(&self) -> bool {
        match &self.shape {
            SignalShape::Constant { value } | SignalShape::Step { value, .. } => *value < 0.0,
            SignalShape::Sigmoid { .. } => false,
            SignalShape::Ssif { .. } => true,
            SignalShape::PiecewiseLinear { knots } => knots.iter().any(|(_, v)| *v < 0.0),
        }
    }

    /// Copy with suppression amplitudes multiplied by `factor`; restorative
    /// signals are returned unchanged.
    pub fn with_suppression_scaled(&self, factor: f64) -> Self {
        if !self.is_suppressive() {
            return self.clone();
        }
        let shape = match self.shape.clone() {
            SignalShape::Constant { value } => SignalShape::Constant { value: value * factor },
            SignalShape::Step { t0, value } => SignalShape::Step { t0, value: value * factor },
            SignalShape::Ssif {
                t1,
                t2,
                base_amp,
                pulse_amp,
                decay_rate,
                freq_low,
                freq_high,
            } => SignalShape::Ssif {
                t1,
                t2,
                base_amp: base_amp * factor,
                pulse_amp: pulse_amp * factor,
                decay_rate,
                freq_low,
                freq_high,
            },
            SignalShape::PiecewiseLinear { knots } => SignalShape::PiecewiseLinear {
                knots: knots.into_iter().map(|(t, v)| (t, v * factor)).collect(),
            },
            s @ SignalShape::Sigmoid { .. } => s,
        };
        Self {
            name: self.name.clone(),
            shape,
        }
    }
}

fn central_difference(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
    (f(t + h) - f(t - h)) / (2.0 * h)
}

fn eval_shape(shape: &SignalShape, t: f64) -> f64 {
    match shape {
        SignalShape::Constant { value } => *value,
        SignalShape::Step { t0, value } => {
            if t < *t0 {
                0.0
            } else {
                *value
            }
        }
        SignalShape::Sigmoid { k, t0 } => 1.0 / (1.0 + (-k * (t - t0)).exp()),
        SignalShape::Ssif {
            t1,
            t2,
            base_amp,
            pulse_amp,
            decay_rate,
            freq_low,
            freq_high,
        } => {
            if t < *t1 {
                base_amp * (TAU * freq_low * t).sin()
            } else if t < *t2 {
                -pulse_amp * (TAU * freq_high * t).sin().abs()
            } else {
                -pulse_amp * (-decay_rate * (t - t2)).exp() * (TAU * freq_high * t).sin()
            }
        }
        SignalShape::PiecewiseLinear { knots } => {
            let (Some(first), Some(last)) = (knots.first(), knots.last()) else {
                return 0.0;
            };
            if t <= first.0 {
                return first.1;
            }
            if t >= last.0 {
                return last.1;
            }
            let i = knots.partition_point(|(kt, _)| *kt <= t);
            let (ta, va) = knots[i - 1];
            let (tb, vb) = knots[i];
            va + (vb - va) * (t - ta) / (tb - ta)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(shape: SignalShape) -> PolicySignal {
        PolicySignal::new("P", shape)
    }

    #[test]
    fn sigmoid_values() {
        let s = sig(SignalShape::Sigmoid { k: 1.0, t0: 10.0 });
        assert_eq!(s.eval(10.0), 0.5);
        assert!((s.eval(10.0 + 9f64.ln()) - 0.9).abs() < 1e-12);
        let s0 = sig(SignalShape::Sigmoid { k: 1.0, t0: 0.0 });
        assert_eq!(s0.derivative(0.0, 1e-3), 0.25);
    }

    #[test]
    fn ssif_stage_one_is_bounded() {
        let s = sig(SignalShape::ssif_default());
        let v = s.eval(3.0);
        assert!((-0.05..=0.05).contains(&v));
        // Stage II is never positive; stage III decays.
        for k in 0..800 {
            let t = 6.0 + k as f64 * 0.01;
            assert!(s.eval(t) <= 0.0);
        }
        assert!(s.eval(30.0).abs() <= (-8.0f64).exp());
    }

    #[test]
    fn derivative_cases() {
        let c = sig(SignalShape::Constant { value: 3.0 });
        assert_eq!(c.derivative(1.7, 0.1), 0.0);
        let step = sig(SignalShape::Step { t0: 2.0, value: 0.8 });
        assert!((step.derivative(2.0, 0.05) - 0.8 / 0.1).abs() < 1e-12);
    }

    #[test]
    fn piecewise_linear_interpolates_and_holds() {
        let p = sig(SignalShape::PiecewiseLinear {
            knots: vec![(1.0, 0.0), (3.0, -1.0)],
        });
        assert_eq!(p.eval(0.0), 0.0);
        assert_eq!(p.eval(2.0), -0.5);
        assert_eq!(p.eval(5.0), -1.0);
        assert!(p.is_suppressive());
        let empty = sig(SignalShape::PiecewiseLinear { knots: vec![] });
        assert_eq!(empty.eval(1.0), 0.0);
    }

    #[test]
    fn sigmoid_window_sits_at_midpoint() {
        let s = sig(SignalShape::Sigmoid { k: 1.0, t0: 10.0 });
        let grid = TimeGrid::covering(0.0, 20.0, 0.01);
        let w = s.vulnerability_windows(&grid, 0.0).unwrap();
        assert_eq!(w.len(), 1);
        assert!((w[0].t - 10.0).abs() < 1e-9);
        assert!((w[0].derivative - 0.25).abs() < 1e-12);
    }

    #[test]
    fn constant_has_no_windows_and_small_grid_errors() {
        let c = sig(SignalShape::Constant { value: -0.4 });
        let grid = TimeGrid::covering(0.0, 5.0, 0.1);
        assert!(c.vulnerability_windows(&grid, 0.0).unwrap().is_empty());
        let tiny = TimeGrid::covering(0.0, 0.1, 0.1);
        assert_eq!(c.vulnerability_windows(&tiny, 0.0), Err(SignalError::GridTooSmall(2)));
    }

    #[test]
    fn ssif_windows_fall_inside_pulse_and_residual_stages() {
        let s = sig(SignalShape::ssif_default());
        let grid = TimeGrid::covering(0.0, 30.0, 0.01);
        let windows = s.vulnerability_windows(&grid, DEFAULT_WINDOW_FLOOR).unwrap();
        assert!(!windows.is_empty());
        let (t1, t2, rate) = (6.0, 14.0, 0.5);
        for w in &windows {
            assert!(w.t >= t1 && w.t <= t2 + 3.0 / rate, "window at {}", w.t);
        }
        // Oracle: the same scan done by hand with an independent finite-difference.
        let f = |t: f64| s.eval(t);
        let d: Vec<f64> = grid.times().map(|t| (f(t + 0.01) - f(t - 0.01)) / 0.02).collect();
        let peak = d.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let mut expected = 0;
        for k in 1..d.len() - 1 {
            if d[k].abs() > d[k - 1].abs() && d[k].abs() > d[k + 1].abs() && d[k].abs() >= 0.05 * peak {
                expected += 1;
            }
        }
        assert_eq!(windows.len(), expected);
    }

    #[test]
    fn invariant_checks() {
        assert!(sig(SignalShape::Sigmoid { k: 0.0, t0: 1.0 }).check().is_err());
        let mut bad = SignalShape::ssif_default();
        if let SignalShape::Ssif { t1, .. } = &mut bad {
            *t1 = 20.0;
        }
        assert!(sig(bad).check().is_err());
        assert!(sig(SignalShape::PiecewiseLinear {
            knots: vec![(1.0, 0.0), (1.0, 1.0)]
        })
        .check()
        .is_err());
        assert!(sig(SignalShape::ssif_default()).check().is_ok());
    }

    #[test]
    fn json_shape_is_flat() {
        let s: PolicySignal = serde_json::from_str(r#"{"name":"P1","variant":"sigmoid","k":2.0,"t0":4.0}"#).unwrap();
        assert_eq!(s, PolicySignal::new("P1", SignalShape::Sigmoid { k: 2.0, t0: 4.0 }));
        let back = serde_json::to_value(&s).unwrap();
        assert_eq!(back["name"], "P1");
        assert_eq!(back["variant"], "sigmoid");
        assert!(serde_json::from_str::<PolicySignal>(r#"{"name":"P1","variant":"sigmoid","k":2.0,"t0":4.0,"kk":1}"#).is_err());
        let d: PolicySignal = serde_json::from_str(r#"{"name":"S","variant":"ssif"}"#).unwrap();
        assert_eq!(d.shape, SignalShape::ssif_default());
    }

    #[test]
    fn suppression_scaling_leaves_restorative_signals() {
        let s = sig(SignalShape::Sigmoid { k: 1.0, t0: 0.0 });
        assert_eq!(s.with_suppression_scaled(0.0), s);
        let c = sig(SignalShape::Constant { value: -0.5 });
        assert_eq!(c.with_suppression_scaled(0.5).eval(0.0), -0.25);
        let x = sig(SignalShape::ssif_default()).with_suppression_scaled(0.0);
        assert_eq!(x.eval(8.3), 0.0);
    }
}
