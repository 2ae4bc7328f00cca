use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::AnalysisError;
use crate::dynamics::{simulate, SimulationResult};
use crate::scenario::Scenario;

/// An evenly spaced axis written `start:end:count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn values(&self) -> Vec<f64> {
        linspace(self.start, self.end, self.count)
    }
}

impl fmt::Display for AxisSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.end, self.count)
    }
}

impl FromStr for AxisSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(format!("expected start:end:count, got `{s}`"));
        };
        let start: f64 = a.trim().parse().map_err(|_| format!("bad axis start `{a}`"))?;
        let end: f64 = b.trim().parse().map_err(|_| format!("bad axis end `{b}`"))?;
        let count: usize = n.trim().parse().map_err(|_| format!("bad axis count `{n}`"))?;
        if !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&end) {
            return Err(format!("axis bounds must lie in [0,1], got {start}..{end}"));
        }
        if start > end {
            return Err(format!("axis start {start} exceeds end {end}"));
        }
        if !(2..=10_001).contains(&count) {
            return Err(format!("axis count must be between 2 and 10001, got {count}"));
        }
        Ok(Self { start, end, count })
    }
}

/// `n` evenly spaced points from `a` to `b` inclusive. The end point is exact.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n)
            .map(|k| if k == n - 1 { b } else { a + (b - a) * k as f64 / (n - 1) as f64 })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellError {
    pub intensity: usize,
    pub activation: usize,
    pub message: String,
}

/// Suppression scores indexed `[intensity][activation]`. Cells whose scenario
/// failed are `None` and described in `errors`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpactSurface {
    pub intensity: Vec<f64>,
    pub activation: Vec<f64>,
    pub suppression: Vec<Vec<Option<f64>>>,
    pub errors: Vec<CellError>,
}

/// `1 − (1/T)∫ mean_i C_i(t) dt` over the capability trajectories, by the
/// trapezoid rule, clamped to `[0, 1]`.
pub fn suppression_score(sim: &SimulationResult, capability_ids: &[String]) -> Result<f64, AnalysisError> {
    let trajs = capability_ids
        .iter()
        .map(|id| sim.trajectory(id).ok_or_else(|| AnalysisError::MissingTrajectory(id.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let Some(first) = trajs.first() else {
        return Err(AnalysisError::InvalidParameter("no capabilities to score".into()));
    };
    let n = first.len();
    if n < 2 {
        return Err(AnalysisError::TrajectoryTooShort(n));
    }
    let m = trajs.len() as f64;
    // Integrating the deficit 1 − mean C keeps an undisturbed run at exactly 0.
    let deficit: Vec<f64> = (0..n)
        .map(|k| trajs.iter().map(|t| 1.0 - t.values[k]).sum::<f64>() / m)
        .collect();
    let area: f64 = deficit.windows(2).map(|w| 0.5 * (w[0] + w[1])).sum();
    Ok((area / (n - 1) as f64).clamp(0.0, 1.0))
}

fn cell(base: &Scenario, caps: &[String], x: f64, y: f64) -> Result<f64, String> {
    let mut s = base.clone();
    for e in &mut s.events {
        e.severity = (e.severity * x).clamp(0.0, 1.0);
    }
    s.signals = s.signals.iter().map(|p| p.with_suppression_scaled(y)).collect();
    let sim = simulate(&s).map_err(|e| e.to_string())?;
    suppression_score(&sim, caps).map_err(|e| e.to_string())
}

/// Sweeps event intensity `x` against suppression activation `y`. Each cell
/// scales every event severity by `x` and every suppressive signal by `y`,
/// then simulates. `threads` above 1 evaluates cells on a worker pool; the
/// result does not depend on it.
pub fn impact_surface(
    base: &Scenario,
    intensity: &[f64],
    activation: &[f64],
    threads: usize,
) -> Result<ImpactSurface, AnalysisError> {
    for (name, axis) in [("intensity", intensity), ("activation", activation)] {
        if axis.len() < 2 {
            return Err(AnalysisError::InvalidParameter(format!("{name} axis needs at least 2 points")));
        }
        if let Some(v) = axis.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(AnalysisError::InvalidParameter(format!("{name} value {v} outside [0,1]")));
        }
    }
    let caps = base.capability_ids();
    let cols = activation.len();
    let total = intensity.len() * cols;
    let run = |k: usize| cell(base, &caps, intensity[k / cols], activation[k % cols]);
    let cells: Vec<Result<f64, String>> = if threads <= 1 {
        (0..total).map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| AnalysisError::InvalidParameter(e.to_string()))?;
        pool.install(|| (0..total).into_par_iter().map(run).collect())
    };

    let mut suppression = vec![vec![None; cols]; intensity.len()];
    let mut errors = Vec::new();
    for (k, c) in cells.into_iter().enumerate() {
        let (i, j) = (k / cols, k % cols);
        match c {
            Ok(v) => suppression[i][j] = Some(v),
            Err(message) => errors.push(CellError {
                intensity: i,
                activation: j,
                message,
            }),
        }
    }
    Ok(ImpactSurface {
        intensity: intensity.to_vec(),
        activation: activation.to_vec(),
        suppression,
        errors,
    })
}
