//! Capability evolution models.
//!
//! * [`simulate_ode`]: `dC_i/dt = −γ_i C_i + Σ_j θ_ij P_j(t − τ_j) + F_i(t)` where
//!   `F_i` is the cascade forcing, integrated with fixed-step classical RK4 and
//!   clamped to `[0, 1]` after every step.
//! * [`convolve_transfer`]: `C_i(t) = Σ_j ∫₀ᵗ P_j(s) K_ij e^{−λ_ij (t−s)} ds` by
//!   trapezoidal quadrature on the run grid. The result is an accumulated
//!   pressure, not a level, and is reported unclamped.
//! * [`simulate_piecewise`]: closed-form piecewise declines sampled on the grid.

mod cascade;
mod piecewise;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

pub use cascade::{cascade_forcing, Cascade};
pub use piecewise::PiecewiseParams;

use crate::grid::TimeGrid;
use crate::scenario::{Model, Scenario};
use crate::validation::ValidationReport;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("scenario model is {found:?}, expected {expected:?}")]
    ModelMismatch { expected: Model, found: Model },
    #[error("scenario failed validation:\n{0}")]
    InvalidScenario(ValidationReport),
}

/// A per-node series on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub node_id: String,
    pub t0: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl Trajectory {
    pub fn new(node_id: &str, grid: &TimeGrid, values: Vec<f64>) -> Self {
        Self {
            node_id: node_id.to_string(),
            t0: grid.t0,
            step: grid.step,
            values,
        }
    }

    /// Samples `f` on the grid.
    pub fn sample(node_id: &str, grid: &TimeGrid, f: impl Fn(f64) -> f64) -> Self {
        Self::new(node_id, grid, grid.times().map(f).collect())
    }

    pub fn grid(&self) -> TimeGrid {
        TimeGrid {
            t0: self.t0,
            step: self.step,
            len: self.values.len(),
        }
    }

    pub fn t(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.step
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn end(&self) -> f64 {
        self.t(self.values.len().saturating_sub(1))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdKind {
    /// Fell below θ_col.
    Collapse,
    /// Fell below θ_rev.
    ReversibilityLost,
    /// Rose back to θ_rev.
    ReversibilityRegained,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdEvent {
    pub t: f64,
    pub kind: ThresholdKind,
    pub node_id: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    /// Capabilities, resource availability and equipment supply, keyed by node id.
    pub trajectories: BTreeMap<String, Trajectory>,
    pub event_log: Vec<ThresholdEvent>,
}

impl SimulationResult {
    pub fn trajectory(&self, id: &str) -> Option<&Trajectory> {
        self.trajectories.get(id)
    }

    pub fn grid(&self) -> Option<TimeGrid> {
        self.trajectories.values().next().map(Trajectory::grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// Clamp ODE levels to `[0, 1]` after each step.
    pub clamp: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { clamp: true }
    }
}

/// Runs whichever model the scenario selects.
pub fn simulate(scenario: &Scenario) -> Result<SimulationResult, DynamicsError> {
    match scenario.model {
        Model::LaggedOde => simulate_ode(scenario),
        Model::ConvolutionTransfer => convolve_transfer(scenario),
        Model::PiecewiseOnly => simulate_piecewise(scenario),
    }
}

fn prepare(scenario: &Scenario, expected: Model) -> Result<(), DynamicsError> {
    if scenario.model != expected {
        return Err(DynamicsError::ModelMismatch {
            expected,
            found: scenario.model,
        });
    }
    let report = scenario.validate();
    if !report.is_ok() {
        return Err(DynamicsError::InvalidScenario(report));
    }
    Ok(())
}

pub fn simulate_ode(scenario: &Scenario) -> Result<SimulationResult, DynamicsError> {
    simulate_ode_with(scenario, SimOptions::default())
}

struct SignalTerm {
    signal: usize,
    theta: f64,
    lag: f64,
}

pub fn simulate_ode_with(scenario: &Scenario, options: SimOptions) -> Result<SimulationResult, DynamicsError> {
    prepare(scenario, Model::LaggedOde)?;
    let grid = scenario.grid();
    let cascade = Cascade::new(scenario);
    let caps: Vec<String> = cascade.capability_ids().map(str::to_string).collect();
    let d = &scenario.dynamics;
    let gamma: Vec<f64> = caps.iter().map(|c| d.gamma_of(c)).collect();
    let terms: Vec<Vec<SignalTerm>> = caps
        .iter()
        .map(|c| {
            d.theta
                .get(c)
                .into_iter()
                .flatten()
                .filter_map(|(name, &theta)| {
                    let signal = scenario.signals.iter().position(|s| &s.name == name)?;
                    Some(SignalTerm {
                        signal,
                        theta,
                        lag: d.tau_of(name),
                    })
                })
                .collect()
        })
        .collect();

    let rhs = |t: f64, c: &[f64], out: &mut [f64]| {
        for i in 0..c.len() {
            let policy: f64 = terms[i]
                .iter()
                .map(|term| term.theta * scenario.signals[term.signal].eval(t - term.lag))
                .sum();
            out[i] = -gamma[i] * c[i] + policy + cascade.forcing(i, t);
        }
    };

    let n = caps.len();
    let mut state: Vec<f64> = caps.iter().map(|c| d.c0_of(c)).collect();
    let mut series: Vec<Vec<f64>> = state.iter().map(|&c| {
        let mut v = Vec::with_capacity(grid.len);
        v.push(c);
        v
    }).collect();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let h = grid.step;
    for step in 0..grid.len.saturating_sub(1) {
        let t = grid.t(step);
        rhs(t, &state, &mut k1);
        for i in 0..n {
            tmp[i] = state[i] + 0.5 * h * k1[i];
        }
        rhs(t + 0.5 * h, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = state[i] + 0.5 * h * k2[i];
        }
        rhs(t + 0.5 * h, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = state[i] + h * k3[i];
        }
        rhs(t + h, &tmp, &mut k4);
        for i in 0..n {
            let next = state[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            state[i] = if options.clamp { next.clamp(0.0, 1.0) } else { next };
            series[i].push(state[i]);
        }
    }

    let mut result = supply_trajectories(&cascade, &grid);
    for (id, values) in caps.iter().zip(series) {
        result.trajectories.insert(id.clone(), Trajectory::new(id, &grid, values));
    }
    result.event_log = threshold_events(scenario, &result.trajectories);
    Ok(result)
}

pub fn convolve_transfer(scenario: &Scenario) -> Result<SimulationResult, DynamicsError> {
    prepare(scenario, Model::ConvolutionTransfer)?;
    let grid = scenario.grid();
    let cascade = Cascade::new(scenario);
    let h = grid.step;
    let mut result = supply_trajectories(&cascade, &grid);
    for cap in cascade.capability_ids() {
        let mut total = vec![0.0; grid.len];
        for (name, p) in scenario.dynamics.transfer.get(cap).into_iter().flatten() {
            let Some(signal) = scenario.signal(name) else { continue };
            let decay = (-p.lambda * h).exp();
            let mut acc = 0.0;
            let mut prev = signal.eval(grid.t(0));
            for (k, slot) in total.iter_mut().enumerate().skip(1) {
                // Trapezoid over [0, t_k] expressed as a recursion on t_{k-1}.
                let cur = signal.eval(grid.t(k));
                acc = decay * acc + 0.5 * h * p.k * (decay * prev + cur);
                *slot += acc;
                prev = cur;
            }
        }
        result.trajectories.insert(cap.to_string(), Trajectory::new(cap, &grid, total));
    }
    Ok(result)
}

pub fn simulate_piecewise(scenario: &Scenario) -> Result<SimulationResult, DynamicsError> {
    prepare(scenario, Model::PiecewiseOnly)?;
    let grid = scenario.grid();
    let cascade = Cascade::new(scenario);
    let mut result = supply_trajectories(&cascade, &grid);
    for cap in cascade.capability_ids() {
        let traj = match scenario.piecewise.get(cap) {
            Some(p) => Trajectory::sample(cap, &grid, |t| p.eval(t)),
            None => {
                let c0 = scenario.dynamics.c0_of(cap);
                Trajectory::sample(cap, &grid, |_| c0)
            }
        };
        result.trajectories.insert(cap.to_string(), traj);
    }
    result.event_log = threshold_events(scenario, &result.trajectories);
    Ok(result)
}

fn supply_trajectories(cascade: &Cascade, grid: &TimeGrid) -> SimulationResult {
    let mut trajectories = BTreeMap::new();
    for (i, id) in cascade.resource_ids().enumerate() {
        trajectories.insert(id.to_string(), Trajectory::sample(id, grid, |t| cascade.resource_level(i, t)));
    }
    for (i, id) in cascade.equipment_ids().enumerate() {
        trajectories.insert(id.to_string(), Trajectory::sample(id, grid, |t| cascade.equipment_supply(i, t)));
    }
    SimulationResult {
        trajectories,
        event_log: Vec::new(),
    }
}

/// Linear-interpolated time where the segment `(t_a, a) → (t_b, b)` meets `level`.
pub(crate) fn crossing_time(ta: f64, a: f64, tb: f64, b: f64, level: f64) -> f64 {
    if a == b {
        return ta;
    }
    ta + (a - level) / (a - b) * (tb - ta)
}

fn threshold_events(scenario: &Scenario, trajectories: &BTreeMap<String, Trajectory>) -> Vec<ThresholdEvent> {
    let mut log = Vec::new();
    for id in scenario.capability_ids() {
        let (Some(node), Some(traj)) = (scenario.graph.node(&id), trajectories.get(&id)) else {
            continue;
        };
        for w in 1..traj.len() {
            let (a, b) = (traj.values[w - 1], traj.values[w]);
            let (ta, tb) = (traj.t(w - 1), traj.t(w));
            if let Some(col) = node.theta_col {
                if a >= col && b < col {
                    log.push(ThresholdEvent {
                        t: crossing_time(ta, a, tb, b, col),
                        kind: ThresholdKind::Collapse,
                        node_id: id.clone(),
                    });
                }
            }
            if let Some(rev) = node.theta_rev {
                let kind = if a >= rev && b < rev {
                    Some(ThresholdKind::ReversibilityLost)
                } else if a < rev && b >= rev {
                    Some(ThresholdKind::ReversibilityRegained)
                } else {
                    None
                };
                if let Some(kind) = kind {
                    log.push(ThresholdEvent {
                        t: crossing_time(ta, a, tb, b, rev),
                        kind,
                        node_id: id.clone(),
                    });
                }
            }
        }
    }
    log.sort_by(|x, y| x.t.total_cmp(&y.t).then_with(|| x.node_id.cmp(&y.node_id)).then(x.kind.cmp(&y.kind)));
    log
}
