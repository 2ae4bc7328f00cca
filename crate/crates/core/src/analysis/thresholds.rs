use super::{AnalysisError, Observation};
use crate::dynamics::{crossing_time, SimulationResult, Trajectory};
use crate::graph::{LayerKind, RegCapGraph};

pub const DEFAULT_STABILITY: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct LagWindowReport {
    pub capability_id: String,
    pub lag_window: Observation,
    pub collapse_time: Observation,
    /// Most negative rate of change (per year) and where it happens.
    pub max_decline_rate: f64,
    pub max_decline_time: f64,
    pub rupture_score: f64,
}

fn check_level(name: &str, level: f64) -> Result<(), AnalysisError> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(AnalysisError::InvalidParameter(format!("{name} must lie in (0,1), got {level}")))
    }
}

fn first_drop_below(traj: &Trajectory, level: f64) -> Result<Observation, AnalysisError> {
    let v = &traj.values;
    let Some(&first) = v.first() else {
        return Err(AnalysisError::EmptyTrajectory);
    };
    if first < level {
        return Ok(Observation::At(traj.t0));
    }
    for k in 1..v.len() {
        if v[k] < level {
            return Ok(Observation::At(crossing_time(traj.t(k - 1), v[k - 1], traj.t(k), v[k], level)));
        }
    }
    Ok(Observation::Censored { horizon: traj.end() })
}

/// Earliest time the trajectory falls below `theta_col`, interpolated between
/// grid points.
pub fn detect_collapse_point(traj: &Trajectory, theta_col: f64) -> Result<Observation, AnalysisError> {
    check_level("theta_col", theta_col)?;
    first_drop_below(traj, theta_col)
}

/// How long the trajectory stays at or above `stability` before its first dip.
pub fn detect_lag_window(traj: &Trajectory, stability: f64) -> Result<Observation, AnalysisError> {
    check_level("stability", stability)?;
    first_drop_below(traj, stability)
}

/// Grid point with the most negative central-difference derivative, as
/// `(time, rate)`. Rates within a relative 1e-12 count as ties and resolve to
/// the earlier time.
pub fn breakdown_slope(traj: &Trajectory) -> Result<(f64, f64), AnalysisError> {
    let v = &traj.values;
    if v.len() < 3 {
        return Err(AnalysisError::TrajectoryTooShort(v.len()));
    }
    let h2 = 2.0 * traj.step;
    let mut best = (traj.t(1), (v[2] - v[0]) / h2);
    for k in 2..v.len() - 1 {
        let d = (v[k + 1] - v[k - 1]) / h2;
        if d < best.1 - 1e-12 * best.1.abs().max(1.0) {
            best = (traj.t(k), d);
        }
    }
    Ok(best)
}

/// Rupture strength in `[0, 1]`: `w · |rate|/(|rate| + 1) · 1/(1 + lag)` where `w`
/// is the capability weight normalized to `[0, 1]`.
pub fn rupture_score(lag_window: f64, rate: f64, weight: f64) -> f64 {
    if rate == 0.0 || lag_window.is_infinite() {
        return 0.0;
    }
    let r = rate.abs();
    (weight * r / (r + 1.0) / (1.0 + lag_window.max(0.0))).clamp(0.0, 1.0)
}

/// Lag window, collapse time, breakdown slope and rupture score for every
/// capability in `graph`, sorted by id.
///
/// `theta_col` overrides each node's own collapse threshold when given.
pub fn lag_window_reports(
    graph: &RegCapGraph,
    sim: &SimulationResult,
    stability: f64,
    theta_col: Option<f64>,
) -> Result<Vec<LagWindowReport>, AnalysisError> {
    let caps = graph.ids_in(LayerKind::Capability);
    let max_w = caps
        .iter()
        .filter_map(|id| graph.node(id).and_then(|n| n.w_cl))
        .fold(0.0_f64, f64::max);
    caps.iter()
        .map(|id| {
            let node = graph.node(id).expect("id comes from the graph");
            let traj = sim
                .trajectory(id)
                .ok_or_else(|| AnalysisError::MissingTrajectory(id.clone()))?;
            let col = theta_col.or(node.theta_col).unwrap_or(0.4);
            let lag_window = detect_lag_window(traj, stability)?;
            let collapse_time = detect_collapse_point(traj, col)?;
            let (t_star, rate) = breakdown_slope(traj)?;
            let weight = if max_w > 0.0 {
                node.w_cl.unwrap_or(0.0) / max_w
            } else {
                0.0
            };
            Ok(LagWindowReport {
                capability_id: id.clone(),
                lag_window,
                collapse_time,
                max_decline_rate: rate,
                max_decline_time: t_star,
                rupture_score: rupture_score(lag_window.lower_bound(), rate, weight),
            })
        })
        .collect()
}
