use super::AnalysisError;
use crate::dynamics::{SimulationResult, ThresholdKind};
use crate::graph::{Channel, LayerKind, RegCapGraph};
use crate::scenario::DynamicsParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeterrenceWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for DeterrenceWeights {
    fn default() -> Self {
        Self {
            alpha: 1.0 / 3.0,
            beta: 1.0 / 3.0,
            gamma: 1.0 / 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelScore {
    pub channel: Channel,
    pub p_collapse: f64,
    pub v_strategic: f64,
    pub i_policy: f64,
    pub d: f64,
}

fn unit(name: &str, x: f64) -> Result<(), AnalysisError> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(AnalysisError::InvalidParameter(format!("{name} must lie in [0,1], got {x}")))
    }
}

/// `α·p + β·v + γ·i`.
pub fn deterrence_weight(p_collapse: f64, v_strategic: f64, i_policy: f64, w: DeterrenceWeights) -> Result<f64, AnalysisError> {
    unit("p_collapse", p_collapse)?;
    unit("v_strategic", v_strategic)?;
    unit("i_policy", i_policy)?;
    for (name, x) in [("alpha", w.alpha), ("beta", w.beta), ("gamma", w.gamma)] {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(AnalysisError::InvalidParameter(format!("{name} must be finite and non-negative, got {x}")));
        }
    }
    Ok(w.alpha * p_collapse + w.beta * v_strategic + w.gamma * i_policy)
}

/// Scores every resource → capability channel and sorts by `d` descending,
/// breaking ties by path.
///
/// `p_collapse` is 1 when the terminal capability crossed its collapse
/// threshold, otherwise its drawdown from `c0` as a fraction of the distance
/// to the threshold. `i_policy` is the weight of the channel's first
/// resource → equipment edge (0 when the channel skips the equipment layer).
pub fn rank_channels(
    graph: &RegCapGraph,
    dynamics: &DynamicsParams,
    sim: &SimulationResult,
    w: DeterrenceWeights,
) -> Result<Vec<ChannelScore>, AnalysisError> {
    let mut out = Vec::new();
    for channel in graph.enumerate_channels(None, None)? {
        let cap_id = channel.capability().to_string();
        let cap = graph.node(&cap_id).expect("channel ends at a graph node");
        let traj = sim
            .trajectory(&cap_id)
            .ok_or_else(|| AnalysisError::MissingTrajectory(cap_id.clone()))?;
        let theta = cap.theta_col.unwrap_or(0.4);
        let c0 = dynamics.c0_of(&cap_id);
        let min = traj.min();
        let crossed = sim
            .event_log
            .iter()
            .any(|e| e.kind == ThresholdKind::Collapse && e.node_id == cap_id)
            || min < theta;
        let p_collapse = if crossed {
            1.0
        } else if c0 > theta {
            ((c0 - min) / (c0 - theta)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let v_strategic = cap.v_strategic.unwrap_or(0.0).clamp(0.0, 1.0);
        let i_policy = channel
            .edges
            .first()
            .map(|&k| &graph.edges[k])
            .filter(|e| graph.layer_of(&e.dst) == Some(LayerKind::Equipment))
            .map_or(0.0, |e| e.weight.clamp(0.0, 1.0));
        let d = deterrence_weight(p_collapse, v_strategic, i_policy, w)?;
        out.push(ChannelScore {
            channel,
            p_collapse,
            v_strategic,
            i_policy,
            d,
        });
    }
    out.sort_by(|a, b| b.d.total_cmp(&a.d).then_with(|| a.channel.path.cmp(&b.channel.path)));
    Ok(out)
}
