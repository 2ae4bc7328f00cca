//! Diagnostics computed from simulation output and graph structure.

mod channels;
mod covariance;
mod overlap;
mod scz;
mod surface;
mod thresholds;

use thiserror::Error;

pub use channels::{deterrence_weight, rank_channels, ChannelScore, DeterrenceWeights};
pub use covariance::{response_covariance, CouplingBand, CovarianceReport, DEFAULT_BAND_THRESHOLD};
pub use overlap::{capability_routes, equipment_routes, path_overlap_matrix, OverlapMatrix, PathSet};
pub use scz::{identify_scz, SczCluster, SczThresholds};
pub use surface::{impact_surface, linspace, suppression_score, AxisSpec, CellError, ImpactSurface};
pub use thresholds::{
    breakdown_slope, detect_collapse_point, detect_lag_window, lag_window_reports, rupture_score, LagWindowReport,
    DEFAULT_STABILITY,
};

use crate::dynamics::DynamicsError;
use crate::graph::GraphError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("trajectory has {0} points, need at least 3")]
    TrajectoryTooShort(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("path set for `{0}` is empty")]
    EmptyPathSet(String),
    #[error("trajectory `{0}` is not on the shared grid")]
    GridMismatch(String),
    #[error("inconsistent id sets: {0}")]
    InconsistentIds(String),
    #[error("no trajectory for `{0}`")]
    MissingTrajectory(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// A time that either occurred within the run or was not reached by its end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observation {
    At(f64),
    /// Not observed up to `horizon`.
    Censored { horizon: f64 },
}

impl Observation {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Observation::At(t) => Some(t),
            Observation::Censored { .. } => None,
        }
    }

    pub fn is_censored(&self) -> bool {
        matches!(self, Observation::Censored { .. })
    }

    /// The observed time, or the horizon for censored values.
    pub fn lower_bound(&self) -> f64 {
        match *self {
            Observation::At(t) | Observation::Censored { horizon: t } => t,
        }
    }
}
