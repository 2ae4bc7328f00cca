//! Run configuration: horizon and grid, supply disruptions, policy signals and the
//! per-capability dynamics parameters, all bound to one dependency graph.
//!
//! Times are in years. Any duration field also accepts `{"months": m}` or
//! `{"years": y}` and is normalized to years when loaded.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::dynamics::PiecewiseParams;
use crate::graph::{GraphError, LayerKind, RegCapGraph};
use crate::grid::TimeGrid;
use crate::signals::PolicySignal;
use crate::validation::{IssueKind, ValidationReport};

pub(crate) mod duration {
    use serde::{Deserialize, Deserializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Years(f64),
        Tagged(Tagged),
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields, rename_all = "snake_case")]
    enum Tagged {
        Years(f64),
        Months(f64),
    }

    fn to_years(r: Repr) -> f64 {
        match r {
            Repr::Years(y) | Repr::Tagged(Tagged::Years(y)) => y,
            Repr::Tagged(Tagged::Months(m)) => m / 12.0,
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Repr::deserialize(d).map(to_years)
    }

    pub mod map {
        use std::collections::BTreeMap;

        use serde::{Deserialize, Deserializer};

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
            let raw = BTreeMap::<String, super::Repr>::deserialize(d)?;
            Ok(raw.into_iter().map(|(k, v)| (k, super::to_years(v))).collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisruptionEvent {
    pub resource_id: String,
    #[serde(deserialize_with = "duration::deserialize")]
    pub onset: f64,
    pub severity: f64,
    #[serde(default, deserialize_with = "duration::deserialize")]
    pub ramp: f64,
}

impl DisruptionEvent {
    pub fn new(resource_id: &str, onset: f64, severity: f64, ramp: f64) -> Self {
        Self {
            resource_id: resource_id.to_string(),
            onset,
            severity,
            ramp,
        }
    }

    /// Fraction of supply still flowing at `t` if this were the only event.
    pub fn remaining(&self, t: f64) -> f64 {
        let progress = if t < self.onset {
            0.0
        } else if self.ramp <= 0.0 {
            1.0
        } else {
            ((t - self.onset) / self.ramp).min(1.0)
        };
        1.0 - self.severity * progress
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferParams {
    pub k: f64,
    pub lambda: f64,
}

/// Rates are per year. Capabilities missing from `gamma`/`c0` use 0 and 1.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsParams {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub gamma: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub c0: BTreeMap<String, f64>,
    /// capability → signal → sensitivity θ_ij.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub theta: BTreeMap<String, BTreeMap<String, f64>>,
    /// signal → lag τ_j.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty", deserialize_with = "duration::map::deserialize")]
    pub tau: BTreeMap<String, f64>,
    /// capability → signal → convolution coupling K_ij and attenuation λ_ij.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub transfer: BTreeMap<String, BTreeMap<String, TransferParams>>,
}

impl DynamicsParams {
    pub fn gamma_of(&self, capability: &str) -> f64 {
        self.gamma.get(capability).copied().unwrap_or(0.0)
    }

    pub fn c0_of(&self, capability: &str) -> f64 {
        self.c0.get(capability).copied().unwrap_or(1.0)
    }

    pub fn tau_of(&self, signal: &str) -> f64 {
        self.tau.get(signal).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    #[default]
    LaggedOde,
    ConvolutionTransfer,
    PiecewiseOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub graph: RegCapGraph,
    #[serde(deserialize_with = "duration::deserialize")]
    pub horizon: f64,
    #[serde(deserialize_with = "duration::deserialize")]
    pub step: f64,
    #[serde(default)]
    pub events: Vec<DisruptionEvent>,
    #[serde(default)]
    pub signals: Vec<PolicySignal>,
    #[serde(default)]
    pub dynamics: DynamicsParams,
    #[serde(default)]
    pub model: Model,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub piecewise: BTreeMap<String, PiecewiseParams>,
    #[serde(default)]
    pub seed: u64,
}

impl Scenario {
    pub fn new(graph: RegCapGraph, horizon: f64, step: f64) -> Self {
        Self {
            graph,
            horizon,
            step,
            events: Vec::new(),
            signals: Vec::new(),
            dynamics: DynamicsParams::default(),
            model: Model::LaggedOde,
            piecewise: BTreeMap::new(),
            seed: 0,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario serializes");
        s.push('\n');
        s
    }

    pub fn grid(&self) -> TimeGrid {
        TimeGrid::covering(0.0, self.horizon, self.step)
    }

    pub fn signal(&self, name: &str) -> Option<&PolicySignal> {
        self.signals.iter().find(|s| s.name == name)
    }

    pub fn capability_ids(&self) -> Vec<String> {
        self.graph.ids_in(LayerKind::Capability)
    }

    /// Supply level of a resource at `t`. Events on the same resource compose
    /// multiplicatively.
    pub fn resource_availability(&self, resource: &str, t: f64) -> Result<f64, GraphError> {
        match self.graph.layer_of(resource) {
            None => Err(GraphError::UnknownNodeId(resource.to_string())),
            Some(LayerKind::Resource) => Ok(availability(
                self.events.iter().filter(|e| e.resource_id == resource),
                t,
            )),
            Some(found) => Err(GraphError::WrongLayer {
                id: resource.to_string(),
                expected: LayerKind::Resource,
                found,
            }),
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = self.graph.validate();

        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            report.error(IssueKind::InvalidHorizon, format!("horizon must be finite and > 0, got {}", self.horizon));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            report.error(IssueKind::GridTooCoarse, format!("step must be finite and > 0, got {}", self.step));
        } else if self.horizon.is_finite() && self.step > self.horizon / 10.0 * (1.0 + 1e-12) {
            report.error(
                IssueKind::GridTooCoarse,
                format!("step {} exceeds horizon/10 = {}", self.step, self.horizon / 10.0),
            );
        }

        for ev in &self.events {
            self.check_node(&ev.resource_id, LayerKind::Resource, "event", &mut report);
            if !(ev.onset.is_finite() && ev.onset >= 0.0) {
                report.error(IssueKind::OutOfRange, format!("event on `{}`: onset {} must be ≥ 0", ev.resource_id, ev.onset));
            }
            if !(0.0..=1.0).contains(&ev.severity) {
                report.error(IssueKind::OutOfRange, format!("event on `{}`: severity {} outside [0,1]", ev.resource_id, ev.severity));
            }
            if !(ev.ramp.is_finite() && ev.ramp >= 0.0) {
                report.error(IssueKind::OutOfRange, format!("event on `{}`: ramp {} must be ≥ 0", ev.resource_id, ev.ramp));
            }
        }

        let mut names = HashSet::new();
        for s in &self.signals {
            if !names.insert(s.name.as_str()) {
                report.error(IssueKind::DuplicateSignal, format!("signal `{}` defined more than once", s.name));
            }
            if let Err(msg) = s.check() {
                report.error(IssueKind::InvalidSignal, format!("signal `{}`: {msg}", s.name));
            }
        }

        self.check_dynamics(&names, &mut report);
        self.check_piecewise(&mut report);
        report
    }

    fn check_node(&self, id: &str, expected: LayerKind, what: &str, report: &mut ValidationReport) -> bool {
        match self.graph.layer_of(id) {
            None => {
                report.error(IssueKind::UnknownNodeId, format!("{what} references unknown node `{id}`"));
                false
            }
            Some(l) if l != expected => {
                report.error(IssueKind::WrongLayer, format!("{what} references {l} node `{id}`, expected {expected}"));
                false
            }
            Some(_) => true,
        }
    }

    fn check_dynamics(&self, signals: &HashSet<&str>, report: &mut ValidationReport) {
        let d = &self.dynamics;
        let cap = LayerKind::Capability;
        for (id, &g) in &d.gamma {
            self.check_node(id, cap, "gamma", report);
            if !(g.is_finite() && g >= 0.0) {
                report.error(IssueKind::OutOfRange, format!("gamma[{id}] = {g} must be finite and ≥ 0"));
            }
        }
        for (id, &c) in &d.c0 {
            self.check_node(id, cap, "c0", report);
            if !(c > 0.0 && c <= 1.0) {
                report.error(IssueKind::OutOfRange, format!("c0[{id}] = {c} outside (0,1]"));
            }
        }
        for (id, row) in &d.theta {
            self.check_node(id, cap, "theta", report);
            for (sig, &v) in row {
                if !signals.contains(sig.as_str()) {
                    report.error(IssueKind::UnknownSignal, format!("theta[{id}] references unknown signal `{sig}`"));
                }
                if !v.is_finite() {
                    report.error(IssueKind::OutOfRange, format!("theta[{id}][{sig}] must be finite"));
                }
            }
        }
        for (sig, &tau) in &d.tau {
            if !signals.contains(sig.as_str()) {
                report.error(IssueKind::UnknownSignal, format!("tau references unknown signal `{sig}`"));
            }
            if !(tau.is_finite() && tau >= 0.0) {
                report.error(IssueKind::OutOfRange, format!("tau[{sig}] = {tau} must be finite and ≥ 0"));
            }
        }
        for (id, row) in &d.transfer {
            self.check_node(id, cap, "transfer", report);
            for (sig, p) in row {
                if !signals.contains(sig.as_str()) {
                    report.error(IssueKind::UnknownSignal, format!("transfer[{id}] references unknown signal `{sig}`"));
                }
                if !(p.k.is_finite() && p.k >= 0.0 && p.lambda.is_finite() && p.lambda >= 0.0) {
                    report.error(IssueKind::OutOfRange, format!("transfer[{id}][{sig}]: k and lambda must be finite and ≥ 0"));
                }
            }
        }
    }

    fn check_piecewise(&self, report: &mut ValidationReport) {
        for (id, p) in &self.piecewise {
            self.check_node(id, LayerKind::Capability, "piecewise", report);
            if let Err(msg) = p.check() {
                report.error(IssueKind::InvalidPiecewise, format!("piecewise[{id}]: {msg}"));
            } else if let Some(jump) = p.max_jump().filter(|j| *j > 1e-6) {
                report.warn(
                    IssueKind::PiecewiseDiscontinuity,
                    format!("piecewise[{id}] jumps by {jump:.3e} between segments"),
                );
            }
        }
        if self.model == Model::PiecewiseOnly {
            for id in self.capability_ids() {
                if !self.piecewise.contains_key(&id) {
                    report.warn(
                        IssueKind::MissingPiecewise,
                        format!("capability `{id}` has no piecewise parameters; it is held at c0"),
                    );
                }
            }
        }
    }
}

pub(crate) fn availability<'a>(events: impl Iterator<Item = &'a DisruptionEvent>, t: f64) -> f64 {
    events.map(|e| e.remaining(t)).product::<f64>().clamp(0.0, 1.0)
}
