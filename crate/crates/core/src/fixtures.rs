//! Reference scenarios shipped with the crate (the JSON files under `fixtures/`).

use crate::graph::{RegCapEdge, RegCapGraph, RegCapNode};
use crate::scenario::Scenario;

pub const REFERENCE_JSON: &str = include_str!("../fixtures/reference.json");
pub const ISR_PFM_JSON: &str = include_str!("../fixtures/isr_pfm.json");
pub const PURE_DECAY_JSON: &str = include_str!("../fixtures/pure_decay.json");
pub const SHARED_DEPENDENCY_JSON: &str = include_str!("../fixtures/shared_dependency.json");
pub const MONOTONE_SURFACE_JSON: &str = include_str!("../fixtures/monotone_surface.json");
pub const THRESHOLD_SURFACE_JSON: &str = include_str!("../fixtures/threshold_surface.json");
pub const CHANNELS_JSON: &str = include_str!("../fixtures/channels.json");
pub const CONVOLUTION_JSON: &str = include_str!("../fixtures/convolution.json");

/// All fixtures as `(file stem, contents)`.
pub const ALL: [(&str, &str); 8] = [
    ("reference", REFERENCE_JSON),
    ("isr_pfm", ISR_PFM_JSON),
    ("pure_decay", PURE_DECAY_JSON),
    ("shared_dependency", SHARED_DEPENDENCY_JSON),
    ("monotone_surface", MONOTONE_SURFACE_JSON),
    ("threshold_surface", THRESHOLD_SURFACE_JSON),
    ("channels", CHANNELS_JSON),
    ("convolution", CONVOLUTION_JSON),
];

fn parse(json: &str) -> Scenario {
    Scenario::from_json_str(json).expect("bundled fixture parses")
}

/// Nd/Dy/Tb/Ce → F-35/DDG-1000 → airframe/propulsion generations → ISR and
/// strategic mobility.
pub fn reference_graph() -> RegCapGraph {
    parse(REFERENCE_JSON).graph
}

/// Lagged-ODE run with γ_ISR = 0.35/yr, a 48-month lag on `P1`, and θ = 0.6 from
/// `P1` to strategic mobility.
pub fn reference_scenario() -> Scenario {
    parse(REFERENCE_JSON)
}

/// ISR held at full capability until 5.5 years, then an exponential drop that
/// reaches 0.4 at 6 years.
pub fn isr_scenario() -> Scenario {
    parse(ISR_PFM_JSON)
}

pub fn pure_decay_scenario() -> Scenario {
    parse(PURE_DECAY_JSON)
}

pub fn shared_dependency_scenario() -> Scenario {
    parse(SHARED_DEPENDENCY_JSON)
}

pub fn monotone_surface_scenario() -> Scenario {
    parse(MONOTONE_SURFACE_JSON)
}

pub fn threshold_surface_scenario() -> Scenario {
    parse(THRESHOLD_SURFACE_JSON)
}

pub fn channels_scenario() -> Scenario {
    parse(CHANNELS_JSON)
}

pub fn convolution_scenario() -> Scenario {
    parse(CONVOLUTION_JSON)
}

/// `R → E → C` with one capability `C` (θ_col 0.4, θ_rev 0.9).
pub fn single_capability_graph() -> RegCapGraph {
    RegCapGraph::new(
        vec![
            RegCapNode::resource("R"),
            RegCapNode::equipment("E", 0.5, 0.5, 0.5),
            RegCapNode::capability("C", 0.4, 0.9, 1.0, 0.5),
        ],
        vec![RegCapEdge::new("R", "E", 1.0), RegCapEdge::new("E", "C", 1.0)],
    )
}
