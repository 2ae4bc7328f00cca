//! Converts resource availability into capability forcing.
//!
//! Equipment supply is the ω-weighted mean availability of its resources. The
//! supply deficit `1 − s_e` reaches a capability along `E → C` edges directly, or
//! along `E → G → C` after the substitution-attenuated delay `τ·(1 − σ_sub)`,
//! scaled by the weight of the edge entering the capability. Before `t = 0`
//! equipment is taken to be fully supplied. Edges that leave a resource for any
//! layer other than equipment carry no forcing.

use std::collections::{BTreeMap, HashMap};

use crate::graph::LayerKind;
use crate::scenario::{availability, DisruptionEvent, Scenario};

#[derive(Debug, Clone)]
struct Supply {
    id: String,
    inbound: Vec<(usize, f64)>,
    total: f64,
}

#[derive(Debug, Clone, Copy)]
struct Term {
    equipment: usize,
    delay: f64,
    scale: f64,
}

/// Precomputed cascade structure for one scenario.
#[derive(Debug, Clone)]
pub struct Cascade {
    resources: Vec<(String, Vec<DisruptionEvent>)>,
    equipment: Vec<Supply>,
    capabilities: Vec<(String, Vec<Term>)>,
}

impl Cascade {
    pub fn new(scenario: &Scenario) -> Self {
        let graph = &scenario.graph;
        let resources: Vec<(String, Vec<DisruptionEvent>)> = graph
            .ids_in(LayerKind::Resource)
            .into_iter()
            .map(|id| {
                let evs = scenario.events.iter().filter(|e| e.resource_id == id).cloned().collect();
                (id, evs)
            })
            .collect();
        let r_idx: HashMap<&str, usize> = resources.iter().enumerate().map(|(i, (id, _))| (id.as_str(), i)).collect();

        let e_ids = graph.ids_in(LayerKind::Equipment);
        let e_idx: HashMap<&str, usize> = e_ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let mut equipment: Vec<Supply> = e_ids
            .iter()
            .map(|id| Supply {
                id: id.clone(),
                inbound: Vec::new(),
                total: 0.0,
            })
            .collect();

        let c_ids = graph.ids_in(LayerKind::Capability);
        let c_idx: HashMap<&str, usize> = c_ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let mut capabilities: Vec<(String, Vec<Term>)> = c_ids.iter().map(|id| (id.clone(), Vec::new())).collect();

        let layer = |id: &str| graph.layer_of(id);
        for e in &graph.edges {
            match (layer(&e.src), layer(&e.dst)) {
                (Some(LayerKind::Resource), Some(LayerKind::Equipment)) => {
                    let s = &mut equipment[e_idx[e.dst.as_str()]];
                    s.inbound.push((r_idx[e.src.as_str()], e.weight));
                    s.total += e.weight;
                }
                (Some(LayerKind::Equipment), Some(LayerKind::Capability)) => {
                    capabilities[c_idx[e.dst.as_str()]].1.push(Term {
                        equipment: e_idx[e.src.as_str()],
                        delay: 0.0,
                        scale: e.weight,
                    });
                }
                (Some(LayerKind::Equipment), Some(LayerKind::Generation)) => {
                    for gc in graph.edges.iter().filter(|x| x.src == e.dst) {
                        if let Some(&ci) = c_idx.get(gc.dst.as_str()) {
                            capabilities[ci].1.push(Term {
                                equipment: e_idx[e.src.as_str()],
                                delay: e.effective_delay(),
                                scale: gc.weight,
                            });
                        }
                    }
                }
                _ => {}
            }
        }

        Self {
            resources,
            equipment,
            capabilities,
        }
    }

    pub fn resource_ids(&self) -> impl Iterator<Item = &str> {
        self.resources.iter().map(|(id, _)| id.as_str())
    }

    pub fn equipment_ids(&self) -> impl Iterator<Item = &str> {
        self.equipment.iter().map(|s| s.id.as_str())
    }

    pub fn capability_ids(&self) -> impl Iterator<Item = &str> {
        self.capabilities.iter().map(|(id, _)| id.as_str())
    }

    pub fn resource_level(&self, index: usize, t: f64) -> f64 {
        availability(self.resources[index].1.iter(), t)
    }

    /// Effective supply `s_e(t)`; 1 for negative time or when nothing feeds the equipment.
    pub fn equipment_supply(&self, index: usize, t: f64) -> f64 {
        let s = &self.equipment[index];
        if t < 0.0 || s.total <= 0.0 {
            return 1.0;
        }
        let fed: f64 = s.inbound.iter().map(|&(r, w)| w * self.resource_level(r, t)).sum();
        fed / s.total
    }

    /// Forcing rate for the capability at `index` (ordered as [`Self::capability_ids`]).
    pub fn forcing(&self, index: usize, t: f64) -> f64 {
        -self.capabilities[index]
            .1
            .iter()
            .map(|term| term.scale * (1.0 - self.equipment_supply(term.equipment, t - term.delay)))
            .sum::<f64>()
    }
}

/// Signed forcing rate (per year) on every capability at time `t`.
pub fn cascade_forcing(scenario: &Scenario, t: f64) -> BTreeMap<String, f64> {
    let c = Cascade::new(scenario);
    c.capability_ids()
        .enumerate()
        .map(|(i, id)| (id.to_string(), c.forcing(i, t)))
        .collect()
}
