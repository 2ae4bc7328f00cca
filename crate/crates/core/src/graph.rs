//! The four-layer resource → equipment → generation → capability dependency graph.
//!
//! Edges always point to a strictly higher layer, so every well-formed graph is
//! acyclic. Layer skips (for example equipment → capability) are allowed.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::validation::{IssueKind, ValidationReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("unknown node id `{0}`")]
    UnknownNodeId(String),
    #[error("node `{id}` is a {found} node, expected {expected}")]
    WrongLayer {
        id: String,
        expected: LayerKind,
        found: LayerKind,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    Resource,
    Equipment,
    Generation,
    Capability,
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LayerKind::Resource => "resource",
            LayerKind::Equipment => "equipment",
            LayerKind::Generation => "generation",
            LayerKind::Capability => "capability",
        };
        f.write_str(s)
    }
}

/// A graph node. Equipment nodes carry `rei`/`tns`/`sdi`; capability nodes carry
/// the thresholds, the criticality weight `w_cl` and `v_strategic`. Which
/// attributes are present is checked by [`RegCapGraph::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegCapNode {
    pub id: String,
    pub layer: LayerKind,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rei: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sdi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_col: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_rev: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_cl: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_strategic: Option<f64>,
}

impl RegCapNode {
    fn bare(id: &str, layer: LayerKind) -> Self {
        Self {
            id: id.to_string(),
            layer,
            label: String::new(),
            rei: None,
            tns: None,
            sdi: None,
            theta_col: None,
            theta_rev: None,
            w_cl: None,
            v_strategic: None,
        }
    }

    pub fn resource(id: &str) -> Self {
        Self::bare(id, LayerKind::Resource)
    }

    pub fn generation(id: &str) -> Self {
        Self::bare(id, LayerKind::Generation)
    }

    pub fn equipment(id: &str, rei: f64, tns: f64, sdi: f64) -> Self {
        Self {
            rei: Some(rei),
            tns: Some(tns),
            sdi: Some(sdi),
            ..Self::bare(id, LayerKind::Equipment)
        }
    }

    pub fn capability(id: &str, theta_col: f64, theta_rev: f64, w_cl: f64, v_strategic: f64) -> Self {
        Self {
            theta_col: Some(theta_col),
            theta_rev: Some(theta_rev),
            w_cl: Some(w_cl),
            v_strategic: Some(v_strategic),
            ..Self::bare(id, LayerKind::Capability)
        }
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    fn equipment_fields(&self) -> [(&'static str, Option<f64>); 3] {
        [("rei", self.rei), ("tns", self.tns), ("sdi", self.sdi)]
    }

    fn capability_fields(&self) -> [(&'static str, Option<f64>); 4] {
        [
            ("theta_col", self.theta_col),
            ("theta_rev", self.theta_rev),
            ("w_cl", self.w_cl),
            ("v_strategic", self.v_strategic),
        ]
    }
}

fn default_weight() -> f64 {
    1.0
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

fn is_one(v: &f64) -> bool {
    *v == 1.0
}

/// A directed dependency. `weight` is ω on resource → equipment edges and δ on
/// edges into a capability; `delay_years` and `sigma_sub` only apply to
/// equipment → generation edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegCapEdge {
    pub src: String,
    pub dst: String,
    #[serde(default = "default_weight", skip_serializing_if = "is_one")]
    pub weight: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub delay_years: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub sigma_sub: f64,
}

impl RegCapEdge {
    pub fn new(src: &str, dst: &str, weight: f64) -> Self {
        Self {
            src: src.to_string(),
            dst: dst.to_string(),
            weight,
            delay_years: 0.0,
            sigma_sub: 0.0,
        }
    }

    pub fn with_delay(mut self, delay_years: f64, sigma_sub: f64) -> Self {
        self.delay_years = delay_years;
        self.sigma_sub = sigma_sub;
        self
    }

    /// Delay after substitution attenuation: τ·(1 − σ_sub).
    pub fn effective_delay(&self) -> f64 {
        self.delay_years * (1.0 - self.sigma_sub)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegCapGraph {
    pub nodes: Vec<RegCapNode>,
    pub edges: Vec<RegCapEdge>,
}

/// A resource-to-capability path. `edges` indexes into [`RegCapGraph::edges`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Channel {
    pub path: Vec<String>,
    pub edges: Vec<usize>,
}

impl Channel {
    pub fn resource(&self) -> &str {
        &self.path[0]
    }

    pub fn capability(&self) -> &str {
        self.path.last().map(String::as_str).unwrap_or_default()
    }

    /// The supply route feeding the terminal capability (the path without its last node).
    pub fn route(&self) -> Vec<String> {
        self.path[..self.path.len() - 1].to_vec()
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.path.join("→"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DependencyMatrix {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub entries: Vec<Vec<f64>>,
}

impl DependencyMatrix {
    pub fn get(&self, resource: &str, equipment: &str) -> Option<f64> {
        let r = self.rows.iter().position(|x| x == resource)?;
        let c = self.cols.iter().position(|x| x == equipment)?;
        Some(self.entries[r][c])
    }

    /// Rebuilds the (resource, equipment, weight) edge list from the non-zero entries.
    pub fn to_edges(&self) -> Vec<(String, String, f64)> {
        let mut out = Vec::new();
        for (r, row) in self.rows.iter().zip(&self.entries) {
            for (c, &w) in self.cols.iter().zip(row) {
                if w > 0.0 {
                    out.push((r.clone(), c.clone(), w));
                }
            }
        }
        out
    }
}

impl RegCapGraph {
    pub fn new(nodes: Vec<RegCapNode>, edges: Vec<RegCapEdge>) -> Self {
        Self { nodes, edges }
    }

    pub fn node(&self, id: &str) -> Option<&RegCapNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn layer_of(&self, id: &str) -> Option<LayerKind> {
        self.node(id).map(|n| n.layer)
    }

    /// Node ids of one layer, sorted.
    pub fn ids_in(&self, layer: LayerKind) -> Vec<String> {
        let mut ids: Vec<String> = self
            .nodes
            .iter()
            .filter(|n| n.layer == layer)
            .map(|n| n.id.clone())
            .collect();
        ids.sort();
        ids.dedup();
        ids
    }

    fn layer_map(&self) -> HashMap<&str, LayerKind> {
        self.nodes.iter().map(|n| (n.id.as_str(), n.layer)).collect()
    }

    /// Edge indices whose endpoints exist and strictly increase in layer, keyed by
    /// source and sorted by destination id.
    fn forward_adjacency(&self) -> HashMap<&str, Vec<usize>> {
        let layers = self.layer_map();
        let mut adj: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, e) in self.edges.iter().enumerate() {
            match (layers.get(e.src.as_str()), layers.get(e.dst.as_str())) {
                (Some(a), Some(b)) if a < b => adj.entry(e.src.as_str()).or_default().push(i),
                _ => {}
            }
        }
        for list in adj.values_mut() {
            list.sort_by(|&a, &b| self.edges[a].dst.cmp(&self.edges[b].dst).then(a.cmp(&b)));
        }
        adj
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let mut seen = HashSet::new();
        for n in &self.nodes {
            if !seen.insert(n.id.as_str()) {
                report.error(IssueKind::DuplicateNodeId, format!("node id `{}` appears more than once", n.id));
            }
            self.check_node_attrs(n, &mut report);
        }

        let layers = self.layer_map();
        let mut pairs = HashSet::new();
        for e in &self.edges {
            let src = layers.get(e.src.as_str()).copied();
            let dst = layers.get(e.dst.as_str()).copied();
            for (id, layer) in [(&e.src, src), (&e.dst, dst)] {
                if layer.is_none() {
                    report.error(IssueKind::UnknownNodeId, format!("edge {}→{} references unknown node `{id}`", e.src, e.dst));
                }
            }
            if e.src == e.dst {
                report.error(IssueKind::SelfLoop, format!("self-loop on `{}`", e.src));
            } else if let (Some(a), Some(b)) = (src, dst) {
                if a >= b {
                    report.error(
                        IssueKind::LayerOrderViolation,
                        format!("edge {}→{} goes from {a} to {b}", e.src, e.dst),
                    );
                }
            }
            if !pairs.insert((e.src.as_str(), e.dst.as_str())) {
                report.error(IssueKind::DuplicateEdge, format!("edge {}→{} appears more than once", e.src, e.dst));
            }
            if !(e.weight.is_finite() && e.weight >= 0.0) {
                report.error(IssueKind::OutOfRange, format!("edge {}→{} weight {} must be finite and ≥ 0", e.src, e.dst, e.weight));
            }
            if !(e.delay_years.is_finite() && e.delay_years >= 0.0) {
                report.error(IssueKind::OutOfRange, format!("edge {}→{} delay {} must be finite and ≥ 0", e.src, e.dst, e.delay_years));
            }
            if !(0.0..=1.0).contains(&e.sigma_sub) {
                report.error(IssueKind::OutOfRange, format!("edge {}→{} sigma_sub {} outside [0,1]", e.src, e.dst, e.sigma_sub));
            }
            let eg = src == Some(LayerKind::Equipment) && dst == Some(LayerKind::Generation);
            if !eg && (e.delay_years != 0.0 || e.sigma_sub != 0.0) {
                report.error(
                    IssueKind::MisplacedAttribute,
                    format!("edge {}→{}: delay_years/sigma_sub only apply to equipment→generation edges", e.src, e.dst),
                );
            }
        }

        self.check_structure_warnings(&layers, &mut report);
        report
    }

    fn check_node_attrs(&self, n: &RegCapNode, report: &mut ValidationReport) {
        type Fields<'a> = Vec<(&'a str, Option<f64>)>;
        let (required, forbidden): (Fields, Fields) = match n.layer {
            LayerKind::Equipment => (n.equipment_fields().to_vec(), n.capability_fields().to_vec()),
            LayerKind::Capability => (n.capability_fields().to_vec(), n.equipment_fields().to_vec()),
            _ => {
                let mut all = n.equipment_fields().to_vec();
                all.extend(n.capability_fields());
                (Vec::new(), all)
            }
        };
        for (name, v) in forbidden {
            if v.is_some() {
                report.error(IssueKind::MisplacedAttribute, format!("{} node `{}` must not carry `{name}`", n.layer, n.id));
            }
        }
        for (name, v) in required {
            match v {
                None => report.error(IssueKind::MissingAttribute, format!("{} node `{}` is missing `{name}`", n.layer, n.id)),
                Some(x) => {
                    let ok = if name == "w_cl" {
                        x.is_finite() && x >= 0.0
                    } else {
                        (0.0..=1.0).contains(&x)
                    };
                    if !ok {
                        report.error(IssueKind::OutOfRange, format!("node `{}` {name} = {x} out of range", n.id));
                    }
                }
            }
        }
        if let (Some(col), Some(rev)) = (n.theta_col, n.theta_rev) {
            if n.layer == LayerKind::Capability && !(col < rev && rev <= 1.0) {
                report.error(
                    IssueKind::ThresholdOrder,
                    format!("node `{}` needs theta_col < theta_rev ≤ 1 (got {col}, {rev})", n.id),
                );
            }
        }
    }

    fn check_structure_warnings(&self, layers: &HashMap<&str, LayerKind>, report: &mut ValidationReport) {
        let adj = self.forward_adjacency();
        let mut reached: HashSet<&str> = HashSet::new();
        let mut queue: VecDeque<&str> = self
            .nodes
            .iter()
            .filter(|n| n.layer == LayerKind::Resource)
            .map(|n| n.id.as_str())
            .collect();
        while let Some(id) = queue.pop_front() {
            if !reached.insert(id) {
                continue;
            }
            for &ei in adj.get(id).into_iter().flatten() {
                queue.push_back(self.edges[ei].dst.as_str());
            }
        }
        for id in self.ids_in(LayerKind::Capability) {
            if !reached.contains(id.as_str()) {
                report.warn(IssueKind::UnreachableCapability, format!("capability `{id}` is not reachable from any resource"));
            }
        }
        for id in self.ids_in(LayerKind::Equipment) {
            let inbound: Vec<f64> = self
                .edges
                .iter()
                .filter(|e| e.dst == id && layers.get(e.src.as_str()) == Some(&LayerKind::Resource))
                .map(|e| e.weight)
                .collect();
            if inbound.is_empty() {
                report.warn(IssueKind::EquipmentWithoutResource, format!("equipment `{id}` has no incoming resource edge"));
            } else if inbound.iter().sum::<f64>() == 0.0 {
                report.warn(IssueKind::ZeroWeightSum, format!("equipment `{id}` has inbound resource weights summing to zero"));
            }
        }
    }

    /// Every layer-increasing resource → capability path, optionally filtered by
    /// endpoints, in lexicographic order of node-id sequence.
    pub fn enumerate_channels(&self, from: Option<&str>, to: Option<&str>) -> Result<Vec<Channel>, GraphError> {
        let layers = self.layer_map();
        let check = |id: &str, expected: LayerKind| -> Result<(), GraphError> {
            match layers.get(id) {
                None => Err(GraphError::UnknownNodeId(id.to_string())),
                Some(&found) if found != expected => Err(GraphError::WrongLayer {
                    id: id.to_string(),
                    expected,
                    found,
                }),
                Some(_) => Ok(()),
            }
        };
        if let Some(f) = from {
            check(f, LayerKind::Resource)?;
        }
        if let Some(t) = to {
            check(t, LayerKind::Capability)?;
        }

        let adj = self.forward_adjacency();
        let starts: Vec<String> = match from {
            Some(f) => vec![f.to_string()],
            None => self.ids_in(LayerKind::Resource),
        };
        let mut out = Vec::new();
        for start in &starts {
            let mut path = vec![start.clone()];
            let mut edges = Vec::new();
            self.dfs_channels(&adj, &layers, &mut path, &mut edges, to, &mut out);
        }
        out.sort();
        Ok(out)
    }

    fn dfs_channels(
        &self,
        adj: &HashMap<&str, Vec<usize>>,
        layers: &HashMap<&str, LayerKind>,
        path: &mut Vec<String>,
        edges: &mut Vec<usize>,
        to: Option<&str>,
        out: &mut Vec<Channel>,
    ) {
        let here = path.last().expect("path is never empty").clone();
        if layers.get(here.as_str()) == Some(&LayerKind::Capability) {
            if to.is_none_or(|t| t == here) {
                out.push(Channel {
                    path: path.clone(),
                    edges: edges.clone(),
                });
            }
            return;
        }
        for &ei in adj.get(here.as_str()).into_iter().flatten() {
            path.push(self.edges[ei].dst.clone());
            edges.push(ei);
            self.dfs_channels(adj, layers, path, edges, to, out);
            path.pop();
            edges.pop();
        }
    }

    /// Resource × equipment matrix of ω weights, rows and columns sorted by id.
    pub fn dependency_matrix(&self) -> DependencyMatrix {
        let rows = self.ids_in(LayerKind::Resource);
        let cols = self.ids_in(LayerKind::Equipment);
        let mut entries = vec![vec![0.0; cols.len()]; rows.len()];
        let row_of: HashMap<&str, usize> = rows.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let col_of: HashMap<&str, usize> = cols.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        for e in &self.edges {
            if let (Some(&r), Some(&c)) = (row_of.get(e.src.as_str()), col_of.get(e.dst.as_str())) {
                entries[r][c] = e.weight;
            }
        }
        DependencyMatrix { rows, cols, entries }
    }

    /// Risk index ρ_e = Σω / (Σω + 1) · TNS over the equipment's inbound resource edges.
    pub fn equipment_risk(&self, equipment: &str) -> Result<f64, GraphError> {
        let node = self
            .node(equipment)
            .ok_or_else(|| GraphError::UnknownNodeId(equipment.to_string()))?;
        if node.layer != LayerKind::Equipment {
            return Err(GraphError::WrongLayer {
                id: equipment.to_string(),
                expected: LayerKind::Equipment,
                found: node.layer,
            });
        }
        let layers = self.layer_map();
        let total: f64 = self
            .edges
            .iter()
            .filter(|e| e.dst == equipment && layers.get(e.src.as_str()) == Some(&LayerKind::Resource))
            .map(|e| e.weight)
            .sum();
        Ok(total / (total + 1.0) * node.tns.unwrap_or(0.0))
    }

    /// Node ids in a topological order (by layer, then id). `None` if the edge set
    /// contains a cycle or references unknown nodes.
    pub fn topological_order(&self) -> Option<Vec<String>> {
        let ids: BTreeSet<&str> = self.nodes.iter().map(|n| n.id.as_str()).collect();
        let mut indegree: BTreeMap<&str, usize> = ids.iter().map(|&id| (id, 0)).collect();
        let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for e in &self.edges {
            if !ids.contains(e.src.as_str()) || !ids.contains(e.dst.as_str()) {
                return None;
            }
            *indegree.get_mut(e.dst.as_str())? += 1;
            succ.entry(e.src.as_str()).or_default().push(e.dst.as_str());
        }
        let mut ready: BTreeSet<(LayerKind, &str)> = indegree
            .iter()
            .filter(|(_, &d)| d == 0)
            .map(|(&id, _)| (self.layer_of(id).unwrap_or(LayerKind::Resource), id))
            .collect();
        let mut order = Vec::with_capacity(ids.len());
        while let Some(next) = ready.pop_first() {
            order.push(next.1.to_string());
            for &s in succ.get(next.1).into_iter().flatten() {
                let d = indegree.get_mut(s)?;
                *d -= 1;
                if *d == 0 {
                    ready.insert((self.layer_of(s).unwrap_or(LayerKind::Resource), s));
                }
            }
        }
        (order.len() == ids.len()).then_some(order)
    }
}

fn padded_ids(prefix: char, count: usize) -> Vec<String> {
    let width = count.saturating_sub(1).to_string().len();
    (0..count).map(|i| format!("{prefix}{i:0width$}")).collect()
}

/// Builds a synthetic layered graph whose resource → equipment weights follow a
/// discrete power law.
///
/// For every equipment node the resources are ranked by a seeded shuffle, `10·n_r`
/// ranks are drawn from a Zipf law with the given exponent, and the hit counts
/// (normalized per equipment) become the ω weights. Layer-adjacent edges
/// (`E_i → G_{i mod n_g}`, `G_j ← E_{j mod n_e}` and likewise for G → C) make
/// every node reachable.
pub fn generate_power_law_graph(
    n_r: usize,
    n_e: usize,
    n_g: usize,
    n_c: usize,
    exponent: f64,
    seed: u64,
) -> Result<RegCapGraph, GraphError> {
    if n_r == 0 || n_e == 0 || n_g == 0 || n_c == 0 {
        return Err(GraphError::InvalidParameter("layer counts must be ≥ 1".into()));
    }
    if !(exponent.is_finite() && exponent > 1.0) {
        return Err(GraphError::InvalidParameter(format!("exponent must be > 1, got {exponent}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zipf = Zipf::new(n_r as f64, exponent).map_err(|e| GraphError::InvalidParameter(e.to_string()))?;

    let r_ids = padded_ids('R', n_r);
    let e_ids = padded_ids('E', n_e);
    let g_ids = padded_ids('G', n_g);
    let c_ids = padded_ids('C', n_c);

    let mut nodes: Vec<RegCapNode> = r_ids.iter().map(|id| RegCapNode::resource(id)).collect();
    for id in &e_ids {
        let (rei, tns, sdi) = (rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>());
        nodes.push(RegCapNode::equipment(id, rei, tns, sdi));
    }
    nodes.extend(g_ids.iter().map(|id| RegCapNode::generation(id)));
    for id in &c_ids {
        let w_cl = rng.random_range(0.5..1.5);
        let v = rng.random::<f64>();
        nodes.push(RegCapNode::capability(id, 0.4, 0.9, w_cl, v));
    }

    let mut edges = Vec::new();
    let draws = 10 * n_r;
    for e_id in &e_ids {
        let mut ranking: Vec<usize> = (0..n_r).collect();
        ranking.shuffle(&mut rng);
        let mut hits = vec![0usize; n_r];
        for _ in 0..draws {
            let rank = zipf.sample(&mut rng) as usize;
            hits[ranking[rank.clamp(1, n_r) - 1]] += 1;
        }
        for (r, &h) in hits.iter().enumerate() {
            if h > 0 {
                edges.push(RegCapEdge::new(&r_ids[r], e_id, h as f64 / draws as f64));
            }
        }
    }

    let mut eg: BTreeSet<(usize, usize)> = BTreeSet::new();
    for i in 0..n_e {
        eg.insert((i, i % n_g));
        if rng.random_bool(0.3) {
            eg.insert((i, rng.random_range(0..n_g)));
        }
    }
    for j in 0..n_g {
        eg.insert((j % n_e, j));
    }
    for (i, j) in eg {
        let delay = rng.random_range(0.5..3.0);
        let sigma = rng.random_range(0.0..0.5);
        edges.push(RegCapEdge::new(&e_ids[i], &g_ids[j], 1.0).with_delay(delay, sigma));
    }

    let mut gc: BTreeSet<(usize, usize)> = BTreeSet::new();
    for j in 0..n_g {
        gc.insert((j, j % n_c));
    }
    for k in 0..n_c {
        gc.insert((k % n_g, k));
    }
    for (j, k) in gc {
        let delta = rng.random_range(0.2..1.0);
        edges.push(RegCapEdge::new(&g_ids[j], &c_ids[k], delta));
    }

    Ok(RegCapGraph { nodes, edges })
}
