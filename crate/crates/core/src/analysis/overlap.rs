use std::collections::{BTreeMap, BTreeSet};

use super::AnalysisError;
use crate::graph::{LayerKind, RegCapGraph};

/// A set of paths, each identified by its full node-id sequence.
pub type PathSet = BTreeSet<Vec<String>>;

/// `O_ij = |P_i ∩ P_j| / sqrt(|P_i|·|P_j|)`. Square when rows and columns come
/// from the same family, rectangular otherwise (e.g. equipment × capability).
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMatrix {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub entries: Vec<Vec<f64>>,
}

impl OverlapMatrix {
    pub fn get(&self, row: &str, col: &str) -> Option<f64> {
        let r = self.rows.iter().position(|x| x == row)?;
        let c = self.cols.iter().position(|x| x == col)?;
        Some(self.entries[r][c])
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
}

pub fn path_overlap_matrix(
    rows: &BTreeMap<String, PathSet>,
    cols: &BTreeMap<String, PathSet>,
) -> Result<OverlapMatrix, AnalysisError> {
    for (id, set) in rows.iter().chain(cols) {
        if set.is_empty() {
            return Err(AnalysisError::EmptyPathSet(id.clone()));
        }
    }
    let entries = rows
        .values()
        .map(|a| {
            cols.values()
                .map(|b| {
                    let shared = a.intersection(b).count() as f64;
                    (shared / ((a.len() * b.len()) as f64).sqrt()).min(1.0)
                })
                .collect()
        })
        .collect();
    Ok(OverlapMatrix {
        rows: rows.keys().cloned().collect(),
        cols: cols.keys().cloned().collect(),
        entries,
    })
}

/// Supply routes feeding each capability: every resource → capability channel
/// with the capability itself removed.
pub fn capability_routes(graph: &RegCapGraph) -> Result<BTreeMap<String, PathSet>, AnalysisError> {
    let mut out: BTreeMap<String, PathSet> = graph
        .ids_in(LayerKind::Capability)
        .into_iter()
        .map(|id| (id, PathSet::new()))
        .collect();
    for ch in graph.enumerate_channels(None, None)? {
        out.entry(ch.capability().to_string()).or_default().insert(ch.route());
    }
    Ok(out)
}

/// Supply routes passing through each equipment node.
pub fn equipment_routes(graph: &RegCapGraph) -> Result<BTreeMap<String, PathSet>, AnalysisError> {
    let mut out: BTreeMap<String, PathSet> = graph
        .ids_in(LayerKind::Equipment)
        .into_iter()
        .map(|id| (id, PathSet::new()))
        .collect();
    for ch in graph.enumerate_channels(None, None)? {
        let route = ch.route();
        for node in &route {
            if let Some(set) = out.get_mut(node) {
                set.insert(route.clone());
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(paths: &[&[&str]]) -> PathSet {
        paths.iter().map(|p| p.iter().map(|s| s.to_string()).collect()).collect()
    }

    fn family(items: Vec<(&str, PathSet)>) -> BTreeMap<String, PathSet> {
        items.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    #[test]
    fn identical_and_disjoint() {
        let a = set(&[&["Nd", "F-35"], &["Dy", "F-35"]]);
        let b = set(&[&["Ce", "DDG-1000"]]);
        let fam = family(vec![("A", a.clone()), ("A2", a), ("B", b)]);
        let m = path_overlap_matrix(&fam, &fam).unwrap();
        assert_eq!(m.get("A", "A2"), Some(1.0));
        assert_eq!(m.get("A", "B"), Some(0.0));
        assert!(m.is_square());
    }

    #[test]
    fn four_of_five_shared() {
        let p: Vec<Vec<String>> = (0..6).map(|i| vec![format!("R{i}"), "E".to_string()]).collect();
        let a: PathSet = p[0..5].iter().cloned().collect();
        let b: PathSet = p[1..6].iter().cloned().collect();
        let m = path_overlap_matrix(&family(vec![("F-35", a)]), &family(vec![("StrategicMobility", b)])).unwrap();
        assert_eq!(m.entries, vec![vec![0.8]]);
    }

    #[test]
    fn empty_set_is_named() {
        let fam = family(vec![("A", set(&[&["x"]])), ("Empty", PathSet::new())]);
        assert_eq!(path_overlap_matrix(&fam, &fam), Err(AnalysisError::EmptyPathSet("Empty".into())));
    }

    #[test]
    fn routes_on_reference_graph() {
        let g = crate::fixtures::reference_graph();
        let caps = capability_routes(&g).unwrap();
        assert!(caps["ISR"].contains(&vec!["Nd".to_string(), "F-35".into(), "5thGenJet".into()]));
        let m = path_overlap_matrix(&caps, &caps).unwrap();
        // ISR's two routes both also feed strategic mobility (which has five).
        assert_eq!(caps["ISR"].len(), 2);
        assert_eq!(caps["StrategicMobility"].len(), 5);
        assert!((m.get("ISR", "StrategicMobility").unwrap() - 2.0 / 10f64.sqrt()).abs() < 1e-15);

        let eq = equipment_routes(&g).unwrap();
        let rect = path_overlap_matrix(&eq, &caps).unwrap();
        assert_eq!(rect.rows, ["DDG-1000", "F-35"]);
        assert_eq!(rect.get("F-35", "ISR"), Some(1.0));
        assert_eq!(rect.get("DDG-1000", "ISR"), Some(0.0));
    }
}
