use std::collections::{BTreeMap, BTreeSet};

use super::{AnalysisError, CovarianceReport, LagWindowReport, Observation, OverlapMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SczThresholds {
    pub overlap_min: f64,
    pub corr_min: f64,
    pub lag_max: f64,
}

impl Default for SczThresholds {
    fn default() -> Self {
        Self {
            overlap_min: 0.5,
            corr_min: 0.8,
            lag_max: 3.0,
        }
    }
}

/// A group of capabilities that share supply routes, move together, and
/// have little warning time.
#[derive(Debug, Clone, PartialEq)]
pub struct SczCluster {
    pub members: Vec<String>,
    pub mean_overlap: f64,
    pub mean_correlation: f64,
    pub min_lag_window: Observation,
}

struct DisjointSet(Vec<usize>);

impl DisjointSet {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = x;
        while self.0[c] != r {
            let next = self.0[c];
            self.0[c] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Connected components of the graph linking capabilities whose overlap and
/// correlation both meet the thresholds, keeping components of two or more
/// whose shortest lag window is at most `lag_max`. Censored lag windows count
/// as their horizon.
pub fn identify_scz(
    overlap: &OverlapMatrix,
    covariance: &CovarianceReport,
    lags: &[LagWindowReport],
    thresholds: SczThresholds,
) -> Result<Vec<SczCluster>, AnalysisError> {
    if !overlap.is_square() {
        return Err(AnalysisError::InconsistentIds("overlap matrix is not square".into()));
    }
    let ids: BTreeSet<&String> = overlap.rows.iter().collect();
    let cov_ids: BTreeSet<&String> = covariance.ids.iter().collect();
    let lag_map: BTreeMap<&String, Observation> = lags.iter().map(|l| (&l.capability_id, l.lag_window)).collect();
    let lag_ids: BTreeSet<&String> = lag_map.keys().copied().collect();
    if ids != cov_ids || ids != lag_ids {
        return Err(AnalysisError::InconsistentIds(
            "overlap, covariance and lag reports cover different capabilities".into(),
        ));
    }

    let order = &overlap.rows;
    let n = order.len();
    let corr = |i: usize, j: usize| covariance.correlation_of(&order[i], &order[j]).unwrap_or(0.0);
    let mut dsu = DisjointSet((0..n).collect());
    for i in 0..n {
        for j in i + 1..n {
            if overlap.entries[i][j] >= thresholds.overlap_min && corr(i, j) >= thresholds.corr_min {
                dsu.union(i, j);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let root = dsu.find(i);
        groups.entry(root).or_default().push(i);
    }

    let mut out = Vec::new();
    for members in groups.into_values().filter(|g| g.len() >= 2) {
        let min_lag = members
            .iter()
            .map(|&i| lag_map[&order[i]])
            .min_by(|a, b| a.lower_bound().total_cmp(&b.lower_bound()))
            .expect("non-empty group");
        if min_lag.lower_bound() > thresholds.lag_max {
            continue;
        }
        let mut pairs = 0.0;
        let (mut so, mut sc) = (0.0, 0.0);
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                pairs += 1.0;
                so += overlap.entries[i][j];
                sc += corr(i, j);
            }
        }
        out.push(SczCluster {
            members: members.iter().map(|&i| order[i].clone()).collect(),
            mean_overlap: so / pairs,
            mean_correlation: sc / pairs,
            min_lag_window: min_lag,
        });
    }
    Ok(out)
}
