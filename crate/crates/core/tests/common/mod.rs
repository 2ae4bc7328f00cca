#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regcap::analysis::{CovarianceReport, LagWindowReport, Observation, OverlapMatrix, SczThresholds};
use regcap::graph::generate_power_law_graph;
use regcap::scenario::{DisruptionEvent, Scenario};
use regcap::signals::{PolicySignal, SignalShape};

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_regcap")
}

pub fn fixture_path(stem: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{stem}.json"))
}

/// Two-pass population covariance.
pub fn two_pass_cov(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / n
}

/// A random critical-zone instance with `n` capabilities.
pub struct SczInstance {
    pub overlap: OverlapMatrix,
    pub covariance: CovarianceReport,
    pub lags: Vec<LagWindowReport>,
    pub thresholds: SczThresholds,
}

pub fn random_scz_instance(seed: u64) -> SczInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=8usize);
    // Ids are shuffled relative to index order so sorting matters.
    let mut ids: Vec<String> = (0..n).map(|i| format!("C{}", (i * 5 + 3) % 11)).collect();
    ids.sort();
    let mut ov = vec![vec![1.0; n]; n];
    let mut corr = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            // Coarse values make threshold equality cases common.
            let o = rng.random_range(0..=10) as f64 / 10.0;
            let c = rng.random_range(-10..=10) as f64 / 10.0;
            ov[i][j] = o;
            ov[j][i] = o;
            corr[i][j] = c;
            corr[j][i] = c;
        }
    }
    let lags = ids
        .iter()
        .map(|id| {
            let lag_window = if rng.random_bool(0.2) {
                Observation::Censored { horizon: 12.0 }
            } else {
                Observation::At(rng.random_range(0.0..6.0))
            };
            LagWindowReport {
                capability_id: id.clone(),
                lag_window,
                collapse_time: Observation::Censored { horizon: 12.0 },
                max_decline_rate: 0.0,
                max_decline_time: 0.0,
                rupture_score: 0.0,
            }
        })
        .collect();
    SczInstance {
        overlap: OverlapMatrix {
            rows: ids.clone(),
            cols: ids.clone(),
            entries: ov,
        },
        covariance: CovarianceReport {
            ids,
            covariance: corr.clone(),
            correlation: corr,
            degenerate: vec![],
            coupled_bands: vec![],
        },
        lags,
        thresholds: SczThresholds {
            overlap_min: rng.random_range(0..=10) as f64 / 10.0,
            corr_min: rng.random_range(0..=10) as f64 / 10.0,
            lag_max: rng.random_range(0.0..6.0),
        },
    }
}

/// Brute force: every subset that is connected under the qualification
/// relation and has no qualifying link to the outside is a component.
pub fn scz_by_enumeration(inst: &SczInstance) -> Vec<BTreeSet<String>> {
    let ids = &inst.overlap.rows;
    let n = ids.len();
    let t = inst.thresholds;
    let linked = |i: usize, j: usize| {
        i != j && inst.overlap.entries[i][j] >= t.overlap_min && inst.covariance.correlation[i][j] >= t.corr_min
    };
    let lag: BTreeMap<&String, f64> = inst
        .lags
        .iter()
        .map(|l| (&l.capability_id, l.lag_window.lower_bound()))
        .collect();
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) {
        let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        if members.len() < 2 {
            continue;
        }
        let closed = members
            .iter()
            .all(|&i| (0..n).filter(|j| mask & (1 << j) == 0).all(|j| !linked(i, j)));
        if !closed {
            continue;
        }
        let mut seen = 1u32 << members[0];
        let mut stack = vec![members[0]];
        while let Some(i) = stack.pop() {
            for &j in &members {
                if seen & (1 << j) == 0 && linked(i, j) {
                    seen |= 1 << j;
                    stack.push(j);
                }
            }
        }
        if seen != mask {
            continue;
        }
        let min_lag = members.iter().map(|&i| lag[&ids[i]]).fold(f64::INFINITY, f64::min);
        if min_lag <= t.lag_max {
            out.push(members.iter().map(|&i| ids[i].clone()).collect());
        }
    }
    out.sort_by(|a: &BTreeSet<String>, b| a.iter().next().cmp(&b.iter().next()));
    out
}

/// A generated graph with random disruptions and decay, no policy signals.
pub fn random_disruption_scenario(seed: u64, step: f64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = generate_power_law_graph(
        rng.random_range(1..=5),
        rng.random_range(1..=4),
        rng.random_range(1..=3),
        rng.random_range(1..=4),
        rng.random_range(1.1..3.0),
        seed,
    )
    .expect("valid generator parameters");
    let mut s = Scenario::new(graph, 12.0, step);
    let resources = s.graph.ids_in(regcap::graph::LayerKind::Resource);
    for _ in 0..rng.random_range(0..=3) {
        let r = &resources[rng.random_range(0..resources.len())];
        s.events.push(DisruptionEvent::new(
            r,
            rng.random_range(0.0..6.0),
            rng.random_range(0.0..=1.0),
            rng.random_range(0.0..2.0),
        ));
    }
    for c in s.capability_ids() {
        s.dynamics.gamma.insert(c, rng.random_range(0.0..0.5));
    }
    s
}

/// Adds one sigmoid signal `P` acting on every capability after a lag.
pub fn with_lagged_sigmoid(mut s: Scenario, seed: u64) -> (Scenario, f64, f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let k = rng.random_range(0.5..5.0);
    let t0 = rng.random_range(0.0..6.0);
    let tau = rng.random_range(0.0..5.0);
    s.signals.push(PolicySignal::new("P", SignalShape::Sigmoid { k, t0 }));
    s.dynamics.tau.insert("P".into(), tau);
    for c in s.capability_ids() {
        let theta = rng.random_range(-0.5..0.5);
        s.dynamics.theta.entry(c).or_default().insert("P".into(), theta);
    }
    (s, k, t0, tau)
}
