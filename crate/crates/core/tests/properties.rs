mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regcap::analysis::{
    deterrence_weight, detect_collapse_point, detect_lag_window, identify_scz, impact_surface, response_covariance,
    DeterrenceWeights,
};
use regcap::dynamics::{simulate, simulate_ode_with, SimOptions, Trajectory};
use regcap::fixtures;
use regcap::graph::{generate_power_law_graph, LayerKind, RegCapEdge, RegCapGraph, RegCapNode};
use regcap::grid::TimeGrid;
use regcap::scenario::{DisruptionEvent, Model, Scenario};
use regcap::signals::{PolicySignal, SignalShape};

fn layer_rank(l: LayerKind) -> u8 {
    match l {
        LayerKind::Resource => 0,
        LayerKind::Equipment => 1,
        LayerKind::Generation => 2,
        LayerKind::Capability => 3,
    }
}

/// Up to 10 nodes on random layers with random forward edges.
fn random_layered_graph(seed: u64) -> RegCapGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=10);
    let nodes: Vec<RegCapNode> = (0..n)
        .map(|i| {
            let id = format!("N{i}");
            match rng.random_range(0..4) {
                0 => RegCapNode::resource(&id),
                1 => RegCapNode::equipment(&id, 0.5, 0.5, 0.5),
                2 => RegCapNode::generation(&id),
                _ => RegCapNode::capability(&id, 0.4, 0.9, 1.0, 0.5),
            }
        })
        .collect();
    let mut edges = Vec::new();
    for a in &nodes {
        for b in &nodes {
            if layer_rank(a.layer) < layer_rank(b.layer) && rng.random_bool(0.4) {
                edges.push(RegCapEdge::new(&a.id, &b.id, rng.random_range(0.0..1.0)));
            }
        }
    }
    RegCapGraph::new(nodes, edges)
}

/// Every node tuple of length 2 to 4 that starts at a resource, ends at a
/// capability and follows existing edges.
fn brute_force_channels(g: &RegCapGraph) -> BTreeSet<Vec<String>> {
    let ids: Vec<&str> = g.nodes.iter().map(|n| n.id.as_str()).collect();
    let has_edge = |a: &str, b: &str| g.edges.iter().any(|e| e.src == a && e.dst == b);
    let mut out = BTreeSet::new();
    let mut stack: Vec<Vec<&str>> = ids.iter().map(|&i| vec![i]).collect();
    while let Some(path) = stack.pop() {
        if path.len() >= 2
            && g.layer_of(path[0]) == Some(LayerKind::Resource)
            && g.layer_of(path[path.len() - 1]) == Some(LayerKind::Capability)
        {
            out.insert(path.iter().map(|s| s.to_string()).collect());
        }
        if path.len() < 4 {
            for &next in &ids {
                if has_edge(path[path.len() - 1], next) {
                    let mut p = path.clone();
                    p.push(next);
                    stack.push(p);
                }
            }
        }
    }
    out
}

fn random_generated(seed: u64) -> RegCapGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_power_law_graph(
        rng.random_range(1..=8),
        rng.random_range(1..=6),
        rng.random_range(1..=4),
        rng.random_range(1..=5),
        rng.random_range(1.05..4.0),
        seed,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generated_graphs_are_layered_and_acyclic(seed in any::<u64>()) {
        let g = random_generated(seed);
        for e in &g.edges {
            let (a, b) = (g.layer_of(&e.src).unwrap(), g.layer_of(&e.dst).unwrap());
            prop_assert!(layer_rank(a) < layer_rank(b));
        }
        prop_assert!(g.topological_order().is_some());
        prop_assert!(g.validate().is_ok());
    }

    #[test]
    fn generator_is_pure(seed in any::<u64>()) {
        prop_assert_eq!(random_generated(seed), random_generated(seed));
    }

    #[test]
    fn channels_match_brute_force(seed in any::<u64>()) {
        let g = random_layered_graph(seed);
        let got: BTreeSet<Vec<String>> = g.enumerate_channels(None, None).unwrap().into_iter().map(|c| c.path).collect();
        prop_assert_eq!(got, brute_force_channels(&g));
    }

    #[test]
    fn dependency_matrix_round_trips(seed in any::<u64>()) {
        let g = random_layered_graph(seed);
        let mut want: Vec<(String, String, f64)> = g
            .edges
            .iter()
            .filter(|e| g.layer_of(&e.src) == Some(LayerKind::Resource) && g.layer_of(&e.dst) == Some(LayerKind::Equipment))
            .map(|e| (e.src.clone(), e.dst.clone(), e.weight))
            .collect();
        want.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
        let mut got = g.dependency_matrix().to_edges();
        got.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
        prop_assert_eq!(got, want);
    }

    #[test]
    fn single_event_availability_is_monotone(
        onset in 0.0..10.0f64, severity in 0.0..=1.0f64, ramp in 0.0..3.0f64,
        times in proptest::collection::vec(0.0..15.0f64, 2..30),
    ) {
        let mut s = Scenario::new(fixtures::single_capability_graph(), 15.0, 0.1);
        s.events.push(DisruptionEvent::new("R", onset, severity, ramp));
        let mut times = times;
        times.sort_by(f64::total_cmp);
        let vals: Vec<f64> = times.iter().map(|&t| s.resource_availability("R", t).unwrap()).collect();
        for v in &vals {
            prop_assert!((0.0..=1.0).contains(v));
        }
        for w in vals.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn scenario_json_round_trips(seed in any::<u64>()) {
        let (s, _, _, _) = common::with_lagged_sigmoid(common::random_disruption_scenario(seed, 0.05), seed);
        let mut s = s;
        s.signals.push(PolicySignal::new("S", SignalShape::ssif_default()));
        let text = s.to_json_string();
        prop_assert_eq!(Scenario::from_json_str(&text).unwrap(), s);
    }

    #[test]
    fn sigmoid_bounded_monotone_and_differentiable(k in 0.1..10.0f64, t0 in -5.0..5.0f64, t in -5.0..5.0f64) {
        let sig = PolicySignal::new("P", SignalShape::Sigmoid { k, t0 });
        prop_assume!((k * (t - t0)).abs() < 30.0);
        let v = sig.eval(t);
        prop_assert!(v > 0.0 && v < 1.0);
        prop_assert!(sig.eval(t + 0.01) >= v);
        let h = 1e-4;
        let fd = (sig.eval(t + h) - sig.eval(t - h)) / (2.0 * h);
        prop_assert!((sig.derivative(t, h) - fd).abs() < 1e-6);
    }

    #[test]
    fn windows_ignore_constant_offset(
        knots in proptest::collection::vec(-8i32..=8, 2..8),
        offset in -16i32..=16,
    ) {
        // Eighths on integer knot times keep every difference exact.
        let pts = |c: f64| knots.iter().enumerate().map(|(i, &v)| (i as f64 * 2.0, v as f64 / 8.0 + c)).collect();
        let a = PolicySignal::new("P", SignalShape::PiecewiseLinear { knots: pts(0.0) });
        let b = PolicySignal::new("P", SignalShape::PiecewiseLinear { knots: pts(offset as f64 / 8.0) });
        let grid = TimeGrid::covering(0.0, 16.0, 0.25);
        prop_assert_eq!(a.vulnerability_windows(&grid, 0.05).unwrap(), b.vulnerability_windows(&grid, 0.05).unwrap());
    }

    #[test]
    fn simulation_is_deterministic(seed in any::<u64>()) {
        let (s, _, _, _) = common::with_lagged_sigmoid(common::random_disruption_scenario(seed, 0.05), seed);
        prop_assert_eq!(simulate(&s).unwrap(), simulate(&s).unwrap());
    }

    #[test]
    fn collapse_never_precedes_lag_window(
        values in proptest::collection::vec(0.0..=1.0f64, 1..60),
        theta in 0.05..0.5f64, gap in 0.01..0.45f64,
    ) {
        let traj = Trajectory::new("X", &TimeGrid::covering(0.0, (values.len() - 1) as f64 * 0.1, 0.1), values);
        let tc = detect_collapse_point(&traj, theta).unwrap();
        let lw = detect_lag_window(&traj, theta + gap).unwrap();
        if let (Some(tc), Some(lw)) = (tc.value(), lw.value()) {
            prop_assert!(tc >= lw);
        }
    }

    #[test]
    fn correlation_is_affine_invariant(
        a in proptest::collection::vec(0.0..1.0f64, 5..50),
        scale in 0.01..100.0f64, shift in -10.0..10.0f64, seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = TimeGrid::covering(0.0, (a.len() - 1) as f64, 1.0);
        let b: Vec<f64> = a.iter().map(|x| x * 0.5 + rng.random_range(0.0..0.5)).collect();
        let rescaled: Vec<f64> = a.iter().map(|x| scale * x + shift).collect();
        let (ta, tb, tr) = (Trajectory::new("A", &g, a), Trajectory::new("B", &g, b), Trajectory::new("A", &g, rescaled));
        let before = response_covariance(&[&ta, &tb], 0.8).unwrap().correlation[0][1];
        let after = response_covariance(&[&tr, &tb], 0.8).unwrap().correlation[0][1];
        prop_assert!((before - after).abs() < 1e-9);
    }

    #[test]
    fn deterrence_argmax_is_scale_invariant(
        comps in proptest::collection::vec((0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64), 1..20),
        w in (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64), c in 0.001..1000.0f64,
    ) {
        let base = DeterrenceWeights { alpha: w.0, beta: w.1, gamma: w.2 };
        let scaled = DeterrenceWeights { alpha: c * w.0, beta: c * w.1, gamma: c * w.2 };
        let d = |w: DeterrenceWeights| comps.iter().map(|&(p, v, i)| deterrence_weight(p, v, i, w).unwrap()).collect::<Vec<_>>();
        let (d0, d1) = (d(base), d(scaled));
        let best = (0..d0.len()).fold(0, |b, k| if d0[k] > d0[b] { k } else { b });
        let top = d1.iter().copied().fold(f64::MIN, f64::max);
        prop_assert!(d1[best] >= top - 1e-12 * top.abs().max(1.0));
    }

    #[test]
    fn scz_matches_enumeration(seed in any::<u64>()) {
        let inst = common::random_scz_instance(seed);
        let got: Vec<BTreeSet<String>> = identify_scz(&inst.overlap, &inst.covariance, &inst.lags, inst.thresholds)
            .unwrap()
            .into_iter()
            .map(|c| c.members.into_iter().collect())
            .collect();
        prop_assert_eq!(got, common::scz_by_enumeration(&inst));
    }
}

#[test]
fn clamping_only_matters_after_leaving_the_unit_interval() {
    for (stem, json) in fixtures::ALL {
        let s = Scenario::from_json_str(json).unwrap();
        if s.model != Model::LaggedOde {
            continue;
        }
        let clamped = simulate_ode_with(&s, SimOptions { clamp: true }).unwrap();
        let free = simulate_ode_with(&s, SimOptions { clamp: false }).unwrap();
        for id in s.capability_ids() {
            let (a, b) = (&clamped.trajectory(&id).unwrap().values, &free.trajectory(&id).unwrap().values);
            for k in 0..a.len() {
                if !(0.0..=1.0).contains(&b[k]) {
                    break;
                }
                assert_eq!(a[k], b[k], "{stem}/{id} at step {k}");
            }
        }
    }
}

#[test]
fn surface_is_repeatable() {
    let s = fixtures::monotone_surface_scenario();
    let axis = [0.0, 0.5, 1.0];
    assert_eq!(impact_surface(&s, &axis, &axis, 1).unwrap(), impact_surface(&s, &axis, &axis, 3).unwrap());
    assert_eq!(impact_surface(&s, &axis, &axis, 1).unwrap(), impact_surface(&s, &axis, &axis, 1).unwrap());
}

#[test]
fn threshold_fixture_has_interior_slope_peak() {
    // The cut is absorbed by the constant resilience term until x = 0.3, so S
    // stays flat, then rises steeply and bends over: the largest finite
    // difference sits strictly inside the axis.
    let s = fixtures::threshold_surface_scenario();
    let axis: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
    let surf = impact_surface(&s, &axis, &[0.0, 1.0], 1).unwrap();
    let col: Vec<f64> = surf.suppression.iter().map(|r| r[0].unwrap()).collect();
    let diffs: Vec<f64> = col.windows(2).map(|w| w[1] - w[0]).collect();
    let peak = (0..diffs.len()).fold(0, |b, k| if diffs[k] > diffs[b] { k } else { b });
    assert!(peak > 0 && peak < diffs.len() - 1, "peak at {peak}: {diffs:?}");
    assert!(col[..6].iter().all(|&v| v == 0.0), "{col:?}");
}
