#![no_main]

use libfuzzer_sys::fuzz_target;
use regcap::dynamics::simulate;
use regcap::report::parse_scenario;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok((scenario, _)) = parse_scenario(text) else {
        return;
    };
    // Accepted scenarios must simulate without panicking. Long grids are
    // skipped to keep iterations fast.
    if scenario.grid().len <= 2_000 && scenario.graph.nodes.len() <= 64 {
        let result = simulate(&scenario).expect("validated scenario simulates");
        for traj in result.trajectories.values() {
            assert_eq!(traj.len(), scenario.grid().len);
        }
    }
});
