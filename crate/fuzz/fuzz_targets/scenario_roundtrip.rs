#![no_main]

use libfuzzer_sys::fuzz_target;
use regcap::scenario::Scenario;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(scenario) = Scenario::from_json_str(text) else {
        return;
    };
    let again = Scenario::from_json_str(&scenario.to_json_string()).expect("serialized scenario parses");
    assert_eq!(again, scenario);
});
