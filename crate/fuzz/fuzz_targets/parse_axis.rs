#![no_main]

use libfuzzer_sys::fuzz_target;
use regcap::analysis::AxisSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(axis) = text.parse::<AxisSpec>() else {
        return;
    };
    let values = axis.values();
    assert_eq!(values.len(), axis.count);
    assert!(values.iter().all(|v| (axis.start..=axis.end).contains(v)));
    assert_eq!(axis.to_string().parse::<AxisSpec>(), Ok(axis));
});
