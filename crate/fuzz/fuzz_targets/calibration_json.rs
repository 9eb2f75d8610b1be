#![no_main]

use hic_core::hardware::CalibrationSnapshot;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(snap) = CalibrationSnapshot::from_json(text) {
        let again = CalibrationSnapshot::from_json(&snap.to_json()).expect("round trip");
        assert_eq!(snap.coupling, again.coupling);
    }
});
