#![no_main]

use hic_core::cut::CutStrategy;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // Partition is rebuilt and validated; must never panic.
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(s) = CutStrategy::from_json(text) {
            let _ = s.overhead();
        }
    }
});
