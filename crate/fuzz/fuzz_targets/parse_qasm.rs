#![no_main]

use hic_core::circuit::qasm::{emit_qasm, parse_qasm};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(c) = parse_qasm(text) {
        let again = parse_qasm(&emit_qasm(&c)).expect("emitted qasm parses");
        assert_eq!(c.num_qubits(), again.num_qubits());
        assert_eq!(c.len(), again.len());
    }
});
