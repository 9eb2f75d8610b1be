//! Bundled synthetic inputs.

use crate::circuit::qasm::{parse_qasm, QasmError};
use crate::circuit::Circuit;
use crate::hardware::{CalibrationError, CalibrationSnapshot};

/// 27-qubit heavy-hex device with mildly heterogeneous rates.
pub const FALCON27: &str = include_str!("../fixtures/falcon27.json");
/// 27-qubit heavy-hex device with a noisy band that splits it into 11- and
/// 9-qubit islands at `z_v = 1.0`, `z_e = 3.0`.
pub const HEAVY_HEX_ISLANDS: &str = include_str!("../fixtures/heavy_hex_islands.json");
/// Uniform 9-qubit line with one bad readout in the middle.
pub const LINE9_ISLANDS: &str = include_str!("../fixtures/line9_islands.json");
/// Mirrored QAOA on a 12-qubit path, one layer, γ = 0.4, β = 0.3.
pub const QAOA12_MIRRORED: &str = include_str!("../fixtures/qaoa12_mirrored.qasm");

pub const CALIBRATIONS: [(&str, &str); 3] =
    [("falcon27", FALCON27), ("heavy_hex_islands", HEAVY_HEX_ISLANDS), ("line9_islands", LINE9_ISLANDS)];

pub const CIRCUITS: [(&str, &str); 1] = [("qaoa12_mirrored", QAOA12_MIRRORED)];

pub fn calibration(name: &str) -> Option<Result<CalibrationSnapshot, CalibrationError>> {
    CALIBRATIONS.iter().find(|(n, _)| *n == name).map(|(_, text)| CalibrationSnapshot::from_json(text))
}

pub fn circuit(name: &str) -> Option<Result<Circuit, QasmError>> {
    CIRCUITS.iter().find(|(n, _)| *n == name).map(|(_, text)| parse_qasm(text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_bundled_inputs_load() {
        for (name, _) in CALIBRATIONS {
            calibration(name).unwrap().unwrap();
        }
        for (name, _) in CIRCUITS {
            circuit(name).unwrap().unwrap();
        }
        assert!(calibration("nope").is_none());
    }
}
