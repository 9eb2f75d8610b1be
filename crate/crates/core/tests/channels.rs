mod common;

use hic_core::circuit::{Gate, GateKind};
use proptest::prelude::*;

#[test]
fn cz_and_cx_cuts_reproduce_their_channels() {
    for g in [Gate::cz(0, 1), Gate::cx(0, 1)] {
        let (dev, norm) = common::gate_cut_deviation(&g);
        assert!(dev < 1e-12, "{:?}: deviation {dev}", g.kind());
        assert!((norm - 3.0).abs() < 1e-12);
    }
}

#[test]
fn wire_cut_reproduces_identity() {
    let (dev, norm) = common::wire_cut_deviation();
    assert!(dev < 1e-12, "deviation {dev}");
    assert!((norm - 4.0).abs() < 1e-12);
}

#[test]
fn oracle_gates_are_unitary() {
    for k in [GateKind::H, GateKind::S, GateKind::Sdg, GateKind::T, GateKind::Rx, GateKind::Rz] {
        let u = common::unitary_1q(k, 0.37);
        assert!(common::max_abs_diff(&common::mul(&u, &common::dagger(&u)), &common::eye(2)) < 1e-14);
    }
}

proptest! {
    #[test]
    fn rzz_cut_reproduces_channel(theta in -6.3f64..6.3) {
        let (dev, norm) = common::gate_cut_deviation(&Gate::rzz(theta, 0, 1));
        prop_assert!(dev < 1e-12);
        prop_assert!((norm - (1.0 + 2.0 * theta.sin().abs())).abs() < 1e-12);
    }
}
