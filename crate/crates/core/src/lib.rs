//! Hardware-inspired circuit cutting.
//!
//! The pipeline punctures a calibrated coupling map into low-noise islands,
//! sweeps device constraints through a gate-and-wire cut finder, scores the
//! resulting subcircuit placements, and verifies chosen strategies by
//! quasi-probability reconstruction on an embedded simulator.

pub mod circuit;
pub mod cut;
pub mod experiments;
pub mod fixtures;
pub mod hardware;
pub mod layout;
pub mod puncture;
pub mod qpd;
pub mod select;
pub mod sim;
