//! Simulator and verification harness for gate-teleportation-based
//! universal blind quantum computation (GTUBQC).
//!
//! The protocol has four parties: a trusted center preparing states, a
//! client holding all keys, and two non-communicating servers performing
//! delegated rotations and Bell measurements. This crate simulates the
//! protocol exactly at desk scale, tracks Pauli by-product frames through
//! teleported encrypted rotations, runs the entanglement-swapping honesty
//! test, and audits blindness by exact key enumeration.

pub mod error;
pub mod qcore;
pub mod rotations;
pub mod pauli_frame;
pub mod teleport;
pub mod protocol;
pub mod verify;
pub mod apps_qft;

pub use error::Error;
