//! Truncated-Fock-space simulation of continuous-variable coherent-state
//! teleportation assisted by inconclusive photon subtraction (IPS) on a
//! twin beam.
//!
//! A twin beam |twb⟩⟩ = √(1−x²) Σ xⁿ |n,n⟩ is mixed with vacuum on two beam
//! splitters of transmissivity τ; the reflected arms hit ON/OFF detectors of
//! efficiency η and a double click heralds the IPS state. That state then
//! drives a Braunstein-Kimble teleporter for coherent states. Every closed
//! form along the way (click probability, photon correlations, average
//! fidelity, improvement and security thresholds) is paired with a
//! brute-force density-operator route so each can be checked against the
//! other at desk scale.
//!
//! Modules follow the pipeline:
//!
//! - [`fock`] — dense states/operators on truncated Fock spaces
//! - [`optics`] — twin beams, coherent states, beam splitters, displacement
//! - [`ips`] — ON/OFF POVMs, click probability, the conditional IPS state
//! - [`analysis`] — entanglement entropy, photon moments, number squeezing
//! - [`teleport`] — heterodyne conditioning, fidelities, quadrature averages
//! - [`thresholds`] — improvement/security root finding
//! - [`sweep`] — parameter sweeps and CSV/JSON emission
//! - [`verify`] — the end-to-end oracle-equivalence suite
//!
//! See the crate examples for runnable walkthroughs of each capability, or
//! the `ips-teleport` binary (`eval`, `sweep`, `verify`) for the command-line
//! front end.

pub mod analysis;
pub mod error;
pub mod fock;
pub mod ips;
pub mod optics;
pub mod sweep;
pub mod teleport;
pub mod thresholds;
pub mod verify;

mod util;

pub use error::{Error, Result};
