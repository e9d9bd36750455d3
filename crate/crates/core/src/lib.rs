//! Simulator for adiabatic quantum computation with networks of Kerr
//! parametric oscillators (KPOs).
//!
//! Ising problems are encoded in a driven KPO network whose effective
//! Hamiltonian is swept from a detuned, unpumped start to a strongly pumped
//! end where each oscillator settles into a coherent state `±α`. The crate
//! covers the Fock-space algebra, the time-dependent Hamiltonian,
//! Schrödinger and quantum-jump integration, quadrature-sign readout,
//! low-energy spectra along the sweep, and the experiment driver behind the
//! `kpo-aqc` binary.

pub mod driver;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod hamiltonian;
pub mod ising;
pub mod readout;
pub mod spectrum;

pub use error::{Error, Result};
