// Copyright 2026 rydeit Contributors
// SPDX-License-Identifier: Apache-2.0

//! Steady-state simulation of cooperative optical nonlinearity in
//! Rydberg-EIT ensembles.
//!
//! The physics pipeline: build the two-atom (or single-atom) ladder
//! Hamiltonian and its dissipation channels ([`pair`]), solve the
//! Lindblad steady state directly ([`lindblad`]), convert the reduced
//! probe coherence to a complex susceptibility and transmission
//! ([`spectra`]), average over the nearest-neighbour distance
//! distribution ([`ensemble`]), model ion-induced Stark shifts by Monte
//! Carlo ([`ionmc`]), and extract densities and cubic nonlinearities by
//! least squares ([`fitting`]).
//!
//! The crate is `no_std` (with `alloc`): everything here is pure
//! computation over small dense complex matrices, safe to call from
//! concurrent sweeps. File formats and the command-line front end live
//! in the companion `rydeit-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod ensemble;
pub mod error;
pub mod fitting;
pub mod ionmc;
pub mod linalg;
pub mod lindblad;
pub mod pair;
pub mod spectra;
pub mod units;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = core::result::Result<T, Error>;
