//! Multipolar electrodynamics of a neutral atom on a periodic lattice.
//!
//! One neutral atom of Gaussian-smeared point charges is coupled to the
//! electromagnetic field on a cubic periodic grid with spectral operators.
//! On top of that substrate the crate builds the polarization and
//! magnetization line-integral fields, Coulomb and Poincare gauge
//! potentials, the minimal-coupling and multipolar Lagrangians and
//! Hamiltonians, and a self-consistent integrator, and then numerically
//! certifies the web of identities connecting them: charge and current
//! from polarization and magnetization, gauge invariance and the
//! gauge-change law, picture equivalence through a total time derivative,
//! the Hamiltonian equality chain, Poincare-gauge reconstruction of the
//! fields, and energy conservation.
//!
//! Start with the runnable examples (`cargo run --release --example
//! smeared_atom`, then the rest of `examples/`); each one demonstrates one
//! capability end to end. The `pzw` binary drives the same machinery from
//! scenario files and writes machine-readable reports: `verify` runs the
//! identity suites, `simulate` integrates and records energy series,
//! `poincare` tabulates line-integral potentials, `report` re-renders
//! saved records.
//!
//! Units are Gaussian-free SI-like with eps0 = mu0 = 1 by default (c = 1);
//! nothing depends on that choice and the constants are plain fields on
//! [`Grid`].

pub mod dynamics;
pub mod error;
pub mod gauges;
pub mod lattice;
pub mod mechanics;
pub mod multipolar;
pub mod quadrature;
pub mod sources;
pub mod tolerances;

pub mod cli;
pub mod report;
pub mod scenario;
pub mod snapshot;

pub use error::{Error, Result};
pub use lattice::{Grid, ScalarField, Spectral, VectorField};
pub use quadrature::SQuadrature;
pub use sources::{ParticleSet, SmearedDelta};
