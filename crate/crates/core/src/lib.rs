//! Spectral toolkit for the PT-symmetric spiked harmonic oscillator
//!
//! ```text
//! H = -d²/dx² + (x - ic)² + G / (x - ic)²,   α = √(G + 1/4),   c > 0
//! ```
//!
//! The crate is split along the lines of the physics:
//!
//! * [`exact`] closed-form spectrum `E = 4n + 2 - 2Qα`, exceptional points,
//!   Laguerre eigenfunctions and degeneracy tables.
//! * [`numgrid`] an independent finite-difference discretization of the
//!   contour Hamiltonian with a dense non-Hermitian eigensolver.
//! * [`blocks`] Jordan canonical forms near the exceptional points, the
//!   leading-order 2×2 block Hamiltonians and Jordan-chain extraction.
//! * [`metric`] metric operators `Θ`, the Dieudonné condition
//!   `H†Θ = ΘH`, factorizations `Θ = Ω†Ω`, observables and Θ-unitary
//!   evolution.

// `!(x > 0.0)` style guards intentionally reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blocks;
pub mod exact;
pub mod linalg;
pub mod metric;
pub mod numgrid;

pub use num_complex::Complex64;

/// Dense complex matrix used throughout the crate.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<Complex64>;
