//! Eigenvalue counting for singular linear Hamiltonian systems
//! J y' = (B0(x) + λ B1(x)) y by renormalized oscillation theory: the number
//! of eigenvalues of a self-adjoint realization on [λ1, λ2) equals the Maslov
//! index of a pair of Lagrangian paths (a λ1-frame from the left boundary
//! against a λ2-frame from the right), computed as the spectral flow of a
//! unitary matrix through -1.
//!
//! The pieces: endpoint classification (limit point / limit circle / limit-m)
//! from the eigenvalue curves of the Niessen matrices, boundary frames from
//! limiting eigenvectors, frame transport with conservation monitoring, the
//! spectral-flow engine, and independent Prüfer / finite-difference oracles.

pub mod cli;
pub mod config;
pub mod count;
pub mod endpoint;
pub mod error;
pub mod expr;
pub mod maslov;
pub mod numerics;
pub mod oracle;
pub mod propagate;
pub mod system;

pub use error::{Error, Result};
pub use numerics::{CMatrix, Tolerances, C64};

/// CLI entry point; returns the process exit code.
pub fn run_cli() -> i32 {
    config::cli_main()
}
