//! Model catalog: double quantum dot, driven qubit and random networks.

pub mod dqd;
pub mod network;
pub mod qubit;

pub use dqd::{build_dqd, dqd_adiabatic, dqd_analytic, dqd_classical, DqdParams, DqdReference, DqdSchemes};
pub use network::{sample_network, Edge, EdgeKind, NetworkSample, NetworkSpec, RNG_FAMILY};
pub use qubit::{
    build_qubit, qubit_analytic, qubit_classical, QubitClassical, QubitParams, QubitReference, QubitSchemes,
};

use num_complex::Complex64;

use crate::linalg::CMatrix;

/// `|row><col|` in dimension `d`.
pub(crate) fn ket_bra(d: usize, row: usize, col: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(row, col)] = Complex64::new(1.0, 0.0);
    m
}
