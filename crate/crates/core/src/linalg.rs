//! Dense helpers shared by the quantum and classical generators.
//!
//! Both callers hand in a square generator `m`, a left null row `trace_row`
//! (the trace functional for Liouvillians, all ones for rate matrices) and
//! the index of a row that lies in the support of `trace_row`. That row is
//! replaced by the trace functional, which turns the singular generator
//! into an invertible matrix whenever the null space is one-dimensional.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{KurError, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative threshold on singular values used for the uniqueness check.
pub const SINGULAR_TOL: f64 = 1e-10;

/// Replace row `row` of `m` by `trace_row`.
fn bordered(m: &CMatrix, trace_row: &CVector, row: usize) -> CMatrix {
    let mut b = m.clone();
    for j in 0..m.ncols() {
        b[(row, j)] = trace_row[j];
    }
    b
}

/// Checks that `m` has exactly one (numerically) zero singular value.
pub(crate) fn check_unique_null(m: &CMatrix) -> Result<()> {
    let sv = m.clone().singular_values();
    let mut sorted: Vec<f64> = sv.iter().copied().collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let norm = sorted.last().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let threshold = SINGULAR_TOL * norm;
    if sorted[0] > threshold {
        return Err(KurError::NoStationaryState { sigma: sorted[0], threshold });
    }
    if sorted.len() > 1 && sorted[1] < threshold {
        return Err(KurError::DegenerateSteadyState { sigma: sorted[1], threshold });
    }
    Ok(())
}

/// Unit-trace right null vector of `m`.
pub(crate) fn stationary_vector(m: &CMatrix, trace_row: &CVector, row: usize) -> Result<CVector> {
    check_unique_null(m)?;
    let b = bordered(m, trace_row, row);
    let mut rhs = CVector::zeros(m.nrows());
    rhs[row] = Complex64::new(1.0, 0.0);
    b.lu().solve(&rhs).ok_or(KurError::DegenerateSteadyState { sigma: 0.0, threshold: 0.0 })
}

/// Drazin inverse `(I - P) M^{-1} (I - P)` with `P = |stationary><trace_row|`.
///
/// Each column solves `m y = (I - P) e_j` with the constraint `trace_row . y = 0`
/// imposed through the bordered row, then gets projected once more.
pub(crate) fn drazin(m: &CMatrix, stationary: &CVector, trace_row: &CVector, row: usize) -> Result<CMatrix> {
    let n = m.nrows();
    let projector = complement_projector(stationary, trace_row);
    let lu = bordered(m, trace_row, row).lu();
    let mut rhs = projector.clone();
    for j in 0..n {
        rhs[(row, j)] = Complex64::new(0.0, 0.0);
    }
    let y = lu.solve(&rhs).ok_or(KurError::DegenerateSteadyState { sigma: 0.0, threshold: 0.0 })?;
    Ok(&projector * y)
}

/// `I - |stationary><trace_row|`.
pub(crate) fn complement_projector(stationary: &CVector, trace_row: &CVector) -> CMatrix {
    let n = stationary.len();
    CMatrix::identity(n, n) - stationary * trace_row.transpose()
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
