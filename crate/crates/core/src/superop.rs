//! Vectorized superoperator algebra.
//!
//! Density matrices are column-stacked: entry `(i, j)` of a `d x d` matrix
//! lives at index `j * d + i`. Under this convention the map
//! `rho -> A rho B` is the `d^2 x d^2` matrix `B^T (x) A`.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, KurError, Result};
use crate::linalg::{self, CMatrix, CVector};

/// Hermiticity tolerance for Hamiltonians (max-abs of `H - H^dagger`).
pub const HAMILTONIAN_HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance used when validating density matrices.
pub const DENSITY_TOL: f64 = 1e-10;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A labeled Lindblad jump operator. Rates are absorbed into the operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub label: String,
    pub op: CMatrix,
}

impl Channel {
    pub fn new(label: impl Into<String>, op: CMatrix) -> Self {
        Self { label: label.into(), op }
    }
}

/// Hamiltonian plus jump operators defining a Lindblad generator.
#[derive(Debug, Clone, PartialEq)]
pub struct OpenSystemModel {
    dim: usize,
    hamiltonian: CMatrix,
    channels: Vec<Channel>,
}

impl OpenSystemModel {
    /// Builds a dissipative model. At least one channel is required.
    pub fn new(hamiltonian: CMatrix, channels: Vec<Channel>) -> Result<Self> {
        if channels.is_empty() {
            return Err(invalid("a model needs at least one channel; use hamiltonian_only for unitary runs"));
        }
        Self::build(hamiltonian, channels)
    }

    /// Purely unitary model. Such a model has no unique steady state in general.
    pub fn hamiltonian_only(hamiltonian: CMatrix) -> Result<Self> {
        Self::build(hamiltonian, Vec::new())
    }

    fn build(hamiltonian: CMatrix, channels: Vec<Channel>) -> Result<Self> {
        let dim = hamiltonian.nrows();
        if dim < 2 || hamiltonian.ncols() != dim {
            return Err(invalid(format!(
                "hamiltonian must be square with dimension >= 2, got {}x{}",
                hamiltonian.nrows(),
                hamiltonian.ncols()
            )));
        }
        let herm_err = linalg::max_abs(&(&hamiltonian - hamiltonian.adjoint()));
        if herm_err > HAMILTONIAN_HERMITIAN_TOL {
            return Err(invalid(format!("hamiltonian is not Hermitian (deviation {herm_err:.3e})")));
        }
        for ch in &channels {
            if ch.op.nrows() != dim || ch.op.ncols() != dim {
                return Err(invalid(format!("channel '{}' has wrong shape", ch.label)));
            }
        }
        Ok(Self { dim, hamiltonian, channels })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    /// Same model with every jump operator multiplied by `factor`.
    pub fn with_scaled_channels(&self, factor: f64) -> Self {
        let channels = self.channels.iter().map(|c| Channel::new(c.label.clone(), c.op.map(|z| z * factor))).collect();
        Self { dim: self.dim, hamiltonian: self.hamiltonian.clone(), channels }
    }

    /// Same model with channels permuted: new channel `i` is old channel `order[i]`.
    pub fn with_channel_order(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.channels.len()];
        if order.len() != self.channels.len() {
            return Err(invalid("permutation length mismatch"));
        }
        for &i in order {
            if i >= seen.len() || seen[i] {
                return Err(invalid("not a permutation"));
            }
            seen[i] = true;
        }
        let channels = order.iter().map(|&i| self.channels[i].clone()).collect();
        Ok(Self { dim: self.dim, hamiltonian: self.hamiltonian.clone(), channels })
    }
}

/// Validated density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let d = matrix.nrows();
        if d == 0 || matrix.ncols() != d {
            return Err(invalid("density matrix must be square"));
        }
        let herm = linalg::max_abs(&(&matrix - matrix.adjoint()));
        if herm > DENSITY_TOL {
            return Err(invalid(format!("density matrix not Hermitian ({herm:.3e})")));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > DENSITY_TOL {
            return Err(invalid(format!("density matrix trace {tr} != 1")));
        }
        let hermitian = (&matrix + matrix.adjoint()).map(|z| z * 0.5);
        let min_eig = hermitian.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        if min_eig < -DENSITY_TOL {
            return Err(invalid(format!("density matrix has negative eigenvalue {min_eig:.3e}")));
        }
        Ok(Self { matrix: hermitian })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn vectorized(&self) -> CVector {
        vectorize(&self.matrix)
    }

    /// `Tr{O rho}`.
    pub fn expectation(&self, op: &CMatrix) -> Complex64 {
        (op * &self.matrix).trace()
    }
}

/// A `d^2 x d^2` matrix acting on column-stacked `d x d` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    matrix: CMatrix,
    dim: usize,
}

impl Superoperator {
    pub fn from_matrix(matrix: CMatrix, dim: usize) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(invalid(format!("superoperator for d={dim} must be {0}x{0}", dim * dim)));
        }
        Ok(Self { matrix, dim })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { matrix: CMatrix::zeros(dim * dim, dim * dim), dim }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: CMatrix::identity(dim * dim, dim * dim), dim }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self { matrix: self.matrix.map(|z| z * factor), dim: self.dim }
    }

    pub fn apply_vec(&self, v: &CVector) -> CVector {
        &self.matrix * v
    }

    /// Applies the superoperator to a `d x d` matrix.
    pub fn apply(&self, m: &CMatrix) -> CMatrix {
        devectorize(&(&self.matrix * vectorize(m)), self.dim).expect("dimension fixed by construction")
    }

    /// `Tr{S rho}`, i.e. the trace row times `S vec(rho)`.
    pub fn trace_of(&self, rho: &DensityMatrix) -> Complex64 {
        trace_row(self.dim).dot(&(&self.matrix * rho.vectorized()))
    }
}

impl Add for &Superoperator {
    type Output = Superoperator;
    fn add(self, rhs: &Superoperator) -> Superoperator {
        assert_eq!(self.dim, rhs.dim);
        Superoperator { matrix: &self.matrix + &rhs.matrix, dim: self.dim }
    }
}

impl Sub for &Superoperator {
    type Output = Superoperator;
    fn sub(self, rhs: &Superoperator) -> Superoperator {
        assert_eq!(self.dim, rhs.dim);
        Superoperator { matrix: &self.matrix - &rhs.matrix, dim: self.dim }
    }
}

impl Mul for &Superoperator {
    type Output = Superoperator;
    fn mul(self, rhs: &Superoperator) -> Superoperator {
        assert_eq!(self.dim, rhs.dim);
        Superoperator { matrix: &self.matrix * &rhs.matrix, dim: self.dim }
    }
}

/// Column-stacking vectorization.
pub fn vectorize(m: &CMatrix) -> CVector {
    // nalgebra storage is column-major, which is exactly column stacking.
    DVector::from_column_slice(m.as_slice())
}

pub fn devectorize(v: &CVector, dim: usize) -> Result<CMatrix> {
    if v.len() != dim * dim {
        return Err(invalid(format!("vector of length {} cannot form a {dim}x{dim} matrix", v.len())));
    }
    Ok(DMatrix::from_column_slice(dim, dim, v.as_slice()))
}

/// The vectorized trace functional: ones at the diagonal positions.
pub fn trace_row(dim: usize) -> CVector {
    let mut row = CVector::zeros(dim * dim);
    for i in 0..dim {
        row[i * dim + i] = ONE;
    }
    row
}

/// Superoperator of `rho -> a rho b`, i.e. `b^T (x) a`.
pub fn sandwich_superop(a: &CMatrix, b: &CMatrix) -> Result<Superoperator> {
    let d = a.nrows();
    if a.ncols() != d || b.nrows() != d || b.ncols() != d {
        return Err(invalid("sandwich operands must be square with equal dimension"));
    }
    Ok(Superoperator { matrix: b.transpose().kronecker(a), dim: d })
}

fn sandwich(a: &CMatrix, b: &CMatrix) -> Superoperator {
    sandwich_superop(a, b).expect("shapes validated by the model")
}

/// `rho -> -i [H, rho]`.
pub fn hamiltonian_superop(model: &OpenSystemModel) -> Superoperator {
    let id = CMatrix::identity(model.dim, model.dim);
    let h = model.hamiltonian();
    (&sandwich(h, &id) - &sandwich(&id, h)).scale(-I)
}

/// Dissipator `L rho L^dagger - {L^dagger L, rho}/2` of one jump operator.
pub fn dissipator(op: &CMatrix) -> Superoperator {
    let d = op.nrows();
    let id = CMatrix::identity(d, d);
    let ldl = op.adjoint() * op;
    let jump = sandwich(op, &op.adjoint());
    let anti = &sandwich(&ldl, &id) + &sandwich(&id, &ldl);
    &jump - &anti.scale(Complex64::new(0.5, 0.0))
}

/// Sum of all dissipators of the model.
pub fn dissipative_superop(model: &OpenSystemModel) -> Superoperator {
    model.channels().iter().fold(Superoperator::zeros(model.dim), |acc, ch| &acc + &dissipator(&ch.op))
}

/// Lindblad generator of `model`.
pub fn build_liouvillian(model: &OpenSystemModel) -> Superoperator {
    &hamiltonian_superop(model) + &dissipative_superop(model)
}

fn replaced_row(dim: usize) -> usize {
    // index of the (d-1, d-1) entry; always in the support of the trace row
    dim * dim - 1
}

/// Unique steady state of a Liouvillian.
pub fn steady_state(l: &Superoperator) -> Result<DensityMatrix> {
    let d = l.dim;
    let v = linalg::stationary_vector(&l.matrix, &trace_row(d), replaced_row(d))?;
    let residual = (&l.matrix * &v).norm();
    let scale = linalg::max_abs(&l.matrix).max(1.0);
    if residual > DENSITY_TOL * scale {
        return Err(KurError::NumericalInconsistency { quantity: "steady-state residual", residual });
    }
    DensityMatrix::new(devectorize(&v, d)?)
}

/// Drazin inverse `(I - P) L^{MP} (I - P)` with `P = |rho_ss><1|`.
pub fn drazin_inverse(l: &Superoperator, rho_ss: &DensityMatrix) -> Result<Superoperator> {
    let d = l.dim;
    if rho_ss.dim() != d {
        return Err(invalid("steady state dimension does not match the Liouvillian"));
    }
    linalg::check_unique_null(&l.matrix)?;
    let m = linalg::drazin(&l.matrix, &rho_ss.vectorized(), &trace_row(d), replaced_row(d))?;
    Ok(Superoperator { matrix: m, dim: d })
}

/// `I - |rho_ss><1|`.
pub fn complement_projector(rho_ss: &DensityMatrix) -> Superoperator {
    let d = rho_ss.dim();
    Superoperator { matrix: linalg::complement_projector(&rho_ss.vectorized(), &trace_row(d)), dim: d }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn vectorize_stacks_columns() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(3.0), c(4.0)]);
        let v = vectorize(&m);
        assert_eq!(v.as_slice(), &[c(1.0), c(3.0), c(2.0), c(4.0)]);
        let id = vectorize(&CMatrix::identity(2, 2));
        assert_eq!(id.as_slice(), &[c(1.0), c(0.0), c(0.0), c(1.0)]);
    }

    #[test]
    fn devectorize_rejects_bad_length() {
        let v = CVector::zeros(5);
        assert!(matches!(devectorize(&v, 2), Err(KurError::InvalidInput(_))));
    }

    #[test]
    fn sandwich_identity_is_identity() {
        let id = CMatrix::identity(3, 3);
        let s = sandwich_superop(&id, &id).unwrap();
        assert_eq!(s.matrix(), Superoperator::identity(3).matrix());
    }

    #[test]
    fn sandwich_matches_matrix_product() {
        let mut rng = seeded(7);
        let a = random_complex(&mut rng, 3);
        let b = random_complex(&mut rng, 3);
        let rho = random_complex(&mut rng, 3);
        let s = sandwich_superop(&a, &b).unwrap();
        let lhs = s.apply(&rho);
        let rhs = &a * &rho * &b;
        assert!(linalg::max_abs(&(lhs - rhs)) < 1e-12);
    }

    #[test]
    fn sandwich_lowering_maps_excited_to_ground() {
        // sigma_- = |0><1|
        let lower = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        let s = sandwich_superop(&lower, &lower.adjoint()).unwrap();
        let excited = CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.0), c(1.0)]);
        let ground = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        assert_eq!(s.apply(&excited), ground);
    }

    #[test]
    fn sandwich_rejects_mismatched_dims() {
        let a = CMatrix::identity(2, 2);
        let b = CMatrix::identity(3, 3);
        assert!(sandwich_superop(&a, &b).is_err());
    }

    #[test]
    fn non_hermitian_hamiltonian_rejected() {
        let h = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        let l = CMatrix::identity(2, 2);
        let err = OpenSystemModel::new(h, vec![Channel::new("l", l)]).unwrap_err();
        assert!(matches!(err, KurError::InvalidInput(_)));
    }

    #[test]
    fn empty_channels_require_explicit_request() {
        let h = CMatrix::identity(2, 2);
        assert!(OpenSystemModel::new(h.clone(), vec![]).is_err());
        assert!(OpenSystemModel::hamiltonian_only(h).is_ok());
    }

    #[test]
    fn pure_decay_generator() {
        let gamma: f64 = 0.7;
        let op = CMatrix::from_row_slice(2, 2, &[c(0.0), c(gamma.sqrt()), c(0.0), c(0.0)]);
        let model = OpenSystemModel::new(CMatrix::zeros(2, 2), vec![Channel::new("decay", op)]).unwrap();
        let l = build_liouvillian(&model);
        // d/dt rho_11 = -gamma rho_11
        let idx = 3;
        assert!((l.matrix()[(idx, idx)] - c(-gamma)).norm() < 1e-14);
        let rho = steady_state(&l).unwrap();
        assert!((rho.matrix()[(0, 0)] - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn unitary_generator_has_imaginary_spectrum_and_no_unique_state() {
        let h = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
        let model = OpenSystemModel::hamiltonian_only(h).unwrap();
        let l = build_liouvillian(&model);
        for ev in l.matrix().clone().eigenvalues().unwrap().iter() {
            assert!(ev.re.abs() < 1e-12);
        }
        assert!(matches!(steady_state(&l), Err(KurError::DegenerateSteadyState { .. })));
    }

    #[test]
    fn trace_is_left_null_vector() {
        let mut rng = seeded(11);
        for d in 2..5 {
            let model = random_model(&mut rng, d, 3);
            let l = build_liouvillian(&model);
            let row = trace_row(d).transpose() * l.matrix();
            assert!(row.iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn drazin_identities_on_random_model() {
        let mut rng = seeded(3);
        let model = random_model(&mut rng, 3, 4);
        let l = build_liouvillian(&model);
        let rho = steady_state(&l).unwrap();
        let lp = drazin_inverse(&l, &rho).unwrap();
        let q = complement_projector(&rho);
        assert!(linalg::max_abs(&((&l * &lp).matrix() - q.matrix())) < 1e-9);
        assert!(linalg::max_abs(&((&lp * &l).matrix() - q.matrix())) < 1e-9);
        let null_action = lp.apply_vec(&rho.vectorized());
        assert!(null_action.norm() < 1e-10);
        let left = trace_row(3).transpose() * lp.matrix();
        assert!(left.iter().all(|z| z.norm() < 1e-10));
    }

    #[test]
    fn drazin_inverts_nonzero_spectrum() {
        let mut rng = seeded(21);
        let model = random_model(&mut rng, 3, 3);
        let l = build_liouvillian(&model);
        let rho = steady_state(&l).unwrap();
        let lp = drazin_inverse(&l, &rho).unwrap();
        let mut ev_l: Vec<Complex64> = l.matrix().clone().eigenvalues().unwrap().iter().copied().collect();
        let ev_p: Vec<Complex64> = lp.matrix().clone().eigenvalues().unwrap().iter().copied().collect();
        ev_l.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
        // drop the stationary zero
        for lambda in ev_l.iter().skip(1) {
            let inv = lambda.inv();
            let best = ev_p.iter().map(|mu| (mu - inv).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-8 * inv.norm().max(1.0), "missing reciprocal of {lambda}");
        }
    }

    #[test]
    fn density_matrix_validation() {
        let bad_trace = CMatrix::identity(2, 2);
        assert!(DensityMatrix::new(bad_trace).is_err());
        let negative = CMatrix::from_row_slice(2, 2, &[c(1.5), c(0.0), c(0.0), c(-0.5)]);
        assert!(DensityMatrix::new(negative).is_err());
        let ok = CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), c(0.5)]);
        assert!(DensityMatrix::new(ok).is_ok());
    }
}
