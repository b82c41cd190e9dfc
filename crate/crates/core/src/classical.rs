//! Classical Markov rate equations `dp/dt = W p`.
//!
//! Column `j` of `W` holds the rates out of state `j`; `W[k][j]` with
//! `k != j` is the rate of the transition `j -> k`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::counting::{CurrentStatistics, MethodTag};
use crate::error::{invalid, KurError, Result};
use crate::linalg::{self, CMatrix, CVector};

/// Default ratio by which the eliminated diagonal entry must dominate the others.
pub const DEFAULT_GAP_RATIO: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RateModel {
    w: DMatrix<f64>,
    labels: Vec<String>,
}

fn scale_of(w: &DMatrix<f64>) -> f64 {
    w.iter().map(|x| x.abs()).fold(1.0, f64::max)
}

impl RateModel {
    /// Validates a full generator: nonnegative off-diagonal rates, zero column sums.
    pub fn new(w: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        let n = w.nrows();
        if n < 2 || w.ncols() != n {
            return Err(invalid("rate matrix must be square with at least two states"));
        }
        if labels.len() != n {
            return Err(invalid("one label per state is required"));
        }
        let tol = 1e-12 * scale_of(&w);
        for j in 0..n {
            for k in 0..n {
                if k != j && w[(k, j)] < -tol {
                    return Err(invalid(format!("negative rate {} for {} -> {}", w[(k, j)], labels[j], labels[k])));
                }
            }
            let col: f64 = w.column(j).sum();
            if col.abs() > tol {
                return Err(invalid(format!("column {} sums to {col:.3e}", labels[j])));
            }
        }
        Ok(Self { w, labels })
    }

    /// Effective generator whose off-diagonal entries may be slightly negative,
    /// as produced by adiabatic elimination. Only the column sums are checked.
    pub fn effective(w: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        let n = w.nrows();
        if n < 2 || w.ncols() != n || labels.len() != n {
            return Err(invalid("effective generator must be square with one label per state"));
        }
        let tol = 1e-10 * scale_of(&w);
        for j in 0..n {
            let col: f64 = w.column(j).sum();
            if col.abs() > tol {
                return Err(invalid(format!("column {} sums to {col:.3e}", labels[j])));
            }
        }
        Ok(Self { w, labels })
    }

    /// Builds the generator from off-diagonal rates; the diagonal is filled in.
    pub fn from_rates(rates: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        let mut w = rates;
        for j in 0..w.ncols() {
            w[(j, j)] = 0.0;
            let out: f64 = w.column(j).sum();
            w[(j, j)] = -out;
        }
        Self::new(w, labels)
    }

    pub fn n(&self) -> usize {
        self.w.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    fn complex(&self) -> CMatrix {
        self.w.map(|x| Complex64::new(x, 0.0))
    }
}

/// Counting weights `nu[k][j]` for transitions `j -> k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionWeights {
    nu: DMatrix<f64>,
}

impl TransitionWeights {
    pub fn new(nu: DMatrix<f64>) -> Result<Self> {
        if nu.nrows() != nu.ncols() {
            return Err(invalid("weight matrix must be square"));
        }
        if (0..nu.nrows()).any(|i| nu[(i, i)] != 0.0) {
            return Err(invalid("diagonal weights must be zero"));
        }
        Ok(Self { nu })
    }

    /// Zero weights except `nu[to][from] = weight` for each listed entry.
    pub fn from_entries(n: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let mut nu = DMatrix::zeros(n, n);
        for &(to, from, weight) in entries {
            if to >= n || from >= n {
                return Err(invalid("transition index out of range"));
            }
            nu[(to, from)] = weight;
        }
        Self::new(nu)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.nu
    }
}

fn ones(n: usize) -> CVector {
    CVector::from_element(n, Complex64::new(1.0, 0.0))
}

/// Stationary distribution of an irreducible chain.
pub fn classical_steady_state(rm: &RateModel) -> Result<DVector<f64>> {
    let n = rm.n();
    let v = linalg::stationary_vector(&rm.complex(), &ones(n), n - 1)?;
    let p = v.map(|z| z.re);
    let tol = 1e-12;
    if p.iter().any(|&x| x < -tol) {
        return Err(KurError::NumericalInconsistency {
            quantity: "negative stationary probability",
            residual: p.min(),
        });
    }
    Ok(p)
}

/// Drazin inverse of the rate matrix, through the same bordered solver as Liouvillians.
pub fn classical_drazin(rm: &RateModel, p: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = rm.n();
    let pc = p.map(|x| Complex64::new(x, 0.0));
    let m = linalg::drazin(&rm.complex(), &pc, &ones(n), n - 1)?;
    Ok(m.map(|z| z.re))
}

/// `sum_{k != j} W[k][j] p[j]`.
pub fn classical_activity(rm: &RateModel, p: &DVector<f64>) -> f64 {
    let w = rm.matrix();
    let mut total = 0.0;
    for j in 0..rm.n() {
        for k in 0..rm.n() {
            if k != j {
                total += w[(k, j)] * p[j];
            }
        }
    }
    total
}

/// Current statistics where every transition `j -> k` carries weight `nu[k][j]`.
pub fn classical_current_stats(rm: &RateModel, weights: &TransitionWeights) -> Result<CurrentStatistics> {
    classical_counted_stats(rm, rm.matrix(), weights)
}

/// Like [`classical_current_stats`], but only the part `counted[k][j] <= W[k][j]`
/// of each transition rate is monitored. Used when a transition merges a
/// monitored reservoir process with an unmonitored effective rate.
pub fn classical_counted_stats(
    rm: &RateModel,
    counted: &DMatrix<f64>,
    weights: &TransitionWeights,
) -> Result<CurrentStatistics> {
    let n = rm.n();
    if counted.shape() != (n, n) || weights.matrix().shape() != (n, n) {
        return Err(invalid("counted rates and weights must match the rate model"));
    }
    let p = classical_steady_state(rm)?;
    let drazin = classical_drazin(rm, &p)?;
    let nu = weights.matrix();
    // classical current superoperator: off-diagonal nu * counted
    let mut jop = DMatrix::zeros(n, n);
    let mut offset = 0.0;
    for j in 0..n {
        for k in 0..n {
            if k != j {
                let c = counted[(k, j)];
                if c < 0.0 || c > rm.matrix()[(k, j)] * (1.0 + 1e-12) + 1e-15 {
                    return Err(invalid(format!("counted rate for {j} -> {k} exceeds the total rate")));
                }
                jop[(k, j)] = nu[(k, j)] * c;
                offset += nu[(k, j)] * nu[(k, j)] * c * p[j];
            }
        }
    }
    let jp = &jop * &p;
    let current = jp.sum();
    let correlation = (&jop * (&drazin * &jp)).sum();
    Ok(CurrentStatistics {
        current,
        noise: offset - 2.0 * correlation,
        activity: classical_activity(rm, &p),
        method: MethodTag::Drazin,
    })
}

/// Effective incoherent tunnel rate `4 g^2 / (gamma_L + gamma_R + 2 Gamma)`.
pub fn perturbative_interdot_rate(g: f64, gamma_l: f64, gamma_r: f64, dephasing: f64) -> Result<f64> {
    let denom = gamma_l + gamma_r + 2.0 * dephasing;
    if !(denom > 0.0) {
        return Err(invalid("gamma_L + gamma_R + 2 Gamma must be positive"));
    }
    Ok(4.0 * g * g / denom)
}

/// `T W T^{-1}`, the generator acting on transformed coordinates `T p`.
pub fn change_basis(w: &DMatrix<f64>, transform: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let inv = transform.clone().try_inverse().ok_or_else(|| invalid("basis change is not invertible"))?;
    Ok(transform * w * inv)
}

/// Eliminates coordinate `fast` of a generator written in a transformed basis.
///
/// `W'[k][j] = W[k][j] - W[k][fast] W[fast][j] / W[fast][fast]` over the
/// retained indices. Effective rates may come out slightly negative. `gap_ratio` bounds `|W[fast][fast]|` from below relative
/// to the largest retained diagonal entry; pass `0.0` to skip the check.
pub fn adiabatic_eliminate(
    w_tilde: &DMatrix<f64>,
    fast: usize,
    labels: Vec<String>,
    gap_ratio: f64,
) -> Result<RateModel> {
    let n = w_tilde.nrows();
    if w_tilde.ncols() != n || fast >= n {
        return Err(invalid("fast index out of range"));
    }
    let pivot = w_tilde[(fast, fast)];
    if pivot == 0.0 {
        return Err(invalid("fast diagonal entry is zero"));
    }
    let slowest = (0..n).filter(|&i| i != fast).map(|i| w_tilde[(i, i)].abs()).fold(0.0, f64::max);
    if pivot.abs() < gap_ratio * slowest {
        return Err(invalid(format!("fast coordinate not separated: |{pivot:.3e}| < {gap_ratio} x {slowest:.3e}")));
    }
    let keep: Vec<usize> = (0..n).filter(|&i| i != fast).collect();
    let reduced = DMatrix::from_fn(keep.len(), keep.len(), |a, b| {
        let (k, j) = (keep[a], keep[b]);
        w_tilde[(k, j)] - w_tilde[(k, fast)] * w_tilde[(fast, j)] / pivot
    });
    let tol = 1e-10 * scale_of(&reduced);
    for j in 0..reduced.ncols() {
        let s = reduced.column(j).sum();
        if s.abs() > tol {
            return Err(KurError::NumericalInconsistency { quantity: "reduced column sum", residual: s.abs() });
        }
    }
    RateModel::effective(reduced, labels)
}
