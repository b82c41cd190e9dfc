//! Current observables and their asymptotic statistics.
//!
//! Two independent routes to the noise are provided: the Drazin-inverse
//! formula ([`noise_drazin`]) and finite differences of the leading
//! eigenvalue of the counting-field tilted generator ([`fcs_oracle`]).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, KurError, Result};
use crate::linalg::CMatrix;
use crate::superop::{
    build_liouvillian, sandwich_superop, steady_state, DensityMatrix, OpenSystemModel, Superoperator,
};

/// Largest imaginary part tolerated in a trace that must be real.
pub const IMAG_TOL: f64 = 1e-9;
/// Counting-field step of the five-point stencils.
pub const FCS_STEP: f64 = 3e-2;
/// Minimal separation between the leading and the next eigenvalue.
pub const FCS_GAP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unraveling {
    Jump,
    Diffusive,
}

impl Unraveling {
    pub fn as_str(self) -> &'static str {
        match self {
            Unraveling::Jump => "jump",
            Unraveling::Diffusive => "diffusive",
        }
    }
}

/// Per-channel weights (and phases for homodyne-type detection) defining a current.
#[derive(Debug, Clone, PartialEq)]
pub struct CountingScheme {
    kind: Unraveling,
    weights: Vec<f64>,
    phases: Option<Vec<f64>>,
}

impl CountingScheme {
    pub fn jump(weights: Vec<f64>) -> Result<Self> {
        Self::check_weights(&weights)?;
        Ok(Self { kind: Unraveling::Jump, weights, phases: None })
    }

    pub fn diffusive(weights: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        Self::check_weights(&weights)?;
        if phases.len() != weights.len() {
            return Err(invalid("diffusive scheme needs one phase per weight"));
        }
        Ok(Self { kind: Unraveling::Diffusive, weights, phases: Some(phases) })
    }

    fn check_weights(weights: &[f64]) -> Result<()> {
        if weights.iter().all(|&w| w == 0.0) {
            return Err(invalid("at least one counting weight must be nonzero"));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(invalid("counting weights must be finite"));
        }
        Ok(())
    }

    pub fn kind(&self) -> Unraveling {
        self.kind
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn phases(&self) -> Option<&[f64]> {
        self.phases.as_deref()
    }

    /// Same scheme with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let weights = self.weights.iter().map(|w| w * factor).collect();
        match self.kind {
            Unraveling::Jump => Self::jump(weights),
            Unraveling::Diffusive => Self::diffusive(weights, self.phases.clone().unwrap_or_default()),
        }
    }

    /// `sum_k nu_k^2`, the white-noise offset of a diffusive current.
    pub fn weight_norm_sq(&self) -> f64 {
        self.weights.iter().filter(|w| **w != 0.0).map(|w| w * w).sum()
    }

    pub fn validate_for(&self, model: &OpenSystemModel) -> Result<()> {
        if self.weights.len() != model.channels().len() {
            return Err(invalid(format!(
                "scheme has {} weights but the model has {} channels",
                self.weights.len(),
                model.channels().len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodTag {
    Drazin,
    Fcs,
}

/// Mean current, noise and dynamical activity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurrentStatistics {
    pub current: f64,
    pub noise: f64,
    pub activity: f64,
    pub method: MethodTag,
}

/// Current superoperator of `scheme`.
///
/// Jump: `sum_k nu_k L_k . L_k^dagger`. Diffusive:
/// `sum_k nu_k (e^{-i phi_k} L_k . + . L_k^dagger e^{i phi_k})`.
pub fn current_superop(model: &OpenSystemModel, scheme: &CountingScheme) -> Result<Superoperator> {
    scheme.validate_for(model)?;
    let d = model.dim();
    let id = CMatrix::identity(d, d);
    let mut total = Superoperator::zeros(d);
    for (k, (ch, &nu)) in model.channels().iter().zip(scheme.weights()).enumerate() {
        if nu == 0.0 {
            continue;
        }
        let term = match scheme.kind() {
            Unraveling::Jump => sandwich_superop(&ch.op, &ch.op.adjoint())?.scale(nu.into()),
            Unraveling::Diffusive => {
                let phi = scheme.phases().expect("diffusive schemes carry phases")[k];
                let left = sandwich_superop(&ch.op, &id)?.scale(Complex64::from_polar(nu, -phi));
                let right = sandwich_superop(&id, &ch.op.adjoint())?.scale(Complex64::from_polar(nu, phi));
                &left + &right
            }
        };
        total = &total + &term;
    }
    Ok(total)
}

fn real_part(z: Complex64, tol: f64, quantity: &'static str) -> Result<f64> {
    if z.im.abs() > tol * z.re.abs().max(1.0) {
        return Err(KurError::NumericalInconsistency { quantity, residual: z.im.abs() });
    }
    Ok(z.re)
}

/// `J = Tr{J rho_ss}`.
pub fn mean_current(current_op: &Superoperator, rho_ss: &DensityMatrix) -> Result<f64> {
    real_part(current_op.trace_of(rho_ss), 1e-10, "mean current")
}

/// `A = sum_k Tr{L_k rho L_k^dagger}` over every channel.
pub fn dynamical_activity(model: &OpenSystemModel, rho_ss: &DensityMatrix) -> f64 {
    model.channels().iter().map(|ch| rho_ss.expectation(&(ch.op.adjoint() * &ch.op)).re).sum()
}

/// Asymptotic noise from the Drazin formula.
pub fn noise_drazin(
    model: &OpenSystemModel,
    scheme: &CountingScheme,
    rho_ss: &DensityMatrix,
    drazin: &Superoperator,
) -> Result<f64> {
    let jop = current_superop(model, scheme)?;
    let offset = match scheme.kind() {
        Unraveling::Jump => model
            .channels()
            .iter()
            .zip(scheme.weights())
            .map(|(ch, nu)| nu * nu * rho_ss.expectation(&(ch.op.adjoint() * &ch.op)).re)
            .sum::<f64>(),
        Unraveling::Diffusive => scheme.weight_norm_sq(),
    };
    let correlation = (&(&jop * drazin) * &jop).trace_of(rho_ss);
    let correlation = real_part(correlation, IMAG_TOL, "noise correlation")?;
    Ok(offset - 2.0 * correlation)
}

/// Tilted generator at counting field `chi`.
pub fn tilted_generator(
    model: &OpenSystemModel,
    scheme: &CountingScheme,
    liouvillian: &Superoperator,
    chi: f64,
) -> Result<Superoperator> {
    scheme.validate_for(model)?;
    match scheme.kind() {
        Unraveling::Jump => {
            let mut tilted = liouvillian.clone();
            for (ch, &nu) in model.channels().iter().zip(scheme.weights()) {
                if nu == 0.0 {
                    continue;
                }
                let factor = Complex64::new(0.0, nu * chi).exp() - 1.0;
                tilted = &tilted + &sandwich_superop(&ch.op, &ch.op.adjoint())?.scale(factor);
            }
            Ok(tilted)
        }
        Unraveling::Diffusive => {
            let jd = current_superop(model, scheme)?;
            let shift = -0.5 * chi * chi * scheme.weight_norm_sq();
            let id = Superoperator::identity(model.dim());
            Ok(&(liouvillian + &jd.scale(Complex64::new(0.0, chi))) + &id.scale(shift.into()))
        }
    }
}

/// Eigenvalues sorted by decreasing real part.
fn spectrum(m: &Superoperator) -> Result<Vec<Complex64>> {
    let n = m.matrix().nrows();
    // nalgebra's complex Schur can stall on highly structured generators; loosen gradually
    let schur = [1e-15, 1e-14, 1e-13]
        .iter()
        .find_map(|&eps| nalgebra::Schur::try_new(m.matrix().clone(), eps, 1000 * n))
        .ok_or_else(|| KurError::OracleFailure("Schur iteration did not converge".into()))?;
    let mut eig: Vec<Complex64> = schur
        .eigenvalues()
        .ok_or_else(|| KurError::OracleFailure("eigenvalues unavailable".into()))?
        .iter()
        .copied()
        .collect();
    eig.sort_by(|a, b| b.re.total_cmp(&a.re));
    if eig.len() > 1 && eig[0].re - eig[1].re < FCS_GAP_TOL {
        return Err(KurError::OracleFailure(format!(
            "leading eigenvalue not separated (gap {:.3e})",
            eig[0].re - eig[1].re
        )));
    }
    Ok(eig)
}

/// Leading eigenvalue along `chis`, which must move away from the point where
/// `previous` was taken. Fails when the leading branch is not the continuation
/// of the previous one.
fn track_leading(
    chis: &[f64],
    mut previous: Complex64,
    generator: &impl Fn(f64) -> Result<Superoperator>,
) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(chis.len());
    for &chi in chis {
        let eig = spectrum(&generator(chi)?)?;
        let nearest = eig
            .iter()
            .min_by(|a, b| (**a - previous).norm().total_cmp(&(**b - previous).norm()))
            .copied()
            .unwrap_or(eig[0]);
        if nearest != eig[0] {
            return Err(KurError::OracleFailure(format!("leading eigenvalue crosses another branch at chi = {chi}")));
        }
        previous = eig[0];
        out.push(previous);
    }
    Ok(out)
}

fn stencil(lam: &[Complex64; 5], h: f64) -> (Complex64, Complex64) {
    let first = (lam[0] - 8.0 * lam[1] + 8.0 * lam[3] - lam[4]) / (12.0 * h);
    let second = (-lam[0] + 16.0 * lam[1] - 30.0 * lam[2] + 16.0 * lam[3] - lam[4]) / (12.0 * h * h);
    (first, second)
}

/// Refinements of the stencil step by a factor 3 before giving up.
pub const FCS_REFINEMENTS: usize = 3;
/// Largest relative Richardson correction accepted as resolved.
pub const FCS_RESOLUTION: f64 = 1e-5;

/// Richardson-extrapolated first and second derivatives of the leading
/// eigenvalue at step `h`, with the size of the correction to the `h / 2` stencil.
fn richardson_derivatives(
    zero: Complex64,
    h: f64,
    tilted: &impl Fn(f64) -> Result<Superoperator>,
) -> Result<[(Complex64, f64); 2]> {
    let up = track_leading(&[0.5 * h, h, 2.0 * h], zero, tilted)?;
    let down = track_leading(&[-0.5 * h, -h, -2.0 * h], zero, tilted)?;
    let (c1, c2) = stencil(&[down[2], down[1], zero, up[1], up[2]], h);
    let (f1, f2) = stencil(&[down[1], down[0], zero, up[0], up[1]], 0.5 * h);
    let first = (16.0 * f1 - c1) / 15.0;
    let second = (16.0 * f2 - c2) / 15.0;
    Ok([(first, (first - f1).norm()), (second, (second - f2).norm())])
}

/// Mean current and noise from the leading eigenvalue of the tilted generator.
///
/// Five-point central stencils at `h` and `h / 2`, combined by Richardson
/// extrapolation. Starting from `h = FCS_STEP`, the step is divided by 3 until
/// the Richardson correction is below `FCS_RESOLUTION` in relative terms,
/// separately for each derivative.
pub fn fcs_oracle(model: &OpenSystemModel, scheme: &CountingScheme) -> Result<CurrentStatistics> {
    fcs_oracle_with_step(model, scheme, FCS_STEP)
}

/// [`fcs_oracle`] with an explicit initial stencil step.
pub fn fcs_oracle_with_step(model: &OpenSystemModel, scheme: &CountingScheme, h: f64) -> Result<CurrentStatistics> {
    if !(h > 0.0 && h <= 0.5) {
        return Err(invalid(format!("stencil step must lie in (0, 0.5], got {h}")));
    }
    let liouvillian = build_liouvillian(model);
    let rho = steady_state(&liouvillian)?;
    let tilted = |chi: f64| tilted_generator(model, scheme, &liouvillian, chi);
    let zero = spectrum(&tilted(0.0)?)?[0];
    let scale = crate::linalg::max_abs(liouvillian.matrix()).max(1.0);
    if zero.norm() > 1e-8 * scale {
        return Err(KurError::OracleFailure(format!("untilted leading eigenvalue {zero} is not zero")));
    }
    let mut resolved: [Option<Complex64>; 2] = [None, None];
    let mut step = h;
    for _ in 0..=FCS_REFINEMENTS {
        let derivs = richardson_derivatives(zero, step, &tilted)?;
        for (slot, (value, correction)) in resolved.iter_mut().zip(derivs) {
            if slot.is_none() && correction <= FCS_RESOLUTION * value.norm().max(1e-12 * scale) {
                *slot = Some(value);
            }
        }
        if resolved.iter().all(Option::is_some) {
            break;
        }
        step /= 3.0;
    }
    let [Some(first), Some(second)] = resolved else {
        return Err(KurError::OracleFailure(format!("stencil unresolved down to step {:.3e}", step * 3.0)));
    };
    Ok(CurrentStatistics {
        current: (Complex64::new(0.0, -1.0) * first).re,
        noise: -second.re,
        activity: dynamical_activity(model, &rho),
        method: MethodTag::Fcs,
    })
}

/// Mean current of `scheme` under the deformation `L_k -> sqrt(1 + theta) L_k`.
pub fn deformed_current(model: &OpenSystemModel, scheme: &CountingScheme, theta: f64) -> Result<f64> {
    let deformed = model.with_scaled_channels((1.0 + theta).sqrt());
    let rho = steady_state(&build_liouvillian(&deformed))?;
    // The deformed jump operators already carry the (1+theta) or sqrt(1+theta) prefactor.
    mean_current(&current_superop(&deformed, scheme)?, &rho)
}

/// Central finite difference of the deformed mean current at `theta = 0`.
///
/// Equals `J (1 + psi)` for jump currents and `J (1/2 + psi)` for diffusive
/// ones, up to `O(theta^2)`.
pub fn theta_derivative_check(model: &OpenSystemModel, scheme: &CountingScheme, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= 1e-2) {
        return Err(invalid(format!("theta must lie in (0, 1e-2], got {theta}")));
    }
    let plus = deformed_current(model, scheme, theta)?;
    let minus = deformed_current(model, scheme, -theta)?;
    Ok((plus - minus) / (2.0 * theta))
}

/// Drazin-route statistics for a model whose steady state and Drazin inverse are known.
pub fn drazin_statistics(
    model: &OpenSystemModel,
    scheme: &CountingScheme,
    rho_ss: &DensityMatrix,
    drazin: &Superoperator,
) -> Result<CurrentStatistics> {
    let jop = current_superop(model, scheme)?;
    Ok(CurrentStatistics {
        current: mean_current(&jop, rho_ss)?,
        noise: noise_drazin(model, scheme, rho_ss, drazin)?,
        activity: dynamical_activity(model, rho_ss),
        method: MethodTag::Drazin,
    })
}
