//! Serial double quantum dot between two fermionic leads.
//!
//! Occupation basis `{|00>, |10>, |01>, |11>}` with `|n_L n_R> =
//! (c_L^dagger)^{n_L} (c_R^dagger)^{n_R} |00>`. With L ordered before R the
//! Jordan-Wigner string sits on `c_R`: `c_L = |00><10| + |01><11|` and
//! `c_R = |00><01| - |10><11|`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ket_bra;
use crate::classical::{
    adiabatic_eliminate, change_basis, classical_activity, classical_steady_state, perturbative_interdot_rate,
    RateModel, TransitionWeights,
};
use crate::counting::CountingScheme;
use crate::error::{invalid, Result};
use crate::linalg::CMatrix;
use crate::superop::{Channel, OpenSystemModel};

pub const EMPTY: usize = 0;
pub const LEFT: usize = 1;
pub const RIGHT: usize = 2;
pub const DOUBLE: usize = 3;

/// Channel indices of [`build_dqd`].
pub const CH_IN_L: usize = 0;
pub const CH_OUT_L: usize = 1;
pub const CH_IN_R: usize = 2;
pub const CH_OUT_R: usize = 3;
pub const CH_DEPHASING: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DqdParams {
    pub gamma_l: f64,
    pub gamma_r: f64,
    /// Local dephasing rate Gamma.
    pub dephasing: f64,
    /// Coherent interdot tunnel coupling.
    pub g: f64,
    pub epsilon: f64,
    pub beta_l: f64,
    pub beta_r: f64,
    pub mu_l: f64,
    pub mu_r: f64,
}

impl Default for DqdParams {
    /// `beta_L mu_L = -beta_R mu_R = 7`, `epsilon = 0`, `gamma_L = gamma_R = g = 1`, no dephasing.
    fn default() -> Self {
        Self {
            gamma_l: 1.0,
            gamma_r: 1.0,
            dephasing: 0.0,
            g: 1.0,
            epsilon: 0.0,
            beta_l: 1.0,
            beta_r: 1.0,
            mu_l: 7.0,
            mu_r: -7.0,
        }
    }
}

fn fermi(beta: f64, energy: f64) -> f64 {
    1.0 / ((beta * energy).exp() + 1.0)
}

impl DqdParams {
    pub fn with_g(self, g: f64) -> Self {
        Self { g, ..self }
    }

    pub fn with_dephasing(self, dephasing: f64) -> Self {
        Self { dephasing, ..self }
    }

    pub fn f_l(&self) -> f64 {
        fermi(self.beta_l, self.epsilon - self.mu_l)
    }

    pub fn f_r(&self) -> f64 {
        fermi(self.beta_r, self.epsilon - self.mu_r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_l > 0.0 && self.gamma_r > 0.0) {
            return Err(invalid("gamma_L and gamma_R must be positive"));
        }
        if !(self.dephasing >= 0.0) {
            return Err(invalid("dephasing rate must be nonnegative"));
        }
        if !self.g.is_finite() || !self.epsilon.is_finite() {
            return Err(invalid("g and epsilon must be finite"));
        }
        for f in [self.f_l(), self.f_r()] {
            if !(f > 0.0 && f < 1.0) {
                return Err(invalid(format!("Fermi occupation {f} outside (0, 1)")));
            }
        }
        Ok(())
    }
}

/// Fermionic operators in the occupation basis.
pub struct DqdOperators {
    pub c_l: CMatrix,
    pub c_r: CMatrix,
    pub n_l: CMatrix,
    pub n_r: CMatrix,
}

pub fn dqd_operators() -> DqdOperators {
    let c_l = ket_bra(4, EMPTY, LEFT) + ket_bra(4, RIGHT, DOUBLE);
    let c_r = ket_bra(4, EMPTY, RIGHT) - ket_bra(4, LEFT, DOUBLE);
    let n_l = c_l.adjoint() * &c_l;
    let n_r = c_r.adjoint() * &c_r;
    DqdOperators { c_l, c_r, n_l, n_r }
}

/// Named currents of the DQD.
#[derive(Debug, Clone, PartialEq)]
pub struct DqdSchemes {
    /// Net electron flow from the left lead (jump).
    pub through: CountingScheme,
    /// Electrons entering from the left lead only (jump).
    pub in_only: CountingScheme,
    /// Continuous charge-difference measurement (diffusive).
    pub charge_diff: CountingScheme,
}

impl DqdSchemes {
    pub fn get(&self, name: &str) -> Option<&CountingScheme> {
        match name {
            "through" => Some(&self.through),
            "in-only" => Some(&self.in_only),
            "charge-diff" => Some(&self.charge_diff),
            _ => None,
        }
    }
}

pub fn build_dqd(p: &DqdParams) -> Result<(OpenSystemModel, DqdSchemes)> {
    p.validate()?;
    let ops = dqd_operators();
    let (fl, fr) = (p.f_l(), p.f_r());
    let hop = ops.c_l.adjoint() * &ops.c_r;
    let h = (&ops.n_l + &ops.n_r).map(|z| z * p.epsilon) + (&hop + hop.adjoint()).map(|z| z * p.g);
    let scaled = |m: &CMatrix, rate: f64| m.map(|z| z * rate.sqrt());
    let channels = vec![
        Channel::new("in_L", scaled(&ops.c_l.adjoint(), p.gamma_l * fl)),
        Channel::new("out_L", scaled(&ops.c_l, p.gamma_l * (1.0 - fl))),
        Channel::new("in_R", scaled(&ops.c_r.adjoint(), p.gamma_r * fr)),
        Channel::new("out_R", scaled(&ops.c_r, p.gamma_r * (1.0 - fr))),
        Channel::new("dephasing", scaled(&(&ops.n_l - &ops.n_r), p.dephasing / 2.0)),
    ];
    let model = OpenSystemModel::new(h, channels)?;
    let schemes = DqdSchemes {
        through: CountingScheme::jump(vec![1.0, -1.0, 0.0, 0.0, 0.0])?,
        in_only: CountingScheme::jump(vec![1.0, 0.0, 0.0, 0.0, 0.0])?,
        charge_diff: CountingScheme::diffusive(vec![0.0, 0.0, 0.0, 0.0, 1.0], vec![0.0; 5])?,
    };
    Ok((model, schemes))
}

/// Closed-form steady state and statistics of the DQD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DqdReference {
    /// `[p_0, p_L, p_R, p_D]`.
    pub populations: [f64; 4],
    /// `<10| rho |01>`.
    pub alpha: Complex64,
    pub current: f64,
    pub activity: f64,
    pub noise_jump: f64,
    pub psi_jump: f64,
    pub psi_diff: f64,
    /// Only available without dephasing.
    pub psi_in_only: Option<f64>,
    pub current_diff: f64,
    /// l1 coherence `|alpha| + |alpha^*|` in the occupation basis, written as
    /// `2 g |f_L - f_R| |psi| / (gamma_L + gamma_R + 2 Gamma)`.
    pub coherence: f64,
    /// `2 g |f_L - f_R| |psi| / (gamma_L + gamma_R + Gamma)`; agrees with
    /// `coherence` only when `Gamma = 0`.
    pub coherence_gamma_sum_form: f64,
    pub interdot_rate: f64,
    pub noise_classical: f64,
    /// `A + (W_LR - Gamma/2)(p_L + p_R)`.
    pub activity_classical: f64,
}

pub fn dqd_analytic(p: &DqdParams) -> DqdReference {
    let (gl, gr, gam, g) = (p.gamma_l, p.gamma_r, p.dephasing, p.g);
    let (fl, fr) = (p.f_l(), p.f_r());
    let gsum = gl + gr;
    let g2 = g * g;
    let sdeph = gsum + 2.0 * gam;
    let den = 4.0 * g2 * gsum + gl * gr * sdeph;
    let fbar = (fl * gl + fr * gr) / gsum;

    let p0 = (4.0 * g2 * (1.0 - fbar).powi(2) * gsum + (1.0 - fl) * (1.0 - fr) * gl * gr * sdeph) / den;
    let pd = (4.0 * g2 * fbar * fbar * gsum + fl * fr * gl * gr * sdeph) / den;
    let pl = (4.0 * g2 * fbar * (1.0 - fbar) * gsum + fl * (1.0 - fr) * gl * gr * sdeph) / den;
    let pr = (4.0 * g2 * fbar * (1.0 - fbar) * gsum + (1.0 - fl) * fr * gl * gr * sdeph) / den;
    let alpha = Complex64::new(0.0, 2.0 * g * (fl - fr) * gl * gr / den);

    let current = 4.0 * g2 * (fl - fr) * gl * gr / den;
    // reservoir jumps plus dephasing jumps at rate Gamma/2 (p_L + p_R)
    let activity = (8.0 * g2 * gsum * gsum * fbar * (1.0 - fbar)
        + gl * gr * sdeph * (2.0 * gl * fl * (1.0 - fl) + 2.0 * gr * fr * (1.0 - fr)))
        / den
        + 0.5 * gam * (pl + pr);
    let psi_jump = -2.0 * gl * gr * sdeph / den;
    let psi_diff = 8.0 * g2 * gsum / den;
    let psi_in_only = (gam == 0.0).then(|| {
        8.0 * g2 * (fl - fr) * gl * gr * gr
            / ((4.0 * g2 + gl * gr) * ((fl - 1.0) * gl * gr * gsum + 4.0 * g2 * ((fl - 1.0) * gl + (fr - 1.0) * gr)))
    });
    let current_diff = (2.0 * gam).sqrt() * (fl - fr) * gl * gr * sdeph / den;
    let coherence = 2.0 * g * (fl - fr).abs() / sdeph * psi_jump.abs();
    let coherence_gamma_sum_form = 2.0 * g * (fl - fr).abs() / (gsum + gam) * psi_jump.abs();
    let interdot_rate = 4.0 * g2 / sdeph;
    let poisson = 4.0 * g2 * (fl + fr - 2.0 * fl * fr) * gl * gr / den;
    let lead_sq = gl * gl + gl * gr + gr * gr;
    let noise_classical = poisson - 2.0 * current * current * (4.0 * g2 * gsum + sdeph * lead_sq) / (gsum * den);
    let noise_jump = noise_classical - 4.0 * current * current * gl * gr / den;
    let activity_classical = activity + (interdot_rate - gam / 2.0) * (pl + pr);

    DqdReference {
        populations: [p0, pl, pr, pd],
        alpha,
        current,
        activity,
        noise_jump,
        psi_jump,
        psi_diff,
        psi_in_only,
        current_diff,
        coherence,
        coherence_gamma_sum_form,
        interdot_rate,
        noise_classical,
        activity_classical,
    }
}

/// Classical rate model with the coherent hopping replaced by `W_LR`, and
/// the weights of the net current from the left lead.
pub fn dqd_classical(p: &DqdParams) -> Result<(RateModel, TransitionWeights)> {
    p.validate()?;
    let (fl, fr) = (p.f_l(), p.f_r());
    let (gl, gr) = (p.gamma_l, p.gamma_r);
    let w_lr = perturbative_interdot_rate(p.g, gl, gr, p.dephasing)?;
    let mut rates = DMatrix::zeros(4, 4);
    rates[(LEFT, EMPTY)] = fl * gl;
    rates[(RIGHT, EMPTY)] = fr * gr;
    rates[(EMPTY, LEFT)] = (1.0 - fl) * gl;
    rates[(EMPTY, RIGHT)] = (1.0 - fr) * gr;
    rates[(DOUBLE, LEFT)] = fr * gr;
    rates[(DOUBLE, RIGHT)] = fl * gl;
    rates[(LEFT, DOUBLE)] = (1.0 - fr) * gr;
    rates[(RIGHT, DOUBLE)] = (1.0 - fl) * gl;
    rates[(LEFT, RIGHT)] = w_lr;
    rates[(RIGHT, LEFT)] = w_lr;
    let labels = ["0", "L", "R", "D"].iter().map(|s| s.to_string()).collect();
    let rm = RateModel::from_rates(rates, labels)?;
    let weights = TransitionWeights::from_entries(
        4,
        &[(LEFT, EMPTY, 1.0), (DOUBLE, RIGHT, 1.0), (EMPTY, LEFT, -1.0), (RIGHT, DOUBLE, -1.0)],
    )?;
    Ok((rm, weights))
}

/// `[p_0, p_L, p_R, p_D] -> [p_0, p_L + p_R, p_L - p_R, p_D]`.
pub fn sum_difference_basis() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        4,
        4,
        &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 1.0, 0.0, //
            0.0, 1.0, -1.0, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        ],
    )
}

/// Three-state model `[p_0, p_L + p_R, p_D]` obtained by eliminating `p_L - p_R`,
/// together with its dynamical activity.
pub fn dqd_adiabatic(p: &DqdParams, gap_ratio: f64) -> Result<(RateModel, f64)> {
    let (rm, _) = dqd_classical(p)?;
    let w_tilde = change_basis(rm.matrix(), &sum_difference_basis())?;
    let labels = ["0", "+", "D"].iter().map(|s| s.to_string()).collect();
    let reduced = adiabatic_eliminate(&w_tilde, 2, labels, gap_ratio)?;
    let pr = classical_steady_state(&reduced)?;
    let activity = classical_activity(&reduced, &pr);
    Ok((reduced, activity))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_fermi_functions() {
        let p = DqdParams::default();
        assert!((p.f_l() - 1.0 / ((-7.0f64).exp() + 1.0)).abs() < 1e-15);
        assert!((p.f_l() - p.f_r() - (3.5f64).tanh()).abs() < 1e-15);
    }

    #[test]
    fn reference_point_values() {
        let r = dqd_analytic(&DqdParams::default());
        assert!((r.psi_jump + 0.4).abs() < 1e-15);
        assert!((r.current - 0.4 * (3.5f64).tanh()).abs() < 1e-15);
        assert!((r.current - 0.399271).abs() < 1e-6);
        let diff = dqd_analytic(&DqdParams::default().with_dephasing(1.0));
        assert!((diff.psi_diff - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn l1_coherence_is_twice_alpha() {
        for &(g, gam) in &[(0.1, 0.0), (1.0, 0.3), (5.0, 1.0)] {
            let r = dqd_analytic(&DqdParams::default().with_g(g).with_dephasing(gam));
            assert!((r.coherence - 2.0 * r.alpha.norm()).abs() < 1e-14);
        }
        let r = dqd_analytic(&DqdParams::default());
        assert!((r.coherence_gamma_sum_form - r.coherence).abs() < 1e-15);
        let r = dqd_analytic(&DqdParams::default().with_dephasing(1.0));
        assert!((r.coherence_gamma_sum_form - r.coherence).abs() > 1e-3);
    }

    #[test]
    fn operators_anticommute() {
        let ops = dqd_operators();
        let anti = |a: &CMatrix, b: &CMatrix| a * b + b * a;
        let id = CMatrix::identity(4, 4);
        assert!(crate::linalg::max_abs(&(anti(&ops.c_l, &ops.c_l.adjoint()) - &id)) < 1e-15);
        assert!(crate::linalg::max_abs(&(anti(&ops.c_r, &ops.c_r.adjoint()) - &id)) < 1e-15);
        assert!(crate::linalg::max_abs(&anti(&ops.c_l, &ops.c_r)) < 1e-15);
        assert!(crate::linalg::max_abs(&anti(&ops.c_l, &ops.c_r.adjoint())) < 1e-15);
    }

    #[test]
    fn invalid_params_rejected() {
        let p = DqdParams { gamma_l: 0.0, ..DqdParams::default() };
        assert!(build_dqd(&p).is_err());
        let p = DqdParams { dephasing: -1.0, ..DqdParams::default() };
        assert!(build_dqd(&p).is_err());
        let p = DqdParams { mu_l: 1e4, ..DqdParams::default() };
        assert!(p.validate().is_err());
    }
}
