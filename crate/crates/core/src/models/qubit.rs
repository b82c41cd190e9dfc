//! Coherently driven qubit coupled to a thermal bosonic bath (rotating frame).
//!
//! Basis `{|0>, |1>}` = ground, excited; `sigma_z = |1><1| - |0><0|`,
//! `sigma_- = |0><1|`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ket_bra;
use crate::classical::{RateModel, TransitionWeights};
use crate::counting::CountingScheme;
use crate::error::{invalid, Result};
use crate::superop::{Channel, OpenSystemModel};

pub const CH_ABSORB: usize = 0;
pub const CH_EMIT: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitParams {
    pub kappa: f64,
    pub nbar: f64,
    pub detuning: f64,
    pub omega: f64,
}

impl Default for QubitParams {
    fn default() -> Self {
        Self { kappa: 1.0, nbar: 0.0, detuning: 0.0, omega: 1.0 }
    }
}

impl QubitParams {
    pub fn with_omega(self, omega: f64) -> Self {
        Self { omega, ..self }
    }

    /// `kappa^2 (1 + 2 nbar)^2 + 4 (Delta^2 + 2 Omega^2)`.
    pub fn q(&self) -> f64 {
        let s = 1.0 + 2.0 * self.nbar;
        self.kappa.powi(2) * s * s + 4.0 * (self.detuning.powi(2) + 2.0 * self.omega.powi(2))
    }

    /// Incoherent rate replacing the drive in the classical description.
    pub fn gamma_c(&self) -> f64 {
        let s = 1.0 + 2.0 * self.nbar;
        4.0 * self.kappa * s * self.omega.powi(2) / (self.kappa.powi(2) * s * s + 4.0 * self.detuning.powi(2))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) {
            return Err(invalid("kappa must be positive"));
        }
        if !(self.nbar >= 0.0) {
            return Err(invalid("nbar must be nonnegative"));
        }
        if !self.detuning.is_finite() || !self.omega.is_finite() {
            return Err(invalid("detuning and Rabi frequency must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QubitSchemes {
    /// Net emission into the bath (jump).
    pub emission: CountingScheme,
    /// Homodyne detection at phase pi/2 (diffusive).
    pub homodyne: CountingScheme,
}

impl QubitSchemes {
    pub fn get(&self, name: &str) -> Option<&CountingScheme> {
        match name {
            "emission" => Some(&self.emission),
            "homodyne" => Some(&self.homodyne),
            _ => None,
        }
    }
}

pub fn build_qubit(p: &QubitParams) -> Result<(OpenSystemModel, QubitSchemes)> {
    p.validate()?;
    let lower = ket_bra(2, 0, 1);
    let raise = ket_bra(2, 1, 0);
    let sigma_z = ket_bra(2, 1, 1) - ket_bra(2, 0, 0);
    let sigma_x = &lower + &raise;
    let h = sigma_z.map(|z| z * (p.detuning / 2.0)) + sigma_x.map(|z| z * p.omega);
    let channels = vec![
        Channel::new("absorb", raise.map(|z| z * (p.kappa * p.nbar).sqrt())),
        Channel::new("emit", lower.map(|z| z * (p.kappa * (p.nbar + 1.0)).sqrt())),
    ];
    let model = OpenSystemModel::new(h, channels)?;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let schemes = QubitSchemes {
        emission: CountingScheme::jump(vec![-1.0, 1.0])?,
        homodyne: CountingScheme::diffusive(vec![-1.0, 1.0], vec![half_pi, half_pi])?,
    };
    Ok((model, schemes))
}

/// Closed-form steady state and statistics of the driven qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitReference {
    pub rho00: f64,
    pub rho11: f64,
    pub rho10: Complex64,
    pub rho01: Complex64,
    pub current: f64,
    pub activity: f64,
    pub noise_jump: f64,
    pub psi_jump: f64,
    /// Magnitude of the homodyne current; its sign depends on the drive phase convention.
    pub current_diff_abs: f64,
    pub psi_diff: f64,
    pub gamma_c: f64,
    pub noise_classical: f64,
    /// `(|rho01| + |rho10|) / 2`.
    pub coherence: f64,
}

pub fn qubit_analytic(p: &QubitParams) -> QubitReference {
    let (k, n, d, o) = (p.kappa, p.nbar, p.detuning, p.omega);
    let s = 1.0 + 2.0 * n;
    let q = p.q();
    let o2 = o * o;
    let rho00 = ((1.0 + n) * (q - 8.0 * o2) + 4.0 * s * o2) / (s * q);
    let rho11 = (n * (q - 8.0 * o2) + 4.0 * s * o2) / (s * q);
    let rho10 = Complex64::new(-2.0 * d, -k * s) * (2.0 * o / (s * q));
    let rho01 = Complex64::new(-2.0 * d, k * s) * (2.0 * o / (s * q));
    let current = 4.0 * k * o2 / q;
    let activity = (2.0 * k * n * (1.0 + n) * (q - 8.0 * o2) + 4.0 * k * s * s * o2) / (s * q);
    let nn = n * (1.0 + n);
    let noise_jump = activity
        - 2.0
            * k
            * (nn * (q - 8.0 * o2).powi(3)
                + 16.0 * nn * (q - 8.0 * o2).powi(2) * o2
                + 16.0 * (k * k * s * s * (3.0 + 4.0 * nn) + 4.0 * (-1.0 + 4.0 * nn) * d * d) * o2 * o2)
            / (s * q.powi(3));
    let psi_jump = -2.0 * k * k * s * s / q;
    let current_diff_abs = (4.0 * k * o * ((k * n).sqrt() + (k * (1.0 + n)).sqrt()) / q).abs();
    let psi_diff = (q - 2.0 * k * k * s * s) / q;
    let base = k * k * s * s + 4.0 * d * d;
    let noise_classical = 4.0
        * k
        * o2
        * ((k * k * s.powi(3) + 4.0 * s * d * d).powi(2) + 8.0 * (1.0 + 8.0 * nn) * base * o2 + 64.0 * s * s * o2 * o2)
        / (s * q.powi(3));
    QubitReference {
        rho00,
        rho11,
        rho10,
        rho01,
        current,
        activity,
        noise_jump,
        psi_jump,
        current_diff_abs,
        psi_diff,
        gamma_c: p.gamma_c(),
        noise_classical,
        coherence: 0.5 * (rho01.norm() + rho10.norm()),
    }
}

/// Classical two-state description of the qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitClassical {
    pub rates: RateModel,
    /// Reservoir part of each transition; only these jumps are counted.
    pub counted: DMatrix<f64>,
    pub weights: TransitionWeights,
}

pub fn qubit_classical(p: &QubitParams) -> Result<QubitClassical> {
    p.validate()?;
    let gc = p.gamma_c();
    let up = p.kappa * p.nbar;
    let down = p.kappa * (p.nbar + 1.0);
    let rates = DMatrix::from_row_slice(2, 2, &[0.0, down + gc, up + gc, 0.0]);
    let counted = DMatrix::from_row_slice(2, 2, &[0.0, down, up, 0.0]);
    let labels = vec!["0".to_string(), "1".to_string()];
    Ok(QubitClassical {
        rates: RateModel::from_rates(rates, labels)?,
        counted,
        weights: TransitionWeights::from_entries(2, &[(0, 1, 1.0), (1, 0, -1.0)])?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resonant_drive_population() {
        let r = qubit_analytic(&QubitParams::default());
        assert!((r.rho11 - 4.0 / 9.0).abs() < 1e-15);
        assert!((r.current - 4.0 / 9.0).abs() < 1e-15);
        assert!((r.rho00 + r.rho11 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn undriven_thermal_qubit() {
        let p = QubitParams { omega: 0.0, nbar: 0.4, ..QubitParams::default() };
        assert_eq!(p.gamma_c(), 0.0);
        let r = qubit_analytic(&p);
        assert!(r.current.abs() < 1e-15);
        assert!((r.rho11 - 0.4 / 1.8).abs() < 1e-15);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(build_qubit(&QubitParams { kappa: 0.0, ..QubitParams::default() }).is_err());
        assert!(build_qubit(&QubitParams { nbar: -0.1, ..QubitParams::default() }).is_err());
    }
}
