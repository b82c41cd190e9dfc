//! Coherence factors and the uncertainty bounds built from them.

use serde::{Deserialize, Serialize};

use crate::counting::{current_superop, drazin_statistics, CountingScheme, CurrentStatistics, Unraveling, IMAG_TOL};
use crate::error::{KurError, Result};
use crate::linalg::CMatrix;
use crate::superop::{
    build_liouvillian, drazin_inverse, hamiltonian_superop, sandwich_superop, steady_state, DensityMatrix,
    OpenSystemModel, Superoperator,
};
use num_complex::Complex64;

/// Currents with `|J|` at or below this are treated as vanishing.
pub const CURRENT_TOL: f64 = 1e-12;
/// Relative slack applied when judging whether a bound holds.
pub const BOUND_SLACK: f64 = 1e-9;

/// `lhs >= rhs` up to `BOUND_SLACK * max(1, |lhs|)`.
pub fn holds_with_slack(lhs: f64, rhs: f64) -> bool {
    lhs - rhs >= -BOUND_SLACK * lhs.abs().max(1.0)
}

fn real_or_err(z: Complex64, quantity: &'static str) -> Result<f64> {
    if z.im.abs() > IMAG_TOL * z.re.abs().max(1.0) {
        return Err(KurError::NumericalInconsistency { quantity, residual: z.im.abs() });
    }
    Ok(z.re)
}

/// `psi = Tr{J L^+ H rho_ss} / J` with `H rho = -i[H, rho]`.
pub fn psi_factor(
    model: &OpenSystemModel,
    scheme: &CountingScheme,
    rho_ss: &DensityMatrix,
    drazin: &Superoperator,
) -> Result<f64> {
    let jop = current_superop(model, scheme)?;
    let current = crate::counting::mean_current(&jop, rho_ss)?;
    if current.abs() <= CURRENT_TOL {
        return Err(KurError::UndefinedPsi { current });
    }
    let h = hamiltonian_superop(model);
    let numerator = real_or_err((&(&jop * drazin) * &h).trace_of(rho_ss), "psi numerator")?;
    Ok(numerator / current)
}

/// The pair of superoperators `(K_L, K_R)` entering the chi factor.
pub fn chi_superops(model: &OpenSystemModel) -> (Superoperator, Superoperator) {
    let d = model.dim();
    let id = CMatrix::identity(d, d);
    let half = Complex64::new(0.5, 0.0);
    let h = model.hamiltonian();
    let sw = |a: &CMatrix, b: &CMatrix| sandwich_superop(a, b).expect("model shapes are consistent");
    let mut left = sw(h, &id).scale(Complex64::new(0.0, -1.0));
    let mut right = sw(&id, h).scale(Complex64::new(0.0, 1.0));
    for ch in model.channels() {
        let ldl = ch.op.adjoint() * &ch.op;
        let jump = sw(&ch.op, &ch.op.adjoint());
        left = &left + &(&jump - &sw(&ldl, &id)).scale(half);
        right = &right + &(&jump - &sw(&id, &ldl)).scale(half);
    }
    (left, right)
}

/// `chi = -4 (Tr{K_L L^+ K_R rho} + Tr{K_R L^+ K_L rho})`.
pub fn chi_factor(model: &OpenSystemModel, rho_ss: &DensityMatrix, drazin: &Superoperator) -> Result<f64> {
    let (kl, kr) = chi_superops(model);
    let a = (&(&kl * drazin) * &kr).trace_of(rho_ss);
    let b = (&(&kr * drazin) * &kl).trace_of(rho_ss);
    real_or_err((a + b) * -4.0, "chi")
}

/// Steady-state data shared by every scheme evaluated on one model.
#[derive(Debug, Clone)]
pub struct SteadyStateAnalysis {
    model: OpenSystemModel,
    liouvillian: Superoperator,
    rho: DensityMatrix,
    drazin: Superoperator,
    chi: f64,
}

impl SteadyStateAnalysis {
    pub fn new(model: &OpenSystemModel) -> Result<Self> {
        let liouvillian = build_liouvillian(model);
        let rho = steady_state(&liouvillian)?;
        let drazin = drazin_inverse(&liouvillian, &rho)?;
        let chi = chi_factor(model, &rho, &drazin)?;
        Ok(Self { model: model.clone(), liouvillian, rho, drazin, chi })
    }

    pub fn model(&self) -> &OpenSystemModel {
        &self.model
    }

    pub fn liouvillian(&self) -> &Superoperator {
        &self.liouvillian
    }

    pub fn steady_state(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn drazin(&self) -> &Superoperator {
        &self.drazin
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn statistics(&self, scheme: &CountingScheme) -> Result<CurrentStatistics> {
        drazin_statistics(&self.model, scheme, &self.rho, &self.drazin)
    }

    pub fn psi(&self, scheme: &CountingScheme) -> Result<f64> {
        psi_factor(&self.model, scheme, &self.rho, &self.drazin)
    }

    pub fn report(&self, scheme: &CountingScheme) -> Result<UncertaintyReport> {
        let stats = self.statistics(scheme)?;
        let psi = match self.psi(scheme) {
            Ok(psi) => Some(psi),
            Err(KurError::UndefinedPsi { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(UncertaintyReport::from_parts(scheme.kind(), &stats, psi, self.chi))
    }
}

/// Statistics, coherence factors and bounds for one model and scheme.
///
/// Fields that depend on `1/J` are `None` when the current vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyReport {
    pub kind: Unraveling,
    #[serde(rename = "J")]
    pub current: f64,
    #[serde(rename = "D")]
    pub noise: f64,
    #[serde(rename = "A")]
    pub activity: f64,
    pub psi: Option<f64>,
    pub chi: f64,
    pub ratio: Option<f64>,
    pub bound_classical: Option<f64>,
    pub bound_psi: Option<f64>,
    pub bound_chi: Option<f64>,
    pub ok_classical: Option<bool>,
    pub ok_psi: Option<bool>,
    pub ok_chi: Option<bool>,
}

impl UncertaintyReport {
    pub fn from_parts(kind: Unraveling, stats: &CurrentStatistics, psi: Option<f64>, chi: f64) -> Self {
        let a = stats.activity;
        let defined = stats.current.abs() > CURRENT_TOL;
        let ratio = defined.then(|| stats.noise / (stats.current * stats.current));
        let psi = if defined { psi } else { None };
        let offset = match kind {
            Unraveling::Jump => 1.0,
            Unraveling::Diffusive => 0.5,
        };
        let chi_numerator = match kind {
            Unraveling::Jump => 1.0,
            Unraveling::Diffusive => 0.25,
        };
        let positive = |x: f64| (x > 0.0).then_some(x);
        let bound_classical = positive(a).map(|a| 1.0 / a);
        let bound_psi = match (psi, positive(a)) {
            (Some(p), Some(a)) => Some((offset + p).powi(2) / a),
            _ => None,
        };
        let bound_chi = positive(a + chi).map(|b| chi_numerator / b);
        // Bounds are compared in dimensionless form, multiplied through by A or A + chi.
        let ok_classical = ratio.zip(positive(a)).map(|(r, a)| holds_with_slack(r * a, 1.0));
        let ok_psi = match (ratio, psi, positive(a)) {
            (Some(r), Some(p), Some(a)) => Some(holds_with_slack(r * a, (offset + p).powi(2))),
            _ => None,
        };
        let ok_chi = ratio.zip(positive(a + chi)).map(|(r, b)| holds_with_slack(r * b, chi_numerator));
        Self {
            kind,
            current: stats.current,
            noise: stats.noise,
            activity: a,
            psi,
            chi,
            ratio,
            bound_classical,
            bound_psi,
            bound_chi,
            ok_classical,
            ok_psi,
            ok_chi,
        }
    }

    /// `D A / J^2`.
    pub fn scaled_ratio(&self) -> Option<f64> {
        self.ratio.map(|r| r * self.activity)
    }

    /// `(1 + psi)^2` or `(1/2 + psi)^2`.
    pub fn psi_bound_scaled(&self) -> Option<f64> {
        let offset = match self.kind {
            Unraveling::Jump => 1.0,
            Unraveling::Diffusive => 0.5,
        };
        self.psi.map(|p| (offset + p).powi(2))
    }

    /// `A / (A + chi)` (jump) or `A / (4 (A + chi))` (diffusive).
    pub fn chi_bound_scaled(&self) -> Option<f64> {
        self.bound_chi.map(|b| b * self.activity)
    }
}

/// Full pipeline: steady state, Drazin inverse, statistics, psi, chi and bounds.
pub fn kur_report(model: &OpenSystemModel, scheme: &CountingScheme) -> Result<UncertaintyReport> {
    scheme.validate_for(model)?;
    SteadyStateAnalysis::new(model)?.report(scheme)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superop::Channel;
    use crate::test_util::*;

    #[test]
    fn slack_convention() {
        assert!(holds_with_slack(1.0, 1.0 + 5e-10));
        assert!(!holds_with_slack(1.0, 1.0 + 5e-9));
        assert!(holds_with_slack(1e6, 1e6 * (1.0 + 5e-10)));
    }

    #[test]
    fn vanishing_current_gives_undefined_fields() {
        let stats =
            CurrentStatistics { current: 0.0, noise: 1.0, activity: 2.0, method: crate::counting::MethodTag::Drazin };
        let r = UncertaintyReport::from_parts(Unraveling::Jump, &stats, Some(0.1), 0.3);
        assert_eq!(r.ratio, None);
        assert_eq!(r.psi, None);
        assert_eq!(r.bound_psi, None);
        assert_eq!(r.ok_psi, None);
        assert_eq!(r.bound_classical, Some(0.5));
    }

    #[test]
    fn bound_families_follow_unraveling() {
        let stats =
            CurrentStatistics { current: 1.0, noise: 2.0, activity: 4.0, method: crate::counting::MethodTag::Drazin };
        let j = UncertaintyReport::from_parts(Unraveling::Jump, &stats, Some(0.5), 1.0);
        assert!((j.bound_psi.unwrap() - 2.25 / 4.0).abs() < 1e-15);
        assert!((j.bound_chi.unwrap() - 1.0 / 5.0).abs() < 1e-15);
        let d = UncertaintyReport::from_parts(Unraveling::Diffusive, &stats, Some(0.5), 1.0);
        assert!((d.bound_psi.unwrap() - 1.0 / 4.0).abs() < 1e-15);
        assert!((d.bound_chi.unwrap() - 0.25 / 5.0).abs() < 1e-15);
    }

    #[test]
    fn psi_vanishes_without_coherence() {
        // diagonal Hamiltonian with classical jumps: [H, rho_ss] = 0
        let mut rng = seeded(1);
        let model = random_classical_model(&mut rng, 4, true);
        let weights: Vec<f64> = (0..model.channels().len())
            .map(|i| {
                if i == 0 {
                    1.0
                } else if i == 1 {
                    -1.0
                } else {
                    0.0
                }
            })
            .collect();
        let scheme = CountingScheme::jump(weights).unwrap();
        let a = SteadyStateAnalysis::new(&model).unwrap();
        assert!(a.psi(&scheme).unwrap().abs() < 1e-10);
    }

    #[test]
    fn psi_undefined_for_zero_current() {
        let mut op = CMatrix::zeros(2, 2);
        op[(0, 1)] = Complex64::new(1.0, 0.0);
        let model = OpenSystemModel::new(CMatrix::zeros(2, 2), vec![Channel::new("decay", op)]).unwrap();
        let a = SteadyStateAnalysis::new(&model).unwrap();
        let scheme = CountingScheme::jump(vec![1.0]).unwrap();
        assert!(matches!(a.psi(&scheme), Err(KurError::UndefinedPsi { .. })));
        let report = a.report(&scheme).unwrap();
        assert!(report.ratio.is_none());
    }

    #[test]
    fn chi_nonnegative_for_classical_networks() {
        let mut rng = seeded(17);
        for _ in 0..100 {
            let model = random_classical_model(&mut rng, 4, true);
            let a = SteadyStateAnalysis::new(&model).unwrap();
            assert!(a.chi() >= -1e-10, "chi = {}", a.chi());
        }
    }

    #[test]
    fn psi_invariant_under_jump_phase() {
        let mut rng = seeded(23);
        let model = random_model(&mut rng, 3, 3);
        let scheme = CountingScheme::jump(vec![1.0, -1.0, 0.0]).unwrap();
        let base = SteadyStateAnalysis::new(&model).unwrap().psi(&scheme).unwrap();
        let mut channels = model.channels().to_vec();
        channels[0].op = channels[0].op.map(|z| z * Complex64::from_polar(1.0, 0.83));
        let rotated = OpenSystemModel::new(model.hamiltonian().clone(), channels).unwrap();
        let psi = SteadyStateAnalysis::new(&rotated).unwrap().psi(&scheme).unwrap();
        assert!((psi - base).abs() < 1e-10);
    }
}
