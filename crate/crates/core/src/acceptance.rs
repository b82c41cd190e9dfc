//! Quantitative acceptance suite.
//!
//! Each criterion returns an [`Outcome`] with a one-line detail. Criteria are
//! evaluated exactly as stated; a failing line carries the measured numbers.

use std::sync::OnceLock;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::classical::{classical_counted_stats, classical_current_stats, DEFAULT_GAP_RATIO};
use crate::counting::{fcs_oracle, theta_derivative_check, CountingScheme, Unraveling};
use crate::kur::{SteadyStateAnalysis, UncertaintyReport};
use crate::models::dqd::{DOUBLE, EMPTY, LEFT, RIGHT};
use crate::models::{
    build_dqd, build_qubit, dqd_adiabatic, dqd_analytic, dqd_classical, qubit_classical, sample_network, DqdParams,
    QubitParams,
};
use crate::superop::OpenSystemModel;
use crate::Result;

pub const GRID_POINTS: usize = 50;
pub const DQD_DEPHASING: [f64; 3] = [0.0, 0.3, 1.0];
pub const QUBIT_NBAR: [f64; 2] = [0.0, 1.0];
pub const QUBIT_DETUNING: [f64; 2] = [0.0, 1.0];
pub const NETWORK_SEED: u64 = 42;
pub const NETWORK_SAMPLES: u64 = 1000;
pub const NETWORK_SIZE: usize = 5;
/// Seed of the random DQD parameter draws.
pub const CONDUCTANCE_SEED: u64 = 2024;
pub const CONDUCTANCE_DRAWS: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {} ({:.2} s): {}", self.name, self.seconds, self.detail)
    }
}

type Check = fn() -> Result<(bool, String)>;

/// All criteria in reporting order.
pub const CRITERIA: [(&str, Check); 11] = [
    ("dqd_closed_forms", dqd_closed_forms),
    ("point_check", point_check),
    ("limit_checks", limit_checks),
    ("psi_kur_suite", psi_kur_suite),
    ("chi_kur_suite", chi_kur_suite),
    ("conductance_series", conductance_series),
    ("oracle_equivalence", oracle_equivalence),
    ("theta_deformation", theta_deformation),
    ("classical_comparison", classical_comparison),
    ("coherence_identity", coherence_identity),
    ("network_ensemble", network_ensemble),
];

pub fn run(name: &'static str, check: Check) -> Outcome {
    let start = Instant::now();
    let (passed, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
    Outcome { name, passed, detail, seconds: start.elapsed().as_secs_f64() }
}

pub fn run_all() -> Vec<Outcome> {
    CRITERIA.iter().map(|&(name, check)| run(name, check)).collect()
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect(),
    }
}

/// `g` over `[1e-2, 1e2]` for each dephasing rate, other parameters at their defaults.
pub fn dqd_grid() -> Vec<DqdParams> {
    DQD_DEPHASING
        .iter()
        .flat_map(|&gam| {
            log_grid(1e-2, 1e2, GRID_POINTS)
                .into_iter()
                .map(move |g| DqdParams::default().with_g(g).with_dephasing(gam))
        })
        .collect()
}

/// `omega / kappa` over `[1e-2, 1e2]` for each thermal occupation and detuning.
pub fn qubit_grid() -> Vec<QubitParams> {
    let mut out = Vec::new();
    for &nbar in &QUBIT_NBAR {
        for &detuning in &QUBIT_DETUNING {
            for omega in log_grid(1e-2, 1e2, GRID_POINTS) {
                out.push(QubitParams { kappa: 1.0, nbar, detuning, omega });
            }
        }
    }
    out
}

fn rel(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / b.abs()
    }
}

fn worst(errors: impl IntoIterator<Item = f64>) -> f64 {
    errors.into_iter().fold(0.0, f64::max)
}

/// A model with the schemes whose bounds are checked on it.
struct Case {
    label: String,
    model: OpenSystemModel,
    schemes: Vec<CountingScheme>,
}

fn dqd_cases() -> Result<Vec<Case>> {
    dqd_grid()
        .into_iter()
        .map(|p| {
            let (model, s) = build_dqd(&p)?;
            let mut schemes = vec![s.through];
            // the charge-difference current vanishes without dephasing
            if p.dephasing > 0.0 {
                schemes.push(s.charge_diff);
            }
            Ok(Case { label: format!("dqd g={:.4e} Gamma={}", p.g, p.dephasing), model, schemes })
        })
        .collect()
}

fn qubit_cases() -> Result<Vec<Case>> {
    qubit_grid()
        .into_iter()
        .map(|p| {
            let (model, s) = build_qubit(&p)?;
            Ok(Case {
                label: format!("qubit omega={:.4e} nbar={} delta={}", p.omega, p.nbar, p.detuning),
                model,
                schemes: vec![s.emission, s.homodyne],
            })
        })
        .collect()
}

fn grid_reports() -> Result<Vec<(String, UncertaintyReport)>> {
    let mut cases = dqd_cases()?;
    cases.extend(qubit_cases()?);
    let nested: Vec<Vec<(String, UncertaintyReport)>> = cases
        .par_iter()
        .map(|c| {
            let an = SteadyStateAnalysis::new(&c.model)?;
            c.schemes
                .iter()
                .map(|s| Ok((format!("{} {}", c.label, s.kind().as_str()), an.report(s)?)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

/// Reports of the seeded network ensemble, computed once per process.
pub fn network_reports() -> &'static [std::result::Result<UncertaintyReport, String>] {
    static CACHE: OnceLock<Vec<std::result::Result<UncertaintyReport, String>>> = OnceLock::new();
    CACHE.get_or_init(|| {
        (0..NETWORK_SAMPLES)
            .into_par_iter()
            .map(|i| {
                let s = sample_network(NETWORK_SEED, i, NETWORK_SIZE).map_err(|e| e.to_string())?;
                SteadyStateAnalysis::new(&s.model).and_then(|an| an.report(&s.scheme)).map_err(|e| e.to_string())
            })
            .collect()
    })
}

fn network_ok() -> Result<Vec<UncertaintyReport>> {
    network_reports()
        .iter()
        .enumerate()
        .map(|(i, r)| r.clone().map_err(|e| crate::KurError::OracleFailure(format!("network {i}: {e}"))))
        .collect()
}

// Closed forms evaluated as stated by the criteria; see the detail lines for
// how they compare with the exact expressions in `dqd_analytic`.

fn stated_activity(p: &DqdParams) -> f64 {
    let (gl, gr, gam, g) = (p.gamma_l, p.gamma_r, p.dephasing, p.g);
    let (fl, fr) = (p.f_l(), p.f_r());
    let gsum = gl + gr;
    let sdeph = gsum + 2.0 * gam;
    let den = 4.0 * g * g * gsum + gl * gr * sdeph;
    let fbar = (fl * gl + fr * gr) / gsum;
    (8.0 * g * g * gsum * gsum * fbar * (1.0 - fbar + gam / gsum)
        + gl * gr * sdeph * (2.0 * gl * fl * (1.0 - fl) + 2.0 * gr * fr * (1.0 - fr) + gam * (fl + fr)))
        / den
}

fn stated_noise_jump(p: &DqdParams) -> f64 {
    let (gl, gr, gam, g) = (p.gamma_l, p.gamma_r, p.dephasing, p.g);
    let (fl, fr) = (p.f_l(), p.f_r());
    let (gsum, g2) = (gl + gr, g * g);
    let sdeph = gsum + 2.0 * gam;
    let den = 4.0 * g2 * gsum + gl * gr * sdeph;
    let j = 4.0 * g2 * (fl - fr) * gl * gr / den;
    4.0 * g2 * (fl + fr - 2.0 * fl * fr) * gl * gr / den
        + j * 32.0 * g2 * (fl - fr) * gl * gr * (gsum + gam) / (gsum * den)
        - 2.0
            * j
            * j
            * (4.0 * g2 * gsum * (5.0 * gl + 5.0 * gr + 6.0 * gam)
                + 2.0
                    * sdeph
                    * (2.0 * gam * (gl * gl + 3.0 * gl * gr + gr * gr) + gsum * (gl * gl + 7.0 * gl * gr + gr * gr)))
            / (gsum * den)
}

fn stated_noise_classical(p: &DqdParams) -> f64 {
    let (gl, gr, gam, g) = (p.gamma_l, p.gamma_r, p.dephasing, p.g);
    let (fl, fr) = (p.f_l(), p.f_r());
    let (gsum, g2) = (gl + gr, g * g);
    let sdeph = gsum + 2.0 * gam;
    let den = 4.0 * g2 * gsum + gl * gr * sdeph;
    let j = 4.0 * g2 * (fl - fr) * gl * gr / den;
    4.0 * g2 * (fl + fr - 2.0 * fl * fr) * gl * gr / den + j * 16.0 * g2 * (fl - fr) * gl * gr / den
        - 2.0 * j * j * (12.0 * g2 * gsum + sdeph * (gl * gl + 3.0 * gl * gr + gr * gr)) / (gsum * den)
}

#[derive(Default)]
struct ErrorTable {
    rows: Vec<(&'static str, f64)>,
}

impl ErrorTable {
    fn record(&mut self, name: &'static str, err: f64) {
        match self.rows.iter_mut().find(|(n, _)| *n == name) {
            Some(row) => row.1 = row.1.max(err),
            None => self.rows.push((name, err)),
        }
    }

    fn failing(&self, tol: f64) -> Vec<String> {
        self.rows.iter().filter(|(_, e)| !(*e <= tol)).map(|(n, e)| format!("{n} {e:.2e}")).collect()
    }

    fn max(&self) -> f64 {
        worst(self.rows.iter().map(|r| r.1))
    }
}

fn dqd_closed_forms() -> Result<(bool, String)> {
    let start = Instant::now();
    let tol = 1e-8;
    let rows: Vec<(DqdParams, [f64; 4], Complex64, UncertaintyReport, Option<UncertaintyReport>)> = dqd_grid()
        .par_iter()
        .map(|p| {
            let (model, s) = build_dqd(p)?;
            let an = SteadyStateAnalysis::new(&model)?;
            let rho = an.steady_state().matrix();
            let pops = [EMPTY, LEFT, RIGHT, DOUBLE].map(|i| rho[(i, i)].re);
            let through = an.report(&s.through)?;
            let diff = if p.dephasing > 0.0 { Some(an.report(&s.charge_diff)?) } else { None };
            Ok((*p, pops, rho[(LEFT, RIGHT)], through, diff))
        })
        .collect::<Result<_>>()?;
    let elapsed = start.elapsed().as_secs_f64();

    let mut stated = ErrorTable::default();
    let mut exact = ErrorTable::default();
    for (p, pops, alpha, through, diff) in &rows {
        let r = dqd_analytic(p);
        for (num, refv) in pops.iter().zip(r.populations) {
            stated.record("populations", rel(*num, refv));
        }
        stated.record("alpha", (alpha - r.alpha).norm() / r.alpha.norm());
        stated.record("J", rel(through.current, r.current));
        stated.record("psi_jump", rel(through.psi.unwrap_or(f64::NAN), r.psi_jump));
        stated.record("C", rel(r.coherence_gamma_sum_form, alpha.norm()));
        stated.record("A", rel(through.activity, stated_activity(p)));
        stated.record("D", rel(through.noise, stated_noise_jump(p)));
        exact.record("A", rel(through.activity, r.activity));
        exact.record("D", rel(through.noise, r.noise_jump));
        exact.record("C", rel(r.coherence, 2.0 * alpha.norm()));
        if let Some(d) = diff {
            stated.record("J_d", rel(d.current.abs(), r.current_diff.abs()));
            stated.record("psi_diff", rel(d.psi.unwrap_or(f64::NAN), r.psi_diff));
        }
    }
    let failing = stated.failing(tol);
    let passed = failing.is_empty() && elapsed < 5.0;
    let detail = format!(
        "{} points in {elapsed:.2} s; max rel err {:.2e}; above {tol:.0e}: [{}]; against exact A, D and l1 C: max rel err {:.2e}",
        rows.len(),
        stated.max(),
        failing.join(", "),
        exact.max()
    );
    Ok((passed, detail))
}

fn dqd_psi(p: &DqdParams) -> Result<f64> {
    let (model, s) = build_dqd(p)?;
    SteadyStateAnalysis::new(&model)?.psi(&s.through)
}

fn point_check() -> Result<(bool, String)> {
    let psi = dqd_psi(&DqdParams::default())?;
    let bound = (1.0 + psi).powi(2);
    let passed = (psi + 0.4).abs() <= 1e-12 && (bound - 0.36).abs() <= 1e-12;
    Ok((passed, format!("psi = {psi:.16}, (1+psi)^2 = {bound:.16}")))
}

fn limit_checks() -> Result<(bool, String)> {
    let weak = dqd_psi(&DqdParams::default().with_g(1e-3))?;
    let strong = dqd_psi(&DqdParams::default().with_g(1e3))?;
    let dephased = dqd_psi(&DqdParams::default().with_dephasing(1e3))?;
    let bound = (1.0 + dephased).powi(2);
    let passed = (weak + 2.0).abs() < 1e-3 && strong.abs() < 1e-3 && (bound - 1.0).abs() < 1e-2;
    Ok((passed, format!("psi(g=1e-3) = {weak:.6}, psi(g=1e3) = {strong:.3e}, (1+psi)^2 at Gamma=1e3 = {bound:.6}")))
}

fn kur_suite(flag: fn(&UncertaintyReport) -> Option<bool>) -> Result<(bool, String)> {
    let start = Instant::now();
    let grid = grid_reports()?;
    let networks = network_ok()?;
    let mut violations = Vec::new();
    let mut undefined = 0usize;
    let all = grid
        .iter()
        .map(|(l, r)| (l.clone(), r))
        .chain(networks.iter().enumerate().map(|(i, r)| (format!("network {i}"), r)));
    let mut total = 0usize;
    for (label, r) in all {
        total += 1;
        match flag(r) {
            Some(true) => {}
            Some(false) => violations.push(label),
            None => undefined += 1,
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let passed = violations.is_empty() && undefined == 0 && elapsed < 60.0;
    let mut detail = format!(
        "{total} reports ({} grid, {} networks) in {elapsed:.2} s; violations {}; undefined {undefined}",
        grid.len(),
        networks.len(),
        violations.len()
    );
    if let Some(first) = violations.first() {
        detail.push_str(&format!("; first violation: {first}"));
    }
    Ok((passed, detail))
}

fn psi_kur_suite() -> Result<(bool, String)> {
    kur_suite(|r| r.ok_psi)
}

fn chi_kur_suite() -> Result<(bool, String)> {
    kur_suite(|r| r.ok_chi)
}

/// Random `(g, gamma_L, gamma_R, Gamma)` at the default bias.
pub fn conductance_draws(seed: u64, count: usize) -> Vec<DqdParams> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut log_uniform = |lo: f64, hi: f64| lo * (hi / lo).powf(rng.random::<f64>());
    (0..count)
        .map(|_| {
            let g = log_uniform(1e-2, 1e2);
            let gamma_l = log_uniform(1e-1, 1e1);
            let gamma_r = log_uniform(1e-1, 1e1);
            let dephasing = log_uniform(1e-3, 1e1);
            DqdParams { g, gamma_l, gamma_r, dephasing, ..DqdParams::default() }
        })
        .collect()
}

fn conductance_series() -> Result<(bool, String)> {
    let psis: Vec<f64> =
        conductance_draws(CONDUCTANCE_SEED, CONDUCTANCE_DRAWS).par_iter().map(dqd_psi).collect::<Result<_>>()?;
    let lo = psis.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = psis.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let outside = psis.iter().filter(|&&p| !(-2.0 - 1e-9..=1e-9).contains(&p)).count();
    Ok((outside == 0, format!("{} draws, psi in [{lo:.6}, {hi:.6}], outside [-2, 0]: {outside}", psis.len())))
}

fn oracle_equivalence() -> Result<(bool, String)> {
    let tol = 1e-6;
    let mut cases = dqd_cases()?;
    cases.extend(qubit_cases()?);
    for i in 0..100 {
        let s = sample_network(NETWORK_SEED, i, NETWORK_SIZE)?;
        cases.push(Case { label: format!("network {i}"), model: s.model, schemes: vec![s.scheme] });
    }
    let errors: Vec<(String, f64, f64)> = cases
        .par_iter()
        .map(|c| {
            let an = SteadyStateAnalysis::new(&c.model)?;
            c.schemes
                .iter()
                .map(|s| {
                    let d = an.statistics(s)?;
                    let f = fcs_oracle(&c.model, s)?;
                    Ok((format!("{} {}", c.label, s.kind().as_str()), rel(f.current, d.current), rel(f.noise, d.noise)))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let (wj, wd) = (worst(errors.iter().map(|e| e.1)), worst(errors.iter().map(|e| e.2)));
    let bad: Vec<&str> = errors.iter().filter(|e| !(e.1 <= tol && e.2 <= tol)).map(|e| e.0.as_str()).collect();
    let mut detail = format!("{} comparisons; max rel err J {wj:.2e}, D {wd:.2e}", errors.len());
    if !bad.is_empty() {
        detail.push_str(&format!("; {} above {tol:.0e}, first: {}", bad.len(), bad[0]));
    }
    Ok((bad.is_empty(), detail))
}

/// Relative error below which the central difference at small theta is
/// dominated by rounding in the steady-state solves.
pub const THETA_ROUNDING_FLOOR: f64 = 1e-8;
/// Halving ladder on which the truncation error dominates.
pub const THETA_LADDER: [f64; 4] = [1e-2, 5e-3, 2.5e-3, 1.25e-3];

fn theta_deformation() -> Result<(bool, String)> {
    let theta = 1e-4;
    let tol = 1e-3;
    let mut cases = Vec::new();
    for &gam in &DQD_DEPHASING {
        for g in [1e-2, 1e-1, 1.0, 1e1, 1e2] {
            let p = DqdParams::default().with_g(g).with_dephasing(gam);
            let (model, s) = build_dqd(&p)?;
            let mut schemes = vec![s.through];
            if gam > 0.0 {
                schemes.push(s.charge_diff);
            }
            cases.push(Case { label: format!("dqd g={g} Gamma={gam}"), model, schemes });
        }
    }
    for &nbar in &QUBIT_NBAR {
        for &detuning in &QUBIT_DETUNING {
            for omega in [1e-1, 1.0, 1e1] {
                let (model, s) = build_qubit(&QubitParams { kappa: 1.0, nbar, detuning, omega })?;
                cases.push(Case {
                    label: format!("qubit omega={omega} nbar={nbar} delta={detuning}"),
                    model,
                    schemes: vec![s.emission, s.homodyne],
                });
            }
        }
    }
    for i in 0..20 {
        let s = sample_network(NETWORK_SEED, i, NETWORK_SIZE)?;
        cases.push(Case { label: format!("network {i}"), model: s.model, schemes: vec![s.scheme] });
    }
    struct ThetaErrors {
        label: String,
        ladder: Vec<f64>,
        at: f64,
        at_half: f64,
    }
    let errors: Vec<ThetaErrors> = cases
        .par_iter()
        .map(|c| {
            let an = SteadyStateAnalysis::new(&c.model)?;
            c.schemes
                .iter()
                .map(|s| {
                    let stats = an.statistics(s)?;
                    let psi = an.psi(s)?;
                    let target = match s.kind() {
                        Unraveling::Jump => stats.current * (1.0 + psi),
                        Unraveling::Diffusive => stats.current * (0.5 + psi),
                    };
                    let err = |t: f64| theta_derivative_check(&c.model, s, t).map(|v| rel(v, target));
                    Ok(ThetaErrors {
                        label: format!("{} {}", c.label, s.kind().as_str()),
                        ladder: THETA_LADDER.iter().map(|&t| err(t)).collect::<Result<_>>()?,
                        at: err(theta)?,
                        at_half: err(0.5 * theta)?,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let ratios: Vec<f64> = errors.iter().flat_map(|e| e.ladder.windows(2).map(|w| w[0] / w[1])).collect();
    let rmin = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let rmax = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let failures: Vec<&str> = errors
        .iter()
        .filter(|e| {
            let accurate = e.at <= tol;
            let quadratic = e.ladder.windows(2).all(|w| (3.5..=4.5).contains(&(w[0] / w[1])));
            let no_growth = e.at_half <= 0.375 * e.at + THETA_ROUNDING_FLOOR;
            !(accurate && quadratic && no_growth)
        })
        .map(|e| e.label.as_str())
        .collect();
    let mut detail = format!(
        "{} currents; max rel err {:.2e} at theta=1e-4, {:.2e} at 5e-5; halving ratios on [1.25e-3, 1e-2] in [{rmin:.3}, {rmax:.3}]",
        errors.len(),
        worst(errors.iter().map(|e| e.at)),
        worst(errors.iter().map(|e| e.at_half)),
    );
    if let Some(first) = failures.first() {
        detail.push_str(&format!("; {} failing, first: {first}", failures.len()));
    }
    Ok((failures.is_empty(), detail))
}

fn classical_comparison() -> Result<(bool, String)> {
    let rows: Vec<(DqdParams, f64, f64, f64, f64)> = dqd_grid()
        .par_iter()
        .map(|p| {
            let (model, s) = build_dqd(p)?;
            let q = SteadyStateAnalysis::new(&model)?.statistics(&s.through)?;
            let (rm, w) = dqd_classical(p)?;
            let c = classical_current_stats(&rm, &w)?;
            Ok((*p, q.current, c.current, q.noise, c.noise))
        })
        .collect::<Result<_>>()?;
    let mut qubit_j = 0.0f64;
    for p in qubit_grid() {
        let (model, s) = build_qubit(&p)?;
        let q = SteadyStateAnalysis::new(&model)?.statistics(&s.emission)?;
        let c = qubit_classical(&p)?;
        let cs = classical_counted_stats(&c.rates, &c.counted, &c.weights)?;
        qubit_j = qubit_j.max((q.current - cs.current).abs());
    }
    let dqd_j = worst(rows.iter().map(|r| (r.1 - r.2).abs()));
    let d_stated = worst(rows.iter().map(|r| rel(r.4, stated_noise_classical(&r.0))));
    let d_exact = worst(rows.iter().map(|r| rel(r.4, dqd_analytic(&r.0).noise_classical)));

    let discrepancy = |g: f64| -> Result<f64> {
        let p = DqdParams::default().with_g(g);
        let (model, s) = build_dqd(&p)?;
        let q = SteadyStateAnalysis::new(&model)?.statistics(&s.through)?;
        let (rm, w) = dqd_classical(&p)?;
        let c = classical_current_stats(&rm, &w)?;
        Ok(rel(c.noise, q.noise))
    };
    let (mid, weak, strong) = (discrepancy(1.0)?, discrepancy(1e-2)?, discrepancy(1e2)?);

    let p = DqdParams::default().with_g(1e2);
    let (_, a_ad) = dqd_adiabatic(&p, DEFAULT_GAP_RATIO)?;
    let (model, s) = build_dqd(&p)?;
    let a = SteadyStateAnalysis::new(&model)?.statistics(&s.through)?.activity;
    let ad_err = rel(a_ad, a);

    let checks = [
        ("J", dqd_j.max(qubit_j) <= 1e-10),
        ("D_classical", d_stated <= 1e-8),
        ("dip", mid > 0.05 && weak < 0.01 && strong < 0.01),
        ("A_ad", ad_err < 1e-2),
    ];
    let failing: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let detail = format!(
        "|J_q - J_cl| max {:.2e}; D_cl rel err {d_stated:.2e} (exact classical form {d_exact:.2e}); D discrepancy {:.1}% at g=1, {:.2e} at g=1e-2, {:.2e} at g=1e2; |A_ad - A|/A = {ad_err:.2e}; failing: [{}]",
        dqd_j.max(qubit_j),
        100.0 * mid,
        weak,
        strong,
        failing.join(", ")
    );
    Ok((failing.is_empty(), detail))
}

fn coherence_identity() -> Result<(bool, String)> {
    let rows: Vec<(DqdParams, f64)> = dqd_grid()
        .par_iter()
        .map(|p| {
            let (model, _) = build_dqd(p)?;
            let an = SteadyStateAnalysis::new(&model)?;
            Ok((*p, an.steady_state().matrix()[(LEFT, RIGHT)].norm()))
        })
        .collect::<Result<_>>()?;
    let stated = worst(rows.iter().map(|(p, a)| (dqd_analytic(p).coherence_gamma_sum_form - a).abs()));
    let l1 = worst(rows.iter().map(|(p, a)| (dqd_analytic(p).coherence - 2.0 * a).abs()));
    let ratio_at_zero = rows
        .iter()
        .find(|(p, _)| p.dephasing == 0.0 && (p.g - 1.0).abs() < 0.2)
        .map(|(p, a)| dqd_analytic(p).coherence_gamma_sum_form / a)
        .unwrap_or(f64::NAN);
    let detail = format!(
        "max |C - |alpha|| = {stated:.3e} (C/|alpha| = {ratio_at_zero:.6} without dephasing); \
         2g|fL-fR||psi|/(gL+gR+2Gamma) vs |alpha|+|alpha*|: max diff {l1:.2e}"
    );
    Ok((stated <= 1e-10, detail))
}

fn network_ensemble() -> Result<(bool, String)> {
    let reports = network_ok()?;
    let psis: Vec<f64> = reports.iter().filter_map(|r| r.psi).collect();
    let positive = psis.iter().filter(|&&p| p > 0.0).count();
    let negative = psis.iter().filter(|&&p| p < 0.0).count();
    let violations = reports.iter().filter(|r| r.ok_psi != Some(true)).count();
    let near_zero = reports.iter().filter_map(|r| r.chi_bound_scaled()).filter(|&b| b < 1e-2).count();
    let min_rhs = reports.iter().filter_map(|r| r.chi_bound_scaled()).fold(f64::INFINITY, f64::min);
    let passed =
        reports.len() == NETWORK_SAMPLES as usize && positive > 0 && negative > 0 && violations == 0 && near_zero > 0;
    Ok((
        passed,
        format!(
            "{} samples: psi > 0 in {positive}, psi < 0 in {negative}; psi-KUR violations {violations}; A/(A+chi) < 1e-2 in {near_zero} (min {min_rhs:.2e})",
            reports.len()
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_have_expected_sizes() {
        assert_eq!(dqd_grid().len(), 150);
        assert_eq!(qubit_grid().len(), 200);
        let g = log_grid(1e-2, 1e2, 50);
        assert!((g[0] - 1e-2).abs() < 1e-18 && (g[49] - 1e2).abs() < 1e-12);
    }

    #[test]
    fn conductance_draws_are_deterministic() {
        assert_eq!(conductance_draws(1, 5), conductance_draws(1, 5));
        assert_ne!(conductance_draws(1, 5), conductance_draws(2, 5));
    }

    #[test]
    fn outcome_line_format() {
        let o = run("point_check", point_check);
        assert!(o.passed, "{o}");
        assert!(o.to_string().starts_with("[PASS] point_check"));
    }
}
