use qkur::counting::Unraveling;
use qkur::kur::SteadyStateAnalysis;
use qkur::models::dqd::{DOUBLE, EMPTY, LEFT, RIGHT};
use qkur::models::{build_dqd, build_qubit, dqd_analytic, qubit_analytic, DqdParams, QubitParams};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

#[test]
fn dqd_pipeline_matches_closed_forms() {
    for &gam in &[0.0, 0.3, 1.0] {
        for g in log_grid(1e-2, 1e2, 50) {
            let p = DqdParams::default().with_g(g).with_dephasing(gam);
            let r = dqd_analytic(&p);
            let (model, schemes) = build_dqd(&p).unwrap();
            let an = SteadyStateAnalysis::new(&model).unwrap();
            let rho = an.steady_state().matrix();
            for (k, &idx) in [EMPTY, LEFT, RIGHT, DOUBLE].iter().enumerate() {
                assert!((rho[(idx, idx)].re - r.populations[k]).abs() < 1e-12, "p{k} g={g} gam={gam}");
            }
            assert!((rho[(LEFT, RIGHT)] - r.alpha).norm() < 1e-12, "alpha g={g} gam={gam}");

            let rep = an.report(&schemes.through).unwrap();
            assert_eq!(rep.kind, Unraveling::Jump);
            assert!(rel(rep.current, r.current) < 1e-8, "J g={g} gam={gam}");
            assert!(rel(rep.activity, r.activity) < 1e-8, "A g={g} gam={gam}");
            assert!(rel(rep.noise, r.noise_jump) < 1e-8, "D g={g} gam={gam}: {} vs {}", rep.noise, r.noise_jump);
            assert!(rel(rep.psi.unwrap(), r.psi_jump) < 1e-8, "psi g={g} gam={gam}");

            if gam == 0.0 {
                let psi = an.psi(&schemes.in_only).unwrap();
                assert!(rel(psi, r.psi_in_only.unwrap()) < 1e-8, "psi in-only g={g}: {psi} vs {:?}", r.psi_in_only);
            } else {
                let rep = an.report(&schemes.charge_diff).unwrap();
                assert!(rel(rep.current.abs(), r.current_diff.abs()) < 1e-8, "Jd g={g} gam={gam}");
                assert!(rel(rep.psi.unwrap(), r.psi_diff) < 1e-8, "psi_d g={g} gam={gam}");
            }
        }
    }
}

#[test]
fn qubit_pipeline_matches_closed_forms() {
    for &nbar in &[0.0, 1.0] {
        for &detuning in &[0.0, 1.0] {
            for omega in log_grid(1e-2, 1e2, 50) {
                let p = QubitParams { kappa: 1.0, nbar, detuning, omega };
                let r = qubit_analytic(&p);
                let (model, schemes) = build_qubit(&p).unwrap();
                let an = SteadyStateAnalysis::new(&model).unwrap();
                let rho = an.steady_state().matrix();
                let tag = format!("nbar={nbar} delta={detuning} omega={omega}");
                assert!((rho[(0, 0)].re - r.rho00).abs() < 1e-12, "{tag}");
                assert!((rho[(1, 1)].re - r.rho11).abs() < 1e-12, "{tag}");
                assert!((rho[(1, 0)] - r.rho10).norm() < 1e-12, "rho10 {tag}: {} vs {}", rho[(1, 0)], r.rho10);

                let rep = an.report(&schemes.emission).unwrap();
                assert!(rel(rep.current, r.current) < 1e-8, "J {tag}");
                assert!(rel(rep.activity, r.activity) < 1e-8, "A {tag}");
                assert!(rel(rep.noise, r.noise_jump) < 1e-8, "D {tag}: {} vs {}", rep.noise, r.noise_jump);
                assert!(rel(rep.psi.unwrap(), r.psi_jump) < 1e-8, "psi {tag}");

                let rep = an.report(&schemes.homodyne).unwrap();
                assert!(rel(rep.current.abs(), r.current_diff_abs) < 1e-8, "Jd {tag}");
                assert!(rel(rep.psi.unwrap(), r.psi_diff) < 1e-8, "psi_d {tag}: {:?} vs {}", rep.psi, r.psi_diff);
            }
        }
    }
}

#[test]
fn classical_dqd_matches_closed_forms() {
    use qkur::classical::{classical_activity, classical_current_stats, classical_steady_state};
    use qkur::models::dqd_classical;
    for &gam in &[0.0, 0.3, 1.0] {
        for g in log_grid(1e-2, 1e2, 50) {
            let p = DqdParams::default().with_g(g).with_dephasing(gam);
            let r = dqd_analytic(&p);
            let (rm, w) = dqd_classical(&p).unwrap();
            let stats = classical_current_stats(&rm, &w).unwrap();
            assert!((stats.current - r.current).abs() < 1e-10, "J g={g} gam={gam}");
            assert!(rel(stats.noise, r.noise_classical) < 1e-8, "D g={g} gam={gam}");
            let pc = classical_steady_state(&rm).unwrap();
            for k in 0..4 {
                assert!((pc[k] - r.populations[k]).abs() < 1e-12);
            }
            assert!(rel(classical_activity(&rm, &pc), r.activity_classical) < 1e-10, "A_cl g={g} gam={gam}");
        }
    }
}

#[test]
fn adiabatic_activity_approaches_quantum_activity() {
    use qkur::classical::DEFAULT_GAP_RATIO;
    use qkur::models::dqd_adiabatic;
    let p = DqdParams::default().with_g(100.0);
    let (_, a_ad) = dqd_adiabatic(&p, DEFAULT_GAP_RATIO).unwrap();
    let a = dqd_analytic(&p).activity;
    assert!(rel(a_ad, a) < 1e-2, "{a_ad} vs {a}");
}

#[test]
fn classical_qubit_matches_closed_forms() {
    use qkur::classical::classical_counted_stats;
    use qkur::models::qubit_classical;
    for &nbar in &[0.0, 1.0] {
        for &detuning in &[0.0, 1.0] {
            for omega in log_grid(1e-2, 1e2, 20) {
                let p = QubitParams { kappa: 1.0, nbar, detuning, omega };
                let r = qubit_analytic(&p);
                let c = qubit_classical(&p).unwrap();
                let stats = classical_counted_stats(&c.rates, &c.counted, &c.weights).unwrap();
                assert!(rel(stats.current, r.current) < 1e-10, "J omega={omega}");
                assert!(
                    rel(stats.noise, r.noise_classical) < 1e-8,
                    "D omega={omega}: {} vs {}",
                    stats.noise,
                    r.noise_classical
                );
            }
        }
    }
}
