use casimir_lab::rattleback::*;
use proptest::prelude::*;

fn mat_vec(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2])
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bracket_is_antisymmetric_on_monomials(p in -3.0..3.0f64, r in -3.0..3.0f64, s in -3.0..3.0f64, h in -4.0..0.0f64) {
        let alg = bianchi_vi(h).unwrap();
        let xi = RattlebackState::new(p, r, s);
        let grads = monomial_gradients(xi);
        for f in &grads {
            for g in &grads {
                let fg = poisson_bracket(&alg, xi, *f, *g);
                let gf = poisson_bracket(&alg, xi, *g, *f);
                let norm = |v: &[f64; 3]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
                let scale = norm(f) * norm(g) * (p.abs() + r.abs() + s.abs()) * (1.0 + h.abs());
                prop_assert!((fg + gf).abs() <= 1e-13 * scale);
            }
        }
    }

    #[test]
    fn rhs_is_poisson_matrix_times_energy_gradient(p in -3.0..3.0f64, r in -3.0..3.0f64, s in -3.0..3.0f64, h in -4.0..0.0f64) {
        let alg = bianchi_vi(h).unwrap();
        let xi = RattlebackState::new(p, r, s);
        let j = poisson_matrix(&alg, xi);
        let direct = mat_vec(&j, [p, r, s]);
        let rhs = rattleback_rhs(xi, h).to_array();
        let general = lie_poisson_rhs(&alg, xi, [p, r, s]).to_array();
        for a in 0..3 {
            prop_assert!((direct[a] - rhs[a]).abs() <= 1e-13 * (1.0 + rhs[a].abs()));
            prop_assert!((general[a] - rhs[a]).abs() <= 1e-13 * (1.0 + rhs[a].abs()));
        }
        // H is conserved to first order and J is antisymmetric.
        prop_assert!(dot([p, r, s], rhs).abs() <= 1e-12 * (1.0 + hamiltonian(xi)));
        for a in 0..3 {
            for b in 0..3 {
                prop_assert_eq!(j[a][b], -j[b][a]);
            }
        }
    }

    #[test]
    fn casimir_commutes_with_everything(p in -3.0..3.0f64, r in 0.05..3.0f64, s in -3.0..3.0f64, h in -4.0..-1.0f64) {
        let xi = RattlebackState::new(p, r, s);
        let c = casimir(xi, h).unwrap();
        let scale = 1.0 + c.abs() * (1.0 + p.abs() + r.abs() + s.abs()) / r.min(1.0);
        prop_assert!(casimir_gradient_check(xi, h).unwrap() <= 1e-12 * scale);
        // finite-difference gradient of C against the analytic one
        let g = casimir_gradient(xi, h).unwrap();
        let eps = 1e-6;
        let fd = [
            (casimir(RattlebackState::new(p + eps, r, s), h).unwrap() - casimir(RattlebackState::new(p - eps, r, s), h).unwrap()) / (2.0 * eps),
            (casimir(RattlebackState::new(p, r + eps, s), h).unwrap() - casimir(RattlebackState::new(p, r - eps, s), h).unwrap()) / (2.0 * eps),
        ];
        prop_assert!((fd[0] - g[0]).abs() <= 1e-6 * (1.0 + g[0].abs()));
        prop_assert!((fd[1] - g[1]).abs() <= 1e-5 * (1.0 + g[1].abs()));
        prop_assert_eq!(g[2], 0.0);
    }

    #[test]
    fn singular_line_is_fixed(s in -50.0..50.0f64, h in -5.0..0.0f64) {
        let xi = RattlebackState::new(0.0, 0.0, s);
        prop_assert_eq!(rattleback_rhs(xi, h).to_array().map(f64::abs), [0.0; 3]);
        let alg = bianchi_vi(h).unwrap();
        prop_assert!(poisson_matrix(&alg, xi).iter().flatten().all(|v| *v == 0.0));
        prop_assert!(restricted_casimir_report(s, h).unwrap().pass);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn flow_commutes_with_p_reflection(p in -0.5..0.5f64, r in 0.05..0.5f64, s in -1.5..1.5f64) {
        let h = -2.0;
        let a = integrate(RattlebackState::new(p, r, s), h, 1e-2, 5.0, Method::Rk4).unwrap();
        let b = integrate(RattlebackState::new(-p, r, s), h, 1e-2, 5.0, Method::Rk4).unwrap();
        for (x, y) in a.states.iter().zip(&b.states) {
            prop_assert!((x.p + y.p).abs() <= 1e-14 * (1.0 + x.p.abs()));
            prop_assert!((x.r - y.r).abs() <= 1e-14 * (1.0 + x.r.abs()));
            prop_assert!((x.s - y.s).abs() <= 1e-14 * (1.0 + x.s.abs()));
        }
    }
}

#[test]
fn rk4_conserves_energy_and_casimir_over_long_run() {
    let xi0 = RattlebackState::new(0.1, 0.2, 1.0);
    let t0 = std::time::Instant::now();
    let traj = integrate(xi0, -2.0, 1e-3, 100.0, Method::Rk4).unwrap();
    assert!(t0.elapsed().as_secs_f64() < 5.0);
    assert!(traj.max_energy_drift() <= 1e-8, "{}", traj.max_energy_drift());
    assert!(traj.max_casimir_drift().unwrap() <= 1e-8);
    assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(*traj.times.last().unwrap(), 100.0);
}

#[test]
fn rk4_matches_fine_reference_run() {
    let xi0 = RattlebackState::new(0.1, 0.2, 1.0);
    let coarse = integrate(xi0, -2.0, 1e-3, 20.0, Method::Rk4).unwrap().last();
    let fine = integrate(xi0, -2.0, 1e-5, 20.0, Method::Rk4).unwrap().last();
    for (a, b) in coarse.to_array().iter().zip(fine.to_array()) {
        assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
    }
}

#[test]
fn rk45_conserves_energy_and_casimir() {
    let xi0 = RattlebackState::new(0.1, 0.2, 1.0);
    let traj = integrate(xi0, -2.0, 1e-2, 100.0, Method::rk45()).unwrap();
    assert!(traj.max_energy_drift() <= 1e-8, "{}", traj.max_energy_drift());
    assert!(traj.max_casimir_drift().unwrap() <= 1e-8, "{:?}", traj.max_casimir_drift());
}

#[test]
fn spinning_state_stays_put() {
    for method in [Method::Rk4, Method::rk45()] {
        let traj = integrate(RattlebackState::new(0.0, 0.0, 5.0), -2.0, 1e-2, 10.0, method).unwrap();
        assert!(traj.states.iter().all(|x| *x == RattlebackState::new(0.0, 0.0, 5.0)));
    }
}

// Snapshot of the spin-reversal behaviour near the singular line: s swings
// between about +s0 and −s0.
#[test]
fn chirality_probe_snapshot() {
    let traj = integrate(RattlebackState::new(1e-3, 1e-3, 1.0), -2.0, 1e-3, 30.0, Method::Rk4).unwrap();
    let s: Vec<f64> = traj.states.iter().map(|x| x.s).collect();
    let min = s.iter().cloned().fold(f64::MAX, f64::min);
    let max = s.iter().cloned().fold(f64::MIN, f64::max);
    let sign_changes = s.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
    assert!(min < -0.95 && max > 0.999, "{min} {max}");
    assert!(sign_changes >= 2, "{sign_changes}");
    assert!(traj.max_energy_drift() <= 1e-8);
}
