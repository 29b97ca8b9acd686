use num_rational::Ratio;
use qlaw_core::hydrogen2d::*;
use qlaw_core::laws1d::TrajectoryEnd;
use qlaw_core::numerics::{fd_derivative_auto, Derivative};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pairs() -> Vec<RadialPair> {
    [(0, 0), (1, 0), (1, 1), (1, -1), (2, 0), (2, 1)]
        .iter()
        .map(|&(n, l)| RadialPair::new(level(n, l).unwrap(), DEFAULT_RHO0).unwrap())
        .collect()
}

/// `R'' + R'/rho + (2/rho - l^2/rho^2 - alpha^2) R`, scaled by the largest term.
fn radial_residual(p: &RadialPair, rho: f64, f: impl Fn(f64) -> f64, df: f64, d2f: f64) -> f64 {
    let lv = p.level();
    let l2 = (lv.l * lv.l) as f64;
    let c = 2.0 / rho - l2 / (rho * rho) - lv.alpha * lv.alpha;
    let value = f(rho);
    let res = d2f + df / rho + c * value;
    let scale = d2f.abs().max((df / rho).abs()).max((c * value).abs()).max(1e-300);
    res / scale
}

#[test]
fn spectrum_exact() {
    for n in 0..=5u32 {
        for l in -(n as i32)..=(n as i32) {
            let lv = level(n, l).unwrap();
            let half = Ratio::new(2 * n as i64 + 1, 2);
            let alpha = Ratio::from_integer(1) / half;
            let energy = -Ratio::new(1, 2) / (half * half);
            assert_eq!(lv.alpha, *alpha.numer() as f64 / *alpha.denom() as f64);
            assert_eq!(lv.energy, *energy.numer() as f64 / *energy.denom() as f64);
            let (num, den) = lv.energy_fraction();
            assert_eq!(Ratio::new(num, den), energy);
        }
    }
    let g = level(0, 0).unwrap();
    assert_eq!(g.alpha, 2.0);
    assert_eq!(g.energy, -4.0 * g.ionization_energy);
}

#[test]
fn r1_solves_radial_equation() {
    for p in pairs().iter().take(3) {
        for i in 0..=100 {
            let rho = 0.05 + (10.0 - 0.05) * i as f64 / 100.0;
            let d2 = fd_derivative_auto(|x| p.r1(x), rho, Derivative::Second).unwrap();
            let d1 = fd_derivative_auto(|x| p.r1(x), rho, Derivative::First).unwrap();
            assert!((d1 - p.dr1(rho)).abs() <= 1e-8 * d1.abs().max(p.r1(rho).abs()));
            let r = radial_residual(p, rho, |x| p.r1(x), d1, d2);
            assert!(r.abs() < 1e-8, "{:?} rho={rho}: {r}", p.level());
        }
    }
}

#[test]
fn r2_solves_radial_equation() {
    for p in pairs().iter().take(3) {
        for i in 0..=60 {
            let rho = 0.2 + 4.8 * i as f64 / 60.0;
            let pt = p.eval(rho).unwrap();
            let d2 = fd_derivative_auto(|x| p.dr2(x).unwrap(), rho, Derivative::First).unwrap();
            let r = radial_residual(p, rho, |x| p.r2(x).unwrap(), pt.dr2, d2);
            assert!(r.abs() < 1e-6, "{:?} rho={rho}: {r}", p.level());
        }
    }
}

#[test]
fn r2_derivative_matches_fd() {
    for p in pairs() {
        for &rho in &[0.3, 0.74, 0.76, 1.5, 3.0] {
            let fd = fd_derivative_auto(|x| p.r2(x).unwrap(), rho, Derivative::First).unwrap();
            let an = p.dr2(rho).unwrap();
            assert!((fd - an).abs() < 1e-6 * an.abs().max(1.0), "{:?} rho={rho}: {fd} vs {an}", p.level());
        }
    }
}

#[test]
fn wronskian_is_inverse_rho() {
    for p in pairs() {
        for i in 0..20 {
            let rho = 0.2 + 9.8 * i as f64 / 19.0;
            let w = p.wronskian(rho).unwrap();
            assert!((w * rho - 1.0).abs() < 1e-6, "{:?} rho={rho}: {w}", p.level());
        }
        for i in 0..=200 {
            let rho = 2.0 * p.rho0() + (10.0 - 2.0 * p.rho0()) * i as f64 / 200.0;
            assert!((p.wronskian(rho).unwrap() - 1.0 / rho).abs() * rho < 1e-6);
        }
    }
}

#[test]
fn ground_state_r2_ei_identity() {
    let g = level(0, 0).unwrap();
    for &(rho, rho0) in &[(1.0, 0.1), (0.3, 0.1), (5.0, 0.2), (0.05, 0.1), (2.0, 1.0)] {
        let q = RadialPair::new(g, rho0).unwrap().r2(rho).unwrap();
        let ei = ground_state_r2_ei(rho, rho0).unwrap();
        assert!(((q - ei) / ei).abs() < 1e-8, "rho={rho}: {q} vs {ei}");
    }
    let direct = (-2.0f64).exp() * ground_state_integral(1.0, 0.1).unwrap();
    let ei = ground_state_r2_ei(1.0, 0.1).unwrap();
    assert!(((direct - ei) / ei).abs() < 1e-8);
}

#[test]
fn degenerate_constants_are_motionless() {
    let s = ReducedAction2D::ground_state(0.1, 0.0, 1.0, 0.0, 0.25).unwrap();
    for &r in &[0.2, 1.0, 3.0] {
        assert!((s.s0(r, 0.3).unwrap() - (std::f64::consts::FRAC_PI_4 + 0.25)).abs() < 1e-15);
        let (dr, dth) = s.gradient(r, 0.3).unwrap();
        assert_eq!(dr, 0.0);
        assert_eq!(dth, 0.0);
        assert_eq!(bohm_form_2d(&s, r, 0.3).unwrap(), (0.0, 0.0));
    }
    assert!(energy_law_radial_velocity(&s, 1.0).is_err());
}

fn random_ground(rng: &mut ChaCha8Rng) -> ReducedAction2D {
    loop {
        let (nu3, mu1, mu3) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let c = Constants2D::ground(nu3, mu1, mu3, rng.gen_range(-1.0..1.0));
        if c.kappa().abs() > 1e-3 {
            let radial = RadialPair::new(level(0, 0).unwrap(), DEFAULT_RHO0).unwrap();
            return ReducedAction2D::new(radial, &c).unwrap();
        }
    }
}

#[test]
fn ground_state_has_no_angular_dependence() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let s = random_ground(&mut rng);
        for &th in &[-2.0, 0.0, 1.0, 5.0] {
            assert_eq!(s.gradient(0.8, th).unwrap().1, 0.0);
        }
    }
}

#[test]
fn gradient_matches_fd() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let excited = Constants2D {
        nu2: 0.3,
        nu3: -0.7,
        nu4: 1.2,
        mu1: 0.4,
        mu2: -1.1,
        mu3: 0.6,
        lambda: 0.1,
    };
    let mut actions = vec![random_ground(&mut rng), random_ground(&mut rng)];
    for (n, l) in [(1, 1), (2, -1), (1, 0)] {
        let radial = RadialPair::new(level(n, l).unwrap(), DEFAULT_RHO0).unwrap();
        actions.push(ReducedAction2D::new(radial, &excited).unwrap());
    }
    for s in &actions {
        for &(r, th) in &[(0.4, 0.3), (1.1, 2.0), (2.5, -1.0)] {
            let (dr, dth) = s.gradient(r, th).unwrap();
            // Differentiate along a short path so the branch stays continuous.
            let along = |f: &dyn Fn(f64) -> (f64, f64), x: f64| {
                let v = s.s0_path(&[f(x - 1e-3), f(x)]).unwrap();
                v[1] - v[0] + s.s0(f(x - 1e-3).0, f(x - 1e-3).1).unwrap()
            };
            let fr = fd_derivative_auto(|x| along(&|y| (y, th), x), r, Derivative::First).unwrap();
            let ft = fd_derivative_auto(|x| along(&|y| (r, y), x), th, Derivative::First).unwrap();
            assert!((fr - dr).abs() < 1e-7 * dr.abs().max(1.0), "{:?} r: {fr} vs {dr}", s.level());
            assert!((ft - dth).abs() < 1e-7 * dth.abs().max(1.0), "{:?} th: {ft} vs {dth}", s.level());
        }
    }
}

#[test]
fn bohm_deadlock_for_random_constants() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..30 {
        let s = random_ground(&mut rng);
        let mut moving = false;
        for i in 0..40 {
            let r = 0.05 + 0.1 * i as f64;
            let th = rng.gen_range(-3.0..3.0);
            let (r_dot, theta_dot) = bohm_form_2d(&s, r, th).unwrap();
            assert_eq!(theta_dot, 0.0);
            moving |= r_dot != 0.0;
            // m rdot H = hbar kappa * bracket
            let lhs = r_dot * s.h(r, th).unwrap();
            let rhs = s.kappa() * ground_state_bracket(r, s.radial().rho0()).unwrap();
            assert!(((lhs - rhs) / rhs).abs() < 1e-6, "r={r}: {lhs} vs {rhs}");
        }
        assert!(moving);
    }
}

#[test]
fn energy_law_radial_motion() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let e0 = level(0, 0).unwrap().energy;
    for _ in 0..10 {
        let s = random_ground(&mut rng);
        for &r0 in &[0.3, 0.9] {
            // sign structure of the radial law
            let v = energy_law_radial_velocity(&s, r0).unwrap();
            let expected = (1.0 / s.kappa()).signum() * (e0 + 1.0 / r0).signum();
            assert_eq!(v.signum(), expected);

            let tr = energy_law_2d_radial(&s, r0, (0.0, 5.0), &HydrogenControls::default()).unwrap();
            assert!(!tr.theta_determined);
            assert!(tr.samples.iter().all(|p| p.theta.is_none() && p.theta_dot.is_none()));
            let res = energy_law_2d_residuals(&s, &tr).unwrap();
            let worst = res.iter().fold(0.0f64, |m, r| m.max(r.abs()));
            assert!(worst <= 1e-6 * e0.abs(), "worst residual {worst}");
            if s.kappa() > 0.0 {
                // attracted to the turning radius from either side
                let last = tr.last().r;
                assert!((last - 0.5).abs() < (r0 - 0.5f64).abs());
            }
        }
    }
}

#[test]
fn turning_radius_stalls() {
    let s = ReducedAction2D::ground_state(0.1, 1.0, 1.0, -1.0, 0.0).unwrap();
    assert!(s.kappa() > 0.0);
    let tr = energy_law_2d_radial(&s, 0.5, (0.0, 1.0), &HydrogenControls::default()).unwrap();
    assert!(matches!(tr.termination, TrajectoryEnd::Stalled { .. }));
    let tr = energy_law_2d_radial(&s, 0.8, (0.0, 1e4), &HydrogenControls::default()).unwrap();
    match tr.termination {
        TrajectoryEnd::Stalled { at, .. } => assert!((at - 0.5).abs() < 1e-8, "{at}"),
        other => panic!("expected stall, got {other:?}"),
    }
}

#[test]
fn rho0_refit_preserves_action() {
    let radial = RadialPair::new(level(1, 1).unwrap(), 0.1).unwrap();
    let c = Constants2D {
        nu2: 0.3,
        nu3: -0.7,
        nu4: 1.2,
        mu1: 0.4,
        mu2: -1.1,
        mu3: 0.6,
        lambda: 0.1,
    };
    let cases = vec![
        ReducedAction2D::ground_state(0.1, 0.7, 1.3, -0.2, 0.0).unwrap(),
        ReducedAction2D::new(radial, &c).unwrap(),
        ReducedAction2D::new(RadialPair::new(level(1, 0).unwrap(), 0.1).unwrap(), &c).unwrap(),
    ];
    for s in cases {
        let moved = s.refit_rho0(0.37).unwrap();
        assert_eq!(moved.radial().rho0(), 0.37);
        for i in 0..30 {
            let r = 0.2 + 0.15 * i as f64;
            let th = -1.0 + 0.1 * i as f64;
            let (a, b) = (s.s0(r, th).unwrap(), moved.s0(r, th).unwrap());
            // equal up to the pi ambiguity of the principal branch
            let diff = (a - b) / std::f64::consts::PI;
            assert!((diff - diff.round()).abs() * std::f64::consts::PI < 1e-8, "r={r}: {a} vs {b}");
        }
    }
}

#[test]
fn path_branch_is_continuous() {
    let radial = RadialPair::new(level(1, 1).unwrap(), 0.1).unwrap();
    let c = Constants2D {
        nu3: 2.0,
        mu1: -1.0,
        mu2: 0.5,
        ..Default::default()
    };
    let s = ReducedAction2D::new(radial, &c).unwrap();
    let path: Vec<(f64, f64)> = (0..2000).map(|i| (1.0, i as f64 * 0.01)).collect();
    let v = s.s0_path(&path).unwrap();
    let jumps = v.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0f64, f64::max);
    assert!(jumps < 0.2, "largest step {jumps}");
}

#[test]
fn hydrogen_csv_has_empty_theta_for_energy_law() {
    let s = ReducedAction2D::ground_state(0.1, 1.0, 1.0, -1.0, 0.0).unwrap();
    let tr = energy_law_2d_radial(&s, 0.8, (0.0, 0.5), &HydrogenControls::default()).unwrap();
    let mut buf = Vec::new();
    tr.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,r,theta,r_dot,theta_dot,law"));
    let cols: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(cols.len(), 6);
    assert_eq!(cols[2], "");
    assert_eq!(cols[5], "energy");
    assert_eq!(tr.sidecar()["theta_determined"], false);
}

#[test]
fn bohm_trajectory_stays_on_a_ray() {
    let s = ReducedAction2D::ground_state(0.1, 0.7, 1.3, -0.2, 0.0).unwrap();
    let tr = integrate_bohm_2d(&s, (1.0, 0.9), (0.0, 2.0), &HydrogenControls::default()).unwrap();
    assert!(tr.samples.len() > 2);
    assert!(tr.samples.iter().all(|p| p.theta == Some(0.9)));
    assert!((tr.last().r - 1.0).abs() > 1e-6);
}
