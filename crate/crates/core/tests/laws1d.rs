use proptest::prelude::*;
use qlaw_core::laws1d::*;
use qlaw_core::numerics::Derivative;
use qlaw_core::reduced_action::ReducedAction1D;
use qlaw_core::schrodinger1d::{pair_free, pair_numeric, PotentialKind, PotentialSpec};

fn linear_action(kind_b: f64) -> ReducedAction1D {
    let v = PotentialSpec::new(PotentialKind::Linear { slope: 1.0 }, (-10.0, 4.0)).unwrap();
    let pair = pair_numeric(&v, 1.0, 1.0, 1.0, 1e-3).unwrap();
    ReducedAction1D::new(pair, 1.0, kind_b, 0.0).unwrap()
}

#[test]
fn linear_energy_law_stalls_at_turning_point() {
    let action = linear_action(0.3);
    let scales = Scales::of(&action);
    let law = LawOfMotion::new(LawKind::EnergyLaw, action);
    let t_max = 1e4 * scales.time;
    let tr = integrate_trajectory(&law, -2.0, (0.0, t_max), &TrajectoryControls::default()).unwrap();
    let at = tr.stall_location().unwrap_or_else(|| panic!("{:?} last {:?} n {}", tr.termination, tr.last(), tr.samples.len()));
    assert!((at - 1.0).abs() < 1e-6 * scales.length, "stall at {at}");
    assert!(tr.max_x() <= 1.0 + 1e-6 * scales.length);

    // distance to the turning point never grows
    for w in tr.samples.windows(2) {
        assert!(1.0 - w[1].x <= 1.0 - w[0].x + 1e-12);
    }

    let tr = integrate_trajectory(&law, -2.0, (0.0, t_max), &TrajectoryControls::without_stall()).unwrap();
    assert_eq!(tr.termination, TrajectoryEnd::SpanComplete);
    assert!(tr.max_x() <= 1.0 + 1e-6 * scales.length, "max {}", tr.max_x());
}

#[test]
fn linear_bohm_form_crosses() {
    let action = linear_action(0.3);
    let scales = Scales::of(&action);
    let law = LawOfMotion::new(LawKind::BohmForm, action);
    let tr = integrate_trajectory(&law, -2.0, (0.0, 1e4 * scales.time), &TrajectoryControls::default()).unwrap();
    let t = tr.first_crossing(1.0 + 1e-6 * scales.length).expect("crossing");
    assert!(t.is_finite() && t > 0.0);
}

#[test]
fn free_energy_and_bohm_agree_when_q_vanishes() {
    let s = ReducedAction1D::new(pair_free(0.5, 1.0, 1.0).unwrap(), 1.0, 0.0, 0.0).unwrap();
    for i in 0..200 {
        let x = -10.0 + 0.1 * i as f64;
        assert!((velocity_energy_law(&s, x) - velocity_bohm_form(&s, x)).abs() < 1e-10);
    }
}

#[test]
fn floyd_generic_constants_finite_and_step_stable() {
    let s = ReducedAction1D::new(pair_free(0.5, 1.0, 1.0).unwrap(), 1.7, -0.4, 0.0).unwrap();
    let de = 1e-3;
    let xs: Vec<f64> = (0..=100).map(|i| std::f64::consts::PI * i as f64 / 100.0).collect();
    let d1: Vec<f64> = xs.iter().map(|&x| dt_dx_floyd(&s, x, de).unwrap()).collect();
    let d2: Vec<f64> = xs.iter().map(|&x| dt_dx_floyd(&s, x, de / 2.0).unwrap()).collect();
    let scale = d2.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    for (p, q) in d1.iter().zip(&d2) {
        assert!(p.is_finite());
        assert!((p - q).abs() <= 1e-4 * q.abs().max(1e-2 * scale), "{p} vs {q}");
    }
    let sign_changes = d2.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
    let worst = xs
        .iter()
        .zip(&d2)
        .map(|(&x, d)| (d * velocity_energy_law(&s, x) - 1.0).abs())
        .fold(0.0f64, f64::max);
    println!("floyd a=1.7 b=-0.4: {sign_changes} sign changes on a period, max |dt/dx * v - 1| = {worst:.3e}");
}

#[test]
fn free_family_nodes_exploratory() {
    let (e, m, hbar) = (0.5, 1.0, 1.0);
    let base = ReducedAction1D::new(pair_free(e, m, hbar).unwrap(), 1.0, 0.0, 0.0).unwrap();
    let controls = TrajectoryControls {
        ode: qlaw_core::numerics::OdeControls {
            abs_tol: 1e-11,
            rel_tol: 1e-11,
            ..Default::default()
        },
        ..Default::default()
    };
    let fam = TrajectoryFamily::integrate(
        &base,
        LawKind::EnergyLaw,
        &[(4.0, 0.0), (1.0, 0.0), (2.0, 0.0)],
        0.0,
        (0.0, 20.0),
        &controls,
    )
    .unwrap();
    let a: Vec<f64> = fam.members.iter().map(|m| m.a).collect();
    assert_eq!(a, vec![1.0, 2.0, 4.0]);
    let nodes = detect_nodes(&fam, fam.default_node_tolerance()).unwrap();
    assert!(!nodes.is_empty());
    let lambda = fam.de_broglie_length();
    if let Some(spacing) = mean_node_spacing(&collapse(&nodes)) {
        println!(
            "free family a in {{1,2,4}}: {} node clusters, mean spacing {spacing:.6}, de Broglie length {lambda:.6}, ratio {:.4}",
            collapse(&nodes).len(),
            spacing / lambda
        );
    }
}

/// Merge adjacent node samples into one representative per cluster.
fn collapse(nodes: &[Node]) -> Vec<Node> {
    let mut out: Vec<Node> = Vec::new();
    for n in nodes {
        match out.last() {
            Some(last) if (n.x - last.x).abs() < 1e-2 => {
                if n.spread < last.spread {
                    *out.last_mut().unwrap() = *n;
                }
            }
            _ => out.push(*n),
        }
    }
    out
}

#[test]
fn disjoint_family_has_no_nodes() {
    let base = ReducedAction1D::new(pair_free(0.5, 1.0, 1.0).unwrap(), 1.0, 0.0, 0.0).unwrap();
    let members = [0.0, 10.0, 20.0]
        .iter()
        .map(|&start| {
            let law = LawOfMotion::new(LawKind::BohmForm, base.clone());
            let trajectory = integrate_trajectory(&law, start, (0.0, 2.0), &TrajectoryControls::default()).unwrap();
            FamilyMember { a: 1.0, b: 0.0, trajectory }
        })
        .collect();
    let fam = TrajectoryFamily::from_members(0.5, 1.0, 1.0, 0.0, members);
    assert!(detect_nodes(&fam, 1e-3).unwrap().is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 20, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn bohm_velocity_sign_follows_a_w(a in prop_oneof![-5.0..-0.1f64, 0.1..5.0f64], b in -3.0..3.0f64, x in -10.0..10.0f64) {
        let s = ReducedAction1D::new(pair_free(0.5, 1.0, 1.0).unwrap(), a, b, 0.0).unwrap();
        let w = s.pair().wronskian();
        prop_assert_eq!(velocity_bohm_form(&s, x).signum(), (a * w).signum());
    }

    #[test]
    fn energy_law_balance_holds_post_hoc(a in 0.2..4.0f64, b in -2.0..2.0f64) {
        let s = ReducedAction1D::new(pair_free(0.5, 1.0, 1.0).unwrap(), a, b, 0.0).unwrap();
        let law = LawOfMotion::new(LawKind::EnergyLaw, s.clone());
        let tr = integrate_trajectory(&law, 0.0, (0.0, 5.0), &TrajectoryControls::default()).unwrap();
        for w in tr.samples.windows(2) {
            prop_assert!(w[1].t > w[0].t);
        }
        for r in energy_law_residuals(&s, &tr) {
            prop_assert!(r.abs() < 1e-10);
        }
        // velocity column matches the law's field
        for smp in &tr.samples {
            prop_assert!((smp.v - law.velocity(smp.x)).abs() <= 1e-12 * smp.v.abs().max(1.0));
        }
        let fd = qlaw_core::numerics::fd_derivative_auto(|x| s.s0(x), 0.3, Derivative::First).unwrap();
        prop_assert!((fd - s.ds0_dx(0.3)).abs() < 1e-6 * fd.abs().max(1.0));
    }
}
