use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use qlaw_core::hydrogen2d::{
    self as h2d, bohm_form_2d, energy_law_2d_radial, energy_law_2d_residuals, integrate_bohm_2d, level, Constants2D,
    HydrogenControls, HydrogenTrajectory, RadialPair, ReducedAction2D,
};
use qlaw_core::laws1d::{
    detect_nodes, integrate_trajectory, LawKind, LawOfMotion, Scales, TrajectoryFamily,
};
use qlaw_core::numerics::{Grid1D, OdeControls};
use qlaw_core::reduced_action::ReducedAction1D;
use qlaw_core::relativistic::{integrate_rel_trajectory, kg_pair_free, kg_pair_numeric, RelSetup};
use qlaw_core::report::ResidualReport;
use qlaw_core::schrodinger1d::{pair_free, pair_numeric, SolutionPair};

use crate::error::CliError;
use crate::output::OutputDir;
use crate::scenario::{Law2DTag, LoadedScenario, Module, Units};

/// Tolerance of the chain-rule comparison between the two relativistic forms.
const CHAIN_TOLERANCE: f64 = 1e-8;

/// One named residual check, optionally tied to a constant set.
struct Check {
    name: &'static str,
    constants: Value,
    report: ResidualReport,
}

impl Check {
    fn to_json(&self) -> Value {
        let mut v = serde_json::to_value(&self.report).expect("serializable");
        let obj = v.as_object_mut().expect("report is an object");
        obj.insert("check".into(), json!(self.name));
        obj.insert("constants".into(), self.constants.clone());
        v
    }
}

fn seeded(s: &LoadedScenario) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(s.scenario.seed)
}

fn draw_ab(rng: &mut ChaCha8Rng, a_range: [f64; 2], b_range: [f64; 2]) -> (f64, f64) {
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let a = sign * rng.gen_range(a_range[0]..=a_range[1]);
    (a, rng.gen_range(b_range[0]..=b_range[1]))
}

fn span(t: [f64; 2], key: &str) -> Result<(f64, f64), CliError> {
    if t[1] > t[0] && t.iter().all(|v| v.is_finite()) {
        Ok((t[0], t[1]))
    } else {
        Err(CliError::Config(format!("`{key}` must be an increasing pair, got {t:?}")))
    }
}

fn schrodinger_pair(s: &LoadedScenario) -> Result<SolutionPair, CliError> {
    let p = s.particle()?;
    let pair = match s.potential()? {
        None => pair_free(p.energy, p.mass, p.hbar)?,
        Some(v) => {
            let step = s.scenario.potential.as_ref().map_or(1e-3, |c| c.step);
            pair_numeric(&v, p.energy, p.mass, p.hbar, step)?
        }
    };
    let corrupt = s.action().corrupt;
    Ok(if corrupt != 0.0 { pair.corrupted(corrupt) } else { pair })
}

fn verify_grid(s: &LoadedScenario, domain: (f64, f64), fallback: (f64, f64)) -> Result<Grid1D, CliError> {
    let (lo, hi, n) = match &s.scenario.verify {
        Some(v) => (v.range[0], v.range[1], v.points),
        None if domain.0.is_finite() && domain.1.is_finite() => (domain.0, domain.1, 500),
        None => (fallback.0, fallback.1, 500),
    };
    Ok(Grid1D::uniform(lo, hi, n)?)
}

/// Residual checks for the scenario's module. Writes one JSON report and
/// returns whether every check passed.
pub fn verify(s: &LoadedScenario, out: &mut OutputDir, tolerance_scale: f64) -> Result<bool, CliError> {
    if !(tolerance_scale > 0.0 && tolerance_scale.is_finite()) {
        return Err(CliError::Config(format!("--tolerance-scale must be positive, got {tolerance_scale}")));
    }
    let checks = match s.scenario.module {
        Module::Laws1d => verify_laws1d(s)?,
        Module::Hydrogen2d => verify_hydrogen(s)?,
        Module::Relativistic => verify_relativistic(s)?,
    };
    let checks: Vec<Check> = checks
        .into_iter()
        .map(|c| Check {
            report: c.report.clone().with_tolerance(c.report.tolerance * tolerance_scale),
            ..c
        })
        .collect();
    let pass = checks.iter().all(|c| c.report.pass);
    out.json(
        "verify",
        json!({
            "module": s.scenario.module,
            "tolerance_scale": tolerance_scale,
            "pass": pass,
            "checks": checks.iter().map(Check::to_json).collect::<Vec<_>>(),
        }),
    )?;
    Ok(pass)
}

fn verify_laws1d(s: &LoadedScenario) -> Result<Vec<Check>, CliError> {
    let pair = schrodinger_pair(s)?;
    let grid = verify_grid(s, pair.domain(), (-10.0, 10.0))?;
    let act = s.action();
    let mut sets = vec![(act.a, act.b)];
    let extra = s.scenario.verify.as_ref().map_or(0, |v| v.random_constants);
    let mut rng = seeded(s);
    sets.extend((0..extra).map(|_| draw_ab(&mut rng, [0.1, 3.0], [-3.0, 3.0])));
    let mut checks = Vec::new();
    for (a, b) in sets {
        let action = ReducedAction1D::new(pair.clone(), a, b, act.lambda)?;
        let constants = json!({ "a": a, "b": b });
        checks.push(Check {
            name: "qhje",
            constants: constants.clone(),
            report: action.qhje_residual(&grid),
        });
        checks.push(Check {
            name: "continuity",
            constants,
            report: action.continuity_residual_1d(&grid),
        });
    }
    Ok(checks)
}

fn hydrogen_action(s: &LoadedScenario) -> Result<ReducedAction2D, CliError> {
    let h = s.hydrogen()?;
    let c = &h.constants;
    let radial = RadialPair::new(level(h.n, h.l)?, h.rho0)?;
    let constants = Constants2D {
        nu2: c.nu2,
        nu3: c.nu3,
        nu4: c.nu4,
        mu1: c.mu1,
        mu2: c.mu2,
        mu3: c.mu3,
        lambda: c.lambda,
    };
    Ok(ReducedAction2D::new(radial, &constants)?)
}

/// Atomic-unit factors for (length, time) in the configured units.
fn unit_factors(units: Units) -> (f64, f64) {
    match units {
        Units::Atomic => (1.0, 1.0),
        Units::Si => (h2d::si::BOHR_RADIUS_M, h2d::si::TIME_S),
    }
}

fn verify_hydrogen(s: &LoadedScenario) -> Result<Vec<Check>, CliError> {
    let h = s.hydrogen()?;
    let action = hydrogen_action(s)?;
    let grid = verify_grid(s, (0.2, 10.0), (0.2, 10.0))?;
    let constants = json!({ "n": h.n, "l": h.l });
    let mut checks = Vec::new();

    let radial = action.radial();
    let w = grid
        .points()
        .iter()
        .map(|&rho| radial.wronskian(rho).map(|w| w * rho - 1.0))
        .collect::<Result<Vec<_>, _>>()?;
    checks.push(Check {
        name: "wronskian",
        constants: constants.clone(),
        report: ResidualReport::new(grid.points().to_vec(), w, 1e-6),
    });

    if action.level().is_ground() && action.kappa() != 0.0 {
        // Bohm-form angular rate, expected to vanish identically.
        let theta = h.theta_init;
        let rates = grid
            .points()
            .iter()
            .map(|&r| bohm_form_2d(&action, r, theta).map(|(_, th)| th))
            .collect::<Result<Vec<_>, _>>()?;
        checks.push(Check {
            name: "bohm-theta-dot",
            constants: constants.clone(),
            report: ResidualReport::new(grid.points().to_vec(), rates, 0.0),
        });

        let (length, time) = unit_factors(h.units);
        let t = span(h.t_span, "hydrogen.t_span")?;
        let tr = energy_law_2d_radial(&action, h.r_init / length, (t.0 / time, t.1 / time), &hydrogen_controls(s))?;
        let res = energy_law_2d_residuals(&action, &tr)?;
        let rs = tr.samples.iter().map(|p| p.r).collect();
        checks.push(Check {
            name: "energy-law",
            constants,
            report: ResidualReport::new(rs, res, 1e-6 * action.energy().abs()),
        });
    }
    Ok(checks)
}

fn rel_setup(s: &LoadedScenario) -> Result<RelSetup, CliError> {
    let r = s.relativistic()?;
    let pair = match s.potential()? {
        None => kg_pair_free(r.energy, r.mass, r.c, r.hbar)?,
        Some(v) => {
            let step = s.scenario.potential.as_ref().map_or(1e-3, |c| c.step);
            kg_pair_numeric(&v, r.energy, r.mass, r.c, r.hbar, step)?
        }
    };
    let corrupt = s.action().corrupt;
    let pair = if corrupt != 0.0 { pair.corrupted(corrupt) } else { pair };
    Ok(RelSetup::new(pair, r.a, r.b, r.lambda, r.k)?)
}

fn verify_relativistic(s: &LoadedScenario) -> Result<Vec<Check>, CliError> {
    let setup = rel_setup(s)?;
    let r = s.relativistic()?;
    let grid = verify_grid(s, setup.action().pair().domain(), (-10.0, 10.0))?;
    let constants = json!({ "a": r.a, "b": r.b, "c": r.c });
    let chain = grid
        .points()
        .iter()
        .map(|&x| setup.chain_discrepancy(x))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(vec![
        Check {
            name: "qhje",
            constants: constants.clone(),
            report: setup.qhje_residual(&grid),
        },
        Check {
            name: "continuity",
            constants: constants.clone(),
            report: setup.continuity_residual(&grid),
        },
        Check {
            name: "chain",
            constants,
            report: ResidualReport::new(grid.points().to_vec(), chain, CHAIN_TOLERANCE),
        },
    ])
}

/// Trajectory for the scenario's module.
pub fn simulate(s: &LoadedScenario, out: &mut OutputDir) -> Result<(), CliError> {
    match s.scenario.module {
        Module::Laws1d => simulate_laws1d(s, out),
        Module::Hydrogen2d => hydrogen2d(s, out),
        Module::Relativistic => relativistic(s, out),
    }
}

fn simulate_laws1d(s: &LoadedScenario, out: &mut OutputDir) -> Result<(), CliError> {
    let law_cfg = s.law()?;
    let act = s.action();
    let action = ReducedAction1D::new(schrodinger_pair(s)?, act.a, act.b, act.lambda)?;
    let scales = Scales::of(&action);
    let law = LawOfMotion::new(LawKind::from(law_cfg.kind), action);
    let tr = integrate_trajectory(&law, law_cfg.x0, span(law_cfg.t_span, "law.t_span")?, &s.scenario.controls.trajectory())?;
    out.csv("trajectory", |w| tr.write_csv(w))?;
    let mut meta = tr.sidecar();
    meta["x0"] = json!(law_cfg.x0);
    meta["scales"] = json!({ "length": scales.length, "velocity": scales.velocity, "time": scales.time });
    out.json("trajectory", meta)?;
    Ok(())
}

fn hydrogen_controls(s: &LoadedScenario) -> HydrogenControls {
    let base = HydrogenControls::default();
    let mut c = HydrogenControls {
        ode: s.scenario.controls.ode(base.ode.clone()),
        detect_stall: s.scenario.controls.detect_stall,
        ..base
    };
    if let Some(r_max) = s.scenario.hydrogen.as_ref().and_then(|h| h.r_max) {
        let (length, _) = s.scenario.hydrogen.as_ref().map_or((1.0, 1.0), |h| unit_factors(h.units));
        c.r_max = r_max / length;
    }
    c
}

fn to_units(tr: &HydrogenTrajectory, units: Units) -> HydrogenTrajectory {
    let (length, time) = unit_factors(units);
    let mut scaled = tr.clone();
    for p in &mut scaled.samples {
        p.t *= time;
        p.r *= length;
        p.r_dot *= length / time;
        p.theta_dot = p.theta_dot.map(|w| w / time);
    }
    scaled
}

/// 2-D hydrogen trajectory under the configured law.
pub fn hydrogen2d(s: &LoadedScenario, out: &mut OutputDir) -> Result<(), CliError> {
    let h = s.hydrogen()?;
    let action = hydrogen_action(s)?;
    let (length, time) = unit_factors(h.units);
    let t = span(h.t_span, "hydrogen.t_span")?;
    let t = (t.0 / time, t.1 / time);
    let controls = hydrogen_controls(s);
    let tr = match h.law {
        Law2DTag::Energy => energy_law_2d_radial(&action, h.r_init / length, t, &controls)?,
        Law2DTag::Bohm => integrate_bohm_2d(&action, (h.r_init / length, h.theta_init), t, &controls)?,
    };
    let shown = to_units(&tr, h.units);
    out.csv("hydrogen", |w| shown.write_csv(w))?;
    let mut meta = tr.sidecar();
    meta["units"] = json!(h.units);
    meta["n"] = json!(h.n);
    meta["l"] = json!(h.l);
    meta["energy_atomic"] = json!(action.energy());
    meta["kappa"] = json!(action.kappa());
    out.json("hydrogen", meta)?;
    Ok(())
}

/// Lab-frame Klein-Gordon trajectory with proper time.
pub fn relativistic(s: &LoadedScenario, out: &mut OutputDir) -> Result<(), CliError> {
    let r = s.relativistic()?;
    let setup = rel_setup(s)?;
    let ode = s.scenario.controls.ode(OdeControls::with_tolerances(1e-12, 1e-10));
    let tr = integrate_rel_trajectory(&setup, r.x0, span(r.t_span, "relativistic.t_span")?, &ode)?;
    out.csv("relativistic", |w| tr.write_csv(w))?;
    let mut meta = tr.sidecar();
    meta["c"] = json!(r.c);
    meta["mass"] = json!(r.mass);
    meta["x0"] = json!(r.x0);
    out.json("relativistic", meta)?;
    Ok(())
}

/// Trajectory family over a grid of `(a, b)`: one CSV per member and a node report.
pub fn sweep(s: &LoadedScenario, out: &mut OutputDir) -> Result<usize, CliError> {
    if s.scenario.module != Module::Laws1d {
        return Err(CliError::Config("sweep requires module = \"laws1d\"".into()));
    }
    let cfg = s.sweep()?;
    let law_cfg = s.law()?;
    let mut constants: Vec<(f64, f64)> = cfg.constants.iter().map(|c| (c[0], c[1])).collect();
    let mut rng = seeded(s);
    constants.extend((0..cfg.random).map(|_| draw_ab(&mut rng, cfg.a_range, cfg.b_range)));
    let mut distinct = constants.clone();
    distinct.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
    distinct.dedup();
    if distinct.len() < 3 || distinct.len() != constants.len() {
        return Err(CliError::Config(format!(
            "degenerate sweep grid: need at least 3 distinct (a, b) pairs, got {} ({} distinct)",
            constants.len(),
            distinct.len()
        )));
    }

    let act = s.action();
    let base = ReducedAction1D::new(schrodinger_pair(s)?, act.a, act.b, act.lambda)?;
    let family = TrajectoryFamily::integrate(
        &base,
        LawKind::from(law_cfg.kind),
        &constants,
        law_cfg.x0,
        span(law_cfg.t_span, "law.t_span")?,
        &s.scenario.controls.trajectory(),
    )?;
    let tol = cfg.node_tolerance.unwrap_or_else(|| family.default_node_tolerance());
    let nodes = detect_nodes(&family, tol)?;

    let mut members = Vec::new();
    for (i, m) in family.members.iter().enumerate() {
        let file = out.csv(&format!("sweep-member{i:03}"), |w| m.trajectory.write_csv(w))?;
        members.push(json!({
            "index": i,
            "a": m.a,
            "b": m.b,
            "file": file.file_name().map(|f| f.to_string_lossy().into_owned()),
            "termination": m.trajectory.termination,
        }));
    }
    out.json(
        "nodes",
        json!({
            "law": LawKind::from(law_cfg.kind).label(),
            "x0": law_cfg.x0,
            "energy": family.energy,
            "de_broglie_length": family.de_broglie_length(),
            "node_tolerance": tol,
            "members": members,
            "nodes": nodes,
        }),
    )?;
    Ok(nodes.len())
}
