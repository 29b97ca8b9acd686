use std::io::Write;

use serde::{Deserialize, Serialize};

use super::action::ReducedAction2D;
use super::radial::ground_state_integral;
use super::{coulomb, HBAR, MASS};
use crate::error::{Error, Result};
use crate::laws1d::{Scales, TrajectoryEnd};
use crate::numerics::{ode_solve_guarded, OdeControls, SampleKind, StallDetector, StepStats, Termination};

/// Radial guard `r >= 1e-3 a0`.
pub const R_MIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Law2D {
    Bohm,
    Energy,
}

impl Law2D {
    pub fn label(self) -> &'static str {
        match self {
            Self::Bohm => "bohm",
            Self::Energy => "energy",
        }
    }
}

/// Ground-state radial Wronskian `R1 R2' - R1' R2` evaluated from the closed
/// forms `R1 = e^{-2r}`, `R2 = e^{-2r} integral_{rho0}^{r} e^{4r'}/r' dr'`.
/// Shared by both laws of motion; analytically it equals `1/r`.
pub fn ground_state_bracket(r: f64, rho0: f64) -> Result<f64> {
    let e = (-2.0 * r).exp();
    let integral = ground_state_integral(r, rho0)?;
    let (r1, dr1) = (e, -2.0 * e);
    let r2 = e * integral;
    let dr2 = -2.0 * r2 + (2.0 * r).exp() / r;
    Ok(r1 * dr2 - dr1 * r2)
}

/// Polar Bohm-form law: `m rdot = dS0/dr`, `m r^2 thetadot = dS0/dtheta`.
pub fn bohm_form_2d(action: &ReducedAction2D, r: f64, theta: f64) -> Result<(f64, f64)> {
    let (dr, dtheta) = action.gradient(r, theta)?;
    Ok((dr / MASS, dtheta / (MASS * r * r)))
}

fn require_ground(action: &ReducedAction2D) -> Result<()> {
    if !action.level().is_ground() {
        return Err(Error::Unsupported(format!(
            "the radial energy law is implemented for the ground state only (n = {})",
            action.level().n
        )));
    }
    if action.kappa() == 0.0 {
        return Err(Error::Degenerate(
            "mu1 nu3 - mu3 = 0: the reduced action is constant and the energy law has no solution".into(),
        ));
    }
    Ok(())
}

/// Energy law with `dS0/dtheta = 0`:
/// `rdot = 2 (E0 - V) H / (hbar kappa * bracket)`.
pub fn energy_law_radial_velocity(action: &ReducedAction2D, r: f64) -> Result<f64> {
    require_ground(action)?;
    let bracket = ground_state_bracket(r, action.radial().rho0())?;
    let h = action.h(r, 0.0)?;
    Ok(2.0 * (action.energy() - coulomb(r)) * h / (HBAR * action.kappa() * bracket))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HydrogenSample {
    pub t: f64,
    pub r: f64,
    /// `None` when the law does not determine the angle.
    pub theta: Option<f64>,
    pub r_dot: f64,
    pub theta_dot: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HydrogenTrajectory {
    pub law: Law2D,
    pub samples: Vec<HydrogenSample>,
    pub termination: TrajectoryEnd,
    pub theta_determined: bool,
    pub stats: StepStats,
}

impl HydrogenTrajectory {
    /// `t,r,theta,r_dot,theta_dot,law`; undetermined angles are empty cells.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        writeln!(out, "t,r,theta,r_dot,theta_dot,law")?;
        for s in &self.samples {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                s.t,
                s.r,
                cell(s.theta),
                s.r_dot,
                cell(s.theta_dot),
                self.law.label()
            )?;
        }
        Ok(())
    }

    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "law": self.law.label(),
            "termination": self.termination,
            "theta_determined": self.theta_determined,
            "samples": self.samples.len(),
            "stats": self.stats,
        })
    }

    pub fn last(&self) -> &HydrogenSample {
        self.samples.last().expect("trajectory holds at least its start")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HydrogenControls {
    pub ode: OdeControls,
    /// Outer edge of the radial domain.
    pub r_max: f64,
    pub detect_stall: bool,
    pub stall: Option<StallDetector>,
}

impl Default for HydrogenControls {
    fn default() -> Self {
        Self {
            ode: OdeControls {
                abs_tol: 1e-12,
                rel_tol: 1e-10,
                ..OdeControls::default()
            },
            r_max: 20.0,
            detect_stall: true,
            stall: None,
        }
    }
}

impl HydrogenControls {
    fn ode_for(&self, energy: f64) -> OdeControls {
        let scales = Scales::new(energy, MASS, HBAR);
        let mut ode = self.ode.clone();
        ode.stop_on_underflow = true;
        ode.abs_tol *= scales.length;
        ode.max_step = Some(ode.max_step.map_or(0.1 * scales.time, |h| h.min(0.1 * scales.time)));
        ode.stall = self
            .detect_stall
            .then(|| self.stall.unwrap_or_else(|| scales.stall_detector()));
        ode
    }

    fn guard(&self) -> impl Fn(f64, &[f64]) -> bool + '_ {
        move |_, y: &[f64]| y[0] >= R_MIN && y[0] <= self.r_max
    }
}

fn end_of(termination: Termination, inward: bool) -> TrajectoryEnd {
    match termination {
        Termination::SpanComplete => TrajectoryEnd::SpanComplete,
        Termination::Stalled { t, y, .. } => TrajectoryEnd::Stalled { at: y[0], t },
        Termination::Guard { t, y } if inward => TrajectoryEnd::SingularStep { at: y[0], t },
        Termination::Guard { t, y } => TrajectoryEnd::OutOfDomain { at: y[0], t },
        Termination::Underflow { t, y } => TrajectoryEnd::SingularStep { at: y[0], t },
    }
}

fn check_start(r: f64, controls: &HydrogenControls) -> Result<()> {
    if r >= R_MIN && r <= controls.r_max {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "r_init",
            value: r,
            reason: "start radius outside [1e-3 a0, r_max]",
        })
    }
}

/// Integrate the radial energy law from `r_init`; the angle is reported as
/// undetermined.
pub fn energy_law_2d_radial(
    action: &ReducedAction2D,
    r_init: f64,
    t_span: (f64, f64),
    controls: &HydrogenControls,
) -> Result<HydrogenTrajectory> {
    require_ground(action)?;
    check_start(r_init, controls)?;
    let sample = |t: f64, r: f64, r_dot: f64| HydrogenSample {
        t,
        r,
        theta: None,
        r_dot,
        theta_dot: None,
    };
    let v0 = energy_law_radial_velocity(action, r_init)?;
    if v0 == 0.0 {
        return Ok(HydrogenTrajectory {
            law: Law2D::Energy,
            samples: vec![sample(t_span.0, r_init, 0.0)],
            termination: TrajectoryEnd::Stalled { at: r_init, t: t_span.0 },
            theta_determined: false,
            stats: StepStats::default(),
        });
    }
    let ode = controls.ode_for(action.energy());
    let solution = ode_solve_guarded(
        |_, y, d| d[0] = energy_law_radial_velocity(action, y[0]).unwrap_or(f64::NAN),
        controls.guard(),
        &[r_init],
        t_span,
        &ode,
    )?;
    let samples: Vec<HydrogenSample> = solution
        .samples
        .iter()
        .filter(|s| s.kind != SampleKind::Step || ode.record_steps || ode.output_times.is_empty())
        .map(|s| sample(s.t, s.y[0], s.dydt[0]))
        .collect();
    let inward = samples.last().map_or(false, |s| s.r_dot < 0.0);
    Ok(HydrogenTrajectory {
        law: Law2D::Energy,
        samples,
        termination: end_of(solution.termination, inward),
        theta_determined: false,
        stats: solution.stats,
    })
}

/// Integrate the polar Bohm-form law from `(r, theta)`.
pub fn integrate_bohm_2d(
    action: &ReducedAction2D,
    start: (f64, f64),
    t_span: (f64, f64),
    controls: &HydrogenControls,
) -> Result<HydrogenTrajectory> {
    check_start(start.0, controls)?;
    let ode = controls.ode_for(action.energy());
    let solution = ode_solve_guarded(
        |_, y, d| match bohm_form_2d(action, y[0], y[1]) {
            Ok((r_dot, theta_dot)) => {
                d[0] = r_dot;
                d[1] = theta_dot;
            }
            Err(_) => d.fill(f64::NAN),
        },
        controls.guard(),
        &[start.0, start.1],
        t_span,
        &ode,
    )?;
    let samples: Vec<HydrogenSample> = solution
        .samples
        .iter()
        .filter(|s| s.kind != SampleKind::Step || ode.record_steps || ode.output_times.is_empty())
        .map(|s| HydrogenSample {
            t: s.t,
            r: s.y[0],
            theta: Some(s.y[1]),
            r_dot: s.dydt[0],
            theta_dot: Some(s.dydt[1]),
        })
        .collect();
    let inward = samples.last().map_or(false, |s| s.r_dot < 0.0);
    Ok(HydrogenTrajectory {
        law: Law2D::Bohm,
        samples,
        termination: end_of(solution.termination, inward),
        theta_determined: true,
        stats: solution.stats,
    })
}

/// Post-hoc energy-law balance `rdot dS0/dr - 2 (E0 - V)` along a radial
/// trajectory, with `dS0/dr` from the general gradient.
pub fn energy_law_2d_residuals(action: &ReducedAction2D, trajectory: &HydrogenTrajectory) -> Result<Vec<f64>> {
    trajectory
        .samples
        .iter()
        .map(|s| {
            let (ds_dr, _) = action.gradient(s.r, 0.0)?;
            Ok(s.r_dot * ds_dr - 2.0 * (action.energy() - coulomb(s.r)))
        })
        .collect()
}
