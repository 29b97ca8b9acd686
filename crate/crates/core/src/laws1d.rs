//! The three competing 1-D laws of motion built on a reduced action:
//! the energy law `S0' xdot / 2 + V = E`, the Bohm-form law `m xdot = S0'`
//! and Floyd's Jacobi-theorem time `dt/dx = dP/dE`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    fd_derivative, integrate, ode_solve_guarded, Derivative, OdeControls, QuadratureSpec, SampleKind,
    StallDetector, StepStats, Termination,
};
use crate::reduced_action::ReducedAction1D;
use crate::schrodinger1d::{pair_free, WaveEquation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawKind {
    EnergyLaw,
    BohmForm,
    FloydJacobi,
}

impl LawKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::EnergyLaw => "energy",
            Self::BohmForm => "bohm",
            Self::FloydJacobi => "floyd",
        }
    }
}

/// Characteristic scales of a particle of energy `E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scales {
    pub velocity: f64,
    pub length: f64,
    pub time: f64,
}

impl Scales {
    pub fn new(energy: f64, mass: f64, hbar: f64) -> Self {
        let velocity = (2.0 * energy.abs() / mass).sqrt();
        let length = hbar / (2.0 * mass * energy.abs()).sqrt();
        Self {
            velocity,
            length,
            time: length / velocity,
        }
    }

    pub fn of(action: &ReducedAction1D) -> Self {
        Self::new(action.energy(), action.mass(), action.hbar())
    }

    /// Stall floor `1e-8 v` held for `1e3 t`.
    pub fn stall_detector(&self) -> StallDetector {
        StallDetector {
            speed_floor: 1e-8 * self.velocity,
            duration: 1e3 * self.time,
        }
    }
}

/// de Broglie wavelength `2 pi hbar / sqrt(2 m E)`.
pub fn de_broglie_length(energy: f64, mass: f64, hbar: f64) -> f64 {
    2.0 * std::f64::consts::PI * hbar / (2.0 * mass * energy).sqrt()
}

/// `xdot = 2 (E - V) / S0'`.
pub fn velocity_energy_law(action: &ReducedAction1D, x: f64) -> f64 {
    2.0 * (action.energy() - action.potential(x)) / action.ds0_dx(x)
}

/// `xdot = S0' / m`.
pub fn velocity_bohm_form(action: &ReducedAction1D, x: f64) -> f64 {
    action.ds0_dx(x) / action.mass()
}

/// Momentum `P(x; E) = S0'(x; E)` of the free family with the same `(a, b)`.
fn free_family_momentum(action: &ReducedAction1D, x: f64, energy: f64) -> f64 {
    match pair_free(energy, action.mass(), action.hbar())
        .and_then(|p| ReducedAction1D::new(p, action.a(), action.b(), action.lambda()))
    {
        Ok(a) => a.ds0_dx(x),
        Err(_) => f64::NAN,
    }
}

/// `dt/dx = dP/dE` by a central difference in `E` with step `de`.
///
/// Only analytic (free Schrodinger) families are supported, and `(a, b)`
/// are held fixed while `E` varies.
pub fn dt_dx_floyd(action: &ReducedAction1D, x: f64, de: f64) -> Result<f64> {
    let pair = action.pair();
    if !pair.is_analytic() || pair.equation() != WaveEquation::Schrodinger {
        return Err(Error::Unsupported(
            "Floyd time needs an analytic energy family; tabulated/numeric pairs are not supported".into(),
        ));
    }
    if !(de > 0.0 && de < action.energy()) {
        return Err(Error::InvalidInput(format!("energy step {de} must lie in (0, E)")));
    }
    fd_derivative(|e| free_family_momentum(action, x, e), action.energy(), Derivative::First, de)
}

/// Floyd time `t(x) - t(x_start) = integral of dt/dx`.
pub fn floyd_time(action: &ReducedAction1D, x_start: f64, x: f64, de: f64) -> Result<f64> {
    dt_dx_floyd(action, x_start, de)?;
    integrate(
        |y| dt_dx_floyd(action, y, de).unwrap_or(f64::NAN),
        x_start,
        x,
        &QuadratureSpec::with_tolerances(1e-10, 1e-9),
    )
}

/// A law of motion bound to a reduced action.
#[derive(Debug, Clone, PartialEq)]
pub struct LawOfMotion {
    pub kind: LawKind,
    pub action: ReducedAction1D,
    /// Energy step for the Floyd law's `dP/dE`.
    pub floyd_energy_step: f64,
}

impl LawOfMotion {
    pub fn new(kind: LawKind, action: ReducedAction1D) -> Self {
        let floyd_energy_step = 1e-3 * action.energy().abs();
        Self {
            kind,
            action,
            floyd_energy_step,
        }
    }

    pub fn velocity(&self, x: f64) -> f64 {
        match self.kind {
            LawKind::EnergyLaw => velocity_energy_law(&self.action, x),
            LawKind::BohmForm => velocity_bohm_form(&self.action, x),
            LawKind::FloydJacobi => dt_dx_floyd(&self.action, x, self.floyd_energy_step)
                .map(f64::recip)
                .unwrap_or(f64::NAN),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TrajectoryEnd {
    SpanComplete,
    Stalled { at: f64, t: f64 },
    SingularStep { at: f64, t: f64 },
    OutOfDomain { at: f64, t: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub law: LawKind,
    pub a: f64,
    pub b: f64,
    pub energy: f64,
    pub samples: Vec<TrajectorySample>,
    pub termination: TrajectoryEnd,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn stall_location(&self) -> Option<f64> {
        match self.termination {
            TrajectoryEnd::Stalled { at, .. } => Some(at),
            _ => None,
        }
    }

    pub fn is_stalled(&self) -> bool {
        matches!(self.termination, TrajectoryEnd::Stalled { .. })
    }

    pub fn last(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectory holds at least its start")
    }

    pub fn max_x(&self) -> f64 {
        self.samples.iter().map(|s| s.x).fold(f64::NEG_INFINITY, f64::max)
    }

    /// First time `x` reaches `level` from below, linearly interpolated.
    pub fn first_crossing(&self, level: f64) -> Option<f64> {
        let s = &self.samples;
        if s.first()?.x == level && s[0].v > 0.0 {
            return Some(s[0].t);
        }
        s.windows(2).find_map(|w| {
            (w[0].x < level && w[1].x >= level)
                .then(|| w[0].t + (level - w[0].x) / (w[1].x - w[0].x) * (w[1].t - w[0].t))
        })
    }

    /// Position at time `t` by linear interpolation (None outside the span).
    pub fn position_at(&self, t: f64) -> Option<f64> {
        let s = &self.samples;
        if t < s.first()?.t || t > s.last()?.t {
            return None;
        }
        let i = s.partition_point(|p| p.t <= t);
        if i == 0 {
            return Some(s[0].x);
        }
        if i >= s.len() {
            return Some(s[s.len() - 1].x);
        }
        let (p, q) = (&s[i - 1], &s[i]);
        Some(p.x + (t - p.t) / (q.t - p.t) * (q.x - p.x))
    }

    /// Write `t,x,v,law,a,b,E` rows with one header line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,x,v,law,a,b,E")?;
        for s in &self.samples {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                s.t,
                s.x,
                s.v,
                self.law.label(),
                self.a,
                self.b,
                self.energy
            )?;
        }
        Ok(())
    }

    /// Termination and stall metadata for the JSON sidecar.
    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "law": self.law.label(),
            "a": self.a,
            "b": self.b,
            "E": self.energy,
            "termination": self.termination,
            "stall_location": self.stall_location(),
            "samples": self.samples.len(),
            "stats": self.stats,
        })
    }
}

/// ODE controls plus the optional stall detector; `stall: None` uses the
/// characteristic-scale default, set `detect_stall = false` to disable it.
///
/// With `scale_to_particle` set, the absolute tolerance is taken relative to
/// the characteristic length and the step is capped at a tenth of the
/// characteristic time. Without the cap the approach to a turning point
/// settles into a tolerance-sized limit cycle at the edge of the explicit
/// scheme's stability region instead of decaying.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryControls {
    pub ode: OdeControls,
    pub detect_stall: bool,
    pub stall: Option<StallDetector>,
    pub scale_to_particle: bool,
}

impl Default for TrajectoryControls {
    fn default() -> Self {
        Self {
            ode: OdeControls {
                abs_tol: 1e-12,
                rel_tol: 1e-10,
                ..OdeControls::default()
            },
            detect_stall: true,
            stall: None,
            scale_to_particle: true,
        }
    }
}

impl TrajectoryControls {
    pub fn without_stall() -> Self {
        Self {
            detect_stall: false,
            ..Self::default()
        }
    }
}

pub fn integrate_trajectory(
    law: &LawOfMotion,
    x0: f64,
    t_span: (f64, f64),
    controls: &TrajectoryControls,
) -> Result<Trajectory> {
    let action = &law.action;
    let pair = action.pair();
    if !pair.contains(x0) {
        return Err(Error::Domain {
            what: "integrate_trajectory",
            value: x0,
            reason: "start point outside the pair's domain",
        });
    }
    let scales = Scales::of(action);
    let mut ode = controls.ode.clone();
    ode.stop_on_underflow = true;
    if controls.scale_to_particle {
        ode.abs_tol *= scales.length;
        ode.max_step = Some(ode.max_step.map_or(0.1 * scales.time, |h| h.min(0.1 * scales.time)));
    }
    ode.stall = controls
        .detect_stall
        .then(|| controls.stall.unwrap_or_else(|| scales.stall_detector()));

    let make = |samples: Vec<TrajectorySample>, termination, stats| Trajectory {
        law: law.kind,
        a: action.a(),
        b: action.b(),
        energy: action.energy(),
        samples,
        termination,
        stats,
    };

    let v0 = law.velocity(x0);
    if !v0.is_finite() {
        return Err(Error::NonFinite { at: x0 });
    }
    if law.kind == LawKind::EnergyLaw && v0 == 0.0 {
        // Starting on a turning point: the trajectory is the constant map.
        let sample = TrajectorySample { t: t_span.0, x: x0, v: 0.0 };
        return Ok(make(
            vec![sample],
            TrajectoryEnd::Stalled { at: x0, t: t_span.0 },
            StepStats::default(),
        ));
    }

    let solution = ode_solve_guarded(
        |_, y, d| d[0] = law.velocity(y[0]),
        |_, y| pair.contains(y[0]),
        &[x0],
        t_span,
        &ode,
    )?;
    let samples = solution
        .samples
        .iter()
        .filter(|s| s.kind != SampleKind::Step || controls.ode.record_steps || controls.ode.output_times.is_empty())
        .map(|s| TrajectorySample {
            t: s.t,
            x: s.y[0],
            v: s.dydt[0],
        })
        .collect();
    let termination = match solution.termination {
        Termination::SpanComplete => TrajectoryEnd::SpanComplete,
        Termination::Stalled { t, y, .. } => TrajectoryEnd::Stalled { at: y[0], t },
        Termination::Guard { t, y } => TrajectoryEnd::OutOfDomain { at: y[0], t },
        Termination::Underflow { t, y } => TrajectoryEnd::SingularStep { at: y[0], t },
    };
    Ok(make(samples, termination, solution.stats))
}

/// Post-hoc energy-law balance `S0' v / 2 + V - E` at each sample.
pub fn energy_law_residuals(action: &ReducedAction1D, trajectory: &Trajectory) -> Vec<f64> {
    trajectory
        .samples
        .iter()
        .map(|s| 0.5 * action.ds0_dx(s.x) * s.v + action.potential(s.x) - action.energy())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub a: f64,
    pub b: f64,
    pub trajectory: Trajectory,
}

/// Trajectories sharing `E`, `m`, `hbar` and `V` over a set of `(a, b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFamily {
    pub energy: f64,
    pub mass: f64,
    pub hbar: f64,
    /// Reference crossing point fixing each member's time origin.
    pub x0: f64,
    pub members: Vec<FamilyMember>,
}

impl TrajectoryFamily {
    /// Integrate one member per `(a, b)` in parallel. Members are ordered by
    /// `(a, b)` regardless of scheduling.
    pub fn integrate(
        base: &ReducedAction1D,
        kind: LawKind,
        constants: &[(f64, f64)],
        x0: f64,
        t_span: (f64, f64),
        controls: &TrajectoryControls,
    ) -> Result<Self> {
        let mut sorted = constants.to_vec();
        sorted.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
        let members = sorted
            .par_iter()
            .map(|&(a, b)| {
                let action = ReducedAction1D::new(base.pair().clone(), a, b, base.lambda())?;
                let law = LawOfMotion::new(kind, action);
                let trajectory = integrate_trajectory(&law, x0, t_span, controls)?;
                Ok(FamilyMember { a, b, trajectory })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            energy: base.energy(),
            mass: base.mass(),
            hbar: base.hbar(),
            x0,
            members,
        })
    }

    pub fn from_members(energy: f64, mass: f64, hbar: f64, x0: f64, members: Vec<FamilyMember>) -> Self {
        Self {
            energy,
            mass,
            hbar,
            x0,
            members,
        }
    }

    pub fn de_broglie_length(&self) -> f64 {
        de_broglie_length(self.energy, self.mass, self.hbar)
    }

    /// Default node tolerance: `1e-3` de Broglie lengths.
    pub fn default_node_tolerance(&self) -> f64 {
        1e-3 * self.de_broglie_length()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    /// Time since each member's reference crossing.
    pub t: f64,
    pub x: f64,
    /// Largest distance between members at this time.
    pub spread: f64,
}

/// Number of common-time samples used by [`detect_nodes`].
pub const NODE_TIME_SAMPLES: usize = 20_000;

/// Points through which every member passes at a common time (measured from
/// each member's first upward crossing of `x0`), to within `tol`.
///
/// A node is a common-time sample whose across-member spread is at most
/// `tol` and no larger than at the neighbouring samples.
pub fn detect_nodes(family: &TrajectoryFamily, tol: f64) -> Result<Vec<Node>> {
    if family.members.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "node detection needs at least 3 members, got {}",
            family.members.len()
        )));
    }
    let mut shifted = Vec::with_capacity(family.members.len());
    for m in &family.members {
        let Some(t0) = m.trajectory.first_crossing(family.x0) else {
            return Ok(Vec::new());
        };
        shifted.push((t0, &m.trajectory));
    }
    let horizon = shifted
        .iter()
        .map(|(t0, tr)| tr.last().t - t0)
        .fold(f64::INFINITY, f64::min);
    if !(horizon > 0.0) {
        return Ok(Vec::new());
    }

    let n = NODE_TIME_SAMPLES;
    let mut spread = Vec::with_capacity(n);
    let mut centre = Vec::with_capacity(n);
    for i in 0..n {
        let tau = horizon * i as f64 / (n - 1) as f64;
        let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
        for (t0, tr) in &shifted {
            let x = tr.position_at(t0 + tau).unwrap_or(f64::NAN);
            lo = lo.min(x);
            hi = hi.max(x);
            sum += x;
        }
        spread.push(hi - lo);
        centre.push(sum / shifted.len() as f64);
    }

    let nodes = (0..n)
        .filter(|&i| {
            let s = spread[i];
            s <= tol
                && (i == 0 || s <= spread[i - 1])
                && (i + 1 == n || s <= spread[i + 1])
        })
        .map(|i| Node {
            t: horizon * i as f64 / (n - 1) as f64,
            x: centre[i],
            spread: spread[i],
        })
        .collect();
    Ok(nodes)
}

/// Mean distance between consecutive node positions.
pub fn mean_node_spacing(nodes: &[Node]) -> Option<f64> {
    if nodes.len() < 2 {
        return None;
    }
    let total: f64 = nodes.windows(2).map(|w| (w[1].x - w[0].x).abs()).sum();
    Some(total / (nodes.len() - 1) as f64)
}
