//! Spinless relativistic extension in 1-D: Klein-Gordon solution pairs, the
//! relativistic QHJE and continuity checks, the proper-time law
//! `S0' dx/dtau + (m^2c^4 - (E-V)^2)/(mc^2) = 0` and its lab-time form.
//!
//! `E` is the total energy including the rest energy.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laws1d::{Scales, TrajectoryEnd};
use crate::numerics::{fd_derivative_auto, ode_solve_guarded, Derivative, Grid1D, OdeControls, SampleKind, StepStats, Termination};
use crate::reduced_action::{ReducedAction1D, CONTINUITY_TOLERANCE};
use crate::report::ResidualReport;
use crate::schrodinger1d::{numeric_pair, PotentialSpec, SolutionPair, WaveEquation};

/// Relative QHJE tolerance, in units of `mc^2`.
pub const REL_QHJE_TOLERANCE: f64 = 1e-8;
/// `|(E-V)^2 - m^2c^4|` must exceed this fraction of `(mc^2)^2`.
pub const THRESHOLD_GUARD: f64 = 1e-9;

/// `(E - V)^2 - m^2 c^4`, factored to avoid cancellation near the rest energy.
fn kinetic_gap(ev: f64, mc2: f64) -> f64 {
    (ev - mc2) * (ev + mc2)
}

/// Free Klein-Gordon pair `sin kx, cos kx` with `hbar k = sqrt(E^2 - m^2c^4)/c`; `W = k`.
pub fn kg_pair_free(energy: f64, mass: f64, c: f64, hbar: f64) -> Result<SolutionPair> {
    check_constants(mass, c, hbar)?;
    let mc2 = mass * c * c;
    let gap = kinetic_gap(energy.abs(), mc2);
    if !(gap > 0.0) || !energy.is_finite() {
        return Err(Error::Domain {
            what: "kg_pair_free",
            value: energy,
            reason: "needs E^2 > m^2 c^4",
        });
    }
    let k = gap.sqrt() / (hbar * c);
    Ok(SolutionPair::free_with_equation(k, WaveEquation::KleinGordon { c }, energy, mass, hbar))
}

/// Numerov Klein-Gordon pair over the potential's domain.
pub fn kg_pair_numeric(
    potential: &PotentialSpec,
    energy: f64,
    mass: f64,
    c: f64,
    hbar: f64,
    step: f64,
) -> Result<SolutionPair> {
    check_constants(mass, c, hbar)?;
    numeric_pair(potential, WaveEquation::KleinGordon { c }, energy, mass, hbar, step)
}

fn check_constants(mass: f64, c: f64, hbar: f64) -> Result<()> {
    for (name, v) in [("mass", mass), ("c", c), ("hbar", hbar)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(())
}

/// Relativistic reduced action `hbar arctan(a phi1/phi2 + b) + hbar lambda`
/// with amplitude `R = k sqrt(u^2 + v^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelSetup {
    action: ReducedAction1D,
    c: f64,
    amplitude: f64,
}

impl RelSetup {
    pub fn new(pair: SolutionPair, a: f64, b: f64, lambda: f64, amplitude: f64) -> Result<Self> {
        let c = match pair.equation() {
            WaveEquation::KleinGordon { c } => c,
            WaveEquation::Schrodinger => {
                return Err(Error::InvalidInput("relativistic setup needs a Klein-Gordon pair".into()))
            }
        };
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::InvalidInput(format!("amplitude constant must be positive, got {amplitude}")));
        }
        Ok(Self {
            action: ReducedAction1D::new(pair, a, b, lambda)?,
            c,
            amplitude,
        })
    }

    /// Free pair with `a = 1, b = 0`, `lambda = 0`, `k = 1`.
    pub fn free(energy: f64, mass: f64, c: f64, hbar: f64) -> Result<Self> {
        Self::new(kg_pair_free(energy, mass, c, hbar)?, 1.0, 0.0, 0.0, 1.0)
    }

    pub fn action(&self) -> &ReducedAction1D {
        &self.action
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn energy(&self) -> f64 {
        self.action.energy()
    }

    pub fn mass(&self) -> f64 {
        self.action.mass()
    }

    pub fn hbar(&self) -> f64 {
        self.action.hbar()
    }

    pub fn rest_energy(&self) -> f64 {
        self.mass() * self.c * self.c
    }

    fn kinetic_energy(&self, x: f64) -> f64 {
        self.energy() - self.action.potential(x)
    }

    /// `(E - V)^2 - m^2 c^4`.
    pub fn gap(&self, x: f64) -> f64 {
        kinetic_gap(self.kinetic_energy(x), self.rest_energy())
    }

    fn allowed_gap(&self, x: f64) -> Result<f64> {
        if !self.action.pair().contains(x) {
            return Err(Error::Domain {
                what: "x",
                value: x,
                reason: "outside the pair's domain",
            });
        }
        let gap = self.gap(x);
        let mc2 = self.rest_energy();
        if !(gap >= THRESHOLD_GUARD * mc2 * mc2) {
            return Err(Error::Domain {
                what: "x",
                value: x,
                reason: "not classically allowed: (E-V)^2 - m^2c^4 below threshold guard",
            });
        }
        Ok(gap)
    }

    /// `S0'^2/2m - (hbar^2/2mR) R'' + (m^2c^4 - (E-V)^2)/(2mc^2)` with
    /// `R''/R = D''/2D - D'^2/4D^2`, `D = u^2 + v^2`.
    pub fn qhje_point_residual(&self, x: f64) -> f64 {
        let r = self.action.recombined(x);
        let g = self.action.pair().curvature(x);
        let d = r.norm2();
        let dd = 2.0 * (r.u * r.du + r.v * r.dv);
        let ddd = 2.0 * (r.du * r.du + r.dv * r.dv) + 2.0 * g * d;
        let r_ratio = ddd / (2.0 * d) - dd * dd / (4.0 * d * d);
        let (m, hbar) = (self.mass(), self.hbar());
        let s1 = self.action.ds0_dx(x);
        s1 * s1 / (2.0 * m) - hbar * hbar / (2.0 * m) * r_ratio - self.gap(x) / (2.0 * m * self.c * self.c)
    }

    pub fn qhje_residual(&self, grid: &Grid1D) -> ResidualReport {
        let residuals = grid.points().iter().map(|&x| self.qhje_point_residual(x)).collect();
        ResidualReport::new(grid.points().to_vec(), residuals, REL_QHJE_TOLERANCE * self.rest_energy())
    }

    /// `R^2 S0' = k^2 hbar (u' v - u v')`.
    pub fn flux(&self, x: f64) -> f64 {
        self.amplitude * self.amplitude * self.action.flux(x)
    }

    /// Relative deviation of `R^2 S0'` from its value at the first grid point.
    pub fn continuity_residual(&self, grid: &Grid1D) -> ResidualReport {
        let reference = self.flux(grid.lo());
        let residuals = grid
            .points()
            .iter()
            .map(|&x| (self.flux(x) - reference) / reference)
            .collect();
        ResidualReport::new(grid.points().to_vec(), residuals, CONTINUITY_TOLERANCE)
    }

    /// Proper-time law `dx/dtau = ((E-V)^2 - m^2c^4) / (m c^2 S0')`.
    pub fn law_proper(&self, x: f64) -> Result<f64> {
        let gap = self.allowed_gap(x)?;
        Ok(gap / (self.rest_energy() * self.action.ds0_dx(x)))
    }

    /// Lab-time law `dx/dt = ((E-V)^2 - m^2c^4) / ((E-V) S0')`.
    pub fn law_lab(&self, x: f64) -> Result<f64> {
        let gap = self.allowed_gap(x)?;
        let ev = self.kinetic_energy(x);
        if ev == 0.0 {
            return Err(Error::Domain {
                what: "x",
                value: x,
                reason: "E = V: lab-time law is singular",
            });
        }
        Ok(gap / (ev * self.action.ds0_dx(x)))
    }

    /// `(dxhat/dx)^2 = c^2 S0'^2 / ((E-V)^2 - m^2c^4)`.
    pub fn xhat_factor(&self, x: f64) -> Result<f64> {
        let gap = self.allowed_gap(x)?;
        let s1 = self.action.ds0_dx(x);
        Ok(self.c * self.c * s1 * s1 / gap)
    }

    /// `dtau/dt` from the flat-frame interval with `dx/dt = (dx/dtau)(dtau/dt)`
    /// substituted: `dtau/dt = 1 / sqrt(1 + (dx/dtau)^2 (dxhat/dx)^2 / c^2)`.
    pub fn dtau_dt_chain(&self, x: f64) -> Result<f64> {
        let u = self.law_proper(x)?;
        let factor = self.xhat_factor(x)?;
        Ok(1.0 / (1.0 + u * u * factor / (self.c * self.c)).sqrt())
    }

    /// `dtau/dt = sqrt(((E-V)^2 - m^2c^4 - xdot^2 S0'^2) / ((E-V)^2 - m^2c^4))`
    /// for a given lab velocity.
    pub fn dtau_dt_lab(&self, x: f64, xdot: f64) -> Result<f64> {
        let gap = self.allowed_gap(x)?;
        let s1 = self.action.ds0_dx(x);
        let ratio = (gap - xdot * xdot * s1 * s1) / gap;
        if !(ratio >= 0.0) {
            return Err(Error::Domain {
                what: "xdot",
                value: xdot,
                reason: "lab velocity exceeds the flat-frame light cone",
            });
        }
        Ok(ratio.sqrt())
    }

    /// `|lab law - proper law * dtau/dt (chain)|`.
    pub fn chain_discrepancy(&self, x: f64) -> Result<f64> {
        Ok((self.law_lab(x)? - self.law_proper(x)? * self.dtau_dt_chain(x)?).abs())
    }

    /// Proper-time law residual `S0' u + (m^2c^4 - (E-V)^2)/(mc^2)`.
    pub fn law_proper_residual(&self, x: f64, dx_dtau: f64) -> f64 {
        self.action.ds0_dx(x) * dx_dtau - self.gap(x) / self.rest_energy()
    }

    /// Residual of the contracted `D`-dimensional law for a field that only
    /// varies along the unit vector `direction`: `S0(X) = S0_1D(n.X)`.
    /// The gradient is taken by finite differences of the `D`-dimensional
    /// field and contracted with `dX/dtau = n dx/dtau`.
    pub fn contracted_law_residual(&self, direction: &[f64], point: &[f64]) -> Result<f64> {
        if direction.len() != point.len() || direction.is_empty() {
            return Err(Error::InvalidInput("direction and point must have the same nonzero length".into()));
        }
        let norm = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::InvalidInput("direction must be nonzero".into()));
        }
        let n: Vec<f64> = direction.iter().map(|d| d / norm).collect();
        let s = n.iter().zip(point).map(|(a, b)| a * b).sum::<f64>();
        let u = self.law_proper(s)?;
        let mut contracted = 0.0;
        for k in 0..point.len() {
            let field = |xk: f64| {
                let proj: f64 = (0..point.len())
                    .map(|i| n[i] * if i == k { xk } else { point[i] })
                    .sum();
                self.action.s0(proj)
            };
            let grad = fd_derivative_auto(field, point[k], Derivative::First)?;
            contracted += grad * n[k] * u;
        }
        Ok(contracted - self.gap(s) / self.rest_energy())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelSample {
    pub t: f64,
    pub tau: f64,
    pub x: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelTrajectory {
    pub a: f64,
    pub b: f64,
    pub energy: f64,
    pub samples: Vec<RelSample>,
    pub termination: TrajectoryEnd,
    pub stats: StepStats,
}

impl RelTrajectory {
    /// Trajectory CSV with the extra `tau` column.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,x,v,law,a,b,E,tau")?;
        for s in &self.samples {
            writeln!(
                out,
                "{},{},{},relativistic,{},{},{},{}",
                s.t, s.x, s.v, self.a, self.b, self.energy, s.tau
            )?;
        }
        Ok(())
    }

    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "law": "relativistic",
            "a": self.a,
            "b": self.b,
            "E": self.energy,
            "termination": self.termination,
            "samples": self.samples.len(),
            "stats": self.stats,
        })
    }
}

/// Integrate `dx/dt` (lab law) together with `dtau/dt` (chain form).
pub fn integrate_rel_trajectory(
    setup: &RelSetup,
    x0: f64,
    t_span: (f64, f64),
    controls: &OdeControls,
) -> Result<RelTrajectory> {
    setup.law_lab(x0)?;
    let kinetic = setup.energy() - setup.rest_energy();
    let scales = Scales::new(kinetic, setup.mass(), setup.hbar());
    let mut ode = controls.clone();
    ode.stop_on_underflow = true;
    ode.max_step = Some(ode.max_step.map_or(0.1 * scales.time, |h| h.min(0.1 * scales.time)));
    let solution = ode_solve_guarded(
        |_, y, d| {
            d[0] = setup.law_lab(y[0]).unwrap_or(f64::NAN);
            d[1] = setup.dtau_dt_chain(y[0]).unwrap_or(f64::NAN);
        },
        |_, y| setup.allowed_gap(y[0]).is_ok(),
        &[x0, 0.0],
        t_span,
        &ode,
    )?;
    let samples = solution
        .samples
        .iter()
        .filter(|s| s.kind != SampleKind::Step || ode.record_steps || ode.output_times.is_empty())
        .map(|s| RelSample {
            t: s.t,
            tau: s.y[1],
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
    Ok(RelTrajectory {
        a: setup.action.a(),
        b: setup.action.b(),
        energy: setup.energy(),
        samples,
        termination,
        stats: solution.stats,
    })
}

/// Deviation of the free lab-time velocity at `x` from the non-relativistic
/// energy law at the same kinetic energy `e_nr`, for light speed `c`.
pub fn nonrelativistic_deviation(e_nr: f64, mass: f64, hbar: f64, c: f64, a: f64, b: f64, x: f64) -> Result<f64> {
    let rel = RelSetup::new(kg_pair_free(mass * c * c + e_nr, mass, c, hbar)?, a, b, 0.0, 1.0)?;
    let nr = ReducedAction1D::new(crate::schrodinger1d::pair_free(e_nr, mass, hbar)?, a, b, 0.0)?;
    Ok((rel.law_lab(x)? - crate::laws1d::velocity_energy_law(&nr, x)).abs())
}

/// Least-squares slope of `log(deviation)` against `log(c)`.
pub fn c_scaling_exponent(e_nr: f64, mass: f64, hbar: f64, cs: &[f64], a: f64, b: f64, x: f64) -> Result<f64> {
    if cs.len() < 2 {
        return Err(Error::InvalidInput("need at least two light speeds".into()));
    }
    let points = cs
        .iter()
        .map(|&c| Ok((c.ln(), nonrelativistic_deviation(e_nr, mass, hbar, c, a, b, x)?.ln())))
        .collect::<Result<Vec<_>>>()?;
    let n = points.len() as f64;
    let (mx, my) = points.iter().fold((0.0, 0.0), |(sx, sy), (x, y)| (sx + x / n, sy + y / n));
    let (sxy, sxx) = points
        .iter()
        .fold((0.0, 0.0), |(sxy, sxx), (x, y)| (sxy + (x - mx) * (y - my), sxx + (x - mx) * (x - mx)));
    Ok(sxy / sxx)
}
