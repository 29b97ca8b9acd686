//! Dormand-Prince 5(4) integrator with dense output, a stall detector and
//! a state guard.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StallDetector {
    /// Largest derivative component magnitude still counted as "stalled".
    pub speed_floor: f64,
    /// How long the state has to stay below `speed_floor`.
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeControls {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub initial_step: Option<f64>,
    pub max_step: Option<f64>,
    pub max_steps: usize,
    /// Extra sample times, interpolated from the dense output.
    pub output_times: Vec<f64>,
    /// Keep every accepted step in the solution, not only `output_times`.
    pub record_steps: bool,
    pub stall: Option<StallDetector>,
    /// Report a step-size underflow with a finite state as
    /// [`Termination::Underflow`] instead of an error.
    pub stop_on_underflow: bool,
}

impl Default for OdeControls {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            initial_step: None,
            max_step: None,
            max_steps: 1_000_000,
            output_times: Vec::new(),
            record_steps: true,
            stall: None,
            stop_on_underflow: false,
        }
    }
}

impl OdeControls {
    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleKind {
    Initial,
    Step,
    Output,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeSample {
    pub t: f64,
    pub y: Vec<f64>,
    pub dydt: Vec<f64>,
    pub kind: SampleKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Termination {
    SpanComplete,
    /// Derivative stayed below the stall floor; `since` is when it first did.
    Stalled { t: f64, since: f64, y: Vec<f64> },
    /// The guard rejected every step, down to the minimum step size.
    Guard { t: f64, y: Vec<f64> },
    /// The step size underflowed with a finite state (only with
    /// `stop_on_underflow`), e.g. a solution blowing up in finite time.
    Underflow { t: f64, y: Vec<f64> },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
    pub min_step: f64,
    pub max_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeSolution {
    pub samples: Vec<OdeSample>,
    pub termination: Termination,
    pub stats: StepStats,
}

impl OdeSolution {
    pub fn last(&self) -> &OdeSample {
        self.samples.last().expect("solution always holds the initial sample")
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Integrate `dy/dt = rhs(t, y)` over `t_span`.
pub fn ode_solve<F>(rhs: F, initial: &[f64], t_span: (f64, f64), controls: &OdeControls) -> Result<OdeSolution>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    ode_solve_guarded(rhs, |_, _| true, initial, t_span, controls)
}

fn check_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Like [`ode_solve`], but `guard(t, y)` must hold for every accepted state.
///
/// Steps that leave the admissible set are shrunk; when the step cannot be
/// shrunk any further the integration ends with [`Termination::Guard`].
/// Non-finite derivatives inside the admissible set are reported as
/// [`Error::StepUnderflow`].
pub fn ode_solve_guarded<F, G>(
    rhs: F,
    guard: G,
    initial: &[f64],
    t_span: (f64, f64),
    controls: &OdeControls,
) -> Result<OdeSolution>
where
    F: Fn(f64, &[f64], &mut [f64]),
    G: Fn(f64, &[f64]) -> bool,
{
    let (t0, t_end) = t_span;
    if !(t0.is_finite() && t_end.is_finite() && t_end > t0) {
        return Err(Error::InvalidInput(format!("bad time span [{t0}, {t_end}]")));
    }
    if !(controls.abs_tol > 0.0 && controls.rel_tol > 0.0) {
        return Err(Error::InvalidInput("ODE tolerances must be positive".into()));
    }
    let n = initial.len();
    let mut y = initial.to_vec();
    let mut f0 = vec![0.0; n];
    rhs(t0, &y, &mut f0);
    if !check_finite(&f0) || !check_finite(&y) {
        return Err(Error::NonFinite { at: t0 });
    }
    if !guard(t0, &y) {
        return Err(Error::InvalidInput(format!("initial state {y:?} rejected by guard")));
    }

    let mut outputs: Vec<f64> = controls
        .output_times
        .iter()
        .copied()
        .filter(|&t| t > t0 && t <= t_end)
        .collect();
    outputs.sort_by(f64::total_cmp);
    outputs.dedup();
    let mut next_output = 0;

    let mut stats = StepStats {
        evaluations: 1,
        min_step: f64::INFINITY,
        ..StepStats::default()
    };
    let mut samples = vec![OdeSample {
        t: t0,
        y: y.clone(),
        dydt: f0.clone(),
        kind: SampleKind::Initial,
    }];

    let span = t_end - t0;
    let max_step = controls.max_step.unwrap_or(span).min(span);
    let mut h = controls
        .initial_step
        .unwrap_or_else(|| initial_step(&y, &f0, controls, span))
        .min(max_step);
    let mut t = t0;

    let mut k = vec![vec![0.0; n]; 7];
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut stall_since: Option<f64> = None;
    let mut guard_hits = 0usize;

    k[0].copy_from_slice(&f0);
    let termination = loop {
        if t >= t_end {
            break Termination::SpanComplete;
        }
        if stats.accepted + stats.rejected >= controls.max_steps {
            return Err(Error::StepUnderflow {
                t,
                step: h,
                state: y.clone(),
            });
        }
        let min_step = 16.0 * f64::EPSILON * t.abs().max(span);
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }

        // Stages 2..7 (FSAL: k[0] holds f(t, y)). A stage outside the guard
        // counts as a guard hit: the field need not be defined there.
        let mut inside = true;
        for i in 0..n {
            stage[i] = y[i] + h * A21 * k[0][i];
        }
        inside &= guard(t + C2 * h, &stage);
        rhs(t + C2 * h, &stage, &mut k[1]);
        for i in 0..n {
            stage[i] = y[i] + h * (A31 * k[0][i] + A32 * k[1][i]);
        }
        inside &= guard(t + C3 * h, &stage);
        rhs(t + C3 * h, &stage, &mut k[2]);
        for i in 0..n {
            stage[i] = y[i] + h * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
        }
        inside &= guard(t + C4 * h, &stage);
        rhs(t + C4 * h, &stage, &mut k[3]);
        for i in 0..n {
            stage[i] = y[i] + h * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
        }
        inside &= guard(t + C5 * h, &stage);
        rhs(t + C5 * h, &stage, &mut k[4]);
        for i in 0..n {
            stage[i] = y[i]
                + h * (A61 * k[0][i] + A62 * k[1][i] + A63 * k[2][i] + A64 * k[3][i] + A65 * k[4][i]);
        }
        inside &= guard(t + h, &stage);
        rhs(t + h, &stage, &mut k[5]);
        for i in 0..n {
            y_new[i] = y[i]
                + h * (A71 * k[0][i] + A73 * k[2][i] + A74 * k[3][i] + A75 * k[4][i] + A76 * k[5][i]);
        }
        let t_new = if last { t_end } else { t + h };
        rhs(t_new, &y_new, &mut k[6]);
        stats.evaluations += 6;

        let finite = k.iter().all(|ki| check_finite(ki)) && check_finite(&y_new);
        let admissible = inside && finite && guard(t_new, &y_new);

        let mut err = f64::INFINITY;
        if admissible {
            let mut acc = 0.0;
            for i in 0..n {
                let e = h
                    * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
                let scale = controls.abs_tol + controls.rel_tol * y[i].abs().max(y_new[i].abs());
                acc += (e / scale).powi(2);
            }
            err = (acc / n as f64).sqrt();
        }

        if err <= 1.0 {
            // Dense-output coefficients for this step.
            let mut dense = vec![[0.0; 5]; n];
            for i in 0..n {
                let dy = y_new[i] - y[i];
                let bspl = h * k[0][i] - dy;
                dense[i] = [
                    y[i],
                    dy,
                    bspl,
                    dy - h * k[6][i] - bspl,
                    h * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k[6][i]),
                ];
            }
            while next_output < outputs.len() && outputs[next_output] <= t_new {
                let to = outputs[next_output];
                let theta = (to - t) / h;
                let th1 = 1.0 - theta;
                let yo: Vec<f64> = dense
                    .iter()
                    .map(|c| c[0] + theta * (c[1] + th1 * (c[2] + theta * (c[3] + th1 * c[4]))))
                    .collect();
                let mut fo = vec![0.0; n];
                rhs(to, &yo, &mut fo);
                stats.evaluations += 1;
                samples.push(OdeSample {
                    t: to,
                    y: yo,
                    dydt: fo,
                    kind: SampleKind::Output,
                });
                next_output += 1;
            }

            stats.accepted += 1;
            stats.min_step = stats.min_step.min(h);
            stats.max_step = stats.max_step.max(h);
            t = t_new;
            y.copy_from_slice(&y_new);
            let (head, tail) = k.split_at_mut(1);
            head[0].copy_from_slice(&tail[5]);
            guard_hits = 0;
            if controls.record_steps && samples.last().map_or(true, |s| s.t < t) {
                samples.push(OdeSample {
                    t,
                    y: y.clone(),
                    dydt: k[0].clone(),
                    kind: SampleKind::Step,
                });
            }

            if let Some(stall) = controls.stall {
                let speed = k[0].iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if speed < stall.speed_floor {
                    let since = *stall_since.get_or_insert(t);
                    if t - since >= stall.duration && t < t_end {
                        break Termination::Stalled { t, since, y: y.clone() };
                    }
                } else {
                    stall_since = None;
                }
            }

            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * factor).min(max_step);
        } else {
            stats.rejected += 1;
            if !admissible && (finite || !inside) {
                guard_hits += 1;
            }
            let factor = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.25 };
            h *= factor;
            if h < min_step {
                if !finite && inside {
                    return Err(Error::StepUnderflow {
                        t,
                        step: h,
                        state: y.clone(),
                    });
                }
                if guard_hits > 0 {
                    break Termination::Guard { t, y: y.clone() };
                }
                if controls.stop_on_underflow && finite {
                    break Termination::Underflow { t, y: y.clone() };
                }
                return Err(Error::StepUnderflow {
                    t,
                    step: h,
                    state: y.clone(),
                });
            }
        }
    };

    if stats.accepted == 0 {
        stats.min_step = 0.0;
    }
    if !controls.record_steps {
        // Always keep the final state.
        if samples.last().map_or(true, |s| s.t < t) {
            samples.push(OdeSample {
                t,
                y: y.clone(),
                dydt: k[0].clone(),
                kind: SampleKind::Step,
            });
        }
    }
    Ok(OdeSolution {
        samples,
        termination,
        stats,
    })
}

fn initial_step(y: &[f64], f: &[f64], controls: &OdeControls, span: f64) -> f64 {
    let n = y.len() as f64;
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for (yi, fi) in y.iter().zip(f) {
        let sc = controls.abs_tol + controls.rel_tol * yi.abs();
        d0 += (yi / sc).powi(2);
        d1 += (fi / sc).powi(2);
    }
    let d0 = (d0 / n).sqrt();
    let d1 = (d1 / n).sqrt();
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(span).max(1e-12 * span)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_rhs() {
        let sol = ode_solve(|_, _, d| d[0] = 1.0, &[0.0], (0.0, 1.0), &OdeControls::default()).unwrap();
        assert!((sol.last().y[0] - 1.0).abs() < 1e-10);
        assert_eq!(sol.termination, Termination::SpanComplete);
    }

    #[test]
    fn exponential_growth() {
        let sol = ode_solve(|_, y, d| d[0] = y[0], &[1.0], (0.0, 1.0), &OdeControls::default()).unwrap();
        assert!((sol.last().y[0] - std::f64::consts::E).abs() < 1e-8);
    }

    #[test]
    fn dense_output_matches_exact() {
        let controls = OdeControls {
            output_times: (1..20).map(|i| i as f64 * 0.1).collect(),
            record_steps: false,
            ..OdeControls::default()
        };
        let sol = ode_solve(|_, y, d| d[0] = y[0], &[1.0], (0.0, 2.0), &controls).unwrap();
        let outputs: Vec<_> = sol.samples.iter().filter(|s| s.kind == SampleKind::Output).collect();
        assert_eq!(outputs.len(), 19);
        for s in outputs {
            assert!((s.y[0] - s.t.exp()).abs() < 1e-8 * s.t.exp(), "t = {}", s.t);
        }
    }

    #[test]
    fn harmonic_energy_drift() {
        let controls = OdeControls {
            record_steps: false,
            ..OdeControls::default()
        };
        let t_end = 100.0 * 2.0 * PI;
        let sol = ode_solve(
            |_, y, d| {
                d[0] = y[1];
                d[1] = -y[0];
            },
            &[1.0, 0.0],
            (0.0, t_end),
            &controls,
        )
        .unwrap();
        let y = &sol.last().y;
        let energy = 0.5 * (y[0] * y[0] + y[1] * y[1]);
        assert!((energy - 0.5).abs() / 0.5 <= 1e-6, "drift {}", (energy - 0.5).abs() / 0.5);
    }

    #[test]
    fn stall_detection() {
        let controls = OdeControls {
            stall: Some(StallDetector {
                speed_floor: 1e-6,
                duration: 5.0,
            }),
            ..OdeControls::default()
        };
        let sol = ode_solve(|_, y, d| d[0] = -y[0], &[1.0], (0.0, 1000.0), &controls).unwrap();
        match sol.termination {
            Termination::Stalled { t, since, .. } => {
                assert!(t - since >= 5.0);
                assert!(t < 100.0);
            }
            other => panic!("expected stall, got {other:?}"),
        }
    }

    #[test]
    fn guard_stops_at_boundary() {
        let sol = ode_solve_guarded(|_, _, d| d[0] = 1.0, |_, y| y[0] <= 0.5, &[0.0], (0.0, 1.0), &OdeControls::default())
            .unwrap();
        match sol.termination {
            Termination::Guard { y, .. } => assert!((y[0] - 0.5).abs() < 1e-9, "{y:?}"),
            other => panic!("expected guard stop, got {other:?}"),
        }
    }

    #[test]
    fn singular_rhs_reports_location() {
        let r = ode_solve(|t, _, d| d[0] = 1.0 / (0.5 - t), &[0.0], (0.0, 1.0), &OdeControls::default());
        match r {
            Err(Error::StepUnderflow { t, .. }) => assert!((t - 0.5).abs() < 1e-3, "t = {t}"),
            other => panic!("expected underflow, got {other:?}"),
        }
    }
}
