use std::f64::consts::PI;
use std::sync::Arc;

use super::numerov::{propagate, NumericTable};
use super::potential::PotentialSpec;
use crate::error::{Error, Result};

/// Stationary wave equation written as `phi'' = g(x) phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaveEquation {
    /// `-hbar^2 phi'' / 2m + V phi = E phi`.
    Schrodinger,
    /// `-hbar^2 phi'' / 2m + (m^2 c^4 - (E - V)^2) / (2 m c^2) phi = 0`;
    /// `E` includes the rest energy.
    KleinGordon { c: f64 },
}

/// Values and first derivatives of both members of a pair at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairPoint {
    pub phi1: f64,
    pub phi2: f64,
    pub dphi1: f64,
    pub dphi2: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum PairKind {
    /// `phi1 = sin kx`, `phi2 = cos kx`.
    Free { k: f64 },
    Numeric(Arc<NumericTable>),
    /// `phi1` multiplied by `1 + amplitude sin x`; no longer solves the
    /// equation. Used as a negative control.
    Corrupted { base: Arc<SolutionPair>, amplitude: f64 },
}

/// Two real independent solutions of a stationary 1-D wave equation.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPair {
    kind: PairKind,
    equation: WaveEquation,
    potential: PotentialSpec,
    energy: f64,
    mass: f64,
    hbar: f64,
    wronskian: f64,
}

fn check_physical(energy: f64, mass: f64, hbar: f64) -> Result<()> {
    if !energy.is_finite() {
        return Err(Error::InvalidInput(format!("energy must be finite, got {energy}")));
    }
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::InvalidInput(format!("mass must be positive, got {mass}")));
    }
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::InvalidInput(format!("hbar must be positive, got {hbar}")));
    }
    Ok(())
}

/// `phi1 = sin kx`, `phi2 = cos kx` with `k = sqrt(2mE)/hbar`, so `W = k`.
pub fn pair_free(energy: f64, mass: f64, hbar: f64) -> Result<SolutionPair> {
    check_physical(energy, mass, hbar)?;
    if energy <= 0.0 {
        return Err(Error::Domain {
            what: "pair_free",
            value: energy,
            reason: "free pair needs E > 0; use pair_numeric for other energies",
        });
    }
    let k = (2.0 * mass * energy).sqrt() / hbar;
    Ok(SolutionPair {
        kind: PairKind::Free { k },
        equation: WaveEquation::Schrodinger,
        potential: PotentialSpec::free(),
        energy,
        mass,
        hbar,
        wronskian: k,
    })
}

/// Largest tolerated relative Wronskian drift for a numeric pair.
pub const NUMERIC_WRONSKIAN_LIMIT: f64 = 1e-6;

/// Numerov pair seeded at the left domain edge with `(phi1, phi1') = (0, 1)`
/// and `(phi2, phi2') = (1, 0)`, so `W = 1`.
pub fn pair_numeric(potential: &PotentialSpec, energy: f64, mass: f64, hbar: f64, step: f64) -> Result<SolutionPair> {
    numeric_pair(potential, WaveEquation::Schrodinger, energy, mass, hbar, step)
}

pub(crate) fn numeric_pair(
    potential: &PotentialSpec,
    equation: WaveEquation,
    energy: f64,
    mass: f64,
    hbar: f64,
    step: f64,
) -> Result<SolutionPair> {
    check_physical(energy, mass, hbar)?;
    potential.validate()?;
    let (lo, hi) = potential.domain;
    let mut pair = SolutionPair {
        kind: PairKind::Free { k: 0.0 },
        equation,
        potential: potential.clone(),
        energy,
        mass,
        hbar,
        wronskian: 1.0,
    };
    let table = propagate(|x| pair.curvature(x), lo, hi, step)?;
    let drift = table
        .node_wronskians()
        .iter()
        .fold(0.0f64, |m, w| m.max((w - 1.0).abs()));
    if drift > NUMERIC_WRONSKIAN_LIMIT {
        return Err(Error::WronskianDrift {
            drift,
            limit: NUMERIC_WRONSKIAN_LIMIT,
        });
    }
    pair.kind = PairKind::Numeric(Arc::new(table));
    Ok(pair)
}

impl SolutionPair {
    pub(crate) fn free_with_equation(k: f64, equation: WaveEquation, energy: f64, mass: f64, hbar: f64) -> Self {
        Self {
            kind: PairKind::Free { k },
            equation,
            potential: PotentialSpec::free(),
            energy,
            mass,
            hbar,
            wronskian: k,
        }
    }

    /// Copy of this pair whose `phi1` is distorted by `1 + amplitude sin x`.
    pub fn corrupted(&self, amplitude: f64) -> Self {
        Self {
            kind: PairKind::Corrupted {
                base: Arc::new(self.clone()),
                amplitude,
            },
            ..self.clone()
        }
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn equation(&self) -> WaveEquation {
        self.equation
    }

    /// Constant Wronskian `phi1' phi2 - phi1 phi2'`.
    pub fn wronskian(&self) -> f64 {
        self.wronskian
    }

    /// Wave number of an analytic free pair.
    pub fn wave_number(&self) -> Option<f64> {
        match self.kind {
            PairKind::Free { k } => Some(k),
            _ => None,
        }
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self.kind, PairKind::Free { .. })
    }

    pub fn domain(&self) -> (f64, f64) {
        match &self.kind {
            PairKind::Numeric(t) => t.domain(),
            PairKind::Corrupted { base, .. } => base.domain(),
            PairKind::Free { .. } => self.potential.domain,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let (lo, hi) = self.domain();
        x >= lo && x <= hi
    }

    /// Grid nodes of a numeric pair.
    pub fn nodes(&self) -> Option<Vec<f64>> {
        match &self.kind {
            PairKind::Numeric(t) => Some(t.nodes().collect()),
            PairKind::Corrupted { base, .. } => base.nodes(),
            PairKind::Free { .. } => None,
        }
    }

    pub fn potential_at(&self, x: f64) -> f64 {
        self.potential.value(x)
    }

    /// `g(x)` in `phi'' = g(x) phi`.
    pub fn curvature(&self, x: f64) -> f64 {
        let v = self.potential.value(x);
        let h2 = self.hbar * self.hbar;
        match self.equation {
            WaveEquation::Schrodinger => 2.0 * self.mass * (v - self.energy) / h2,
            WaveEquation::KleinGordon { c } => {
                // factored to keep the near-rest-energy difference accurate
                let mc2 = self.mass * c * c;
                let ev = self.energy - v;
                (mc2 - ev) * (mc2 + ev) / (h2 * c * c)
            }
        }
    }

    pub fn eval(&self, x: f64) -> PairPoint {
        match &self.kind {
            PairKind::Free { k } => {
                let (s, c) = (k * x).sin_cos();
                PairPoint {
                    phi1: s,
                    phi2: c,
                    dphi1: k * c,
                    dphi2: -k * s,
                }
            }
            PairKind::Numeric(t) => {
                let (phi1, dphi1) = t.eval(0, x);
                let (phi2, dphi2) = t.eval(1, x);
                PairPoint { phi1, phi2, dphi1, dphi2 }
            }
            PairKind::Corrupted { base, amplitude } => {
                let p = base.eval(x);
                let (s, c) = x.sin_cos();
                let factor = 1.0 + amplitude * s;
                PairPoint {
                    phi1: p.phi1 * factor,
                    dphi1: p.dphi1 * factor + p.phi1 * amplitude * c,
                    ..p
                }
            }
        }
    }

    /// Residual `phi'' - g phi` of member `which` (0 or 1), `phi''` from a
    /// central finite difference of the member's derivative.
    pub fn equation_residual(&self, which: usize, x: f64) -> Result<f64> {
        let h = crate::numerics::default_step(x, crate::numerics::Derivative::First);
        let d = |x: f64| {
            let p = self.eval(x);
            if which == 0 {
                p.dphi1
            } else {
                p.dphi2
            }
        };
        let second = crate::numerics::fd_derivative(d, x, crate::numerics::Derivative::First, h.max(1e-4))?;
        let p = self.eval(x);
        let phi = if which == 0 { p.phi1 } else { p.phi2 };
        Ok(second - self.curvature(x) * phi)
    }

    /// Signed count of zeros of `phi2` between the reference origin and `x`:
    /// zeros in `(origin, x]` for `x` past the origin, minus zeros in
    /// `(x, origin]` otherwise. The origin is `x = 0` for analytic pairs and
    /// the left domain edge for numeric ones.
    pub fn phi2_zero_index(&self, x: f64) -> i64 {
        match &self.kind {
            PairKind::Free { k } => (k * x / PI + 0.5).floor() as i64,
            PairKind::Numeric(t) => t.phi2_zeros().partition_point(|&z| z <= x) as i64,
            PairKind::Corrupted { base, .. } => base.phi2_zero_index(x),
        }
    }

    /// Origin used by [`Self::phi2_zero_index`].
    pub fn reference_point(&self) -> f64 {
        match &self.kind {
            PairKind::Free { .. } => 0.0,
            PairKind::Numeric(t) => t.domain().0,
            PairKind::Corrupted { base, .. } => base.reference_point(),
        }
    }

    /// Largest relative deviation of the pointwise Wronskian from the stored
    /// constant over the given positions.
    pub fn wronskian_drift<I: IntoIterator<Item = f64>>(&self, xs: I) -> f64 {
        xs.into_iter()
            .map(|x| {
                let p = self.eval(x);
                let w = p.dphi1 * p.phi2 - p.phi1 * p.dphi2;
                ((w - self.wronskian) / self.wronskian).abs()
            })
            .fold(0.0, f64::max)
    }
}
