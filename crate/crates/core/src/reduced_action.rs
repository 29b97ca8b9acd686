//! Reduced action `S0 = hbar arctan(a phi1/phi2 + b) + hbar lambda` built
//! from a solution pair, its closed-form derivatives, the quantum potential,
//! the quantum-canceling coordinate and the identity residuals.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{fd_derivative, integrate, Derivative, Grid1D, QuadratureSpec};
use crate::report::ResidualReport;
use crate::schrodinger1d::SolutionPair;

/// Relative tolerance (times `|E|`) for the stationary QHJE identity.
pub const QHJE_TOLERANCE: f64 = 1e-6;
/// Relative variation allowed for the conserved flux `R^2 S0'`.
pub const CONTINUITY_TOLERANCE: f64 = 1e-8;
/// `E - V` must stay above this multiple of `|E|` for the coordinate map.
pub const TURNING_POINT_GUARD: f64 = 1e-9;

/// Recombined pair `u = a phi1 + b phi2`, `v = phi2` and derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recombined {
    pub u: f64,
    pub v: f64,
    pub du: f64,
    pub dv: f64,
}

impl Recombined {
    /// `u^2 + v^2`, the squared amplitude.
    pub fn norm2(&self) -> f64 {
        self.u * self.u + self.v * self.v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedAction1D {
    pair: SolutionPair,
    a: f64,
    b: f64,
    lambda: f64,
}

impl ReducedAction1D {
    pub fn new(pair: SolutionPair, a: f64, b: f64, lambda: f64) -> Result<Self> {
        if a == 0.0 || !a.is_finite() {
            return Err(Error::InvalidInput(format!("integration constant a must be finite and non-zero, got {a}")));
        }
        if !b.is_finite() || !lambda.is_finite() {
            return Err(Error::InvalidInput(format!("integration constants must be finite (b = {b}, lambda = {lambda})")));
        }
        Ok(Self { pair, a, b, lambda })
    }

    pub fn pair(&self) -> &SolutionPair {
        &self.pair
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn energy(&self) -> f64 {
        self.pair.energy()
    }

    pub fn mass(&self) -> f64 {
        self.pair.mass()
    }

    pub fn hbar(&self) -> f64 {
        self.pair.hbar()
    }

    pub fn potential(&self, x: f64) -> f64 {
        self.pair.potential_at(x)
    }

    /// Sign of `a W`, which is also the sign of `S0'` everywhere.
    pub fn orientation(&self) -> f64 {
        (self.a * self.pair.wronskian()).signum()
    }

    pub fn recombined(&self, x: f64) -> Recombined {
        let p = self.pair.eval(x);
        Recombined {
            u: self.a * p.phi1 + self.b * p.phi2,
            v: p.phi2,
            du: self.a * p.dphi1 + self.b * p.dphi2,
            dv: p.dphi2,
        }
    }

    /// Continuous reduced action. Each zero of `phi2` crossed on the way from
    /// the pair's reference point adds `pi hbar` in the direction of `S0'`.
    pub fn s0(&self, x: f64) -> f64 {
        let r = self.recombined(x);
        let turns = self.pair.phi2_zero_index(x);
        // phi2 is positive before its first zero and alternates afterwards;
        // flipping both components by that parity keeps atan2 on the
        // principal branch of arctan(u/v) and stays continuous when the
        // zero count and the rounded sign of phi2 disagree next to a zero.
        let parity = if turns % 2 == 0 { 1.0 } else { -1.0 };
        let angle = (parity * r.u).atan2(parity * r.v);
        self.hbar() * (angle + self.orientation() * PI * turns as f64 + self.lambda)
    }

    /// `S0' = hbar a W / (phi2^2 + (a phi1 + b phi2)^2)`.
    pub fn ds0_dx(&self, x: f64) -> f64 {
        self.hbar() * self.a * self.pair.wronskian() / self.recombined(x).norm2()
    }

    fn norm_derivatives(&self, x: f64) -> (f64, f64, f64) {
        let r = self.recombined(x);
        let g = self.pair.curvature(x);
        let d = r.norm2();
        let d1 = 2.0 * (r.u * r.du + r.v * r.dv);
        // u'' = g u and v'' = g v from the wave equation.
        let d2 = 2.0 * (r.du * r.du + r.dv * r.dv) + 2.0 * g * d;
        (d, d1, d2)
    }

    pub fn d2s0_dx2(&self, x: f64) -> f64 {
        let (d, d1, _) = self.norm_derivatives(x);
        -self.hbar() * self.a * self.pair.wronskian() * d1 / (d * d)
    }

    pub fn d3s0_dx3(&self, x: f64) -> f64 {
        let (d, d1, d2) = self.norm_derivatives(x);
        self.hbar() * self.a * self.pair.wronskian() * (-d2 / (d * d) + 2.0 * d1 * d1 / (d * d * d))
    }

    /// `Q = (hbar^2/4m) [ (3/2) (S0''/S0')^2 - S0'''/S0' ]`.
    pub fn quantum_potential(&self, x: f64) -> f64 {
        let s1 = self.ds0_dx(x);
        let s2 = self.d2s0_dx2(x);
        let s3 = self.d3s0_dx3(x);
        let h = self.hbar();
        h * h / (4.0 * self.mass()) * (1.5 * (s2 / s1).powi(2) - s3 / s1)
    }

    /// `(S0')^2/2m + V - E - Q` at `x`.
    pub fn qhje_point_residual(&self, x: f64) -> f64 {
        let s1 = self.ds0_dx(x);
        s1 * s1 / (2.0 * self.mass()) + self.potential(x) - self.energy() - self.quantum_potential(x)
    }

    pub fn qhje_residual(&self, grid: &Grid1D) -> ResidualReport {
        let residuals = grid.points().iter().map(|&x| self.qhje_point_residual(x)).collect();
        ResidualReport::new(grid.points().to_vec(), residuals, QHJE_TOLERANCE * self.energy().abs())
    }

    /// `R = sqrt(u^2 + v^2)`.
    pub fn amplitude(&self, x: f64) -> f64 {
        self.recombined(x).norm2().sqrt()
    }

    /// `R^2 dS0/dx` with the derivative of the arctan taken from the pair's
    /// actual values, i.e. `hbar (u' v - u v')`.
    pub fn flux(&self, x: f64) -> f64 {
        let r = self.recombined(x);
        self.hbar() * (r.du * r.v - r.u * r.dv)
    }

    /// Constancy of `R^2 S0'`: relative deviation of the flux from `hbar a W`.
    pub fn continuity_residual_1d(&self, grid: &Grid1D) -> ResidualReport {
        let expected = self.hbar() * self.a * self.pair.wronskian();
        let residuals = grid
            .points()
            .iter()
            .map(|&x| (self.flux(x) - expected) / expected)
            .collect();
        ResidualReport::new(grid.points().to_vec(), residuals, CONTINUITY_TOLERANCE)
    }

    /// Coordinate map `x -> x_hat` on a classically allowed `segment`,
    /// anchored so that `x_hat(x_ref) = 0`.
    pub fn xhat_map(&self, x_ref: f64, segment: (f64, f64)) -> Result<CoordinateMap> {
        let (lo, hi) = segment;
        if !(hi > lo) || x_ref < lo || x_ref > hi {
            return Err(Error::InvalidInput(format!(
                "reference point {x_ref} must lie in the segment [{lo}, {hi}]"
            )));
        }
        if !self.pair.contains(lo) || !self.pair.contains(hi) {
            return Err(Error::InvalidInput(format!("segment [{lo}, {hi}] leaves the pair's domain")));
        }
        let guard = TURNING_POINT_GUARD * self.energy().abs();
        let samples = 2000;
        for i in 0..=samples {
            let x = lo + (hi - lo) * i as f64 / samples as f64;
            let gap = self.energy() - self.potential(x);
            if !(gap >= guard) {
                return Err(Error::TurningPoint { at: x, gap });
            }
        }
        Ok(CoordinateMap {
            action: self.clone(),
            x_ref,
            segment,
        })
    }

    pub fn reconstruct_wavefunction(&self, constants: &WaveFormConstants, x: f64) -> Result<Complex64> {
        constants.validate()?;
        let phase = Complex64::from_polar(1.0, self.s0(x) / self.hbar());
        Ok(self.amplitude(x) * (constants.alpha * phase + constants.beta * phase.conj()))
    }

    /// `-hbar^2 phi''/2m + (V - E) phi` for the reconstructed wave function,
    /// with `phi''` by finite differences.
    pub fn wavefunction_residual(&self, constants: &WaveFormConstants, x: f64, h: f64) -> Result<Complex64> {
        constants.validate()?;
        let re = |y: f64| self.reconstruct_wavefunction(constants, y).map(|c| c.re).unwrap_or(f64::NAN);
        let im = |y: f64| self.reconstruct_wavefunction(constants, y).map(|c| c.im).unwrap_or(f64::NAN);
        let second = Complex64::new(
            fd_derivative(re, x, Derivative::Second, h)?,
            fd_derivative(im, x, Derivative::Second, h)?,
        );
        let phi = self.reconstruct_wavefunction(constants, x)?;
        let hb = self.hbar();
        Ok(-hb * hb / (2.0 * self.mass()) * second + (self.potential(x) - self.energy()) * phi)
    }
}

/// Complex constants of `phi = R [alpha e^{i S0/hbar} + beta e^{-i S0/hbar}]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveFormConstants {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl WaveFormConstants {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let c = Self { alpha, beta };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        if self.alpha == Complex64::new(0.0, 0.0) && self.beta == Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidInput("alpha and beta cannot both vanish".into()));
        }
        Ok(())
    }
}

/// Quantum-canceling coordinate `x_hat` with `dx_hat/dx = S0' / sqrt(2m(E - V))`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateMap {
    action: ReducedAction1D,
    x_ref: f64,
    segment: (f64, f64),
}

impl CoordinateMap {
    pub fn segment(&self) -> (f64, f64) {
        self.segment
    }

    fn check(&self, x: f64) -> Result<()> {
        if x < self.segment.0 || x > self.segment.1 {
            return Err(Error::Domain {
                what: "coordinate map",
                value: x,
                reason: "outside the classically allowed segment",
            });
        }
        Ok(())
    }

    pub fn dxhat_dx(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        let a = &self.action;
        Ok(a.ds0_dx(x) / (2.0 * a.mass() * (a.energy() - a.potential(x))).sqrt())
    }

    pub fn xhat(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        let a = &self.action;
        let m2 = 2.0 * a.mass();
        integrate(
            |y| a.ds0_dx(y) / (m2 * (a.energy() - a.potential(y))).sqrt(),
            self.x_ref,
            x,
            &QuadratureSpec::default(),
        )
    }

    /// Inverse map by bisection (the map is strictly monotone).
    pub fn x_of(&self, xhat: f64) -> Result<f64> {
        let (lo, hi) = self.segment;
        let (flo, fhi) = (self.xhat(lo)?, self.xhat(hi)?);
        let (mut a, mut b) = if flo <= fhi { (lo, hi) } else { (hi, lo) };
        if xhat < flo.min(fhi) || xhat > flo.max(fhi) {
            return Err(Error::Domain {
                what: "coordinate map inverse",
                value: xhat,
                reason: "outside the image of the segment",
            });
        }
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if self.xhat(m)? < xhat {
                a = m;
            } else {
                b = m;
            }
            if (a - b).abs() <= 4.0 * f64::EPSILON * m.abs().max(1.0) {
                break;
            }
        }
        Ok(0.5 * (a + b))
    }

    /// `S0_hat(x_hat) = S0(x)`.
    pub fn s0_hat(&self, xhat: f64) -> Result<f64> {
        Ok(self.action.s0(self.x_of(xhat)?))
    }

    /// `V_hat(x_hat) = V(x)`.
    pub fn v_hat(&self, xhat: f64) -> Result<f64> {
        Ok(self.action.potential(self.x_of(xhat)?))
    }

    /// Classical Hamilton-Jacobi residual `(dS0/dx_hat)^2/2m + V - E` with
    /// `dS0/dx_hat = S0' (dx_hat/dx)^{-1}`.
    pub fn classical_residual(&self, grid: &Grid1D) -> Result<ResidualReport> {
        let a = &self.action;
        let mut residuals = Vec::with_capacity(grid.len());
        for &x in grid.points() {
            let p = a.ds0_dx(x) / self.dxhat_dx(x)?;
            residuals.push(p * p / (2.0 * a.mass()) + a.potential(x) - a.energy());
        }
        Ok(ResidualReport::new(
            grid.points().to_vec(),
            residuals,
            QHJE_TOLERANCE * a.energy().abs(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::fd_derivative_auto;
    use crate::schrodinger1d::{pair_free, pair_numeric, PotentialKind, PotentialSpec};

    fn free(a: f64, b: f64) -> ReducedAction1D {
        ReducedAction1D::new(pair_free(0.5, 1.0, 1.0).unwrap(), a, b, 0.0).unwrap()
    }

    #[test]
    fn rejects_zero_a() {
        assert!(ReducedAction1D::new(pair_free(0.5, 1.0, 1.0).unwrap(), 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn free_unit_action_is_linear() {
        let s = free(1.0, 0.0);
        assert_eq!(s.s0(0.0), 0.0);
        for i in -200..=200 {
            let x = i as f64 * 0.05;
            assert!((s.s0(x) - x).abs() < 1e-12, "x={x}: {}", s.s0(x));
            assert!((s.ds0_dx(x) - 1.0).abs() < 1e-14);
            assert!(s.d2s0_dx2(x).abs() < 1e-14);
            assert!(s.d3s0_dx3(x).abs() < 1e-13);
            assert!(s.quantum_potential(x).abs() < 1e-13);
        }
        // On a zero of phi2 (to rounding).
        let xz = std::f64::consts::FRAC_PI_2;
        assert!((s.s0(xz) - xz).abs() < 1e-12);
        let xz = 3.0 * std::f64::consts::FRAC_PI_2;
        assert!((s.s0(xz) - xz).abs() < 1e-12);
    }

    #[test]
    fn closed_form_derivatives_match_finite_differences() {
        let s = free(2.0, 0.3);
        for &x in &[0.1, 0.7, 1.9, 3.3] {
            let fd1 = fd_derivative_auto(|y| s.s0(y), x, Derivative::First).unwrap();
            assert!(((fd1 - s.ds0_dx(x)) / s.ds0_dx(x)).abs() < 1e-8, "x={x}");
            let fd2 = fd_derivative(|y| s.ds0_dx(y), x, Derivative::First, 1e-3).unwrap();
            let scale = s.d2s0_dx2(x).abs().max(s.ds0_dx(x).abs());
            assert!((fd2 - s.d2s0_dx2(x)).abs() < 1e-7 * scale, "x={x}");
            let fd3 = fd_derivative(|y| s.d2s0_dx2(y), x, Derivative::First, 1e-3).unwrap();
            let scale = s.d3s0_dx3(x).abs().max(s.ds0_dx(x).abs());
            assert!((fd3 - s.d3s0_dx3(x)).abs() < 1e-7 * scale, "x={x}");
        }
    }

    #[test]
    fn free_qhje_identity() {
        let grid = Grid1D::uniform(-5.0, 5.0, 301).unwrap();
        for &(a, b) in &[(1.0, 0.0), (2.0, 0.0), (-0.7, 1.4), (3.0, -2.5)] {
            let r = free(a, b).qhje_residual(&grid);
            assert!(r.max <= 1e-8 * 0.5, "a={a} b={b}: {}", r.max);
        }
    }

    #[test]
    fn corrupted_pair_is_detected() {
        let grid = Grid1D::uniform(0.0, 5.0, 101).unwrap();
        let s = ReducedAction1D::new(pair_free(0.5, 1.0, 1.0).unwrap().corrupted(0.2), 1.5, 0.2, 0.0).unwrap();
        assert!(!s.qhje_residual(&grid).pass);
        assert!(!s.continuity_residual_1d(&grid).pass);
    }

    #[test]
    fn continuity_flux_constant() {
        let grid = Grid1D::uniform(-4.0, 4.0, 201).unwrap();
        let s = free(1.0, 0.0);
        for &x in grid.points() {
            assert!((s.amplitude(x).powi(2) * s.ds0_dx(x) - 1.0).abs() < 1e-14);
        }
        let r = free(2.0, 0.7).continuity_residual_1d(&grid);
        assert!(r.pass, "{}", r.max);
    }

    #[test]
    fn linear_potential_quantum_potential_balance() {
        let v = PotentialSpec::new(PotentialKind::Linear { slope: 1.0 }, (-8.0, 2.0)).unwrap();
        let pair = pair_numeric(&v, 1.0, 1.0, 1.0, 1e-3).unwrap();
        let s = ReducedAction1D::new(pair, 1.3, -0.4, 0.0).unwrap();
        for i in 0..50 {
            let x = -7.5 + i as f64 * 0.19;
            let s1 = s.ds0_dx(x);
            let expected = s1 * s1 / 2.0 + x - 1.0;
            assert!((s.quantum_potential(x) - expected).abs() <= 1e-6, "x={x}: {} vs {expected}", s.quantum_potential(x));
        }
    }

    #[test]
    fn xhat_for_free_unit_action_is_shift() {
        let s = free(1.0, 0.0);
        let map = s.xhat_map(1.0, (-2.0, 4.0)).unwrap();
        for &x in &[-2.0, 0.0, 1.0, 3.5] {
            assert!((map.xhat(x).unwrap() - (x - 1.0)).abs() < 1e-10);
        }
        let grid = Grid1D::uniform(-2.0, 4.0, 50).unwrap();
        let r = free(2.0, 0.0).xhat_map(0.0, (-2.0, 4.0)).unwrap().classical_residual(&grid).unwrap();
        assert!(r.max <= 1e-8 * 0.5);
    }

    #[test]
    fn xhat_guard_at_turning_point() {
        let v = PotentialSpec::new(PotentialKind::Linear { slope: 1.0 }, (-8.0, 2.0)).unwrap();
        let pair = pair_numeric(&v, 1.0, 1.0, 1.0, 1e-3).unwrap();
        let s = ReducedAction1D::new(pair, 1.0, 0.0, 0.0).unwrap();
        assert!(s.xhat_map(-3.0, (-5.0, 0.5)).is_ok());
        assert!(matches!(s.xhat_map(-3.0, (-5.0, 1.0)), Err(Error::TurningPoint { .. })));
        assert!(matches!(s.xhat_map(-3.0, (-5.0, 1.5)), Err(Error::TurningPoint { .. })));
    }

    #[test]
    fn plane_wave_reconstruction() {
        let s = free(1.0, 0.0);
        let plus = WaveFormConstants::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)).unwrap();
        let minus = WaveFormConstants::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)).unwrap();
        for &x in &[0.0, 0.4, 2.0] {
            let phi = s.reconstruct_wavefunction(&plus, x).unwrap();
            assert!((phi - Complex64::from_polar(1.0, x)).norm() < 1e-12);
            let psi = s.reconstruct_wavefunction(&minus, x).unwrap();
            assert!((psi - phi.conj()).norm() < 1e-12);
        }
        assert!(WaveFormConstants::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)).is_err());
    }
}
