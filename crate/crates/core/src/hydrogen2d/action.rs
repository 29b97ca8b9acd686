use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::radial::RadialPair;
use super::{angular, Hydrogen2DLevel, HBAR};
use crate::error::{Error, Result};

/// Integration constants of the 2-D reduced action in its normalized form:
/// numerator `R1T1 + nu2 R1T2 + nu3 R2T1 + nu4 R2T2`, denominator
/// `mu1 R1T1 + mu2 R1T2 + mu3 R2T1 + R2T2`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Constants2D {
    pub nu2: f64,
    pub nu3: f64,
    pub nu4: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub lambda: f64,
}

impl Constants2D {
    /// The constants that survive for `l = 0`.
    pub fn ground(nu3: f64, mu1: f64, mu3: f64, lambda: f64) -> Self {
        Self {
            nu3,
            mu1,
            mu3,
            lambda,
            ..Self::default()
        }
    }

    /// `mu1 nu3 - mu3`.
    pub fn kappa(&self) -> f64 {
        self.mu1 * self.nu3 - self.mu3
    }
}

fn dot(c: &[f64; 4], b: &[f64; 4]) -> f64 {
    c.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `S0 = hbar * arctan(N / D) + hbar * lambda` with `N, D` linear in the
/// products of radial and angular solutions.
///
/// Coefficients are stored in general (unnormalized) form so that changing
/// the radial quadrature bound can be absorbed exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedAction2D {
    radial: RadialPair,
    numerator: [f64; 4],
    denominator: [f64; 4],
    lambda: f64,
}

impl ReducedAction2D {
    pub fn new(radial: RadialPair, c: &Constants2D) -> Result<Self> {
        Self::from_coefficients(
            radial,
            [1.0, c.nu2, c.nu3, c.nu4],
            [c.mu1, c.mu2, c.mu3, 1.0],
            c.lambda,
        )
    }

    pub fn from_coefficients(radial: RadialPair, numerator: [f64; 4], denominator: [f64; 4], lambda: f64) -> Result<Self> {
        if numerator.iter().chain(&denominator).chain([&lambda]).any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("reduced-action constants must be finite".into()));
        }
        // For l = 0 the sine column vanishes identically.
        let live = |c: &[f64; 4]| {
            if radial.level().l == 0 {
                c[0] != 0.0 || c[2] != 0.0
            } else {
                c.iter().any(|&x| x != 0.0)
            }
        };
        if !live(&denominator) {
            return Err(Error::Degenerate("denominator of the reduced action vanishes identically".into()));
        }
        Ok(Self {
            radial,
            numerator,
            denominator,
            lambda,
        })
    }

    /// Ground state with constants `(nu3, mu1, mu3, lambda)`.
    pub fn ground_state(rho0: f64, nu3: f64, mu1: f64, mu3: f64, lambda: f64) -> Result<Self> {
        let radial = RadialPair::new(Hydrogen2DLevel::ground(), rho0)?;
        Self::new(radial, &Constants2D::ground(nu3, mu1, mu3, lambda))
    }

    pub fn radial(&self) -> &RadialPair {
        &self.radial
    }

    pub fn level(&self) -> &Hydrogen2DLevel {
        self.radial.level()
    }

    pub fn energy(&self) -> f64 {
        self.level().energy
    }

    pub fn numerator(&self) -> [f64; 4] {
        self.numerator
    }

    pub fn denominator(&self) -> [f64; 4] {
        self.denominator
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Radial-Wronskian coefficient of the `T1 T1` block, `mu1 nu3 - mu3` in
    /// normalized form; the ground-state motion is proportional to it.
    pub fn kappa(&self) -> f64 {
        self.denominator[0] * self.numerator[2] - self.numerator[0] * self.denominator[2]
    }

    fn check_r(&self, r: f64) -> Result<()> {
        if r >= super::R_MIN && r.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "r",
                value: r,
                reason: "radius below the r >= 1e-3 a0 guard",
            })
        }
    }

    /// Basis products in the order `R1T1, R1T2, R2T1, R2T2`.
    fn basis(&self, r: f64, theta: f64) -> Result<[f64; 4]> {
        self.check_r(r)?;
        let p = self.radial.eval(r)?;
        let (t1, t2) = angular(self.level().l, theta);
        Ok([p.r1 * t1, p.r1 * t2, p.r2 * t1, p.r2 * t2])
    }

    /// Numerator and denominator of the arctan argument.
    pub fn fraction(&self, r: f64, theta: f64) -> Result<(f64, f64)> {
        let b = self.basis(r, theta)?;
        Ok((dot(&self.numerator, &b), dot(&self.denominator, &b)))
    }

    /// `H = N^2 + D^2`.
    pub fn h(&self, r: f64, theta: f64) -> Result<f64> {
        let (n, d) = self.fraction(r, theta)?;
        Ok(n * n + d * d)
    }

    /// Principal-branch `S0`.
    pub fn s0(&self, r: f64, theta: f64) -> Result<f64> {
        let (n, d) = self.fraction(r, theta)?;
        let angle = if d == 0.0 {
            0.5 * PI * n.signum()
        } else {
            (n / d).atan()
        };
        Ok(HBAR * (angle + self.lambda))
    }

    /// `S0` along a sampled path, continuous across zeros of the denominator.
    /// Starts on the principal branch.
    pub fn s0_path(&self, path: &[(f64, f64)]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(path.len());
        let mut prev: Option<(f64, f64)> = None;
        for &(r, theta) in path {
            let (n, d) = self.fraction(r, theta)?;
            let angle = n.atan2(d);
            let unwrapped = match prev {
                None => {
                    let principal = self.s0(r, theta)? / HBAR - self.lambda;
                    principal
                }
                Some((last_angle, last)) => {
                    let mut step = angle - last_angle;
                    step -= (step / (2.0 * PI)).round() * 2.0 * PI;
                    last + step
                }
            };
            prev = Some((angle, unwrapped));
            out.push(HBAR * (unwrapped + self.lambda));
        }
        Ok(out)
    }

    /// `(dS0/dr, dS0/dtheta)`.
    ///
    /// `D dN - N dD` is expanded over antisymmetric pairs of basis products,
    /// which reduces to the radial Wronskian `1/rho` and the angular one `l`.
    /// Expanding directly would cancel terms of size `R2^2` at large `r`.
    pub fn gradient(&self, r: f64, theta: f64) -> Result<(f64, f64)> {
        self.check_r(r)?;
        let p = self.radial.eval(r)?;
        let l = self.level().l;
        let (t1, t2) = angular(l, theta);
        let radial = [p.r1, p.r2];
        let ang = [t1, t2];
        let mut value = [0.0; 4];
        for a in 0..2 {
            for q in 0..2 {
                value[2 * a + q] = radial[a] * ang[q];
            }
        }
        let n = dot(&self.numerator, &value);
        let d = dot(&self.denominator, &value);
        let h = n * n + d * d;
        if h == 0.0 {
            return Err(Error::NonFinite { at: r });
        }
        let w_radial = 1.0 / r;
        let w_angular = l as f64;
        let (mut sum_r, mut sum_theta) = (0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                let aij = self.denominator[i] * self.numerator[j] - self.numerator[i] * self.denominator[j];
                if aij == 0.0 {
                    continue;
                }
                let (ra, pa) = (i / 2, i % 2);
                let (rb, pb) = (j / 2, j % 2);
                let sign = |x: usize, y: usize| (y as f64) - (x as f64);
                sum_r += aij * ang[pa] * ang[pb] * sign(ra, rb) * w_radial;
                sum_theta += aij * radial[ra] * radial[rb] * sign(pa, pb) * w_angular;
            }
        }
        Ok((0.5 * HBAR * sum_r / h, 0.5 * HBAR * sum_theta / h))
    }

    /// Move the radial quadrature bound to `rho0`, re-fitting the constants
    /// so that `S0` is unchanged.
    pub fn refit_rho0(&self, rho0: f64) -> Result<Self> {
        let (radial, shift) = self.radial.with_rho0(rho0)?;
        // R2_old = R2_new - shift * R1
        let map = |c: [f64; 4]| [c[0] - shift * c[2], c[1] - shift * c[3], c[2], c[3]];
        Self::from_coefficients(radial, map(self.numerator), map(self.denominator), self.lambda)
    }
}
