//! Two-dimensional hydrogen atom in atomic units (`hbar = m = e^2 = 1`, so the
//! Bohr radius is 1 and the ionization energy is 1/2). Radial coordinate
//! `rho = r / a0` coincides with `r` internally.

mod action;
mod motion;
mod radial;

pub use action::{Constants2D, ReducedAction2D};
pub use motion::{
    bohm_form_2d, energy_law_2d_radial, energy_law_2d_residuals, energy_law_radial_velocity, ground_state_bracket,
    integrate_bohm_2d, HydrogenControls, HydrogenSample, HydrogenTrajectory, Law2D, R_MIN,
};
pub use radial::{ground_state_integral, ground_state_r2_ei, radial_r1, radial_r2, RadialPair, RadialPoint, DEFAULT_RHO0};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BOHR_RADIUS: f64 = 1.0;
pub const IONIZATION_ENERGY: f64 = 0.5;
pub const HBAR: f64 = 1.0;
pub const MASS: f64 = 1.0;

/// SI values of the atomic units, for conversion at the edges.
pub mod si {
    pub const BOHR_RADIUS_M: f64 = 5.291_772_109_03e-11;
    pub const HARTREE_J: f64 = 4.359_744_722_207_1e-18;
    pub const TIME_S: f64 = 2.418_884_326_585_7e-17;
    pub const VELOCITY_M_PER_S: f64 = BOHR_RADIUS_M / TIME_S;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hydrogen2DLevel {
    pub n: u32,
    pub l: i32,
    pub alpha: f64,
    pub energy: f64,
    pub bohr_radius: f64,
    pub ionization_energy: f64,
}

/// Level `(n, l)`: `alpha = 1/(n + 1/2)`, `E_n = -E_I / (n + 1/2)^2`.
pub fn level(n: u32, l: i32) -> Result<Hydrogen2DLevel> {
    if l.unsigned_abs() > n {
        return Err(Error::InvalidInput(format!("|l| = {} exceeds n = {n}", l.unsigned_abs())));
    }
    let half = n as f64 + 0.5;
    Ok(Hydrogen2DLevel {
        n,
        l,
        alpha: 1.0 / half,
        energy: -IONIZATION_ENERGY / (half * half),
        bohr_radius: BOHR_RADIUS,
        ionization_energy: IONIZATION_ENERGY,
    })
}

impl Hydrogen2DLevel {
    pub fn ground() -> Self {
        level(0, 0).expect("ground state is valid")
    }

    /// `E_n` as the exact fraction `-2 / (2n + 1)^2` (atomic units).
    pub fn energy_fraction(&self) -> (i64, i64) {
        let d = 2 * self.n as i64 + 1;
        (-2, d * d)
    }

    /// Laguerre degree `n - |l|` and order `2|l|`.
    pub fn laguerre_indices(&self) -> (u32, u32) {
        let l = self.l.unsigned_abs();
        (self.n - l, 2 * l)
    }

    pub fn is_ground(&self) -> bool {
        self.n == 0
    }
}

/// Coulomb potential `-e^2 / r`.
pub fn coulomb(r: f64) -> f64 {
    -1.0 / r
}

fn reduce_angle(theta: f64) -> f64 {
    theta.rem_euclid(std::f64::consts::TAU)
}

/// `(cos l theta, sin l theta)`; the angle is reduced mod 2 pi first so
/// shifted arguments give identical values wherever the shift is exact.
pub fn angular(l: i32, theta: f64) -> (f64, f64) {
    let phase = l as f64 * reduce_angle(theta);
    (phase.cos(), phase.sin())
}

/// Derivatives `(d/dtheta cos l theta, d/dtheta sin l theta)`.
pub fn angular_derivative(l: i32, theta: f64) -> (f64, f64) {
    let (c, s) = angular(l, theta);
    (-(l as f64) * s, l as f64 * c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_level() {
        let g = level(0, 0).unwrap();
        assert_eq!(g.alpha, 2.0);
        assert_eq!(g.energy, -4.0 * IONIZATION_ENERGY);
        assert_eq!(g.energy, -2.0);
        assert!(level(1, 2).is_err());
        assert!(level(1, -2).is_err());
    }

    #[test]
    fn angular_periodicity() {
        for l in -2..=2 {
            for i in 0..50 {
                let th = -7.0 + 0.3 * i as f64;
                let (c0, s0) = angular(l, th);
                let (c1, s1) = angular(l, th + std::f64::consts::TAU);
                assert!((c0 - c1).abs() < 1e-14 && (s0 - s1).abs() < 1e-14, "l={l} th={th}");
            }
        }
        assert_eq!(angular(0, 1.3), (1.0, 0.0));
    }
}
