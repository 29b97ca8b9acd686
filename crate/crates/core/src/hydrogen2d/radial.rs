use serde::{Deserialize, Serialize};

use super::Hydrogen2DLevel;
use crate::error::{Error, Result};
use crate::numerics::{expint_ei, integrate, laguerre, QuadratureSpec};

/// Default lower bound of the second-solution quadrature.
pub const DEFAULT_RHO0: f64 = 0.1;

fn quad_spec() -> QuadratureSpec {
    QuadratureSpec::with_tolerances(1e-14, 1e-12)
}

/// Inside pole windows the subtraction leaves round-off of order
/// `1e-16 c / eps^2`, so the remainder is integrated more loosely.
fn window_spec() -> QuadratureSpec {
    QuadratureSpec::with_tolerances(1e-11, 1e-10)
}

/// A zero of `R1` and the window in which the double pole of `1/(rho R1^2)`
/// is subtracted analytically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct PoleWindow {
    rho: f64,
    half_width: f64,
    /// Coefficient of `1/(rho - rho_z)^2`: `1 / (rho_z R1'(rho_z)^2)`.
    strength: f64,
    /// Index into the Laguerre roots.
    root: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialPoint {
    pub r1: f64,
    pub r2: f64,
    pub dr1: f64,
    pub dr2: f64,
}

impl RadialPoint {
    pub fn wronskian(&self) -> f64 {
        self.r1 * self.dr2 - self.dr1 * self.r2
    }
}

/// `R1 = rho^|l| e^{-alpha rho} L_{n-|l|}^{2|l|}(2 alpha rho)` and
/// `R2 = R1 * integral_{rho0}^{rho} d rho' / (rho' R1^2)`, so that
/// `R1 R2' - R1' R2 = 1/rho`.
///
/// Across zeros of `R1` the integral is a Hadamard finite part (the simple
/// pole there has zero residue), which continues `R2` smoothly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialPair {
    level: Hydrogen2DLevel,
    rho0: f64,
    /// Zeros of the Laguerre factor in `x = 2 alpha rho`.
    roots: Vec<f64>,
    windows: Vec<PoleWindow>,
}

impl RadialPair {
    pub fn new(level: Hydrogen2DLevel, rho0: f64) -> Result<Self> {
        if !(rho0 > 0.0 && rho0.is_finite()) {
            return Err(Error::Domain {
                what: "rho0",
                value: rho0,
                reason: "quadrature bound must be positive",
            });
        }
        let (s, k) = level.laguerre_indices();
        let roots = laguerre_roots(s, k)?;
        let mut pair = Self {
            level,
            rho0,
            roots,
            windows: Vec::new(),
        };
        let zeros: Vec<f64> = pair.roots.iter().map(|x| x / (2.0 * level.alpha)).collect();
        for (i, &z) in zeros.iter().enumerate() {
            let gap = zeros
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, w)| (w - z).abs())
                .fold(f64::INFINITY, f64::min);
            let clearance = (z - rho0).abs();
            if clearance < 1e-9 * z {
                return Err(Error::Domain {
                    what: "rho0",
                    value: rho0,
                    reason: "lower bound coincides with a zero of R1",
                });
            }
            let half_width = (0.1 * z).min(0.3 * gap).min(0.5 * clearance);
            let dr1 = pair.reduced_r1(z, i);
            pair.windows.push(PoleWindow {
                rho: z,
                half_width,
                strength: 1.0 / (z * dr1 * dr1),
                root: i,
            });
        }
        Ok(pair)
    }

    pub fn level(&self) -> &Hydrogen2DLevel {
        &self.level
    }

    pub fn rho0(&self) -> f64 {
        self.rho0
    }

    /// Zeros of `R1` on `rho > 0`.
    pub fn zeros(&self) -> Vec<f64> {
        self.windows.iter().map(|w| w.rho).collect()
    }

    fn prefactor(&self, rho: f64) -> f64 {
        rho.powi(self.level.l.abs()) * (-self.level.alpha * rho).exp()
    }

    pub fn r1(&self, rho: f64) -> f64 {
        let (s, k) = self.level.laguerre_indices();
        self.prefactor(rho) * laguerre(s, k, 2.0 * self.level.alpha * rho)
    }

    pub fn dr1(&self, rho: f64) -> f64 {
        let (s, k) = self.level.laguerre_indices();
        let alpha = self.level.alpha;
        let x = 2.0 * alpha * rho;
        let l = self.level.l.unsigned_abs() as f64;
        // d/dx L_s^k = -L_{s-1}^{k+1}
        let dl = if s == 0 { 0.0 } else { -laguerre(s - 1, k + 1, x) };
        self.prefactor(rho) * ((l / rho - alpha) * laguerre(s, k, x) + 2.0 * alpha * dl)
    }

    /// Factored Laguerre polynomial with root `skip` removed.
    fn laguerre_without(&self, x: f64, skip: Option<usize>) -> f64 {
        let s = self.roots.len();
        let mut value = if s % 2 == 0 { 1.0 } else { -1.0 };
        for i in 1..=s {
            value /= i as f64;
        }
        for (i, r) in self.roots.iter().enumerate() {
            if Some(i) != skip {
                value *= x - r;
            }
        }
        value
    }

    /// `R1(rho) / (rho - rho_z)` for the zero with root index `root`;
    /// equals `R1'(rho_z)` at the zero itself.
    fn reduced_r1(&self, rho: f64, root: usize) -> f64 {
        let alpha = self.level.alpha;
        self.prefactor(rho) * 2.0 * alpha * self.laguerre_without(2.0 * alpha * rho, Some(root))
    }

    /// `1/(rho R1^2)` with `R1` in factored form (accurate near zeros).
    fn integrand_factored(&self, rho: f64) -> f64 {
        let r1 = self.prefactor(rho) * self.laguerre_without(2.0 * self.level.alpha * rho, None);
        1.0 / (rho * r1 * r1)
    }

    fn integrand(&self, rho: f64) -> f64 {
        let r1 = self.r1(rho);
        1.0 / (rho * r1 * r1)
    }

    /// The integrand minus its double pole; smooth through the zero.
    fn remainder(&self, w: &PoleWindow, rho: f64) -> f64 {
        let raw = |x: f64| {
            let d = x - w.rho;
            self.integrand_factored(x) - w.strength / (d * d)
        };
        let eps = 1e-2 * w.half_width;
        if (rho - w.rho).abs() < eps {
            let (lo, hi) = (raw(w.rho - eps), raw(w.rho + eps));
            lo + (rho - w.rho + eps) / (2.0 * eps) * (hi - lo)
        } else {
            raw(rho)
        }
    }

    fn window_of(&self, rho: f64) -> Option<&PoleWindow> {
        self.windows.iter().find(|w| (rho - w.rho).abs() < w.half_width)
    }

    /// Finite-part integral from `rho0` to `rho`, split as
    /// `regular - c/(rho - rho_z)` when `rho` sits inside a pole window.
    fn integral_parts(&self, rho: f64) -> Result<(f64, Option<PoleWindow>)> {
        let spec = quad_spec();
        let (lo, hi, sign) = if rho >= self.rho0 {
            (self.rho0, rho, 1.0)
        } else {
            (rho, self.rho0, -1.0)
        };
        let mut acc = 0.0;
        let mut cursor = lo;
        let mut pole = None;
        for w in &self.windows {
            let (wl, wr) = (w.rho - w.half_width, w.rho + w.half_width);
            if wr <= lo || wl >= hi {
                continue;
            }
            if wl > cursor {
                acc += integrate(|x| self.integrand(x), cursor, wl, &spec)?;
                cursor = wl;
            }
            let end = wr.min(hi);
            let rem = |x: f64| self.remainder(w, x);
            let wspec = window_spec();
            if cursor < w.rho && w.rho < end {
                acc += integrate(rem, cursor, w.rho, &wspec)? + integrate(rem, w.rho, end, &wspec)?;
            } else {
                acc += integrate(rem, cursor, end, &wspec)?;
            }
            // antiderivative of c/(x - rho_z)^2 is -c/(x - rho_z)
            let upper = if end == hi && hi < wr {
                pole = Some(*w);
                0.0
            } else {
                -w.strength / (end - w.rho)
            };
            let lower = if cursor == lo && lo > wl {
                pole = Some(*w);
                0.0
            } else {
                -w.strength / (cursor - w.rho)
            };
            acc += upper - lower;
            cursor = end;
        }
        if cursor < hi {
            acc += integrate(|x| self.integrand(x), cursor, hi, &spec)?;
        }
        Ok((sign * acc, pole))
    }

    fn check(&self, rho: f64) -> Result<()> {
        if rho > 0.0 && rho.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "rho",
                value: rho,
                reason: "radial coordinate must be positive",
            })
        }
    }

    /// Finite-part `integral_{rho0}^{rho} d rho' / (rho' R1^2)`; infinite at a zero of `R1`.
    pub fn integral(&self, rho: f64) -> Result<f64> {
        self.check(rho)?;
        let (regular, pole) = self.integral_parts(rho)?;
        Ok(match pole {
            Some(w) => regular - w.strength / (rho - w.rho),
            None => regular,
        })
    }

    /// `R1, R2` and their derivatives at `rho`.
    pub fn eval(&self, rho: f64) -> Result<RadialPoint> {
        self.check(rho)?;
        let r1 = self.r1(rho);
        let dr1 = self.dr1(rho);
        let (regular, pole) = self.integral_parts(rho)?;
        let (r2, dr2) = match pole {
            None => (r1 * regular, dr1 * regular + 1.0 / (rho * r1)),
            Some(w) => {
                let q = self.reduced_r1(rho, w.root);
                let r2 = r1 * regular - w.strength * q;
                // 1/(rho R1) - c R1'/(rho - rho_z): removable at the zero
                let singular = |x: f64| (1.0 / (x * self.reduced_r1(x, w.root)) - w.strength * self.dr1(x)) / (x - w.rho);
                let eps = 1e-2 * w.half_width;
                let s = if (rho - w.rho).abs() < eps {
                    let (lo, hi) = (singular(w.rho - eps), singular(w.rho + eps));
                    lo + (rho - w.rho + eps) / (2.0 * eps) * (hi - lo)
                } else {
                    singular(rho)
                };
                (r2, dr1 * regular + s)
            }
        };
        Ok(RadialPoint { r1, r2, dr1, dr2 })
    }

    pub fn r2(&self, rho: f64) -> Result<f64> {
        self.eval(rho).map(|p| p.r2)
    }

    pub fn dr2(&self, rho: f64) -> Result<f64> {
        self.eval(rho).map(|p| p.dr2)
    }

    pub fn wronskian(&self, rho: f64) -> Result<f64> {
        self.eval(rho).map(|p| p.wronskian())
    }

    /// Same pair with a new lower bound. Returns the pair and `shift` such
    /// that `R2_new = R2_old + shift * R1`.
    pub fn with_rho0(&self, rho0: f64) -> Result<(Self, f64)> {
        let other = Self::new(self.level, rho0)?;
        // integral_{rho0'}^{rho} = integral_{rho0}^{rho} + integral_{rho0'}^{rho0}
        let shift = other.integral(self.rho0)?;
        Ok((other, shift))
    }

    /// Whether `rho` lies in a window around a zero of `R1`.
    pub fn near_zero(&self, rho: f64) -> bool {
        self.window_of(rho).is_some()
    }
}

/// Zeros of `L_s^k` on `x > 0`, by scanning and bisection.
fn laguerre_roots(s: u32, k: u32) -> Result<Vec<f64>> {
    if s == 0 {
        return Ok(Vec::new());
    }
    let x_max = 4.0 * s as f64 + 2.0 * k as f64 + 10.0;
    let n = 2000 * s as usize;
    let mut roots = Vec::with_capacity(s as usize);
    let mut prev_x = 0.0;
    let mut prev = laguerre(s, k, 0.0);
    for i in 1..=n {
        let x = x_max * i as f64 / n as f64;
        let value = laguerre(s, k, x);
        if prev == 0.0 {
            roots.push(prev_x);
        } else if prev.signum() != value.signum() && value != 0.0 {
            let (mut a, mut b, mut fa) = (prev_x, x, prev);
            loop {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let fm = laguerre(s, k, m);
                if fm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if fm.signum() == fa.signum() {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev_x = x;
        prev = value;
    }
    if roots.len() != s as usize {
        return Err(Error::Degenerate(format!(
            "found {} of {s} Laguerre zeros for L_{s}^{k}",
            roots.len()
        )));
    }
    Ok(roots)
}

/// Ground-state `integral_{rho0}^{r} e^{4 r'} / r' dr'` by quadrature.
pub fn ground_state_integral(r: f64, rho0: f64) -> Result<f64> {
    if !(r > 0.0 && rho0 > 0.0) {
        return Err(Error::Domain {
            what: "ground_state_integral",
            value: r.min(rho0),
            reason: "bounds must be positive",
        });
    }
    integrate(|t| (4.0 * t).exp() / t, rho0, r, &quad_spec())
}

/// Ground-state `R2 = e^{-2 rho} (Ei(4 rho) - Ei(4 rho0))`.
pub fn ground_state_r2_ei(rho: f64, rho0: f64) -> Result<f64> {
    Ok((-2.0 * rho).exp() * (expint_ei(4.0 * rho)? - expint_ei(4.0 * rho0)?))
}

/// `R1` of a level at `rho`.
pub fn radial_r1(level: &Hydrogen2DLevel, rho: f64) -> Result<f64> {
    let pair = RadialPair::new(*level, DEFAULT_RHO0)?;
    pair.check(rho)?;
    Ok(pair.r1(rho))
}

/// `R2` of a level at `rho` with quadrature bound `rho0`.
pub fn radial_r2(level: &Hydrogen2DLevel, rho: f64, rho0: f64) -> Result<f64> {
    RadialPair::new(*level, rho0)?.r2(rho)
}
