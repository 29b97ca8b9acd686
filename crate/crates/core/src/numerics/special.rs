use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Ei switches from the power series to the asymptotic expansion here.
///
/// The power series has only positive terms for x > 0, so it is accurate
/// everywhere; the asymptotic expansion is cheaper but its smallest term
/// only drops below 1e-16 once x is about 40.
pub const EI_ASYMPTOTIC_CROSSOVER: f64 = 40.0;

/// Smallest accepted argument of [`expint_ei`]. Below the smallest normal
/// double the logarithmic divergence is no longer meaningful.
pub const EI_MIN_ARGUMENT: f64 = f64::MIN_POSITIVE;

/// Generalized Laguerre polynomial `L_s^k(x)` by the upward three-term
/// recurrence in `s`.
pub fn laguerre(s: u32, k: u32, x: f64) -> f64 {
    let k = f64::from(k);
    let mut prev = 1.0;
    if s == 0 {
        return prev;
    }
    let mut curr = 1.0 + k - x;
    for j in 1..s {
        let j = f64::from(j);
        let next = ((2.0 * j + 1.0 + k - x) * curr - (j + k) * prev) / (j + 1.0);
        prev = curr;
        curr = next;
    }
    curr
}

/// Exponential integral `Ei(x)` for `x > 0`, taken as the Cauchy principal
/// value of the integral of `e^t / t` from minus infinity to `x`.
pub fn expint_ei(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain {
            what: "expint_ei",
            value: x,
            reason: "argument must be finite",
        });
    }
    if x < EI_MIN_ARGUMENT {
        return Err(Error::Domain {
            what: "expint_ei",
            value: x,
            reason: "Ei is only defined here for x > 0 (log divergence at 0)",
        });
    }
    if x < EI_ASYMPTOTIC_CROSSOVER {
        Ok(ei_series(x))
    } else {
        Ok(ei_asymptotic(x))
    }
}

fn ei_series(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    let mut n = 1.0;
    loop {
        term *= x / n;
        let contribution = term / n;
        sum += contribution;
        if contribution <= f64::EPSILON * 0.25 * sum.abs() || n > 500.0 {
            break;
        }
        n += 1.0;
    }
    EULER_GAMMA + x.ln() + sum
}

fn ei_asymptotic(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 1.0;
    loop {
        let next = term * n / x;
        if next >= term || next < f64::EPSILON * 0.25 * sum {
            break;
        }
        term = next;
        sum += term;
        n += 1.0;
    }
    x.exp() / x * sum
}
