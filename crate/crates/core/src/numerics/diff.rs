use crate::error::{Error, Result};

/// Derivative order supported by the central stencils.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivative {
    First,
    Second,
    Third,
}

impl Derivative {
    pub fn from_order(order: u8) -> Option<Self> {
        match order {
            1 => Some(Self::First),
            2 => Some(Self::Second),
            3 => Some(Self::Third),
            _ => None,
        }
    }

    // Exponent of machine epsilon used for the default step. The first
    // derivative uses the plain cube root; the higher orders trade truncation
    // of the Richardson-extrapolated stencil against round-off.
    fn step_exponent(self) -> f64 {
        match self {
            Self::First => 1.0 / 3.0,
            Self::Second => 1.0 / 6.0,
            Self::Third => 1.0 / 7.0,
        }
    }
}

/// Default finite-difference step at `x`: `eps^p * (|x| + 1)`.
pub fn default_step(x: f64, order: Derivative) -> f64 {
    f64::EPSILON.powf(order.step_exponent()) * (x.abs() + 1.0)
}

fn at<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::NonFinite { at: x })
    }
}

fn stencil<F: Fn(f64) -> f64>(f: &F, x: f64, order: Derivative, h: f64) -> Result<f64> {
    Ok(match order {
        Derivative::First => (at(f, x + h)? - at(f, x - h)?) / (2.0 * h),
        Derivative::Second => (at(f, x + h)? - 2.0 * at(f, x)? + at(f, x - h)?) / (h * h),
        Derivative::Third => {
            (at(f, x + 2.0 * h)? - 2.0 * at(f, x + h)? + 2.0 * at(f, x - h)? - at(f, x - 2.0 * h)?)
                / (2.0 * h * h * h)
        }
    })
}

/// Central finite-difference derivative with one Richardson extrapolation
/// step (combining steps `h` and `h/2`), giving fourth-order truncation.
pub fn fd_derivative<F>(f: F, x: f64, order: Derivative, h: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput(format!("finite-difference step must be > 0, got {h}")));
    }
    let coarse = stencil(&f, x, order, h)?;
    let fine = stencil(&f, x, order, 0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// [`fd_derivative`] with the [`default_step`].
pub fn fd_derivative_auto<F>(f: F, x: f64, order: Derivative) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    fd_derivative(f, x, order, default_step(x, order))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples() {
        let d1 = fd_derivative_auto(|x| x * x, 1.0, Derivative::First).unwrap();
        assert!((d1 - 2.0).abs() < 1e-10, "{d1}");
        let d3 = fd_derivative_auto(f64::sin, 0.0, Derivative::Third).unwrap();
        assert!((d3 + 1.0).abs() < 1e-6, "{d3}");
        let d2 = fd_derivative_auto(f64::exp, 0.0, Derivative::Second).unwrap();
        assert!((d2 - 1.0).abs() < 1e-8, "{d2}");
    }

    #[test]
    fn non_finite_stencil_sample() {
        let r = fd_derivative_auto(|x: f64| 1.0 / x, 0.0, Derivative::Second);
        assert!(matches!(r, Err(Error::NonFinite { .. })));
        assert!(fd_derivative(f64::sin, 0.0, Derivative::First, -1.0).is_err());
    }

    #[test]
    fn order_lookup() {
        assert_eq!(Derivative::from_order(2), Some(Derivative::Second));
        assert_eq!(Derivative::from_order(4), None);
    }
}
