use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureMethod {
    /// Globally adaptive Gauss-Kronrod (7/15) bisection.
    AdaptiveSubdivision,
    /// Composite Gauss-Kronrod over a fixed number of equal panels.
    FixedPanel { panels: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub method: QuadratureMethod,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            method: QuadratureMethod::AdaptiveSubdivision,
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidInput(format!(
                "quadrature tolerances must be positive (abs {}, rel {})",
                self.abs_tol, self.rel_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidInput("max_subdivisions must be >= 1".into()));
        }
        if let QuadratureMethod::FixedPanel { panels: 0 } = self.method {
            return Err(Error::InvalidInput("fixed-panel rule needs >= 1 panel".into()));
        }
        Ok(())
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

fn sample<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::NonFinite { at: x })
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<Panel> {
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = sample(f, centre)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = sample(f, centre - dx)? + sample(f, centre + dx)?;
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Ok(Panel {
        lo,
        hi,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    })
}

/// Integrate `f` over `[lower, upper]`.
///
/// Returns an estimate whose error estimate is at most
/// `max(abs_tol, rel_tol * |estimate|)`. Reversed bounds flip the sign; equal
/// bounds give zero.
pub fn integrate<F>(f: F, lower: f64, upper: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    spec.validate()?;
    if !(lower.is_finite() && upper.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "integration bounds must be finite, got [{lower}, {upper}]"
        )));
    }
    if lower == upper {
        return Ok(0.0);
    }
    if lower > upper {
        return integrate(f, upper, lower, spec).map(|v| -v);
    }
    match spec.method {
        QuadratureMethod::AdaptiveSubdivision => adaptive(&f, lower, upper, spec),
        QuadratureMethod::FixedPanel { panels } => fixed(&f, lower, upper, panels, spec),
    }
}

fn tolerance(spec: &QuadratureSpec, value: f64) -> f64 {
    spec.abs_tol.max(spec.rel_tol * value.abs())
}

fn fixed<F: Fn(f64) -> f64>(
    f: &F,
    lower: f64,
    upper: f64,
    panels: usize,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let width = (upper - lower) / panels as f64;
    let mut value = 0.0;
    let mut error = 0.0;
    for i in 0..panels {
        let lo = lower + i as f64 * width;
        let hi = if i + 1 == panels { upper } else { lo + width };
        let p = kronrod15(f, lo, hi)?;
        value += p.value;
        error += p.error;
    }
    let tol = tolerance(spec, value);
    if error <= tol {
        Ok(value)
    } else {
        Err(Error::ToleranceNotMet {
            estimate: value,
            error,
            tolerance: tol,
            subdivisions: panels,
        })
    }
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, lower: f64, upper: f64, spec: &QuadratureSpec) -> Result<f64> {
    let mut panels = vec![kronrod15(f, lower, upper)?];
    let mut subdivisions = 0;
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let tol = tolerance(spec, value);
        if error <= tol {
            return Ok(value);
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::ToleranceNotMet {
                estimate: value,
                error,
                tolerance: tol,
                subdivisions,
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.lo + p.hi);
        if mid <= p.lo || mid >= p.hi {
            // Interval can no longer be split in floating point.
            return Err(Error::ToleranceNotMet {
                estimate: value,
                error,
                tolerance: tol,
                subdivisions,
            });
        }
        panels.push(kronrod15(f, p.lo, mid)?);
        panels.push(kronrod15(f, mid, p.hi)?);
        subdivisions += 1;
    }
}
