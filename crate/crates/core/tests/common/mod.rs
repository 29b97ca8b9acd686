//! Independent reference implementations shared by the oracle and acceptance targets.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// `L_s^k(x)` from the explicit series, summed in exact rational arithmetic.
pub fn laguerre_series(s: u32, k: u32, x: f64) -> f64 {
    let x = BigRational::from_float(x).expect("finite x");
    let mut sum = BigRational::zero();
    let mut xj = BigRational::one();
    let mut j_fact = BigInt::one();
    for j in 0..=s {
        if j > 0 {
            xj *= &x;
            j_fact *= BigInt::from(j);
        }
        let term = BigRational::new(binomial(s + k, s - j), j_fact.clone()) * &xj;
        if j % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum.to_f64().expect("representable")
}

fn binomial(n: u32, r: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..r {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

// 10-point Gauss-Legendre on [-1, 1].
const GL_X: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_W: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_4,
    0.219_086_362_515_982_0,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

/// Composite fixed-panel Gauss-Legendre; deliberately unrelated to the crate's adaptive quadrature.
pub fn gauss_panels(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    let h = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = lo + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        let mut acc = 0.0;
        for (xi, wi) in GL_X.iter().zip(GL_W) {
            acc += wi * (f(mid - half * xi) + f(mid + half * xi));
        }
        total += acc * half;
    }
    total
}

/// Principal value of `∫_{-∞}^{x} e^t/t dt` for `x > 0`, split as
/// `-∫_x^∞ e^{-t}/t dt + ∫_0^x 2 sinh(t)/t dt`: the symmetric window
/// `[-x, x]` cancels the pole exactly, leaving two smooth integrals.
pub fn ei_principal_value(x: f64) -> f64 {
    assert!(x > 0.0);
    let sinhc = |t: f64| if t == 0.0 { 2.0 } else { 2.0 * t.sinh() / t };
    let inner = gauss_panels(sinhc, 0.0, x, (x * 40.0).ceil() as usize);
    // e^{-t}/t beyond x + 50 is below e^{-50} relative to the head.
    let tail = gauss_panels(|u| (-(x + u)).exp() / (x + u), 0.0, 50.0, 2500);
    inner - tail
}
