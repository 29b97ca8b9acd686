//! Numerov propagation of `phi'' = g(x) phi` with fourth-order node
//! derivatives and quintic Hermite interpolation between nodes.

use crate::error::{Error, Result};
use crate::numerics::{ode_solve, OdeControls};

/// Both seeded solutions tabulated on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericTable {
    pub(crate) x0: f64,
    pub(crate) step: f64,
    pub(crate) values: [Vec<f64>; 2],
    pub(crate) slopes: [Vec<f64>; 2],
    pub(crate) curvature: Vec<f64>,
    /// Zeros of the second solution, ascending.
    pub(crate) phi2_zeros: Vec<f64>,
}

pub(crate) fn propagate<G>(g: G, lo: f64, hi: f64, step: f64) -> Result<NumericTable>
where
    G: Fn(f64) -> f64,
{
    if !(step > 0.0) || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInput(format!(
            "numeric pair needs a finite domain and a positive step, got [{lo}, {hi}], h = {step}"
        )));
    }
    let intervals = ((hi - lo) / step).ceil().max(8.0) as usize;
    let h = (hi - lo) / intervals as f64;
    let n = intervals + 1;
    let xs: Vec<f64> = (0..n).map(|i| lo + i as f64 * h).collect();
    let curvature: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
    if let Some(i) = curvature.iter().position(|c| !c.is_finite()) {
        return Err(Error::NonFinite { at: xs[i] });
    }

    let seeds = [[0.0, 1.0], [1.0, 0.0]];
    let mut values: [Vec<f64>; 2] = [vec![0.0; n], vec![0.0; n]];
    let mut slopes: [Vec<f64>; 2] = [vec![0.0; n], vec![0.0; n]];
    let h2 = h * h / 12.0;
    for (which, seed) in seeds.iter().enumerate() {
        // First node from a tightly controlled Runge-Kutta step.
        let controls = OdeControls {
            record_steps: false,
            ..OdeControls::with_tolerances(1e-15, 1e-14)
        };
        let first = ode_solve(
            |x, y, d| {
                d[0] = y[1];
                d[1] = g(x) * y[0];
            },
            seed,
            (lo, lo + h),
            &controls,
        )?;
        let y = &mut values[which];
        y[0] = seed[0];
        y[1] = first.last().y[0];
        // Summed form of Numerov: with u = (1 - h^2 g / 12) y, the second
        // difference of u is h^2 g y. Accumulating the first difference of u
        // with compensated sums keeps round-off growth linear in the steps.
        let weight = |i: usize| 1.0 - h2 * curvature[i];
        let mut u = y[1] * weight(1);
        let mut u_carry = 0.0;
        let mut du = u - y[0] * weight(0);
        let mut du_carry = 0.0;
        for i in 1..n - 1 {
            let (s, c) = kahan_add(du, du_carry, 12.0 * h2 * curvature[i] * y[i]);
            du = s;
            du_carry = c;
            let (s, c) = kahan_add(u, u_carry, du);
            u = s;
            u_carry = c;
            y[i + 1] = u / weight(i + 1);
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { at: xs[i] });
        }
        slopes[which] = five_point_slopes(y, h);
        slopes[which][0] = seed[1];
    }

    let phi2_zeros = locate_zeros(&xs, &values[1], &slopes[1], &curvature, h);
    Ok(NumericTable {
        x0: lo,
        step: h,
        values,
        slopes,
        curvature,
        phi2_zeros,
    })
}

fn kahan_add(sum: f64, carry: f64, value: f64) -> (f64, f64) {
    let v = value - carry;
    let t = sum + v;
    (t, (t - sum) - v)
}

fn five_point_slopes(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let mut d = vec![0.0; n];
    let s = 12.0 * h;
    for i in 2..n - 2 {
        d[i] = (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) / s;
    }
    // One-sided five-point stencils at the domain edges.
    d[0] = (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]) / s;
    d[1] = (-3.0 * y[0] - 10.0 * y[1] + 18.0 * y[2] - 6.0 * y[3] + y[4]) / s;
    d[n - 2] = (-y[n - 5] + 6.0 * y[n - 4] - 18.0 * y[n - 3] + 10.0 * y[n - 2] + 3.0 * y[n - 1]) / s;
    d[n - 1] = (3.0 * y[n - 5] - 16.0 * y[n - 4] + 36.0 * y[n - 3] - 48.0 * y[n - 2] + 25.0 * y[n - 1]) / s;
    d
}

/// Quintic Hermite interpolation of `(value, slope)` on a cell.
fn hermite(
    (y0, d0, c0): (f64, f64, f64),
    (y1, d1, c1): (f64, f64, f64),
    h: f64,
    t: f64,
) -> (f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    let h3 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h5 = 0.5 * (t3 - 2.0 * t4 + t5);
    let value = y0 * h0 + h * d0 * h1 + h * h * c0 * h2 + y1 * h3 + h * d1 * h4 + h * h * c1 * h5;

    let g0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
    let g1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
    let g2 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4);
    let g3 = -g0;
    let g4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
    let g5 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4);
    let slope = (y0 * g0 + h * d0 * g1 + h * h * c0 * g2 + y1 * g3 + h * d1 * g4 + h * h * c1 * g5) / h;
    (value, slope)
}

fn cell_eval(values: &[f64], slopes: &[f64], curvature: &[f64], h: f64, i: usize, t: f64) -> (f64, f64) {
    hermite(
        (values[i], slopes[i], curvature[i] * values[i]),
        (values[i + 1], slopes[i + 1], curvature[i + 1] * values[i + 1]),
        h,
        t,
    )
}

fn locate_zeros(xs: &[f64], y: &[f64], d: &[f64], curvature: &[f64], h: f64) -> Vec<f64> {
    let mut zeros = Vec::new();
    for i in 0..xs.len() - 1 {
        if y[i] == 0.0 {
            if i > 0 {
                zeros.push(xs[i]);
            }
            continue;
        }
        if y[i] * y[i + 1] < 0.0 {
            let (mut a, mut b) = (0.0, 1.0);
            let sa = y[i].signum();
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                let (v, _) = cell_eval(y, d, curvature, h, i, m);
                if v * sa > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            zeros.push(xs[i] + 0.5 * (a + b) * h);
        }
    }
    zeros
}

impl NumericTable {
    pub fn domain(&self) -> (f64, f64) {
        (self.x0, self.x0 + self.step * (self.curvature.len() - 1) as f64)
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.curvature.len()).map(move |i| self.x0 + i as f64 * self.step)
    }

    fn cell(&self, x: f64) -> (usize, f64) {
        let n = self.curvature.len();
        let s = (x - self.x0) / self.step;
        let i = (s.floor().max(0.0) as usize).min(n - 2);
        (i, s - i as f64)
    }

    /// `(phi, phi')` of solution `which` (0 or 1) at `x`.
    pub fn eval(&self, which: usize, x: f64) -> (f64, f64) {
        let (i, t) = self.cell(x);
        cell_eval(&self.values[which], &self.slopes[which], &self.curvature, self.step, i, t)
    }

    /// Wronskian `phi1' phi2 - phi1 phi2'` at every node.
    pub fn node_wronskians(&self) -> Vec<f64> {
        (0..self.curvature.len())
            .map(|i| self.slopes[0][i] * self.values[1][i] - self.values[0][i] * self.slopes[1][i])
            .collect()
    }

    pub fn phi2_zeros(&self) -> &[f64] {
        &self.phi2_zeros
    }
}
