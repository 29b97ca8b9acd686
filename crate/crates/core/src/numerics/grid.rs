use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered set of abscissae used for residual reports and sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Grid1D {
    points: Vec<f64>,
}

impl Grid1D {
    /// Minimum stencil width for third derivatives.
    pub const MIN_POINTS: usize = 5;

    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < Self::MIN_POINTS {
            return Err(Error::InvalidInput(format!(
                "grid needs at least {} points, got {}",
                Self::MIN_POINTS,
                points.len()
            )));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("grid points must be finite".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("grid points must be strictly increasing".into()));
        }
        Ok(Self { points })
    }

    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 || !(hi > lo) {
            return Err(Error::InvalidInput(format!("bad uniform grid [{lo}, {hi}] with {n} points")));
        }
        let step = (hi - lo) / (n - 1) as f64;
        let mut points: Vec<f64> = (0..n).map(|i| lo + i as f64 * step).collect();
        points[n - 1] = hi;
        Self::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn lo(&self) -> f64 {
        self.points[0]
    }

    pub fn hi(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Spacing when the grid is uniform to round-off, else `None`.
    pub fn spacing(&self) -> Option<f64> {
        let h = (self.hi() - self.lo()) / (self.len() - 1) as f64;
        self.points
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h)
            .then_some(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Grid1D::new(vec![0.0, 1.0, 2.0, 3.0]).is_err());
        assert!(Grid1D::new(vec![0.0, 1.0, 1.0, 3.0, 4.0]).is_err());
        let g = Grid1D::uniform(0.0, 1.0, 11).unwrap();
        assert_eq!(g.len(), 11);
        assert!((g.spacing().unwrap() - 0.1).abs() < 1e-15);
        let irregular = Grid1D::new(vec![0.0, 0.1, 0.3, 0.6, 1.0]).unwrap();
        assert_eq!(irregular.spacing(), None);
    }
}
