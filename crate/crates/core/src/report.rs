use serde::{Deserialize, Serialize};

/// Per-point identity residuals on a grid with max/RMS summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub grid: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max: f64,
    pub rms: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ResidualReport {
    pub fn new(grid: Vec<f64>, residuals: Vec<f64>, tolerance: f64) -> Self {
        debug_assert_eq!(grid.len(), residuals.len());
        let max = residuals
            .iter()
            .map(|r| if r.is_nan() { f64::INFINITY } else { r.abs() })
            .fold(0.0, f64::max);
        let rms = if residuals.is_empty() {
            0.0
        } else {
            (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt()
        };
        Self {
            grid,
            residuals,
            max,
            rms,
            tolerance,
            pass: max <= tolerance,
        }
    }

    /// Same residuals judged against another tolerance.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self.pass = self.max <= tolerance;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serializable")
    }
}
