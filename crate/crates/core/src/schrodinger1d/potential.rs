use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Potential energy profile on a 1-D domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub domain: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PotentialKind {
    Free,
    /// `V = slope * x` (energy per length).
    Linear { slope: f64 },
    /// `V = stiffness * x^2 / 2`, i.e. `stiffness = m omega^2`.
    Harmonic { stiffness: f64 },
    /// `V = -strength / r`; `strength` is `e^2` in the hydrogen problem.
    Coulomb2dRadial { strength: f64 },
    /// `V = height` for `x >= position`, zero before.
    Step { position: f64, height: f64 },
    Tabulated(Arc<TabulatedPotential>),
}

impl PotentialSpec {
    pub fn new(kind: PotentialKind, domain: (f64, f64)) -> Result<Self> {
        let spec = Self { kind, domain };
        spec.validate()?;
        Ok(spec)
    }

    pub fn free() -> Self {
        Self {
            kind: PotentialKind::Free,
            domain: (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.domain;
        if lo.is_nan() || hi.is_nan() || !(hi > lo) {
            return Err(Error::InvalidInput(format!("empty potential domain [{lo}, {hi}]")));
        }
        let finite = |v: f64, name: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("potential parameter {name} = {v} is not finite")))
            }
        };
        match &self.kind {
            PotentialKind::Free => Ok(()),
            PotentialKind::Linear { slope } => finite(*slope, "slope"),
            PotentialKind::Harmonic { stiffness } => finite(*stiffness, "stiffness"),
            PotentialKind::Coulomb2dRadial { strength } => {
                finite(*strength, "strength")?;
                if lo <= 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "Coulomb domain must exclude r = 0, got lower bound {lo}"
                    )));
                }
                Ok(())
            }
            PotentialKind::Step { position, height } => {
                finite(*position, "position")?;
                finite(*height, "height")
            }
            PotentialKind::Tabulated(table) => {
                if lo < table.x[0] || hi > table.x[table.x.len() - 1] {
                    return Err(Error::InvalidInput(format!(
                        "domain [{lo}, {hi}] exceeds tabulated range [{}, {}]",
                        table.x[0],
                        table.x[table.x.len() - 1]
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.domain.0 && x <= self.domain.1
    }

    pub fn value(&self, x: f64) -> f64 {
        match &self.kind {
            PotentialKind::Free => 0.0,
            PotentialKind::Linear { slope } => slope * x,
            PotentialKind::Harmonic { stiffness } => 0.5 * stiffness * x * x,
            PotentialKind::Coulomb2dRadial { strength } => -strength / x,
            PotentialKind::Step { position, height } => {
                if x >= *position {
                    *height
                } else {
                    0.0
                }
            }
            PotentialKind::Tabulated(table) => table.value(x),
        }
    }
}

/// Tabulated potential with monotone (Fritsch-Carlson) cubic interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedPotential {
    pub length_unit: String,
    pub energy_unit: String,
    x: Vec<f64>,
    v: Vec<f64>,
    slopes: Vec<f64>,
}

impl TabulatedPotential {
    pub fn new(x: Vec<f64>, v: Vec<f64>, length_unit: &str, energy_unit: &str) -> Result<Self> {
        if x.len() != v.len() || x.len() < 2 {
            return Err(Error::InvalidInput("tabulated potential needs >= 2 (x, V) rows".into()));
        }
        if x.iter().chain(&v).any(|s| !s.is_finite()) {
            return Err(Error::InvalidInput("tabulated potential has non-finite entries".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("tabulated positions must be strictly increasing".into()));
        }
        let slopes = monotone_slopes(&x, &v);
        Ok(Self {
            length_unit: length_unit.to_owned(),
            energy_unit: energy_unit.to_owned(),
            x,
            v,
            slopes,
        })
    }

    /// Parse two whitespace-separated columns (position, value). Lines
    /// starting with `#` are comments; `# units: <length> <energy>` is required.
    pub fn parse(text: &str) -> Result<Self> {
        let mut units: Option<(String, String)> = None;
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(rest) = comment.trim().strip_prefix("units:") {
                    let parts: Vec<&str> = rest.split_whitespace().collect();
                    if parts.len() != 2 {
                        return Err(Error::InvalidInput(format!(
                            "line {}: units header must be `# units: <length> <energy>`",
                            lineno + 1
                        )));
                    }
                    units = Some((parts[0].to_owned(), parts[1].to_owned()));
                }
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 2 {
                return Err(Error::InvalidInput(format!(
                    "line {}: expected 2 columns, found {}",
                    lineno + 1,
                    cols.len()
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::InvalidInput(format!("line {}: {e}: {s:?}", lineno + 1)))
            };
            xs.push(parse(cols[0])?);
            vs.push(parse(cols[1])?);
        }
        let (lu, eu) =
            units.ok_or_else(|| Error::InvalidInput("missing `# units: <length> <energy>` header".into()))?;
        Self::new(xs, vs, &lu, &eu)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    pub fn value(&self, x: f64) -> f64 {
        let n = self.x.len();
        let i = match self.x.partition_point(|&xi| xi <= x) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let t = (x - self.x[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.v[i] + h10 * h * self.slopes[i] + h01 * self.v[i + 1] + h11 * h * self.slopes[i + 1]
    }
}

fn monotone_slopes(x: &[f64], v: &[f64]) -> Vec<f64> {
    let n = x.len();
    let delta: Vec<f64> = (0..n - 1).map(|i| (v[i + 1] - v[i]) / (x[i + 1] - x[i])).collect();
    let mut m = vec![0.0; n];
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for i in 1..n - 1 {
        m[i] = if delta[i - 1] * delta[i] <= 0.0 {
            0.0
        } else {
            0.5 * (delta[i - 1] + delta[i])
        };
    }
    for i in 0..n - 1 {
        if delta[i] == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        let a = m[i] / delta[i];
        let b = m[i + 1] / delta[i];
        let s = a * a + b * b;
        if s > 9.0 {
            let tau = 3.0 / s.sqrt();
            m[i] = tau * a * delta[i];
            m[i + 1] = tau * b * delta[i];
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_tabulated() {
        let text = "# a comment\n# units: bohr hartree\n0 0\n1 1\n2 4\n3 9\n";
        let t = TabulatedPotential::parse(text).unwrap();
        assert_eq!(t.length_unit, "bohr");
        assert_eq!(t.energy_unit, "hartree");
        assert_eq!(t.value(2.0), 4.0);
        let mid = t.value(1.5);
        assert!(mid > 1.0 && mid < 4.0);
    }

    #[test]
    fn parse_errors() {
        assert!(TabulatedPotential::parse("0 0\n1 1\n").is_err());
        assert!(TabulatedPotential::parse("# units: m J\n0 0 0\n").is_err());
        assert!(TabulatedPotential::parse("# units: m J\n0 x\n1 2\n").is_err());
    }

    #[test]
    fn interpolation_preserves_monotone_data() {
        // A step-like table must not overshoot and create a spurious well.
        let x = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let v = vec![0.0, 0.0, 1.0, 1.0, 1.0];
        let t = TabulatedPotential::new(x, v, "m", "J").unwrap();
        for i in 0..=400 {
            let xi = i as f64 * 0.01;
            let vi = t.value(xi);
            assert!((-1e-15..=1.0 + 1e-15).contains(&vi), "V({xi}) = {vi}");
        }
    }

    #[test]
    fn coulomb_domain_excludes_origin() {
        let k = PotentialKind::Coulomb2dRadial { strength: 1.0 };
        assert!(PotentialSpec::new(k.clone(), (0.0, 1.0)).is_err());
        assert!(PotentialSpec::new(k, (0.1, 1.0)).is_ok());
        assert!(PotentialSpec::new(PotentialKind::Free, (1.0, 1.0)).is_err());
    }
}
