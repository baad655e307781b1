use serde::{Deserialize, Serialize};

use super::{Cell, QuadSamples};
use crate::density::{Density, GaussianMixture};
use crate::error::{invalid, Result, TriadError};
use crate::gaussian::IsoGaussianQuad;
use crate::rng::SeededRng;

/// Four Gaussian-mixture conditionals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MixtureQuadRepr")]
pub struct MixtureQuad {
    pub p0: GaussianMixture,
    pub p1: GaussianMixture,
    pub q0: GaussianMixture,
    pub q1: GaussianMixture,
}

#[derive(Deserialize)]
struct MixtureQuadRepr {
    p0: GaussianMixture,
    p1: GaussianMixture,
    q0: GaussianMixture,
    q1: GaussianMixture,
}

impl TryFrom<MixtureQuadRepr> for MixtureQuad {
    type Error = TriadError;
    fn try_from(r: MixtureQuadRepr) -> Result<Self> {
        Self::new(r.p0, r.p1, r.q0, r.q1)
    }
}

impl MixtureQuad {
    pub fn new(p0: GaussianMixture, p1: GaussianMixture, q0: GaussianMixture, q1: GaussianMixture) -> Result<Self> {
        let d = p0.dim();
        for m in [&p1, &q0, &q1] {
            if m.dim() != d {
                return Err(TriadError::DimMismatch { expected: d, got: m.dim() });
            }
        }
        Ok(Self { p0, p1, q0, q1 })
    }

    pub fn with_noise(&self, eta2: f64) -> Result<Self> {
        Self::new(
            self.p0.with_noise(eta2)?,
            self.p1.with_noise(eta2)?,
            self.q0.with_noise(eta2)?,
            self.q1.with_noise(eta2)?,
        )
    }

    pub fn cell(&self, c: Cell) -> &GaussianMixture {
        match c {
            Cell::P0 => &self.p0,
            Cell::P1 => &self.p1,
            Cell::Q0 => &self.q0,
            Cell::Q1 => &self.q1,
        }
    }
}

/// A generator for the four conditionals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum QuadSpec {
    Iso(IsoGaussianQuad),
    Mixture(MixtureQuad),
}

impl QuadSpec {
    pub fn dim(&self) -> usize {
        match self {
            QuadSpec::Iso(q) => q.dim(),
            QuadSpec::Mixture(m) => m.p0.dim(),
        }
    }

    /// This generator after adding `N(0, eta2 I)` to every conditional.
    pub fn with_noise(&self, eta2: f64) -> Result<Self> {
        Ok(match self {
            QuadSpec::Iso(q) => QuadSpec::Iso(q.with_noise(eta2)?),
            QuadSpec::Mixture(m) => QuadSpec::Mixture(m.with_noise(eta2)?),
        })
    }

    pub fn density(&self, c: Cell) -> &dyn Density {
        match self {
            QuadSpec::Iso(q) => match c {
                Cell::P0 => &q.p0,
                Cell::P1 => &q.p1,
                Cell::Q0 => &q.q0,
                Cell::Q1 => &q.q1,
            },
            QuadSpec::Mixture(m) => m.cell(c),
        }
    }
}

/// Draws `n_per_cell` rows from each conditional. Each cell uses its own
/// stream of `seed`, so changing one cell's spec leaves the others intact.
pub fn sample_quad(spec: &QuadSpec, n_per_cell: usize, seed: u64) -> Result<QuadSamples> {
    if n_per_cell == 0 {
        return Err(invalid("n_per_cell", "must be at least 1"));
    }
    let draw = |c: Cell| {
        let mut rng = SeededRng::with_stream(seed, c as u64);
        spec.density(c).sample(n_per_cell, &mut rng)
    };
    QuadSamples::new(draw(Cell::P0), draw(Cell::P1), draw(Cell::Q0), draw(Cell::Q1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case1() -> QuadSpec {
        QuadSpec::Iso(IsoGaussianQuad::scalar((0.0, 16.5), 2.43, (0.5, 3.8), 0.55).unwrap())
    }

    #[test]
    fn cell_means_and_reproducibility() {
        let s = sample_quad(&case1(), 100_000, 7).unwrap();
        assert!(s.p0.column_means()[0].abs() < 0.05);
        assert!((s.p1.column_means()[0] - 16.5).abs() < 4.0 * 2.43 / 100_000f64.sqrt());
        assert_eq!(s, sample_quad(&case1(), 100_000, 7).unwrap());
        let one = sample_quad(&case1(), 1, 7).unwrap();
        assert_eq!(one.sizes(), [1, 1, 1, 1]);
        assert!(sample_quad(&case1(), 0, 7).is_err());
    }

    #[test]
    fn spec_parses_from_json() {
        let j = r#"{"kind":"iso",
            "p0":{"mean":[0.0],"std":2.43},"p1":{"mean":[16.5],"std":2.43},
            "q0":{"mean":[0.5],"std":0.55},"q1":{"mean":[3.8],"std":0.55}}"#;
        let s: QuadSpec = serde_json::from_str(j).unwrap();
        assert_eq!(s.dim(), 1);
        let bad = j.replace("\"std\":0.55}}", "\"std\":0.6}}");
        assert!(serde_json::from_str::<QuadSpec>(&bad).is_err());
    }
}
