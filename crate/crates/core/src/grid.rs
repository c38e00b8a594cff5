use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform discretization of the latent degree scale with a standard-normal
/// prior renormalized over the grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct StateGrid {
    points: Vec<f64>,
    prior_mass: Vec<f64>,
    lo: f64,
    hi: f64,
}

/// Serializable description of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub n_points: usize,
    /// Half-width of the symmetric range, in z units.
    pub range: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n_points: 101, range: 4.0 }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<StateGrid> {
        StateGrid::new(-self.range, self.range, self.n_points)
    }
}

impl StateGrid {
    pub fn new(lo: f64, hi: f64, n_points: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Config(format!("grid bounds must satisfy lo < hi, got [{lo}, {hi}]")));
        }
        if n_points < 2 {
            return Err(Error::Config(format!("grid needs at least 2 points, got {n_points}")));
        }
        let step = (hi - lo) / (n_points - 1) as f64;
        let points: Vec<f64> = (0..n_points).map(|i| lo + step * i as f64).collect();
        let density: Vec<f64> = points.iter().map(|s| (-0.5 * s * s).exp()).collect();
        let total: f64 = density.iter().sum();
        let prior_mass = density.into_iter().map(|d| d / total).collect();
        Ok(Self { points, prior_mass, lo, hi })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn prior_mass(&self) -> &[f64] {
        &self.prior_mass
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.len() - 1) as f64
    }

    /// Index of the grid point nearest to `s`; values outside the range map to
    /// the boundary bins.
    pub fn nearest_index(&self, s: f64) -> usize {
        if !(s > self.lo) {
            return 0;
        }
        let idx = ((s - self.lo) / self.step()).round();
        (idx as usize).min(self.len() - 1)
    }

    pub fn config(&self) -> GridConfig {
        GridConfig { n_points: self.len(), range: self.hi.max(-self.lo) }
    }

    /// Posterior mean of a distribution over the grid.
    pub fn expectation(&self, probs: &[f64]) -> f64 {
        self.points.iter().zip(probs).map(|(s, p)| s * p).sum()
    }
}
