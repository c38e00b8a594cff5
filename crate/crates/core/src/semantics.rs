//! Smooth double-threshold literal semantics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::{Modifier, Utterance};

pub const DEFAULT_TAU: f64 = 0.2;
pub const DEFAULT_EPSILON: f64 = 1e-4;

/// Lower and upper degree bounds of an utterance's literal meaning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Thresholds for the bare form and the five modifiers, plus the smoothing
/// temperature and the compatibility floor shared by every utterance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemanticParams {
    pub baseline: Interval,
    /// Indexed by [`Modifier::MODIFIERS`] order (slightly .. extremely).
    pub modifiers: [Interval; 5],
    pub tau: f64,
    pub epsilon: f64,
}

impl SemanticParams {
    pub fn new(baseline: Interval, modifiers: [Interval; 5], tau: f64, epsilon: f64) -> Result<Self> {
        let params = Self { baseline, modifiers, tau, epsilon };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::Config(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.01) {
            return Err(Error::Config(format!("epsilon must lie in (0, 0.01), got {}", self.epsilon)));
        }
        for m in Modifier::ALL {
            let iv = self.interval(m);
            if !(iv.lo < iv.hi) {
                return Err(Error::Config(format!(
                    "thresholds for '{m}' must satisfy lo < hi, got ({}, {})",
                    iv.lo, iv.hi
                )));
            }
        }
        Ok(())
    }

    /// The threshold pair used by a modifier slot; the bare form uses the baseline.
    pub fn interval(&self, modifier: Modifier) -> Interval {
        match modifier {
            Modifier::None => self.baseline,
            m => self.modifiers[m.index() - 1],
        }
    }

    pub fn interval_mut(&mut self, modifier: Modifier) -> &mut Interval {
        match modifier {
            Modifier::None => &mut self.baseline,
            m => &mut self.modifiers[m.index() - 1],
        }
    }

    /// The twelve threshold values, baseline first then modifiers weakest first.
    pub fn thresholds(&self) -> [f64; 12] {
        let mut out = [0.0; 12];
        for (k, m) in Modifier::ALL.iter().enumerate() {
            let iv = self.interval(*m);
            out[2 * k] = iv.lo;
            out[2 * k + 1] = iv.hi;
        }
        out
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Degree of compatibility of `utterance` with state `s`:
/// `eps + (1 - eps) * sigmoid((s - lo) / tau) * sigmoid((hi - s) / tau)`.
pub fn denotation(s: f64, utterance: &Utterance, sem: &SemanticParams) -> f64 {
    let iv = sem.interval(utterance.modifier);
    let inside = sigmoid((s - iv.lo) / sem.tau) * sigmoid((iv.hi - s) / sem.tau);
    sem.epsilon + (1.0 - sem.epsilon) * inside
}
