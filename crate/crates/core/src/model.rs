//! Parameter-sharing structure of the model family and the flat vector
//! layout the optimizer works on.
//!
//! # Vector layout
//!
//! The first block holds one value for every parameter of the full model; it
//! is the UK setting and, for parameters that are not culture-specific, the
//! shared setting:
//!
//! | index | slot |
//! |-------|------|
//! | 0, 1  | baseline lower threshold, log of (upper − lower) |
//! | 2..12 | same pair for slightly, kind_of, quite, very, extremely |
//! | 12    | cost, through softplus |
//! | 13    | social weight φ_s (untransformed) |
//! | 14    | informativity weight φ_i, through softplus |
//!
//! Then, for each culture-varied parameter in the same canonical order
//! (thresholds baseline..extremely, cost, soc, inf), the US value in the same
//! encoding. Freezing the social weight removes its slot(s) and fixes φ_s = 0.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::{Country, Modifier};
use crate::rsa::PragmaticParams;
use crate::semantics::{Interval, SemanticParams, DEFAULT_EPSILON, DEFAULT_TAU};

/// A parameter (or threshold pair) that may be made culture-specific.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ParamName {
    #[serde(rename = "thr_baseline")]
    ThrBaseline,
    #[serde(rename = "thr_slightly")]
    ThrSlightly,
    #[serde(rename = "thr_kind_of")]
    ThrKindOf,
    #[serde(rename = "thr_quite")]
    ThrQuite,
    #[serde(rename = "thr_very")]
    ThrVery,
    #[serde(rename = "thr_extremely")]
    ThrExtremely,
    #[serde(rename = "cost")]
    Cost,
    #[serde(rename = "soc", alias = "phi_s")]
    Soc,
    #[serde(rename = "inf", alias = "phi_i")]
    Inf,
}

impl ParamName {
    /// Canonical order, which is also the order of appended culture slots.
    pub const ALL: [ParamName; 9] = [
        ParamName::ThrBaseline,
        ParamName::ThrSlightly,
        ParamName::ThrKindOf,
        ParamName::ThrQuite,
        ParamName::ThrVery,
        ParamName::ThrExtremely,
        ParamName::Cost,
        ParamName::Soc,
        ParamName::Inf,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ParamName::ThrBaseline => "thr_baseline",
            ParamName::ThrSlightly => "thr_slightly",
            ParamName::ThrKindOf => "thr_kind_of",
            ParamName::ThrQuite => "thr_quite",
            ParamName::ThrVery => "thr_very",
            ParamName::ThrExtremely => "thr_extremely",
            ParamName::Cost => "cost",
            ParamName::Soc => "soc",
            ParamName::Inf => "inf",
        }
    }

    /// The modifier slot a threshold parameter belongs to.
    pub fn modifier(self) -> Option<Modifier> {
        match self {
            ParamName::ThrBaseline => Some(Modifier::None),
            ParamName::ThrSlightly => Some(Modifier::Slightly),
            ParamName::ThrKindOf => Some(Modifier::KindOf),
            ParamName::ThrQuite => Some(Modifier::Quite),
            ParamName::ThrVery => Some(Modifier::Very),
            ParamName::ThrExtremely => Some(Modifier::Extremely),
            _ => None,
        }
    }

    pub fn threshold_for(modifier: Modifier) -> ParamName {
        ParamName::ALL[modifier.index()]
    }

    pub fn is_threshold(self) -> bool {
        self.modifier().is_some()
    }

    /// Number of free values this parameter occupies.
    pub fn width(self) -> usize {
        if self.is_threshold() {
            2
        } else {
            1
        }
    }
}

impl fmt::Display for ParamName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParamName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "phi_s" => return Ok(ParamName::Soc),
            "phi_i" => return Ok(ParamName::Inf),
            _ => {}
        }
        ParamName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown parameter '{s}'")))
    }
}

/// Which parameters differ between cultures.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub varied: BTreeSet<ParamName>,
    /// Fix φ_s = 0 and drop it from the free vector.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub freeze_social: bool,
}

impl ModelSpec {
    pub fn new(name: impl Into<String>, varied: impl IntoIterator<Item = ParamName>) -> Self {
        Self { name: name.into(), varied: varied.into_iter().collect(), freeze_social: false }
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }

    /// Looks up a built-in spec by name (M1..M9).
    pub fn builtin(name: &str) -> Result<Self> {
        builtin_specs()
            .into_iter()
            .find(|s| s.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Config(format!("unknown model '{name}' (expected M1..M9 or a JSON spec)")))
    }

    pub fn is_varied(&self, p: ParamName) -> bool {
        self.varied.contains(&p)
    }

    /// Free parameter count.
    pub fn df(&self) -> usize {
        self.layout().len()
    }

    /// The same family with the social weight fixed at zero.
    pub fn with_frozen_social(&self) -> Self {
        let mut varied = self.varied.clone();
        varied.remove(&ParamName::Soc);
        Self { name: format!("{}-narrator", self.name), varied, freeze_social: true }
    }

    /// This spec with `param` shared between cultures.
    pub fn sharing(&self, param: ParamName) -> Self {
        let mut varied = self.varied.clone();
        varied.remove(&param);
        Self { name: format!("{}-shared-{}", self.name, param), varied, freeze_social: self.freeze_social }
    }

    /// `self` is nested in `other` when every culture-specific parameter here
    /// is also culture-specific there.
    pub fn is_nested_in(&self, other: &ModelSpec) -> bool {
        self.freeze_social == other.freeze_social && self.varied.is_subset(&other.varied)
    }

    pub fn layout(&self) -> Vec<Slot> {
        let mut slots = Vec::with_capacity(30);
        for &p in &ParamName::ALL {
            push_slots(&mut slots, p, None, self.freeze_social);
        }
        for &p in &ParamName::ALL {
            if self.is_varied(p) {
                push_slots(&mut slots, p, Some(Country::US), self.freeze_social);
            }
        }
        slots
    }
}

fn push_slots(slots: &mut Vec<Slot>, param: ParamName, country: Option<Country>, freeze_social: bool) {
    if param == ParamName::Soc && freeze_social {
        return;
    }
    if param.is_threshold() {
        slots.push(Slot { param, part: SlotPart::Lower, country });
        slots.push(Slot { param, part: SlotPart::LogGap, country });
    } else {
        let part = if param == ParamName::Soc { SlotPart::Identity } else { SlotPart::Softplus };
        slots.push(Slot { param, part, country });
    }
}

/// How the raw optimizer value maps to the model parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotPart {
    /// Lower threshold, used as is.
    Lower,
    /// Upper threshold = lower + exp(raw).
    LogGap,
    /// Nonnegative parameter = softplus(raw).
    Softplus,
    /// Unconstrained parameter, used as is.
    Identity,
}

/// One entry of the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub param: ParamName,
    pub part: SlotPart,
    /// `None` for the shared/UK block, `Some(US)` for US overrides.
    pub country: Option<Country>,
}

impl Slot {
    pub fn label(&self) -> String {
        let part = match self.part {
            SlotPart::Lower => ".lo",
            SlotPart::LogGap => ".log_gap",
            SlotPart::Softplus => ".softplus",
            SlotPart::Identity => "",
        };
        match self.country {
            Some(c) => format!("{}{}@{}", self.param, part, c),
            None => format!("{}{}", self.param, part),
        }
    }

    /// Box the optimizer is kept inside.
    pub fn bounds(&self) -> (f64, f64) {
        match self.part {
            SlotPart::Lower => (-8.0, 8.0),
            SlotPart::LogGap => (-5.0, 3.0),
            SlotPart::Softplus => (-12.0, 8.0),
            SlotPart::Identity => (-10.0, 10.0),
        }
    }
}

/// The nine culture-sharing specs compared in the model-comparison table.
pub fn builtin_specs() -> Vec<ModelSpec> {
    use ParamName::*;
    vec![
        ModelSpec::new("M1", []),
        ModelSpec::new("M2", [Soc]),
        ModelSpec::new("M3", [Inf]),
        ModelSpec::new("M4", [Cost]),
        ModelSpec::new("M5", [Cost, Inf]),
        ModelSpec::new("M6", [ThrQuite]),
        ModelSpec::new("M7", [ThrVery]),
        ModelSpec::new("M8", [ThrBaseline, ThrSlightly, ThrKindOf, ThrQuite, ThrVery, ThrExtremely]),
        ModelSpec::new("M9", ParamName::ALL),
    ]
}

/// Smoothing constants that are configuration, not fitted parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemanticConstants {
    pub tau: f64,
    pub epsilon: f64,
}

impl Default for SemanticConstants {
    fn default() -> Self {
        Self { tau: DEFAULT_TAU, epsilon: DEFAULT_EPSILON }
    }
}

/// Full model parameters for one culture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CultureModel {
    pub semantics: SemanticParams,
    pub pragmatics: PragmaticParams,
}

impl CultureModel {
    /// The starting point used by the fitter: intervals ordered along the
    /// strength hierarchy, φ_i = 1, φ_s = 0.1, cost = 0.1.
    pub fn initial(constants: SemanticConstants) -> Self {
        let semantics = SemanticParams {
            baseline: Interval::new(-1.0, 1.5),
            modifiers: [
                Interval::new(-2.0, -0.3),
                Interval::new(-1.5, 0.2),
                Interval::new(-0.8, 0.8),
                Interval::new(0.2, 2.0),
                Interval::new(0.8, 3.0),
            ],
            tau: constants.tau,
            epsilon: constants.epsilon,
        };
        Self { semantics, pragmatics: PragmaticParams { phi_i: 1.0, phi_s: 0.1, cost: 0.1 } }
    }

    /// Scalar value of a non-threshold parameter.
    pub fn scalar(&self, p: ParamName) -> Option<f64> {
        match p {
            ParamName::Cost => Some(self.pragmatics.cost),
            ParamName::Soc => Some(self.pragmatics.phi_s),
            ParamName::Inf => Some(self.pragmatics.phi_i),
            _ => None,
        }
    }

    pub fn set_scalar(&mut self, p: ParamName, value: f64) {
        match p {
            ParamName::Cost => self.pragmatics.cost = value,
            ParamName::Soc => self.pragmatics.phi_s = value,
            ParamName::Inf => self.pragmatics.phi_i = value,
            _ => panic!("{p} is not a scalar parameter"),
        }
    }
}

/// Per-culture parameters, indexed by [`Country`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CultureParams {
    pub uk: CultureModel,
    pub us: CultureModel,
}

impl CultureParams {
    pub fn shared(model: CultureModel) -> Self {
        Self { uk: model, us: model }
    }

    pub fn get(&self, country: Country) -> &CultureModel {
        match country {
            Country::UK => &self.uk,
            Country::US => &self.us,
        }
    }

    pub fn get_mut(&mut self, country: Country) -> &mut CultureModel {
        match country {
            Country::UK => &mut self.uk,
            Country::US => &mut self.us,
        }
    }
}

pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

pub fn softplus_inverse(y: f64) -> f64 {
    // y + ln(1 - e^-y), stable for small and large y
    y + (-(-y).exp_m1()).ln()
}

fn read_slot(model: &mut CultureModel, slot: &Slot, raw: f64) {
    match (slot.param.modifier(), slot.part) {
        (Some(m), SlotPart::Lower) => model.semantics.interval_mut(m).lo = raw,
        // lower is always written before its gap
        (Some(m), SlotPart::LogGap) => {
            let iv = model.semantics.interval_mut(m);
            iv.hi = iv.lo + raw.exp();
        }
        (None, SlotPart::Softplus) => model.set_scalar(slot.param, softplus(raw)),
        (None, SlotPart::Identity) => model.set_scalar(slot.param, raw),
        _ => unreachable!("inconsistent slot {slot:?}"),
    }
}

fn write_slot(model: &CultureModel, slot: &Slot) -> f64 {
    match (slot.param.modifier(), slot.part) {
        (Some(m), SlotPart::Lower) => model.semantics.interval(m).lo,
        (Some(m), SlotPart::LogGap) => model.semantics.interval(m).width().ln(),
        (None, SlotPart::Softplus) => softplus_inverse(model.scalar(slot.param).unwrap()),
        (None, SlotPart::Identity) => model.scalar(slot.param).unwrap(),
        _ => unreachable!("inconsistent slot {slot:?}"),
    }
}

/// Decodes a flat optimizer vector into per-culture parameters.
pub fn unpack(v: &[f64], spec: &ModelSpec, constants: SemanticConstants) -> Result<CultureParams> {
    let layout = spec.layout();
    if v.len() != layout.len() {
        return Err(Error::Usage(format!(
            "model {} expects a vector of length {}, got {}",
            spec.name,
            layout.len(),
            v.len()
        )));
    }
    let mut uk = CultureModel::initial(constants);
    if spec.freeze_social {
        uk.pragmatics.phi_s = 0.0;
    }
    let mut split = layout.iter().zip(v).partition::<Vec<_>, _>(|(s, _)| s.country.is_none());
    for (slot, &raw) in &split.0 {
        read_slot(&mut uk, slot, raw);
    }
    let mut us = uk;
    for (slot, &raw) in split.1.drain(..) {
        read_slot(&mut us, slot, raw);
    }
    Ok(CultureParams { uk, us })
}

/// Encodes per-culture parameters; shared parameters are read from the UK
/// entry.
pub fn pack(params: &CultureParams, spec: &ModelSpec) -> Vec<f64> {
    spec.layout()
        .iter()
        .map(|slot| match slot.country {
            None => write_slot(&params.uk, slot),
            Some(c) => write_slot(params.get(c), slot),
        })
        .collect()
}

/// Layout labels, one per vector entry.
pub fn layout_labels(spec: &ModelSpec) -> Vec<String> {
    spec.layout().iter().map(Slot::label).collect()
}

/// Maps a vector fitted under `from` into the layout of `to` (which must
/// contain `from`), giving the US copy of newly varied parameters the shared
/// value. Used to seed a larger model with a smaller model's optimum. A
/// frozen target drops the social weight.
pub fn embed(v: &[f64], from: &ModelSpec, to: &ModelSpec, constants: SemanticConstants) -> Result<Vec<f64>> {
    let params = unpack(v, from, constants)?;
    Ok(pack(&params, to))
}
