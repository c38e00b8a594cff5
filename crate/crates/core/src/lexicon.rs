//! Predicates, modifiers, and the other closed vocabularies used by the
//! experiments and the model.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Evaluative polarity of a predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Valence {
    Positive,
    Negative,
}

impl Valence {
    /// +1 for positive predicates, -1 for negative ones.
    pub fn sign(self) -> f64 {
        match self {
            Valence::Positive => 1.0,
            Valence::Negative => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Predicate {
    Exhausted,
    Boring,
    Difficult,
    Concerned,
    Understandable,
    Impressive,
    Helpful,
}

impl Predicate {
    pub const ALL: [Predicate; 7] = [
        Predicate::Exhausted,
        Predicate::Boring,
        Predicate::Difficult,
        Predicate::Concerned,
        Predicate::Understandable,
        Predicate::Impressive,
        Predicate::Helpful,
    ];

    pub fn valence(self) -> Valence {
        match self {
            Predicate::Understandable | Predicate::Impressive | Predicate::Helpful => Valence::Positive,
            Predicate::Exhausted | Predicate::Boring | Predicate::Difficult | Predicate::Concerned => {
                Valence::Negative
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Predicate::Exhausted => "exhausted",
            Predicate::Boring => "boring",
            Predicate::Difficult => "difficult",
            Predicate::Concerned => "concerned",
            Predicate::Understandable => "understandable",
            Predicate::Impressive => "impressive",
            Predicate::Helpful => "helpful",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Predicate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Predicate::ALL
            .into_iter()
            .find(|p| p.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown predicate '{s}'")))
    }
}

/// A degree modifier slot. `None` is the bare, unmodified form.
///
/// Declaration order is the strength hierarchy, weakest first, with the
/// unmodified form in front.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modifier {
    None,
    Slightly,
    KindOf,
    Quite,
    Very,
    Extremely,
}

impl Modifier {
    /// All six utterance forms of a predicate.
    pub const ALL: [Modifier; 6] = [
        Modifier::None,
        Modifier::Slightly,
        Modifier::KindOf,
        Modifier::Quite,
        Modifier::Very,
        Modifier::Extremely,
    ];

    /// The five overt modifiers, weakest first.
    pub const MODIFIERS: [Modifier; 5] = [
        Modifier::Slightly,
        Modifier::KindOf,
        Modifier::Quite,
        Modifier::Very,
        Modifier::Extremely,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Modifier::None => "none",
            Modifier::Slightly => "slightly",
            Modifier::KindOf => "kind_of",
            Modifier::Quite => "quite",
            Modifier::Very => "very",
            Modifier::Extremely => "extremely",
        }
    }

    pub fn is_modified(self) -> bool {
        self != Modifier::None
    }

    /// Position in [`Modifier::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Modifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Modifier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace([' ', '-'], "_");
        match norm.as_str() {
            "none" | "" => Ok(Modifier::None),
            "slightly" => Ok(Modifier::Slightly),
            "kind_of" | "kindof" => Ok(Modifier::KindOf),
            "quite" => Ok(Modifier::Quite),
            "very" => Ok(Modifier::Very),
            "extremely" => Ok(Modifier::Extremely),
            _ => Err(Error::Config(format!("unknown modifier '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Country {
    UK,
    US,
}

impl Country {
    pub const ALL: [Country; 2] = [Country::UK, Country::US];

    pub fn as_str(self) -> &'static str {
        match self {
            Country::UK => "UK",
            Country::US => "US",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Country {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Country {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "UK" => Ok(Country::UK),
            "US" => Ok(Country::US),
            other => Err(Error::Config(format!("unknown country '{other}'"))),
        }
    }
}

/// Which of the three elicitation conditions a trial came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Dialogue,
    Narrator,
    Politeness,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Dialogue => "dialogue",
            Experiment::Narrator => "narrator",
            Experiment::Politeness => "politeness",
        }
    }

    /// Interpretation conditions are the ones the listener model is fit to.
    pub fn is_interpretation(self) -> bool {
        !matches!(self, Experiment::Politeness)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dialogue" => Ok(Experiment::Dialogue),
            "narrator" => Ok(Experiment::Narrator),
            "politeness" => Ok(Experiment::Politeness),
            other => Err(Error::Config(format!("unknown experiment '{other}'"))),
        }
    }
}

/// A predicate with an optional degree modifier, e.g. "very helpful".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Utterance {
    pub predicate: Predicate,
    pub modifier: Modifier,
}

impl Utterance {
    pub fn new(predicate: Predicate, modifier: Modifier) -> Self {
        Self { predicate, modifier }
    }

    pub fn bare(predicate: Predicate) -> Self {
        Self::new(predicate, Modifier::None)
    }

    pub fn valence(&self) -> Valence {
        self.predicate.valence()
    }

    /// The six forms of this utterance's predicate, in [`Modifier::ALL`] order.
    pub fn alternatives(&self) -> Vec<Utterance> {
        Modifier::ALL.iter().map(|&m| Utterance::new(self.predicate, m)).collect()
    }
}

impl fmt::Display for Utterance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.modifier {
            Modifier::None => write!(f, "{}", self.predicate),
            Modifier::KindOf => write!(f, "kind of {}", self.predicate),
            m => write!(f, "{} {}", m, self.predicate),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valence_assignment() {
        let positive: Vec<_> = Predicate::ALL
            .into_iter()
            .filter(|p| p.valence() == Valence::Positive)
            .collect();
        assert_eq!(
            positive,
            vec![Predicate::Understandable, Predicate::Impressive, Predicate::Helpful]
        );
        assert_eq!(Predicate::Boring.valence(), Valence::Negative);
    }

    #[test]
    fn parse_round_trip() {
        for m in Modifier::ALL {
            assert_eq!(m.as_str().parse::<Modifier>().unwrap(), m);
        }
        for p in Predicate::ALL {
            assert_eq!(p.as_str().parse::<Predicate>().unwrap(), p);
        }
        assert_eq!("kind of".parse::<Modifier>().unwrap(), Modifier::KindOf);
        assert!("totally".parse::<Modifier>().is_err());
        assert!("nice".parse::<Predicate>().is_err());
    }

    #[test]
    fn display() {
        let u = Utterance::new(Predicate::Helpful, Modifier::KindOf);
        assert_eq!(u.to_string(), "kind of helpful");
        assert_eq!(Utterance::bare(Predicate::Boring).to_string(), "boring");
    }
}
