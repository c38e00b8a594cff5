use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lexicon::{Country, Modifier, Predicate, Utterance};

/// Mean politeness rating (z units) for every (country, predicate, modifier) cell.
///
/// Tables built from data are always complete; partially filled tables can be
/// assembled by hand, in which case lookups of absent cells fail.
#[derive(Debug, Clone, PartialEq)]
pub struct PolitenessTable {
    cells: [[[Option<f64>; 6]; 7]; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolitenessCell {
    pub country: Country,
    pub predicate: Predicate,
    pub modifier: Modifier,
    pub value: f64,
}

impl Default for PolitenessTable {
    fn default() -> Self {
        Self::empty()
    }
}

impl PolitenessTable {
    pub fn empty() -> Self {
        Self { cells: [[[None; 6]; 7]; 2] }
    }

    /// Every cell set to `value`.
    pub fn constant(value: f64) -> Self {
        Self { cells: [[[Some(value); 6]; 7]; 2] }
    }

    pub fn set(&mut self, country: Country, utterance: Utterance, value: f64) {
        self.cells[country.index()][utterance.predicate.index()][utterance.modifier.index()] = Some(value);
    }

    pub fn try_get(&self, country: Country, utterance: Utterance) -> Option<f64> {
        self.cells[country.index()][utterance.predicate.index()][utterance.modifier.index()]
    }

    pub fn get(&self, country: Country, utterance: Utterance) -> Result<f64> {
        self.try_get(country, utterance).ok_or_else(|| {
            Error::Data(format!("politeness table has no cell for ({country}, {}, {})", utterance.predicate, utterance.modifier))
        })
    }

    /// Cells that have no value, in canonical order.
    pub fn missing(&self) -> Vec<(Country, Predicate, Modifier)> {
        self.keys().filter(|&(c, p, m)| self.try_get(c, Utterance::new(p, m)).is_none()).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.missing().is_empty()
    }

    pub fn cells(&self) -> Vec<PolitenessCell> {
        self.keys()
            .filter_map(|(country, predicate, modifier)| {
                self.try_get(country, Utterance::new(predicate, modifier))
                    .map(|value| PolitenessCell { country, predicate, modifier, value })
            })
            .collect()
    }

    pub fn from_cells(cells: impl IntoIterator<Item = PolitenessCell>) -> Self {
        let mut table = Self::empty();
        for c in cells {
            table.set(c.country, Utterance::new(c.predicate, c.modifier), c.value);
        }
        table
    }

    /// Applies `f` to every present cell.
    pub fn map(&self, mut f: impl FnMut(Country, Utterance, f64) -> f64) -> Self {
        let mut out = self.clone();
        for (c, p, m) in self.keys() {
            let u = Utterance::new(p, m);
            if let Some(v) = self.try_get(c, u) {
                out.set(c, u, f(c, u, v));
            }
        }
        out
    }

    fn keys(&self) -> impl Iterator<Item = (Country, Predicate, Modifier)> {
        Country::ALL.into_iter().flat_map(|c| {
            Predicate::ALL
                .into_iter()
                .flat_map(move |p| Modifier::ALL.into_iter().map(move |m| (c, p, m)))
        })
    }
}

impl Serialize for PolitenessTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.cells().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PolitenessTable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let cells = Vec::<PolitenessCell>::deserialize(deserializer)?;
        Ok(Self::from_cells(cells))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_cells_are_reported() {
        let mut t = PolitenessTable::empty();
        assert_eq!(t.missing().len(), 84);
        t.set(Country::UK, Utterance::bare(Predicate::Helpful), 0.3);
        assert_eq!(t.missing().len(), 83);
        assert!(t.get(Country::US, Utterance::bare(Predicate::Helpful)).is_err());
        assert_eq!(t.get(Country::UK, Utterance::bare(Predicate::Helpful)).unwrap(), 0.3);
        assert!(PolitenessTable::constant(0.0).is_complete());
    }

    #[test]
    fn json_round_trip() {
        let t = PolitenessTable::constant(0.25).map(|c, u, v| v + c.index() as f64 + u.modifier.index() as f64);
        let json = serde_json::to_string(&t).unwrap();
        let back: PolitenessTable = serde_json::from_str(&json).unwrap();
        assert_eq!(t, back);
    }
}
