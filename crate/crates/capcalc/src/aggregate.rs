//! Welfare aggregators for comparing policies: utilitarian sum, maximin
//! (worst-off welfare), and a prioritarian weighting that counts gains to
//! currently worse-off agents more heavily.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregator {
    UtilitarianSum,
    Maximin,
    Prioritarian,
}

impl FromStr for Aggregator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "utilitarian-sum" => Ok(Aggregator::UtilitarianSum),
            "maximin" => Ok(Aggregator::Maximin),
            "prioritarian" => Ok(Aggregator::Prioritarian),
            other => Err(Error::UnknownAggregator(other.to_string())),
        }
    }
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregator::UtilitarianSum => "utilitarian-sum",
            Aggregator::Maximin => "maximin",
            Aggregator::Prioritarian => "prioritarian",
        })
    }
}

/// Weight of a welfare change for an agent whose current value is `current`,
/// given the population minimum `current_min`: 1 / (1 + current - current_min).
/// Scale-stable under shifting all values by a constant.
pub fn prioritarian_weight(current: f64, current_min: f64) -> f64 {
    1.0 / (1.0 + current - current_min)
}

impl Aggregator {
    /// Aggregate change score for moving the population welfare vector from
    /// `before` to `after`. `current` holds the agents' current local values
    /// and only feeds the prioritarian weights.
    ///
    /// - utilitarian-sum: sum of the per-agent changes
    /// - maximin: change in the worst-off welfare, min(after) - min(before)
    /// - prioritarian: weighted sum of changes
    pub fn change_score(&self, current: &[f64], before: &[f64], after: &[f64]) -> f64 {
        debug_assert_eq!(before.len(), after.len());
        debug_assert_eq!(current.len(), before.len());
        if before.is_empty() {
            return 0.0;
        }
        match self {
            Aggregator::UtilitarianSum => before.iter().zip(after).map(|(b, a)| a - b).sum(),
            Aggregator::Maximin => {
                let min = |xs: &[f64]| xs.iter().copied().fold(f64::INFINITY, f64::min);
                min(after) - min(before)
            }
            Aggregator::Prioritarian => {
                let current_min = current.iter().copied().fold(f64::INFINITY, f64::min);
                current
                    .iter()
                    .zip(before.iter().zip(after))
                    .map(|(c, (b, a))| prioritarian_weight(*c, current_min) * (a - b))
                    .sum()
            }
        }
    }
}
