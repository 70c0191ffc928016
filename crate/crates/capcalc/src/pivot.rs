//! Tie probabilities for a marginal voter and the small-number-times-large-
//! number decisions built on them.
//!
//! Among 2k other voters, the marginal vote matters only on an exact k-k
//! split. The probability computed here is the ratio (k! * k!) / (2k)!,
//! i.e. 1 / C(2k, k): exact rational arithmetic at small k, log-space at
//! scale (C(2k, k) overflows f64 near k = 510).

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest k served by the exact rational path.
pub const EXACT_K_LIMIT: u64 = 10_000;

/// An even electorate of other voters; the marginal voter is pivotal exactly
/// when they split k-k.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TieQuery {
    electorate: u64,
}

impl TieQuery {
    /// `electorate` counts the other voters and must be even and positive.
    pub fn new(electorate: u64) -> Result<Self> {
        if electorate == 0 || electorate % 2 != 0 {
            return Err(Error::OddElectorate(electorate));
        }
        Ok(TieQuery { electorate })
    }

    pub fn from_k(k: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("k must be at least 1".to_string()));
        }
        Ok(TieQuery { electorate: 2 * k })
    }

    pub fn electorate(&self) -> u64 {
        self.electorate
    }

    pub fn k(&self) -> u64 {
        self.electorate / 2
    }
}

/// C(2k, k) by the multiplicative formula; every intermediate division is
/// exact because each prefix is itself a binomial coefficient.
fn central_binomial(k: u64) -> BigUint {
    let mut c = BigUint::one();
    for i in 1..=k {
        c = c * BigUint::from(k + i) / BigUint::from(i);
    }
    c
}

/// Exact tie probability (k! * k!) / (2k)! = 1 / C(2k, k).
pub fn tie_probability_exact(k: u64) -> Result<BigRational> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".to_string()));
    }
    if k > EXACT_K_LIMIT {
        return Err(Error::UnsupportedExactK {
            k,
            max: EXACT_K_LIMIT,
        });
    }
    Ok(BigRational::new(
        BigInt::one(),
        BigInt::from(central_binomial(k)),
    ))
}

/// Natural log of the tie probability, summed as ln(i) - ln(k+i) over
/// i = 1..=k with Kahan compensation. Every term has the same sign, so no
/// cancellation occurs and the result is accurate to a few ulps.
pub fn tie_probability_log(k: u64) -> f64 {
    let mut sum = 0.0;
    let mut compensation = 0.0;
    for i in 1..=k {
        let term = (i as f64).ln() - ((k + i) as f64).ln();
        let y = term - compensation;
        let t = sum + y;
        compensation = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Comparison of the tie probability against the (3/4)^(k/2) envelope, with
/// per-factor statistics for the decomposition P = prod i/(k+i).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub k: u64,
    /// ln P(tie).
    pub log_tie: f64,
    /// (k/2) * ln(0.75).
    pub log_bound: f64,
    pub holds: bool,
    pub margin_ln: f64,
    pub margin_log10: f64,
    pub factors_total: u64,
    /// Factors of the decomposition lying in [0.50, 0.75].
    pub factors_in_range: u64,
    /// Index range (1-based) of the in-range factors, when any.
    pub in_range_indices: Option<(u64, u64)>,
    /// How many in-range factors the envelope would need: k/2.
    pub factors_claimed: u64,
    pub factor_claim_holds: bool,
    pub factor_min: f64,
    pub factor_max: f64,
}

/// Checks ln P(tie) < (k/2) * ln(3/4) and reports the margin, plus which
/// factors i/(k+i) of the exact product actually fall inside [0.50, 0.75].
/// The factors increase with i and top out at exactly 1/2, so the in-range
/// count stays at one; the envelope itself still holds by a wide margin.
pub fn bound_report(k: u64) -> BoundReport {
    let log_tie = tie_probability_log(k);
    let log_bound = (k as f64 / 2.0) * 0.75f64.ln();
    let margin_ln = log_bound - log_tie;

    let mut factors_in_range = 0u64;
    let mut first_last: Option<(u64, u64)> = None;
    for i in 1..=k {
        let factor = i as f64 / (k + i) as f64;
        if (0.50..=0.75).contains(&factor) {
            factors_in_range += 1;
            first_last = Some(match first_last {
                None => (i, i),
                Some((first, _)) => (first, i),
            });
        }
    }
    let factors_claimed = k / 2;

    BoundReport {
        k,
        log_tie,
        log_bound,
        holds: log_tie < log_bound,
        margin_ln,
        margin_log10: margin_ln / std::f64::consts::LN_10,
        factors_total: k,
        factors_in_range,
        in_range_indices: first_last,
        factors_claimed,
        factor_claim_holds: factors_in_range >= factors_claimed,
        factor_min: 1.0 / (k + 1) as f64,
        factor_max: 0.5,
    }
}

/// Harm scaled by the tie probability.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarmReport {
    pub k: u64,
    pub harm: f64,
    /// ln P(tie).
    pub tie_log: f64,
    /// ln(h * P); finite even when the product underflows to zero.
    pub log_expected: f64,
    pub expected: f64,
}

/// Expected societal harm of the marginal vote: h times the tie probability.
/// Exact within the rational range; log-space beyond it, reporting 0 with a
/// finite log when the product underflows.
pub fn expected_harm(query: &TieQuery, harm: f64) -> Result<HarmReport> {
    if !harm.is_finite() || harm < 0.0 {
        return Err(Error::Domain(
            "harm must be finite and non-negative".to_string(),
        ));
    }
    let k = query.k();
    let tie_log = tie_probability_log(k);
    let log_expected = harm.ln() + tie_log;
    let expected = if k <= EXACT_K_LIMIT {
        let p = tie_probability_exact(k)?;
        harm * p.to_f64().unwrap_or(0.0)
    } else {
        log_expected.exp()
    };
    Ok(HarmReport {
        k,
        harm,
        tie_log,
        log_expected,
        expected,
    })
}

/// A small per-head effect, the crowd it applies to, and the cost of acting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HarmModel {
    /// Net private gain per head (or of the marginal act); positive.
    pub epsilon: f64,
    /// Harm to society if the bad alternative wins.
    pub harm: f64,
    pub population: u64,
    pub unit_cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VotingComparison {
    pub k: u64,
    pub expected_harm: f64,
    pub log_expected_harm: f64,
    /// epsilon > harm * P(tie).
    pub private_gain_exceeds_harm: bool,
}

/// Act/don't-act verdict for epsilon-times-N against a cost, plus the voting
/// variant comparing the private gain against the expected societal harm.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub aggregate_gain: f64,
    pub unit_cost: f64,
    pub act: bool,
    /// Present when the population is even, so a tie among it is possible.
    pub voting: Option<VotingComparison>,
}

pub fn epsilon_threshold(model: &HarmModel) -> Result<ThresholdReport> {
    if !model.epsilon.is_finite() || model.epsilon <= 0.0 {
        return Err(Error::Domain(
            "epsilon must be finite and positive".to_string(),
        ));
    }
    if !model.harm.is_finite() || model.harm < 0.0 {
        return Err(Error::Domain(
            "harm must be finite and non-negative".to_string(),
        ));
    }
    if model.population == 0 {
        return Err(Error::Domain("population must be positive".to_string()));
    }
    if !model.unit_cost.is_finite() || model.unit_cost < 0.0 {
        return Err(Error::Domain(
            "unit cost must be finite and non-negative".to_string(),
        ));
    }

    let aggregate_gain = model.epsilon * model.population as f64;
    let voting = if model.population % 2 == 0 {
        let query = TieQuery::new(model.population)?;
        let report = expected_harm(&query, model.harm)?;
        Some(VotingComparison {
            k: query.k(),
            expected_harm: report.expected,
            log_expected_harm: report.log_expected,
            private_gain_exceeds_harm: model.epsilon > report.expected,
        })
    } else {
        None
    };

    Ok(ThresholdReport {
        aggregate_gain,
        unit_cost: model.unit_cost,
        act: aggregate_gain > model.unit_cost,
        voting,
    })
}
