//! Deterministic reductions.
//!
//! Every reduction in the crate goes through a [`SummationPolicy`]. Parallel
//! code computes per-row partials into a vector (in canonical order) and then
//! reduces that vector with the policy, so results do not depend on thread
//! scheduling.

use std::fmt;
use std::str::FromStr;

/// Leaves of the pairwise tree are summed sequentially in blocks of this size.
const PAIRWISE_BLOCK: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SummationPolicy {
    /// Neumaier-compensated left-to-right summation.
    SequentialCompensated,
    /// Fixed-shape pairwise tree over the input order.
    #[default]
    PairwiseDeterministic,
}

impl SummationPolicy {
    pub fn sum(self, values: &[f64]) -> f64 {
        match self {
            SummationPolicy::SequentialCompensated => compensated_sum(values.iter().copied()),
            SummationPolicy::PairwiseDeterministic => pairwise_sum(values),
        }
    }

    /// Sums an iterator. Pairwise mode collects first so the tree shape only
    /// depends on the element count.
    pub fn sum_iter<I: IntoIterator<Item = f64>>(self, values: I) -> f64 {
        match self {
            SummationPolicy::SequentialCompensated => compensated_sum(values),
            SummationPolicy::PairwiseDeterministic => {
                let v: Vec<f64> = values.into_iter().collect();
                pairwise_sum(&v)
            }
        }
    }
}

impl fmt::Display for SummationPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SummationPolicy::SequentialCompensated => f.write_str("compensated"),
            SummationPolicy::PairwiseDeterministic => f.write_str("pairwise"),
        }
    }
}

impl FromStr for SummationPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "compensated" | "sequential" | "kahan" => Ok(SummationPolicy::SequentialCompensated),
            "pairwise" => Ok(SummationPolicy::PairwiseDeterministic),
            other => Err(format!("unknown summation policy '{other}' (expected pairwise|compensated)")),
        }
    }
}

/// Neumaier's variant of Kahan summation.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_recovers_small_terms() {
        let mut v = vec![1.0e16];
        v.extend(std::iter::repeat_n(1.0, 1000));
        v.push(-1.0e16);
        assert_eq!(compensated_sum(v.iter().copied()), 1000.0);
    }

    #[test]
    fn pairwise_matches_exact_integers() {
        let v: Vec<f64> = (1..=10_000).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&v), 50_005_000.0);
    }

    #[test]
    fn policies_parse() {
        assert_eq!("pairwise".parse::<SummationPolicy>().unwrap(), SummationPolicy::PairwiseDeterministic);
        assert_eq!("compensated".parse::<SummationPolicy>().unwrap(), SummationPolicy::SequentialCompensated);
        assert!("fast".parse::<SummationPolicy>().is_err());
    }

    #[test]
    fn repeated_sums_are_bit_identical() {
        let v: Vec<f64> = (0..5000).map(|k| ((k as f64) * 0.37).sin() / (1.0 + k as f64)).collect();
        for p in [SummationPolicy::PairwiseDeterministic, SummationPolicy::SequentialCompensated] {
            let a = p.sum(&v);
            let b = p.sum_iter(v.iter().copied());
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
