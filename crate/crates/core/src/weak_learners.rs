//! Exact empirical-risk-minimizing weak learners over decision stumps and
//! low-degree parities.
//!
//! Correlations are always normalized by total weight, so they live in
//! `[-1, 1]` and compare directly against the booster's threshold.
//!
//! Tie-breaking is deterministic: lower feature index, then smaller
//! threshold, then polarity `+1` before `-1`. Parities are scanned in
//! lexicographic order of their sorted index lists, `+` before `-`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::BaseHypothesis;
pub use crate::sample::{WeightedExample, WeightedLabeledSet};
use crate::sign::Sign;

pub const DEFAULT_PARITY_CAP: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeakLearnerKind {
    StumpErm,
    ParityErm {
        degree: usize,
        #[serde(default = "default_cap")]
        cap: u64,
    },
}

fn default_cap() -> u64 {
    DEFAULT_PARITY_CAP
}

fn default_gamma() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakLearnerSpec {
    #[serde(flatten)]
    pub kind: WeakLearnerKind,
    /// Assumed edge; scales the booster's weak-term coefficient.
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Oracle slack. Exact ERM achieves zero relative to its own base class.
    #[serde(default)]
    pub epsilon0: f64,
}

impl WeakLearnerSpec {
    pub fn stumps() -> Self {
        WeakLearnerSpec {
            kind: WeakLearnerKind::StumpErm,
            gamma: 1.0,
            epsilon0: 0.0,
        }
    }

    pub fn parities(degree: usize) -> Self {
        WeakLearnerSpec {
            kind: WeakLearnerKind::ParityErm {
                degree,
                cap: DEFAULT_PARITY_CAP,
            },
            gamma: 1.0,
            epsilon0: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::config(
                "learner.gamma",
                format!("must be in (0, 1], got {}", self.gamma),
            ));
        }
        if !(self.epsilon0 >= 0.0) {
            return Err(Error::config("learner.epsilon0", "must be >= 0"));
        }
        Ok(())
    }
}

/// `sum_i w_i y_i h(x_i) / sum_i w_i`.
pub fn empirical_correlation(h: &BaseHypothesis, set: &WeightedLabeledSet) -> Result<f64> {
    let total = set.positive_total_weight()?;
    if set.dim() < h.min_dimension() {
        return Err(Error::DimensionMismatch {
            expected: h.min_dimension(),
            got: set.dim(),
        });
    }
    let s: f64 = set
        .items()
        .iter()
        .map(|e| e.w * (e.y * h.predict_unchecked(&e.x)).value())
        .sum();
    Ok(s / total)
}

/// Dispatches to the exact ERM for `spec.kind`.
pub fn weak_learn(spec: &WeakLearnerSpec, set: &WeightedLabeledSet) -> Result<BaseHypothesis> {
    match spec.kind {
        WeakLearnerKind::StumpErm => stump_erm(set),
        WeakLearnerKind::ParityErm { degree, cap } => parity_erm_capped(set, degree, cap),
    }
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m > a && m <= b {
        m
    } else {
        b
    }
}

/// Best stump (or constant) by weighted correlation.
///
/// Candidate thresholds are midpoints of consecutive distinct sorted values
/// of each feature, plus a sentinel below the minimum and one above the
/// maximum. Sentinel stumps are constant on the data and are returned as
/// [`BaseHypothesis::Constant`].
pub fn stump_erm(set: &WeightedLabeledSet) -> Result<BaseHypothesis> {
    let total = set.positive_total_weight()?;
    let dim = set.dim();
    if dim == 0 {
        return Err(Error::config("features", "stump search needs dimension >= 1"));
    }
    let items = set.items();
    // Signed weight of every example.
    let signed: Vec<f64> = items.iter().map(|e| e.w * e.y.value()).collect();
    let grand: f64 = signed.iter().sum();

    // Below-min sentinel of feature 0 comes first in the scan order.
    let mut best_corr = grand / total;
    let mut best = BaseHypothesis::constant(Sign::Pos);
    if -grand / total > best_corr {
        best_corr = -grand / total;
        best = BaseHypothesis::constant(Sign::Neg);
    }

    let mut order: Vec<usize> = (0..items.len()).collect();
    for j in 0..dim {
        order.sort_by(|&a, &b| items[a].x[j].total_cmp(&items[b].x[j]));
        // `left` = signed weight strictly below the current threshold.
        let mut left = 0.0;
        let mut k = 0;
        while k < order.len() {
            let v = items[order[k]].x[j];
            while k < order.len() && items[order[k]].x[j] == v {
                left += signed[order[k]];
                k += 1;
            }
            if k == order.len() {
                break;
            }
            let threshold = midpoint(v, items[order[k]].x[j]);
            // polarity +1 predicts +1 at or above the threshold.
            let corr = (grand - 2.0 * left) / total;
            if corr > best_corr {
                best_corr = corr;
                best = BaseHypothesis::stump(j, threshold, Sign::Pos);
            }
            if -corr > best_corr {
                best_corr = -corr;
                best = BaseHypothesis::stump(j, threshold, Sign::Neg);
            }
        }
        // The above-max sentinel equals a constant already considered.
    }
    Ok(best)
}

/// Number of subsets of `{0..n}` with at most `d` elements.
pub fn parity_candidates(n: usize, d: usize) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for k in 0..=d.min(n) {
        if k > 0 {
            binom = binom * (n - k + 1) as u128 / k as u128;
        }
        total = total.saturating_add(binom);
    }
    total
}

pub fn parity_erm(set: &WeightedLabeledSet, degree: usize) -> Result<BaseHypothesis> {
    parity_erm_capped(set, degree, DEFAULT_PARITY_CAP)
}

/// Best signed parity of degree at most `degree` over {-1,+1} features.
/// The empty subset is returned as a constant.
pub fn parity_erm_capped(set: &WeightedLabeledSet, degree: usize, cap: u64) -> Result<BaseHypothesis> {
    let total = set.positive_total_weight()?;
    let n = set.dim();
    let candidates = parity_candidates(n, degree);
    if candidates > cap as u128 {
        return Err(Error::ParityBudgetExceeded {
            candidates,
            cap: cap as u128,
        });
    }
    for (row, e) in set.items().iter().enumerate() {
        if let Some((feature, &value)) = e.x.iter().enumerate().find(|(_, &v)| v != 1.0 && v != -1.0) {
            return Err(Error::NonBooleanFeature { row, feature, value });
        }
    }

    let base: Vec<f64> = set.items().iter().map(|e| e.w * e.y.value()).collect();
    let mut search = ParitySearch {
        set,
        degree,
        total,
        subset: Vec::with_capacity(degree),
        best_corr: f64::NEG_INFINITY,
        best_subset: Vec::new(),
        best_sign: Sign::Pos,
    };
    search.visit(&base, 0);
    let ParitySearch {
        best_subset, best_sign, ..
    } = search;
    if best_subset.is_empty() {
        Ok(BaseHypothesis::constant(best_sign))
    } else {
        Ok(BaseHypothesis::Parity {
            subset: best_subset,
            sign: best_sign,
        })
    }
}

struct ParitySearch<'a> {
    set: &'a WeightedLabeledSet,
    degree: usize,
    total: f64,
    subset: Vec<usize>,
    best_corr: f64,
    best_subset: Vec<usize>,
    best_sign: Sign,
}

impl ParitySearch<'_> {
    /// `prod[i] = w_i y_i chi_subset(x_i)`; visits `subset` then its
    /// lexicographic extensions.
    fn visit(&mut self, prod: &[f64], next: usize) {
        let corr = prod.iter().sum::<f64>() / self.total;
        if corr > self.best_corr {
            self.best_corr = corr;
            self.best_subset = self.subset.clone();
            self.best_sign = Sign::Pos;
        }
        if -corr > self.best_corr {
            self.best_corr = -corr;
            self.best_subset = self.subset.clone();
            self.best_sign = Sign::Neg;
        }
        if self.subset.len() == self.degree {
            return;
        }
        let mut child = vec![0.0; prod.len()];
        for i in next..self.set.dim() {
            for ((c, p), e) in child.iter_mut().zip(prod).zip(self.set.items()) {
                *c = p * e.x[i];
            }
            self.subset.push(i);
            self.visit(&child, i + 1);
            self.subset.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(rows: &[(&[f64], Sign, f64)]) -> WeightedLabeledSet {
        WeightedLabeledSet::from_items(
            rows.iter()
                .map(|(x, y, w)| WeightedExample {
                    x: x.to_vec(),
                    y: *y,
                    w: *w,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn correlation_examples() {
        let s = set(&[(&[1.0], Sign::Pos, 3.0), (&[1.0], Sign::Neg, 1.0)]);
        let one = BaseHypothesis::constant(Sign::Pos);
        assert_eq!(empirical_correlation(&one, &s).unwrap(), 0.5);

        let balanced = set(&[(&[0.0], Sign::Pos, 1.0), (&[1.0], Sign::Neg, 1.0)]);
        assert_eq!(empirical_correlation(&one, &balanced).unwrap(), 0.0);
        let perfect = BaseHypothesis::stump(0, 0.5, Sign::Neg);
        assert_eq!(empirical_correlation(&perfect, &balanced).unwrap(), 1.0);

        let zero = set(&[(&[0.0], Sign::Pos, 0.0)]);
        assert!(matches!(empirical_correlation(&one, &zero), Err(Error::ZeroWeight(_))));
    }

    #[test]
    fn stump_erm_two_points() {
        let s = set(&[(&[1.0], Sign::Pos, 1.0), (&[3.0], Sign::Neg, 1.0)]);
        let h = stump_erm(&s).unwrap();
        assert_eq!(h, BaseHypothesis::stump(0, 2.0, Sign::Neg));
        assert_eq!(empirical_correlation(&h, &s).unwrap(), 1.0);
    }

    #[test]
    fn stump_erm_all_positive_gives_constant() {
        let s = set(&[(&[1.0, 5.0], Sign::Pos, 1.0), (&[3.0, 2.0], Sign::Pos, 2.0)]);
        let h = stump_erm(&s).unwrap();
        assert_eq!(h, BaseHypothesis::constant(Sign::Pos));
    }

    #[test]
    fn stump_erm_prefers_lower_feature_on_ties() {
        let s = set(&[(&[0.0, 0.0], Sign::Neg, 1.0), (&[1.0, 1.0], Sign::Pos, 1.0)]);
        assert_eq!(stump_erm(&s).unwrap(), BaseHypothesis::stump(0, 0.5, Sign::Pos));
    }

    #[test]
    fn stump_erm_zero_weight_errors() {
        let s = set(&[(&[0.0], Sign::Pos, 0.0)]);
        assert!(stump_erm(&s).is_err());
        assert!(parity_erm(&s, 1).is_err());
    }

    #[test]
    fn parity_xor() {
        let pts = [[-1.0, -1.0], [-1.0, 1.0], [1.0, -1.0], [1.0, 1.0]];
        let rows: Vec<(&[f64], Sign, f64)> = pts.iter().map(|p| (&p[..], Sign::of(p[0] * p[1]), 1.0)).collect();
        let s = set(&rows);
        let h = parity_erm(&s, 2).unwrap();
        assert_eq!(h, BaseHypothesis::parity(vec![0, 1], Sign::Pos));
        assert_eq!(empirical_correlation(&h, &s).unwrap(), 1.0);
        // Degree 1 cannot see the XOR.
        let h1 = parity_erm(&s, 1).unwrap();
        assert_eq!(empirical_correlation(&h1, &s).unwrap(), 0.0);
    }

    #[test]
    fn parity_degree_zero_on_balanced_labels() {
        let s = set(&[(&[1.0], Sign::Pos, 1.0), (&[-1.0], Sign::Neg, 1.0)]);
        let h = parity_erm(&s, 0).unwrap();
        assert_eq!(h, BaseHypothesis::constant(Sign::Pos));
        assert_eq!(empirical_correlation(&h, &s).unwrap(), 0.0);
    }

    #[test]
    fn parity_rejects_non_boolean_and_budget() {
        let s = set(&[(&[0.5], Sign::Pos, 1.0)]);
        assert!(matches!(
            parity_erm(&s, 1),
            Err(Error::NonBooleanFeature { row: 0, feature: 0, .. })
        ));
        let wide = set(&[(&vec![1.0; 30], Sign::Pos, 1.0)]);
        assert!(matches!(
            parity_erm_capped(&wide, 3, 1000),
            Err(Error::ParityBudgetExceeded {
                candidates: 4526,
                cap: 1000
            })
        ));
    }

    #[test]
    fn candidate_count() {
        assert_eq!(parity_candidates(4, 2), 1 + 4 + 6);
        assert_eq!(parity_candidates(3, 5), 8);
        assert_eq!(parity_candidates(10, 0), 1);
    }

    #[test]
    fn dispatch() {
        let s = set(&[(&[1.0, -1.0], Sign::Pos, 1.0), (&[-1.0, -1.0], Sign::Neg, 1.0)]);
        assert_eq!(
            weak_learn(&WeakLearnerSpec::stumps(), &s).unwrap(),
            stump_erm(&s).unwrap()
        );
        assert_eq!(
            weak_learn(&WeakLearnerSpec::parities(2), &s).unwrap(),
            parity_erm(&s, 2).unwrap()
        );
    }

    #[test]
    fn spec_json() {
        let spec: WeakLearnerSpec = serde_json::from_str(r#"{"kind":"parity_erm","degree":2}"#).unwrap();
        assert_eq!(spec, WeakLearnerSpec::parities(2));
        let spec: WeakLearnerSpec = serde_json::from_str(r#"{"kind":"stump_erm","gamma":0.5}"#).unwrap();
        assert_eq!(spec.gamma, 0.5);
        assert!(WeakLearnerSpec {
            gamma: 0.0,
            ..WeakLearnerSpec::stumps()
        }
        .validate()
        .is_err());
    }
}
