//! Base hypotheses and the boosted ensemble.
//!
//! An [`Ensemble`] is an ordered list of terms. The value after `k` terms is
//! the prefix `H_{k+1}`; the empty prefix `H_1` is identically zero. A
//! [`Term::SignDescent`] carries no hypothesis: at position `k` it subtracts
//! `coef * sign(H_k(x))` from the running sum, so its meaning is positional.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sign::Sign;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseHypothesis {
    /// `polarity` if `x[feature_index] >= threshold`, else `-polarity`.
    Stump {
        feature_index: usize,
        threshold: f64,
        polarity: Sign,
    },
    /// `sign * prod_{i in subset} x[i]` over {-1,+1} features.
    Parity {
        subset: Vec<usize>,
        sign: Sign,
    },
    Constant {
        value: Sign,
    },
}

impl BaseHypothesis {
    pub fn constant(value: Sign) -> Self {
        BaseHypothesis::Constant { value }
    }

    pub fn stump(feature_index: usize, threshold: f64, polarity: Sign) -> Self {
        BaseHypothesis::Stump {
            feature_index,
            threshold,
            polarity,
        }
    }

    /// Builds a parity; the subset is sorted and deduplicated.
    pub fn parity(mut subset: Vec<usize>, sign: Sign) -> Self {
        subset.sort_unstable();
        subset.dedup();
        BaseHypothesis::Parity { subset, sign }
    }

    /// Smallest feature dimension this hypothesis can be evaluated on.
    pub fn min_dimension(&self) -> usize {
        match self {
            BaseHypothesis::Stump { feature_index, .. } => feature_index + 1,
            BaseHypothesis::Parity { subset, .. } => subset.last().map_or(0, |i| i + 1),
            BaseHypothesis::Constant { .. } => 0,
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<Sign> {
        let need = self.min_dimension();
        if x.len() < need {
            return Err(Error::DimensionMismatch {
                expected: need,
                got: x.len(),
            });
        }
        Ok(self.predict_unchecked(x))
    }

    /// Evaluates without a dimension check. Panics on short input.
    #[inline]
    pub fn predict_unchecked(&self, x: &[f64]) -> Sign {
        match self {
            BaseHypothesis::Stump {
                feature_index,
                threshold,
                polarity,
            } => {
                if x[*feature_index] >= *threshold {
                    *polarity
                } else {
                    -*polarity
                }
            }
            BaseHypothesis::Parity { subset, sign } => {
                let prod: f64 = subset.iter().map(|&i| x[i]).product();
                *sign * Sign::of(prod)
            }
            BaseHypothesis::Constant { value } => *value,
        }
    }

    pub fn negated(&self) -> Self {
        match self.clone() {
            BaseHypothesis::Stump {
                feature_index,
                threshold,
                polarity,
            } => BaseHypothesis::Stump {
                feature_index,
                threshold,
                polarity: -polarity,
            },
            BaseHypothesis::Parity { subset, sign } => BaseHypothesis::Parity { subset, sign: -sign },
            BaseHypothesis::Constant { value } => BaseHypothesis::Constant { value: -value },
        }
    }
}

/// `predict_base` in free-function form.
pub fn predict_base(h: &BaseHypothesis, x: &[f64]) -> Result<Sign> {
    h.predict(x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Term {
    Weak { coef: f64, h: BaseHypothesis },
    SignDescent { coef: f64 },
}

impl Term {
    pub fn coef(&self) -> f64 {
        match self {
            Term::Weak { coef, .. } | Term::SignDescent { coef } => *coef,
        }
    }

    /// Contribution of this term given the running sum before it.
    #[inline]
    pub fn contribution(&self, running: f64, x: &[f64]) -> f64 {
        match self {
            Term::Weak { coef, h } => coef * h.predict_unchecked(x).value(),
            Term::SignDescent { coef } => -coef * Sign::of(running).value(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    terms: Vec<Term>,
}

impl Ensemble {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: Vec<Term>) -> Self {
        Ensemble { terms }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of prefixes `H_1 ..= H_{len+1}`.
    pub fn num_prefixes(&self) -> usize {
        self.terms.len() + 1
    }

    pub fn push(&mut self, term: Term) {
        self.terms.push(term);
    }

    pub fn push_weak(&mut self, coef: f64, h: BaseHypothesis) {
        self.terms.push(Term::Weak { coef, h });
    }

    pub fn push_sign_descent(&mut self, coef: f64) {
        self.terms.push(Term::SignDescent { coef });
    }

    /// The ensemble made of the first `n` terms (its final value is `H_{n+1}`).
    pub fn truncated(&self, n: usize) -> Ensemble {
        Ensemble {
            terms: self.terms[..n.min(self.terms.len())].to_vec(),
        }
    }

    /// Smallest feature dimension every term can be evaluated on.
    pub fn min_dimension(&self) -> usize {
        self.terms
            .iter()
            .map(|t| match t {
                Term::Weak { h, .. } => h.min_dimension(),
                Term::SignDescent { .. } => 0,
            })
            .max()
            .unwrap_or(0)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        let need = self.min_dimension();
        if x.len() < need {
            return Err(Error::DimensionMismatch {
                expected: need,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Value of the full ensemble, `H_{len+1}(x)`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.eval_unchecked(x))
    }

    #[inline]
    pub fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.terms.iter().fold(0.0, |acc, t| acc + t.contribution(acc, x))
    }

    /// `[H_1(x), ..., H_{len+1}(x)]` in one left-to-right pass.
    pub fn eval_prefixes(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(self.eval_prefixes_unchecked(x))
    }

    pub fn eval_prefixes_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.terms.len() + 1);
        let mut acc = 0.0;
        out.push(acc);
        for t in &self.terms {
            acc += t.contribution(acc, x);
            out.push(acc);
        }
        out
    }

    /// `sign(H_round(x))` for `1 <= round <= len + 1`.
    pub fn predict_at_round(&self, round: usize, x: &[f64]) -> Result<Sign> {
        let max = self.num_prefixes();
        if round == 0 || round > max {
            return Err(Error::RoundOutOfRange { index: round, max });
        }
        self.check_dim(x)?;
        Ok(Sign::of(self.truncated(round - 1).eval_unchecked(x)))
    }

    /// `sign(H_{len+1}(x))`.
    pub fn predict(&self, x: &[f64]) -> Result<Sign> {
        self.eval(x).map(Sign::of)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
