use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sign::Sign;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedExample {
    pub x: Vec<f64>,
    pub y: Sign,
    pub w: f64,
}

/// Examples with nonnegative weights and ±1 labels, all sharing one
/// feature dimension.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WeightedLabeledSet {
    items: Vec<WeightedExample>,
    dim: usize,
}

impl WeightedLabeledSet {
    pub fn new(dim: usize) -> Self {
        WeightedLabeledSet { items: Vec::new(), dim }
    }

    pub fn with_capacity(dim: usize, cap: usize) -> Self {
        WeightedLabeledSet {
            items: Vec::with_capacity(cap),
            dim,
        }
    }

    pub fn from_items(items: Vec<WeightedExample>) -> Result<Self> {
        let dim = items.first().map_or(0, |e| e.x.len());
        let mut set = WeightedLabeledSet::with_capacity(dim, items.len());
        for e in items {
            set.push(e.x, e.y, e.w)?;
        }
        Ok(set)
    }

    /// Unit weight on every row.
    pub fn uniform(features: &[Vec<f64>], labels: &[Sign]) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.len(),
                got: labels.len(),
            });
        }
        let dim = features.first().map_or(0, Vec::len);
        let mut set = WeightedLabeledSet::with_capacity(dim, features.len());
        for (x, &y) in features.iter().zip(labels) {
            set.push(x.clone(), y, 1.0)?;
        }
        Ok(set)
    }

    pub fn push(&mut self, x: Vec<f64>, y: Sign, w: f64) -> Result<()> {
        if self.items.is_empty() && self.dim == 0 {
            self.dim = x.len();
        }
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::config("weight", format!("must be finite and >= 0, got {w}")));
        }
        self.items.push(WeightedExample { x, y, w });
        Ok(())
    }

    pub fn items(&self) -> &[WeightedExample] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn total_weight(&self) -> f64 {
        self.items.iter().map(|e| e.w).sum()
    }

    /// Total weight, or an error when it is not strictly positive.
    pub fn positive_total_weight(&self) -> Result<f64> {
        let w = self.total_weight();
        if w > 0.0 {
            Ok(w)
        } else {
            Err(Error::ZeroWeight(w))
        }
    }

    pub fn features(&self) -> impl Iterator<Item = &[f64]> {
        self.items.iter().map(|e| e.x.as_slice())
    }

    /// A copy with every weight multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for e in &mut out.items {
            e.w *= c;
        }
        out
    }

    /// A copy whose weights sum to one.
    pub fn normalized(&self) -> Result<Self> {
        let total = self.positive_total_weight()?;
        Ok(self.scaled(1.0 / total))
    }
}
