//! Per-round resampling distributions handed to the weak learner.
//!
//! Every builder produces a [`WeightedLabeledSet`] whose weights sum to one.
//! In fractional mode the set is the exact distribution: each pseudo-labeled
//! point appears once per label with its probability as weight. In Monte
//! Carlo mode it holds `m` independent draws of weight `1/m` each.
//!
//! Only labels are changed; the feature marginal of every output is a
//! mixture of the input pools.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng as _;
use rand_distr::Geometric;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::Ensemble;
use crate::potential::{mada_keep_weight, Margin, PotentialKind};
use crate::rng::Rng;
use crate::sample::WeightedLabeledSet;
use crate::sign::Sign;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RelabelMode {
    MonteCarlo { m: usize },
    Fractional,
}

impl RelabelMode {
    pub fn validate(self) -> Result<()> {
        match self {
            RelabelMode::MonteCarlo { m: 0 } => Err(Error::config("mode.m", "must be >= 1")),
            _ => Ok(()),
        }
    }
}

/// How labeled and pseudo-labeled mass are split under covariate shift.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovariateMixture {
    /// Labeled mass `1/(1+C)`, pseudo-labeled mass `C/(1+C)`; the
    /// correlation of `h` is then `(E[yh] - C E[psi'(H) h]) / (1+C)`.
    #[default]
    RatioWeighted,
    /// Labeled with probability `1/C`, pseudo-labeled otherwise.
    Literal,
}

impl CovariateMixture {
    pub fn labeled_mass(self, c_x: f64) -> f64 {
        match self {
            CovariateMixture::RatioWeighted => 1.0 / (1.0 + c_x),
            CovariateMixture::Literal => 1.0 / c_x,
        }
    }
}

fn require_nonempty_labeled(labeled: &WeightedLabeledSet) -> Result<f64> {
    if labeled.is_empty() {
        return Err(Error::Empty("labeled set"));
    }
    labeled.positive_total_weight()
}

/// Mixture of the labeled set (mass `labeled_mass`) and the unlabeled points
/// pseudo-labeled `+1` with probability `(1 - psi'(H(x)))/2`.
///
/// `unlabeled_values[i]` must be `H(unlabeled[i])`.
pub fn build_mixture(
    labeled: &WeightedLabeledSet,
    labeled_mass: f64,
    unlabeled: &[Vec<f64>],
    unlabeled_values: &[f64],
    family: PotentialKind,
    mode: RelabelMode,
    rng: &mut Rng,
) -> Result<WeightedLabeledSet> {
    if !(0.0..=1.0).contains(&labeled_mass) {
        return Err(Error::config(
            "labeled_mass",
            format!("must be in [0, 1], got {labeled_mass}"),
        ));
    }
    if labeled_mass > 0.0 {
        require_nonempty_labeled(labeled)?;
    }
    if labeled_mass < 1.0 && unlabeled.is_empty() {
        return Err(Error::Empty("unlabeled set"));
    }
    if unlabeled.len() != unlabeled_values.len() {
        return Err(Error::DimensionMismatch {
            expected: unlabeled.len(),
            got: unlabeled_values.len(),
        });
    }
    mode.validate()?;
    let probs: Vec<f64> = unlabeled_values
        .iter()
        .map(|&z| family.pseudo_label_prob(z))
        .collect::<Result<_>>()?;
    let dim = labeled
        .items()
        .first()
        .map(|e| e.x.len())
        .or_else(|| unlabeled.first().map(Vec::len))
        .unwrap_or(0);

    match mode {
        RelabelMode::Fractional => {
            let mut out = WeightedLabeledSet::with_capacity(dim, labeled.len() + 2 * unlabeled.len());
            if labeled_mass > 0.0 {
                let total = labeled.total_weight();
                for e in labeled.items() {
                    out.push(e.x.clone(), e.y, labeled_mass * e.w / total)?;
                }
            }
            if labeled_mass < 1.0 {
                let each = (1.0 - labeled_mass) / unlabeled.len() as f64;
                for (x, &p) in unlabeled.iter().zip(&probs) {
                    out.push(x.clone(), Sign::Pos, each * p)?;
                    out.push(x.clone(), Sign::Neg, each * (1.0 - p))?;
                }
            }
            Ok(out)
        }
        RelabelMode::MonteCarlo { m } => {
            let picker = if labeled_mass > 0.0 {
                Some(weighted_picker(labeled)?)
            } else {
                None
            };
            let mut out = WeightedLabeledSet::with_capacity(dim, m);
            let w = 1.0 / m as f64;
            for _ in 0..m {
                if rng.random::<f64>() < labeled_mass {
                    let e = &labeled.items()[picker.as_ref().expect("labeled mass > 0").sample(rng)];
                    out.push(e.x.clone(), e.y, w)?;
                } else {
                    let i = rng.random_range(0..unlabeled.len());
                    let y = if rng.random::<f64>() < probs[i] {
                        Sign::Pos
                    } else {
                        Sign::Neg
                    };
                    out.push(unlabeled[i].clone(), y, w)?;
                }
            }
            Ok(out)
        }
    }
}

fn weighted_picker(set: &WeightedLabeledSet) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(set.items().iter().map(|e| e.w)).map_err(|_| Error::ZeroWeight(set.total_weight()))
}

fn eval_all(ensemble: &Ensemble, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
    xs.iter().map(|x| ensemble.eval(x)).collect()
}

/// Equal mixture of the labeled set and pseudo-labeled unlabeled points.
pub fn build_plain(
    ensemble: &Ensemble,
    labeled: &WeightedLabeledSet,
    unlabeled: &[Vec<f64>],
    family: PotentialKind,
    mode: RelabelMode,
    rng: &mut Rng,
) -> Result<WeightedLabeledSet> {
    if !family.label_free_split() {
        return Err(Error::UnsupportedFamily(family));
    }
    require_nonempty_labeled(labeled)?;
    if unlabeled.is_empty() {
        return Err(Error::Empty("unlabeled set"));
    }
    let values = eval_all(ensemble, unlabeled)?;
    build_mixture(labeled, 0.5, unlabeled, &values, family, mode, rng)
}

/// Like [`build_plain`] with the unlabeled pool drawn from a shifted
/// distribution whose density ratio is bounded by `c_x`.
#[allow(clippy::too_many_arguments)]
pub fn build_covariate(
    ensemble: &Ensemble,
    labeled: &WeightedLabeledSet,
    unlabeled_from_q: &[Vec<f64>],
    c_x: f64,
    mixture: CovariateMixture,
    family: PotentialKind,
    mode: RelabelMode,
    rng: &mut Rng,
) -> Result<WeightedLabeledSet> {
    if !(c_x >= 1.0) || !c_x.is_finite() {
        return Err(Error::config("c_x", format!("must be >= 1, got {c_x}")));
    }
    if !family.label_free_split() {
        return Err(Error::UnsupportedFamily(family));
    }
    require_nonempty_labeled(labeled)?;
    let labeled_mass = mixture.labeled_mass(c_x);
    if labeled_mass < 1.0 && unlabeled_from_q.is_empty() {
        return Err(Error::Empty("unlabeled set"));
    }
    let values = eval_all(ensemble, unlabeled_from_q)?;
    build_mixture(labeled, labeled_mass, unlabeled_from_q, &values, family, mode, rng)
}

/// Madaboost relabeling of a fresh labeled batch: keep `y` with probability
/// `w = mada_keep_weight(H(x), y)`, otherwise a uniform random label.
pub fn build_pab(
    ensemble: &Ensemble,
    fresh_labeled: &WeightedLabeledSet,
    mode: RelabelMode,
    rng: &mut Rng,
) -> Result<WeightedLabeledSet> {
    let total = require_nonempty_labeled(fresh_labeled)?;
    mode.validate()?;
    let keep: Vec<f64> = fresh_labeled
        .items()
        .iter()
        .map(|e| Ok(mada_keep_weight(Margin::new(ensemble.eval(&e.x)?, e.y))))
        .collect::<Result<_>>()?;
    let dim = fresh_labeled.dim();
    match mode {
        RelabelMode::Fractional => {
            let mut out = WeightedLabeledSet::with_capacity(dim, 2 * fresh_labeled.len());
            for (e, &w) in fresh_labeled.items().iter().zip(&keep) {
                let base = e.w / total;
                out.push(e.x.clone(), e.y, base * (1.0 + w) / 2.0)?;
                out.push(e.x.clone(), -e.y, base * (1.0 - w) / 2.0)?;
            }
            Ok(out)
        }
        RelabelMode::MonteCarlo { m } => {
            let picker = weighted_picker(fresh_labeled)?;
            let mut out = WeightedLabeledSet::with_capacity(dim, m);
            for _ in 0..m {
                let i = picker.sample(rng);
                let e = &fresh_labeled.items()[i];
                let y = if rng.random::<f64>() < keep[i] {
                    e.y
                } else if rng.random::<bool>() {
                    Sign::Pos
                } else {
                    Sign::Neg
                };
                out.push(e.x.clone(), y, 1.0 / m as f64)?;
            }
            Ok(out)
        }
    }
}

/// Unclamped probability of pseudo-label `+1` for a point of a reused pool:
///
/// `1/2 - sigma psi'(H_prev) / (2(eta+sigma)) - eta psi''(H_prev + eta' h) h / (2(eta+sigma))`
///
/// where `H_prev` is the ensemble before the pool's round and `h` the step
/// taken in that round.
pub fn reuse_label_prob(
    family: PotentialKind,
    sigma: f64,
    eta: f64,
    prev_value: f64,
    step: f64,
    eta_prime: f64,
) -> Result<f64> {
    let denom = 2.0 * (eta + sigma);
    Ok(0.5
        - sigma * family.psi_prime(prev_value)? / denom
        - eta * family.psi_second(prev_value + eta_prime * step)? * step / denom)
}

#[derive(Clone, Debug)]
struct ReusePool {
    features: Vec<Vec<f64>>,
    /// `H_{s-1}(x)` for pool `s`.
    prev_value: Vec<f64>,
    /// `h_{s-1}(x) = (H_s(x) - H_{s-1}(x)) / eta`.
    step: Vec<f64>,
}

/// History for the recursive unlabeled-reuse distribution: one pool per
/// past round plus the ensemble values needed to relabel it.
#[derive(Clone, Debug)]
pub struct ReuseState {
    round: usize,
    pools: Vec<ReusePool>,
    sigma: f64,
    eta: f64,
    family: PotentialKind,
    clamp_events: usize,
    last_clamps: usize,
}

impl ReuseState {
    pub fn new(sigma: f64, eta: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma <= 1.0) {
            return Err(Error::config("sigma", format!("must be in (0, 1], got {sigma}")));
        }
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::config("eta", format!("must be > 0, got {eta}")));
        }
        Ok(ReuseState {
            round: 0,
            pools: Vec::new(),
            sigma,
            eta,
            family: PotentialKind::PseudoHuber,
            clamp_events: 0,
            last_clamps: 0,
        })
    }

    /// Index of the last distribution built (0 before the first round).
    pub fn round(&self) -> usize {
        self.round
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Total number of draws whose probability had to be clamped to [0, 1].
    pub fn clamp_events(&self) -> usize {
        self.clamp_events
    }

    /// Clamped draws in the most recent round.
    pub fn last_clamps(&self) -> usize {
        self.last_clamps
    }

    /// Builds the round `t = round() + 1` distribution. `ensemble` must hold
    /// exactly `t - 1` terms, i.e. evaluate to `H_t`.
    #[allow(clippy::too_many_arguments)]
    pub fn advance(
        &mut self,
        ensemble: &Ensemble,
        new_pool: &[Vec<f64>],
        labeled: &WeightedLabeledSet,
        labeled_mass: f64,
        family: PotentialKind,
        mode: RelabelMode,
        rng: &mut Rng,
    ) -> Result<WeightedLabeledSet> {
        if family != PotentialKind::PseudoHuber {
            return Err(Error::UnsupportedFamily(family));
        }
        let m = match mode {
            RelabelMode::MonteCarlo { m } if m > 0 => m,
            RelabelMode::MonteCarlo { .. } => return Err(Error::config("mode.m", "must be >= 1")),
            RelabelMode::Fractional => return Err(Error::ModeUnsupported("fractional (reuse needs sampling)")),
        };
        if new_pool.is_empty() {
            return Err(Error::Empty("unlabeled pool"));
        }
        if !(0.0..1.0).contains(&labeled_mass) {
            return Err(Error::config(
                "labeled_mix_weight",
                format!("must be in [0, 1), got {labeled_mass}"),
            ));
        }
        let t = self.round + 1;
        if ensemble.len() != t - 1 {
            return Err(Error::config(
                "reuse_state",
                format!(
                    "round {t} needs an ensemble with {} terms, got {}",
                    t - 1,
                    ensemble.len()
                ),
            ));
        }
        let picker = if labeled_mass > 0.0 {
            require_nonempty_labeled(labeled)?;
            Some(weighted_picker(labeled)?)
        } else {
            None
        };

        let mut prev_value = Vec::with_capacity(new_pool.len());
        let mut step = Vec::with_capacity(new_pool.len());
        for x in new_pool {
            let p = ensemble.eval_prefixes(x)?;
            if t >= 2 {
                prev_value.push(p[t - 2]);
                step.push((p[t - 1] - p[t - 2]) / self.eta);
            } else {
                prev_value.push(0.0);
                step.push(0.0);
            }
        }
        self.pools.push(ReusePool {
            features: new_pool.to_vec(),
            prev_value,
            step,
        });
        self.round = t;
        self.family = family;

        let geometric = Geometric::new(self.sigma).map_err(|e| Error::config("sigma", e.to_string()))?;
        let dim = new_pool[0].len();
        let mut out = WeightedLabeledSet::with_capacity(dim, m);
        let w = 1.0 / m as f64;
        let mut clamps = 0;
        for _ in 0..m {
            if rng.random::<f64>() < labeled_mass {
                let e = &labeled.items()[picker.as_ref().expect("labeled mass > 0").sample(rng)];
                out.push(e.x.clone(), e.y, w)?;
                continue;
            }
            let back = geometric.sample(rng);
            let s = (t as u64).saturating_sub(back).max(1) as usize;
            let (x, y, clamped) = self.draw_from_pool(s, rng)?;
            clamps += usize::from(clamped);
            out.push(x, y, w)?;
        }
        self.last_clamps = clamps;
        self.clamp_events += clamps;
        Ok(out)
    }

    /// One pseudo-labeled draw from pool `s` (1-based). Pool 1 is the base
    /// case with uniform labels.
    fn draw_from_pool(&self, s: usize, rng: &mut Rng) -> Result<(Vec<f64>, Sign, bool)> {
        let pool = &self.pools[s - 1];
        let i = rng.random_range(0..pool.features.len());
        if s == 1 {
            let y = if rng.random::<bool>() { Sign::Pos } else { Sign::Neg };
            return Ok((pool.features[i].clone(), y, false));
        }
        let eta_prime = rng.random::<f64>() * self.eta;
        let p = reuse_label_prob(
            self.family,
            self.sigma,
            self.eta,
            pool.prev_value[i],
            pool.step[i],
            eta_prime,
        )?;
        let clamped = !(0.0..=1.0).contains(&p);
        let p = p.clamp(0.0, 1.0);
        let y = if rng.random::<f64>() < p { Sign::Pos } else { Sign::Neg };
        Ok((pool.features[i].clone(), y, clamped))
    }
}

/// Functional form of [`ReuseState::advance`].
#[allow(clippy::too_many_arguments)]
pub fn build_reuse(
    mut state: ReuseState,
    ensemble: &Ensemble,
    new_pool: &[Vec<f64>],
    labeled: &WeightedLabeledSet,
    labeled_mass: f64,
    family: PotentialKind,
    mode: RelabelMode,
    rng: &mut Rng,
) -> Result<(WeightedLabeledSet, ReuseState)> {
    let set = state.advance(ensemble, new_pool, labeled, labeled_mass, family, mode, rng)?;
    Ok((set, state))
}
