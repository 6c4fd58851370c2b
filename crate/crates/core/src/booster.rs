//! Boosting loops, theory schedules and holdout post-selection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::{Ensemble, Term};
use crate::potential::{potential_from_values, PotentialKind};
use crate::relabel::{build_mixture, build_pab, CovariateMixture, RelabelMode, ReuseState};
use crate::rng::{stream_rng, Stream};
use crate::sample::WeightedLabeledSet;
use crate::sign::Sign;
use crate::weak_learners::{empirical_correlation, weak_learn, WeakLearnerSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Plain,
    Reuse,
    Covariate,
    Pab,
}

impl Variant {
    pub fn default_potential(self) -> PotentialKind {
        match self {
            Variant::Plain | Variant::Covariate => PotentialKind::Huber,
            Variant::Reuse => PotentialKind::PseudoHuber,
            Variant::Pab => PotentialKind::Madaboost,
        }
    }
}

fn default_gamma() -> f64 {
    1.0
}

fn default_c_x() -> f64 {
    1.0
}

fn default_pab_batch() -> usize {
    100
}

/// Parameters of a single boosting run.
///
/// `labeled_budget` (S) caps the labeled set used every round; `None` uses
/// the whole pool. `unlabeled_batch` (U) draws a fresh unlabeled batch per
/// round; `None` reuses the whole unlabeled pool every round.
/// `holdout_budget` (S0) caps the post-selection set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoostConfig {
    pub variant: Variant,
    pub eta: f64,
    pub rounds: usize,
    #[serde(default)]
    pub tau: f64,
    #[serde(default)]
    pub labeled_budget: Option<usize>,
    #[serde(default)]
    pub unlabeled_batch: Option<usize>,
    #[serde(default)]
    pub holdout_budget: Option<usize>,
    /// Fresh labeled examples per round for the PAB baseline.
    #[serde(default = "default_pab_batch")]
    pub pab_batch: usize,
    /// Reuse probability parameter; defaults to `eta / gamma`.
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default = "default_c_x")]
    pub c_x: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub potential: Option<PotentialKind>,
    #[serde(default = "default_mode")]
    pub mode: RelabelMode,
    /// Labeled mass in the reuse variant's mixture; defaults to 1/3.
    #[serde(default)]
    pub labeled_mix_weight: Option<f64>,
    #[serde(default)]
    pub covariate_mixture: CovariateMixture,
    #[serde(default)]
    pub master_seed: u64,
    /// PAB only: stop early instead of failing when fresh labels run out.
    #[serde(default)]
    pub truncate_on_exhaustion: bool,
}

fn default_mode() -> RelabelMode {
    RelabelMode::Fractional
}

pub const DEFAULT_LABELED_MIX_WEIGHT: f64 = 1.0 / 3.0;

impl BoostConfig {
    /// A config with every optional field at its default.
    pub fn new(variant: Variant, eta: f64, rounds: usize) -> Self {
        BoostConfig {
            variant,
            eta,
            rounds,
            tau: 0.0,
            labeled_budget: None,
            unlabeled_batch: None,
            holdout_budget: None,
            pab_batch: default_pab_batch(),
            sigma: None,
            c_x: 1.0,
            gamma: 1.0,
            potential: None,
            mode: RelabelMode::Fractional,
            labeled_mix_weight: None,
            covariate_mixture: CovariateMixture::default(),
            master_seed: 0,
            truncate_on_exhaustion: false,
        }
    }

    pub fn potential(&self) -> PotentialKind {
        self.potential.unwrap_or(self.variant.default_potential())
    }

    pub fn sigma(&self) -> f64 {
        self.sigma.unwrap_or(self.eta / self.gamma)
    }

    pub fn labeled_mix_weight(&self) -> f64 {
        self.labeled_mix_weight.unwrap_or(DEFAULT_LABELED_MIX_WEIGHT)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, reason: String| Err(Error::config(format!("boost.{field}"), reason));
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return bad("eta", format!("must be finite and > 0, got {}", self.eta));
        }
        if self.rounds == 0 {
            return bad("rounds", "must be >= 1".into());
        }
        if !(self.tau >= 0.0) {
            return bad("tau", format!("must be >= 0, got {}", self.tau));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma", format!("must be in (0, 1], got {}", self.gamma));
        }
        if !(self.c_x >= 1.0 && self.c_x.is_finite()) {
            return bad("c_x", format!("must be >= 1, got {}", self.c_x));
        }
        let sigma = self.sigma();
        if !(sigma > 0.0 && sigma <= 1.0) {
            return bad("sigma", format!("must be in (0, 1], got {sigma}"));
        }
        let w = self.labeled_mix_weight();
        if !(w > 0.0 && w < 1.0) {
            return bad("labeled_mix_weight", format!("must be in (0, 1), got {w}"));
        }
        if let RelabelMode::MonteCarlo { m: 0 } = self.mode {
            return bad("mode.m", "must be >= 1".into());
        }
        if matches!(self.labeled_budget, Some(0)) {
            return bad("labeled_budget", "must be >= 1".into());
        }
        if matches!(self.unlabeled_batch, Some(0)) {
            return bad("unlabeled_batch", "must be >= 1".into());
        }
        if matches!(self.holdout_budget, Some(0)) {
            return bad("holdout_budget", "must be >= 1".into());
        }
        let potential = self.potential();
        match self.variant {
            Variant::Reuse => {
                if potential != PotentialKind::PseudoHuber {
                    return bad("potential", "the reuse variant requires pseudo_huber".into());
                }
                if !matches!(self.mode, RelabelMode::MonteCarlo { .. }) {
                    return bad("mode", "the reuse variant requires monte_carlo".into());
                }
            }
            Variant::Plain | Variant::Covariate => {
                if !potential.label_free_split() {
                    return bad("potential", format!("{potential:?} has no label-free split"));
                }
            }
            Variant::Pab => {
                if potential != PotentialKind::Madaboost {
                    return bad("potential", "the pab variant requires madaboost".into());
                }
                if self.pab_batch == 0 {
                    return bad("pab_batch", "must be >= 1".into());
                }
            }
        }
        Ok(())
    }
}

/// Per-parameter multipliers applied to a theory schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConstants {
    pub rounds: f64,
    pub eta: f64,
    pub tau: f64,
    pub labeled: f64,
    pub unlabeled: f64,
    pub holdout: f64,
    pub sigma: f64,
}

impl Default for ScheduleConstants {
    fn default() -> Self {
        ScheduleConstants {
            rounds: 1.0,
            eta: 1.0,
            tau: 1.0,
            labeled: 1.0,
            unlabeled: 1.0,
            holdout: 1.0,
            sigma: 1.0,
        }
    }
}

/// Target tolerances and class complexity from which a schedule is derived.
/// `complexity` is the VC dimension of the base class, or `log |B|` for the
/// reuse variant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryInputs {
    pub epsilon: f64,
    pub delta: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    pub complexity: f64,
    #[serde(default = "default_c_x")]
    pub c_x: f64,
    #[serde(default)]
    pub constants: ScheduleConstants,
    #[serde(default)]
    pub reuse_preset: ReusePreset,
    #[serde(default)]
    pub master_seed: u64,
}

/// The two guarantees available for the reuse variant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReusePreset {
    /// `T = 2 log|B| / (g e)^2`, `eta = g^2 e / log|B|`, `U = 1/(g e)`.
    #[default]
    FewerUnlabeled,
    /// `T = 2 / (g e)^2`, `eta = g^2 e`, `U = log|B|/(g e) + log|B|^3 / g`.
    FewerCalls,
}

impl TheoryInputs {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if !open_unit(self.epsilon) {
            return Err(Error::config(
                "theory.epsilon",
                format!("must be in (0, 1), got {}", self.epsilon),
            ));
        }
        if !open_unit(self.delta) {
            return Err(Error::config(
                "theory.delta",
                format!("must be in (0, 1), got {}", self.delta),
            ));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::config(
                "theory.gamma",
                format!("must be in (0, 1], got {}", self.gamma),
            ));
        }
        if !(self.complexity > 0.0 && self.complexity.is_finite()) {
            return Err(Error::config(
                "theory.complexity",
                format!("must be > 0, got {}", self.complexity),
            ));
        }
        if !(self.c_x >= 1.0 && self.c_x.is_finite()) {
            return Err(Error::config("theory.c_x", format!("must be >= 1, got {}", self.c_x)));
        }
        Ok(())
    }
}

fn ceil_count(v: f64) -> usize {
    // Absorb rounding noise such as 2 / 0.1^2 = 199.99999999999997.
    (v - 1e-9).ceil().max(1.0) as usize
}

/// Fills a [`BoostConfig`] from the theoretical schedule of `variant`.
///
/// | variant   | T             | eta              | tau            | U                   |
/// |-----------|---------------|------------------|----------------|---------------------|
/// | plain     | 2/(g e)^2     | g^2 e            | g e            | VC/(g e)^2          |
/// | reuse     | 2 log|B|/(g e)^2 | g^2 e / log|B| | g e          | 1/(g e)             |
/// | covariate | 2C/(g e)^2    | g^2 e / C        | 2 g e / (1+C)  | C VC/(g e)^2        |
///
/// S = VC/(g e)^2 and S0 = 1/e^2 throughout; sigma = eta/g for reuse. The
/// reuse row is the default [`ReusePreset`]; the other preset trades
/// unlabeled samples for fewer rounds.
/// Monte Carlo mode draws `m = S` examples per round. The PAB baseline has
/// no schedule.
pub fn theory_params(inp: &TheoryInputs, variant: Variant) -> Result<BoostConfig> {
    inp.validate()?;
    let TheoryInputs {
        epsilon: e,
        gamma: g,
        complexity,
        c_x,
        constants: k,
        ..
    } = *inp;
    let ge2 = (g * e) * (g * e);
    let (rounds, eta, tau, unlabeled) = match variant {
        Variant::Plain => (2.0 / ge2, g * g * e, g * e, complexity / ge2),
        Variant::Reuse => match inp.reuse_preset {
            ReusePreset::FewerUnlabeled => (2.0 * complexity / ge2, g * g * e / complexity, g * e, 1.0 / (g * e)),
            ReusePreset::FewerCalls => (
                2.0 / ge2,
                g * g * e,
                g * e,
                complexity / (g * e) + complexity.powi(3) / g,
            ),
        },
        Variant::Covariate => (
            2.0 * c_x / ge2,
            g * g * e / c_x,
            2.0 * g * e / (1.0 + c_x),
            c_x * complexity / ge2,
        ),
        Variant::Pab => {
            return Err(Error::config("variant", "the pab baseline has no theory schedule"));
        }
    };
    let labeled = ceil_count(k.labeled * complexity / ge2);
    let mut cfg = BoostConfig::new(variant, k.eta * eta, ceil_count(k.rounds * rounds));
    cfg.tau = k.tau * tau;
    cfg.gamma = g;
    cfg.c_x = c_x;
    cfg.labeled_budget = Some(labeled);
    cfg.unlabeled_batch = Some(ceil_count(k.unlabeled * unlabeled));
    cfg.holdout_budget = Some(ceil_count(k.holdout / (e * e)));
    cfg.mode = RelabelMode::MonteCarlo { m: labeled };
    cfg.master_seed = inp.master_seed;
    if variant == Variant::Reuse {
        cfg.sigma = Some((k.sigma * cfg.eta / g).min(1.0));
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `H += (eta/gamma) W`.
    AWeak,
    /// `H -= eta sign(H)`.
    BDescent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub branch: Branch,
    pub weak_correlation: f64,
    pub tau: f64,
    pub clamp_count: usize,
    /// Split empirical potential of `H_t` on this round's samples.
    pub potential_before: f64,
    /// The same estimator evaluated at `H_{t+1}`.
    pub potential_after: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: BoostConfig,
    pub learner: WeakLearnerSpec,
    pub records: Vec<RoundRecord>,
    /// 1-based index of the selected prefix `H_s`.
    pub selected_round: usize,
    /// Holdout correlation of `sign(H_t)` for every prefix `t = 1..=T+1`.
    pub holdout_correlations: Vec<f64>,
    pub train_accuracy: f64,
    pub holdout_accuracy: f64,
    pub labeled_used: usize,
    pub unlabeled_used: usize,
    pub holdout_used: usize,
    pub clamp_events: usize,
    /// True when the PAB baseline ran out of fresh labels before `rounds`.
    pub truncated: bool,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn branch_counts(&self) -> (usize, usize) {
        let a = self.records.iter().filter(|r| r.branch == Branch::AWeak).count();
        (a, self.records.len() - a)
    }
}

/// Weighted fraction of `set` that `sign(H)` labels correctly.
pub fn weighted_accuracy(ensemble: &Ensemble, set: &WeightedLabeledSet) -> Result<f64> {
    let total = set.positive_total_weight()?;
    let mut hit = 0.0;
    for e in set.items() {
        if ensemble.predict(&e.x)? == e.y {
            hit += e.w;
        }
    }
    Ok(hit / total)
}

/// Holdout correlation of every prefix classifier `sign(H_t)`, `t = 1..=len+1`.
pub fn prefix_correlations(ensemble: &Ensemble, holdout: &WeightedLabeledSet) -> Result<Vec<f64>> {
    if holdout.is_empty() {
        return Err(Error::Empty("holdout set"));
    }
    let total = holdout.positive_total_weight()?;
    let mut acc = vec![0.0; ensemble.num_prefixes()];
    for e in holdout.items() {
        let values = ensemble.eval_prefixes(&e.x)?;
        for (a, v) in acc.iter_mut().zip(values) {
            *a += e.w * e.y.value() * Sign::of(v).value();
        }
    }
    Ok(acc.into_iter().map(|a| a / total).collect())
}

/// The prefix `sign(H_s)` with the largest holdout correlation, ties to the
/// smallest `s`. Returns `s` (1-based) and the truncated ensemble `H_s`.
pub fn post_select(ensemble: &Ensemble, holdout: &WeightedLabeledSet) -> Result<(usize, Ensemble)> {
    let corrs = prefix_correlations(ensemble, holdout)?;
    let (best, _) = argmax_first(&corrs);
    Ok((best + 1, ensemble.truncated(best)))
}

fn argmax_first(v: &[f64]) -> (usize, f64) {
    let mut best = (0, v[0]);
    for (i, &c) in v.iter().enumerate().skip(1) {
        if c > best.1 {
            best = (i, c);
        }
    }
    best
}

fn take_prefix(set: &WeightedLabeledSet, n: usize) -> Result<WeightedLabeledSet> {
    if n > set.len() {
        return Err(Error::BudgetExhausted {
            round: 0,
            needed: n,
            available: set.len(),
        });
    }
    WeightedLabeledSet::from_items(set.items()[..n].to_vec())
}

/// Where each round's unlabeled points come from.
enum UnlabeledSource<'a> {
    /// The whole pool every round, with cached ensemble values.
    Whole { pool: &'a [Vec<f64>], values: Vec<f64> },
    /// Consecutive fresh batches of `batch` points.
    Fresh { pool: &'a [Vec<f64>], batch: usize },
}

/// Runs `cfg.rounds` boosting rounds and post-selects a prefix on `holdout`.
///
/// `labeled` is the labeled pool (the fresh-sample pool for PAB),
/// `unlabeled` the unlabeled feature pool (drawn from the shifted
/// distribution for the covariate variant). The holdout set is only read by
/// post-selection.
pub fn boost(
    cfg: &BoostConfig,
    labeled: &WeightedLabeledSet,
    unlabeled: &[Vec<f64>],
    holdout: &WeightedLabeledSet,
    learner: &WeakLearnerSpec,
) -> Result<(Ensemble, RunReport)> {
    cfg.validate()?;
    learner.validate()?;
    if labeled.is_empty() {
        return Err(Error::Empty("labeled pool"));
    }
    if holdout.is_empty() {
        return Err(Error::Empty("holdout set"));
    }
    let holdout = match cfg.holdout_budget {
        Some(n) => take_prefix(holdout, n)?,
        None => holdout.clone(),
    };

    let mut run = Run::new(cfg, learner, labeled, unlabeled)?;
    for t in 1..=cfg.rounds {
        if !run.round(t)? {
            break;
        }
    }
    run.finish(&holdout)
}

struct Run<'a> {
    cfg: &'a BoostConfig,
    learner: &'a WeakLearnerSpec,
    family: PotentialKind,
    ensemble: Ensemble,
    records: Vec<RoundRecord>,
    warnings: Vec<String>,
    /// D-hat for plain/covariate/reuse; the consumed batches for PAB.
    train: WeightedLabeledSet,
    train_values: Vec<f64>,
    pab_pool: &'a WeightedLabeledSet,
    pab_cursor: usize,
    unlabeled: Option<UnlabeledSource<'a>>,
    unlabeled_used: usize,
    reuse: Option<ReuseState>,
    truncated: bool,
}

impl<'a> Run<'a> {
    fn new(
        cfg: &'a BoostConfig,
        learner: &'a WeakLearnerSpec,
        labeled: &'a WeightedLabeledSet,
        unlabeled: &'a [Vec<f64>],
    ) -> Result<Self> {
        let family = cfg.potential();
        let mut warnings = Vec::new();
        let (train, source) = if cfg.variant == Variant::Pab {
            (WeightedLabeledSet::new(labeled.dim()), None)
        } else {
            let train = match cfg.labeled_budget {
                Some(n) => take_prefix(labeled, n)?,
                None => labeled.clone(),
            };
            let source = if unlabeled.is_empty() {
                if cfg.variant != Variant::Plain {
                    return Err(Error::Empty("unlabeled pool"));
                }
                let msg = "unlabeled pool is empty; plain variant runs on labeled data only".to_string();
                log::warn!("{msg}");
                warnings.push(msg);
                None
            } else {
                Some(match cfg.unlabeled_batch {
                    None => UnlabeledSource::Whole {
                        pool: unlabeled,
                        values: vec![0.0; unlabeled.len()],
                    },
                    Some(batch) => {
                        let needed = batch * cfg.rounds;
                        if needed > unlabeled.len() {
                            return Err(Error::BudgetExhausted {
                                round: 0,
                                needed,
                                available: unlabeled.len(),
                            });
                        }
                        UnlabeledSource::Fresh { pool: unlabeled, batch }
                    }
                })
            };
            (train, source)
        };
        let reuse = if cfg.variant == Variant::Reuse {
            Some(ReuseState::new(cfg.sigma(), cfg.eta)?)
        } else {
            None
        };
        Ok(Run {
            cfg,
            learner,
            family,
            ensemble: Ensemble::new(),
            records: Vec::with_capacity(cfg.rounds),
            warnings,
            train_values: vec![0.0; train.len()],
            train,
            pab_pool: labeled,
            pab_cursor: 0,
            unlabeled: source,
            unlabeled_used: 0,
            reuse,
            truncated: false,
        })
    }

    /// The unlabeled points of round `t` with their current ensemble values.
    fn unlabeled_round(&self, t: usize) -> (&'a [Vec<f64>], Vec<f64>) {
        match &self.unlabeled {
            None => (&[], Vec::new()),
            Some(UnlabeledSource::Whole { pool, values }) => (pool, values.clone()),
            Some(UnlabeledSource::Fresh { pool, batch }) => {
                let xs = &pool[(t - 1) * batch..t * batch];
                let values = xs.iter().map(|x| self.ensemble.eval_unchecked(x)).collect();
                (xs, values)
            }
        }
    }

    /// Runs round `t`. Returns false when PAB ran out of fresh labels.
    fn round(&mut self, t: usize) -> Result<bool> {
        let cfg = self.cfg;
        let mut rng = stream_rng(cfg.master_seed, Stream::Relabel, t as u64);
        let mut clamp_count = 0;

        // Build D_t together with the samples the potential is measured on.
        let (dist, pot_labeled, pot_unlabeled): (WeightedLabeledSet, WeightedLabeledSet, &[Vec<f64>]) =
            match cfg.variant {
                Variant::Pab => {
                    let available = self.pab_pool.len() - self.pab_cursor;
                    if available == 0 || (available < cfg.pab_batch && !cfg.truncate_on_exhaustion) {
                        if cfg.truncate_on_exhaustion {
                            self.truncated = true;
                            let msg = format!("fresh labeled samples exhausted after {} rounds", t - 1);
                            log::warn!("{msg}");
                            self.warnings.push(msg);
                            return Ok(false);
                        }
                        return Err(Error::BudgetExhausted {
                            round: t,
                            needed: cfg.pab_batch,
                            available,
                        });
                    }
                    let take = cfg.pab_batch.min(available);
                    let batch = WeightedLabeledSet::from_items(
                        self.pab_pool.items()[self.pab_cursor..self.pab_cursor + take].to_vec(),
                    )?;
                    self.pab_cursor += take;
                    if take < cfg.pab_batch {
                        self.truncated = true;
                        let msg = format!("round {t} used a partial batch of {take} fresh labels");
                        log::warn!("{msg}");
                        self.warnings.push(msg);
                    }
                    for e in batch.items() {
                        self.train.push(e.x.clone(), e.y, e.w)?;
                        self.train_values.push(0.0);
                    }
                    let dist = build_pab(&self.ensemble, &batch, cfg.mode, &mut rng)?;
                    (dist, batch, &[])
                }
                Variant::Plain | Variant::Covariate => {
                    let (xs, values) = self.unlabeled_round(t);
                    let mass = if xs.is_empty() {
                        1.0
                    } else if cfg.variant == Variant::Plain {
                        0.5
                    } else {
                        cfg.covariate_mixture.labeled_mass(cfg.c_x)
                    };
                    let dist = build_mixture(&self.train, mass, xs, &values, self.family, cfg.mode, &mut rng)?;
                    self.unlabeled_used += if matches!(self.unlabeled, Some(UnlabeledSource::Fresh { .. })) {
                        xs.len()
                    } else {
                        0
                    };
                    (dist, self.train.clone(), xs)
                }
                Variant::Reuse => {
                    let (xs, _) = self.unlabeled_round(t);
                    if matches!(self.unlabeled, Some(UnlabeledSource::Fresh { .. })) {
                        self.unlabeled_used += xs.len();
                    }
                    let state = self.reuse.as_mut().expect("reuse state");
                    let dist = state.advance(
                        &self.ensemble,
                        xs,
                        &self.train,
                        cfg.labeled_mix_weight(),
                        self.family,
                        cfg.mode,
                        &mut rng,
                    )?;
                    clamp_count = state.last_clamps();
                    (dist, self.train.clone(), xs)
                }
            };

        let h = weak_learn(self.learner, &dist)?;
        let weak_correlation = empirical_correlation(&h, &dist)?;
        let (branch, term) = if weak_correlation > cfg.tau {
            (
                Branch::AWeak,
                Term::Weak {
                    coef: cfg.eta / cfg.gamma,
                    h,
                },
            )
        } else {
            (Branch::BDescent, Term::SignDescent { coef: cfg.eta })
        };

        let potential_before = self.potential(&pot_labeled, pot_unlabeled, &self.ensemble)?;
        self.ensemble.push(term.clone());
        self.advance_caches(&term);
        let potential_after = self.potential(&pot_labeled, pot_unlabeled, &self.ensemble)?;

        self.records.push(RoundRecord {
            round: t,
            branch,
            weak_correlation,
            tau: cfg.tau,
            clamp_count,
            potential_before,
            potential_after,
        });
        Ok(true)
    }

    fn advance_caches(&mut self, term: &Term) {
        for (v, e) in self.train_values.iter_mut().zip(self.train.items()) {
            *v += term.contribution(*v, &e.x);
        }
        if let Some(UnlabeledSource::Whole { pool, values }) = &mut self.unlabeled {
            for (v, x) in values.iter_mut().zip(pool.iter()) {
                *v += term.contribution(*v, x);
            }
        }
    }

    /// Split empirical potential on the round's samples. With no unlabeled
    /// points the labeled features stand in for the unlabeled sample.
    fn potential(&self, labeled: &WeightedLabeledSet, unlabeled: &[Vec<f64>], h: &Ensemble) -> Result<f64> {
        let lab_values: Vec<f64> = labeled.features().map(|x| h.eval_unchecked(x)).collect();
        let unl_values: Vec<f64> = if unlabeled.is_empty() {
            lab_values.clone()
        } else {
            unlabeled.iter().map(|x| h.eval_unchecked(x)).collect()
        };
        potential_from_values(self.family, &unl_values, labeled, &lab_values)
    }

    fn finish(self, holdout: &WeightedLabeledSet) -> Result<(Ensemble, RunReport)> {
        let holdout_correlations = prefix_correlations(&self.ensemble, holdout)?;
        let (best, _) = argmax_first(&holdout_correlations);
        let selected = self.ensemble.truncated(best);
        let train_accuracy = if self.train.is_empty() {
            0.0
        } else {
            weighted_accuracy(&selected, &self.train)?
        };
        let holdout_accuracy = weighted_accuracy(&selected, holdout)?;
        let unlabeled_used = match &self.unlabeled {
            Some(UnlabeledSource::Whole { pool, .. }) => pool.len(),
            _ => self.unlabeled_used,
        };
        let report = RunReport {
            config: self.cfg.clone(),
            learner: self.learner.clone(),
            records: self.records,
            selected_round: best + 1,
            holdout_correlations,
            train_accuracy,
            holdout_accuracy,
            labeled_used: self.train.len(),
            unlabeled_used,
            holdout_used: holdout.len(),
            clamp_events: self.reuse.as_ref().map_or(0, ReuseState::clamp_events),
            truncated: self.truncated,
            warnings: self.warnings,
        };
        Ok((self.ensemble, report))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::BaseHypothesis;

    fn theory(e: f64) -> TheoryInputs {
        TheoryInputs {
            epsilon: e,
            delta: 0.05,
            gamma: 1.0,
            complexity: 2.0,
            c_x: 1.0,
            constants: ScheduleConstants::default(),
            reuse_preset: ReusePreset::default(),
            master_seed: 0,
        }
    }

    #[test]
    fn plain_schedule_example() {
        let cfg = theory_params(&theory(0.1), Variant::Plain).unwrap();
        assert_eq!(cfg.rounds, 200);
        assert!((cfg.eta - 0.1).abs() < 1e-15);
        assert!((cfg.tau - 0.1).abs() < 1e-15);
        let half = theory_params(&theory(0.05), Variant::Plain).unwrap();
        assert_eq!(half.rounds, 4 * cfg.rounds);
    }

    #[test]
    fn covariate_at_unit_ratio_matches_plain_rounds() {
        let p = theory_params(&theory(0.1), Variant::Plain).unwrap();
        let c = theory_params(&theory(0.1), Variant::Covariate).unwrap();
        assert_eq!(p.rounds, c.rounds);
        assert_eq!(p.eta, c.eta);
    }

    #[test]
    fn reuse_sigma_is_eta_over_gamma() {
        let mut inp = theory(0.1);
        inp.gamma = 0.5;
        let r = theory_params(&inp, Variant::Reuse).unwrap();
        assert!((r.sigma() - r.eta / 0.5).abs() < 1e-15);
    }

    #[test]
    fn schedule_rejects_bad_tolerance_and_pab() {
        assert!(theory_params(&theory(0.0), Variant::Plain).is_err());
        assert!(theory_params(&theory(1.0), Variant::Plain).is_err());
        assert!(theory_params(&theory(0.1), Variant::Pab).is_err());
    }

    #[test]
    fn config_invariants() {
        let mut c = BoostConfig::new(Variant::Reuse, 0.1, 5);
        assert!(c.validate().is_err());
        c.mode = RelabelMode::MonteCarlo { m: 10 };
        c.validate().unwrap();
        c.potential = Some(PotentialKind::Huber);
        assert!(c.validate().is_err());

        let mut c = BoostConfig::new(Variant::Plain, 0.1, 5);
        c.potential = Some(PotentialKind::Madaboost);
        assert!(c.validate().is_err());
        let mut c = BoostConfig::new(Variant::Pab, 0.1, 5);
        c.validate().unwrap();
        c.potential = Some(PotentialKind::Huber);
        assert!(c.validate().is_err());
        let mut c = BoostConfig::new(Variant::Covariate, 0.1, 5);
        c.c_x = 0.5;
        let err = c.validate().unwrap_err();
        assert!(err.to_string().contains("boost.c_x"));
    }

    fn line(n: usize) -> (WeightedLabeledSet, Vec<Vec<f64>>) {
        let xs: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 / n as f64]).collect();
        let ys: Vec<Sign> = xs.iter().map(|x| Sign::of(x[0] - 0.5)).collect();
        (WeightedLabeledSet::uniform(&xs, &ys).unwrap(), xs)
    }

    #[test]
    fn separable_run_selects_perfect_prefix() {
        let (lab, unl) = line(40);
        let cfg = BoostConfig::new(Variant::Plain, 0.1, 3);
        let (h, rep) = boost(&cfg, &lab, &unl, &lab, &WeakLearnerSpec::stumps()).unwrap();
        assert_eq!(rep.records[0].branch, Branch::AWeak);
        assert_eq!(rep.records.len(), 3);
        assert_eq!(h.len(), 3);
        assert_eq!(rep.holdout_accuracy, 1.0);
    }

    #[test]
    fn tau_above_one_forces_descent() {
        let (lab, unl) = line(20);
        let mut cfg = BoostConfig::new(Variant::Plain, 0.1, 4);
        cfg.tau = 1.5;
        let (h, rep) = boost(&cfg, &lab, &unl, &lab, &WeakLearnerSpec::stumps()).unwrap();
        assert!(h.terms().iter().all(|t| matches!(t, Term::SignDescent { .. })));
        assert_eq!(rep.branch_counts(), (0, 4));
    }

    #[test]
    fn post_select_single_prefix_and_ties() {
        let (lab, _) = line(10);
        let (s, sel) = post_select(&Ensemble::new(), &lab).unwrap();
        assert_eq!((s, sel.len()), (1, 0));
        // Two identical perfect terms: the first perfect prefix wins.
        let mut h = Ensemble::new();
        h.push_weak(1.0, BaseHypothesis::stump(0, 0.5, Sign::Pos));
        h.push_weak(1.0, BaseHypothesis::stump(0, 0.5, Sign::Pos));
        assert_eq!(post_select(&h, &lab).unwrap().0, 2);
        assert!(post_select(&h, &WeightedLabeledSet::new(1)).is_err());
    }

    #[test]
    fn pab_budget_and_truncation() {
        let (lab, unl) = line(30);
        let mut cfg = BoostConfig::new(Variant::Pab, 0.1, 5);
        cfg.pab_batch = 10;
        assert!(matches!(
            boost(&cfg, &lab, &unl, &lab, &WeakLearnerSpec::stumps()),
            Err(Error::BudgetExhausted { round: 4, .. })
        ));
        cfg.truncate_on_exhaustion = true;
        let (h, rep) = boost(&cfg, &lab, &unl, &lab, &WeakLearnerSpec::stumps()).unwrap();
        assert_eq!(h.len(), 3);
        assert!(rep.truncated);
        assert_eq!(rep.labeled_used, 30);
    }

    #[test]
    fn fresh_unlabeled_budget_is_checked() {
        let (lab, unl) = line(10);
        let mut cfg = BoostConfig::new(Variant::Plain, 0.1, 5);
        cfg.unlabeled_batch = Some(3);
        let err = boost(&cfg, &lab, &unl, &lab, &WeakLearnerSpec::stumps()).unwrap_err();
        assert!(matches!(err, Error::BudgetExhausted { .. }));
        cfg.unlabeled_batch = Some(2);
        let (_, rep) = boost(&cfg, &lab, &unl, &lab, &WeakLearnerSpec::stumps()).unwrap();
        assert_eq!(rep.unlabeled_used, 10);
    }

    #[test]
    fn empty_unlabeled_downgrades_plain() {
        let (lab, _) = line(10);
        let cfg = BoostConfig::new(Variant::Plain, 0.1, 2);
        let (_, rep) = boost(&cfg, &lab, &[], &lab, &WeakLearnerSpec::stumps()).unwrap();
        assert_eq!(rep.warnings.len(), 1);
        let cov = BoostConfig::new(Variant::Covariate, 0.1, 2);
        assert!(boost(&cov, &lab, &[], &lab, &WeakLearnerSpec::stumps()).is_err());
    }

    #[test]
    fn runs_are_deterministic() {
        let (lab, unl) = line(30);
        for variant in [Variant::Plain, Variant::Reuse, Variant::Pab] {
            let mut cfg = BoostConfig::new(variant, 0.1, 3);
            cfg.mode = RelabelMode::MonteCarlo { m: 25 };
            cfg.pab_batch = 10;
            cfg.master_seed = 9;
            let a = boost(&cfg, &lab, &unl, &lab, &WeakLearnerSpec::stumps()).unwrap();
            let b = boost(&cfg, &lab, &unl, &lab, &WeakLearnerSpec::stumps()).unwrap();
            assert_eq!(a.0.to_json().unwrap(), b.0.to_json().unwrap());
            assert_eq!(a.1.to_json().unwrap(), b.1.to_json().unwrap());
        }
    }
}
