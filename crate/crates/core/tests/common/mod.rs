//! Independent reference implementations used as test oracles. Nothing here
//! calls the library's evaluation or search code.

#![allow(dead_code)]

use agboost::{BaseHypothesis, Ensemble, PotentialKind, Sign, Term, WeightedLabeledSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sgn(z: f64) -> f64 {
    if z >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

pub fn psi_prime(kind: PotentialKind, z: f64) -> f64 {
    match kind {
        PotentialKind::Huber => z.clamp(-1.0, 1.0),
        PotentialKind::PseudoHuber => z / (1.0 + z * z).sqrt(),
        PotentialKind::Madaboost => panic!("no split"),
    }
}

pub fn predict(h: &BaseHypothesis, x: &[f64]) -> f64 {
    match h {
        BaseHypothesis::Stump {
            feature_index,
            threshold,
            polarity,
        } => {
            if x[*feature_index] >= *threshold {
                polarity.value()
            } else {
                -polarity.value()
            }
        }
        BaseHypothesis::Parity { subset, sign } => subset.iter().map(|&i| x[i]).product::<f64>() * sign.value(),
        BaseHypothesis::Constant { value } => value.value(),
    }
}

/// Left-to-right evaluation, written out independently of the library.
pub fn eval(h: &Ensemble, x: &[f64]) -> f64 {
    let mut acc = 0.0;
    for t in h.terms() {
        match t {
            Term::Weak { coef, h } => acc += coef * predict(h, x),
            Term::SignDescent { coef } => acc -= coef * sgn(acc),
        }
    }
    acc
}

/// Weight-normalized correlation of an arbitrary ±1 predictor.
pub fn corr(set: &WeightedLabeledSet, f: impl Fn(&[f64]) -> f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for e in set.items() {
        num += e.w * e.y.value() * f(&e.x);
        den += e.w;
    }
    num / den
}

pub fn corr_of(set: &WeightedLabeledSet, h: &BaseHypothesis) -> f64 {
    corr(set, |x| predict(h, x))
}

/// Every distinct stump behavior: per feature, thresholds at each midpoint
/// of sorted distinct values plus one below the minimum and one above the
/// maximum, both polarities; the two constants are included.
pub fn all_stumps(set: &WeightedLabeledSet) -> Vec<BaseHypothesis> {
    let mut out = vec![BaseHypothesis::constant(Sign::Pos), BaseHypothesis::constant(Sign::Neg)];
    for j in 0..set.dim() {
        let mut vals: Vec<f64> = set.items().iter().map(|e| e.x[j]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        let mut thr = vec![vals[0] - 1.0, vals[vals.len() - 1] + 1.0];
        for w in vals.windows(2) {
            thr.push(0.5 * (w[0] + w[1]));
        }
        for t in thr {
            for p in [Sign::Pos, Sign::Neg] {
                out.push(BaseHypothesis::stump(j, t, p));
            }
        }
    }
    out
}

pub fn best_stump_corr(set: &WeightedLabeledSet) -> f64 {
    all_stumps(set)
        .iter()
        .map(|h| corr_of(set, h))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Best parity of degree at most `d` over `n` features, enumerated by bitmask.
pub fn best_parity_corr(set: &WeightedLabeledSet, n: usize, d: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize > d {
            continue;
        }
        let c = corr(set, |x| (0..n).filter(|i| mask >> i & 1 == 1).map(|i| x[i]).product());
        best = best.max(c).max(-c);
    }
    best
}

pub fn random_sign(r: &mut ChaCha8Rng) -> Sign {
    if r.random::<bool>() {
        Sign::Pos
    } else {
        Sign::Neg
    }
}

/// Real features on a coarse grid so ties and duplicate values occur.
pub fn random_point(r: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| (r.random_range(-8..=8) as f64) * 0.25).collect()
}

pub fn random_cube_point(r: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| if r.random::<bool>() { 1.0 } else { -1.0 }).collect()
}

pub fn random_set(r: &mut ChaCha8Rng, n: usize, dim: usize) -> WeightedLabeledSet {
    let mut s = WeightedLabeledSet::new(dim);
    for _ in 0..n {
        let x = random_point(r, dim);
        let w = r.random_range(0.1..2.0);
        s.push(x, random_sign(r), w).unwrap();
    }
    s
}

pub fn random_pool(r: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| random_point(r, dim)).collect()
}

pub fn random_stump(r: &mut ChaCha8Rng, dim: usize) -> BaseHypothesis {
    BaseHypothesis::stump(
        r.random_range(0..dim),
        (r.random_range(-9..=9) as f64) * 0.25,
        random_sign(r),
    )
}

/// Mixed weak and sign-descent terms with stump bases.
pub fn random_ensemble(r: &mut ChaCha8Rng, dim: usize, terms: usize) -> Ensemble {
    let mut h = Ensemble::new();
    for _ in 0..terms {
        let coef = r.random_range(0.01..1.5);
        if r.random::<f64>() < 0.7 {
            h.push_weak(coef, random_stump(r, dim));
        } else {
            h.push_sign_descent(coef);
        }
    }
    h
}
