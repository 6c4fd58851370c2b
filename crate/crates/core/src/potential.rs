//! Potential functions `phi(z, y)` and their derivatives.
//!
//! The split families use `phi(z, y) = psi(z) - y z`, whose derivative
//! `psi'(z) - y` separates into a label-free part (estimable from unlabeled
//! data) and a part that is linear in the label. Madaboost is kept for the
//! PAB baseline and has no such split.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::{BaseHypothesis, Ensemble};
use crate::sample::WeightedLabeledSet;
use crate::sign::Sign;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    /// `psi` = Huber loss with unit threshold.
    Huber,
    /// `psi(z) = sqrt(1 + z^2) - 1`.
    PseudoHuber,
    Madaboost,
}

pub type PotentialFamily = PotentialKind;

impl PotentialKind {
    /// The derivative splits into a label-only and a feature-only part.
    pub fn label_free_split(self) -> bool {
        matches!(self, PotentialKind::Huber | PotentialKind::PseudoHuber)
    }

    pub fn twice_differentiable(self) -> bool {
        matches!(self, PotentialKind::PseudoHuber)
    }

    fn require_split(self) -> Result<()> {
        if self.label_free_split() {
            Ok(())
        } else {
            Err(Error::UnsupportedFamily(self))
        }
    }

    pub fn psi(self, z: f64) -> Result<f64> {
        self.require_split()?;
        Ok(match self {
            PotentialKind::Huber => {
                let a = z.abs();
                if a <= 1.0 {
                    0.5 * z * z
                } else {
                    a - 0.5
                }
            }
            // sqrt(1+z^2) - 1 written to avoid cancellation near zero.
            _ => z * z / ((1.0 + z * z).sqrt() + 1.0),
        })
    }

    pub fn psi_prime(self, z: f64) -> Result<f64> {
        self.require_split()?;
        Ok(self.psi_prime_unchecked(z))
    }

    #[inline]
    pub(crate) fn psi_prime_unchecked(self, z: f64) -> f64 {
        match self {
            PotentialKind::Huber => z.clamp(-1.0, 1.0),
            _ => z / (1.0 + z * z).sqrt(),
        }
    }

    pub fn psi_second(self, z: f64) -> Result<f64> {
        if !self.twice_differentiable() {
            return Err(Error::UnsupportedFamily(self));
        }
        Ok((1.0 + z * z).powf(-1.5))
    }

    pub fn phi(self, m: Margin) -> f64 {
        let y = m.y.value();
        match self {
            PotentialKind::Madaboost => {
                let zy = m.z * y;
                if zy >= 0.0 {
                    (-zy).exp()
                } else {
                    1.0 - zy
                }
            }
            _ => self.psi(m.z).expect("split family") - y * m.z,
        }
    }

    /// `d phi(z, y) / dz`.
    pub fn phi_prime(self, m: Margin) -> f64 {
        let y = m.y.value();
        match self {
            PotentialKind::Madaboost => {
                let zy = m.z * y;
                if zy >= 0.0 {
                    -y * (-zy).exp()
                } else {
                    -y
                }
            }
            _ => self.psi_prime_unchecked(m.z) - y,
        }
    }

    /// Probability of pseudo-label `+1` at ensemble output `z`:
    /// `(1 - psi'(z)) / 2`, so that `E[y_hat | x] = -psi'(z)`.
    pub fn pseudo_label_prob(self, z: f64) -> Result<f64> {
        Ok(0.5 * (1.0 - self.psi_prime(z)?))
    }
}

/// An ensemble output paired with a label.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Margin {
    pub z: f64,
    pub y: Sign,
}

impl Margin {
    pub fn new(z: f64, y: Sign) -> Self {
        Margin { z, y }
    }
}

pub fn psi(family: PotentialKind, z: f64) -> Result<f64> {
    family.psi(z)
}

pub fn psi_prime(family: PotentialKind, z: f64) -> Result<f64> {
    family.psi_prime(z)
}

pub fn psi_second(family: PotentialKind, z: f64) -> Result<f64> {
    family.psi_second(z)
}

pub fn phi(family: PotentialKind, m: Margin) -> f64 {
    family.phi(m)
}

pub fn phi_prime(family: PotentialKind, m: Margin) -> f64 {
    family.phi_prime(m)
}

pub fn pseudo_label_prob(family: PotentialKind, z: f64) -> Result<f64> {
    family.pseudo_label_prob(z)
}

/// Probability of keeping the true label under the Madaboost relabeling,
/// `-y * phi_mada'(z, y)`: `exp(-zy)` when `zy >= 0`, else 1.
pub fn mada_keep_weight(m: Margin) -> f64 {
    let zy = m.z * m.y.value();
    if zy >= 0.0 {
        (-zy).exp()
    } else {
        1.0
    }
}

/// Direction along which a directional derivative is taken.
#[derive(Clone, Copy, Debug)]
pub enum Direction<'a> {
    Base(&'a BaseHypothesis),
    /// `sign(H(x))` of the ensemble being differentiated.
    SignOfEnsemble,
}

impl Direction<'_> {
    #[inline]
    fn at(&self, x: &[f64], h_value: f64) -> f64 {
        match self {
            Direction::Base(h) => h.predict_unchecked(x).value(),
            Direction::SignOfEnsemble => Sign::of(h_value).value(),
        }
    }

    fn min_dimension(&self) -> usize {
        match self {
            Direction::Base(h) => h.min_dimension(),
            Direction::SignOfEnsemble => 0,
        }
    }
}

fn check_inputs(
    ensemble: &Ensemble,
    dir: &Direction<'_>,
    labeled: &WeightedLabeledSet,
    unlabeled: &[Vec<f64>],
) -> Result<f64> {
    if labeled.is_empty() {
        return Err(Error::Empty("labeled set"));
    }
    if unlabeled.is_empty() {
        return Err(Error::Empty("unlabeled set"));
    }
    let need = ensemble.min_dimension().max(dir.min_dimension());
    for x in labeled.features().chain(unlabeled.iter().map(Vec::as_slice)) {
        if x.len() < need {
            return Err(Error::DimensionMismatch {
                expected: need,
                got: x.len(),
            });
        }
    }
    labeled.positive_total_weight()
}

/// Split estimate of `Phi'(H, h)`: the mean of `psi'(H(x)) h(x)` over the
/// unlabeled points minus the weighted mean of `y h(x)` over the labeled set.
pub fn empirical_directional_derivative(
    family: PotentialKind,
    ensemble: &Ensemble,
    dir: Direction<'_>,
    labeled: &WeightedLabeledSet,
    unlabeled: &[Vec<f64>],
) -> Result<f64> {
    family.require_split()?;
    let total = check_inputs(ensemble, &dir, labeled, unlabeled)?;
    let unl: f64 = unlabeled
        .iter()
        .map(|x| {
            let z = ensemble.eval_unchecked(x);
            family.psi_prime_unchecked(z) * dir.at(x, z)
        })
        .sum::<f64>()
        / unlabeled.len() as f64;
    let lab: f64 = labeled
        .items()
        .iter()
        .map(|e| {
            let z = if matches!(dir, Direction::SignOfEnsemble) {
                ensemble.eval_unchecked(&e.x)
            } else {
                0.0
            };
            e.w * e.y.value() * dir.at(&e.x, z)
        })
        .sum::<f64>()
        / total;
    Ok(unl - lab)
}

/// Split estimate of `Phi(H)`: mean `psi(H(x))` over unlabeled points minus
/// weighted mean `y H(x)` over the labeled set. For Madaboost, which has no
/// split, the weighted mean of `phi(H(x), y)` over the labeled set.
pub fn empirical_potential(
    family: PotentialKind,
    ensemble: &Ensemble,
    labeled: &WeightedLabeledSet,
    unlabeled: &[Vec<f64>],
) -> Result<f64> {
    let labeled_values: Vec<f64> = labeled.features().map(|x| ensemble.eval(x)).collect::<Result<_>>()?;
    let unlabeled_values: Vec<f64> = unlabeled.iter().map(|x| ensemble.eval(x)).collect::<Result<_>>()?;
    potential_from_values(family, &unlabeled_values, labeled, &labeled_values)
}

/// [`empirical_potential`] on precomputed ensemble outputs.
pub fn potential_from_values(
    family: PotentialKind,
    unlabeled_values: &[f64],
    labeled: &WeightedLabeledSet,
    labeled_values: &[f64],
) -> Result<f64> {
    if labeled.is_empty() {
        return Err(Error::Empty("labeled set"));
    }
    let total = labeled.positive_total_weight()?;
    if family == PotentialKind::Madaboost {
        let s: f64 = labeled
            .items()
            .iter()
            .zip(labeled_values)
            .map(|(e, &z)| e.w * family.phi(Margin::new(z, e.y)))
            .sum();
        return Ok(s / total);
    }
    if unlabeled_values.is_empty() {
        return Err(Error::Empty("unlabeled set"));
    }
    let unl = unlabeled_values.iter().map(|&z| family.psi(z)).sum::<Result<f64>>()? / unlabeled_values.len() as f64;
    let lab: f64 = labeled
        .items()
        .iter()
        .zip(labeled_values)
        .map(|(e, &z)| e.w * e.y.value() * z)
        .sum::<f64>()
        / total;
    Ok(unl - lab)
}

/// One row of the potential comparison curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurveRow {
    pub z: f64,
    pub psi: f64,
    pub phi_half: f64,
    pub phi_mada: f64,
}

/// Rows `(z, psi_huber(z), phi_huber(z, 1)/2, phi_mada(z, 1))` for
/// `z = z_min + i * step`, `i = 0 ..= floor((z_max - z_min) / step)`.
pub fn potential_curve(z_min: f64, z_max: f64, step: f64) -> Result<Vec<CurveRow>> {
    if !(z_min < z_max) || !z_min.is_finite() || !z_max.is_finite() {
        return Err(Error::config(
            "z_range",
            format!("need z_min < z_max, got [{z_min}, {z_max}]"),
        ));
    }
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::config("step", format!("must be > 0, got {step}")));
    }
    let count = ((z_max - z_min) / step + 1e-9).floor() as usize + 1;
    let huber = PotentialKind::Huber;
    Ok((0..count)
        .map(|i| {
            let z = z_min + i as f64 * step;
            let m = Margin::new(z, Sign::Pos);
            CurveRow {
                z,
                psi: huber.psi(z).expect("huber is split"),
                phi_half: huber.phi(m) / 2.0,
                phi_mada: PotentialKind::Madaboost.phi(m),
            }
        })
        .collect())
}

pub fn write_curve_csv<W: Write>(rows: &[CurveRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_curve_file(rows: &[CurveRow], path: &Path) -> Result<()> {
    write_curve_csv(rows, std::fs::File::create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use PotentialKind::*;

    const SPLIT: [PotentialKind; 2] = [Huber, PseudoHuber];

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn capability_flags() {
        assert!(Huber.label_free_split() && !Huber.twice_differentiable());
        assert!(PseudoHuber.label_free_split() && PseudoHuber.twice_differentiable());
        assert!(!Madaboost.label_free_split() && !Madaboost.twice_differentiable());
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi(Huber, 0.0).unwrap(), 0.0);
        assert_eq!(psi(Huber, 2.0).unwrap(), 1.5);
        assert_eq!(psi(Huber, 0.5).unwrap(), 0.125);
        assert!(close(psi(PseudoHuber, 1.0).unwrap(), 0.414_213_56, 1e-8));
        assert!(matches!(psi(Madaboost, 0.0), Err(Error::UnsupportedFamily(Madaboost))));
    }

    #[test]
    fn psi_prime_examples() {
        assert_eq!(psi_prime(Huber, 0.5).unwrap(), 0.5);
        assert_eq!(psi_prime(Huber, -3.0).unwrap(), -1.0);
        assert!(close(
            psi_prime(PseudoHuber, 1.0).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            1e-15
        ));
        for f in SPLIT {
            assert_eq!(psi_prime(f, 0.0).unwrap(), 0.0);
        }
        assert!(psi_prime(Madaboost, 1.0).is_err());
    }

    #[test]
    fn psi_second_examples() {
        assert_eq!(psi_second(PseudoHuber, 0.0).unwrap(), 1.0);
        assert!(close(psi_second(PseudoHuber, 1.0).unwrap(), 0.353_553_39, 1e-8));
        assert!(matches!(psi_second(Huber, 0.5), Err(Error::UnsupportedFamily(Huber))));
        assert!(psi_second(Madaboost, 0.5).is_err());
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi(Huber, Margin::new(0.0, Sign::Pos)), 0.0);
        assert_eq!(phi(Huber, Margin::new(2.0, Sign::Pos)), -0.5);
        assert_eq!(phi(Madaboost, Margin::new(0.0, Sign::Pos)), 1.0);
        assert_eq!(phi(Madaboost, Margin::new(-1.0, Sign::Pos)), 2.0);
    }

    #[test]
    fn phi_prime_examples() {
        assert_eq!(phi_prime(Huber, Margin::new(0.0, Sign::Pos)), -1.0);
        assert_eq!(phi_prime(Huber, Margin::new(-0.5, Sign::Pos)), -1.5);
        assert!(close(
            phi_prime(Madaboost, Margin::new(1.0, Sign::Pos)),
            -0.367_879_44,
            1e-8
        ));
    }

    #[test]
    fn pseudo_label_prob_examples() {
        assert_eq!(pseudo_label_prob(Huber, 0.0).unwrap(), 0.5);
        assert_eq!(pseudo_label_prob(Huber, 1.5).unwrap(), 0.0);
        assert_eq!(pseudo_label_prob(Huber, -0.5).unwrap(), 0.75);
        assert!(pseudo_label_prob(Madaboost, 0.0).is_err());
    }

    #[test]
    fn mada_keep_weight_examples() {
        assert_eq!(mada_keep_weight(Margin::new(0.0, Sign::Pos)), 1.0);
        assert!(close(mada_keep_weight(Margin::new(1.0, Sign::Pos)), 0.367_879_44, 1e-8));
        assert_eq!(mada_keep_weight(Margin::new(-2.0, Sign::Pos)), 1.0);
        assert_eq!(mada_keep_weight(Margin::new(2.0, Sign::Neg)), 1.0);
    }

    #[test]
    fn directional_derivative_examples() {
        let labeled = WeightedLabeledSet::uniform(&[vec![0.0]], &[Sign::Pos]).unwrap();
        let unlabeled = vec![vec![0.0]];
        let zero = Ensemble::new();
        let one = BaseHypothesis::constant(Sign::Pos);
        let d = empirical_directional_derivative(Huber, &zero, Direction::Base(&one), &labeled, &unlabeled).unwrap();
        assert_eq!(d, -1.0);

        let balanced = WeightedLabeledSet::uniform(&[vec![0.0], vec![1.0]], &[Sign::Pos, Sign::Neg]).unwrap();
        let d =
            empirical_directional_derivative(Huber, &zero, Direction::SignOfEnsemble, &balanced, &unlabeled).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn directional_derivative_errors() {
        let labeled = WeightedLabeledSet::uniform(&[vec![0.0]], &[Sign::Pos]).unwrap();
        let e = Ensemble::new();
        let dir = Direction::SignOfEnsemble;
        assert!(matches!(
            empirical_directional_derivative(Huber, &e, dir, &labeled, &[]),
            Err(Error::Empty(_))
        ));
        let empty = WeightedLabeledSet::new(1);
        assert!(empirical_directional_derivative(Huber, &e, dir, &empty, &[vec![0.0]]).is_err());
        assert!(empirical_directional_derivative(Madaboost, &e, dir, &labeled, &[vec![0.0]]).is_err());
    }

    #[test]
    fn directional_derivative_matches_finite_difference() {
        // 1-smoothness bounds the forward-difference error by eps/2.
        let xs: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64 / 10.0 - 2.0]).collect();
        let ys: Vec<Sign> = (0..40)
            .map(|i| if i % 3 == 0 { Sign::Neg } else { Sign::Pos })
            .collect();
        let labeled = WeightedLabeledSet::uniform(&xs, &ys).unwrap();
        let unlabeled: Vec<Vec<f64>> = (0..25).map(|i| vec![i as f64 / 6.0 - 2.1]).collect();
        let mut h_ens = Ensemble::new();
        h_ens.push_weak(0.7, BaseHypothesis::stump(0, 0.3, Sign::Pos));
        h_ens.push_weak(0.4, BaseHypothesis::stump(0, -1.0, Sign::Neg));
        let dir_h = BaseHypothesis::stump(0, 0.1, Sign::Neg);
        let eps = 1e-4;
        for f in SPLIT {
            let d = empirical_directional_derivative(f, &h_ens, Direction::Base(&dir_h), &labeled, &unlabeled).unwrap();
            let mut moved = h_ens.clone();
            moved.push_weak(eps, dir_h.clone());
            let fd = (empirical_potential(f, &moved, &labeled, &unlabeled).unwrap()
                - empirical_potential(f, &h_ens, &labeled, &unlabeled).unwrap())
                / eps;
            assert!((d - fd).abs() <= eps / 2.0 + 1e-9, "{f:?}: {d} vs {fd}");
        }
    }

    #[test]
    fn curve_rows() {
        let rows = potential_curve(-2.0, 2.0, 0.5).unwrap();
        assert_eq!(rows.len(), 9);
        let at0 = rows.iter().find(|r| r.z == 0.0).unwrap();
        assert_eq!((at0.psi, at0.phi_half, at0.phi_mada), (0.0, 0.0, 1.0));
        let at2 = rows.last().unwrap();
        assert_eq!(at2.z, 2.0);
        assert_eq!(at2.psi, 1.5);
        assert_eq!(at2.phi_half, -0.25);
        assert_eq!(potential_curve(-1.0, 1.0, 0.3).unwrap().len(), 7);
        assert!(potential_curve(1.0, 1.0, 0.1).is_err());
        assert!(potential_curve(0.0, 1.0, 0.0).is_err());

        let mut buf = Vec::new();
        write_curve_csv(&rows[..1], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("z,psi,phi_half,phi_mada\n"));
    }
}
