//! Joint outcome distributions for two parties with two settings and three
//! outcomes each.
//!
//! Labels are 1-based throughout the public API. The 36 joint probabilities
//! are addressed either by a [`JointKey`] `(i, j, a, b)` or by the flat index
//! `p_k`, `k = 9(2(i-1) + (j-1)) + 3(a-1) + (b-1) + 1`, so `P11(1,1) = p1`,
//! `P12(1,1) = p10`, `P21(1,1) = p19` and `P22(3,3) = p36`.

use alloc::vec::Vec;
use core::fmt;
use core::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};

use crate::{Error, Result, DEFAULT_TOL};

pub type Rational = BigRational;

/// Shorthand for a small exact fraction.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Numeric backing of a distribution: exact rationals or `f64`.
///
/// Exact scalars ignore tolerances; every comparison is an equality.
pub trait Scalar: Num + Signed + Clone + PartialOrd + fmt::Debug {
    const EXACT: bool;

    fn from_rational(r: &Rational) -> Self;

    fn to_f64(&self) -> f64;

    /// `|self| <= tol`, or `self == 0` for exact scalars.
    fn is_negligible(&self, tol: f64) -> bool;

    fn from_i64(v: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(v)))
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_negligible(&self, tol: f64) -> bool {
        num_traits::Float::abs(*self) <= tol
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }
}

/// Measurement choice of one party, 1 or 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Setting(u8);

impl Setting {
    pub const ONE: Setting = Setting(1);
    pub const TWO: Setting = Setting(2);
    pub const ALL: [Setting; 2] = [Setting::ONE, Setting::TWO];

    pub fn new(value: i64) -> Result<Self> {
        match value {
            1 | 2 => Ok(Setting(value as u8)),
            _ => Err(Error::InvalidSetting(value)),
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub(crate) fn zero_based(self) -> usize {
        usize::from(self.0 - 1)
    }

    /// Setting shifted by `k` modulo 2.
    pub fn shifted(self, k: i64) -> Setting {
        Setting((i64::from(self.0 - 1) + k).rem_euclid(2) as u8 + 1)
    }

    pub fn other(self) -> Setting {
        self.shifted(1)
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Measurement outcome, 1, 2 or 3. Arithmetic on outcomes is modulo 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Outcome(u8);

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome(1), Outcome(2), Outcome(3)];

    pub fn new(value: i64) -> Result<Self> {
        match value {
            1..=3 => Ok(Outcome(value as u8)),
            _ => Err(Error::InvalidOutcome(value)),
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub(crate) fn zero_based(self) -> usize {
        usize::from(self.0 - 1)
    }

    /// Outcome shifted by `k` modulo 3.
    pub fn shifted(self, k: i64) -> Outcome {
        Outcome((i64::from(self.0 - 1) + k).rem_euclid(3) as u8 + 1)
    }

    /// `(self - other) mod 3`, in `0..3`.
    pub fn minus(self, other: Outcome) -> u8 {
        (i64::from(self.0) - i64::from(other.0)).rem_euclid(3) as u8
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Party {
    Alice,
    Bob,
}

/// One single-party probability, `P^i(a)` for Alice or `Q^j(b)` for Bob.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MarginalSide {
    pub party: Party,
    pub setting: Setting,
    pub outcome: Outcome,
}

impl MarginalSide {
    pub fn alice(setting: Setting, outcome: Outcome) -> Self {
        MarginalSide { party: Party::Alice, setting, outcome }
    }

    pub fn bob(setting: Setting, outcome: Outcome) -> Self {
        MarginalSide { party: Party::Bob, setting, outcome }
    }

    /// The three joint keys summed by this marginal when the other party
    /// uses `partner`.
    pub fn joint_keys(&self, partner: Setting) -> [JointKey; 3] {
        Outcome::ALL.map(|o| match self.party {
            Party::Alice => JointKey::new(self.setting, partner, self.outcome, o),
            Party::Bob => JointKey::new(partner, self.setting, o, self.outcome),
        })
    }
}

impl fmt::Display for MarginalSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.party {
            Party::Alice => write!(f, "P{}({})", self.setting, self.outcome),
            Party::Bob => write!(f, "Q{}({})", self.setting, self.outcome),
        }
    }
}

/// `P^{ij}(a, b)`. Ordering is lexicographic in `(i, j, a, b)`, which is the
/// flat-index order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JointKey {
    pub i: Setting,
    pub j: Setting,
    pub a: Outcome,
    pub b: Outcome,
}

impl JointKey {
    pub fn new(i: Setting, j: Setting, a: Outcome, b: Outcome) -> Self {
        JointKey { i, j, a, b }
    }

    /// Build from raw labels, validating each.
    pub fn from_labels(i: i64, j: i64, a: i64, b: i64) -> Result<Self> {
        Ok(JointKey::new(Setting::new(i)?, Setting::new(j)?, Outcome::new(a)?, Outcome::new(b)?))
    }

    pub fn flat_index(self) -> FlatIndex {
        FlatIndex(self.slot() as u8 + 1)
    }

    pub(crate) fn slot(self) -> usize {
        9 * (2 * self.i.zero_based() + self.j.zero_based())
            + 3 * self.a.zero_based()
            + self.b.zero_based()
    }

    /// All 36 keys in flat-index order.
    pub fn all() -> impl Iterator<Item = JointKey> {
        (0..36).map(|s| FlatIndex(s as u8 + 1).key())
    }
}

impl fmt::Display for JointKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}{}({},{})", self.i, self.j, self.a, self.b)
    }
}

/// `flat_index(i, j, a, b)`, the `p_k` label of a joint probability.
pub fn flat_index(i: Setting, j: Setting, a: Outcome, b: Outcome) -> FlatIndex {
    JointKey::new(i, j, a, b).flat_index()
}

/// The `k` of `p_k`, always in `1..=36`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FlatIndex(u8);

impl FlatIndex {
    pub fn new(k: i64) -> Result<Self> {
        match k {
            1..=36 => Ok(FlatIndex(k as u8)),
            _ => Err(Error::InvalidFlatIndex(k)),
        }
    }

    pub fn get(self) -> usize {
        usize::from(self.0)
    }

    pub(crate) fn slot(self) -> usize {
        usize::from(self.0 - 1)
    }

    pub(crate) fn from_slot(slot: usize) -> Self {
        debug_assert!(slot < 36);
        FlatIndex(slot as u8 + 1)
    }

    pub fn key(self) -> JointKey {
        let s = self.slot();
        let pair = s / 9;
        let cell = s % 9;
        JointKey {
            i: Setting(pair as u8 / 2 + 1),
            j: Setting(pair as u8 % 2 + 1),
            a: Outcome(cell as u8 / 3 + 1),
            b: Outcome(cell as u8 % 3 + 1),
        }
    }

    pub fn all() -> impl Iterator<Item = FlatIndex> {
        (1..=36u8).map(FlatIndex)
    }
}

impl fmt::Display for FlatIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

/// The 36 joint probabilities `P^{ij}(a, b)`.
///
/// Construction checks nonnegativity and per-pair normalization, exactly
/// for rationals and within a tolerance for floats. Float entries in
/// `[-tol, 0)` are clamped to zero. No-signaling is *not* required; use
/// [`JointDistribution::check_no_signaling`].
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution<T> {
    p: [T; 36],
}

impl<T: Scalar> JointDistribution<T> {
    /// Validate 36 values given in flat-index order.
    pub fn from_flat(values: Vec<T>, tol: f64) -> Result<Self> {
        let n = values.len();
        let p: [T; 36] = values.try_into().map_err(|_| Error::WrongLength(n))?;
        Self::validated(p, tol)
    }

    /// Validate a distribution given as a function of the joint key.
    pub fn from_fn(mut f: impl FnMut(JointKey) -> T, tol: f64) -> Result<Self> {
        let p = core::array::from_fn(|s| f(FlatIndex::from_slot(s).key()));
        Self::validated(p, tol)
    }

    fn validated(mut p: [T; 36], tol: f64) -> Result<Self> {
        for (s, v) in p.iter_mut().enumerate() {
            if v.is_negative() {
                if v.is_negligible(tol) {
                    *v = T::zero();
                } else {
                    return Err(Error::NegativeProbability {
                        index: FlatIndex::from_slot(s),
                        value: v.to_f64(),
                    });
                }
            }
        }
        for i in Setting::ALL {
            for j in Setting::ALL {
                let base = 9 * (2 * i.zero_based() + j.zero_based());
                let sum = p[base..base + 9].iter().fold(T::zero(), |acc, v| acc + v.clone());
                if !(sum.clone() - T::one()).is_negligible(tol) {
                    return Err(Error::NotNormalized { i, j, sum: sum.to_f64() });
                }
            }
        }
        Ok(JointDistribution { p })
    }

    pub(crate) fn from_array_unchecked(p: [T; 36]) -> Self {
        JointDistribution { p }
    }

    pub fn get(&self, key: JointKey) -> &T {
        &self.p[key.slot()]
    }

    pub fn p(&self, k: FlatIndex) -> &T {
        &self.p[k.slot()]
    }

    /// Entries in flat-index order.
    pub fn as_slice(&self) -> &[T] {
        &self.p
    }

    /// `P^i(a)` summed over Bob's outcomes at `partner`, or `Q^j(b)` summed
    /// over Alice's outcomes at `partner`.
    pub fn marginal(&self, side: MarginalSide, partner: Setting) -> T {
        side.joint_keys(partner)
            .iter()
            .fold(T::zero(), |acc, k| acc + self.get(*k).clone())
    }

    /// Compare every marginal across the two partner settings.
    pub fn check_no_signaling(&self, tol: f64) -> NoSignalingReport<T> {
        let mut violations = Vec::new();
        let mut worst = T::zero();
        for party in [Party::Alice, Party::Bob] {
            for setting in Setting::ALL {
                for outcome in Outcome::ALL {
                    let side = MarginalSide { party, setting, outcome };
                    let gap = (self.marginal(side, Setting::ONE) - self.marginal(side, Setting::TWO)).abs();
                    if gap > worst {
                        worst = gap.clone();
                    }
                    if !gap.is_negligible(tol) {
                        violations.push(NsViolation { side, magnitude: gap });
                    }
                }
            }
        }
        NoSignalingReport { worst, violations }
    }

    /// Entrywise `weight * self + (1 - weight) * other`.
    pub fn mix(&self, other: &Self, weight: &T) -> Self {
        let p = core::array::from_fn(|s| {
            weight.clone() * self.p[s].clone() + (T::one() - weight.clone()) * other.p[s].clone()
        });
        JointDistribution { p }
    }

    pub fn to_f64(&self) -> JointDistribution<f64> {
        JointDistribution { p: core::array::from_fn(|s| self.p[s].to_f64()) }
    }
}

impl JointDistribution<Rational> {
    pub fn from_rational_flat(values: Vec<Rational>) -> Result<Self> {
        Self::from_flat(values, 0.0)
    }
}

impl JointDistribution<f64> {
    pub fn from_f64_flat(values: Vec<f64>) -> Result<Self> {
        Self::from_flat(values, DEFAULT_TOL)
    }
}

impl<T: Scalar + Neg<Output = T>> JointDistribution<T> {
    /// Largest absolute entrywise difference, as `f64`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.p
            .iter()
            .zip(other.p.iter())
            .map(|(x, y)| (x.clone() - y.clone()).abs().to_f64())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NsViolation<T> {
    pub side: MarginalSide,
    pub magnitude: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoSignalingReport<T> {
    /// Largest mismatch over all 12 conditions, violating or not.
    pub worst: T,
    pub violations: Vec<NsViolation<T>>,
}

impl<T> NoSignalingReport<T> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// The no-signaling box reaching `I3 = 4`: twelve entries of 1/3, the rest 0.
pub fn pr_box_qutrit() -> JointDistribution<Rational> {
    const SUPPORT: [usize; 12] = [1, 5, 9, 10, 14, 18, 20, 24, 25, 28, 32, 36];
    let third = ratio(1, 3);
    let p = core::array::from_fn(|s| {
        if SUPPORT.contains(&(s + 1)) {
            third.clone()
        } else {
            Rational::zero()
        }
    });
    JointDistribution::from_array_unchecked(p)
}

/// All 36 entries equal to 1/9.
pub fn uniform_distribution() -> JointDistribution<Rational> {
    let ninth = ratio(1, 9);
    JointDistribution::from_array_unchecked(core::array::from_fn(|_| ninth.clone()))
}

/// The point mass on outcomes `(a, b)` for every setting pair.
pub fn point_mass<T: Scalar>(a: Outcome, b: Outcome) -> JointDistribution<T> {
    JointDistribution::from_array_unchecked(core::array::from_fn(|s| {
        let k = FlatIndex::from_slot(s).key();
        if k.a == a && k.b == b {
            T::one()
        } else {
            T::zero()
        }
    }))
}



#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn key(i: i64, j: i64, a: i64, b: i64) -> JointKey {
        JointKey::from_labels(i, j, a, b).unwrap()
    }

    #[test]
    fn flat_index_matches_table() {
        assert_eq!(key(1, 1, 1, 1).flat_index().get(), 1);
        assert_eq!(key(1, 2, 1, 1).flat_index().get(), 10);
        assert_eq!(key(2, 1, 1, 1).flat_index().get(), 19);
        assert_eq!(key(2, 2, 3, 3).flat_index().get(), 36);
        assert_eq!(key(1, 1, 1, 2).flat_index().get(), 2);
        assert_eq!(key(1, 1, 2, 1).flat_index().get(), 4);
        assert_eq!(key(1, 2, 3, 2).flat_index().get(), 17);
        assert_eq!(key(2, 1, 3, 1).flat_index().get(), 25);
        assert_eq!(key(2, 2, 2, 3).flat_index().get(), 33);
    }

    #[test]
    fn flat_index_is_a_bijection() {
        let mut seen = [false; 36];
        for k in JointKey::all() {
            let f = k.flat_index();
            assert!(!seen[f.slot()]);
            seen[f.slot()] = true;
            assert_eq!(f.key(), k);
        }
        assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn labels_are_validated() {
        assert_eq!(Setting::new(3), Err(Error::InvalidSetting(3)));
        assert_eq!(Outcome::new(0), Err(Error::InvalidOutcome(0)));
        assert_eq!(FlatIndex::new(37), Err(Error::InvalidFlatIndex(37)));
        assert_eq!(Outcome::new(3).unwrap().shifted(1), Outcome::new(1).unwrap());
        assert_eq!(Outcome::new(1).unwrap().shifted(-1), Outcome::new(3).unwrap());
        assert_eq!(Setting::TWO.shifted(1), Setting::ONE);
    }

    #[test]
    fn marginals() {
        let u = uniform_distribution();
        for party in [Party::Alice, Party::Bob] {
            for s in Setting::ALL {
                for o in Outcome::ALL {
                    let side = MarginalSide { party, setting: s, outcome: o };
                    assert_eq!(u.marginal(side, Setting::ONE), ratio(1, 3));
                    assert_eq!(u.marginal(side, Setting::TWO), ratio(1, 3));
                }
            }
        }
        let pr = pr_box_qutrit();
        let one = Outcome::new(1).unwrap();
        assert_eq!(pr.marginal(MarginalSide::alice(Setting::ONE, one), Setting::ONE), ratio(1, 3));

        let two = Outcome::new(2).unwrap();
        let d: JointDistribution<Rational> = point_mass(two, one);
        assert_eq!(d.marginal(MarginalSide::alice(Setting::ONE, two), Setting::ONE), ratio(1, 1));
    }

    #[test]
    fn special_distributions_are_normalized_and_no_signaling() {
        let pr = pr_box_qutrit();
        assert_eq!(pr.as_slice().iter().filter(|v| !v.is_zero()).count(), 12);
        assert!(JointDistribution::from_rational_flat(pr.as_slice().to_vec()).is_ok());
        let r = pr.check_no_signaling(0.0);
        assert!(r.passed());
        assert!(r.worst.is_zero());

        let u = uniform_distribution();
        assert!(JointDistribution::from_rational_flat(u.as_slice().to_vec()).is_ok());
        assert!(u.check_no_signaling(0.0).passed());
    }

    #[test]
    fn signaling_distribution_is_reported() {
        // p1 = 1 for pair (1,1); pair (2,1) uniform; the rest point masses on (1,1).
        let d = JointDistribution::from_fn(
            |k| {
                if k.i == Setting::TWO && k.j == Setting::ONE {
                    ratio(1, 9)
                } else if k.a.value() == 1 && k.b.value() == 1 {
                    ratio(1, 1)
                } else {
                    ratio(0, 1)
                }
            },
            0.0,
        )
        .unwrap();
        let r = d.check_no_signaling(DEFAULT_TOL);
        assert!(!r.passed());
        assert_eq!(r.worst, ratio(2, 3));
        // Alice setting 1 is untouched; Bob's setting-1 marginals and Alice's
        // setting-2 marginals disagree across partners.
        assert!(r.violations.iter().all(|v| !(v.side.party == Party::Alice && v.side.setting == Setting::ONE)));
        assert_eq!(r.violations.len(), 6);
    }

    #[test]
    fn float_construction_clamps_tiny_negatives() {
        let mut v = vec![1.0 / 9.0; 36];
        v[0] += 5e-10;
        v[1] = 1.0 / 9.0 - 5e-10;
        let d = JointDistribution::from_f64_flat(v.clone()).unwrap();
        assert!(*d.p(FlatIndex::new(1).unwrap()) > 0.0);

        let mut w = vec![0.0; 36];
        for pair in 0..4 {
            w[9 * pair] = 1.0 + 5e-10;
            w[9 * pair + 1] = -5e-10;
        }
        let d = JointDistribution::from_f64_flat(w.clone()).unwrap();
        assert_eq!(*d.p(FlatIndex::new(2).unwrap()), 0.0);

        w[1] = -1e-6;
        w[0] = 1.0 + 1e-6;
        assert!(matches!(
            JointDistribution::from_f64_flat(w),
            Err(Error::NegativeProbability { .. })
        ));
        assert!(matches!(JointDistribution::from_f64_flat(vec![0.1; 36]), Err(Error::NotNormalized { .. })));
        assert_eq!(JointDistribution::from_f64_flat(vec![0.1; 3]), Err(Error::WrongLength(3)));
    }

    #[test]
    fn rationals_are_checked_exactly() {
        let mut v: Vec<Rational> = uniform_distribution().as_slice().to_vec();
        v[0] = v[0].clone() + ratio(1, 1_000_000_000_000);
        assert!(matches!(JointDistribution::from_rational_flat(v), Err(Error::NotNormalized { .. })));
    }
}
