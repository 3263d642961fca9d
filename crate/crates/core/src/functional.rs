//! Bell functionals: linear forms over joint and single-party probabilities,
//! each read as `value <= bound`.
//!
//! Marginal terms stay symbolic until [`BellFunctional::expand_marginals`]
//! rewrites each one as a three-term joint sum at a chosen partner setting.
//! On no-signaling distributions the choice does not change the value; on
//! the algebra side it changes the joint coefficient vector by an element of
//! the constraint row space.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_traits::{Signed, Zero};

use crate::prob::{ratio, JointDistribution, JointKey, MarginalSide, Outcome, Party, Rational, Scalar, Setting};
use crate::{Error, Result, DEFAULT_TOL};

/// Which party's outcome is subtracted in `P(X = Y + k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `a - b = k (mod 3)`, i.e. `P(A_i = B_j + k)`.
    AMinusB,
    /// `b - a = k (mod 3)`, i.e. `P(B_j = A_i + k)`.
    BMinusA,
}

/// The three joint keys of setting pair `(i, j)` whose outcomes differ by
/// `k` modulo 3 in the given direction, in flat-index order.
pub fn modular_difference_term(i: Setting, j: Setting, direction: Direction, k: i64) -> [JointKey; 3] {
    let k = k.rem_euclid(3) as u8;
    let mut out = Outcome::ALL.map(|a| {
        let b = match direction {
            Direction::AMinusB => a.shifted(-i64::from(k)),
            Direction::BMinusA => a.shifted(i64::from(k)),
        };
        JointKey::new(i, j, a, b)
    });
    out.sort();
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BellFunctional {
    name: String,
    bound: Rational,
    joint: BTreeMap<JointKey, Rational>,
    marginals: BTreeMap<MarginalSide, Rational>,
}

impl BellFunctional {
    pub fn new(name: impl Into<String>, bound: Rational) -> Self {
        BellFunctional {
            name: name.into(),
            bound,
            joint: BTreeMap::new(),
            marginals: BTreeMap::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn bound(&self) -> &Rational {
        &self.bound
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Add `c` to the coefficient of `key`; coefficients that cancel to zero
    /// are dropped.
    pub fn add_joint(&mut self, key: JointKey, c: Rational) -> &mut Self {
        accumulate(&mut self.joint, key, c);
        self
    }

    pub fn add_marginal(&mut self, side: MarginalSide, c: Rational) -> &mut Self {
        accumulate(&mut self.marginals, side, c);
        self
    }

    pub fn joint_coeffs(&self) -> &BTreeMap<JointKey, Rational> {
        &self.joint
    }

    pub fn marginal_coeffs(&self) -> &BTreeMap<MarginalSide, Rational> {
        &self.marginals
    }

    pub fn alice_marginal_coeffs(&self) -> impl Iterator<Item = (&MarginalSide, &Rational)> {
        self.marginals.iter().filter(|(s, _)| s.party == Party::Alice)
    }

    pub fn bob_marginal_coeffs(&self) -> impl Iterator<Item = (&MarginalSide, &Rational)> {
        self.marginals.iter().filter(|(s, _)| s.party == Party::Bob)
    }

    pub fn is_joint_only(&self) -> bool {
        self.marginals.is_empty()
    }

    /// Dense joint coefficients in flat-index order. Marginal terms are
    /// ignored; callers that need them expand first.
    pub fn joint_vector(&self) -> Vec<Rational> {
        let mut v = alloc::vec![Rational::zero(); 36];
        for (k, c) in &self.joint {
            v[k.slot()] = c.clone();
        }
        v
    }

    /// Replace each marginal term by the joint sum at the partner setting
    /// named in `choice`.
    pub fn expand_marginals(&self, choice: &MarginalChoice) -> Result<BellFunctional> {
        let mut out = BellFunctional {
            name: self.name.clone(),
            bound: self.bound.clone(),
            joint: self.joint.clone(),
            marginals: BTreeMap::new(),
        };
        for (side, c) in &self.marginals {
            let partner = choice.get(side).ok_or(Error::MissingMarginalChoice(*side))?;
            for key in side.joint_keys(partner) {
                out.add_joint(key, c.clone());
            }
        }
        Ok(out)
    }

    /// Value on `dist`. Marginal terms need a no-signaling distribution and
    /// are read as the average over both partner settings.
    pub fn evaluate<T: Scalar>(&self, dist: &JointDistribution<T>) -> Result<T> {
        self.evaluate_with_tol(dist, DEFAULT_TOL)
    }

    pub fn evaluate_with_tol<T: Scalar>(&self, dist: &JointDistribution<T>, tol: f64) -> Result<T> {
        let mut value = T::zero();
        for (k, c) in &self.joint {
            value = value + T::from_rational(c) * dist.get(*k).clone();
        }
        if !self.marginals.is_empty() {
            let report = dist.check_no_signaling(tol);
            if !report.passed() {
                return Err(Error::Signaling { worst: report.worst.to_f64() });
            }
            let two = T::from_i64(2);
            for (side, c) in &self.marginals {
                let m = (dist.marginal(*side, Setting::ONE) + dist.marginal(*side, Setting::TWO)) / two.clone();
                value = value + T::from_rational(c) * m;
            }
        }
        Ok(value)
    }

    /// `self - scale * other` over joint and marginal terms, named `name`,
    /// with bound `self.bound - scale * other.bound`.
    pub fn minus_scaled(&self, other: &BellFunctional, scale: &Rational, name: impl Into<String>) -> BellFunctional {
        let mut out = self.clone().renamed(name);
        out.bound = &self.bound - scale * &other.bound;
        for (k, c) in &other.joint {
            out.add_joint(*k, -(scale * c));
        }
        for (s, c) in &other.marginals {
            out.add_marginal(*s, -(scale * c));
        }
        out
    }

    /// Look up a functional by its canonical label: `I3`, `I3p`, `K3`, `K3p`,
    /// `W3`, `CGLMP(c1,c2,c3,c4)` or `W(alpha,beta,x,y)`.
    pub fn builtin(name: &str) -> Option<BellFunctional> {
        match name {
            "I3" => return Some(i3_functional()),
            "I3p" => return Some(i3_prime_functional()),
            "K3" => return Some(k3_functional()),
            "K3p" => return Some(k3_prime_functional()),
            "W3" => return Some(w3_functional()),
            _ => {}
        }
        if let Some(args) = strip_call(name, "CGLMP") {
            let c = parse_ints::<4>(args)?;
            let c = c.map(|v| i8::try_from(v).unwrap_or(i8::MAX));
            return CglmpChoice::new(c).ok().map(cglmp_functional);
        }
        if let Some(args) = strip_call(name, "W") {
            let [alpha, beta, x, y] = parse_ints::<4>(args)?;
            return WFamilyChoice::new(alpha, beta, x, y).ok().map(w_family_functional);
        }
        None
    }
}

impl fmt::Display for BellFunctional {
    /// `name: +P11(1,1) - P21(1,1) ... - P1(1) <= bound`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.name)?;
        let terms = self
            .joint
            .iter()
            .map(|(k, c)| (k.to_string(), c))
            .chain(self.marginals.iter().map(|(s, c)| (s.to_string(), c)));
        for (label, c) in terms {
            let sign = if c.is_negative() { '-' } else { '+' };
            let mag = c.abs();
            if mag == ratio(1, 1) {
                write!(f, " {sign}{label}")?;
            } else {
                write!(f, " {sign}{mag}*{label}")?;
            }
        }
        write!(f, " <= {}", self.bound)
    }
}

fn accumulate<K: Ord>(map: &mut BTreeMap<K, Rational>, key: K, c: Rational) {
    let sum = map.remove(&key).unwrap_or_else(Rational::zero) + c;
    if !sum.is_zero() {
        map.insert(key, sum);
    }
}

fn strip_call<'a>(name: &'a str, head: &str) -> Option<&'a str> {
    name.strip_prefix(head)?.strip_prefix('(')?.strip_suffix(')')
}

fn parse_ints<const N: usize>(args: &str) -> Option<[i64; N]> {
    let parts: Vec<i64> = args
        .split(',')
        .map(|s| s.trim().trim_start_matches('+').parse().ok())
        .collect::<Option<_>>()?;
    parts.try_into().ok()
}

/// Partner setting used for each marginal term during expansion.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MarginalChoice {
    explicit: BTreeMap<MarginalSide, Setting>,
    fallback: Option<Setting>,
}

impl MarginalChoice {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every marginal uses the same partner setting.
    pub fn all(partner: Setting) -> Self {
        MarginalChoice { explicit: BTreeMap::new(), fallback: Some(partner) }
    }

    pub fn with(mut self, side: MarginalSide, partner: Setting) -> Self {
        self.explicit.insert(side, partner);
        self
    }

    pub fn get(&self, side: &MarginalSide) -> Option<Setting> {
        self.explicit.get(side).copied().or(self.fallback)
    }

    /// The choice that turns `K3` into its ten-term joint form:
    /// `P1(1)` via `B2`, `P1(2)` via `B1`, `Q2(1)` and `Q2(2)` via `A2`.
    pub fn k3_ten_term() -> Self {
        let (one, two) = (Setting::ONE, Setting::TWO);
        MarginalChoice::new()
            .with(MarginalSide::alice(one, out(1)), two)
            .with(MarginalSide::alice(one, out(2)), one)
            .with(MarginalSide::bob(two, out(1)), two)
            .with(MarginalSide::bob(two, out(2)), two)
    }

    /// Ten-term form of `K3'`: `P2(1)` via `B1`, `P2(2)` via `B2`, `Q1(1)`
    /// via `A1`, `Q1(2)` via `A2`.
    pub fn k3_prime_ten_term() -> Self {
        let (one, two) = (Setting::ONE, Setting::TWO);
        MarginalChoice::new()
            .with(MarginalSide::alice(two, out(1)), one)
            .with(MarginalSide::alice(two, out(2)), two)
            .with(MarginalSide::bob(one, out(1)), one)
            .with(MarginalSide::bob(one, out(2)), two)
    }

    /// Ten-term form of `W3`: `P1(1)` via `B2`, `P1(2)` via `B1`, `Q2(1)`
    /// via `A1`, `Q2(2)` via `A2`.
    pub fn w3_ten_term() -> Self {
        let (one, two) = (Setting::ONE, Setting::TWO);
        MarginalChoice::new()
            .with(MarginalSide::alice(one, out(1)), two)
            .with(MarginalSide::alice(one, out(2)), one)
            .with(MarginalSide::bob(two, out(1)), one)
            .with(MarginalSide::bob(two, out(2)), two)
    }
}

fn out(v: i64) -> Outcome {
    Outcome::new(v).expect("outcome literal in 1..=3")
}

fn set(v: i64) -> Setting {
    Setting::new(v).expect("setting literal in 1..=2")
}

/// `(c1, c2, c3, c4)` with entries in `{-1, 0, 1}` and a sum that is nonzero
/// modulo 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CglmpChoice {
    c: [i8; 4],
}

impl CglmpChoice {
    pub fn new(c: [i8; 4]) -> Result<Self> {
        let in_range = c.iter().all(|v| (-1..=1).contains(v));
        let sum: i32 = c.iter().map(|v| i32::from(*v)).sum();
        if !in_range || sum.rem_euclid(3) == 0 {
            return Err(Error::InvalidCglmpChoice { c });
        }
        Ok(CglmpChoice { c })
    }

    pub fn coefficients(&self) -> [i8; 4] {
        self.c
    }
}

impl fmt::Display for CglmpChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [c1, c2, c3, c4] = self.c;
        write!(f, "CGLMP({c1},{c2},{c3},{c4})")
    }
}

/// All valid CGLMP choices, lexicographic in `(c1, c2, c3, c4)` with each
/// entry ascending through `-1, 0, 1`.
pub fn enumerate_cglmp() -> Vec<CglmpChoice> {
    let mut out = Vec::with_capacity(54);
    for c1 in -1..=1 {
        for c2 in -1..=1 {
            for c3 in -1..=1 {
                for c4 in -1..=1 {
                    if let Ok(c) = CglmpChoice::new([c1, c2, c3, c4]) {
                        out.push(c);
                    }
                }
            }
        }
    }
    out
}

/// The CGLMP member for `c`: eight modular-difference terms, bound 2.
pub fn cglmp_functional(choice: CglmpChoice) -> BellFunctional {
    use Direction::{AMinusB, BMinusA};
    let [c1, c2, c3, c4] = choice.c.map(i64::from);
    let (one, two) = (Setting::ONE, Setting::TWO);
    let terms: [(Setting, Setting, Direction, i64, i64); 8] = [
        (one, one, AMinusB, c1, 1),
        (two, one, BMinusA, c2, 1),
        (two, two, AMinusB, c3, 1),
        (one, two, BMinusA, c4, 1),
        (one, one, AMinusB, -(c2 + c3 + c4), -1),
        (two, one, BMinusA, -(c1 + c3 + c4), -1),
        (two, two, AMinusB, -(c1 + c2 + c4), -1),
        (one, two, BMinusA, -(c1 + c2 + c3), -1),
    ];
    let mut f = BellFunctional::new(choice.to_string(), ratio(2, 1));
    for (i, j, dir, k, sign) in terms {
        for key in modular_difference_term(i, j, dir, k) {
            f.add_joint(key, ratio(sign, 1));
        }
    }
    f
}

/// `I3`, the CGLMP member with `c2 = 1`.
pub fn i3_functional() -> BellFunctional {
    cglmp_functional(CglmpChoice { c: [0, 1, 0, 0] }).renamed("I3")
}

/// `I3'`, the CGLMP member with `c4 = 1`.
pub fn i3_prime_functional() -> BellFunctional {
    cglmp_functional(CglmpChoice { c: [0, 0, 0, 1] }).renamed("I3p")
}

type JointTerm = (i64, i64, i64, i64, i64);

fn ch_form(name: &str, joint: &[JointTerm], marginals: &[(Party, i64, i64)]) -> BellFunctional {
    let mut f = BellFunctional::new(name, Rational::zero());
    for &(i, j, a, b, sign) in joint {
        f.add_joint(JointKey::new(set(i), set(j), out(a), out(b)), ratio(sign, 1));
    }
    for &(party, s, o) in marginals {
        f.add_marginal(MarginalSide { party, setting: set(s), outcome: out(o) }, ratio(-1, 1));
    }
    f
}

/// The CH form equivalent to `I3`: two complete CH blocks on outcomes
/// `(1,1)` and `(2,2)` plus the cross block, minus `P1(1), P1(2), Q2(1), Q2(2)`.
pub fn k3_functional() -> BellFunctional {
    ch_form(
        "K3",
        &[
            (1, 1, 1, 1, 1), (1, 2, 1, 1, 1), (2, 1, 1, 1, -1), (2, 2, 1, 1, 1),
            (1, 1, 2, 2, 1), (1, 2, 2, 2, 1), (2, 1, 2, 2, -1), (2, 2, 2, 2, 1),
            (1, 1, 2, 1, 1), (1, 2, 1, 2, 1), (2, 1, 2, 1, -1), (2, 2, 2, 1, 1),
        ],
        &[(Party::Alice, 1, 1), (Party::Alice, 1, 2), (Party::Bob, 2, 1), (Party::Bob, 2, 2)],
    )
}

/// The CH form equivalent to `I3'`.
pub fn k3_prime_functional() -> BellFunctional {
    ch_form(
        "K3p",
        &[
            (1, 1, 1, 1, 1), (1, 2, 1, 1, -1), (2, 1, 1, 1, 1), (2, 2, 1, 1, 1),
            (1, 1, 2, 2, 1), (1, 2, 2, 2, -1), (2, 1, 2, 2, 1), (2, 2, 2, 2, 1),
            (1, 1, 2, 1, 1), (1, 2, 2, 1, -1), (2, 1, 1, 2, 1), (2, 2, 2, 1, 1),
        ],
        &[(Party::Alice, 2, 1), (Party::Alice, 2, 2), (Party::Bob, 1, 1), (Party::Bob, 1, 2)],
    )
}

/// `W3`, the `(0,0,0,0)` member of the `W` family.
pub fn w3_functional() -> BellFunctional {
    w_family_functional(WFamilyChoice { alpha: 0, beta: 0, x: 0, y: 0 }).renamed("W3")
}

/// Setting shifts `alpha, beta` (mod 2) and outcome shifts `x, y` (mod 3)
/// of the 36-member CH family containing `W3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WFamilyChoice {
    pub alpha: u8,
    pub beta: u8,
    pub x: u8,
    pub y: u8,
}

impl WFamilyChoice {
    pub fn new(alpha: i64, beta: i64, x: i64, y: i64) -> Result<Self> {
        let ok = (0..2).contains(&alpha) && (0..2).contains(&beta) && (0..3).contains(&x) && (0..3).contains(&y);
        if !ok {
            return Err(Error::InvalidWFamilyChoice);
        }
        Ok(WFamilyChoice { alpha: alpha as u8, beta: beta as u8, x: x as u8, y: y as u8 })
    }
}

impl fmt::Display for WFamilyChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W({},{},{},{})", self.alpha, self.beta, self.x, self.y)
    }
}

/// All 36 members, lexicographic in `(alpha, beta, x, y)`.
pub fn enumerate_w_family() -> Vec<WFamilyChoice> {
    let mut out = Vec::with_capacity(36);
    for alpha in 0..2 {
        for beta in 0..2 {
            for x in 0..3 {
                for y in 0..3 {
                    out.push(WFamilyChoice { alpha, beta, x, y });
                }
            }
        }
    }
    out
}

pub fn w_family_functional(w: WFamilyChoice) -> BellFunctional {
    let (alpha, beta, x, y) = (i64::from(w.alpha), i64::from(w.beta), i64::from(w.x), i64::from(w.y));
    let a_set = |s: i64| set(s).shifted(alpha);
    let b_set = |s: i64| set(s).shifted(beta);
    let a_out = |o: i64| out(o).shifted(x);
    let b_out = |o: i64| out(o).shifted(y);

    // (alice setting, bob setting, alice outcome, bob outcome, sign) before shifting
    const JOINT: [JointTerm; 12] = [
        (1, 1, 2, 1, 1), (1, 2, 2, 1, 1), (2, 1, 2, 1, -1), (2, 2, 2, 1, 1),
        (1, 1, 1, 2, 1), (1, 2, 1, 2, 1), (2, 1, 1, 2, -1), (2, 2, 1, 2, 1),
        (1, 1, 2, 2, 1), (1, 2, 1, 1, 1), (2, 1, 2, 2, -1), (2, 2, 2, 2, 1),
    ];
    let mut f = BellFunctional::new(w.to_string(), Rational::zero());
    for (i, j, a, b, sign) in JOINT {
        f.add_joint(JointKey::new(a_set(i), b_set(j), a_out(a), b_out(b)), ratio(sign, 1));
    }
    for o in [1, 2] {
        f.add_marginal(MarginalSide::alice(a_set(1), a_out(o)), ratio(-1, 1));
        f.add_marginal(MarginalSide::bob(b_set(2), b_out(o)), ratio(-1, 1));
    }
    f
}

/// Joint-only functional from `(flat index, coefficient)` pairs; handy for
/// writing down expanded forms.
pub fn from_flat_terms(name: &str, bound: Rational, terms: &[(i64, i64)]) -> Result<BellFunctional> {
    let mut f = BellFunctional::new(name, bound);
    for &(k, c) in terms {
        f.add_joint(crate::FlatIndex::new(k)?.key(), ratio(c, 1));
    }
    Ok(f)
}
