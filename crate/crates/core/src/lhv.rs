//! Local hidden-variable models: the 81 deterministic strategies, classical
//! bounds of functionals, and linear-programming membership in the local
//! polytope.

use alloc::vec::Vec;
use core::fmt;

use crate::functional::BellFunctional;
use crate::prob::{JointDistribution, JointKey, Outcome, Rational, Scalar, Setting};
use crate::simplex::{phase_one, PhaseOne};
use crate::{Error, Result};

/// Fixed outcomes `(a1, a2)` for Alice's settings and `(b1, b2)` for Bob's.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DeterministicStrategy {
    pub a1: Outcome,
    pub a2: Outcome,
    pub b1: Outcome,
    pub b2: Outcome,
}

impl DeterministicStrategy {
    pub fn alice(&self, s: Setting) -> Outcome {
        if s == Setting::ONE { self.a1 } else { self.a2 }
    }

    pub fn bob(&self, s: Setting) -> Outcome {
        if s == Setting::ONE { self.b1 } else { self.b2 }
    }

    /// Whether the strategy produces `key`'s outcomes at `key`'s settings.
    pub fn fires(&self, key: JointKey) -> bool {
        self.alice(key.i) == key.a && self.bob(key.j) == key.b
    }
}

impl fmt::Display for DeterministicStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.a1, self.a2, self.b1, self.b2)
    }
}

/// All 81 strategies in lexicographic order of `(a1, a2, b1, b2)`.
pub fn enumerate_strategies() -> Vec<DeterministicStrategy> {
    let mut out = Vec::with_capacity(81);
    for a1 in Outcome::ALL {
        for a2 in Outcome::ALL {
            for b1 in Outcome::ALL {
                for b2 in Outcome::ALL {
                    out.push(DeterministicStrategy { a1, a2, b1, b2 });
                }
            }
        }
    }
    out
}

/// The 0/1 distribution of a deterministic strategy.
pub fn strategy_distribution<T: Scalar>(s: &DeterministicStrategy) -> JointDistribution<T> {
    JointDistribution::from_fn(|k| if s.fires(k) { T::one() } else { T::zero() }, 0.0)
        .expect("deterministic boxes are normalized")
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalBound {
    pub max: Rational,
    /// Every strategy attaining `max`, in enumeration order.
    pub maximizers: Vec<DeterministicStrategy>,
}

/// Exact maximum of `f` over the deterministic strategies.
pub fn classical_bound(f: &BellFunctional) -> ClassicalBound {
    let mut best: Option<Rational> = None;
    let mut maximizers = Vec::new();
    for s in enumerate_strategies() {
        let v = f
            .evaluate(&strategy_distribution::<Rational>(&s))
            .expect("deterministic boxes are no-signaling");
        match &best {
            Some(b) if v < *b => {}
            Some(b) if v == *b => maximizers.push(s),
            _ => {
                best = Some(v);
                maximizers.clear();
                maximizers.push(s);
            }
        }
    }
    ClassicalBound { max: best.expect("81 strategies"), maximizers }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Membership<T> {
    /// Convex weights over the 81 strategies (enumeration order)
    /// reproducing the distribution.
    Local { weights: Vec<T> },
    /// No local decomposition; carries the optimal phase-one objective.
    Nonlocal { infeasibility: T },
}

impl<T: Scalar> Membership<T> {
    pub fn is_local(&self) -> bool {
        matches!(self, Membership::Local { .. })
    }

    /// Strategies with nonzero weight, paired with their weights.
    pub fn support(&self) -> Vec<(DeterministicStrategy, T)> {
        match self {
            Membership::Local { weights } => enumerate_strategies()
                .into_iter()
                .zip(weights.iter().cloned())
                .filter(|(_, w)| !w.is_zero())
                .collect(),
            Membership::Nonlocal { .. } => Vec::new(),
        }
    }
}

/// Multiplier on `tol` below which a positive float phase-one objective is
/// treated as numerically undecidable rather than as a certificate.
const ILL_CONDITIONED_BAND: f64 = 100.0;

/// Decide whether `dist` is a mixture of deterministic strategies.
///
/// The distribution must be no-signaling (within `tol` for floats,
/// exactly for rationals). Rational input is decided exactly. For floats a
/// phase-one objective in `(tol, 100 tol]` is reported as
/// [`Error::IllConditioned`].
pub fn lp_membership<T: Scalar>(dist: &JointDistribution<T>, tol: f64) -> Result<Membership<T>> {
    let report = dist.check_no_signaling(tol);
    if !report.passed() {
        return Err(Error::Signaling { worst: report.worst.to_f64() });
    }
    let strategies = enumerate_strategies();
    let rows: Vec<Vec<T>> = JointKey::all()
        .map(|k| strategies.iter().map(|s| if s.fires(k) { T::one() } else { T::zero() }).collect())
        .collect();
    match phase_one(&rows, dist.as_slice(), tol) {
        PhaseOne::Feasible(weights) => Ok(Membership::Local { weights }),
        PhaseOne::Infeasible(objective) => {
            let r = objective.to_f64();
            if !T::EXACT && r <= ILL_CONDITIONED_BAND * tol {
                Err(Error::IllConditioned { residual: r })
            } else {
                Ok(Membership::Nonlocal { infeasibility: objective })
            }
        }
    }
}

/// Rebuild a distribution from strategy weights in enumeration order.
pub fn mixture<T: Scalar>(weights: &[T]) -> Vec<T> {
    let strategies = enumerate_strategies();
    JointKey::all()
        .map(|k| {
            strategies
                .iter()
                .zip(weights)
                .filter(|(s, _)| s.fires(k))
                .fold(T::zero(), |acc, (_, w)| acc + w.clone())
        })
        .collect()
}
