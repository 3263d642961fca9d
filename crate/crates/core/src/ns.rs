//! Exact linear algebra over the normalization and no-signaling equations.
//!
//! The 16 equations in 36 unknowns have rank 12, so any 12 probabilities
//! whose columns are independent can be solved for in terms of the other 24.
//! Substituting such a solution into a joint-only functional gives its
//! canonical form on the no-signaling affine set, which is what equivalence
//! proofs compare.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Signed, Zero};

use crate::functional::BellFunctional;
use crate::prob::{FlatIndex, JointDistribution, MarginalSide, Outcome, Party, Rational, Scalar, Setting};
use crate::{Error, Result};

/// Rows 1-4 normalize each setting pair, rows 5-10 equate Alice's marginals
/// across Bob's settings (`i`, then `m`), rows 11-16 do the same for Bob.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintSystem {
    matrix: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
}

pub fn build_constraints() -> ConstraintSystem {
    let mut matrix = Vec::with_capacity(16);
    let mut rhs = Vec::with_capacity(16);
    let zero_row = || alloc::vec![Rational::zero(); 36];

    for i in Setting::ALL {
        for j in Setting::ALL {
            let mut row = zero_row();
            for a in Outcome::ALL {
                for b in Outcome::ALL {
                    row[crate::JointKey::new(i, j, a, b).slot()] = Rational::one();
                }
            }
            matrix.push(row);
            rhs.push(Rational::one());
        }
    }
    for party in [Party::Alice, Party::Bob] {
        for setting in Setting::ALL {
            for outcome in Outcome::ALL {
                let side = MarginalSide { party, setting, outcome };
                let mut row = zero_row();
                for k in side.joint_keys(Setting::ONE) {
                    row[k.slot()] += Rational::one();
                }
                for k in side.joint_keys(Setting::TWO) {
                    row[k.slot()] -= Rational::one();
                }
                matrix.push(row);
                rhs.push(Rational::zero());
            }
        }
    }
    ConstraintSystem { matrix, rhs }
}

impl ConstraintSystem {
    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.matrix
    }

    pub fn rhs(&self) -> &[Rational] {
        &self.rhs
    }

    /// Exact check of all 16 equations.
    pub fn is_satisfied_by(&self, dist: &JointDistribution<Rational>) -> bool {
        self.matrix.iter().zip(&self.rhs).all(|(row, rhs)| {
            let lhs: Rational = row.iter().zip(dist.as_slice()).map(|(c, p)| c * p).sum();
            &lhs == rhs
        })
    }

    pub fn rank(&self) -> usize {
        let mut m = self.matrix.clone();
        let cols: Vec<usize> = (0..36).collect();
        eliminate(&mut m, &cols).len()
    }
}

/// Gauss-Jordan elimination restricted to `pivot_cols`, visited in the given
/// order. For each column the first unused row with a nonzero entry becomes
/// its pivot row. Returns `(column, row)` for every pivot found.
fn eliminate(m: &mut [Vec<Rational>], pivot_cols: &[usize]) -> Vec<(usize, usize)> {
    let mut used = alloc::vec![false; m.len()];
    let mut pivots = Vec::new();
    for &col in pivot_cols {
        let Some(r) = (0..m.len()).find(|&r| !used[r] && !m[r][col].is_zero()) else {
            continue;
        };
        used[r] = true;
        let inv = m[r][col].recip();
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = m[r].clone();
        for (other, row) in m.iter_mut().enumerate() {
            if other == r || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
        pivots.push((col, r));
    }
    pivots
}

/// `constant + sum(coeff * p_k)`, with zero coefficients omitted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AffineExpression {
    pub constant: Rational,
    pub coeffs: BTreeMap<FlatIndex, Rational>,
}

impl AffineExpression {
    pub fn constant(c: Rational) -> Self {
        AffineExpression { constant: c, coeffs: BTreeMap::new() }
    }

    /// Build from a dense 36-vector of coefficients.
    pub fn from_dense(constant: Rational, dense: &[Rational]) -> Self {
        let coeffs = dense
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(s, c)| (FlatIndex::from_slot(s), c.clone()))
            .collect();
        AffineExpression { constant, coeffs }
    }

    /// Parse-free constructor from small integers over a common denominator.
    pub fn from_terms(numer_const: i64, terms: &[(i64, i64)], denom: i64) -> Result<Self> {
        let mut dense = alloc::vec![Rational::zero(); 36];
        for &(k, c) in terms {
            dense[FlatIndex::new(k)?.slot()] += crate::prob::ratio(c, denom);
        }
        Ok(Self::from_dense(crate::prob::ratio(numer_const, denom), &dense))
    }

    pub fn coeff(&self, k: FlatIndex) -> Rational {
        self.coeffs.get(&k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.coeffs.is_empty()
    }

    /// `self + scale * other`.
    pub fn add_scaled(&self, other: &AffineExpression, scale: &Rational) -> AffineExpression {
        let mut out = self.clone();
        out.constant += scale * &other.constant;
        for (k, c) in &other.coeffs {
            let sum = out.coeffs.remove(k).unwrap_or_else(Rational::zero) + scale * c;
            if !sum.is_zero() {
                out.coeffs.insert(*k, sum);
            }
        }
        out
    }

    pub fn evaluate<T: Scalar>(&self, dist: &JointDistribution<T>) -> T {
        self.coeffs
            .iter()
            .fold(T::from_rational(&self.constant), |acc, (k, c)| acc + T::from_rational(c) * dist.p(*k).clone())
    }

    /// Text form used by the CLI, e.g. `1/3 + 1/3*p1 - 2/3*p5`.
    pub fn render(&self) -> String {
        let mut s = String::new();
        if !self.constant.is_zero() {
            s.push_str(&format!("{}", self.constant));
        }
        for (k, c) in &self.coeffs {
            let mag = c.abs();
            let term = if mag.is_one() { format!("{k}") } else { format!("{mag}*{k}") };
            if s.is_empty() {
                if c.is_negative() {
                    s.push('-');
                }
            } else {
                s.push_str(if c.is_negative() { " - " } else { " + " });
            }
            s.push_str(&term);
        }
        if s.is_empty() {
            s.push('0');
        }
        s
    }
}

impl fmt::Display for AffineExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Result of solving the constraints for 12 target probabilities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    targets: Vec<FlatIndex>,
    free: Vec<FlatIndex>,
    exprs: BTreeMap<FlatIndex, AffineExpression>,
}

impl Solution {
    /// Targets in ascending order.
    pub fn targets(&self) -> &[FlatIndex] {
        &self.targets
    }

    /// The 24 free variables in ascending order.
    pub fn free(&self) -> &[FlatIndex] {
        &self.free
    }

    pub fn get(&self, target: FlatIndex) -> Option<&AffineExpression> {
        self.exprs.get(&target)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FlatIndex, &AffineExpression)> {
        self.exprs.iter()
    }

    /// Rewrite `constant + coeffs . p` over the free variables only.
    pub fn substitute(&self, constant: &Rational, dense: &[Rational]) -> AffineExpression {
        let mut free_part = dense.to_vec();
        for t in &self.targets {
            free_part[t.slot()] = Rational::zero();
        }
        let mut out = AffineExpression::from_dense(constant.clone(), &free_part);
        for t in &self.targets {
            let c = &dense[t.slot()];
            if !c.is_zero() {
                out = out.add_scaled(&self.exprs[t], c);
            }
        }
        out
    }
}

/// Parse a list of flat indices into a validated 12-element target set.
pub fn target_set(indices: &[i64]) -> Result<Vec<FlatIndex>> {
    let mut out = indices.iter().map(|&k| FlatIndex::new(k)).collect::<Result<Vec<_>>>()?;
    out.sort();
    out.dedup();
    if out.len() != 12 || indices.len() != 12 {
        return Err(Error::InvalidTargets(format!("{} indices given, {} distinct", indices.len(), out.len())));
    }
    Ok(out)
}

/// Express each target as an affine function of the 24 non-targets.
pub fn solve_for(sys: &ConstraintSystem, targets: &[FlatIndex]) -> Result<Solution> {
    let mut targets = targets.to_vec();
    targets.sort();
    targets.dedup();
    if targets.len() != 12 {
        return Err(Error::InvalidTargets(format!("need 12 distinct indices, got {}", targets.len())));
    }

    // augmented [A | rhs]
    let mut m: Vec<Vec<Rational>> = sys
        .matrix
        .iter()
        .zip(&sys.rhs)
        .map(|(row, r)| {
            let mut row = row.clone();
            row.push(r.clone());
            row
        })
        .collect();
    let cols: Vec<usize> = targets.iter().map(|t| t.slot()).collect();
    let pivots = eliminate(&mut m, &cols);

    if pivots.len() < targets.len() {
        let pivot_cols: Vec<usize> = pivots.iter().map(|(c, _)| *c).collect();
        let missing = *cols.iter().find(|c| !pivot_cols.contains(c)).expect("a target without a pivot");
        let mut dependent: Vec<FlatIndex> = pivots
            .iter()
            .filter(|(_, r)| !m[*r][missing].is_zero())
            .map(|(c, _)| FlatIndex::from_slot(*c))
            .collect();
        dependent.push(FlatIndex::from_slot(missing));
        dependent.sort();
        return Err(Error::UnsolvableSelection { dependent });
    }
    debug_assert!(
        (0..m.len()).filter(|r| !pivots.iter().any(|(_, pr)| pr == r)).all(|r| m[r].iter().all(Zero::is_zero)),
        "constraint rank exceeds 12"
    );

    let free: Vec<FlatIndex> = FlatIndex::all().filter(|k| !targets.contains(k)).collect();
    let mut exprs = BTreeMap::new();
    for (col, row) in pivots {
        let mut coeffs = BTreeMap::new();
        for f in &free {
            let c = &m[row][f.slot()];
            if !c.is_zero() {
                coeffs.insert(*f, -c);
            }
        }
        exprs.insert(FlatIndex::from_slot(col), AffineExpression { constant: m[row][36].clone(), coeffs });
    }
    Ok(Solution { targets, free, exprs })
}

fn require_joint_only(f: &BellFunctional) -> Result<()> {
    if f.is_joint_only() {
        Ok(())
    } else {
        Err(Error::MarginalTermsPresent(f.name().into()))
    }
}

/// Canonical form of a joint-only functional over the free variables of
/// `targets`.
pub fn reduce_functional(sys: &ConstraintSystem, f: &BellFunctional, targets: &[FlatIndex]) -> Result<AffineExpression> {
    require_joint_only(f)?;
    let sol = solve_for(sys, targets)?;
    Ok(sol.substitute(&Rational::zero(), &f.joint_vector()))
}

/// Find `(scale, offset)` with `f = scale * g + offset` on every
/// distribution satisfying the constraints, or `None` if no such pair
/// exists.
///
/// Solved as one linear system in `(mu_1..mu_16, scale)`:
/// `f - scale * g = sum mu_r * row_r`, after which `offset = sum mu_r * rhs_r`.
/// When `g` is itself constant on the constraint set, the returned scale is 0.
pub fn affine_relation(sys: &ConstraintSystem, f: &BellFunctional, g: &BellFunctional) -> Result<Option<(Rational, Rational)>> {
    require_joint_only(f)?;
    require_joint_only(g)?;
    let fv = f.joint_vector();
    let gv = g.joint_vector();
    let n_rows = sys.matrix.len();
    // 36 equations; unknown columns mu_1..mu_16 then scale; last column is f.
    let mut m: Vec<Vec<Rational>> = (0..36)
        .map(|c| {
            let mut eq: Vec<Rational> = sys.matrix.iter().map(|row| row[c].clone()).collect();
            eq.push(gv[c].clone());
            eq.push(fv[c].clone());
            eq
        })
        .collect();
    let unknowns: Vec<usize> = (0..=n_rows).collect();
    let pivots = eliminate(&mut m, &unknowns);

    let used: Vec<usize> = pivots.iter().map(|(_, r)| *r).collect();
    let consistent = (0..36).filter(|r| !used.contains(r)).all(|r| m[r][n_rows + 1].is_zero());
    if !consistent {
        return Ok(None);
    }
    let mut x = alloc::vec![Rational::zero(); n_rows + 1];
    for (col, row) in pivots {
        x[col] = m[row][n_rows + 1].clone();
    }
    let offset: Rational = x[..n_rows].iter().zip(&sys.rhs).map(|(mu, r)| mu * r).sum();
    Ok(Some((x[n_rows].clone(), offset)))
}

/// Canonical form of `f - scale * g - offset` under the elimination of
/// `targets`. Zero exactly when the relation holds.
pub fn residual(
    sys: &ConstraintSystem,
    f: &BellFunctional,
    g: &BellFunctional,
    scale: &Rational,
    offset: &Rational,
    targets: &[FlatIndex],
) -> Result<AffineExpression> {
    require_joint_only(f)?;
    require_joint_only(g)?;
    let sol = solve_for(sys, targets)?;
    let diff = f.minus_scaled(g, scale, "residual");
    Ok(sol.substitute(&-offset, &diff.joint_vector()))
}

/// For functionals that are not affinely related: the `(scale, offset)` that
/// leaves the residual `f - scale * g - offset` with the fewest free-variable
/// terms under `targets`, together with that residual.
///
/// Candidate scales are those that cancel one coefficient of `g`'s reduced
/// form, plus 0; ties keep the earliest candidate in free-variable order.
pub fn sparsest_residual(
    sys: &ConstraintSystem,
    f: &BellFunctional,
    g: &BellFunctional,
    targets: &[FlatIndex],
) -> Result<(Rational, Rational, AffineExpression)> {
    let rf = reduce_functional(sys, f, targets)?;
    let rg = reduce_functional(sys, g, targets)?;
    let mut candidates = alloc::vec![Rational::zero()];
    for (k, cg) in &rg.coeffs {
        let s = rf.coeff(*k) / cg;
        if !candidates.contains(&s) {
            candidates.push(s);
        }
    }
    let mut best: Option<(Rational, AffineExpression)> = None;
    for s in candidates {
        let r = rf.add_scaled(&rg, &-s.clone());
        if best.as_ref().is_none_or(|(_, b)| r.coeffs.len() < b.coeffs.len()) {
            best = Some((s, r));
        }
    }
    let (scale, mut r) = best.expect("at least one candidate");
    let offset = r.constant.clone();
    r.constant = Rational::zero();
    Ok((scale, offset, r))
}
