//! Shared fixtures for the integration and acceptance tests.
#![allow(dead_code)]

use bell3_core::functional::BellFunctional;
use bell3_core::lhv::DeterministicStrategy;
use bell3_core::ns::AffineExpression;
use bell3_core::{Outcome, Party, Rational, Setting};

// Published solved forms, each `(target, terms)` meaning
// `p_target = (1 + sum c * p_k) / 3`.

pub const ELIMINATION_SET: [i64; 12] = [3, 4, 8, 11, 15, 16, 21, 22, 26, 30, 31, 35];
pub const ELIMINATION_SET_SOLUTIONS: &[(i64, &[(i64, i64)])] = &[
    (22, &[(1, 1), (2, -1), (5, -2), (6, -1), (7, 2), (9, 1), (10, 1), (12, -1), (13, 2), (14, 1), (17, -1), (18, -2), (19, -1), (20, 1), (23, -1), (24, -2), (25, -2), (27, -1), (28, -2), (29, -1), (32, 1), (33, 2), (34, -1), (36, 1)]),
    (35, &[(1, 1), (2, 2), (5, 1), (6, -1), (7, -1), (9, -2), (10, -2), (12, -1), (13, -1), (14, 1), (17, 2), (18, 1), (19, -1), (20, -2), (23, -1), (24, 1), (25, 1), (27, 2), (28, 1), (29, -1), (32, -2), (33, -1), (34, -1), (36, -2)]),
];

pub const PRIME_SET: [i64; 12] = [3, 4, 8, 12, 13, 17, 20, 24, 25, 30, 31, 35];
pub const PRIME_SET_SOLUTIONS: &[(i64, &[(i64, i64)])] = &[
    (13, &[(1, -2), (2, -1), (5, 1), (6, 2), (7, -1), (9, 1), (10, -1), (11, 1), (14, -1), (15, -2), (16, -2), (18, -1), (19, 1), (21, -1), (22, 2), (23, 1), (26, -1), (27, -2), (28, 1), (29, -1), (32, -2), (33, -1), (34, 2), (36, 1)]),
    (20, &[(1, 1), (2, 2), (5, 1), (6, -1), (7, -1), (9, -2), (10, -1), (11, -2), (14, -1), (15, 1), (16, 1), (18, 2), (19, -2), (21, -1), (22, -1), (23, -2), (26, -1), (27, 1), (28, 1), (29, 2), (32, 1), (33, -1), (34, -1), (36, -2)]),
];

pub const WIDE_SET: [i64; 12] = [2, 4, 9, 11, 13, 18, 20, 24, 25, 28, 32, 36];
pub const WIDE_SET_SOLUTIONS: &[(i64, &[(i64, i64)])] = &[
    (2, &[(1, -2), (3, -1), (5, -1), (6, 1), (7, -1), (8, -2), (10, 2), (12, 1), (14, -2), (15, -1), (16, 1), (17, -1), (19, -1), (21, -2), (22, 1), (23, 2), (26, 1), (27, -1), (29, 2), (30, 1), (31, -2), (33, -1), (34, -1), (35, 1)]),
    (9, &[(1, 1), (3, -1), (5, -1), (6, -2), (7, -1), (8, -2), (10, -1), (12, -2), (14, 1), (15, -1), (16, 1), (17, 2), (19, -1), (21, 1), (22, -2), (23, -1), (26, 1), (27, 2), (29, -1), (30, 1), (31, 1), (33, 2), (34, -1), (35, -2)]),
    (13, &[(1, -2), (3, -1), (5, 2), (6, 1), (7, -1), (8, 1), (10, -1), (12, 1), (14, -2), (15, -1), (16, -2), (17, -1), (19, 2), (21, 1), (22, 1), (23, -1), (26, -2), (27, -1), (29, -1), (30, -2), (31, 1), (33, -1), (34, 2), (35, 1)]),
    (18, &[(1, 1), (3, -1), (5, -1), (6, -2), (7, 2), (8, 1), (10, -1), (12, -2), (14, 1), (15, -1), (16, -2), (17, -1), (19, -1), (21, 1), (22, -2), (23, -1), (26, 1), (27, 2), (29, -1), (30, 1), (31, 1), (33, 2), (34, -1), (35, -2)]),
    (20, &[(1, -2), (3, -1), (5, 2), (6, 1), (7, -1), (8, 1), (10, 2), (12, 1), (14, -2), (15, -1), (16, 1), (17, -1), (19, -1), (21, -2), (22, 1), (23, -1), (26, -2), (27, -1), (29, 2), (30, 1), (31, -2), (33, -1), (34, -1), (35, 1)]),
    (24, &[(1, 1), (3, 2), (5, -1), (6, 1), (7, -1), (8, -2), (10, -1), (12, -2), (14, 1), (15, -1), (16, 1), (17, 2), (19, -1), (21, -2), (22, -2), (23, -1), (26, 1), (27, -1), (29, -1), (30, 1), (31, 1), (33, 2), (34, -1), (35, -2)]),
    (25, &[(1, 1), (3, -1), (5, -1), (6, -2), (7, 2), (8, 1), (10, -1), (12, 1), (14, 1), (15, 2), (16, -2), (17, -1), (19, -1), (21, 1), (22, -2), (23, -1), (26, -2), (27, -1), (29, -1), (30, -2), (31, 1), (33, -1), (34, 2), (35, 1)]),
    (28, &[(1, -2), (3, -1), (5, 2), (6, 1), (7, -1), (8, 1), (10, 2), (12, 1), (14, -2), (15, -1), (16, 1), (17, -1), (19, 2), (21, 1), (22, 1), (23, -1), (26, -2), (27, -1), (29, -1), (30, -2), (31, -2), (33, -1), (34, -1), (35, 1)]),
    (32, &[(1, 1), (3, 2), (5, -1), (6, 1), (7, -1), (8, -2), (10, -1), (12, -2), (14, 1), (15, -1), (16, 1), (17, 2), (19, -1), (21, -2), (22, 1), (23, 2), (26, 1), (27, -1), (29, -1), (30, 1), (31, -2), (33, -1), (34, -1), (35, -2)]),
    (36, &[(1, 1), (3, -1), (5, -1), (6, -2), (7, 2), (8, 1), (10, -1), (12, 1), (14, 1), (15, 2), (16, -2), (17, -1), (19, -1), (21, 1), (22, -2), (23, -1), (26, 1), (27, 2), (29, -1), (30, -2), (31, 1), (33, -1), (34, -1), (35, -2)]),
];
/// `(1 + sum c * p_k) / 3`.
pub fn third_form(terms: &[(i64, i64)]) -> AffineExpression {
    AffineExpression::from_terms(1, terms, 3).expect("valid indices")
}

fn outcome(v: u8) -> Outcome {
    Outcome::new(i64::from(v)).unwrap()
}

/// Independent brute force: value of `f` on the strategy `(a1, a2, b1, b2)`
/// read directly off the coefficient tables.
pub fn deterministic_value(f: &BellFunctional, s: [u8; 4]) -> Rational {
    let alice = |i: Setting| outcome(s[usize::from(i.value()) - 1]);
    let bob = |j: Setting| outcome(s[usize::from(j.value()) + 1]);
    let mut v = Rational::default();
    for (k, c) in f.joint_coeffs() {
        if alice(k.i) == k.a && bob(k.j) == k.b {
            v += c;
        }
    }
    for (side, c) in f.marginal_coeffs() {
        let fired = match side.party {
            Party::Alice => alice(side.setting) == side.outcome,
            Party::Bob => bob(side.setting) == side.outcome,
        };
        if fired {
            v += c;
        }
    }
    v
}

/// Maximum over the 81 strategies and every maximizing strategy.
pub fn brute_force_bound(f: &BellFunctional) -> (Rational, Vec<[u8; 4]>) {
    let mut all = Vec::new();
    for a1 in 1..=3 {
        for a2 in 1..=3 {
            for b1 in 1..=3 {
                for b2 in 1..=3 {
                    let s = [a1, a2, b1, b2];
                    all.push((deterministic_value(f, s), s));
                }
            }
        }
    }
    let max = all.iter().map(|(v, _)| v.clone()).max().unwrap();
    let argmax = all.into_iter().filter(|(v, _)| *v == max).map(|(_, s)| s).collect();
    (max, argmax)
}

pub fn strategy_labels(s: &DeterministicStrategy) -> [u8; 4] {
    [s.a1.value(), s.a2.value(), s.b1.value(), s.b2.value()]
}
