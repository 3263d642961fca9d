//! Bell functionals for two parties, two settings and three outcomes.
//!
//! The crate covers three layers of the CH/CHSH story for a pair of qutrits:
//!
//! * [`prob`] and [`functional`]: joint distributions in the `p1..p36` index
//!   convention and the linear Bell forms evaluated on them (the CGLMP family,
//!   the CH forms `K3`, `K3'`, `W3` and the 36-member `W` family).
//! * [`ns`]: exact rational elimination over the 16 normalization and
//!   no-signaling equations, used to prove or refute affine equivalences such
//!   as `I3 = 2 + 3 K3`.
//! * [`quantum`], [`robustness`] and [`lhv`]: quantum predictions for the
//!   six-port measurement family, noise and detector-efficiency thresholds,
//!   and the local-polytope oracle (81 deterministic strategies plus an LP).
//!
//! Everything here is `no_std` with `alloc`. File formats and the command
//! line live in the `bell3` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;
pub mod functional;
pub mod lhv;
pub mod ns;
pub mod prob;
pub mod quantum;
pub mod robustness;
mod simplex;

pub use error::Error;
pub use functional::{BellFunctional, CglmpChoice, MarginalChoice, WFamilyChoice};
pub use ns::{AffineExpression, ConstraintSystem, Solution};
pub use prob::{
    FlatIndex, JointDistribution, JointKey, MarginalSide, Outcome, Party, Rational, Scalar,
    Setting,
};

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Default tolerance for float-backed validity checks (normalization,
/// nonnegativity, no-signaling).
pub const DEFAULT_TOL: f64 = 1e-9;
