use alloc::string::String;
use alloc::vec::Vec;

use crate::prob::{FlatIndex, MarginalSide, Setting};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("setting must be 1 or 2, got {0}")]
    InvalidSetting(i64),
    #[error("outcome must be 1, 2 or 3, got {0}")]
    InvalidOutcome(i64),
    #[error("flat index must be in 1..=36, got {0}")]
    InvalidFlatIndex(i64),
    #[error("expected 36 probabilities, got {0}")]
    WrongLength(usize),

    #[error("probability {index} is negative ({value:e})")]
    NegativeProbability { index: FlatIndex, value: f64 },
    #[error("setting pair ({i},{j}) sums to {sum} instead of 1")]
    NotNormalized { i: Setting, j: Setting, sum: f64 },
    #[error("distribution is signaling (worst marginal mismatch {worst:e}); marginal terms are ambiguous")]
    Signaling { worst: f64 },

    #[error("CGLMP choice ({0},{1},{2},{3}) is invalid: entries must be in {{-1,0,1}} with sum != 0 mod 3", c[0], c[1], c[2], c[3])]
    InvalidCglmpChoice { c: [i8; 4] },
    #[error("W-family choice out of range: alpha, beta in {{0,1}}, x, y in {{0,1,2}}")]
    InvalidWFamilyChoice,
    #[error("no partner setting chosen for marginal term {0}")]
    MissingMarginalChoice(MarginalSide),
    #[error("functional {0} carries marginal terms; expand them first")]
    MarginalTermsPresent(String),

    #[error("target set must hold 12 distinct indices in 1..=36: {0}")]
    InvalidTargets(String),
    #[error("unsolvable selection: targets {} are linearly dependent modulo the constraints", render_indices(dependent))]
    UnsolvableSelection { dependent: Vec<FlatIndex> },

    #[error("state is not normalized (squared norm {norm})")]
    UnnormalizedState { norm: f64 },
    #[error("{name} must lie in [0, 1], got {value}")]
    OutOfUnitInterval { name: &'static str, value: f64 },
    #[error("I3 = {value} does not exceed the local bound 2: no violation at any {parameter}")]
    NoViolation { value: f64, parameter: &'static str },
    #[error("theta = {theta} rad lies outside the violation interval (arctan(sqrt(3/8)), pi/2)")]
    OutsideViolationInterval { theta: f64 },
    #[error("K3 = {k3} is not (I3 - 2)/3 for I3 = {i3}")]
    InconsistentPrediction { i3: f64, k3: f64 },

    #[error("float LP is ill-conditioned (phase-1 residual {residual:e}); retry with rational input")]
    IllConditioned { residual: f64 },
}

fn render_indices(ix: &[FlatIndex]) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    for (n, k) in ix.iter().enumerate() {
        if n > 0 {
            s.push_str(", ");
        }
        let _ = write!(s, "{k}");
    }
    s
}
