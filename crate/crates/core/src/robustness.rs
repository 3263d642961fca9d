//! Robustness of a violation against white noise and against finite
//! detection efficiency.
//!
//! White noise mixes a box with the uniform distribution,
//! `lambda * p + (1 - lambda) / 9`. Finite efficiency `eta` turns each
//! three-outcome measurement into a four-outcome one with an extra
//! no-click outcome, producing an [`ExtendedDistribution`].

use alloc::vec::Vec;

// Float supplies the libm-backed math methods when std is absent.
#[allow(unused_imports)]
use num_traits::Float;

use crate::functional::{i3_functional, BellFunctional};
use crate::prob::{uniform_distribution, JointDistribution, JointKey, Outcome, Party, Scalar, Setting};
use crate::quantum::{i3_optimal, k3_optimal, violation_interval};
use crate::{Error, Result, DEFAULT_TOL};

fn check_unit(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::OutOfUnitInterval { name, value })
    }
}

/// `lambda * dist + (1 - lambda) * uniform`.
pub fn noisy_distribution<T: Scalar>(dist: &JointDistribution<T>, lambda: &T) -> Result<JointDistribution<T>> {
    check_unit("lambda", lambda.to_f64())?;
    let uniform = uniform_distribution();
    let noise = JointDistribution::from_array_unchecked(core::array::from_fn(|s| T::from_rational(&uniform.as_slice()[s])));
    Ok(dist.mix(&noise, lambda))
}

/// Smallest visibility that keeps `I3 > 2`: `2 / I3`, since the uniform
/// distribution scores zero.
pub fn noise_threshold(i3: f64) -> Result<f64> {
    if i3 <= 2.0 {
        return Err(Error::NoViolation { value: i3, parameter: "lambda" });
    }
    Ok(2.0 / i3)
}

/// `(eta^2 I3, eta^2 K3 + (4/3) eta (eta - 1))`.
///
/// `k3` must equal `(I3 - 2)/3` to `1e-9`, the relation that holds on every
/// no-signaling box.
pub fn eta_scaled_values(i3: f64, k3: f64, eta: f64) -> Result<(f64, f64)> {
    check_unit("eta", eta)?;
    if (k3 - (i3 - 2.0) / 3.0).abs() > 1e-9 {
        return Err(Error::InconsistentPrediction { i3, k3 });
    }
    let i3_eta = eta * eta * i3;
    let k3_eta = eta * eta * k3 + 4.0 / 3.0 * eta * (eta - 1.0);
    Ok((i3_eta, k3_eta))
}

/// Efficiency above which `eta^2 I3 > 2`: `sqrt(2 / I3)`.
pub fn efficiency_threshold_chsh(i3: f64) -> Result<f64> {
    if i3 <= 2.0 {
        return Err(Error::NoViolation { value: i3, parameter: "eta" });
    }
    Ok((2.0 / i3).sqrt())
}

/// Efficiency above which the marginal-corrected expression stays
/// positive: `4 / (2 + I3)`.
pub fn efficiency_threshold_ch(i3: f64) -> Result<f64> {
    if i3 <= 2.0 {
        return Err(Error::NoViolation { value: i3, parameter: "eta" });
    }
    Ok(4.0 / (2.0 + i3))
}

/// `eta^2 I3 + 2 (1 - eta)^2`, the value of [`s3_value`] for a box with
/// Bell value `I3` seen through detectors of efficiency `eta`.
pub fn s3_closed_form(i3: f64, eta: f64) -> f64 {
    eta * eta * i3 + 2.0 * (1.0 - eta).powi(2)
}

/// An outcome of a lossy detector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Detection {
    Click(Outcome),
    NoClick,
}

impl Detection {
    pub const ALL: [Detection; 4] = [
        Detection::Click(Outcome::ALL[0]),
        Detection::Click(Outcome::ALL[1]),
        Detection::Click(Outcome::ALL[2]),
        Detection::NoClick,
    ];

    fn slot(self) -> usize {
        match self {
            Detection::Click(o) => o.zero_based(),
            Detection::NoClick => 3,
        }
    }
}

fn pair_slot(i: Setting, j: Setting) -> usize {
    2 * i.zero_based() + j.zero_based()
}

/// Four-outcome statistics `q^{ij}(a, b)`, `a, b` in `{1, 2, 3, none}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedDistribution {
    q: [[[f64; 4]; 4]; 4],
}

impl ExtendedDistribution {
    pub fn get(&self, i: Setting, j: Setting, a: Detection, b: Detection) -> f64 {
        self.q[pair_slot(i, j)][a.slot()][b.slot()]
    }

    pub fn pair_total(&self, i: Setting, j: Setting) -> f64 {
        self.q[pair_slot(i, j)].iter().flatten().sum()
    }

    /// Marginal of `party` at `setting` with partner setting `partner`.
    pub fn marginal(&self, party: Party, setting: Setting, outcome: Detection, partner: Setting) -> f64 {
        match party {
            Party::Alice => Detection::ALL.iter().map(|&b| self.get(setting, partner, outcome, b)).sum(),
            Party::Bob => Detection::ALL.iter().map(|&a| self.get(partner, setting, a, outcome)).sum(),
        }
    }

    /// Largest mismatch of any four-outcome marginal across partner settings.
    pub fn no_signaling_gap(&self) -> f64 {
        let mut worst = 0.0f64;
        for party in [Party::Alice, Party::Bob] {
            for s in Setting::ALL {
                for o in Detection::ALL {
                    let gap = self.marginal(party, s, o, Setting::ONE) - self.marginal(party, s, o, Setting::TWO);
                    worst = worst.max(gap.abs());
                }
            }
        }
        worst
    }

    /// The 36 both-clicked entries in flat-index order. They sum to `eta^2`
    /// per setting pair, not to one.
    pub fn detected_body(&self) -> [f64; 36] {
        let keys: Vec<JointKey> = JointKey::all().collect();
        core::array::from_fn(|s| {
            let k = keys[s];
            self.get(k.i, k.j, Detection::Click(k.a), Detection::Click(k.b))
        })
    }

    /// Evaluate `f` term by term: joint terms on the both-clicked entries and
    /// marginal terms on the four-outcome marginals of clicked outcomes,
    /// averaged over the partner setting.
    pub fn evaluate(&self, f: &BellFunctional) -> Result<f64> {
        let gap = self.no_signaling_gap();
        if gap > DEFAULT_TOL {
            return Err(Error::Signaling { worst: gap });
        }
        let mut value = 0.0;
        for (k, c) in f.joint_coeffs() {
            value += c.to_f64() * self.get(k.i, k.j, Detection::Click(k.a), Detection::Click(k.b));
        }
        for (side, c) in f.marginal_coeffs() {
            let o = Detection::Click(side.outcome);
            let m = (self.marginal(side.party, side.setting, o, Setting::ONE)
                + self.marginal(side.party, side.setting, o, Setting::TWO))
                / 2.0;
            value += c.to_f64() * m;
        }
        Ok(value)
    }
}

/// Statistics of a no-signaling box seen through detectors of efficiency
/// `eta` on both sides, each failing independently:
/// `q(a,b) = eta^2 p(a,b)`, `q(a,none) = eta(1-eta) P(a)`,
/// `q(none,b) = eta(1-eta) Q(b)`, `q(none,none) = (1-eta)^2`.
pub fn extended_distribution(dist: &JointDistribution<f64>, eta: f64) -> Result<ExtendedDistribution> {
    check_unit("eta", eta)?;
    let report = dist.check_no_signaling(DEFAULT_TOL);
    if !report.passed() {
        return Err(Error::Signaling { worst: report.worst });
    }
    let miss = 1.0 - eta;
    let mut q = [[[0.0; 4]; 4]; 4];
    for i in Setting::ALL {
        for j in Setting::ALL {
            let block = &mut q[pair_slot(i, j)];
            for a in Outcome::ALL {
                for b in Outcome::ALL {
                    block[a.zero_based()][b.zero_based()] = eta * eta * dist.get(JointKey::new(i, j, a, b));
                }
                let pa = dist.marginal(crate::MarginalSide::alice(i, a), j);
                block[a.zero_based()][3] = eta * miss * pa;
            }
            for b in Outcome::ALL {
                let qb = dist.marginal(crate::MarginalSide::bob(j, b), i);
                block[3][b.zero_based()] = eta * miss * qb;
            }
            block[3][3] = miss * miss;
        }
    }
    Ok(ExtendedDistribution { q })
}

/// `I3` on the both-clicked entries plus half the total double no-click
/// weight over the four setting pairs.
pub fn s3_value(ext: &ExtendedDistribution) -> f64 {
    let body = ext.detected_body();
    let i3: f64 = i3_functional()
        .joint_coeffs()
        .iter()
        .map(|(k, c)| c.to_f64() * body[k.flat_index().get() - 1])
        .sum();
    let none: f64 = Setting::ALL
        .iter()
        .flat_map(|&i| Setting::ALL.iter().map(move |&j| (i, j)))
        .map(|(i, j)| ext.get(i, j, Detection::NoClick, Detection::NoClick))
        .sum();
    i3 + none / 2.0
}

/// Noise and efficiency thresholds of the family state at optimal settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdReport {
    pub theta: f64,
    pub i3: f64,
    pub k3: f64,
    pub lambda_min: f64,
    pub eta_ch: f64,
    pub eta_chsh: f64,
}

/// Thresholds at `theta` (radians), which must lie strictly inside the
/// violation interval.
pub fn threshold_report(theta: f64) -> Result<ThresholdReport> {
    let (lo, hi) = violation_interval();
    if !(theta > lo && theta < hi) {
        return Err(Error::OutsideViolationInterval { theta });
    }
    let i3 = i3_optimal(theta);
    Ok(ThresholdReport {
        theta,
        i3,
        k3: k3_optimal(theta),
        lambda_min: noise_threshold(i3)?,
        eta_ch: efficiency_threshold_ch(i3)?,
        eta_chsh: efficiency_threshold_chsh(i3)?,
    })
}

/// Root of `f` on `[lo, hi]` by bisection to width `tol`; `None` if `f`
/// does not change sign on the bracket.
pub fn bisect_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_lo * f(hi) > 0.0 {
        return None;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Some(mid);
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}
