//! Quantum predictions for the state family
//! `cos(theta)|22> + sin(theta)/sqrt(2) (|11> + |33>)` measured with
//! six-port phase unitaries followed by a computational-basis readout.
//!
//! Joint probabilities come from two independent routes: the Born rule on
//! `(U_A ⊗ U_B)|psi>` for arbitrary states, and the closed trigonometric
//! form valid for the family. `I3` has its own closed form in the four
//! phases; under the optimal phase relations it collapses to
//! `2 sin^2(theta) + 2 sqrt(2/3) sin(2 theta)`.

use core::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_6, PI, SQRT_2};

use num_complex::Complex64;
use num_traits::{Float, Zero};

use crate::prob::{JointDistribution, JointKey, Outcome, Party, Setting};
use crate::{Error, Result, DEFAULT_TOL};

pub type Mat3 = [[Complex64; 3]; 3];

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Normalization tolerance for [`TwoQutritState::new`].
pub const STATE_NORM_TOL: f64 = 1e-12;

/// Nine amplitudes `c[a][b]` (0-based inside), normalized.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoQutritState {
    amps: Mat3,
}

impl TwoQutritState {
    pub fn new(amps: Mat3) -> Result<Self> {
        let norm: f64 = amps.iter().flatten().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::UnnormalizedState { norm });
        }
        Ok(TwoQutritState { amps })
    }

    pub fn amplitude(&self, a: Outcome, b: Outcome) -> Complex64 {
        self.amps[a.zero_based()][b.zero_based()]
    }

    pub fn amplitudes(&self) -> &Mat3 {
        &self.amps
    }
}

/// The family state at angle `theta` (radians).
pub fn family_state(theta: f64) -> TwoQutritState {
    let mut amps = [[Complex64::zero(); 3]; 3];
    let side = theta.sin() / SQRT_2;
    amps[1][1] = Complex64::new(theta.cos(), 0.0);
    amps[0][0] = Complex64::new(side, 0.0);
    amps[2][2] = Complex64::new(side, 0.0);
    TwoQutritState { amps }
}

/// `theta` with `cos(theta) = 1/sqrt(3)`: the maximally entangled member.
pub fn maximally_entangled_theta() -> f64 {
    (1.0 / SQRT_3).acos()
}

/// Maximizer of `2 sin^2 + 2 sqrt(2/3) sin 2theta` on `(0, pi/2)`:
/// `tan(2 theta) = -sqrt(8/3)` with `2 theta` in the second quadrant.
pub fn theta_max() -> f64 {
    (PI - (8.0f64 / 3.0).sqrt().atan()) / 2.0
}

/// Open interval of `theta` on which the optimal settings violate `I3 <= 2`.
pub fn violation_interval() -> (f64, f64) {
    ((3.0f64 / 8.0).sqrt().atan(), FRAC_PI_2)
}

/// Closed-form amplitudes of the maximal-violation state:
/// `sqrt((11 - sqrt33)/22)` on `|22>` and `sqrt((11 + sqrt33)/44)` on
/// `|11>` and `|33>`.
pub fn max_violation_amplitudes() -> (f64, f64) {
    let s33 = 33.0f64.sqrt();
    (((11.0 - s33) / 22.0).sqrt(), ((11.0 + s33) / 44.0).sqrt())
}

/// Local phases `alpha_1, alpha_2` (Alice) and `beta_1, beta_2` (Bob), radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseSettings {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl PhaseSettings {
    pub fn new(alpha1: f64, alpha2: f64, beta1: f64, beta2: f64) -> Self {
        PhaseSettings { alpha1, alpha2, beta1, beta2 }
    }

    pub fn alice(&self, s: Setting) -> f64 {
        if s == Setting::ONE { self.alpha1 } else { self.alpha2 }
    }

    pub fn bob(&self, s: Setting) -> f64 {
        if s == Setting::ONE { self.beta1 } else { self.beta2 }
    }

    /// `phi_ij = alpha_i + beta_j`.
    pub fn phi(&self, i: Setting, j: Setting) -> f64 {
        self.alice(i) + self.bob(j)
    }
}

/// `alpha2 = alpha1 + pi/3`, `beta1 = -alpha1 + pi/6`, `beta2 = -alpha1 - pi/6`.
pub fn optimal_settings(alpha1: f64) -> PhaseSettings {
    PhaseSettings {
        alpha1,
        alpha2: alpha1 + FRAC_PI_3,
        beta1: -alpha1 + FRAC_PI_6,
        beta2: -alpha1 - FRAC_PI_6,
    }
}

/// Six-port unitary with phase `phase`. Column `c` carries `e^{i c phase}`;
/// Alice's rows 2 and 3 use `(lambda, mu)` and `(mu, lambda)`, Bob's the
/// swapped pattern, with `lambda = e^{2 pi i / 3}`, `mu = conj(lambda)`.
pub fn sixport_unitary(party: Party, phase: f64) -> Mat3 {
    let lambda = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    let mu = Complex64::from_polar(1.0, 4.0 * PI / 3.0);
    let one = Complex64::new(1.0, 0.0);
    let pattern = match party {
        Party::Alice => [[one, one, one], [one, lambda, mu], [one, mu, lambda]],
        Party::Bob => [[one, one, one], [one, mu, lambda], [one, lambda, mu]],
    };
    let scale = 1.0 / SQRT_3;
    let mut u = [[Complex64::zero(); 3]; 3];
    for (r, row) in pattern.iter().enumerate() {
        for (c, w) in row.iter().enumerate() {
            u[r][c] = w * Complex64::from_polar(scale, c as f64 * phase);
        }
    }
    u
}

fn matmul(x: &Mat3, y: &Mat3) -> Mat3 {
    let mut out = [[Complex64::zero(); 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            out[r][c] = (0..3).map(|k| x[r][k] * y[k][c]).sum();
        }
    }
    out
}

fn transpose(x: &Mat3) -> Mat3 {
    let mut out = *x;
    for r in 0..3 {
        for c in 0..3 {
            out[r][c] = x[c][r];
        }
    }
    out
}

pub fn adjoint(x: &Mat3) -> Mat3 {
    let mut out = transpose(x);
    for v in out.iter_mut().flatten() {
        *v = v.conj();
    }
    out
}

/// `max |(U U^dagger)_{rc} - delta_{rc}|`.
pub fn unitarity_defect(u: &Mat3) -> f64 {
    let p = matmul(u, &adjoint(u));
    let mut worst = 0.0f64;
    for (r, row) in p.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((v - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Born-rule probabilities `|<m n| U_A^i ⊗ U_B^j |psi>|^2`.
pub fn born_distribution(state: &TwoQutritState, settings: &PhaseSettings) -> JointDistribution<f64> {
    let mut p = [0.0; 36];
    for i in Setting::ALL {
        let ua = sixport_unitary(Party::Alice, settings.alice(i));
        for j in Setting::ALL {
            let ub = sixport_unitary(Party::Bob, settings.bob(j));
            // (U_A ⊗ U_B) vec(C) = vec(U_A C U_B^T)
            let out = matmul(&matmul(&ua, &state.amps), &transpose(&ub));
            for a in Outcome::ALL {
                for b in Outcome::ALL {
                    p[JointKey::new(i, j, a, b).slot()] = out[a.zero_based()][b.zero_based()].norm_sqr();
                }
            }
        }
    }
    JointDistribution::from_flat(p.to_vec(), DEFAULT_TOL).expect("Born probabilities are normalized")
}

/// The three distinct values `(equal, b = a + 1, b = a - 1)` of the family
/// prediction for total phase `phi`.
fn closed_form_cells(theta: f64, phi: f64) -> (f64, f64, f64) {
    let s2 = theta.sin().powi(2);
    let s2t = (2.0 * theta).sin();
    let (c1, sn1) = (phi.cos(), phi.sin());
    let (c2, sn2) = ((2.0 * phi).cos(), (2.0 * phi).sin());
    let same = (1.0 + s2 * c2 + SQRT_2 * s2t * c1) / 9.0;
    let up = (1.0 - 0.5 * s2 * (c2 + SQRT_3 * sn2) - s2t / SQRT_2 * (c1 - SQRT_3 * sn1)) / 9.0;
    let down = (1.0 - 0.5 * s2 * (c2 - SQRT_3 * sn2) - s2t / SQRT_2 * (c1 + SQRT_3 * sn1)) / 9.0;
    (same, up, down)
}

/// Closed-form family prediction; cells `(1,1),(2,2),(3,3)` share one value,
/// `(1,2),(2,3),(3,1)` another and `(1,3),(2,1),(3,2)` the third.
pub fn closed_form_distribution(theta: f64, settings: &PhaseSettings) -> JointDistribution<f64> {
    let mut p = [0.0; 36];
    for i in Setting::ALL {
        for j in Setting::ALL {
            let (same, up, down) = closed_form_cells(theta, settings.phi(i, j));
            for a in Outcome::ALL {
                for b in Outcome::ALL {
                    p[JointKey::new(i, j, a, b).slot()] = match b.minus(a) {
                        0 => same,
                        1 => up,
                        _ => down,
                    };
                }
            }
        }
    }
    JointDistribution::from_flat(p.to_vec(), DEFAULT_TOL).expect("closed-form probabilities are normalized")
}

/// Coefficients `(A, B)` with `I3 = A sin^2(theta) + B sin(2 theta)`.
pub fn i3_phase_coefficients(s: &PhaseSettings) -> (f64, f64) {
    let (one, two) = (Setting::ONE, Setting::TWO);
    let f11 = s.phi(one, one);
    let f12 = s.phi(one, two);
    let f21 = s.phi(two, one);
    let f22 = s.phi(two, two);
    let double = SQRT_3 * (2.0 * f11).cos() + (2.0 * f11).sin()
        + SQRT_3 * (2.0 * f12).cos() - (2.0 * f12).sin()
        - SQRT_3 * (2.0 * f21).cos() - (2.0 * f21).sin()
        + SQRT_3 * (2.0 * f22).cos() + (2.0 * f22).sin();
    let single = SQRT_3 * f11.cos() - f11.sin()
        + SQRT_3 * f12.cos() + f12.sin()
        - SQRT_3 * f21.cos() + f21.sin()
        + SQRT_3 * f22.cos() - f22.sin();
    (SQRT_3 / 6.0 * double, single / 6.0.sqrt())
}

/// Closed-form `I3` of the family state at the given phases.
pub fn i3_of_phases(theta: f64, s: &PhaseSettings) -> f64 {
    let (a, b) = i3_phase_coefficients(s);
    a * theta.sin().powi(2) + b * (2.0 * theta).sin()
}

pub fn k3_of_phases(theta: f64, s: &PhaseSettings) -> f64 {
    (i3_of_phases(theta, s) - 2.0) / 3.0
}

/// `I3` at the optimal settings: `2 sin^2(theta) + 2 sqrt(2/3) sin(2 theta)`.
pub fn i3_optimal(theta: f64) -> f64 {
    2.0 * theta.sin().powi(2) + 2.0 * (2.0f64 / 3.0).sqrt() * (2.0 * theta).sin()
}

/// `K3` at the optimal settings: `(2/3)(sqrt(2/3) sin(2 theta) - cos^2(theta))`.
pub fn k3_optimal(theta: f64) -> f64 {
    2.0 / 3.0 * ((2.0f64 / 3.0).sqrt() * (2.0 * theta).sin() - theta.cos().powi(2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseFamily {
    /// One free phase `alpha1`, the rest tied by [`optimal_settings`].
    Optimal,
    /// All four phases free.
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ViolationMaximum {
    pub theta: f64,
    pub settings: PhaseSettings,
    pub i3: f64,
}

impl ViolationMaximum {
    pub fn k3(&self) -> f64 {
        (self.i3 - 2.0) / 3.0
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    (lo + hi) / 2.0
}

/// Best `theta` in `[0, pi/2]` for `A sin^2 + B sin 2theta`, and the value.
///
/// With `u = 2 theta` the objective is `A/2 - (A/2) cos u + B sin u` on
/// `u in [0, pi]`.
fn best_theta(a: f64, b: f64) -> (f64, f64) {
    if b >= 0.0 {
        let r = (a * a / 4.0 + b * b).sqrt();
        let u = b.atan2(-a / 2.0);
        (u / 2.0, a / 2.0 + r)
    } else if a > 0.0 {
        (FRAC_PI_2, a)
    } else {
        (0.0, 0.0)
    }
}

/// Grid spacing of the four-phase search.
pub const PHASE_GRID_STEP: f64 = PI / 60.0;

/// Maximize `I3` over the family angle and the chosen phase family.
///
/// The optimal-settings family is a one-dimensional golden-section search
/// over `(0, pi/2)`. The free family fixes `alpha1 = 0` (the value depends
/// only on the sums `alpha_i + beta_j`), scans `alpha2, beta1, beta2` on a
/// `pi/60` grid with the best `theta` solved in closed form at each node,
/// then refines by coordinate-wise golden-section passes down to `1e-9`.
/// Ties on the grid keep the lexicographically smallest phases.
pub fn maximize_violation(family: PhaseFamily) -> ViolationMaximum {
    match family {
        PhaseFamily::Optimal => {
            let theta = golden_max(i3_optimal, 0.0, FRAC_PI_2, 1e-12);
            ViolationMaximum { theta, settings: optimal_settings(0.0), i3: i3_optimal(theta) }
        }
        PhaseFamily::Free => maximize_free_phases(),
    }
}

fn free_value(p: &[f64; 3]) -> f64 {
    let (a, b) = i3_phase_coefficients(&PhaseSettings::new(0.0, p[0], p[1], p[2]));
    best_theta(a, b).1
}

fn maximize_free_phases() -> ViolationMaximum {
    let n = (2.0 * PI / PHASE_GRID_STEP).round() as usize;
    let mut best = [0.0; 3];
    let mut best_val = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let p = [i as f64 * PHASE_GRID_STEP, j as f64 * PHASE_GRID_STEP, k as f64 * PHASE_GRID_STEP];
                let v = free_value(&p);
                if v > best_val + 1e-12 {
                    best_val = v;
                    best = p;
                }
            }
        }
    }

    let mut h = PHASE_GRID_STEP;
    while h > 1e-9 {
        for axis in 0..3 {
            let centre = best[axis];
            let x = golden_max(
                |t| {
                    let mut q = best;
                    q[axis] = t;
                    free_value(&q)
                },
                centre - h,
                centre + h,
                1e-12,
            );
            let mut q = best;
            q[axis] = x;
            if free_value(&q) >= free_value(&best) {
                best = q;
            }
        }
        h /= 2.0;
    }

    let settings = PhaseSettings::new(0.0, best[0], best[1], best[2]);
    let (a, b) = i3_phase_coefficients(&settings);
    let (theta, _) = best_theta(a, b);
    ViolationMaximum { theta, settings, i3: i3_of_phases(theta, &settings) }
}

/// Angle in degrees.
pub fn to_degrees(rad: f64) -> f64 {
    rad * 180.0 / PI
}

pub fn to_radians(deg: f64) -> f64 {
    deg * PI / 180.0
}
