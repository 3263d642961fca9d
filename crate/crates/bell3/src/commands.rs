//! The seven commands. Each returns the text to print on success.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use bell3_core::functional::{cglmp_functional, enumerate_cglmp, enumerate_w_family, w_family_functional};
use bell3_core::lhv::{classical_bound, lp_membership, Membership};
use bell3_core::ns::{affine_relation, build_constraints, solve_for, sparsest_residual, target_set};
use bell3_core::prob::pr_box_qutrit;
use bell3_core::quantum::{
    born_distribution, family_state, maximize_violation, optimal_settings, theta_max, to_degrees, to_radians,
    violation_interval, PhaseFamily,
};
use bell3_core::robustness::{
    efficiency_threshold_ch, efficiency_threshold_chsh, extended_distribution, noise_threshold, s3_value,
    threshold_report,
};
use bell3_core::{BellFunctional, MarginalChoice, Rational, Scalar, Setting};
use clap::ValueEnum;
use num_traits::{One, Signed, Zero};
use serde_json::json;

use crate::format::{
    distribution_from_json, distribution_to_json, expression_to_value, fmt_float, functional_from_json,
    AnyDistribution,
};
use crate::CliError;

/// Target set under which `equivalence` reports residuals when none is
/// given: the one that keeps `I3` in its 24 free probabilities unchanged.
pub const DEFAULT_ELIMINATION: [i64; 12] = [3, 4, 8, 11, 15, 16, 21, 22, 26, 30, 31, 35];

/// Default θ step (degrees) for the threshold curve.
pub const ETA_CURVE_STEP_DEG: f64 = 0.5;

/// η step for the efficiency scan.
pub const ETA_SCAN_STEPS: u32 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TextOrJson {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CsvOrJson {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Cglmp,
    Wfamily,
    Named,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ThresholdMode {
    EtaCurve,
    EtaScanFig2,
    Optimum,
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("writing to memory cannot fail");
    String::from_utf8(bytes).expect("CSV of UTF-8 fields")
}

fn row<I, S>(w: &mut csv::Writer<Vec<u8>>, fields: I)
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    w.write_record(fields).expect("writing to memory cannot fail");
}

/// Solve the no-signaling constraints for `targets` and print every solved
/// probability (or only those in `show`).
pub fn derive(targets: &[i64], show: Option<&[i64]>, format: TextOrJson) -> Result<String, CliError> {
    let sys = build_constraints();
    let targets = target_set(targets)?;
    let sol = solve_for(&sys, &targets)?;
    let shown = match show {
        Some(ix) => {
            let ix = target_set_subset(ix)?;
            if let Some(k) = ix.iter().find(|k| sol.get(**k).is_none()) {
                return Err(CliError::Parse(format!("{k} is not one of the targets")));
            }
            ix
        }
        None => sol.targets().to_vec(),
    };
    Ok(match format {
        TextOrJson::Text => shown.iter().map(|k| format!("{k} = {}\n", sol.get(*k).expect("checked above"))).collect(),
        TextOrJson::Json => {
            let items: Vec<_> = shown.iter().map(|k| expression_to_value(*k, sol.get(*k).expect("checked"))).collect();
            let mut s = serde_json::to_string_pretty(&items).expect("plain data serializes");
            s.push('\n');
            s
        }
    })
}

fn target_set_subset(ix: &[i64]) -> Result<Vec<bell3_core::FlatIndex>, CliError> {
    let mut out = ix.iter().map(|&k| bell3_core::FlatIndex::new(k)).collect::<Result<Vec<_>, _>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

/// A built-in label or a path to a functional in JSON.
pub fn resolve_functional(name: &str) -> Result<BellFunctional, CliError> {
    if let Some(f) = BellFunctional::builtin(name) {
        return Ok(f);
    }
    let path = Path::new(name);
    if path.is_file() {
        return functional_from_json(&read(path)?);
    }
    Err(CliError::Parse(format!(
        "unknown functional {name:?}: expected I3, I3p, K3, K3p, W3, CGLMP(c1,c2,c3,c4), W(alpha,beta,x,y) or a JSON file"
    )))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

/// `lhs = offset + scale·rhs` with signs folded in.
fn render_relation(lhs: &str, scale: &Rational, offset: &Rational, rhs: &str, tail: &str) -> String {
    let mut s = format!("{lhs} = ");
    let mut empty = true;
    if !offset.is_zero() {
        write!(s, "{offset}").unwrap();
        empty = false;
    }
    if !scale.is_zero() {
        let mag = scale.abs();
        let term = if mag.is_one() { rhs.to_string() } else { format!("{mag}·{rhs}") };
        match (empty, scale.is_negative()) {
            (true, false) => s.push_str(&term),
            (true, true) => write!(s, "-{term}").unwrap(),
            (false, neg) => write!(s, " {} {term}", if neg { '-' } else { '+' }).unwrap(),
        }
        empty = false;
    }
    if !tail.is_empty() {
        s.push_str(if empty { tail } else { " + " });
        if !empty {
            s.push_str(tail);
        }
    } else if empty {
        s.push('0');
    }
    s
}

/// Report whether `f` and `g` are affinely related on the no-signaling set.
/// The boolean is `true` when they are.
pub fn equivalence(f_name: &str, g_name: &str, targets: Option<&[i64]>) -> Result<(String, bool), CliError> {
    let expand = |f: BellFunctional| -> Result<BellFunctional, CliError> {
        Ok(if f.is_joint_only() { f } else { f.expand_marginals(&MarginalChoice::all(Setting::ONE))? })
    };
    let f = expand(resolve_functional(f_name)?)?;
    let g = expand(resolve_functional(g_name)?)?;
    let sys = build_constraints();
    let targets = target_set(targets.unwrap_or(&DEFAULT_ELIMINATION))?;
    // Validates the set even when the relation does not need it.
    solve_for(&sys, &targets)?;
    if let Some((scale, offset)) = affine_relation(&sys, &f, &g)? {
        let mut out = render_relation(f.name(), &scale, &offset, g.name(), "");
        out.push_str(" (modulo no-signaling)\n");
        writeln!(out, "scale {scale}, offset {offset}").unwrap();
        return Ok((out, true));
    }
    let (scale, offset, residual) = sparsest_residual(&sys, &g, &f, &targets)?;
    let eliminated: Vec<String> = targets.iter().map(ToString::to_string).collect();
    let mut out = String::from("NOT EQUIVALENT\n");
    writeln!(out, "{}", render_relation(g.name(), &scale, &offset, f.name(), "R")).unwrap();
    writeln!(out, "R = {residual}").unwrap();
    writeln!(out, "eliminating {}", eliminated.join(", ")).unwrap();
    Ok((out, false))
}

/// Classical bounds by enumeration of the 81 deterministic strategies.
pub fn bounds(family: Family) -> String {
    let functionals: Vec<BellFunctional> = match family {
        Family::Cglmp => enumerate_cglmp().into_iter().map(cglmp_functional).collect(),
        Family::Wfamily => enumerate_w_family().into_iter().map(w_family_functional).collect(),
        Family::Named => ["I3", "I3p", "K3", "K3p", "W3"]
            .iter()
            .map(|n| BellFunctional::builtin(n).expect("built-in label"))
            .collect(),
    };
    let mut w = csv_writer();
    row(&mut w, ["name", "classical_bound", "n_maximizers"]);
    for f in &functionals {
        let b = classical_bound(f);
        row(&mut w, [f.name().to_string(), b.max.to_string(), b.maximizers.len().to_string()]);
    }
    finish(w)
}

fn check_step(step: f64) -> Result<(), CliError> {
    if step.is_finite() && step > 0.0 {
        Ok(())
    } else {
        Err(CliError::Parse(format!("step must be positive, got {step}")))
    }
}

/// Angles `from, from + step, …` up to `to` (inclusive within rounding).
fn grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>, CliError> {
    check_step(step)?;
    if !from.is_finite() || !to.is_finite() || to < from {
        return Err(CliError::Parse(format!("empty range {from}..{to}")));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| from + k as f64 * step).collect())
}

/// `I3` and `K3` of the family state at the tied optimal phases, by direct
/// evaluation of both functionals on the Born distribution.
fn family_values(theta: f64) -> (f64, f64) {
    let d = born_distribution(&family_state(theta), &optimal_settings(0.0));
    let i3 = BellFunctional::builtin("I3").expect("built-in").evaluate(&d).expect("quantum boxes are no-signaling");
    let k3 = BellFunctional::builtin("K3").expect("built-in").evaluate(&d).expect("quantum boxes are no-signaling");
    (i3, k3)
}

/// θ scan of `I3`, `K3` and the relation defect. Bounds and step are in
/// degrees unless `radians` is set; output is always in degrees.
pub fn scan(from: f64, to: f64, step: f64, radians: bool) -> Result<String, CliError> {
    let to_rad = |x: f64| if radians { x } else { to_radians(x) };
    let mut w = csv_writer();
    row(&mut w, ["theta_deg", "I3", "K3", "I3_minus_2_minus_3K3"]);
    for t in grid(from, to, step)? {
        let theta = to_rad(t);
        let (i3, k3) = family_values(theta);
        row(&mut w, [to_degrees(theta), i3, k3, i3 - 2.0 - 3.0 * k3].map(fmt_float));
    }
    Ok(finish(w))
}

/// Threshold data: the θ curve, the η scan at maximal violation, or the
/// optimum constants.
pub fn thresholds(mode: ThresholdMode, step_deg: f64, free_phases: bool, format: CsvOrJson) -> Result<String, CliError> {
    match mode {
        ThresholdMode::EtaCurve => eta_curve(step_deg),
        ThresholdMode::EtaScanFig2 => Ok(eta_scan()),
        ThresholdMode::Optimum => optimum(free_phases, format),
    }
}

fn eta_curve(step_deg: f64) -> Result<String, CliError> {
    check_step(step_deg)?;
    let (lo, hi) = violation_interval();
    let (lo, hi) = (to_degrees(lo), to_degrees(hi));
    let mut w = csv_writer();
    row(&mut w, ["theta_deg", "I3", "K3", "lambda_min", "eta_ch", "eta_chsh"]);
    let mut k = (lo / step_deg).floor() as i64;
    loop {
        let deg = k as f64 * step_deg;
        k += 1;
        if deg <= lo {
            continue;
        }
        if deg >= hi {
            break;
        }
        let r = threshold_report(to_radians(deg))?;
        row(&mut w, [deg, r.i3, r.k3, r.lambda_min, r.eta_ch, r.eta_chsh].map(fmt_float));
    }
    Ok(finish(w))
}

fn eta_scan() -> String {
    let d = born_distribution(&family_state(theta_max()), &optimal_settings(0.0));
    let i3 = BellFunctional::builtin("I3").expect("built-in");
    let k3 = BellFunctional::builtin("K3").expect("built-in");
    let mut w = csv_writer();
    row(&mut w, ["eta", "I3_eta", "K3_eta", "S3"]);
    for n in 0..=ETA_SCAN_STEPS {
        let eta = f64::from(n) / f64::from(ETA_SCAN_STEPS);
        let ext = extended_distribution(&d, eta).expect("eta lies in [0, 1]");
        let i3e = ext.evaluate(&i3).expect("lossy boxes are no-signaling");
        let k3e = ext.evaluate(&k3).expect("lossy boxes are no-signaling");
        row(&mut w, [eta, i3e, k3e, s3_value(&ext)].map(fmt_float));
    }
    finish(w)
}

fn optimum(free_phases: bool, format: CsvOrJson) -> Result<String, CliError> {
    let family = if free_phases { PhaseFamily::Free } else { PhaseFamily::Optimal };
    let m = maximize_violation(family);
    let lambda = noise_threshold(m.i3)?;
    let eta_ch = efficiency_threshold_ch(m.i3)?;
    let eta_chsh = efficiency_threshold_chsh(m.i3)?;
    let theta_deg = to_degrees(m.theta);
    Ok(match format {
        CsvOrJson::Csv => {
            let mut w = csv_writer();
            row(&mut w, ["lambda_min", "eta_ch", "eta_chsh", "I3_max", "K3_max", "theta_max_deg"]);
            row(&mut w, [lambda, eta_ch, eta_chsh, m.i3, m.k3(), theta_deg].map(fmt_float));
            finish(w)
        }
        CsvOrJson::Json => {
            let s = m.settings;
            let v = json!({
                "lambda_min": lambda,
                "eta_ch": eta_ch,
                "eta_chsh": eta_chsh,
                "I3_max": m.i3,
                "K3_max": m.k3(),
                "theta_max_deg": theta_deg,
                "phases_deg": {
                    "alpha1": to_degrees(s.alpha1),
                    "alpha2": to_degrees(s.alpha2),
                    "beta1": to_degrees(s.beta1),
                    "beta2": to_degrees(s.beta2),
                },
            });
            format!("{}\n", serde_json::to_string_pretty(&v).expect("plain data serializes"))
        }
    })
}

/// The maximally nonlocal no-signaling box.
pub fn prbox(format: TextOrJson) -> String {
    let pr = pr_box_qutrit();
    match format {
        TextOrJson::Json => format!("{}\n", distribution_to_json(&AnyDistribution::Rational(pr))),
        TextOrJson::Text => {
            let mut out = String::new();
            for (n, key) in bell3_core::JointKey::all().enumerate() {
                writeln!(out, "p{:<2} {key} = {}", n + 1, pr.get(key)).unwrap();
            }
            let i3 = BellFunctional::builtin("I3").expect("built-in").evaluate(&pr).expect("no-signaling");
            writeln!(out, "I3 = {i3}").unwrap();
            out
        }
    }
}

/// Local/nonlocal verdict for the distribution stored at `path`.
pub fn lpcheck(path: &Path, weights: bool, tol: f64) -> Result<String, CliError> {
    let dist = distribution_from_json(&read(path)?, tol)?;
    match dist {
        AnyDistribution::Rational(d) => Ok(verdict(lp_membership(&d, tol)?, weights)),
        AnyDistribution::Float(d) => Ok(verdict(lp_membership(&d, tol)?, weights)),
    }
}

fn verdict<T: Scalar + std::fmt::Display>(m: Membership<T>, weights: bool) -> String {
    match &m {
        Membership::Local { .. } => {
            let mut out = String::from("local\n");
            if weights {
                out.push_str("strategy,weight\n");
                for (s, w) in m.support() {
                    writeln!(out, "\"{s}\",{w}").unwrap();
                }
            }
            out
        }
        Membership::Nonlocal { infeasibility } => format!("nonlocal (phase-one objective {infeasibility})\n"),
    }
}
