//! File formats shared by the commands: JSON for distributions,
//! functionals and solved expressions; number formatting for CSV.

use std::collections::BTreeMap;
use std::str::FromStr;

use bell3_core::ns::AffineExpression;
use bell3_core::prob::JointDistribution;
use bell3_core::{BellFunctional, FlatIndex, JointKey, MarginalSide, Outcome, Rational, Setting};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// Floats below this magnitude print as `0`.
pub const SNAP_TO_ZERO: f64 = 1e-12;

/// Six significant digits in the style of C's `%g`: fixed notation for
/// decimal exponents in `[-4, 6)`, scientific otherwise, trailing zeros
/// removed.
pub fn fmt_float(x: f64) -> String {
    if x.abs() < SNAP_TO_ZERO {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let fixed = format!("{:.*}", (5 - exp) as usize, x);
        trim_fraction(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_fraction(mantissa), exp.abs())
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `n/d`, also for integers (`2/1`), as used inside JSON.
pub fn rational_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Accepts `n/d`, a bare integer, or a JSON integer.
pub fn parse_rational(v: &Value) -> Result<Rational, CliError> {
    match v {
        Value::String(s) => Rational::from_str(s.trim()).map_err(|_| CliError::Parse(format!("not a rational: {s:?}"))),
        Value::Number(n) if n.is_i64() => Ok(bell3_core::prob::ratio(n.as_i64().unwrap(), 1)),
        other => Err(CliError::Parse(format!("expected an \"n/d\" string, got {other}"))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Numeric {
    Rational,
    Float,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistributionDoc {
    p: Vec<Value>,
    numeric: Numeric,
}

/// A distribution read from JSON, with the backing it declared.
// One short-lived value per invocation; boxing would buy nothing.
#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq)]
pub enum AnyDistribution {
    Rational(JointDistribution<Rational>),
    Float(JointDistribution<f64>),
}

impl AnyDistribution {
    pub fn to_f64(&self) -> JointDistribution<f64> {
        match self {
            AnyDistribution::Rational(d) => d.to_f64(),
            AnyDistribution::Float(d) => d.clone(),
        }
    }
}

pub fn distribution_to_json(d: &AnyDistribution) -> String {
    let (p, numeric) = match d {
        AnyDistribution::Rational(d) => {
            (d.as_slice().iter().map(|r| Value::String(rational_string(r))).collect(), Numeric::Rational)
        }
        AnyDistribution::Float(d) => (d.as_slice().iter().map(|&x| Value::from(x)).collect(), Numeric::Float),
    };
    serde_json::to_string_pretty(&DistributionDoc { p, numeric }).expect("plain data serializes")
}

/// Parse and validate. Syntax and schema problems are [`CliError::Parse`];
/// wrong length, negative entries or bad normalization are
/// [`CliError::InvalidDistribution`].
pub fn distribution_from_json(text: &str, tol: f64) -> Result<AnyDistribution, CliError> {
    let doc: DistributionDoc = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    match doc.numeric {
        Numeric::Rational => {
            let p = doc.p.iter().map(parse_rational).collect::<Result<Vec<_>, _>>()?;
            Ok(AnyDistribution::Rational(JointDistribution::from_rational_flat(p)?))
        }
        Numeric::Float => {
            let p = doc
                .p
                .iter()
                .map(|v| v.as_f64().ok_or_else(|| CliError::Parse(format!("expected a number, got {v}"))))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(AnyDistribution::Float(JointDistribution::from_flat(p, tol)?))
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JointTermDoc {
    i: i64,
    j: i64,
    a: i64,
    b: i64,
    c: Value,
}

#[derive(Serialize, Deserialize)]
struct AliceTermDoc {
    i: i64,
    a: i64,
    c: Value,
}

#[derive(Serialize, Deserialize)]
struct BobTermDoc {
    j: i64,
    b: i64,
    c: Value,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionalDoc {
    name: String,
    bound: Value,
    joint: Vec<JointTermDoc>,
    #[serde(default)]
    alice_marg: Vec<AliceTermDoc>,
    #[serde(default)]
    bob_marg: Vec<BobTermDoc>,
}

pub fn functional_to_json(f: &BellFunctional) -> String {
    let c = |r: &Rational| Value::String(rational_string(r));
    let joint = f
        .joint_coeffs()
        .iter()
        .map(|(k, v)| JointTermDoc {
            i: k.i.value().into(),
            j: k.j.value().into(),
            a: k.a.value().into(),
            b: k.b.value().into(),
            c: c(v),
        })
        .collect();
    let alice_marg = f
        .alice_marginal_coeffs()
        .map(|(s, v)| AliceTermDoc { i: s.setting.value().into(), a: s.outcome.value().into(), c: c(v) })
        .collect();
    let bob_marg = f
        .bob_marginal_coeffs()
        .map(|(s, v)| BobTermDoc { j: s.setting.value().into(), b: s.outcome.value().into(), c: c(v) })
        .collect();
    let doc = FunctionalDoc { name: f.name().to_string(), bound: c(f.bound()), joint, alice_marg, bob_marg };
    serde_json::to_string_pretty(&doc).expect("plain data serializes")
}

pub fn functional_from_json(text: &str) -> Result<BellFunctional, CliError> {
    let doc: FunctionalDoc = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    let label = |e: bell3_core::Error| CliError::Parse(e.to_string());
    let mut f = BellFunctional::new(doc.name, parse_rational(&doc.bound)?);
    for t in &doc.joint {
        f.add_joint(JointKey::from_labels(t.i, t.j, t.a, t.b).map_err(label)?, parse_rational(&t.c)?);
    }
    for t in &doc.alice_marg {
        let side = MarginalSide::alice(Setting::new(t.i).map_err(label)?, Outcome::new(t.a).map_err(label)?);
        f.add_marginal(side, parse_rational(&t.c)?);
    }
    for t in &doc.bob_marg {
        let side = MarginalSide::bob(Setting::new(t.j).map_err(label)?, Outcome::new(t.b).map_err(label)?);
        f.add_marginal(side, parse_rational(&t.c)?);
    }
    Ok(f)
}

#[derive(Serialize, Deserialize)]
struct TermDoc {
    var: usize,
    c: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpressionDoc {
    target: usize,
    constant: String,
    terms: Vec<TermDoc>,
}

/// `{"target": k, "constant": "n/d", "terms": [{"var": k, "c": "n/d"}]}`.
pub fn expression_to_value(target: FlatIndex, e: &AffineExpression) -> Value {
    let doc = ExpressionDoc {
        target: target.get(),
        constant: rational_string(&e.constant),
        terms: e.coeffs.iter().map(|(k, c)| TermDoc { var: k.get(), c: rational_string(c) }).collect(),
    };
    serde_json::to_value(doc).expect("plain data serializes")
}

pub fn expression_from_value(v: &Value) -> Result<(FlatIndex, AffineExpression), CliError> {
    let doc: ExpressionDoc = serde_json::from_value(v.clone()).map_err(|e| CliError::Parse(e.to_string()))?;
    let index = |k: usize| {
        i64::try_from(k)
            .ok()
            .and_then(|k| FlatIndex::new(k).ok())
            .ok_or_else(|| CliError::Parse(format!("flat index {k} out of range")))
    };
    let parse = |s: &str| parse_rational(&Value::String(s.to_string()));
    let mut coeffs = BTreeMap::new();
    for t in &doc.terms {
        let c = parse(&t.c)?;
        if !c.is_zero() {
            coeffs.insert(index(t.var)?, c);
        }
    }
    Ok((index(doc.target)?, AffineExpression { constant: parse(&doc.constant)?, coeffs }))
}
