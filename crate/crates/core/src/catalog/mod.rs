//! Catalog of sum–product identities and its verifier.
//!
//! Entries are stored as JSON whose sums and products are written in the text
//! notation of [`expr`]. Each side is a weighted list of terms; a term is a
//! product, a sum, or a product times a sum. Parameterized entries list their
//! instantiations and are checked at each one.

pub mod expr;

use crate::error::{Error, Result};
use crate::nahm::{eval_sumspec, SumSpec};
use crate::qfactors::{eval_product, ProductSpec};
use crate::rat::{fmt_rat, serde_rat, Rat};
use crate::series::{equal_to_order, linear_combine, Comparison, Order, PuiseuxSeries};
use expr::{parse_constant, parse_product, parse_sum, Env, SumText};
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::path::Path;
use std::time::Instant;

/// Catalog shipped with the crate.
pub const BUILTIN_CATALOG: &str = include_str!("../../../../data/catalog.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Proved,
    Conjecture,
    Parameterized,
}

/// A sum in text form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SumSource {
    /// Index names, comma separated: `"n"` or `"i,j"`.
    pub vars: String,
    pub exp: String,
    /// Exponent of −1, linear in the indices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub num: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub den: Vec<String>,
    /// `[modulus, residue]` per index.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub congruence: Option<Vec<(i64, i64)>>,
}

/// `weight · product · sum`, each part optional.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sum: Option<SumSource>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityEntry {
    pub id: String,
    pub status: Status,
    /// Where the identity comes from, e.g. `"Slater (39)"`.
    #[serde(default)]
    pub reference: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub instances: Vec<BTreeMap<String, serde_json::Value>>,
    pub lhs: Vec<TermSource>,
    pub rhs: Vec<TermSource>,
}

/// A parsed term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub weight: Rat,
    pub product: Option<ProductSpec>,
    pub sum: Option<SumSpec>,
}

/// One concrete instantiation of an entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub label: String,
    pub params: Vec<(String, Rat)>,
    pub lhs: Vec<Term>,
    pub rhs: Vec<Term>,
}

impl IdentityEntry {
    /// Parses every instantiation; an unparameterized entry has exactly one.
    pub fn instantiate(&self) -> Result<Vec<Instance>> {
        if self.params.is_empty() {
            return Ok(vec![self.build(self.id.clone(), vec![])?]);
        }
        let mut out = Vec::new();
        for (k, inst) in self.instances.iter().enumerate() {
            let loc = format!("{}: instances[{k}]", self.id);
            if inst.len() != self.params.len() {
                return Err(Error::parse(
                    loc,
                    "must assign every parameter exactly once",
                ));
            }
            let mut params = Vec::new();
            for p in &self.params {
                let v = inst
                    .get(p)
                    .ok_or_else(|| Error::parse(&loc, format!("missing parameter {p:?}")))?;
                let r = match v {
                    serde_json::Value::String(s) => parse_constant(s, &Env::new()),
                    other => serde_rat::from_value(other),
                }
                .map_err(|m| Error::parse(format!("{loc}.{p}"), m))?;
                params.push((p.clone(), r));
            }
            let label = format!(
                "{}@{}",
                self.id,
                params
                    .iter()
                    .map(|(p, v)| format!("{p}={}", fmt_rat(v)))
                    .collect::<Vec<_>>()
                    .join(",")
            );
            out.push(self.build(label, params)?);
        }
        Ok(out)
    }

    fn build(&self, label: String, params: Vec<(String, Rat)>) -> Result<Instance> {
        let env: Env = params.iter().cloned().collect();
        let side = |name: &str, terms: &[TermSource]| {
            terms
                .iter()
                .enumerate()
                .map(|(k, t)| build_term(t, &env, &format!("{label}: {name}[{k}]")))
                .collect::<Result<Vec<_>>>()
        };
        Ok(Instance {
            lhs: side("lhs", &self.lhs)?,
            rhs: side("rhs", &self.rhs)?,
            label,
            params,
        })
    }

    fn check_shape(&self) -> Result<()> {
        let loc = |f: &str| format!("{}: {f}", self.id);
        if self.id.trim().is_empty() {
            return Err(Error::parse("entry", "empty id"));
        }
        match (self.status, self.params.is_empty()) {
            (Status::Parameterized, true) => Err(Error::parse(
                loc("params"),
                "parameterized entry without parameters",
            )),
            (Status::Parameterized, false) if self.instances.is_empty() => Err(Error::parse(
                loc("instances"),
                "parameterized entry without instances",
            )),
            (Status::Proved | Status::Conjecture, false) => Err(Error::parse(
                loc("params"),
                "only parameterized entries take parameters",
            )),
            _ if self.lhs.is_empty() && self.rhs.is_empty() => {
                Err(Error::parse(loc("lhs"), "both sides are empty"))
            }
            _ => Ok(()),
        }
    }
}

fn build_term(t: &TermSource, env: &Env, loc: &str) -> Result<Term> {
    let weight = match &t.weight {
        Some(w) => parse_constant(w, env).map_err(|m| Error::parse(format!("{loc}.weight"), m))?,
        None => Rat::one(),
    };
    let product = t
        .product
        .as_ref()
        .map(|p| parse_product(p, env).map_err(|m| Error::parse(format!("{loc}.product"), m)))
        .transpose()?;
    let sum = t
        .sum
        .as_ref()
        .map(|s| {
            let text = SumText {
                vars: &s.vars,
                exp: &s.exp,
                sign: s.sign.as_deref(),
                num: &s.num,
                den: &s.den,
                congruence: s.congruence.as_deref(),
            };
            parse_sum(&text, env)
                .map_err(|(field, m)| Error::parse(format!("{loc}.sum.{field}"), m))
        })
        .transpose()?;
    if product.is_none() && sum.is_none() && t.weight.is_none() {
        return Err(Error::parse(loc, "empty term"));
    }
    Ok(Term {
        weight,
        product,
        sum,
    })
}

/// Parses catalog JSON; `origin` names the source in error messages.
pub fn parse_catalog(text: &str, origin: &str) -> Result<Vec<IdentityEntry>> {
    if text.trim().is_empty() {
        return Ok(vec![]);
    }
    let raw: Vec<serde_json::Value> = serde_json::from_str(text).map_err(|e| {
        Error::parse(
            format!("{origin}:{}:{}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(raw.len());
    for (k, v) in raw.into_iter().enumerate() {
        let name = v
            .get("id")
            .and_then(|x| x.as_str())
            .map(str::to_string)
            .unwrap_or_else(|| format!("entry {k}"));
        let entry: IdentityEntry = serde_json::from_value(v)
            .map_err(|e| Error::parse(format!("{origin}: {name}"), e.to_string()))?;
        entry.check_shape()?;
        if !seen.insert(entry.id.clone()) {
            return Err(Error::DuplicateId(entry.id));
        }
        entry.instantiate()?;
        out.push(entry);
    }
    Ok(out)
}

/// Loads and validates a catalog file.
pub fn load_catalog(path: &Path) -> Result<Vec<IdentityEntry>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_catalog(&text, &path.display().to_string())
}

/// The catalog shipped with the crate.
pub fn builtin_catalog() -> Result<Vec<IdentityEntry>> {
    parse_catalog(BUILTIN_CATALOG, "builtin catalog")
}

/// Valuation of a product, or `None` if it vanishes identically.
pub fn product_valuation(p: &ProductSpec) -> Result<Option<Rat>> {
    if p.constant.is_zero() {
        return Ok(None);
    }
    let mut v = p.monomial.clone();
    for f in p.factors() {
        let mut k = 0i64;
        loop {
            let t = f.arg.times(&f.base.pow(k));
            if t.exp.is_positive() {
                break;
            }
            if t.exp.is_zero() {
                if t.sign == 1 {
                    if f.power > 0 {
                        return Ok(None);
                    }
                    return Err(Error::DivergentProduct(format!(
                        "factor (1 - {t}) in the denominator"
                    )));
                }
            } else {
                v += &t.exp * Rat::from_integer(f.power.into());
            }
            k += 1;
        }
    }
    Ok(Some(v))
}

/// Evaluates `weight · product · sum` to `q^n`.
pub fn eval_term(t: &Term, n: &Rat) -> Result<PuiseuxSeries> {
    let zero = || PuiseuxSeries::zero(Order::Finite(n.clone()));
    let series = match (&t.product, &t.sum) {
        (None, None) => PuiseuxSeries::one(Order::Infinite),
        (Some(p), None) => eval_product(p, n)?,
        (None, Some(s)) => eval_sumspec(s, n)?,
        (Some(p), Some(s)) => {
            let Some(vp) = product_valuation(p)? else {
                return Ok(zero());
            };
            let sum = eval_sumspec(s, &(n - &vp))?;
            let Some(vs) = sum.valuation() else {
                return Ok(zero());
            };
            if &vp + &vs > *n {
                return Ok(zero());
            }
            eval_product(p, &(n - &vs))?.mul(&sum).truncate(n)
        }
    };
    Ok(series.scale_by(&t.weight).truncate(n))
}

/// Evaluates one side of an identity; an empty side is zero.
pub fn eval_side(terms: &[Term], n: &Rat) -> Result<PuiseuxSeries> {
    let parts = terms
        .iter()
        .map(|t| eval_term(t, n))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<(Rat, &PuiseuxSeries)> = parts.iter().map(|s| (Rat::one(), s)).collect();
    Ok(linear_combine(&refs).truncate(n))
}

/// First coefficient where the two sides differ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub exponent: String,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail {
        first_mismatch: Mismatch,
    },
    Divergent {
        message: String,
    },
    /// Any other evaluation failure, such as a malformed factor length.
    Error {
        message: String,
    },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

/// Checks one instance to `q^n`.
pub fn verify_instance(inst: &Instance, n: &Rat) -> Verdict {
    let run = || -> Result<Comparison> {
        let l = eval_side(&inst.lhs, n)?;
        let r = eval_side(&inst.rhs, n)?;
        equal_to_order(&l, &r, n)
    };
    match run() {
        Ok(Comparison::Equal) => Verdict::Pass,
        Ok(Comparison::FirstMismatch { exponent, lhs, rhs }) => Verdict::Fail {
            first_mismatch: Mismatch {
                exponent: fmt_rat(&exponent),
                lhs: fmt_rat(&lhs),
                rhs: fmt_rat(&rhs),
            },
        },
        Err(
            e @ (Error::DivergentSpec(_) | Error::DivergentProduct(_) | Error::DivergentTheta(_)),
        ) => Verdict::Divergent {
            message: e.to_string(),
        },
        Err(e) => Verdict::Error {
            message: e.to_string(),
        },
    }
}

/// One line of a verification report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReportRow {
    /// Instance label: the entry id, plus `@p=v,…` for parameterized entries.
    pub id: String,
    pub entry: String,
    pub status: Status,
    #[serde(flatten)]
    pub verdict: Verdict,
    pub millis: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub order: String,
    pub rows: Vec<ReportRow>,
    pub total_millis: u64,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.verdict.is_pass())
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| !r.verdict.is_pass())
    }
}

/// Checks every instance of `entry` to `q^n`.
pub fn verify_entry(entry: &IdentityEntry, n: &Rat) -> Result<Vec<ReportRow>> {
    Ok(entry
        .instantiate()?
        .iter()
        .map(|inst| timed_row(entry, inst, n))
        .collect())
}

fn timed_row(entry: &IdentityEntry, inst: &Instance, n: &Rat) -> ReportRow {
    let t0 = Instant::now();
    let verdict = verify_instance(inst, n);
    ReportRow {
        id: inst.label.clone(),
        entry: entry.id.clone(),
        status: entry.status,
        verdict,
        millis: t0.elapsed().as_millis() as u64,
    }
}

/// Checks all entries whose id matches the glob `filter`, in parallel.
///
/// Rows come back sorted by entry id, then in instance order.
pub fn verify_all(entries: &[IdentityEntry], n: &Rat, filter: Option<&str>) -> Result<Report> {
    let t0 = Instant::now();
    let pattern = filter
        .map(|f| glob::Pattern::new(f).map_err(|e| Error::parse("filter", e.to_string())))
        .transpose()?;
    let mut work = Vec::new();
    for e in entries
        .iter()
        .filter(|e| pattern.as_ref().is_none_or(|p| p.matches(&e.id)))
    {
        for (k, inst) in e.instantiate()?.into_iter().enumerate() {
            work.push((e, k, inst));
        }
    }
    let mut rows: Vec<(&str, usize, ReportRow)> = work
        .par_iter()
        .map(|(e, k, inst)| (e.id.as_str(), *k, timed_row(e, inst, n)))
        .collect();
    rows.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    Ok(Report {
        order: fmt_rat(n),
        rows: rows.into_iter().map(|r| r.2).collect(),
        total_millis: t0.elapsed().as_millis() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::int;

    const EULER: &str = r#"[{"id":"euler","status":"proved","reference":"Euler",
        "lhs":[{"sum":{"vars":"n","exp":"(n^2-n)/2","den":["(q;q)_{n}"]}}],
        "rhs":[{"product":"(-1;q)_inf"}]}]"#;

    #[test]
    fn euler_passes() {
        let cat = parse_catalog(EULER, "inline").unwrap();
        let rows = verify_entry(&cat[0], &int(30)).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].verdict.is_pass(), "{:?}", rows[0].verdict);
    }

    #[test]
    fn broken_entry_fails_with_location() {
        let bad = EULER.replace("(n^2-n)/2", "(n^2+n)/2");
        let cat = parse_catalog(&bad, "inline").unwrap();
        let rows = verify_entry(&cat[0], &int(30)).unwrap();
        assert!(matches!(rows[0].verdict, Verdict::Fail { .. }));
        let typo = EULER.replace("(q;q)_{n}", "(q;q)_{n^2}");
        match parse_catalog(&typo, "inline") {
            Err(Error::Parse { location, .. }) => {
                assert!(location.contains("euler") && location.contains("den"))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_and_duplicate() {
        assert!(parse_catalog("  \n", "x").unwrap().is_empty());
        let two = format!("[{0},{0}]", &EULER[1..EULER.len() - 1]);
        assert_eq!(
            parse_catalog(&two, "x"),
            Err(Error::DuplicateId("euler".into()))
        );
    }

    #[test]
    fn product_times_sum_and_valuation() {
        let p = parse_product("q^{-1}(-q^{-1};q)_inf/(q;q)_inf", &Env::new()).unwrap();
        assert_eq!(product_valuation(&p).unwrap(), Some(int(-2)));
        let z = parse_product("(q^{-1};q)_inf", &Env::new()).unwrap();
        assert_eq!(product_valuation(&z).unwrap(), None);
    }
}
