//! Product recovery, periodicity detection, completion exponents and the
//! grid search for modular partial Nahm sums.
//!
//! A series `f = c·x^μ·Π_{n≥1}(1−xⁿ)^{−e_n}` with `x = q^{1/D}` is described by
//! its [`ExponentProfile`]. Eta quotients and generalized eta products have
//! profiles that are periodic from `n = 1`, which is the shape the search
//! looks for.

use crate::catalog::{IdentityEntry, Term};
use crate::error::{Error, Result};
use crate::nahm::{eval_nahm, LatticeCoset, NahmSpec};
use crate::qfactors::{eval_product, PochFactor, ProductSpec, SignedMonomial};
use crate::rat::{denom_u64, fmt_rat, int, lcm_u64, Rat};
use crate::series::{equal_to_order, Comparison, Order, PuiseuxSeries};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Quadruple table shipped with the crate.
pub const BUILTIN_QUADRUPLES: &str = include_str!("../../../data/quadruples.json");

/// `f = c·q^mu·Π_{n≥1}(1 − q^{n/denom})^{−e[n−1]}`, known for `n ≤ e.len()`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExponentProfile {
    pub e: Vec<i64>,
    #[serde(with = "crate::rat::serde_rat")]
    pub mu: Rat,
    #[serde(with = "crate::rat::serde_rat")]
    pub c: Rat,
    pub denom: u64,
}

impl ExponentProfile {
    /// The truncated product `c·q^mu·Π_{n≤len}(1 − q^{n/denom})^{−e_n}`.
    pub fn to_product(&self) -> ProductSpec {
        let d = BigInt::from(self.denom);
        let mut fs = Vec::new();
        for (k, &e) in self.e.iter().enumerate() {
            let b = Rat::new(BigInt::from(k as i64 + 1), d.clone());
            // 1 − q^b = (q^b;q^b)_∞ / (q^{2b};q^b)_∞
            fs.push(PochFactor::new(
                SignedMonomial::q(b.clone()),
                SignedMonomial::q(b.clone()),
                -e,
            ));
            fs.push(PochFactor::new(
                SignedMonomial::q(&b * BigInt::from(2)),
                SignedMonomial::q(b),
                e,
            ));
        }
        ProductSpec::new(self.c.clone(), self.mu.clone(), fs).unwrap()
    }

    /// `c·q^mu·Π_{r=1..period}(q^{r/D}; q^{period/D})_∞^{−pattern_r}`.
    pub fn periodic_product(&self, period: usize, pattern: &[i64]) -> ProductSpec {
        let scale = Rat::new(BigInt::one(), BigInt::from(self.denom));
        let p = rescale(&pattern_to_product(period, pattern), &scale);
        ProductSpec::new(self.c.clone(), self.mu.clone(), p.factors().to_vec()).unwrap()
    }
}

/// Recovers the exponent profile of `f` up to `q^n` by peeling one factor
/// `(1 − xⁿ)^{e_n}` at a time.
pub fn prodmake(f: &PuiseuxSeries, n: &Rat) -> Result<ExponentProfile> {
    let mu = f
        .valuation()
        .ok_or_else(|| Error::InvalidParams("cannot factor the zero series".into()))?;
    let c = f.coefficient_at(&mu)?;
    let known = match f.order() {
        Order::Finite(o) if o < n => o.clone(),
        _ => n.clone(),
    };
    let g = f.shift(&-&mu).scale_by(&c.recip());
    let d = g.denom();
    let top = ((&known - &mu) * BigInt::from(d)).floor().to_integer();
    let top = top.to_i64().filter(|t| *t >= 0).unwrap_or(0) as usize;

    let terms = g.terms();
    let scale = terms
        .iter()
        .fold(BigInt::one(), |s, (_, c)| s.lcm(c.denom()));
    let mut r = vec![BigInt::zero(); top + 1];
    for (e, coeff) in terms {
        let k = (e * BigInt::from(d)).to_integer().to_usize().unwrap();
        if k <= top {
            r[k] = coeff.numer() * (&scale / coeff.denom());
        }
    }

    let mut e = Vec::with_capacity(top);
    for k in 1..=top {
        let (en, rem) = r[k].div_rem(&scale);
        if !rem.is_zero() {
            return Err(Error::NotAProduct {
                index: k,
                value: fmt_rat(&Rat::new(r[k].clone(), scale.clone())),
            });
        }
        if !en.is_zero() {
            // remainder ← remainder·(1 − x^k)^{e_k}, binomial coefficients c_t of (1 − y)^{e_k}
            let mut c = vec![BigInt::one()];
            for t in 1..=(top / k) {
                let next = -(&c[t - 1] * (&en - BigInt::from(t - 1))) / BigInt::from(t);
                c.push(next);
            }
            for j in (k..=top).rev() {
                let mut acc = r[j].clone();
                for (t, ct) in c.iter().enumerate().skip(1).take_while(|(t, _)| t * k <= j) {
                    acc += ct * &r[j - t * k];
                }
                r[j] = acc;
            }
        }
        let en = en.to_i64().ok_or_else(|| Error::NotAProduct {
            index: k,
            value: en.to_string(),
        })?;
        e.push(en);
    }
    Ok(ExponentProfile { e, mu, c, denom: d })
}

/// Smallest period `p ≤ max_period` with `e_n = e_{((n−1) mod p)+1}` for every known `n`.
pub fn detect_period(
    profile: &ExponentProfile,
    max_period: usize,
    min_repeats: usize,
) -> Result<Option<(usize, Vec<i64>)>> {
    if min_repeats < 3 {
        return Err(Error::InvalidParams(format!(
            "min_repeats must be at least 3, got {min_repeats}"
        )));
    }
    let need = max_period * min_repeats;
    if profile.e.len() < need {
        return Err(Error::InsufficientOrder {
            have: profile.e.len(),
            need,
        });
    }
    let e = &profile.e;
    Ok((1..=max_period)
        .find(|&p| (p..e.len()).all(|i| e[i] == e[i % p]))
        .map(|p| (p, e[..p].to_vec())))
}

/// `Π_{c=1..p}(q^c; q^p)_∞^{−pattern_c}`.
pub fn pattern_to_product(period: usize, pattern: &[i64]) -> ProductSpec {
    assert_eq!(
        pattern.len(),
        period,
        "pattern length must equal the period"
    );
    let m = SignedMonomial::q(int(period as i64));
    let fs = pattern
        .iter()
        .enumerate()
        .map(|(k, &e)| PochFactor::new(SignedMonomial::q(int(k as i64 + 1)), m.clone(), -e))
        .collect();
    ProductSpec::new(Rat::one(), Rat::zero(), fs).unwrap()
}

/// `P(q^k)`: every exponent multiplied by `k > 0`.
pub fn rescale(p: &ProductSpec, k: &Rat) -> ProductSpec {
    assert!(k.is_positive(), "scale must be positive");
    let m = |s: &SignedMonomial| SignedMonomial::new(s.sign, &s.exp * k);
    let fs = p
        .factors()
        .iter()
        .map(|f| PochFactor::new(m(&f.arg), m(&f.base), f.power))
        .collect();
    ProductSpec::new(p.constant.clone(), &p.monomial * k, fs).unwrap()
}

// ---------------------------------------------------------------------------
// Normalization

/// `(q^c; q^m)_∞^power` with `c, m > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct PosFactor {
    c: Rat,
    m: Rat,
    power: i64,
}

/// Rewrites `P` as `constant·q^monomial·Π(q^c;q^m)_∞^power` with positive signs and `c, m > 0`.
fn positive_factors(p: &ProductSpec) -> Result<(Rat, Rat, Vec<PosFactor>)> {
    let mut constant = p.constant.clone();
    let mut monomial = p.monomial.clone();
    let mut out = Vec::new();
    let mut work: Vec<(i8, Rat, i8, Rat, i64)> = p
        .factors()
        .iter()
        .map(|f| {
            (
                f.arg.sign,
                f.arg.exp.clone(),
                f.base.sign,
                f.base.exp.clone(),
                f.power,
            )
        })
        .collect();
    while let Some((s, a, t, m, pw)) = work.pop() {
        if t < 0 {
            // (s q^a; −q^m) = (s q^a; q^{2m})·(−s q^{a+m}; q^{2m})
            let m2 = &m * BigInt::from(2);
            work.push((s, a.clone(), 1, m2.clone(), pw));
            work.push((-s, a + &m, 1, m2, pw));
            continue;
        }
        if !a.is_positive() {
            // peel (1 − s q^a)^pw, then continue with (s q^{a+m}; q^m)
            work.push((s, &a + &m, 1, m, pw));
            if a.is_zero() {
                if s > 0 {
                    return Err(Error::InvalidParams(format!(
                        "product {p} vanishes identically"
                    )));
                }
                constant *= pow_rat(&int(2), pw);
            } else {
                // 1 − s q^a = −s q^a (1 − s q^{−a})
                constant *= pow_rat(&int(-i64::from(s)), pw);
                monomial += &a * BigInt::from(pw);
                let b = -a;
                push_binomial(&mut work, s, b, pw);
            }
            continue;
        }
        if s < 0 {
            // (−q^a; q^m) = (q^{2a}; q^{2m}) / (q^a; q^m)
            let two = BigInt::from(2);
            out.push(PosFactor {
                c: &a * &two,
                m: &m * &two,
                power: pw,
            });
            out.push(PosFactor {
                c: a,
                m,
                power: -pw,
            });
            continue;
        }
        out.push(PosFactor { c: a, m, power: pw });
    }
    Ok((constant, monomial, out))
}

/// `(1 − s q^b)^pw = (s q^b; q^b)_∞^pw / (s q^{2b}; q^b)_∞^pw`, `b > 0`.
fn push_binomial(work: &mut Vec<(i8, Rat, i8, Rat, i64)>, s: i8, b: Rat, pw: i64) {
    work.push((s, b.clone(), 1, b.clone(), pw));
    work.push((s, &b * BigInt::from(2), 1, b, -pw));
}

fn pow_rat(r: &Rat, k: i64) -> Rat {
    if k >= 0 {
        num_traits::pow(r.clone(), k as usize)
    } else {
        num_traits::pow(r.recip(), k.unsigned_abs() as usize)
    }
}

/// Canonical form of a product of positive-sign Pochhammer symbols:
/// `constant·q^monomial·Π_{n≥1}(1 − q^{n/denom})^{−e_n}` where
/// `e_n = pattern[(n−1) mod period] + corrections[n]`. Two products are
/// structurally equal exactly when their shapes are equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductShape {
    pub constant: Rat,
    pub monomial: Rat,
    pub denom: u64,
    pub period: u64,
    pub pattern: Vec<i64>,
    pub corrections: BTreeMap<u64, i64>,
}

impl ProductShape {
    /// The profile entries `e_1..e_len`.
    pub fn exponents(&self, len: usize) -> Vec<i64> {
        (1..=len as u64)
            .map(|n| {
                self.pattern[((n - 1) % self.period) as usize]
                    + self.corrections.get(&n).copied().unwrap_or(0)
            })
            .collect()
    }

    pub fn is_periodic(&self) -> bool {
        self.corrections.is_empty()
    }
}

/// Normalizes `P` to its [`ProductShape`].
pub fn normalize(p: &ProductSpec) -> Result<ProductShape> {
    let (constant, monomial, fs) = positive_factors(p)?;
    let denom = fs.iter().fold(1u64, |d, f| {
        lcm_u64(lcm_u64(d, denom_u64(&f.c)), denom_u64(&f.m))
    });
    let to_int = |r: &Rat| {
        (r * BigInt::from(denom))
            .to_integer()
            .to_u64()
            .expect("exponent too large")
    };
    let period = fs.iter().fold(1u64, |l, f| lcm_u64(l, to_int(&f.m)));
    let mut pattern = vec![0i64; period as usize];
    let mut corrections: BTreeMap<u64, i64> = BTreeMap::new();
    for f in &fs {
        let (c, m) = (to_int(&f.c), to_int(&f.m));
        let mut r = c % m;
        if r == 0 {
            r = m;
        }
        for n in (r..=period).step_by(m as usize) {
            pattern[(n - 1) as usize] -= f.power;
        }
        for n in (r..c).step_by(m as usize) {
            *corrections.entry(n).or_default() += f.power;
        }
    }
    corrections.retain(|_, v| *v != 0);

    let period = (1..=period)
        .find(|&p| {
            period % p == 0 && (0..pattern.len()).all(|i| pattern[i] == pattern[i % p as usize])
        })
        .unwrap();
    pattern.truncate(period as usize);
    let mut g = denom.gcd(&period);
    for (i, e) in pattern.iter().enumerate() {
        if *e != 0 {
            g = g.gcd(&(i as u64 + 1));
        }
    }
    for n in corrections.keys() {
        g = g.gcd(n);
    }
    let pattern = (1..=period / g)
        .map(|k| pattern[(k * g - 1) as usize])
        .collect();
    let corrections = corrections.into_iter().map(|(n, v)| (n / g, v)).collect();
    Ok(ProductShape {
        constant,
        monomial,
        denom: denom / g,
        period: period / g,
        pattern,
        corrections,
    })
}

// ---------------------------------------------------------------------------
// Completion exponent

/// `P2(x) = {x}² − {x} + 1/6`.
fn p2(x: &Rat) -> Rat {
    let f = x - x.floor();
    &f * &f - &f + Rat::new(BigInt::one(), BigInt::from(6))
}

/// Result of [`eta_weight_exponent`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EtaWeight {
    /// `w` such that `q^w·Π(factors)` is an eta quotient times generalized eta functions.
    #[serde(with = "crate::rat::serde_rat")]
    pub exponent: Rat,
    /// Half the total multiplicity of `J_m`-type factors.
    #[serde(with = "crate::rat::serde_rat")]
    pub weight: Rat,
}

/// Completion exponent of the factor part of `P` (constant and monomial excluded):
/// each `(q^c;q^m)_∞^e` contributes `e·(m/4)·P2(c/m)`.
///
/// The rule is homogeneous in the exponent scale, so products with fractional
/// exponents need no separate rescaling to an integer lattice.
pub fn eta_weight_exponent(p: &ProductSpec) -> Result<EtaWeight> {
    let (_, _, fs) = positive_factors(p)?;
    let mut w = Rat::zero();
    let mut weight = Rat::zero();
    let half = Rat::new(BigInt::one(), BigInt::from(2));
    for f in &fs {
        let x = &f.c / &f.m;
        w += p2(&x) * &f.m / BigInt::from(4) * BigInt::from(f.power);
        if x.is_integer() {
            weight += &half * BigInt::from(f.power);
        }
    }
    Ok(EtaWeight {
        exponent: w,
        weight,
    })
}

/// Breakdown returned by [`prefactor`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Prefactor {
    /// The modular completion scalar `C`.
    #[serde(rename = "required_C", with = "crate::rat::serde_rat")]
    pub c: Rat,
    /// `δ` with `f_{A,B,0,v+L} = q^δ·P`.
    #[serde(with = "crate::rat::serde_rat")]
    pub delta: Rat,
    /// Monomial exponent of `P` after normalization.
    #[serde(with = "crate::rat::serde_rat")]
    pub monomial: Rat,
    pub eta: EtaWeight,
}

/// Checks `f_{A,B,0,v+L} = q^δ·P` to `q^order` and returns `C = w(P) − monomial(P) − δ`.
pub fn prefactor(spec: &NahmSpec, product: &ProductSpec, order: &Rat) -> Result<Prefactor> {
    let spec = spec.with_c(Rat::zero());
    let (_, monomial, _) = positive_factors(product)?;
    let eta = eta_weight_exponent(product)?;
    let s = eval_nahm(&spec, order)?;
    let v = s.valuation().ok_or_else(|| {
        Error::NotAnIdentity(format!("{spec} vanishes to order {}", fmt_rat(order)))
    })?;
    let delta = &v - &monomial;
    let rhs = eval_product(product, &(order - &delta))?.shift(&delta);
    match equal_to_order(&s, &rhs, order)? {
        Comparison::Equal => {}
        m => {
            return Err(Error::NotAnIdentity(format!(
                "{spec} vs q^{}*{product}: {m}",
                fmt_rat(&delta)
            )))
        }
    }
    let c = &eta.exponent - &monomial - &delta;
    Ok(Prefactor {
        c,
        delta,
        monomial,
        eta,
    })
}

/// The completion scalar `C` making `f_{A,B,C,v+L}` match the eta-quotient shape of `product`.
#[allow(non_snake_case)]
pub fn required_C(spec: &NahmSpec, product: &ProductSpec, order: &Rat) -> Result<Rat> {
    prefactor(spec, product, order).map(|p| p.c)
}

// ---------------------------------------------------------------------------
// Grid search

/// A periodic-product match found by [`search_quadruples`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub spec: NahmSpec,
    pub product: ProductSpec,
    #[serde(rename = "required_C", with = "crate::rat::serde_rat")]
    pub required_c: Rat,
    pub orders_matched: i64,
}

/// Search space: every `A`, every `B` (listed or built from per-entry values),
/// every lattice and every coset (listed or all of `Z^r/L`).
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SearchGrid {
    #[serde(rename = "A", with = "serde_mats")]
    pub a: Vec<Vec<Vec<Rat>>>,
    #[serde(rename = "B", default, with = "serde_vecs")]
    pub b: Vec<Vec<Rat>>,
    #[serde(rename = "B_each", default, with = "crate::rat::serde_rat_vec")]
    pub b_each: Vec<Rat>,
    #[serde(rename = "L")]
    pub lattices: Vec<Vec<Vec<i64>>>,
    #[serde(default)]
    pub v: Vec<Vec<i64>>,
}

mod serde_mats {
    use super::Rat;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &[Vec<Vec<Rat>>], s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<Vec<Vec<String>>> = m
            .iter()
            .map(|a| {
                a.iter()
                    .map(|r| r.iter().map(crate::rat::fmt_rat).collect())
                    .collect()
            })
            .collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Vec<Rat>>>, D::Error> {
        let v: Vec<Vec<Vec<serde_json::Value>>> = Vec::deserialize(d)?;
        v.iter()
            .map(|a| {
                a.iter()
                    .map(|r| {
                        r.iter()
                            .map(|x| {
                                crate::rat::serde_rat::from_value(x)
                                    .map_err(serde::de::Error::custom)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }
}

mod serde_vecs {
    use super::Rat;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &[Vec<Rat>], s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<Vec<String>> = m
            .iter()
            .map(|r| r.iter().map(crate::rat::fmt_rat).collect())
            .collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rat>>, D::Error> {
        let v: Vec<Vec<serde_json::Value>> = Vec::deserialize(d)?;
        v.iter()
            .map(|r| {
                r.iter()
                    .map(|x| crate::rat::serde_rat::from_value(x).map_err(serde::de::Error::custom))
                    .collect()
            })
            .collect()
    }
}

/// One representative of each coset of `Z^r/L`, in lexicographic order.
pub fn coset_representatives(basis: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    let r = basis.len();
    let det = if r == 1 {
        basis[0][0]
    } else {
        basis[0][0] * basis[1][1] - basis[0][1] * basis[1][0]
    };
    let det = det.abs();
    let mut reps: Vec<Vec<i64>> = Vec::new();
    let mut points: Vec<Vec<i64>> = Vec::new();
    if r == 1 {
        points.extend((0..det.max(1)).map(|a| vec![a]));
    } else {
        for a in 0..det.max(1) {
            for b in 0..det.max(1) {
                points.push(vec![a, b]);
            }
        }
    }
    for p in points {
        let mut found = false;
        for v in &reps {
            let diff: Vec<i64> = p.iter().zip(v).map(|(x, y)| x - y).collect();
            let lattice = LatticeCoset::new(basis.to_vec(), vec![0; r])?;
            if lattice.contains(&diff) {
                found = true;
                break;
            }
        }
        if !found {
            reps.push(p);
        }
        if reps.len() as i64 == det {
            break;
        }
    }
    Ok(reps)
}

impl SearchGrid {
    /// All specs of the grid with `C = 0`, in enumeration order.
    pub fn specs(&self) -> Result<Vec<NahmSpec>> {
        let mut out = Vec::new();
        for a in &self.a {
            let r = a.len();
            let mut bs: Vec<Vec<Rat>> = self.b.iter().filter(|b| b.len() == r).cloned().collect();
            if !self.b_each.is_empty() {
                for x in &self.b_each {
                    if r == 1 {
                        bs.push(vec![x.clone()]);
                    } else {
                        bs.extend(self.b_each.iter().map(|y| vec![x.clone(), y.clone()]));
                    }
                }
            }
            for l in self.lattices.iter().filter(|l| l.len() == r) {
                let vs: Vec<Vec<i64>> = if self.v.is_empty() {
                    coset_representatives(l)?
                } else {
                    self.v.iter().filter(|v| v.len() == r).cloned().collect()
                };
                for b in &bs {
                    for v in &vs {
                        let q = crate::nahm::QuadExpr::new(a.clone(), b.clone(), Rat::zero())?;
                        out.push(NahmSpec::new(q, LatticeCoset::new(l.clone(), v.clone())?)?);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Profile of `f_{A,B,0,v+L}` to `q^n` when it is exactly periodic with period
/// `≤ max_period`, capped so that at least three periods are known.
fn periodic_candidate(spec: &NahmSpec, n: &Rat, max_period: usize) -> Option<Candidate> {
    let s = eval_nahm(spec, n).ok()?;
    let profile = prodmake(&s, n).ok()?;
    let (p, pattern) = detect_period(&profile, max_period.min(profile.e.len() / 3), 3).ok()??;
    let product = profile.periodic_product(p, &pattern);
    let eta = eta_weight_exponent(&product).ok()?;
    Some(Candidate {
        spec: spec.clone(),
        required_c: &eta.exponent - &product.monomial,
        product,
        orders_matched: n.floor().to_integer().to_i64().unwrap_or(0),
    })
}

/// Evaluates every spec of the grid to `q^n` and keeps the ones whose product
/// profile is exactly periodic. Divergent specs and non-products are skipped.
pub fn search_quadruples(grid: &SearchGrid, n: &Rat, max_period: usize) -> Result<Vec<Candidate>> {
    let specs = grid.specs()?;
    Ok(specs
        .par_iter()
        .filter_map(|s| periodic_candidate(s, n, max_period))
        .collect())
}

// ---------------------------------------------------------------------------
// Table cross-check

/// A quadruple from the tables, linked to the catalog identity supplying its product.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadrupleRow {
    pub id: String,
    pub table: String,
    /// Catalog instance label (`id` or `id@p=v,…`) whose product side is used.
    pub identity: Option<String>,
    pub nahm: NahmSpec,
    #[serde(rename = "printed_C", with = "crate::rat::serde_rat")]
    pub printed_c: Rat,
    /// The catalog product is used at `q^scale`.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_rat")]
    pub scale: Option<Rat>,
}

mod opt_rat {
    use super::Rat;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rat>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_str(&crate::rat::fmt_rat(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rat>, D::Error> {
        let v: Option<serde_json::Value> = Option::deserialize(d)?;
        v.map(|v| crate::rat::serde_rat::from_value(&v).map_err(serde::de::Error::custom))
            .transpose()
    }
}

pub fn parse_quadruples(text: &str, origin: &str) -> Result<Vec<QuadrupleRow>> {
    let rows: Vec<QuadrupleRow> = serde_json::from_str(text).map_err(|e| {
        Error::parse(
            format!("{origin}:{}:{}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    let mut seen = std::collections::BTreeSet::new();
    for r in &rows {
        if !seen.insert(r.id.clone()) {
            return Err(Error::DuplicateId(r.id.clone()));
        }
    }
    Ok(rows)
}

impl QuadrupleRow {
    /// The linked identity's product, at `q^scale` when a scale is given.
    pub fn product(&self, entries: &[IdentityEntry]) -> Result<ProductSpec> {
        let label = self
            .identity
            .as_deref()
            .ok_or_else(|| Error::InvalidParams(format!("{} has no identity", self.id)))?;
        let p = identity_product(entries, label)?;
        Ok(match &self.scale {
            Some(k) => rescale(&p, k),
            None => p,
        })
    }
}

pub fn builtin_quadruples() -> Result<Vec<QuadrupleRow>> {
    parse_quadruples(BUILTIN_QUADRUPLES, "builtin quadruples")
}

/// The single product on one side of `label` in the catalog, times its weight.
pub fn identity_product(entries: &[IdentityEntry], label: &str) -> Result<ProductSpec> {
    let id = label.split('@').next().unwrap_or(label);
    let entry = entries
        .iter()
        .find(|e| e.id == id)
        .ok_or_else(|| Error::InvalidParams(format!("no catalog entry {id}")))?;
    let inst = entry
        .instantiate()?
        .into_iter()
        .find(|i| i.label == label)
        .ok_or_else(|| Error::InvalidParams(format!("no catalog instance {label}")))?;
    let single = |side: &[Term]| match side {
        [Term {
            weight,
            product: Some(p),
            sum: None,
        }] => Some(
            ProductSpec::new(
                &p.constant * weight,
                p.monomial.clone(),
                p.factors().to_vec(),
            )
            .unwrap(),
        ),
        _ => None,
    };
    single(&inst.rhs)
        .or_else(|| single(&inst.lhs))
        .ok_or_else(|| {
            Error::InvalidParams(format!("{label} has no side that is a single product"))
        })
}

/// Outcome of one table row in [`cross_check`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrossCheckRow {
    pub id: String,
    pub table: String,
    pub identity: String,
    #[serde(rename = "printed_C", with = "crate::rat::serde_rat")]
    pub printed_c: Rat,
    #[serde(
        rename = "required_C",
        default,
        skip_serializing_if = "Option::is_none",
        with = "opt_rat"
    )]
    pub required_c: Option<Rat>,
    pub agrees: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Computes `C` for every linked row and sets it beside the printed value.
/// Disagreements are reported, not raised.
pub fn cross_check(
    rows: &[QuadrupleRow],
    entries: &[IdentityEntry],
    order: &Rat,
) -> Vec<CrossCheckRow> {
    let linked: Vec<&QuadrupleRow> = rows.iter().filter(|r| r.identity.is_some()).collect();
    linked
        .par_iter()
        .map(|r| {
            let identity = r.identity.clone().unwrap();
            let got = r
                .product(entries)
                .and_then(|p| required_C(&r.nahm, &p, order));
            let (required_c, error) = match got {
                Ok(c) => (Some(c), None),
                Err(e) => (None, Some(e.to_string())),
            };
            CrossCheckRow {
                id: r.id.clone(),
                table: r.table.clone(),
                identity,
                agrees: required_c.as_ref() == Some(&r.printed_c),
                printed_c: r.printed_c.clone(),
                required_c,
                error,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn q(e: i64) -> SignedMonomial {
        SignedMonomial::q(int(e))
    }

    #[test]
    fn peeling_small_cases() {
        let f = eval_product(
            &ProductSpec::new(int(1), int(0), vec![PochFactor::new(q(1), q(1), -1)]).unwrap(),
            &int(12),
        )
        .unwrap();
        assert_eq!(prodmake(&f, &int(12)).unwrap().e, vec![1; 12]);
        let geo =
            PuiseuxSeries::from_terms((0..=10).map(|k| (int(k), int(1))), Order::Finite(int(10)));
        let p = prodmake(&geo, &int(10)).unwrap();
        assert_eq!(p.e[0], 1);
        assert!(p.e[1..].iter().all(|&x| x == 0));
        let bad = PuiseuxSeries::from_terms(
            [(int(0), int(1)), (int(1), rat(1, 2))],
            Order::Finite(int(5)),
        );
        assert!(matches!(
            prodmake(&bad, &int(5)),
            Err(Error::NotAProduct { index: 1, .. })
        ));
    }

    #[test]
    fn weights_of_basic_products() {
        assert_eq!(
            eta_weight_exponent(&ProductSpec::j(int(1)))
                .unwrap()
                .exponent,
            rat(1, 24)
        );
        let rr = ProductSpec::new(
            int(1),
            int(0),
            vec![
                PochFactor::new(q(1), q(5), -1),
                PochFactor::new(q(4), q(5), -1),
            ],
        )
        .unwrap();
        assert_eq!(eta_weight_exponent(&rr).unwrap().exponent, rat(-1, 60));
        let half = ProductSpec::new(
            int(1),
            int(0),
            vec![PochFactor::new(SignedMonomial::neg_q(rat(1, 2)), q(1), 1)],
        )
        .unwrap();
        assert_eq!(eta_weight_exponent(&half).unwrap().exponent, rat(-1, 48));
        assert_eq!(
            eta_weight_exponent(&ProductSpec::j(int(3))).unwrap().weight,
            rat(1, 2)
        );
    }

    #[test]
    fn shapes_agree_across_spellings() {
        // (−q;q)_∞ = 1/(q;q²)_∞
        let a = ProductSpec::new(
            int(1),
            int(0),
            vec![PochFactor::new(SignedMonomial::neg_q(int(1)), q(1), 1)],
        )
        .unwrap();
        let b = ProductSpec::new(int(1), int(0), vec![PochFactor::new(q(1), q(2), -1)]).unwrap();
        assert_eq!(normalize(&a).unwrap(), normalize(&b).unwrap());
        let sa = normalize(&a).unwrap();
        assert_eq!(
            (sa.period, sa.pattern.clone(), sa.denom),
            (2, vec![1, 0], 1)
        );
        // (q²;q)_∞ = (q;q)_∞/(1 − q)
        let c = ProductSpec::new(int(1), int(0), vec![PochFactor::new(q(2), q(1), 1)]).unwrap();
        let sc = normalize(&c).unwrap();
        assert_eq!(sc.pattern, vec![-1]);
        assert_eq!(sc.corrections, BTreeMap::from([(1, 1)]));
        // (−1;q)_∞ = 2(−q;q)_∞
        let d = ProductSpec::new(
            int(1),
            int(0),
            vec![PochFactor::new(SignedMonomial::neg_q(int(0)), q(1), 1)],
        )
        .unwrap();
        let sd = normalize(&d).unwrap();
        assert_eq!(sd.constant, int(2));
        assert_eq!(sd.pattern, vec![1, 0]);
    }

    #[test]
    fn grid_cosets() {
        assert_eq!(
            coset_representatives(&[vec![2, 0], vec![0, 2]])
                .unwrap()
                .len(),
            4
        );
        assert_eq!(
            coset_representatives(&[vec![2, 0], vec![0, 1]]).unwrap(),
            vec![vec![0, 0], vec![1, 0]]
        );
        assert_eq!(
            coset_representatives(&[vec![3]]).unwrap(),
            vec![vec![0], vec![1], vec![2]]
        );
        assert!(search_quadruples(&SearchGrid::default(), &int(10), 2)
            .unwrap()
            .is_empty());
    }
}
