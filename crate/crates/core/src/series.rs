//! Truncated Puiseux series in `q` with exact rational coefficients.
//!
//! A series lives on the exponent lattice `(1/D)·Z`. Coefficients are stored
//! densely as integer numerators over one common positive denominator, from the
//! lowest nonzero index `lo` upwards. The truncation order is tracked per series:
//! coefficients above it are unknown, and every operation propagates it
//! pessimistically.

use crate::error::{Error, Result};
use crate::int::{gcd_with, Int};
use crate::rat::{denom_u64, floor_i64, fmt_rat, gcd_u64, lcm_u64, parse_rat, Rat};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

/// Truncation bound of a series. `Infinite` marks exactly known series.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Order {
    Finite(Rat),
    Infinite,
}

impl Order {
    pub fn finite(&self) -> Option<&Rat> {
        match self {
            Order::Finite(r) => Some(r),
            Order::Infinite => None,
        }
    }

    pub fn plus(&self, e: &Rat) -> Order {
        match self {
            Order::Finite(r) => Order::Finite(r + e),
            Order::Infinite => Order::Infinite,
        }
    }

    pub fn plus_order(&self, o: &Order) -> Order {
        match (self, o) {
            (Order::Finite(a), Order::Finite(b)) => Order::Finite(a + b),
            _ => Order::Infinite,
        }
    }

    fn max_index(&self, denom: u64) -> Option<i64> {
        self.finite().map(|r| floor_i64(&(r * BigInt::from(denom))))
    }
}

impl PartialOrd for Order {
    fn partial_cmp(&self, o: &Order) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Order {
    fn cmp(&self, o: &Order) -> Ordering {
        match (self, o) {
            (Order::Finite(a), Order::Finite(b)) => a.cmp(b),
            (Order::Finite(_), Order::Infinite) => Ordering::Less,
            (Order::Infinite, Order::Finite(_)) => Ordering::Greater,
            (Order::Infinite, Order::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(r) => write!(f, "{}", fmt_rat(r)),
            Order::Infinite => write!(f, "inf"),
        }
    }
}

impl From<Rat> for Order {
    fn from(r: Rat) -> Order {
        Order::Finite(r)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PuiseuxSeries {
    denom: u64,
    lo: i64,
    nums: Vec<Int>,
    scale: BigInt,
    order: Order,
}

/// Result of [`equal_to_order`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Comparison {
    Equal,
    FirstMismatch { exponent: Rat, lhs: Rat, rhs: Rat },
}

impl Comparison {
    pub fn is_equal(&self) -> bool {
        matches!(self, Comparison::Equal)
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Comparison::Equal => write!(f, "Equal"),
            Comparison::FirstMismatch { exponent, lhs, rhs } => write!(
                f,
                "FirstMismatch(q^{}: {} vs {})",
                fmt_rat(exponent),
                fmt_rat(lhs),
                fmt_rat(rhs)
            ),
        }
    }
}

impl PuiseuxSeries {
    /// Canonicalizing constructor: truncates to the order, strips leading and
    /// trailing zeros, reduces the lattice and the common denominator.
    pub(crate) fn build(
        denom: u64,
        lo: i64,
        mut nums: Vec<Int>,
        scale: BigInt,
        order: Order,
    ) -> Self {
        assert!(denom > 0 && !scale.is_zero());
        if let Some(max) = order.max_index(denom) {
            let keep = (max - lo + 1).max(0) as usize;
            nums.truncate(keep);
        }
        let first = nums.iter().position(|c| !c.is_zero());
        let Some(first) = first else {
            return Self::zero(order);
        };
        let last = nums.iter().rposition(|c| !c.is_zero()).unwrap();
        nums.truncate(last + 1);
        nums.drain(..first);
        let lo = lo + first as i64;

        let mut g = denom;
        for (k, c) in nums.iter().enumerate() {
            if g == 1 {
                break;
            }
            if !c.is_zero() {
                g = gcd_u64(g, (lo + k as i64).unsigned_abs());
            }
        }
        let (denom, lo, nums) = if g > 1 {
            let reduced: Vec<Int> = nums.into_iter().step_by(g as usize).collect();
            (denom / g, lo / g as i64, reduced)
        } else {
            (denom, lo, nums)
        };

        let (mut nums, mut scale) = (nums, scale);
        if scale.is_negative() {
            scale = -scale;
            nums = nums.iter().map(Int::neg).collect();
        }
        if !scale.is_one() {
            let g = gcd_with(&scale, &nums);
            if !g.is_one() {
                scale /= &g;
                let gi = g;
                nums = nums
                    .iter()
                    .map(|c| Int::from_big(c.to_big() / &gi))
                    .collect();
            }
        }
        PuiseuxSeries {
            denom,
            lo,
            nums,
            scale,
            order,
        }
    }

    pub(crate) fn from_ints(denom: u64, lo: i64, nums: Vec<Int>, order: Order) -> Self {
        Self::build(denom, lo, nums, BigInt::one(), order)
    }

    pub fn zero(order: Order) -> Self {
        PuiseuxSeries {
            denom: 1,
            lo: 0,
            nums: Vec::new(),
            scale: BigInt::one(),
            order,
        }
    }

    pub fn one(order: Order) -> Self {
        Self::monomial(Rat::one(), Rat::zero(), order)
    }

    /// `c·q^e` known to `order`.
    pub fn monomial(c: Rat, e: Rat, order: Order) -> Self {
        Self::from_terms([(e, c)], order)
    }

    /// Sum of `coeff·q^exp` terms; repeated exponents add up.
    pub fn from_terms<I: IntoIterator<Item = (Rat, Rat)>>(terms: I, order: Order) -> Self {
        let terms: Vec<(Rat, Rat)> = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        if terms.is_empty() {
            return Self::zero(order);
        }
        let denom = terms
            .iter()
            .fold(1u64, |d, (e, _)| lcm_u64(d, denom_u64(e)));
        let scale = terms
            .iter()
            .fold(BigInt::one(), |s, (_, c)| s.lcm(c.denom()));
        let idx: Vec<i64> = terms
            .iter()
            .map(|(e, _)| (e * BigInt::from(denom)).to_integer().to_i64().unwrap())
            .collect();
        let lo = *idx.iter().min().unwrap();
        let hi = *idx.iter().max().unwrap();
        let mut nums = vec![Int::ZERO; (hi - lo + 1) as usize];
        for ((_, c), k) in terms.iter().zip(&idx) {
            let v = c.numer() * (&scale / c.denom());
            nums[(k - lo) as usize].add_assign(&Int::from_big(v));
        }
        Self::build(denom, lo, nums, scale, order)
    }

    /// Dense coefficients `coeffs[k]` of `q^{(lo+k)/denom}`.
    pub fn from_coeffs(denom: u64, lo: i64, coeffs: &[Rat], order: Order) -> Self {
        let d = BigInt::from(denom);
        let terms = coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| (Rat::new(BigInt::from(lo + k as i64), d.clone()), c.clone()));
        let s = Self::from_terms(terms, order);
        if s.is_zero() {
            return s;
        }
        s
    }

    pub fn denom(&self) -> u64 {
        self.denom
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn order(&self) -> &Order {
        &self.order
    }

    pub fn is_zero(&self) -> bool {
        self.nums.is_empty()
    }

    /// Lowest exponent with a nonzero coefficient.
    pub fn valuation(&self) -> Option<Rat> {
        if self.is_zero() {
            None
        } else {
            Some(Rat::new(BigInt::from(self.lo), BigInt::from(self.denom)))
        }
    }

    /// Lower bound on the exponents of the unknown part and of the nonzero terms.
    fn valuation_order(&self) -> Order {
        match self.valuation() {
            Some(v) => Order::Finite(v),
            None => self.order.clone(),
        }
    }

    /// Dense rational coefficients from `lo` to the last nonzero term.
    pub fn coeffs(&self) -> Vec<Rat> {
        self.nums.iter().map(|c| self.coeff_rat(c)).collect()
    }

    /// Nonzero `(exponent, coefficient)` pairs in ascending exponent order.
    pub fn terms(&self) -> Vec<(Rat, Rat)> {
        let d = BigInt::from(self.denom);
        self.nums
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| {
                (
                    Rat::new(BigInt::from(self.lo + k as i64), d.clone()),
                    self.coeff_rat(c),
                )
            })
            .collect()
    }

    fn coeff_rat(&self, c: &Int) -> Rat {
        Rat::new(c.to_big(), self.scale.clone())
    }

    /// True when every known coefficient is an integer.
    pub fn has_integer_coeffs(&self) -> bool {
        self.scale.is_one()
    }

    pub fn coefficient_at(&self, e: &Rat) -> Result<Rat> {
        coefficient_at(self, e)
    }

    /// Same series with order lowered to `min(order, n)`.
    pub fn truncate(&self, n: &Rat) -> Self {
        let order = std::cmp::min(self.order.clone(), Order::Finite(n.clone()));
        Self::build(
            self.denom,
            self.lo,
            self.nums.clone(),
            self.scale.clone(),
            order,
        )
    }

    /// Multiplication by `q^e`.
    pub fn shift(&self, e: &Rat) -> Self {
        let order = self.order.plus(e);
        if self.is_zero() {
            return Self::zero(order);
        }
        let denom = lcm_u64(self.denom, denom_u64(e));
        let stride = denom / self.denom;
        let off = (e * BigInt::from(denom)).to_integer().to_i64().unwrap();
        let (lo, nums) = self.spread(stride);
        Self::build(denom, lo + off, nums, self.scale.clone(), order)
    }

    pub fn scale_by(&self, c: &Rat) -> Self {
        linear_combine(&[(c.clone(), self)])
    }

    pub fn neg(&self) -> Self {
        self.scale_by(&-Rat::one())
    }

    pub fn add(&self, o: &Self) -> Self {
        linear_combine(&[(Rat::one(), self), (Rat::one(), o)])
    }

    pub fn sub(&self, o: &Self) -> Self {
        linear_combine(&[(Rat::one(), self), (-Rat::one(), o)])
    }

    pub fn mul(&self, o: &Self) -> Self {
        mul(self, o)
    }

    /// Re-indexes onto a lattice `stride` times finer; returns `(lo, dense nums)`.
    fn spread(&self, stride: u64) -> (i64, Vec<Int>) {
        if stride == 1 {
            return (self.lo, self.nums.clone());
        }
        let s = stride as usize;
        let mut out = vec![Int::ZERO; (self.nums.len() - 1) * s + 1];
        for (k, c) in self.nums.iter().enumerate() {
            out[k * s] = c.clone();
        }
        (self.lo * stride as i64, out)
    }

    /// Nonzero `(index on a lattice stride times finer, numerator)` pairs.
    fn sparse(&self, stride: u64) -> Vec<(i64, &Int)> {
        let s = stride as i64;
        self.nums
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| ((self.lo + k as i64) * s, c))
            .collect()
    }

    pub fn to_json(&self) -> SeriesJson {
        SeriesJson {
            denom: self.denom,
            lo: self.lo,
            order: self.order.to_string(),
            coeffs: self.coeffs().iter().map(fmt_rat).collect(),
        }
    }

    pub fn from_json(j: &SeriesJson) -> Result<Self> {
        let order = if j.order == "inf" {
            Order::Infinite
        } else {
            Order::Finite(
                parse_rat(&j.order).ok_or_else(|| Error::parse("series.order", j.order.clone()))?,
            )
        };
        if j.denom == 0 {
            return Err(Error::parse("series.denom", "must be positive"));
        }
        let coeffs = j
            .coeffs
            .iter()
            .map(|s| parse_rat(s).ok_or_else(|| Error::parse("series.coeffs", s.clone())))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_coeffs(j.denom, j.lo, &coeffs, order))
    }
}

impl fmt::Display for PuiseuxSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            write!(f, "0")?;
        }
        for (i, (e, c)) in terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let e0 = e.is_zero();
            if !a.is_one() || e0 {
                write!(f, "{}", fmt_rat(&a))?;
                if !e0 {
                    write!(f, "*")?;
                }
            }
            if !e0 {
                if e.is_one() {
                    write!(f, "q")?;
                } else {
                    write!(f, "q^{}", paren(e))?;
                }
            }
        }
        if let Order::Finite(n) = &self.order {
            write!(
                f,
                " + O(q^{})",
                paren(&(n + Rat::new(BigInt::one(), BigInt::from(self.denom))))
            )?;
        }
        Ok(())
    }
}

fn paren(r: &Rat) -> String {
    if r.is_integer() && !r.is_negative() {
        fmt_rat(r)
    } else {
        format!("({})", fmt_rat(r))
    }
}

/// JSON form `{ "denom": D, "lo": lo, "order": "p/q", "coeffs": ["p/q", ...] }`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub denom: u64,
    pub lo: i64,
    pub order: String,
    pub coeffs: Vec<String>,
}

/// Weighted sum on the merged lattice, truncated to the least input order.
pub fn linear_combine(terms: &[(Rat, &PuiseuxSeries)]) -> PuiseuxSeries {
    let order = terms
        .iter()
        .map(|(_, f)| f.order.clone())
        .min()
        .unwrap_or(Order::Infinite);
    let live: Vec<&(Rat, &PuiseuxSeries)> = terms
        .iter()
        .filter(|(w, f)| !w.is_zero() && !f.is_zero())
        .collect();
    if live.is_empty() {
        return PuiseuxSeries::zero(order);
    }
    let denom = live.iter().fold(1u64, |d, (_, f)| lcm_u64(d, f.denom));
    let common = live
        .iter()
        .fold(BigInt::one(), |s, (w, f)| s.lcm(&(w.denom() * &f.scale)));
    let max = order.max_index(denom);
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for (_, f) in &live {
        let s = (denom / f.denom) as i64;
        lo = lo.min(f.lo * s);
        hi = hi.max((f.lo + f.nums.len() as i64 - 1) * s);
    }
    if let Some(m) = max {
        hi = hi.min(m);
    }
    if hi < lo {
        return PuiseuxSeries::zero(order);
    }
    let mut acc = vec![Int::ZERO; (hi - lo + 1) as usize];
    for (w, f) in &live {
        let mult = Int::from_big(w.numer() * (&common / (w.denom() * &f.scale)));
        for (k, c) in f.sparse(denom / f.denom) {
            if k > hi {
                break;
            }
            acc[(k - lo) as usize].add_mul(&mult, c);
        }
    }
    PuiseuxSeries::build(denom, lo, acc, common, order)
}

/// Cauchy product; the result is known to `min(order_f + v_g, order_g + v_f)`.
pub fn mul(f: &PuiseuxSeries, g: &PuiseuxSeries) -> PuiseuxSeries {
    let order = std::cmp::min(
        f.order.plus_order(&g.valuation_order()),
        g.order.plus_order(&f.valuation_order()),
    );
    if f.is_zero() || g.is_zero() {
        return PuiseuxSeries::zero(order);
    }
    let denom = lcm_u64(f.denom, g.denom);
    let fs = f.sparse(denom / f.denom);
    let gs = g.sparse(denom / g.denom);
    let lo = fs[0].0 + gs[0].0;
    let full = fs.last().unwrap().0 + gs.last().unwrap().0;
    let hi = match order.max_index(denom) {
        Some(m) => m.min(full),
        None => full,
    };
    if hi < lo {
        return PuiseuxSeries::zero(order);
    }
    let len = (hi - lo + 1) as usize;
    let mut acc = vec![Int::ZERO; len];
    let g0 = gs[0].0;
    for (pf, a) in &fs {
        let base = pf + g0 - lo;
        if base as usize >= len {
            break;
        }
        for (pg, b) in &gs {
            let idx = (base + pg - g0) as usize;
            if idx >= len {
                break;
            }
            acc[idx].add_mul(a, b);
        }
    }
    PuiseuxSeries::build(denom, lo, acc, &f.scale * &g.scale, order)
}

/// Multiplicative inverse; the result is known to `order_f − 2·v_f`.
pub fn invert(f: &PuiseuxSeries) -> Result<PuiseuxSeries> {
    if f.is_zero() {
        return Err(Error::NotInvertible);
    }
    let v = f.valuation().unwrap();
    let order = match &f.order {
        Order::Infinite => {
            if f.nums.len() == 1 {
                let c = Rat::new(f.scale.clone(), f.nums[0].to_big());
                return Ok(PuiseuxSeries::monomial(c, -v, Order::Infinite));
            }
            return Err(Error::UnboundedOrder);
        }
        Order::Finite(n) => n - &v - &v,
    };
    let n = (order.max_index_of(f.denom) + f.lo + 1).max(0) as usize;
    let a = &f.nums;
    let at = |k: usize| -> Option<&Int> { a.get(k) };
    let a0 = &a[0];
    let mut b: Vec<Int> = Vec::with_capacity(n);
    let unit = *a0 == Int::ONE || *a0 == Int::ONE.neg();
    if unit {
        for m in 0..n {
            if m == 0 {
                b.push(a0.clone());
                continue;
            }
            let mut s = Int::ZERO;
            for k in 1..=m {
                if let Some(ak) = at(k) {
                    if !ak.is_zero() {
                        s.add_mul(ak, &b[m - k]);
                    }
                }
            }
            // b_m = -a0 * s with a0 = ±1
            b.push(if *a0 == Int::ONE { s.neg() } else { s });
        }
        let nums: Vec<Int> = b
            .iter()
            .map(|c| c.mul(&Int::from_big(f.scale.clone())))
            .collect();
        return Ok(PuiseuxSeries::build(
            f.denom,
            -f.lo,
            nums,
            BigInt::one(),
            Order::Finite(order),
        ));
    }
    // General leading coefficient: b_m = B_m / a0^{m+1} with
    // B_0 = 1, B_m = -Σ_{k=1}^{m} a_k B_{m-k} a0^{k-1}.
    let a0b = a0.to_big();
    let mut pows = vec![BigInt::one()];
    for _ in 0..n {
        let p = pows.last().unwrap() * &a0b;
        pows.push(p);
    }
    let mut bb: Vec<BigInt> = Vec::with_capacity(n);
    for m in 0..n {
        if m == 0 {
            bb.push(BigInt::one());
            continue;
        }
        let mut s = BigInt::zero();
        for k in 1..=m {
            if let Some(ak) = at(k) {
                if !ak.is_zero() {
                    s += ak.to_big() * &bb[m - k] * &pows[k - 1];
                }
            }
        }
        bb.push(-s);
    }
    let nums: Vec<Int> = bb
        .iter()
        .enumerate()
        .map(|(m, bm)| Int::from_big(bm * &pows[n - 1 - m] * &f.scale))
        .collect();
    Ok(PuiseuxSeries::build(
        f.denom,
        -f.lo,
        nums,
        pows[n].clone(),
        Order::Finite(order),
    ))
}

trait MaxIndex {
    fn max_index_of(&self, denom: u64) -> i64;
}

impl MaxIndex for Rat {
    fn max_index_of(&self, denom: u64) -> i64 {
        floor_i64(&(self * BigInt::from(denom)))
    }
}

/// `q ↦ q^k` for rational `k > 0`.
pub fn substitute_q_power(f: &PuiseuxSeries, k: &Rat) -> Result<PuiseuxSeries> {
    if !k.is_positive() {
        return Err(Error::InvalidSubstitution(fmt_rat(k)));
    }
    let order = match &f.order {
        Order::Finite(n) => Order::Finite(n * k),
        Order::Infinite => Order::Infinite,
    };
    if f.is_zero() {
        return Ok(PuiseuxSeries::zero(order));
    }
    let p = k
        .numer()
        .to_i64()
        .expect("substitution numerator too large");
    let r = k
        .denom()
        .to_u64()
        .expect("substitution denominator too large");
    let denom = f.denom * r;
    let s = p as usize;
    let mut nums = vec![Int::ZERO; (f.nums.len() - 1) * s + 1];
    for (i, c) in f.nums.iter().enumerate() {
        nums[i * s] = c.clone();
    }
    Ok(PuiseuxSeries::build(
        denom,
        f.lo * p,
        nums,
        f.scale.clone(),
        order,
    ))
}

/// `f(x) ↦ f(−x)` with `x = q^{1/D}` on the series' own (minimal) lattice.
pub fn flip_base_sign(f: &PuiseuxSeries) -> PuiseuxSeries {
    let nums = f
        .nums
        .iter()
        .enumerate()
        .map(|(k, c)| {
            if (f.lo + k as i64).rem_euclid(2) == 1 {
                c.neg()
            } else {
                c.clone()
            }
        })
        .collect();
    PuiseuxSeries::build(f.denom, f.lo, nums, f.scale.clone(), f.order.clone())
}

pub fn coefficient_at(f: &PuiseuxSeries, e: &Rat) -> Result<Rat> {
    if let Order::Finite(n) = &f.order {
        if e > n {
            return Err(Error::OrderExceeded {
                requested: fmt_rat(e),
                available: fmt_rat(n),
            });
        }
    }
    let scaled = e * BigInt::from(f.denom);
    if !scaled.is_integer() || f.is_zero() {
        return Ok(Rat::zero());
    }
    let k = scaled.to_integer().to_i64().unwrap() - f.lo;
    if k < 0 || k as usize >= f.nums.len() {
        return Ok(Rat::zero());
    }
    Ok(f.coeff_rat(&f.nums[k as usize]))
}

/// Exact comparison of `f` and `g` at all exponents `≤ n`.
pub fn equal_to_order(f: &PuiseuxSeries, g: &PuiseuxSeries, n: &Rat) -> Result<Comparison> {
    for s in [f, g] {
        if let Order::Finite(o) = &s.order {
            if n > o {
                return Err(Error::OrderExceeded {
                    requested: fmt_rat(n),
                    available: fmt_rat(o),
                });
            }
        }
    }
    let diff = f.sub(g).truncate(n);
    match diff.valuation() {
        None => Ok(Comparison::Equal),
        Some(e) => Ok(Comparison::FirstMismatch {
            lhs: coefficient_at(f, &e)?,
            rhs: coefficient_at(g, &e)?,
            exponent: e,
        }),
    }
}

impl std::ops::Mul for &PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn mul(self, o: &PuiseuxSeries) -> PuiseuxSeries {
        mul(self, o)
    }
}

impl std::ops::Add for &PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn add(self, o: &PuiseuxSeries) -> PuiseuxSeries {
        PuiseuxSeries::add(self, o)
    }
}

impl std::ops::Sub for &PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn sub(self, o: &PuiseuxSeries) -> PuiseuxSeries {
        PuiseuxSeries::sub(self, o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    fn fin(n: i64) -> Order {
        Order::Finite(int(n))
    }

    fn poly(cs: &[i64], order: Order) -> PuiseuxSeries {
        PuiseuxSeries::from_coeffs(1, 0, &cs.iter().map(|&c| int(c)).collect::<Vec<_>>(), order)
    }

    #[test]
    fn canonical_lattice_is_minimal() {
        let f = PuiseuxSeries::from_coeffs(4, 0, &[int(1), int(0), int(1)], fin(3));
        assert_eq!(f.denom(), 2);
        let z = PuiseuxSeries::from_coeffs(3, -2, &[int(0), int(0)], fin(1));
        assert!(z.is_zero());
        assert_eq!(z.denom(), 1);
    }

    #[test]
    fn cancel_and_identity() {
        let f = poly(&[1, 2, 3], fin(5));
        let z = linear_combine(&[(int(1), &f), (int(-1), &f)]);
        assert!(z.is_zero());
        assert_eq!(z.order(), &fin(5));
        let e = linear_combine(&[]);
        assert_eq!(e.order(), &Order::Infinite);
        let g = poly(&[1, 1], Order::Infinite);
        assert_eq!(linear_combine(&[(int(1), &g)]), g);
    }

    #[test]
    fn product_and_orders() {
        let a = poly(&[1, -1], Order::Infinite);
        let b = poly(&[1, 1], Order::Infinite);
        assert_eq!(mul(&a, &b), poly(&[1, 0, -1], Order::Infinite));
        let f = poly(&[1, 1], fin(4)).shift(&int(2));
        let g = poly(&[1, 2], fin(10)).shift(&int(-1));
        // min(6 + (-1), 9 + 2)
        assert_eq!(mul(&f, &g).order(), &fin(5));
    }

    #[test]
    fn inverse_geometric_and_monomial() {
        let f = poly(&[1, -1], fin(6));
        let g = invert(&f).unwrap();
        assert_eq!(g, poly(&[1, 1, 1, 1, 1, 1, 1], fin(6)));
        let m = PuiseuxSeries::monomial(int(2), int(-2), Order::Infinite);
        assert_eq!(
            invert(&m).unwrap(),
            PuiseuxSeries::monomial(rat(1, 2), int(2), Order::Infinite)
        );
        assert_eq!(
            invert(&PuiseuxSeries::zero(fin(3))),
            Err(Error::NotInvertible)
        );
    }

    #[test]
    fn inverse_non_unit_leading() {
        let f = poly(&[2, 1, 3], fin(8)).shift(&rat(1, 2));
        let g = invert(&f).unwrap();
        let p = mul(&f, &g);
        assert_eq!(p.order(), &Order::Finite(int(8)));
        assert_eq!(
            equal_to_order(&p, &PuiseuxSeries::one(Order::Infinite), &int(7)).unwrap(),
            Comparison::Equal
        );
    }

    #[test]
    fn substitution_and_flip() {
        let f = poly(&[1, 1], Order::Infinite);
        assert_eq!(
            substitute_q_power(&f, &int(2)).unwrap(),
            poly(&[1, 0, 1], Order::Infinite)
        );
        let h = substitute_q_power(&f, &rat(1, 2)).unwrap();
        assert_eq!(h.denom(), 2);
        assert_eq!(h.coefficient_at(&rat(1, 2)).unwrap(), int(1));
        assert!(substitute_q_power(&f, &int(0)).is_err());
        assert_eq!(
            flip_base_sign(&poly(&[1, 1, 1], fin(4))),
            poly(&[1, -1, 1], fin(4))
        );
        let even = poly(&[1, 0, 3, 0, 5], fin(6));
        assert_eq!(flip_base_sign(&even), even);
    }

    #[test]
    fn coefficients() {
        let f = poly(&[1, 1], Order::Infinite).shift(&rat(-1, 4));
        assert_eq!(f.coefficient_at(&rat(-1, 4)).unwrap(), int(1));
        assert_eq!(f.coefficient_at(&rat(1, 3)).unwrap(), int(0));
        let g = poly(&[1], fin(2));
        assert!(matches!(
            g.coefficient_at(&int(3)),
            Err(Error::OrderExceeded { .. })
        ));
    }

    #[test]
    fn mismatch_report() {
        let f = poly(&[1, 1], fin(5));
        let g = poly(&[1, 1, 0, 1], fin(5));
        assert_eq!(
            equal_to_order(&f, &g, &int(3)).unwrap(),
            Comparison::FirstMismatch {
                exponent: int(3),
                lhs: int(0),
                rhs: int(1)
            }
        );
        assert!(equal_to_order(&f, &g, &int(6)).is_err());
    }

    #[test]
    fn json_round_trip() {
        let f = PuiseuxSeries::from_terms([(rat(-1, 4), rat(3, 2)), (rat(1, 2), int(-1))], fin(3));
        let j = serde_json::to_string(&f.to_json()).unwrap();
        let back: SeriesJson = serde_json::from_str(&j).unwrap();
        assert_eq!(PuiseuxSeries::from_json(&back).unwrap(), f);
    }
}
