//! q-Pochhammer symbols, Gaussian binomials, theta sums and product evaluation.
//!
//! Every product is reduced to binomials `(1 − c·q^e)^k` with `c = ±1`, which
//! are applied in place to a dense integer buffer. Binomials with `e ≤ 0`
//! (finitely many per factor) are peeled off first: `1 − c·q^e` becomes
//! `−c·q^e·(1 − c·q^{−e})`, and `e = 0` contributes `2` or `0`.

use crate::dense;
use crate::error::{Error, Result};
use crate::int::Int;
use crate::rat::{denom_u64, floor_i64, fmt_rat, int, lcm_u64, Rat};
use crate::series::{Order, PuiseuxSeries};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

/// `sign·q^exp`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SignedMonomial {
    pub sign: i8,
    #[serde(with = "crate::rat::serde_rat")]
    pub exp: Rat,
}

impl SignedMonomial {
    pub fn new(sign: i8, exp: Rat) -> Self {
        assert!(sign == 1 || sign == -1, "sign must be ±1");
        SignedMonomial { sign, exp }
    }

    /// `q^exp`.
    pub fn q(exp: Rat) -> Self {
        Self::new(1, exp)
    }

    /// `−q^exp`.
    pub fn neg_q(exp: Rat) -> Self {
        Self::new(-1, exp)
    }

    pub fn times(&self, o: &SignedMonomial) -> SignedMonomial {
        SignedMonomial::new(self.sign * o.sign, &self.exp + &o.exp)
    }

    pub fn pow(&self, k: i64) -> SignedMonomial {
        let sign = if k.rem_euclid(2) == 1 { self.sign } else { 1 };
        SignedMonomial::new(sign, &self.exp * BigInt::from(k))
    }

    /// `k`-th binomial `(sign, exp)` of `(self; base)_∞`.
    fn binomial(&self, base: &SignedMonomial, k: i64) -> (i8, Rat) {
        let t = self.times(&base.pow(k));
        (t.sign, t.exp)
    }
}

impl fmt::Display for SignedMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.sign < 0 { "-" } else { "" };
        if self.exp.is_zero() {
            write!(f, "{s}1")
        } else if self.exp.is_one() {
            write!(f, "{s}q")
        } else {
            write!(f, "{s}q^{}", fmt_rat(&self.exp))
        }
    }
}

/// `(arg; base)_∞^power`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PochFactor {
    pub arg: SignedMonomial,
    pub base: SignedMonomial,
    pub power: i64,
}

impl PochFactor {
    pub fn new(arg: SignedMonomial, base: SignedMonomial, power: i64) -> Self {
        PochFactor { arg, base, power }
    }

    fn sort_key(&self) -> (Rat, Rat, i8, i8) {
        (
            self.base.exp.clone(),
            self.arg.exp.clone(),
            self.arg.sign,
            self.base.sign,
        )
    }
}

/// `constant · q^monomial · Π (arg; base)_∞^power` with canonically sorted factors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ProductJson", into = "ProductJson")]
pub struct ProductSpec {
    pub constant: Rat,
    pub monomial: Rat,
    factors: Vec<PochFactor>,
}

impl ProductSpec {
    /// Merges repeated factors, drops zero powers and sorts by (base exp, arg exp, sign).
    pub fn new(constant: Rat, monomial: Rat, factors: Vec<PochFactor>) -> Result<Self> {
        let mut fs: Vec<PochFactor> = Vec::new();
        for f in factors {
            if !f.base.exp.is_positive() {
                return Err(Error::DivergentProduct(format!(
                    "base {} must have positive exponent",
                    f.base
                )));
            }
            match fs.iter_mut().find(|g| g.arg == f.arg && g.base == f.base) {
                Some(g) => g.power += f.power,
                None => fs.push(f),
            }
        }
        fs.retain(|f| f.power != 0);
        fs.sort_by_key(|f| f.sort_key());
        Ok(ProductSpec {
            constant,
            monomial,
            factors: fs,
        })
    }

    pub fn one() -> Self {
        ProductSpec {
            constant: Rat::one(),
            monomial: Rat::zero(),
            factors: Vec::new(),
        }
    }

    pub fn factors(&self) -> &[PochFactor] {
        &self.factors
    }

    /// `J_m = (q^m; q^m)_∞`.
    pub fn j(m: Rat) -> Self {
        Self::new(
            Rat::one(),
            Rat::zero(),
            vec![PochFactor::new(
                SignedMonomial::q(m.clone()),
                SignedMonomial::q(m),
                1,
            )],
        )
        .unwrap()
    }

    /// `J_{a,m} = (q^a, q^{m−a}, q^m; q^m)_∞`.
    pub fn jam(a: Rat, m: Rat) -> Self {
        let base = SignedMonomial::q(m.clone());
        Self::new(
            Rat::one(),
            Rat::zero(),
            vec![
                PochFactor::new(SignedMonomial::q(a.clone()), base.clone(), 1),
                PochFactor::new(SignedMonomial::q(&m - &a), base.clone(), 1),
                PochFactor::new(base.clone(), base, 1),
            ],
        )
        .unwrap()
    }

    pub fn times(&self, o: &ProductSpec) -> ProductSpec {
        let mut fs = self.factors.clone();
        fs.extend(o.factors.iter().cloned());
        Self::new(
            &self.constant * &o.constant,
            &self.monomial + &o.monomial,
            fs,
        )
        .unwrap()
    }

    pub fn pow(&self, k: i64) -> ProductSpec {
        let constant = if k >= 0 {
            num_traits::pow(self.constant.clone(), k as usize)
        } else {
            num_traits::pow(self.constant.recip(), k.unsigned_abs() as usize)
        };
        let fs = self
            .factors
            .iter()
            .map(|f| PochFactor::new(f.arg.clone(), f.base.clone(), f.power * k))
            .collect();
        Self::new(constant, &self.monomial * BigInt::from(k), fs).unwrap()
    }

    pub fn inverse(&self) -> ProductSpec {
        self.pow(-1)
    }

    pub fn eval(&self, n: &Rat) -> Result<PuiseuxSeries> {
        eval_product(self, n)
    }
}

impl fmt::Display for ProductSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_rat(&self.constant))?;
        if !self.monomial.is_zero() {
            write!(f, "*q^{}", fmt_rat(&self.monomial))?;
        }
        for fac in &self.factors {
            write!(f, "*({};{})^{}", fac.arg, fac.base, fac.power)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct FactorJson {
    arg_sign: i8,
    #[serde(with = "crate::rat::serde_rat")]
    arg_exp: Rat,
    base_sign: i8,
    #[serde(with = "crate::rat::serde_rat")]
    base_exp: Rat,
    power: i64,
}

/// Wire form of [`ProductSpec`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProductJson {
    #[serde(with = "crate::rat::serde_rat")]
    constant: Rat,
    #[serde(with = "crate::rat::serde_rat", default = "Rat::zero")]
    monomial: Rat,
    #[serde(default)]
    factors: Vec<FactorJson>,
}

impl From<ProductSpec> for ProductJson {
    fn from(p: ProductSpec) -> Self {
        ProductJson {
            constant: p.constant,
            monomial: p.monomial,
            factors: p
                .factors
                .into_iter()
                .map(|f| FactorJson {
                    arg_sign: f.arg.sign,
                    arg_exp: f.arg.exp,
                    base_sign: f.base.sign,
                    base_exp: f.base.exp,
                    power: f.power,
                })
                .collect(),
        }
    }
}

impl TryFrom<ProductJson> for ProductSpec {
    type Error = String;
    fn try_from(j: ProductJson) -> std::result::Result<Self, String> {
        let mut fs = Vec::new();
        for f in j.factors {
            for s in [f.arg_sign, f.base_sign] {
                if s != 1 && s != -1 {
                    return Err(format!("sign must be 1 or -1, got {s}"));
                }
            }
            fs.push(PochFactor::new(
                SignedMonomial::new(f.arg_sign, f.arg_exp),
                SignedMonomial::new(f.base_sign, f.base_exp),
                f.power,
            ));
        }
        ProductSpec::new(j.constant, j.monomial, fs).map_err(|e| e.to_string())
    }
}

// ---------------------------------------------------------------------------
// Binomial expansion engine

/// Accumulates `constant · q^monomial · Π (1 − sign·q^exp)^mult` with `exp > 0`.
pub(crate) struct Expansion {
    constant: Rat,
    monomial: Rat,
    binoms: Vec<(i8, Rat, i64)>,
    vanishes: bool,
}

impl Expansion {
    pub(crate) fn new(constant: Rat, monomial: Rat) -> Self {
        let vanishes = constant.is_zero();
        Expansion {
            constant,
            monomial,
            binoms: Vec::new(),
            vanishes,
        }
    }

    /// Adds `(1 − sign·q^exp)^mult`, peeling nonpositive exponents.
    pub(crate) fn push(&mut self, sign: i8, exp: Rat, mult: i64) -> Result<()> {
        if mult == 0 {
            return Ok(());
        }
        if exp.is_zero() {
            if sign == 1 {
                if mult > 0 {
                    self.vanishes = true;
                    return Ok(());
                }
                return Err(Error::NotInvertible);
            }
            self.constant *= pow_rat(&int(2), mult);
            return Ok(());
        }
        if exp.is_negative() {
            self.constant *= pow_rat(&int(-(sign as i64)), mult);
            self.monomial += &exp * BigInt::from(mult);
            self.binoms.push((sign, -exp, mult));
            return Ok(());
        }
        self.binoms.push((sign, exp, mult));
        Ok(())
    }

    pub(crate) fn monomial(&self) -> &Rat {
        &self.monomial
    }

    /// Expansion known to order `n`.
    pub(crate) fn eval(self, n: &Rat) -> PuiseuxSeries {
        let order = Order::Finite(n.clone());
        if self.vanishes {
            return PuiseuxSeries::zero(order);
        }
        let span = n - &self.monomial;
        if span.is_negative() {
            return PuiseuxSeries::zero(order);
        }
        let live: Vec<&(i8, Rat, i64)> =
            self.binoms.iter().filter(|(_, e, _)| *e <= span).collect();
        let denom = live
            .iter()
            .fold(1u64, |d, (_, e, _)| lcm_u64(d, denom_u64(e)));
        let len = (floor_i64(&(&span * BigInt::from(denom))) + 1) as usize;
        let mut buf = vec![Int::ZERO; len];
        buf[0] = Int::ONE;
        for (sign, e, mult) in live {
            let shift = (e * BigInt::from(denom)).to_integer().to_usize().unwrap();
            for _ in 0..mult.unsigned_abs() {
                if *mult > 0 {
                    dense::mul_binomial(&mut buf, *sign, shift);
                } else {
                    dense::div_binomial(&mut buf, *sign, shift);
                }
            }
        }
        PuiseuxSeries::from_ints(denom, 0, buf, Order::Finite(span))
            .shift(&self.monomial)
            .scale_by(&self.constant)
    }
}

fn pow_rat(r: &Rat, k: i64) -> Rat {
    if k >= 0 {
        num_traits::pow(r.clone(), k as usize)
    } else {
        num_traits::pow(r.recip(), k.unsigned_abs() as usize)
    }
}

fn check_base(base: &SignedMonomial) -> Result<()> {
    if base.exp.is_positive() {
        Ok(())
    } else {
        Err(Error::DivergentProduct(format!(
            "base {base} must have positive exponent"
        )))
    }
}

/// `(a; base)_n` truncated to order `n_order`.
pub fn poch_finite(
    a: &SignedMonomial,
    base: &SignedMonomial,
    n: i64,
    n_order: &Rat,
) -> Result<PuiseuxSeries> {
    if n < 0 {
        return Err(Error::InvalidParams(format!(
            "finite Pochhammer length {n} is negative"
        )));
    }
    let mut ex = Expansion::new(Rat::one(), Rat::zero());
    for k in 0..n {
        let (s, e) = a.binomial(base, k);
        ex.push(s, e, 1)?;
    }
    Ok(ex.eval(n_order))
}

/// `(a; base)_∞` truncated to order `n_order`.
pub fn poch_infinite(
    a: &SignedMonomial,
    base: &SignedMonomial,
    n_order: &Rat,
) -> Result<PuiseuxSeries> {
    check_base(base)?;
    if !a.exp.is_positive() {
        return Err(Error::DivergentProduct(format!(
            "argument {a} must have positive exponent"
        )));
    }
    let p = ProductSpec::new(
        Rat::one(),
        Rat::zero(),
        vec![PochFactor::new(a.clone(), base.clone(), 1)],
    )?;
    eval_product(&p, n_order)
}

/// `1/(a; base)_n`, which is the zero series for `n < 0`.
pub fn finite_length_reciprocal(
    n: i64,
    a: &SignedMonomial,
    base: &SignedMonomial,
    n_order: &Rat,
) -> Result<PuiseuxSeries> {
    if n < 0 {
        return Ok(PuiseuxSeries::zero(Order::Finite(n_order.clone())));
    }
    let mut ex = Expansion::new(Rat::one(), Rat::zero());
    for k in 0..n {
        let (s, e) = a.binomial(base, k);
        ex.push(s, e, -1)?;
    }
    Ok(ex.eval(n_order))
}

/// Coefficients of the Gaussian polynomial `[n m]_z` in `z`.
pub fn gaussian_coeffs(n: i64, m: i64) -> Vec<Int> {
    if m < 0 || m > n {
        return Vec::new();
    }
    let deg = (m * (n - m)) as usize;
    let mut buf = vec![Int::ZERO; deg + 1];
    buf[0] = Int::ONE;
    for k in (n - m + 1)..=n {
        dense::mul_binomial(&mut buf, 1, k as usize);
    }
    for k in 1..=m {
        dense::div_binomial(&mut buf, 1, k as usize);
    }
    buf
}

/// Exact `[n m]` in the base `z = sign·q^e`, of infinite order.
pub fn qbinomial_exact(n: i64, m: i64, base: &SignedMonomial) -> Result<PuiseuxSeries> {
    check_base(base)?;
    let c = gaussian_coeffs(n, m);
    let terms = c.iter().enumerate().map(|(k, v)| {
        let v = Rat::from_integer(v.to_big());
        let s = if base.sign < 0 && k % 2 == 1 { -v } else { v };
        (&base.exp * BigInt::from(k), s)
    });
    Ok(PuiseuxSeries::from_terms(terms, Order::Infinite))
}

/// `[n m]` in the given base, truncated to `n_order`; zero outside `0 ≤ m ≤ n`.
pub fn qbinomial(n: i64, m: i64, base: &SignedMonomial, n_order: &Rat) -> Result<PuiseuxSeries> {
    Ok(qbinomial_exact(n, m, base)?.truncate(n_order))
}

/// `Σ_{n∈Z} q^{an²+bn}` over the terms with exponent `≤ n_order`.
pub fn theta_sum(a: &Rat, b: &Rat, n_order: &Rat) -> Result<PuiseuxSeries> {
    theta_sum_signed(a, b, 1, n_order)
}

/// `Σ_{n∈Z} sign^n q^{an²+bn}`.
pub fn theta_sum_signed(a: &Rat, b: &Rat, sign: i8, n_order: &Rat) -> Result<PuiseuxSeries> {
    if !a.is_positive() {
        return Err(Error::DivergentTheta(fmt_rat(a)));
    }
    let center = floor_i64(&(-b / (a * BigInt::from(2))));
    let val = |n: i64| -> Rat { a * BigInt::from(n * n) + b * BigInt::from(n) };
    let mut terms = Vec::new();
    let mut push = |n: i64| {
        let c = if sign < 0 && n.rem_euclid(2) == 1 {
            -Rat::one()
        } else {
            Rat::one()
        };
        terms.push((val(n), c));
    };
    let mut n = center;
    while val(n) <= *n_order {
        push(n);
        n += 1;
    }
    let mut n = center - 1;
    while val(n) <= *n_order {
        push(n);
        n -= 1;
    }
    Ok(PuiseuxSeries::from_terms(
        terms,
        Order::Finite(n_order.clone()),
    ))
}

/// `(−z, −q/z, q; q)_∞` for a monomial `z`.
pub fn triple_product(z: &SignedMonomial) -> ProductSpec {
    let q = SignedMonomial::q(Rat::one());
    let f1 = PochFactor::new(SignedMonomial::new(-z.sign, z.exp.clone()), q.clone(), 1);
    let f2 = PochFactor::new(
        SignedMonomial::new(-z.sign, Rat::one() - &z.exp),
        q.clone(),
        1,
    );
    let f3 = PochFactor::new(q.clone(), q, 1);
    ProductSpec::new(Rat::one(), Rat::zero(), vec![f1, f2, f3]).unwrap()
}

/// `constant · q^monomial · Π factors^power` to order `n_order`.
pub fn eval_product(p: &ProductSpec, n_order: &Rat) -> Result<PuiseuxSeries> {
    let mut ex = Expansion::new(p.constant.clone(), p.monomial.clone());
    let mut first_positive = Vec::with_capacity(p.factors.len());
    for f in &p.factors {
        check_base(&f.base)?;
        let mut k = 0i64;
        loop {
            let (s, e) = f.arg.binomial(&f.base, k);
            if e.is_positive() {
                break;
            }
            ex.push(s, e, f.power)?;
            k += 1;
        }
        first_positive.push(k);
    }
    let bound = n_order - ex.monomial();
    for (f, k0) in p.factors.iter().zip(first_positive) {
        let mut k = k0;
        loop {
            let (s, e) = f.arg.binomial(&f.base, k);
            if e > bound {
                break;
            }
            ex.push(s, e, f.power)?;
            k += 1;
        }
    }
    Ok(ex.eval(n_order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn q(e: i64) -> SignedMonomial {
        SignedMonomial::q(int(e))
    }

    fn ints(s: &PuiseuxSeries) -> Vec<i64> {
        s.coeffs()
            .iter()
            .map(|c| c.to_integer().to_i64().unwrap())
            .collect()
    }

    #[test]
    fn finite_products() {
        assert_eq!(
            ints(&poch_finite(&q(1), &q(1), 3, &int(20)).unwrap()),
            vec![1, -1, -1, 0, 1, 1, -1]
        );
        assert_eq!(
            ints(&poch_finite(&SignedMonomial::neg_q(int(1)), &q(1), 2, &int(20)).unwrap()),
            vec![1, 1, 1, 1]
        );
        assert_eq!(
            ints(&poch_finite(&q(5), &q(1), 0, &int(20)).unwrap()),
            vec![1]
        );
    }

    #[test]
    fn pentagonal() {
        let e = poch_infinite(&q(1), &q(1), &int(12)).unwrap();
        assert_eq!(ints(&e), vec![1, -1, -1, 0, 0, 1, 0, 1, 0, 0, 0, 0, -1]);
        assert!(poch_infinite(&q(0), &q(1), &int(5)).is_err());
    }

    #[test]
    fn reciprocal_lengths() {
        assert!(finite_length_reciprocal(-1, &q(1), &q(1), &int(10))
            .unwrap()
            .is_zero());
        assert_eq!(
            ints(&finite_length_reciprocal(0, &q(1), &q(1), &int(10)).unwrap()),
            vec![1]
        );
        assert_eq!(
            ints(&finite_length_reciprocal(2, &q(1), &q(1), &int(6)).unwrap()),
            vec![1, 1, 2, 2, 3, 3, 4]
        );
    }

    #[test]
    fn gaussian() {
        assert_eq!(
            ints(&qbinomial(4, 2, &q(1), &int(20)).unwrap()),
            vec![1, 1, 2, 1, 1]
        );
        assert!(qbinomial(2, 5, &q(1), &int(20)).unwrap().is_zero());
        assert_eq!(ints(&qbinomial(7, 0, &q(1), &int(20)).unwrap()), vec![1]);
    }

    #[test]
    fn theta() {
        let t = theta_sum(&int(1), &int(0), &int(9)).unwrap();
        assert_eq!(
            t.terms(),
            vec![
                (int(0), int(1)),
                (int(1), int(2)),
                (int(4), int(2)),
                (int(9), int(2))
            ]
        );
        let t = theta_sum(&rat(1, 2), &rat(1, 2), &int(6)).unwrap();
        assert_eq!(
            t.terms().iter().map(|(e, _)| e.clone()).collect::<Vec<_>>(),
            vec![int(0), int(1), int(3), int(6)]
        );
        assert!(t.terms().iter().all(|(_, c)| *c == int(2)));
        assert!(theta_sum(&int(0), &int(1), &int(5)).is_err());
    }

    #[test]
    fn peeled_factors() {
        // (-q^{-1}; q)_∞ = (1 + q^{-1})(-1; q)... check against the direct Laurent product.
        let p = ProductSpec::new(
            Rat::one(),
            Rat::zero(),
            vec![PochFactor::new(SignedMonomial::neg_q(int(-1)), q(1), 1)],
        )
        .unwrap();
        let lhs = eval_product(&p, &int(10)).unwrap();
        let tail = poch_infinite(&SignedMonomial::neg_q(int(1)), &q(1), &int(11)).unwrap();
        let head =
            PuiseuxSeries::from_terms([(int(-1), int(2)), (int(0), int(2))], Order::Infinite);
        assert_eq!(
            crate::series::equal_to_order(&lhs, &head.mul(&tail), &int(10)).unwrap(),
            crate::series::Comparison::Equal
        );
        let zero = ProductSpec::new(
            Rat::one(),
            Rat::zero(),
            vec![PochFactor::new(q(-2), q(1), 1)],
        )
        .unwrap();
        assert!(eval_product(&zero, &int(10)).unwrap().is_zero());
    }

    #[test]
    fn canonical_factor_order() {
        let a = PochFactor::new(q(3), q(8), 1);
        let b = PochFactor::new(q(1), q(2), -1);
        let p1 = ProductSpec::new(Rat::one(), Rat::zero(), vec![a.clone(), b.clone()]).unwrap();
        let p2 = ProductSpec::new(
            Rat::one(),
            Rat::zero(),
            vec![b.clone(), a.clone(), b.clone(), b.clone().tap_inv()],
        )
        .unwrap();
        assert_eq!(p1, p2);
        let j: String = serde_json::to_string(&p1).unwrap();
        assert_eq!(serde_json::from_str::<ProductSpec>(&j).unwrap(), p1);
    }

    trait TapInv {
        fn tap_inv(self) -> Self;
    }

    impl TapInv for PochFactor {
        fn tap_inv(mut self) -> Self {
            self.power = -self.power;
            self
        }
    }
}
