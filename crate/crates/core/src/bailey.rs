//! Bailey pairs with parity-cased closed-form `α`, the limiting form of
//! Bailey's lemma, and the finite vanishing sum behind the explicit pairs.

use crate::error::{Error, Result};
use crate::nahm::{eval_sumspec, sumspec_term, SumSpec};
use crate::qfactors::{
    eval_product, finite_length_reciprocal, qbinomial_exact, PochFactor, ProductSpec,
    SignedMonomial,
};
use crate::rat::{int, Rat};
use crate::series::{equal_to_order, linear_combine, Comparison, Order, PuiseuxSeries};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// `coeff · q^{e₂k² + e₁k + e₀}` with `exp = [e₂, e₁, e₀]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaTerm {
    pub coeff: i64,
    #[serde(with = "crate::rat::serde_rat_vec")]
    pub exp: Vec<Rat>,
}

impl AlphaTerm {
    pub fn new(coeff: i64, e2: Rat, e1: Rat, e0: Rat) -> Self {
        AlphaTerm {
            coeff,
            exp: vec![e2, e1, e0],
        }
    }

    fn exponent_at(&self, k: i64) -> Rat {
        let k = BigInt::from(k);
        &self.exp[0] * (&k * &k) + &self.exp[1] * &k + &self.exp[2]
    }
}

/// An override of `α_n` at one index, as explicit monomials `(coeff, exponent)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaOverride {
    pub n: i64,
    pub terms: Vec<(i64, String)>,
}

/// `α_{2k}` and `α_{2k+1}` as sums of monomials in `k`, with point overrides.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaSpec {
    pub even: Vec<AlphaTerm>,
    pub odd: Vec<AlphaTerm>,
    #[serde(default)]
    pub overrides: Vec<AlphaOverride>,
}

/// `β_n = prefactor · Σ summand`, where the summand of a rank-one `sum` is
/// taken at `n − offset` and that of a rank-two `sum` over `i + j = n − offset`.
/// `β_n = 0` for `n < offset`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BetaSpec {
    pub sum: SumSpec,
    #[serde(default)]
    pub offset: i64,
    pub prefactor: ProductSpec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaileyPair {
    pub name: String,
    pub a: SignedMonomial,
    pub alpha: AlphaSpec,
    pub beta: BetaSpec,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaileyReport {
    pub checked: i64,
    pub first_failure: Option<(i64, Comparison)>,
}

impl BaileyReport {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }
}

fn parse_exp(s: &str) -> Result<Rat> {
    crate::rat::parse_rat(s).ok_or_else(|| Error::InvalidParams(format!("bad exponent {s:?}")))
}

impl BaileyPair {
    /// `α_n` as monomials `(coeff, exponent)`.
    pub fn alpha(&self, n: i64) -> Result<Vec<(i64, Rat)>> {
        if let Some(o) = self.alpha.overrides.iter().find(|o| o.n == n) {
            return o
                .terms
                .iter()
                .map(|(c, e)| Ok((*c, parse_exp(e)?)))
                .collect();
        }
        let (case, k) = if n % 2 == 0 {
            (&self.alpha.even, n / 2)
        } else {
            (&self.alpha.odd, (n - 1) / 2)
        };
        Ok(case.iter().map(|t| (t.coeff, t.exponent_at(k))).collect())
    }

    fn alpha_series(&self, n: i64) -> Result<PuiseuxSeries> {
        let terms = self.alpha(n)?;
        Ok(PuiseuxSeries::from_terms(
            terms.into_iter().map(|(c, e)| (e, int(c))),
            Order::Infinite,
        ))
    }

    /// `β_n` from its closed form, to `order`.
    pub fn beta(&self, n: i64, order: &Rat) -> Result<PuiseuxSeries> {
        let b = &self.beta;
        let m = n - b.offset;
        let ord = Order::Finite(order.clone());
        if m < 0 {
            return Ok(PuiseuxSeries::zero(ord));
        }
        let mut s = PuiseuxSeries::zero(ord.clone());
        if b.sum.rank == 1 {
            s = sumspec_term(&b.sum, &[m], order)?;
        } else {
            for i in 0..=m {
                s = s.add(&sumspec_term(&b.sum, &[i, m - i], order)?);
            }
        }
        times_product(&s, &b.prefactor, order)
    }

    /// `Σ_{r≤n} α_r / ((q;q)_{n−r} (aq;q)_{n+r})` to `order`.
    pub fn beta_from_alpha(&self, n: i64, order: &Rat) -> Result<PuiseuxSeries> {
        let q = SignedMonomial::q(Rat::one());
        let aq = self.a.times(&q);
        let mut acc = PuiseuxSeries::zero(Order::Finite(order.clone()));
        for r in 0..=n {
            let alpha = self.alpha_series(r)?;
            let Some(v) = alpha.valuation() else { continue };
            // Both reciprocals have valuation zero.
            let inner = std::cmp::max(order - &v, Rat::zero());
            let g = finite_length_reciprocal(n - r, &q, &q, &inner)?
                .mul(&finite_length_reciprocal(n + r, &aq, &q, &inner)?);
            acc = acc.add(&alpha.mul(&g).truncate(order));
        }
        Ok(acc)
    }
}

/// `f · eval(p)` exact to `order`.
fn times_product(f: &PuiseuxSeries, p: &ProductSpec, order: &Rat) -> Result<PuiseuxSeries> {
    let Some(v) = f.valuation() else {
        return Ok(PuiseuxSeries::zero(Order::Finite(order.clone())));
    };
    let g = eval_product(p, &(order - &v - &p.monomial))?;
    Ok(f.mul(&g).truncate(order))
}

/// Checks the defining relation for `n = 0..=n_max`, stopping at the first failure.
pub fn check_bailey_pair(pair: &BaileyPair, n_max: i64, order: &Rat) -> Result<BaileyReport> {
    for n in 0..=n_max {
        let lhs = pair.beta(n, order)?;
        let rhs = pair.beta_from_alpha(n, order)?;
        let c = equal_to_order(&lhs, &rhs, order)?;
        if !c.is_equal() {
            return Ok(BaileyReport {
                checked: n + 1,
                first_failure: Some((n, c)),
            });
        }
    }
    Ok(BaileyReport {
        checked: n_max + 1,
        first_failure: None,
    })
}

/// Both sides of `Σ aⁿq^{n²}β_n = (1/(aq;q)_∞) Σ aⁿq^{n²}α_n` to `order`.
pub fn bailey_limit_identity(
    pair: &BaileyPair,
    order: &Rat,
) -> Result<(PuiseuxSeries, PuiseuxSeries)> {
    let a_exp = &pair.a.exp;
    let a_sign = i64::from(pair.a.sign < 0);
    let r = |x: i64| Rat::from_integer(BigInt::from(x));

    // aⁿq^{n²} with n = (index sum) + offset folded into the β sum.
    let b = &pair.beta;
    let off = r(b.offset);
    let mut s = b.sum.clone();
    let shift_lin = &off * r(2) + a_exp;
    let shift_const = &off * &off + a_exp * &off;
    if s.rank == 1 {
        s.quad[0] += r(1);
        s.lin[0] += &shift_lin;
    } else {
        s.quad[0] += r(1);
        s.quad[1] += r(2);
        s.quad[2] += r(1);
        s.lin[0] += &shift_lin;
        s.lin[1] += &shift_lin;
    }
    s.constant += &shift_const;
    for c in s.sign.coeffs.iter_mut() {
        *c += a_sign;
    }
    s.sign.constant += a_sign * b.offset;
    let lhs_sum = eval_sumspec(&s, order)?;
    let lhs = times_product(&lhs_sum, &b.prefactor, order)?;

    // Σ aⁿq^{n²}α_n split by parity, n = 2k + p.
    let mut parts: Vec<(Rat, PuiseuxSeries)> = Vec::new();
    for (p, case) in [(0i64, &pair.alpha.even), (1, &pair.alpha.odd)] {
        for t in case {
            let spec = SumSpec::rank1(
                &t.exp[0] + r(4),
                &t.exp[1] + r(4 * p) + a_exp * r(2),
                &t.exp[2] + r(p * p) + a_exp * r(p),
            );
            let sign = if a_sign * p % 2 == 1 { -1 } else { 1 };
            parts.push((r(t.coeff * sign), eval_sumspec(&spec, order)?));
        }
    }
    for o in &pair.alpha.overrides {
        let weight = |c: i64| {
            let s = if a_sign * o.n % 2 == 1 { -1 } else { 1 };
            r(c * s)
        };
        let nq = r(o.n * o.n) + a_exp * r(o.n);
        let generic = {
            let mut q = pair.clone();
            q.alpha.overrides.clear();
            q.alpha(o.n)?
        };
        for (c, e) in generic {
            parts.push((
                -weight(c),
                PuiseuxSeries::monomial(Rat::one(), &e + &nq, Order::Infinite).truncate(order),
            ));
        }
        for (c, e) in &o.terms {
            let e = parse_exp(e)?;
            parts.push((
                weight(*c),
                PuiseuxSeries::monomial(Rat::one(), &e + &nq, Order::Infinite).truncate(order),
            ));
        }
    }
    let refs: Vec<(Rat, &PuiseuxSeries)> = parts.iter().map(|(w, s)| (w.clone(), s)).collect();
    let alpha_sum = linear_combine(&refs);
    let aq = pair.a.times(&SignedMonomial::q(Rat::one()));
    let inv = ProductSpec::new(
        Rat::one(),
        Rat::zero(),
        vec![PochFactor::new(aq, SignedMonomial::q(Rat::one()), -1)],
    )?;
    let rhs = times_product(&alpha_sum, &inv, order)?;
    Ok((lhs, rhs))
}

fn check_vanishing_params(n: i64, t: i64, s: i64) -> Result<()> {
    if n < 1 || t < 0 || s.rem_euclid(2) != 1 || s < -1 || s > 2 * t + 1 {
        return Err(Error::InvalidParams(format!(
            "need n ≥ 1, t ≥ 0 and odd s with -1 ≤ s ≤ 2t+1; got (n,t,s) = ({n},{t},{s})"
        )));
    }
    Ok(())
}

/// `(q;q)_{2n+t} · Σ_{i=−n−t}^{n} (−1)^i q^{(i²+si)/2} / ((q;q)_{n−i}(q;q)_{n+t+i})`,
/// an exact polynomial.
pub fn vanishing_numerator(n: i64, t: i64, s: i64) -> Result<PuiseuxSeries> {
    check_vanishing_params(n, t, s)?;
    let q = SignedMonomial::q(Rat::one());
    let mut parts = Vec::new();
    for i in (-n - t)..=n {
        let e = Rat::new(BigInt::from(i * i + s * i), BigInt::from(2));
        let g = qbinomial_exact(2 * n + t, n - i, &q)?.shift(&e);
        parts.push((if i % 2 == 0 { Rat::one() } else { -Rat::one() }, g));
    }
    let refs: Vec<(Rat, &PuiseuxSeries)> = parts.iter().map(|(w, s)| (w.clone(), s)).collect();
    Ok(linear_combine(&refs))
}

/// `Σ_{i=−n−t}^{n} (−1)^i q^{(i²+si)/2} / ((q;q)_{n−i}(q;q)_{n+t+i})` to `order`;
/// an exactly vanishing numerator gives the zero series of infinite order.
pub fn vanishing_sum(n: i64, t: i64, s: i64, order: &Rat) -> Result<PuiseuxSeries> {
    let num = vanishing_numerator(n, t, s)?;
    if num.is_zero() {
        return Ok(PuiseuxSeries::zero(Order::Infinite));
    }
    let q = SignedMonomial::q(Rat::one());
    let v = num.valuation().unwrap_or_else(Rat::zero);
    let den = finite_length_reciprocal(2 * n + t, &q, &q, &(order - &v))?;
    Ok(num.mul(&den).truncate(order))
}

/// The four explicit pairs relative to `a ∈ {1, q}` built from the
/// vanishing sum, plus the unit pair `α_n = δ_{n,0}`.
pub mod pairs {
    use super::*;
    use crate::nahm::{LenForm, SumFactor};
    use crate::rat::rat;

    fn qq() -> SignedMonomial {
        SignedMonomial::q(Rat::one())
    }

    /// `Σ_{i+j} q^{½(i−j)² + (s/2)(i−j)} / ((q;q)_{2i+t₁}(q;q)_{2j+t₂})`.
    fn diagonal(s: i64, t1: i64, t2: i64) -> SumSpec {
        SumSpec::rank2(rat(1, 2), int(-1), rat(1, 2), rat(s, 2), rat(-s, 2), int(0))
            .with_den(SumFactor::qq(int(1), LenForm::new(vec![2, 0], t1)))
            .with_den(SumFactor::qq(int(1), LenForm::new(vec![0, 2], t2)))
    }

    /// `(1 − q) = (q;q)_∞ / (q²;q)_∞`.
    pub fn one_minus_q() -> ProductSpec {
        ProductSpec::new(
            Rat::one(),
            Rat::zero(),
            vec![
                PochFactor::new(qq(), qq(), 1),
                PochFactor::new(SignedMonomial::q(int(2)), qq(), -1),
            ],
        )
        .unwrap()
    }

    fn term(c: i64, e2: i64, e1: i64, e0: Rat) -> AlphaTerm {
        AlphaTerm::new(c, int(e2), int(e1), e0)
    }

    pub fn unit(a: SignedMonomial) -> BaileyPair {
        let aq = a.times(&qq());
        let sum = SumSpec::rank1(int(0), int(0), int(0))
            .with_den(SumFactor::qq(int(1), LenForm::new(vec![1], 0)))
            .with_den(SumFactor::new(aq, qq(), LenForm::new(vec![1], 0)));
        BaileyPair {
            name: "unit".into(),
            a,
            alpha: AlphaSpec {
                even: vec![],
                odd: vec![],
                overrides: vec![AlphaOverride {
                    n: 0,
                    terms: vec![(1, "0".into())],
                }],
            },
            beta: BetaSpec {
                sum,
                offset: 0,
                prefactor: ProductSpec::one(),
            },
        }
    }

    /// `α_{2k} = q^{2k²}(q^k + q^{−k})` for `k ≥ 1`, `α_0 = 1`, odd terms zero.
    pub fn pair1() -> BaileyPair {
        BaileyPair {
            name: "pair-1".into(),
            a: SignedMonomial::q(int(0)),
            alpha: AlphaSpec {
                even: vec![term(1, 2, 1, int(0)), term(1, 2, -1, int(0))],
                odd: vec![],
                overrides: vec![AlphaOverride {
                    n: 0,
                    terms: vec![(1, "0".into())],
                }],
            },
            beta: BetaSpec {
                sum: diagonal(-1, 0, 0),
                offset: 0,
                prefactor: ProductSpec::one(),
            },
        }
    }

    /// `α_{2k} = q^{2k²−k}`, `α_{2k+1} = q^{2k²+5k+3}`, relative to `a = q`.
    pub fn pair2() -> BaileyPair {
        BaileyPair {
            name: "pair-2".into(),
            a: SignedMonomial::q(int(1)),
            alpha: AlphaSpec {
                even: vec![term(1, 2, -1, int(0))],
                odd: vec![term(1, 2, 5, int(3))],
                overrides: vec![],
            },
            beta: BetaSpec {
                sum: diagonal(-1, 1, 0),
                offset: 0,
                prefactor: one_minus_q(),
            },
        }
    }

    /// `α_{2k} = q^{2k²+3k}`, `α_{2k+1} = q^{2k²+k−1}`, relative to `a = q`.
    pub fn pair3() -> BaileyPair {
        BaileyPair {
            name: "pair-3".into(),
            a: SignedMonomial::q(int(1)),
            alpha: AlphaSpec {
                even: vec![term(1, 2, 3, int(0))],
                odd: vec![term(1, 2, 1, int(-1))],
                overrides: vec![],
            },
            beta: BetaSpec {
                sum: diagonal(3, 1, 0),
                offset: 0,
                prefactor: one_minus_q(),
            },
        }
    }

    /// `α_{2k+1} = q^{2k²+2k+½}(q^{k+½} + q^{−k−½})`, even terms zero;
    /// `β_n` sums over `i + j = n − 1`.
    pub fn pair4() -> BaileyPair {
        BaileyPair {
            name: "pair-4".into(),
            a: SignedMonomial::q(int(0)),
            alpha: AlphaSpec {
                even: vec![],
                odd: vec![term(1, 2, 3, int(1)), term(1, 2, 1, int(0))],
                overrides: vec![],
            },
            beta: BetaSpec {
                sum: diagonal(-1, 1, 1),
                offset: 1,
                prefactor: ProductSpec::one(),
            },
        }
    }

    pub fn all() -> Vec<BaileyPair> {
        vec![pair1(), pair2(), pair3(), pair4()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishing_small_cases() {
        assert!(vanishing_numerator(1, 0, -1).unwrap().is_zero());
        assert!(vanishing_numerator(3, 1, 1).unwrap().is_zero());
        assert!(vanishing_numerator(5, 2, 3).unwrap().is_zero());
        assert!(matches!(
            vanishing_numerator(2, 0, 3),
            Err(Error::InvalidParams(_))
        ));
        assert!(vanishing_numerator(0, 0, -1).is_err());
        assert!(vanishing_numerator(2, 0, 1).unwrap().is_zero());
    }

    #[test]
    fn unit_pair() {
        for a in [SignedMonomial::q(int(0)), SignedMonomial::q(int(1))] {
            let p = pairs::unit(a);
            assert!(check_bailey_pair(&p, 6, &int(20)).unwrap().passed());
            let (l, r) = bailey_limit_identity(&p, &int(25)).unwrap();
            assert!(equal_to_order(&l, &r, &int(25)).unwrap().is_equal());
        }
    }

    #[test]
    fn corrupted_pair_fails_where_altered() {
        let mut p = pairs::pair1();
        p.alpha.overrides.push(AlphaOverride {
            n: 4,
            terms: vec![(1, "9".into()), (1, "6".into())],
        });
        let rep = check_bailey_pair(&p, 8, &int(30)).unwrap();
        assert_eq!(rep.first_failure.map(|f| f.0), Some(4));
    }
}
