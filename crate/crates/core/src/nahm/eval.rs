//! Truncated evaluation of lowered sums.
//!
//! Factors whose length depends only on `n₁` are maintained incrementally
//! across rows and factors depending only on `n₂` are memoized, so each row
//! costs one truncated product. Factors mixing both indices fall back to
//! per-point evaluation.

use super::enumerate::{enumerate_rows, Poly2, Region};
use super::{LenForm, NahmSpec, SignForm, SumSpec};
use crate::dense::{add_shifted, div_binomial, mul_binomial, mul_truncated};
use crate::error::{Error, Result};
use crate::int::Int;
use crate::qfactors::SignedMonomial;
use crate::rat::{denom_u64, floor_i64, lcm_u64, to_i64, Rat};
use crate::series::{Order, PuiseuxSeries};
use num_bigint::BigInt;
use std::collections::hash_map::Entry;
use std::collections::HashMap;

#[derive(Clone, Debug)]
pub(crate) struct LFactor {
    pub arg: SignedMonomial,
    pub base: SignedMonomial,
    pub len: LenForm,
    /// `1` for a numerator factor, `-1` for a denominator factor.
    pub power: i8,
}

#[derive(Clone, Debug)]
pub(crate) struct Lowered {
    pub rank: usize,
    pub poly: Poly2,
    pub region: Region,
    pub sign: SignForm,
    pub factors: Vec<LFactor>,
}

/// Evaluates a Nahm sum exactly up to `q^order`.
pub fn eval_nahm(spec: &NahmSpec, order: &Rat) -> Result<PuiseuxSeries> {
    eval_lowered(&spec.lower()?, order)
}

/// Evaluates a general sum exactly up to `q^order`.
pub fn eval_sumspec(spec: &SumSpec, order: &Rat) -> Result<PuiseuxSeries> {
    eval_lowered(&spec.lower()?, order)
}

/// The single summand of `spec` at `n`, up to `q^order` (zero off the index set).
pub fn sumspec_term(spec: &SumSpec, n: &[i64], order: &Rat) -> Result<PuiseuxSeries> {
    let l = spec.lower()?;
    let mut n = n.to_vec();
    n.resize(2, 0);
    let ord = Order::Finite(order.clone());
    if !l.region.contains(&n[..l.rank]) {
        return Ok(PuiseuxSeries::zero(ord));
    }
    let d = lattice_denom(&l);
    let q = l.poly.at(n[0], n[1]);
    if q > *order {
        return Ok(PuiseuxSeries::zero(ord));
    }
    let len = (floor_i64(&((order - &q) * BigInt::from(d)))) as usize + 1;
    let Some(buf) = point_buffer(&l.factors, &n, len, d)? else {
        return Ok(PuiseuxSeries::zero(ord));
    };
    let s = PuiseuxSeries::from_ints(d, scaled(&q, d), buf, ord);
    Ok(if parity(l.sign.at(&n[..l.rank])) < 0 {
        s.neg()
    } else {
        s
    })
}

fn lattice_denom(l: &Lowered) -> u64 {
    let p = &l.poly;
    let mut d = 1;
    for c in [&p.a, &p.b, &p.c, &p.d, &p.e, &p.f] {
        d = lcm_u64(d, denom_u64(c));
    }
    for f in &l.factors {
        d = lcm_u64(d, denom_u64(&f.arg.exp));
        d = lcm_u64(d, denom_u64(&f.base.exp));
    }
    d
}

fn scaled(e: &Rat, d: u64) -> i64 {
    to_i64(&(e * BigInt::from(d))).expect("exponent lies on the lattice")
}

fn parity(k: i64) -> i8 {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Multiplies `buf` by `Π_{k=from}^{to-1} (1 − arg·base^k)^{±1}`.
fn apply_range(buf: &mut [Int], f: &LFactor, from: i64, to: i64, d: u64, invert: bool) {
    let mult = if invert { -f.power } else { f.power };
    for k in from..to {
        let c = f.arg.sign * if k % 2 == 0 { 1 } else { f.base.sign };
        let shift = scaled(&(&f.arg.exp + &f.base.exp * BigInt::from(k)), d);
        if shift as usize >= buf.len() {
            break;
        }
        if mult > 0 {
            mul_binomial(buf, c, shift as usize);
        } else {
            div_binomial(buf, c, shift as usize);
        }
    }
}

fn negative_numerator(f: &LFactor) -> Error {
    Error::InvalidShape(format!(
        "numerator factor ({}; {}) reached a negative length",
        f.arg, f.base
    ))
}

/// Product of all factors at one point, or `None` when a denominator length is negative.
fn point_buffer(factors: &[LFactor], n: &[i64], len: usize, d: u64) -> Result<Option<Vec<Int>>> {
    let mut buf = vec![Int::ZERO; len];
    buf[0] = Int::ONE;
    for f in factors {
        let t = f.len.at(n);
        if t < 0 {
            if f.power < 0 {
                return Ok(None);
            }
            return Err(negative_numerator(f));
        }
        apply_range(&mut buf, f, 0, t, d, false);
    }
    Ok(Some(buf))
}

/// Incrementally maintained product of a set of factors depending on one index.
struct Cursor<'a> {
    factors: Vec<&'a LFactor>,
    index: usize,
    lens: Vec<i64>,
    buf: Vec<Int>,
}

impl<'a> Cursor<'a> {
    fn new(factors: Vec<&'a LFactor>, index: usize, len: usize) -> Self {
        let mut buf = vec![Int::ZERO; len];
        buf[0] = Int::ONE;
        let lens = vec![0; factors.len()];
        Cursor {
            factors,
            index,
            lens,
            buf,
        }
    }

    /// Moves to index value `m`; returns `false` when the product vanishes there.
    fn seek(&mut self, m: i64, d: u64) -> Result<bool> {
        let mut n = [0i64; 2];
        n[self.index] = m;
        let mut live = true;
        for (f, cur) in self.factors.iter().zip(self.lens.iter_mut()) {
            let mut t = f.len.at(&n);
            if t < 0 {
                if f.power > 0 {
                    return Err(negative_numerator(f));
                }
                live = false;
                t = 0;
            }
            if t > *cur {
                apply_range(&mut self.buf, f, *cur, t, d, false);
            } else if t < *cur {
                apply_range(&mut self.buf, f, t, *cur, d, true);
            }
            *cur = t;
        }
        Ok(live)
    }
}

pub(crate) fn eval_lowered(l: &Lowered, order: &Rat) -> Result<PuiseuxSeries> {
    let ord = Order::Finite(order.clone());
    let rows = enumerate_rows(&l.poly, &l.region, order)?;
    if rows.is_empty() {
        return Ok(PuiseuxSeries::zero(ord));
    }
    let d = lattice_denom(l);
    let qs: Vec<Vec<Rat>> = rows
        .iter()
        .map(|r| r.n2s.iter().map(|&j| l.poly.at(r.n1, j)).collect())
        .collect();
    let glo = qs.iter().flatten().min().unwrap().clone();
    let glo_i = scaled(&glo, d);
    let total = (floor_i64(&((order - &glo) * BigInt::from(d))) + 1) as usize;
    let mut acc = vec![Int::ZERO; total];

    let mixed = l
        .factors
        .iter()
        .any(|f| f.len.coeff(0) != 0 && f.len.coeff(1) != 0);
    if mixed {
        for (row, q_row) in rows.iter().zip(&qs) {
            for (&n2, q) in row.n2s.iter().zip(q_row) {
                let n = [row.n1, n2];
                let off = (scaled(q, d) - glo_i) as usize;
                if let Some(buf) = point_buffer(&l.factors, &n, total - off, d)? {
                    add_shifted(&mut acc, &buf, off, parity(l.sign.at(&n[..l.rank])));
                }
            }
        }
        return Ok(PuiseuxSeries::from_ints(d, glo_i, acc, ord));
    }

    let row_f: Vec<&LFactor> = l.factors.iter().filter(|f| f.len.coeff(1) == 0).collect();
    let col_f: Vec<&LFactor> = l.factors.iter().filter(|f| f.len.coeff(1) != 0).collect();
    let has_cols = !col_f.is_empty();
    let mut g1 = Cursor::new(row_f, 0, total);
    let mut g2 = Cursor::new(col_f, 1, total);
    let mut memo: HashMap<i64, Option<Vec<Int>>> = HashMap::new();
    let s1 = l.sign.coeff(0);
    let s2 = l.sign.coeff(1);

    for (row, q_row) in rows.iter().zip(&qs) {
        if !g1.seek(row.n1, d)? {
            continue;
        }
        let rmin = scaled(q_row.iter().min().unwrap(), d);
        let rlen = (glo_i + total as i64 - rmin) as usize;
        let row_sign = parity(s1 * row.n1 + l.sign.constant);
        let row_off = (rmin - glo_i) as usize;
        if !has_cols && row.n2s.len() == 1 {
            let s = row_sign * parity(s2 * row.n2s[0]);
            add_shifted(&mut acc, &g1.buf[..rlen], row_off, s);
            continue;
        }
        let mut inner = vec![Int::ZERO; rlen];
        for (&n2, q) in row.n2s.iter().zip(q_row) {
            let off = (scaled(q, d) - rmin) as usize;
            let s = parity(s2 * n2);
            if !has_cols {
                inner[off].add_signed(&Int::ONE, s);
                continue;
            }
            let cached = match memo.entry(n2) {
                Entry::Occupied(e) => e.into_mut(),
                Entry::Vacant(e) => e.insert(if g2.seek(n2, d)? {
                    Some(g2.buf.clone())
                } else {
                    None
                }),
            };
            if let Some(b) = cached {
                add_shifted(&mut inner, b, off, s);
            }
        }
        let prod = mul_truncated(&g1.buf[..rlen], &inner, rlen);
        add_shifted(&mut acc, &prod, row_off, row_sign);
    }
    Ok(PuiseuxSeries::from_ints(d, glo_i, acc, ord))
}

#[cfg(test)]
mod tests {
    use super::super::{mat2, LatticeCoset, QuadExpr, SumFactor};
    use super::*;
    use crate::rat::{int, rat};

    fn coeffs_int(s: &PuiseuxSeries) -> Vec<i64> {
        s.coeffs().iter().map(|c| to_i64(c).unwrap()).collect()
    }

    #[test]
    fn rogers_ramanujan_sum() {
        let s = SumSpec::rank1(int(1), int(0), int(0))
            .with_den(SumFactor::qq(int(1), LenForm::new(vec![1], 0)));
        let v = eval_sumspec(&s, &int(8)).unwrap();
        assert_eq!(coeffs_int(&v), vec![1, 1, 1, 1, 2, 2, 3, 3, 4]);
    }

    #[test]
    fn nahm_matches_pointwise_sum() {
        let quad = QuadExpr::new(
            mat2(int(2), int(1), int(1)),
            vec![int(0), rat(1, 2)],
            int(0),
        )
        .unwrap();
        let spec = NahmSpec::new(quad.clone(), LatticeCoset::full(2)).unwrap();
        let n = int(20);
        let fast = eval_nahm(&spec, &n).unwrap();
        let as_sum = SumSpec::rank2(int(1), int(1), rat(1, 2), int(0), rat(1, 2), int(0))
            .with_den(SumFactor::qq(int(1), LenForm::new(vec![1, 0], 0)))
            .with_den(SumFactor::qq(int(1), LenForm::new(vec![0, 1], 0)));
        let mut slow = PuiseuxSeries::zero(Order::Finite(n.clone()));
        for i in 0..25 {
            for j in 0..45 {
                slow = slow.add(&sumspec_term(&as_sum, &[i, j], &n).unwrap());
            }
        }
        assert_eq!(fast, slow);
    }

    #[test]
    fn mixed_length_falls_back() {
        // Σ q^{i²+j²} / (q;q)_{i+j}
        let s = SumSpec::rank2(int(1), int(0), int(1), int(0), int(0), int(0))
            .with_den(SumFactor::qq(int(1), LenForm::new(vec![1, 1], 0)));
        let n = int(15);
        let fast = eval_sumspec(&s, &n).unwrap();
        let mut slow = PuiseuxSeries::zero(Order::Finite(n.clone()));
        for i in 0..5 {
            for j in 0..5 {
                slow = slow.add(&sumspec_term(&s, &[i, j], &n).unwrap());
            }
        }
        assert_eq!(fast, slow);
    }

    #[test]
    fn negative_denominator_length_vanishes() {
        // Σ_n q^{n²} / (q;q)_{n-1}: the n = 0 term is zero.
        let s = SumSpec::rank1(int(1), int(0), int(0))
            .with_den(SumFactor::qq(int(1), LenForm::new(vec![1], -1)));
        let v = eval_sumspec(&s, &int(6)).unwrap();
        assert_eq!(v.valuation(), Some(int(1)));
    }
}
