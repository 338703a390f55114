//! Parity dissection of the two-index sum
//! `F(u,v) = Σ_{i,j≥0} q^{½ai² + bij + ½cj²} u^i v^j / ((q;q)_i (q;q)_j)`.
//!
//! Restricting `i` (or `j`, or both) to a residue class mod 2 is a signed
//! average of `F` at `±u`, `±v`. Each pattern below returns the restricted sum
//! re-indexed to start at zero, together with the matching combination of
//! instances of `F`.

use super::{LenForm, SignForm, SumFactor, SumSpec};
use crate::error::{Error, Result};
use crate::qfactors::SignedMonomial;
use crate::rat::Rat;
use crate::series::{linear_combine, PuiseuxSeries};
use num_bigint::BigInt;
use num_traits::One;

/// Index substitution `(i, j) ↦ (m₁i + t₁, m₂j + t₂)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DissectionPattern {
    /// `(2i, j)`
    EvenI,
    /// `(2i+1, j)`
    OddI,
    /// `(i, 2j)`
    EvenJ,
    /// `(i, 2j+1)`
    OddJ,
    /// `(2i, 2j)`
    EvenEven,
    /// `(2i, 2j+1)`
    EvenOdd,
    /// `(2i+1, 2j)`
    OddEven,
    /// `(2i+1, 2j+1)`
    OddOdd,
}

impl DissectionPattern {
    pub const ALL: [DissectionPattern; 8] = [
        Self::EvenI,
        Self::OddI,
        Self::EvenJ,
        Self::OddJ,
        Self::EvenEven,
        Self::EvenOdd,
        Self::OddEven,
        Self::OddOdd,
    ];

    /// `[(m₁, t₁), (m₂, t₂)]`.
    pub fn moduli(self) -> [(i64, i64); 2] {
        use DissectionPattern::*;
        match self {
            EvenI => [(2, 0), (1, 0)],
            OddI => [(2, 1), (1, 0)],
            EvenJ => [(1, 0), (2, 0)],
            OddJ => [(1, 0), (2, 1)],
            EvenEven => [(2, 0), (2, 0)],
            EvenOdd => [(2, 0), (2, 1)],
            OddEven => [(2, 1), (2, 0)],
            OddOdd => [(2, 1), (2, 1)],
        }
    }
}

/// Both sides of one dissection identity: `lhs = Σ weight·rhs_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dissection {
    pub lhs: SumSpec,
    pub rhs: Vec<(Rat, SumSpec)>,
}

impl Dissection {
    /// Evaluates `(lhs, rhs)` to `q^order`.
    pub fn evaluate(&self, order: &Rat) -> Result<(PuiseuxSeries, PuiseuxSeries)> {
        let l = super::eval_sumspec(&self.lhs, order)?;
        let parts = self
            .rhs
            .iter()
            .map(|(w, s)| Ok((w.clone(), super::eval_sumspec(s, order)?)))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<(Rat, &PuiseuxSeries)> = parts.iter().map(|(w, s)| (w.clone(), s)).collect();
        Ok((l, linear_combine(&refs)))
    }
}

fn shape_error(msg: &str) -> Error {
    Error::InvalidShape(format!("not of the form F(±q^d, ±q^e): {msg}"))
}

fn is_plain_qq(f: &SumFactor, coeffs: &[i64]) -> bool {
    let one = Rat::one();
    f.arg == SignedMonomial::q(one.clone())
        && f.base == SignedMonomial::q(one)
        && f.len.coeffs == coeffs
        && f.len.constant == 0
}

/// Builds the dissection identity for `f_spec = F(σ₁q^d, σ₂q^e)`.
///
/// `f_spec` must be a rank-two sum with exponent `½ai² + bij + ½cj² + di + ej + f`,
/// sign character `σ₁^i σ₂^j`, denominators `(q;q)_i (q;q)_j` and no other factors.
pub fn dissection_transform(f_spec: &SumSpec, target: DissectionPattern) -> Result<Dissection> {
    f_spec.validate()?;
    if f_spec.rank != 2 {
        return Err(shape_error("rank must be two"));
    }
    if !f_spec.num.is_empty() || f_spec.den.len() != 2 {
        return Err(shape_error("expected exactly the factors (q;q)_i (q;q)_j"));
    }
    let (mut di, mut dj) = (false, false);
    for f in &f_spec.den {
        di |= is_plain_qq(f, &[1, 0]);
        dj |= is_plain_qq(f, &[0, 1]);
    }
    if !(di && dj) {
        return Err(shape_error("expected exactly the factors (q;q)_i (q;q)_j"));
    }
    if f_spec.congruence.iter().any(|&(m, _)| m != 1) || f_spec.sign.constant.rem_euclid(2) != 0 {
        return Err(shape_error(
            "index restrictions or a constant sign are not allowed",
        ));
    }
    let [(m1, t1), (m2, t2)] = target.moduli();
    let s = [
        f_spec.sign.coeffs[0].rem_euclid(2),
        f_spec.sign.coeffs[1].rem_euclid(2),
    ];
    let (qa, qb, qc) = (&f_spec.quad[0], &f_spec.quad[1], &f_spec.quad[2]);
    let (d, e) = (&f_spec.lin[0], &f_spec.lin[1]);
    let r = |x: i64| Rat::from_integer(BigInt::from(x));

    // Substitute i = m₁i' + t₁, j = m₂j' + t₂ and split off the constant.
    let a2 = qa * r(m1 * m1);
    let b2 = qb * r(m1 * m2);
    let c2 = qc * r(m2 * m2);
    let d2 = (qa * r(2 * t1) + qb * r(t2) + d) * r(m1);
    let e2 = (qc * r(2 * t2) + qb * r(t1) + e) * r(m2);
    let k = qa * r(t1 * t1) + qb * r(t1 * t2) + qc * r(t2 * t2) + d * r(t1) + e * r(t2);
    let lhs = SumSpec::rank2(a2, b2, c2, d2, e2, f_spec.constant.clone())
        .with_sign(SignForm::new(
            vec![(s[0] * m1) % 2, (s[1] * m2) % 2],
            s[0] * t1 + s[1] * t2,
        ))
        .with_den(SumFactor::qq(Rat::one(), LenForm::new(vec![m1, 0], t1)))
        .with_den(SumFactor::qq(Rat::one(), LenForm::new(vec![0, m2], t2)));

    let weight = Rat::new(BigInt::one(), BigInt::from(m1 * m2));
    let mut rhs = Vec::new();
    for x in 0..m1 {
        for y in 0..m2 {
            // ε₁ = (−1)^x, ε₂ = (−1)^y; the character weight is ε₁^{t₁} ε₂^{t₂}.
            let w = if (x * t1 + y * t2) % 2 == 0 {
                weight.clone()
            } else {
                -weight.clone()
            };
            let mut inst = f_spec.clone();
            inst.sign = SignForm::new(vec![(s[0] + x) % 2, (s[1] + y) % 2], 0);
            inst.constant = &f_spec.constant - &k;
            rhs.push((w, inst));
        }
    }
    Ok(Dissection { lhs, rhs })
}
