//! Nahm sums on lattice cosets and general q-hypergeometric sums of rank one or two.
//!
//! A Nahm sum is `Σ_{n ∈ (v+L) ∩ Z_{≥0}^r} q^{½nᵀAn + Bᵀn + C} / Π (q;q)_{n_i}`.
//! A [`SumSpec`] generalizes the summand to an arbitrary quadratic exponent, a
//! sign character, and Pochhammer factors with affine lengths. Both lower to
//! the same internal form, which is enumerated row by row.

mod dissection;
mod enumerate;
mod eval;

pub use dissection::{dissection_transform, Dissection, DissectionPattern};
pub use eval::{eval_nahm, eval_sumspec, sumspec_term};

use crate::error::{Error, Result};
use crate::qfactors::SignedMonomial;
use crate::rat::{fmt_rat, Rat};
use enumerate::{Poly2, Region};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// `Q(n) = ½nᵀAn + Bᵀn + C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadExpr {
    pub a: Vec<Vec<Rat>>,
    pub b: Vec<Rat>,
    pub c: Rat,
}

impl QuadExpr {
    pub fn new(a: Vec<Vec<Rat>>, b: Vec<Rat>, c: Rat) -> Result<Self> {
        let r = b.len();
        if !(r == 1 || r == 2) || a.len() != r || a.iter().any(|row| row.len() != r) {
            return Err(Error::InvalidShape(format!(
                "A must be {r}x{r} with r in {{1,2}}"
            )));
        }
        if r == 2 && a[0][1] != a[1][0] {
            return Err(Error::InvalidShape("A must be symmetric".into()));
        }
        if a.iter().flatten().all(|x| x.is_zero()) {
            return Err(Error::InvalidShape("A must be nonzero".into()));
        }
        Ok(QuadExpr { a, b, c })
    }

    pub fn rank(&self) -> usize {
        self.b.len()
    }

    pub fn value(&self, n: &[i64]) -> Rat {
        let mut s = self.c.clone();
        for i in 0..self.rank() {
            s += &self.b[i] * BigInt::from(n[i]);
            for j in 0..self.rank() {
                s += &self.a[i][j] * BigInt::from(n[i] * n[j]) / BigInt::from(2);
            }
        }
        s
    }

    fn poly(&self) -> Poly2 {
        let h = |x: &Rat| x / BigInt::from(2);
        if self.rank() == 1 {
            Poly2::rank1(h(&self.a[0][0]), self.b[0].clone(), self.c.clone())
        } else {
            Poly2 {
                a: h(&self.a[0][0]),
                b: self.a[0][1].clone(),
                c: h(&self.a[1][1]),
                d: self.b[0].clone(),
                e: self.b[1].clone(),
                f: self.c.clone(),
            }
        }
    }
}

/// The rank-two matrix `M(a,b,c) = [[a, b], [b, c]]`.
pub fn mat2(a: Rat, b: Rat, c: Rat) -> Vec<Vec<Rat>> {
    vec![vec![a, b.clone()], vec![b, c]]
}

/// Coset `v + L`, where the columns of `basis` generate `L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeCoset {
    pub basis: Vec<Vec<i64>>,
    pub shift: Vec<i64>,
}

impl LatticeCoset {
    pub fn new(basis: Vec<Vec<i64>>, shift: Vec<i64>) -> Result<Self> {
        let r = shift.len();
        if !(r == 1 || r == 2) || basis.len() != r || basis.iter().any(|row| row.len() != r) {
            return Err(Error::InvalidShape("lattice basis must be r x r".into()));
        }
        let c = LatticeCoset { basis, shift };
        c.region()?;
        Ok(c)
    }

    /// The full lattice `Z^r`.
    pub fn full(r: usize) -> Self {
        let basis = (0..r)
            .map(|i| (0..r).map(|j| i64::from(i == j)).collect())
            .collect();
        LatticeCoset {
            basis,
            shift: vec![0; r],
        }
    }

    /// `v + (m_1 Z × … × m_r Z)`.
    pub fn diagonal(moduli: &[i64], shift: &[i64]) -> Self {
        let r = moduli.len();
        let basis = (0..r)
            .map(|i| (0..r).map(|j| if i == j { moduli[i] } else { 0 }).collect())
            .collect();
        LatticeCoset {
            basis,
            shift: shift.to_vec(),
        }
    }

    pub fn rank(&self) -> usize {
        self.shift.len()
    }

    fn region(&self) -> Result<Region> {
        if self.rank() == 1 {
            let h = self.basis[0][0].abs();
            if h == 0 {
                return Err(Error::InvalidShape("lattice basis is singular".into()));
            }
            return Ok(Region::rank1(h, self.shift[0]));
        }
        let (l00, l01, l10, l11) = (
            self.basis[0][0],
            self.basis[0][1],
            self.basis[1][0],
            self.basis[1][1],
        );
        let det = l00 * l11 - l01 * l10;
        if det == 0 {
            return Err(Error::InvalidShape("lattice basis is singular".into()));
        }
        let (g, x, y) = ext_gcd(l00, l01);
        let h22 = det.abs() / g;
        let h21 = (x * l10 + y * l11).rem_euclid(h22);
        Ok(Region::rank2(g, h21, h22, self.shift[0], self.shift[1]))
    }

    pub fn contains(&self, n: &[i64]) -> bool {
        self.region().map(|r| r.contains(n)).unwrap_or(false)
    }
}

/// Returns `(g, x, y)` with `g = gcd(a, b) > 0` and `xa + yb = g`.
fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1, mut s0, mut s1, mut t0, mut t1) = (a, b, 1i64, 0i64, 0i64, 1i64);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// A (partial) Nahm sum `f_{A,B,C,v+L}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "NahmJson", into = "NahmJson")]
pub struct NahmSpec {
    pub quad: QuadExpr,
    pub coset: LatticeCoset,
}

impl NahmSpec {
    pub fn new(quad: QuadExpr, coset: LatticeCoset) -> Result<Self> {
        if quad.rank() != coset.rank() {
            return Err(Error::InvalidShape(
                "quadratic form and coset ranks differ".into(),
            ));
        }
        Ok(NahmSpec { quad, coset })
    }

    pub fn rank(&self) -> usize {
        self.quad.rank()
    }

    pub fn with_c(&self, c: Rat) -> Self {
        let mut s = self.clone();
        s.quad.c = c;
        s
    }

    pub(crate) fn lower(&self) -> Result<eval::Lowered> {
        let r = self.rank();
        let q = SignedMonomial::q(Rat::one());
        let factors = (0..r)
            .map(|i| {
                let mut coeffs = vec![0; r];
                coeffs[i] = 1;
                eval::LFactor {
                    arg: q.clone(),
                    base: q.clone(),
                    len: LenForm {
                        coeffs,
                        constant: 0,
                    },
                    power: -1,
                }
            })
            .collect();
        Ok(eval::Lowered {
            rank: r,
            poly: self.quad.poly(),
            region: self.coset.region()?,
            sign: SignForm::zero(r),
            factors,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct NahmJson {
    #[serde(rename = "A", with = "crate::rat::serde_rat_mat")]
    a: Vec<Vec<Rat>>,
    #[serde(rename = "B", with = "crate::rat::serde_rat_vec")]
    b: Vec<Rat>,
    #[serde(rename = "C", with = "crate::rat::serde_rat", default = "Rat::zero")]
    c: Rat,
    v: Vec<i64>,
    #[serde(rename = "L")]
    l: Vec<Vec<i64>>,
}

impl From<NahmSpec> for NahmJson {
    fn from(s: NahmSpec) -> Self {
        NahmJson {
            a: s.quad.a,
            b: s.quad.b,
            c: s.quad.c,
            v: s.coset.shift,
            l: s.coset.basis,
        }
    }
}

impl TryFrom<NahmJson> for NahmSpec {
    type Error = String;
    fn try_from(j: NahmJson) -> std::result::Result<Self, String> {
        let q = QuadExpr::new(j.a, j.b, j.c).map_err(|e| e.to_string())?;
        let c = LatticeCoset::new(j.l, j.v).map_err(|e| e.to_string())?;
        NahmSpec::new(q, c).map_err(|e| e.to_string())
    }
}

// ---------------------------------------------------------------------------
// General sums

/// Integer affine form `coeffs·n + constant`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LenForm {
    pub coeffs: Vec<i64>,
    pub constant: i64,
}

impl LenForm {
    pub fn new(coeffs: Vec<i64>, constant: i64) -> Self {
        LenForm { coeffs, constant }
    }

    pub fn at(&self, n: &[i64]) -> i64 {
        self.coeffs.iter().zip(n).map(|(c, x)| c * x).sum::<i64>() + self.constant
    }

    fn from_vec(v: &[i64], rank: usize, what: &str) -> std::result::Result<Self, String> {
        if v.len() != rank + 1 {
            return Err(format!(
                "{what} needs {} entries, got {}",
                rank + 1,
                v.len()
            ));
        }
        Ok(LenForm {
            coeffs: v[..rank].to_vec(),
            constant: v[rank],
        })
    }

    fn to_vec(&self) -> Vec<i64> {
        let mut v = self.coeffs.clone();
        v.push(self.constant);
        v
    }

    fn coeff(&self, i: usize) -> i64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }
}

/// Sign character `(−1)^{s·n + s0}`.
pub type SignForm = LenForm;

impl SignForm {
    pub fn zero(rank: usize) -> Self {
        LenForm {
            coeffs: vec![0; rank],
            constant: 0,
        }
    }
}

/// `(arg; base)_{len(n)}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumFactor {
    pub arg: SignedMonomial,
    pub base: SignedMonomial,
    pub len: LenForm,
}

impl SumFactor {
    pub fn new(arg: SignedMonomial, base: SignedMonomial, len: LenForm) -> Self {
        SumFactor { arg, base, len }
    }

    /// `(q^m; q^m)_{len}`.
    pub fn qq(m: Rat, len: LenForm) -> Self {
        SumFactor::new(SignedMonomial::q(m.clone()), SignedMonomial::q(m), len)
    }
}

/// A q-hypergeometric sum of rank one or two over nonnegative indices.
///
/// The exponent is `Σ_{k≤l} quad_{kl} n_k n_l + lin·n + constant`, with `quad`
/// listed as `[a]` for rank one and `[a, b, c]` (for `a n₁² + b n₁n₂ + c n₂²`)
/// for rank two. Each index may be restricted to a residue class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SumJson", into = "SumJson")]
pub struct SumSpec {
    pub rank: usize,
    pub quad: Vec<Rat>,
    pub lin: Vec<Rat>,
    pub constant: Rat,
    pub sign: SignForm,
    pub num: Vec<SumFactor>,
    pub den: Vec<SumFactor>,
    pub congruence: Vec<(i64, i64)>,
}

impl SumSpec {
    /// `Σ_n q^{a n² + d n + f}` with no factors yet.
    pub fn rank1(a: Rat, d: Rat, f: Rat) -> Self {
        SumSpec {
            rank: 1,
            quad: vec![a],
            lin: vec![d],
            constant: f,
            sign: SignForm::zero(1),
            num: Vec::new(),
            den: Vec::new(),
            congruence: vec![(1, 0)],
        }
    }

    /// `Σ_{i,j} q^{a i² + b ij + c j² + d i + e j + f}` with no factors yet.
    pub fn rank2(a: Rat, b: Rat, c: Rat, d: Rat, e: Rat, f: Rat) -> Self {
        SumSpec {
            rank: 2,
            quad: vec![a, b, c],
            lin: vec![d, e],
            constant: f,
            sign: SignForm::zero(2),
            num: Vec::new(),
            den: Vec::new(),
            congruence: vec![(1, 0), (1, 0)],
        }
    }

    pub fn with_num(mut self, f: SumFactor) -> Self {
        self.num.push(f);
        self
    }

    pub fn with_den(mut self, f: SumFactor) -> Self {
        self.den.push(f);
        self
    }

    pub fn with_sign(mut self, s: SignForm) -> Self {
        self.sign = s;
        self
    }

    pub fn with_congruence(mut self, c: Vec<(i64, i64)>) -> Self {
        self.congruence = c;
        self
    }

    /// Exponent of the summand at `n` (without factors).
    pub fn exponent(&self, n: &[i64]) -> Rat {
        self.poly().at(n[0], n.get(1).copied().unwrap_or(0))
    }

    fn poly(&self) -> Poly2 {
        if self.rank == 1 {
            Poly2::rank1(
                self.quad[0].clone(),
                self.lin[0].clone(),
                self.constant.clone(),
            )
        } else {
            Poly2 {
                a: self.quad[0].clone(),
                b: self.quad[1].clone(),
                c: self.quad[2].clone(),
                d: self.lin[0].clone(),
                e: self.lin[1].clone(),
                f: self.constant.clone(),
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.rank;
        let bad = |m: String| Err(Error::InvalidShape(m));
        if !(r == 1 || r == 2) {
            return bad(format!("rank {r} not supported"));
        }
        let nq = if r == 1 { 1 } else { 3 };
        if self.quad.len() != nq
            || self.lin.len() != r
            || self.sign.coeffs.len() != r
            || self.congruence.len() != r
        {
            return bad("coefficient vector lengths do not match the rank".into());
        }
        for (m, _) in &self.congruence {
            if *m <= 0 {
                return bad("congruence modulus must be positive".into());
            }
        }
        for f in self.num.iter().chain(&self.den) {
            if f.len.coeffs.len() != r {
                return bad("length form does not match the rank".into());
            }
            if !crate::rat::is_positive(&f.base.exp) {
                return bad(format!(
                    "factor base {} must have positive exponent",
                    f.base
                ));
            }
            if !crate::rat::is_positive(&f.arg.exp) {
                return bad(format!(
                    "factor argument {} must have positive exponent",
                    f.arg
                ));
            }
        }
        Ok(())
    }

    pub(crate) fn lower(&self) -> Result<eval::Lowered> {
        self.validate()?;
        let region = if self.rank == 1 {
            Region::rank1(self.congruence[0].0, self.congruence[0].1)
        } else {
            Region::rank2(
                self.congruence[0].0,
                0,
                self.congruence[1].0,
                self.congruence[0].1,
                self.congruence[1].1,
            )
        };
        let mut factors = Vec::new();
        for (list, power) in [(&self.num, 1), (&self.den, -1)] {
            for f in list {
                factors.push(eval::LFactor {
                    arg: f.arg.clone(),
                    base: f.base.clone(),
                    len: f.len.clone(),
                    power,
                });
            }
        }
        Ok(eval::Lowered {
            rank: self.rank,
            poly: self.poly(),
            region,
            sign: self.sign.clone(),
            factors,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct SumFactorJson {
    arg_sign: i8,
    #[serde(with = "crate::rat::serde_rat")]
    arg_exp: Rat,
    base_sign: i8,
    #[serde(with = "crate::rat::serde_rat")]
    base_exp: Rat,
    len: Vec<i64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct SumJson {
    rank: usize,
    #[serde(with = "crate::rat::serde_rat_vec")]
    quad: Vec<Rat>,
    #[serde(with = "crate::rat::serde_rat_vec")]
    lin: Vec<Rat>,
    #[serde(
        rename = "const",
        with = "crate::rat::serde_rat",
        default = "Rat::zero"
    )]
    constant: Rat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sign: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    num: Vec<SumFactorJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    den: Vec<SumFactorJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    congruence: Option<Vec<(i64, i64)>>,
}

impl From<SumSpec> for SumJson {
    fn from(s: SumSpec) -> Self {
        let fj = |f: &SumFactor| SumFactorJson {
            arg_sign: f.arg.sign,
            arg_exp: f.arg.exp.clone(),
            base_sign: f.base.sign,
            base_exp: f.base.exp.clone(),
            len: f.len.to_vec(),
        };
        let trivial_sign = s.sign.coeffs.iter().all(|&c| c == 0) && s.sign.constant == 0;
        let trivial_cong = s.congruence.iter().all(|&(m, _)| m == 1);
        SumJson {
            rank: s.rank,
            quad: s.quad,
            lin: s.lin,
            constant: s.constant,
            sign: if trivial_sign {
                None
            } else {
                Some(s.sign.to_vec())
            },
            num: s.num.iter().map(fj).collect(),
            den: s.den.iter().map(fj).collect(),
            congruence: if trivial_cong {
                None
            } else {
                Some(s.congruence)
            },
        }
    }
}

impl TryFrom<SumJson> for SumSpec {
    type Error = String;
    fn try_from(j: SumJson) -> std::result::Result<Self, String> {
        let r = j.rank;
        let sign = match j.sign {
            Some(v) => LenForm::from_vec(&v, r, "sign")?,
            None => SignForm::zero(r),
        };
        let conv = |f: SumFactorJson| -> std::result::Result<SumFactor, String> {
            for s in [f.arg_sign, f.base_sign] {
                if s != 1 && s != -1 {
                    return Err(format!("sign must be 1 or -1, got {s}"));
                }
            }
            Ok(SumFactor::new(
                SignedMonomial::new(f.arg_sign, f.arg_exp),
                SignedMonomial::new(f.base_sign, f.base_exp),
                LenForm::from_vec(&f.len, r, "len")?,
            ))
        };
        let s = SumSpec {
            rank: r,
            quad: j.quad,
            lin: j.lin,
            constant: j.constant,
            sign,
            num: j
                .num
                .into_iter()
                .map(conv)
                .collect::<std::result::Result<_, _>>()?,
            den: j
                .den
                .into_iter()
                .map(conv)
                .collect::<std::result::Result<_, _>>()?,
            congruence: j.congruence.unwrap_or_else(|| vec![(1, 0); r]),
        };
        s.validate().map_err(|e| e.to_string())?;
        Ok(s)
    }
}

/// Lattice points of the summation domain with `Q(n) ≤ order`, in ascending lexicographic order.
pub fn enumerate_support(spec: &SupportSource<'_>, order: &Rat) -> Result<Vec<Vec<i64>>> {
    let l = match spec {
        SupportSource::Nahm(s) => s.lower()?,
        SupportSource::Sum(s) => s.lower()?,
    };
    let rows = enumerate::enumerate_rows(&l.poly, &l.region, order)?;
    let mut out = Vec::new();
    for row in rows {
        for n2 in &row.n2s {
            if l.rank == 1 {
                out.push(vec![row.n1]);
            } else {
                out.push(vec![row.n1, *n2]);
            }
        }
    }
    Ok(out)
}

/// Either kind of summation spec accepted by [`enumerate_support`].
pub enum SupportSource<'a> {
    Nahm(&'a NahmSpec),
    Sum(&'a SumSpec),
}

impl std::fmt::Display for NahmSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let row = |r: &Vec<Rat>| r.iter().map(fmt_rat).collect::<Vec<_>>().join(",");
        let a = self.quad.a.iter().map(row).collect::<Vec<_>>().join(";");
        write!(
            f,
            "A=[{}] B=({}) C={} v=({}) L={:?}",
            a,
            row(&self.quad.b),
            fmt_rat(&self.quad.c),
            self.coset
                .shift
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(","),
            self.coset.basis
        )
    }
}
