//! Row-wise support enumeration for quadratic exponents in one or two indices.

use crate::error::{Error, Result};
use crate::rat::{ceil_i64, floor_i64, Rat};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// `a n₁² + b n₁n₂ + c n₂² + d n₁ + e n₂ + f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Poly2 {
    pub a: Rat,
    pub b: Rat,
    pub c: Rat,
    pub d: Rat,
    pub e: Rat,
    pub f: Rat,
}

impl Poly2 {
    pub fn rank1(a: Rat, d: Rat, f: Rat) -> Self {
        Poly2 {
            a,
            b: Rat::zero(),
            c: Rat::zero(),
            d,
            e: Rat::zero(),
            f,
        }
    }

    pub fn at(&self, n1: i64, n2: i64) -> Rat {
        let (x, y) = (BigInt::from(n1), BigInt::from(n2));
        &self.a * (&x * &x)
            + &self.b * (&x * &y)
            + &self.c * (&y * &y)
            + &self.d * &x
            + &self.e * &y
            + &self.f
    }

    /// Substitutes `n₂ ↦ n₂ + t`.
    fn shift2(&self, t: i64) -> Poly2 {
        let t = Rat::from_integer(BigInt::from(t));
        Poly2 {
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.c.clone(),
            d: &self.d + &self.b * &t,
            e: &self.e + &self.c * &t * BigInt::from(2),
            f: &self.f + &self.c * &t * &t + &self.e * &t,
        }
    }
}

/// Admissible index set in Hermite normal form.
///
/// `n₁ ≡ v₁ (mod h₁₁)`; for each such `n₁` the admissible `n₂` are
/// `n₂ ≡ v₂ + ((n₁ − v₁)/h₁₁)·h₂₁ (mod h₂₂)`. Rank one has no inner index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Region {
    h11: i64,
    v1: i64,
    inner: Option<(i64, i64, i64)>,
}

impl Region {
    pub fn rank1(h: i64, v: i64) -> Self {
        Region {
            h11: h,
            v1: v,
            inner: None,
        }
    }

    pub fn rank2(h11: i64, h21: i64, h22: i64, v1: i64, v2: i64) -> Self {
        Region {
            h11,
            v1,
            inner: Some((h21, h22, v2)),
        }
    }

    fn start1(&self) -> i64 {
        self.v1.rem_euclid(self.h11)
    }

    fn residue2(&self, n1: i64) -> Option<(i64, i64)> {
        self.inner.map(|(h21, h22, v2)| {
            let k = (n1 - self.v1).div_euclid(self.h11);
            ((v2 + k * h21).rem_euclid(h22), h22)
        })
    }

    /// Smallest inner start over all rows.
    fn min_residue2(&self) -> i64 {
        match self.inner {
            None => 0,
            Some((_, h22, _)) => (0..h22)
                .map(|k| {
                    self.residue2(self.start1() + k * self.h11)
                        .map(|r| r.0)
                        .unwrap_or(0)
                })
                .min()
                .unwrap_or(0),
        }
    }

    pub fn contains(&self, n: &[i64]) -> bool {
        if n.iter().any(|&x| x < 0) || (n[0] - self.v1).rem_euclid(self.h11) != 0 {
            return false;
        }
        match self.residue2(n[0]) {
            None => true,
            Some((r, h)) => (n[1] - r).rem_euclid(h) == 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Row {
    pub n1: i64,
    pub n2s: Vec<i64>,
}

fn divergent(msg: &str) -> Error {
    Error::DivergentSpec(msg.to_string())
}

/// `n ∈ start + step·Z_{≥0}` with `c n² + β n + γ ≤ bound`, ascending.
fn progression_points(
    c: &Rat,
    beta: &Rat,
    gamma: &Rat,
    start: i64,
    step: i64,
    bound: &Rat,
) -> Result<Vec<i64>> {
    let val = |n: i64| {
        let x = BigInt::from(n);
        c * (&x * &x) + beta * &x + gamma
    };
    let mut out = Vec::new();
    if c.is_negative() {
        return Err(divergent("negative leading coefficient in the inner index"));
    }
    if c.is_zero() {
        if !beta.is_positive() {
            return Err(divergent("row with nonpositive linear coefficient"));
        }
        let mut n = start;
        while val(n) <= *bound {
            out.push(n);
            n += step;
        }
        return Ok(out);
    }
    // Convex: walk outward from the minimizer.
    let vertex = -beta / (c * BigInt::from(2));
    let kv = (&vertex - Rat::from_integer(start.into())) / BigInt::from(step);
    let k0 = floor_i64(&kv).max(0);
    let mut lo = k0;
    while lo >= 0 && val(start + lo * step) <= *bound {
        lo -= 1;
    }
    let mut hi = k0 + 1;
    while val(start + hi * step) <= *bound {
        hi += 1;
    }
    for k in (lo + 1)..hi {
        if val(start + k * step) <= *bound {
            out.push(start + k * step);
        }
    }
    Ok(out)
}

/// Lower envelope `E(n₁) ≤ min_{n₂ ≥ 0 real} p(n₁, n₂)` for large `n₁`, as
/// `(threshold, quadratic coefficients)`, valid for `n₁ ≥ threshold`.
fn envelope(p: &Poly2) -> Result<(Rat, [Rat; 3])> {
    let four_c = &p.c * BigInt::from(4);
    let zero = Rat::zero();
    if p.c.is_negative() {
        return Err(divergent("indefinite exponent: negative n2 curvature"));
    }
    let plain = [p.a.clone(), p.d.clone(), p.f.clone()];
    let (threshold, env) = if p.c.is_zero() {
        if p.b.is_negative() || (p.b.is_zero() && !p.e.is_positive()) {
            return Err(divergent(
                "rows with nonpositive linear coefficient in the inner index",
            ));
        }
        let t = if p.b.is_positive() {
            -&p.e / &p.b
        } else {
            zero.clone()
        };
        (t, plain)
    } else if p.b.is_positive() {
        (-&p.e / &p.b, plain)
    } else if p.b.is_zero() {
        if p.e.is_negative() {
            (
                zero.clone(),
                [p.a.clone(), p.d.clone(), &p.f - &p.e * &p.e / &four_c],
            )
        } else {
            (zero.clone(), plain)
        }
    } else {
        let two_c = &p.c * BigInt::from(2);
        (
            &p.e / -&p.b,
            [
                &p.a - &p.b * &p.b / &four_c,
                &p.d - &p.b * &p.e / &two_c,
                &p.f - &p.e * &p.e / &four_c,
            ],
        )
    };
    if env[0].is_negative() || (env[0].is_zero() && !env[1].is_positive()) {
        return Err(divergent(
            "row minima are unbounded below or not increasing",
        ));
    }
    Ok((threshold, env))
}

/// All admissible points with `p ≤ bound`, grouped into rows by `n₁`.
pub(crate) fn enumerate_rows(p: &Poly2, region: &Region, bound: &Rat) -> Result<Vec<Row>> {
    let h = region.h11;
    let s = region.start1();
    let mut rows = Vec::new();
    if region.inner.is_none() {
        let pts = progression_points(&p.a, &p.d, &p.f, s, h, bound)?;
        return Ok(pts.into_iter().map(|n1| Row { n1, n2s: vec![0] }).collect());
    }
    let relaxed = p.shift2(region.min_residue2());
    let (threshold, env) = envelope(&relaxed)?;
    let vertex = if env[0].is_positive() {
        -&env[1] / (&env[0] * BigInt::from(2))
    } else {
        Rat::zero()
    };
    let stop_from = ceil_i64(&threshold.max(vertex)).max(0);
    let env_at = |n: i64| {
        let x = BigInt::from(n);
        &env[0] * (&x * &x) + &env[1] * &x + &env[2]
    };
    let mut n1 = s;
    loop {
        if n1 >= stop_from && env_at(n1) > *bound {
            break;
        }
        let (r, h22) = region.residue2(n1).expect("rank-two region");
        let x = Rat::from_integer(BigInt::from(n1));
        let beta = &p.b * &x + &p.e;
        let gamma = &p.a * &x * &x + &p.d * &x + &p.f;
        let n2s = progression_points(&p.c, &beta, &gamma, r, h22, bound)?;
        if !n2s.is_empty() {
            rows.push(Row { n1, n2s });
        }
        n1 += h;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    fn box_points(p: &Poly2, region: &Region, bound: &Rat, size: i64) -> Vec<(i64, i64)> {
        let mut v = Vec::new();
        for i in 0..size {
            for j in 0..size {
                if region.contains(&[i, j]) && p.at(i, j) <= *bound {
                    v.push((i, j));
                }
            }
        }
        v
    }

    fn flat(rows: &[Row]) -> Vec<(i64, i64)> {
        rows.iter()
            .flat_map(|r| r.n2s.iter().map(move |&j| (r.n1, j)))
            .collect()
    }

    #[test]
    fn hyperbolic_coset() {
        let p = Poly2 {
            a: int(0),
            b: int(1),
            c: int(0),
            d: rat(1, 2),
            e: rat(1, 2),
            f: int(0),
        };
        let reg = Region::rank2(2, 0, 2, 1, 0);
        let rows = enumerate_rows(&p, &reg, &int(2)).unwrap();
        assert_eq!(flat(&rows), vec![(1, 0), (3, 0)]);
        let rows = enumerate_rows(&p, &reg, &int(40)).unwrap();
        assert_eq!(flat(&rows), box_points(&p, &reg, &int(40), 120));
    }

    #[test]
    fn degenerate_rows_diverge() {
        let p = Poly2 {
            a: int(0),
            b: int(1),
            c: int(0),
            d: int(0),
            e: int(0),
            f: int(0),
        };
        let reg = Region::rank2(1, 0, 1, 0, 0);
        assert!(matches!(
            enumerate_rows(&p, &reg, &int(3)),
            Err(Error::DivergentSpec(_))
        ));
        // On the odd coset every row grows.
        let reg = Region::rank2(2, 0, 2, 1, 1);
        let rows = enumerate_rows(&p, &reg, &int(30)).unwrap();
        assert_eq!(flat(&rows), box_points(&p, &reg, &int(30), 60));
    }

    #[test]
    fn indefinite_diverges() {
        let p = Poly2 {
            a: int(1),
            b: int(-3),
            c: int(1),
            d: int(0),
            e: int(0),
            f: int(0),
        };
        let reg = Region::rank2(1, 0, 1, 0, 0);
        assert!(enumerate_rows(&p, &reg, &int(3)).is_err());
    }

    #[test]
    fn skewed_lattice_matches_box() {
        let p = Poly2 {
            a: int(1),
            b: int(-1),
            c: int(1),
            d: rat(1, 3),
            e: int(-1),
            f: int(0),
        };
        // Points with n₁ even and n₂ ≡ n₁/2 (mod 3).
        let reg = Region::rank2(2, 1, 3, 0, 0);
        let rows = enumerate_rows(&p, &reg, &int(25)).unwrap();
        assert_eq!(flat(&rows), box_points(&p, &reg, &int(25), 40));
    }

    #[test]
    fn rank_one() {
        let p = Poly2::rank1(rat(1, 2), rat(-3, 2), int(0));
        let pts = progression_points(&p.a, &p.d, &p.f, 0, 1, &int(5)).unwrap();
        assert_eq!(pts, (0..=5).collect::<Vec<_>>());
    }
}
