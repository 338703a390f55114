//! In-place kernels on dense integer coefficient buffers.
//!
//! A buffer `b` holds the coefficients of `x^0 .. x^{len-1}` with everything
//! beyond `len` discarded, so each kernel is exact up to the buffer length.

use crate::int::Int;

/// `b ← b·(1 − sign·x^shift)`.
pub fn mul_binomial(b: &mut [Int], sign: i8, shift: usize) {
    if shift == 0 || shift >= b.len() {
        return;
    }
    for k in (shift..b.len()).rev() {
        let (left, right) = b.split_at_mut(k);
        let src = &left[k - shift];
        if !src.is_zero() {
            right[0].add_signed(src, -sign);
        }
    }
}

/// `b ← b / (1 − sign·x^shift)`.
pub fn div_binomial(b: &mut [Int], sign: i8, shift: usize) {
    if shift == 0 || shift >= b.len() {
        return;
    }
    for k in shift..b.len() {
        let (left, right) = b.split_at_mut(k);
        let src = &left[k - shift];
        if !src.is_zero() {
            right[0].add_signed(src, sign);
        }
    }
}

/// `acc[offset + k] += sign·src[k]` for all `k` that fit.
pub fn add_shifted(acc: &mut [Int], src: &[Int], offset: usize, sign: i8) {
    if offset >= acc.len() {
        return;
    }
    for (a, s) in acc[offset..].iter_mut().zip(src) {
        if !s.is_zero() {
            a.add_signed(s, sign);
        }
    }
}

/// First `len` coefficients of `a·b`.
pub fn mul_truncated(a: &[Int], b: &[Int], len: usize) -> Vec<Int> {
    let mut out = vec![Int::ZERO; len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            if !y.is_zero() {
                out[i + j].add_mul(x, y);
            }
        }
    }
    out
}
