//! The spatial-sign transform `U(x) = x / ‖x‖` (zero for `x = 0`).
//!
//! Norms and quotients are evaluated in double-double arithmetic after an
//! exact power-of-two prescale, so each output coordinate is the correctly
//! rounded value of the exact real direction (barring near-halfway cases of
//! probability ~2⁻⁵⁰). Two inputs that are exact positive multiples of each
//! other therefore produce bitwise-identical signs, which is what makes the
//! sign-based statistics bitwise scale invariant.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::matrix::{SeriesMatrix, SignMatrix};

/// Norms below this are treated as zero.
pub const ZERO_NORM_THRESHOLD: f64 = 1e-300;

/// Spatial sign of a single vector.
pub fn spatial_sign(x: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; x.len()];
    spatial_sign_into(x, &mut out)?;
    Ok(out)
}

/// Writes the spatial sign of `x` into `out` (same length).
pub fn spatial_sign_into(x: &[f64], out: &mut [f64]) -> Result<()> {
    assert_eq!(x.len(), out.len(), "spatial_sign_into length mismatch");
    if x.iter().any(|v| !v.is_finite()) {
        return Err(invalid("spatial sign of a non-finite vector"));
    }
    let max_abs = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if max_abs == 0.0 {
        out.fill(0.0);
        return Ok(());
    }
    // Exact rescale so the largest coordinate lies in [0.5, 1).
    let (_, exp) = libm::frexp(max_abs);
    let mut sum = DoubleDouble::ZERO;
    for (o, &v) in out.iter_mut().zip(x) {
        let y = libm::scalbn(v, -exp);
        *o = y;
        sum = sum.add(two_prod(y, y));
    }
    let norm = sum.sqrt();
    if libm::scalbn(norm.hi, exp) < ZERO_NORM_THRESHOLD {
        out.fill(0.0);
        return Ok(());
    }
    for o in out.iter_mut() {
        *o = div_dd(*o, norm);
    }
    Ok(())
}

/// Row-wise spatial signs of an observation matrix.
pub fn sign_transform(eps: &SeriesMatrix) -> Result<SignMatrix> {
    let (n, p) = (eps.n(), eps.p());
    let mut data = vec![0.0; n * p];
    for (row, out) in eps.rows().zip(data.chunks_exact_mut(p)) {
        spatial_sign_into(row, out)?;
    }
    Ok(SignMatrix { data, n, p })
}

#[derive(Clone, Copy, Debug)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    const ZERO: Self = Self { hi: 0.0, lo: 0.0 };

    fn add(self, other: Self) -> Self {
        let (s, e) = two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Self { hi, lo }
    }

    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Self::ZERO;
        }
        let r = libm::sqrt(self.hi);
        let sq = two_prod(r, r);
        let diff = ((self.hi - sq.hi) - sq.lo) + self.lo;
        let (hi, lo) = quick_two_sum(r, diff / (2.0 * r));
        Self { hi, lo }
    }
}

/// `y / d` rounded once from a double-double quotient.
fn div_dd(y: f64, d: DoubleDouble) -> f64 {
    let q = y / d.hi;
    let prod = two_prod(q, d.hi);
    let rem = ((y - prod.hi) - prod.lo) - q * d.lo;
    q + rem / d.hi
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1
    let c = SPLITTER * a;
    let hi = c - (c - a);
    (hi, a - hi)
}

/// Dekker's exact product; inputs here are bounded by 1 in magnitude.
#[inline]
fn two_prod(a: f64, b: f64) -> DoubleDouble {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    DoubleDouble { hi: p, lo: e }
}
