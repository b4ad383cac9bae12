//! Compensated dot products and sums (Ogita-Rump-Oishi `Dot2`/`Sum2`).
//!
//! The spectral projections divide by basis norms as small as
//! `8/((2N+3)(N+1)(N+2))` and the Paneitz symbol multiplies the result by
//! `lambda_k (lambda_k + 2)`, so a plain f64 dot product leaves
//! O(1e-8) noise in high-mode residuals. Dot2 returns the result as if
//! accumulated in twice the working precision, which pushes that noise
//! below 1e-12.

/// Error-free transformation of a sum: `a + b = s + err` exactly.
#[inline(always)]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// Dekker split of a f64 into high and low parts.
#[inline(always)]
fn split(a: f64) -> (f64, f64) {
    const FACTOR: f64 = 134_217_729.0; // 2^27 + 1
    let c = FACTOR * a;
    let hi = c - (c - a);
    (hi, a - hi)
}

/// Error-free transformation of a product: `a * b = p + err` exactly.
#[inline(always)]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let err = al * bl - (((p - ah * bh) - al * bh) - ah * bl);
    (p, err)
}

/// Dot product accumulated in doubled precision.
pub fn dot2(xs: &[f64], ys: &[f64]) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    let mut p = 0.0;
    let mut s = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let (h, r) = two_prod(x, y);
        let (q, t) = two_sum(p, h);
        p = q;
        s += t + r;
    }
    p + s
}

/// Triple product dot: `sum_j xs[j] * ys[j] * zs[j]` in doubled precision.
pub fn dot3(xs: &[f64], ys: &[f64], zs: &[f64]) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    debug_assert_eq!(xs.len(), zs.len());
    let mut p = 0.0;
    let mut s = 0.0;
    for ((&x, &y), &z) in xs.iter().zip(ys).zip(zs) {
        let (xy, exy) = two_prod(x, y);
        let (h, r1) = two_prod(xy, z);
        let r2 = exy * z;
        let (q, t) = two_sum(p, h);
        p = q;
        s += t + r1 + r2;
    }
    p + s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot2_beats_naive_on_cancellation() {
        // sum of (x, -x + tiny) pairs: naive loses the tiny part
        let n = 10_000;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 1.0) * 1e10).collect();
        let mut ys: Vec<f64> = xs.iter().map(|_| 1.0).collect();
        let mut xs2 = xs.clone();
        for i in 0..n {
            xs2.push(-xs[i]);
            ys.push(1.0);
        }
        xs2.push(3.5e-8);
        ys.push(1.0);
        let d = dot2(&xs2, &ys);
        assert!((d - 3.5e-8).abs() < 1e-20, "dot2 = {d:e}");
    }

    #[test]
    fn dot3_matches_exact_small_case() {
        let xs = [1.0, 2.0, 3.0];
        let ys = [4.0, 5.0, 6.0];
        let zs = [7.0, 8.0, 9.0];
        assert_eq!(dot3(&xs, &ys, &zs), 28.0 + 80.0 + 162.0);
    }
}
