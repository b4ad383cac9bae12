//! Gegenbauer basis `F_k` on [-1, 1] with weight `(1 - x^2)`,
//! Gauss-Legendre quadrature, and the forward/inverse spectral transforms.
//!
//! The basis is normalized so that `F_0 = 1`, `F_1 = x`,
//! `F_2 = (5x^2 - 1)/4`; it is the ultraspherical family of parameter 3/2
//! rescaled by `2/((k+1)(k+2))`, which gives the three-term recurrence
//!
//! ```text
//!     F_k = ((2k+1) x F_{k-1} - (k-1) F_{k-2}) / (k+2).
//! ```
//!
//! Each `F_k` is an axial spherical harmonic of degree `k` on the 4-sphere:
//! `(1-x^2) F_k'' - 4x F_k' + lambda_k F_k = 0` with `lambda_k = k(k+3)`,
//! and `int_{-1}^{1} (1-x^2) F_k^2 = 8/((2k+3)(k+1)(k+2))`.
//!
//! The quadrature rule is plain Gauss-Legendre; the `(1-x^2)` factor is
//! always carried explicitly by integrands so the same rule serves the
//! non-polynomial integrands (`e^{4u}`) as well.

use std::sync::Arc;

use num::rational::Ratio;

use crate::accsum::{dot2, dot3};
use crate::error::Error;
use crate::Result;

/// Laplacian eigenvalue `lambda_k = k(k+3)` of the degree-k axial harmonic.
pub fn lambda(k: usize) -> u64 {
    (k as u64) * (k as u64 + 3)
}

/// Paneitz eigenvalue `lambda_k (lambda_k + 2)` as f64.
pub fn paneitz_symbol(k: usize) -> f64 {
    let l = lambda(k) as f64;
    l * (l + 2.0)
}

/// Exact weighted norm `int (1-x^2) F_k^2 = 8/((2k+3)(k+1)(k+2))`.
pub fn gegenbauer_norm(k: usize) -> Ratio<i64> {
    let k = k as i64;
    Ratio::new(8, (2 * k + 3) * (k + 1) * (k + 2))
}

/// Gauss-Legendre nodes and weights on [-1, 1].
///
/// Exact for polynomials of degree <= 2n - 1; the weights sum to 2.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Cached `w_j (1 - x_j^2)` for weighted integrals.
    weighted: Vec<f64>,
}

impl QuadratureRule {
    /// Builds the n-point Gauss-Legendre rule by Newton iteration on `P_n`.
    pub fn gauss_legendre(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::QuadratureOrder(n));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Chebyshev-like initial guess, then Newton on P_n
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    let (p2, d2) = legendre_with_derivative(n, x);
                    dp = d2;
                    x -= p2 / d2;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // the guess enumerates roots from the right
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
            nodes[i] = -x;
            weights[i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
            let (_, d) = legendre_with_derivative(n, 0.0);
            weights[n / 2] = 2.0 / (d * d);
        }
        let weighted = nodes
            .iter()
            .zip(&weights)
            .map(|(&x, &w)| w * (1.0 - x * x))
            .collect();
        Ok(Self {
            nodes,
            weights,
            weighted,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `int_{-1}^{1} f` from values of `f` on the nodes.
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        dot2(&self.weights, values)
    }

    /// `int_{-1}^{1} (1-x^2) f` from values of `f` on the nodes.
    pub fn integrate_weighted(&self, values: &[f64]) -> f64 {
        dot2(&self.weighted, values)
    }

    /// `int_{-1}^{1} f` for a closure.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let vals: Vec<f64> = self.nodes.iter().map(|&x| f(x)).collect();
        self.integrate_values(&vals)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = if (x * x - 1.0).abs() < 1e-300 {
        // endpoints never arise for Gauss nodes
        f64::NAN
    } else {
        n as f64 * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

/// The Gegenbauer basis truncated at `max_degree`, with cached node values.
///
/// Immutable after construction; share across threads via [`Arc`].
#[derive(Debug)]
pub struct GegenbauerBasis {
    max_degree: usize,
    quad: QuadratureRule,
    /// `values[k][j] = F_k(x_j)`.
    values: Vec<Vec<f64>>,
    /// f64 norms `int (1-x^2) F_k^2`.
    norms: Vec<f64>,
}

impl GegenbauerBasis {
    /// Builds the basis with an n-point Gauss-Legendre rule.
    ///
    /// Projections of degree-`max_degree` data need `2n - 1 >= 2 max_degree + 2`,
    /// so `n >= max_degree + 2` is required.
    pub fn new(max_degree: usize, quad_nodes: usize) -> Result<Self> {
        if quad_nodes < max_degree + 2 {
            return Err(Error::InsufficientQuadrature {
                nodes: quad_nodes,
                degree: max_degree,
            });
        }
        let quad = QuadratureRule::gauss_legendre(quad_nodes)?;
        let values = basis_rows(max_degree, quad.nodes());
        let norms = (0..=max_degree)
            .map(|k| {
                let r = gegenbauer_norm(k);
                *r.numer() as f64 / *r.denom() as f64
            })
            .collect();
        Ok(Self {
            max_degree,
            quad,
            values,
            norms,
        })
    }

    /// Convenience constructor returning an `Arc` ready for field building.
    pub fn shared(max_degree: usize, quad_nodes: usize) -> Result<Arc<Self>> {
        Ok(Arc::new(Self::new(max_degree, quad_nodes)?))
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Number of spectral coefficients, `max_degree + 1`.
    pub fn num_coeffs(&self) -> usize {
        self.max_degree + 1
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.quad
    }

    /// Node values of `F_k`.
    pub fn node_values(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    pub fn norm(&self, k: usize) -> f64 {
        self.norms[k]
    }

    /// Evaluates `F_k(x)` by the three-term recurrence.
    pub fn eval(&self, k: usize, x: f64) -> Result<f64> {
        if k > self.max_degree {
            return Err(Error::DegreeOutOfRange {
                degree: k,
                max_degree: self.max_degree,
            });
        }
        Ok(eval_f(k, x))
    }

    /// `(F_k, F_k', F_k'')` at `x`, by differentiating the recurrence.
    pub fn eval_with_derivatives(&self, k: usize, x: f64) -> Result<(f64, f64, f64)> {
        if k > self.max_degree {
            return Err(Error::DegreeOutOfRange {
                degree: k,
                max_degree: self.max_degree,
            });
        }
        let (mut f0, mut d0, mut s0) = (1.0, 0.0, 0.0);
        if k == 0 {
            return Ok((f0, d0, s0));
        }
        let (mut f1, mut d1, mut s1) = (x, 1.0, 0.0);
        for m in 2..=k {
            let a = (2 * m + 1) as f64;
            let b = (m - 1) as f64;
            let c = (m + 2) as f64;
            let f2 = (a * x * f1 - b * f0) / c;
            let d2 = (a * (f1 + x * d1) - b * d0) / c;
            let s2 = (a * (2.0 * d1 + x * s1) - b * s0) / c;
            (f0, d0, s0) = (f1, d1, s1);
            (f1, d1, s1) = (f2, d2, s2);
        }
        Ok((f1, d1, s1))
    }

    /// Spectral coefficients of the derivative, via the ultraspherical
    /// coupling `b_k = (2k+3) sum_{j > k, j-k odd} a_j` carried out as a
    /// backward recurrence `s_k = a_{k+1} + s_{k+2}` in the parameter-3/2
    /// basis.
    pub fn derivative_coeffs(&self, coeffs: &[f64]) -> Vec<f64> {
        let n = coeffs.len();
        let scale = |k: usize| 2.0 / (((k + 1) * (k + 2)) as f64);
        let mut out = vec![0.0; n];
        let mut s = vec![0.0; n + 2];
        for k in (0..n.saturating_sub(1)).rev() {
            s[k] = coeffs[k + 1] * scale(k + 1) + s[k + 2];
            out[k] = (2 * k + 3) as f64 * s[k] / scale(k);
        }
        out
    }

    /// Coefficient-space multiplication by `x`, via the exact coupling
    /// `x F_k = ((k+3) F_{k+1} + k F_{k-1}) / (2k+3)`. The top mode is
    /// truncated.
    pub fn x_multiply_coeffs(&self, coeffs: &[f64]) -> Vec<f64> {
        let n = coeffs.len();
        let mut out = vec![0.0; n];
        for (k, &a) in coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let denom = (2 * k + 3) as f64;
            if k + 1 < n {
                out[k + 1] += a * (k + 3) as f64 / denom;
            }
            if k > 0 {
                out[k - 1] += a * k as f64 / denom;
            }
        }
        out
    }

    /// Projects node values onto the basis: `a_k = int (1-x^2) v F_k / norm_k`.
    fn project(&self, values: &[f64], degree: usize) -> Vec<f64> {
        assert_eq!(values.len(), self.quad.len(), "grid length mismatch");
        let wt = &self.quad.weighted;
        (0..=degree)
            .map(|k| dot3(wt, &self.values[k], values) / self.norms[k])
            .collect()
    }
}

fn eval_f(k: usize, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut f0 = 1.0;
    let mut f1 = x;
    for m in 2..=k {
        let f2 = (((2 * m + 1) as f64) * x * f1 - ((m - 1) as f64) * f0) / ((m + 2) as f64);
        f0 = f1;
        f1 = f2;
    }
    f1
}

fn basis_rows(max_degree: usize, xs: &[f64]) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut rows = Vec::with_capacity(max_degree + 1);
    rows.push(vec![1.0; n]);
    if max_degree >= 1 {
        rows.push(xs.to_vec());
    }
    for k in 2..=max_degree {
        let a = (2 * k + 1) as f64;
        let b = (k - 1) as f64;
        let c = (k + 2) as f64;
        let mut row = vec![0.0; n];
        for j in 0..n {
            row[j] = (a * xs[j] * rows[k - 1][j] - b * rows[k - 2][j]) / c;
        }
        rows.push(row);
    }
    rows
}

/// An axial function on the 4-sphere as Gegenbauer coefficients plus a
/// cached sample on the quadrature grid.
///
/// Immutable; operations return new fields. The S4 mean of the field is
/// exactly the coefficient `a_0`.
#[derive(Debug, Clone)]
pub struct SpectralField {
    basis: Arc<GegenbauerBasis>,
    coeffs: Vec<f64>,
    grid: Vec<f64>,
}

impl SpectralField {
    /// Field from coefficients (padded with zeros up to the basis size).
    pub fn from_coeffs(basis: &Arc<GegenbauerBasis>, coeffs: &[f64]) -> Result<Self> {
        if coeffs.len() > basis.num_coeffs() {
            return Err(Error::DegreeOutOfRange {
                degree: coeffs.len() - 1,
                max_degree: basis.max_degree(),
            });
        }
        let mut c = coeffs.to_vec();
        c.resize(basis.num_coeffs(), 0.0);
        let grid = synthesize(basis, &c);
        Ok(Self {
            basis: Arc::clone(basis),
            coeffs: c,
            grid,
        })
    }

    /// The zero field.
    pub fn zeros(basis: &Arc<GegenbauerBasis>) -> Self {
        Self {
            basis: Arc::clone(basis),
            coeffs: vec![0.0; basis.num_coeffs()],
            grid: vec![0.0; basis.quadrature().len()],
        }
    }

    /// `amplitude * F_k`.
    pub fn basis_element(basis: &Arc<GegenbauerBasis>, k: usize, amplitude: f64) -> Result<Self> {
        if k > basis.max_degree() {
            return Err(Error::DegreeOutOfRange {
                degree: k,
                max_degree: basis.max_degree(),
            });
        }
        let mut coeffs = vec![0.0; basis.num_coeffs()];
        coeffs[k] = amplitude;
        Self::from_coeffs(basis, &coeffs)
    }

    /// Projects grid samples onto the basis (the forward transform).
    pub fn analyze(basis: &Arc<GegenbauerBasis>, values: &[f64]) -> Self {
        let coeffs = basis.project(values, basis.max_degree());
        let grid = synthesize(basis, &coeffs);
        Self {
            basis: Arc::clone(basis),
            coeffs,
            grid,
        }
    }

    /// Samples a closure on the quadrature nodes and projects.
    pub fn from_fn(basis: &Arc<GegenbauerBasis>, f: impl Fn(f64) -> f64) -> Self {
        let vals: Vec<f64> = basis.quadrature().nodes().iter().map(|&x| f(x)).collect();
        Self::analyze(basis, &vals)
    }

    pub fn basis(&self) -> &Arc<GegenbauerBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// Values on the quadrature nodes (synthesis, cached).
    pub fn grid_values(&self) -> &[f64] {
        &self.grid
    }

    /// S4 mean of the field; equals `a_0`.
    pub fn mean_s4(&self) -> f64 {
        self.coeffs[0]
    }

    /// Evaluates the truncated series at an arbitrary `x` in [-1, 1].
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.coeffs.len();
        let mut total = self.coeffs[0];
        if n == 1 {
            return total;
        }
        let mut f0 = 1.0;
        let mut f1 = x;
        total += self.coeffs[1] * f1;
        for k in 2..n {
            let f2 = (((2 * k + 1) as f64) * x * f1 - ((k - 1) as f64) * f0) / ((k + 2) as f64);
            total += self.coeffs[k] * f2;
            f0 = f1;
            f1 = f2;
        }
        total
    }

    /// Spectral derivative.
    pub fn derivative(&self) -> Self {
        let dc = self.basis.derivative_coeffs(&self.coeffs);
        let grid = synthesize(&self.basis, &dc);
        Self {
            basis: Arc::clone(&self.basis),
            coeffs: dc,
            grid,
        }
    }

    /// Multiplication by `x`, exactly in coefficient space (top mode
    /// truncated).
    pub fn times_x(&self) -> Self {
        let c = self.basis.x_multiply_coeffs(&self.coeffs);
        Self::from_coeffs(&self.basis, &c).expect("same basis")
    }

    /// Multiplication by `(1 - x^2)`, exactly in coefficient space (the
    /// top two modes are truncated).
    pub fn times_one_minus_x2(&self) -> Self {
        let xx = self
            .basis
            .x_multiply_coeffs(&self.basis.x_multiply_coeffs(&self.coeffs));
        let c: Vec<f64> = self.coeffs.iter().zip(&xx).map(|(&a, &b)| a - b).collect();
        Self::from_coeffs(&self.basis, &c).expect("same basis")
    }

    /// Sup norm over the grid nodes and the endpoints +-1.
    pub fn sup_norm(&self) -> f64 {
        let mut m = self.grid.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        // F_k(1) = 1, F_k(-1) = (-1)^k
        let at_p1: f64 = self.coeffs.iter().sum();
        let at_m1: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| if k % 2 == 0 { c } else { -c })
            .sum();
        m = m.max(at_p1.abs()).max(at_m1.abs());
        m
    }

    /// Weighted L2 norm `sqrt(sum a_k^2 norm_k) = sqrt(int (1-x^2) u^2)`.
    pub fn l2_weighted(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, &a)| a * a * self.basis.norm(k))
            .sum::<f64>()
            .sqrt()
    }

    /// Max |a_k| over the top `count` coefficients.
    pub fn tail_max(&self, count: usize) -> f64 {
        let n = self.coeffs.len();
        self.coeffs[n.saturating_sub(count)..]
            .iter()
            .fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// Same field with the mean (a_0) removed.
    pub fn with_mean_zero(&self) -> Self {
        let mut c = self.coeffs.clone();
        c[0] = 0.0;
        Self::from_coeffs(&self.basis, &c).expect("same basis")
    }

    /// Same field with a constant added.
    pub fn plus_constant(&self, c0: f64) -> Self {
        let mut c = self.coeffs.clone();
        c[0] += c0;
        Self::from_coeffs(&self.basis, &c).expect("same basis")
    }

    pub fn scaled(&self, s: f64) -> Self {
        let c: Vec<f64> = self.coeffs.iter().map(|&a| a * s).collect();
        Self::from_coeffs(&self.basis, &c).expect("same basis")
    }

    pub fn add(&self, other: &Self) -> Self {
        assert!(
            Arc::ptr_eq(&self.basis, &other.basis),
            "fields live on different bases"
        );
        let c: Vec<f64> = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| a + b)
            .collect();
        Self::from_coeffs(&self.basis, &c).expect("same basis")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(-1.0))
    }
}

fn synthesize(basis: &GegenbauerBasis, coeffs: &[f64]) -> Vec<f64> {
    let n = basis.quad.len();
    let mut grid = vec![0.0; n];
    for (k, &a) in coeffs.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let row = &basis.values[k];
        for j in 0..n {
            grid[j] += a * row[j];
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigRational;
    use num::{BigInt, One, Zero};
    use proptest::prelude::*;

    /// Rodrigues-formula oracle with exact rational polynomial arithmetic:
    /// F_k = (-1)^k / (2^k (k+1)!) * (1-x^2)^{-1} * d^k/dx^k (1-x^2)^{k+1}.
    fn rodrigues_poly(k: usize) -> Vec<BigRational> {
        // (1 - x^2)^{k+1} as integer coefficients
        let mut p = vec![BigInt::zero(); 2 * (k + 1) + 1];
        for j in 0..=(k + 1) {
            // C(k+1, j) (-1)^j x^{2j}
            let c = binomial(k + 1, j) * if j % 2 == 0 { 1 } else { -1 };
            p[2 * j] = BigInt::from(c);
        }
        // differentiate k times
        for _ in 0..k {
            let mut d = vec![BigInt::zero(); p.len().saturating_sub(1).max(1)];
            for (e, c) in p.iter().enumerate().skip(1) {
                d[e - 1] = c * BigInt::from(e);
            }
            p = d;
        }
        // divide by (1 - x^2), i.e. by (-x^2 + 1): exact division
        let q = divide_by_one_minus_x2(&p);
        // scale by (-1)^k / (2^k (k+1)!)
        let mut denom = BigInt::one();
        for i in 2..=(k + 1) {
            denom *= BigInt::from(i);
        }
        denom *= BigInt::from(2).pow(k as u32);
        let sign = if k % 2 == 0 {
            BigInt::one()
        } else {
            -BigInt::one()
        };
        q.into_iter()
            .map(|c| BigRational::new(c * sign.clone(), denom.clone()))
            .collect()
    }

    fn binomial(n: usize, k: usize) -> i128 {
        let mut r: i128 = 1;
        for i in 0..k {
            r = r * (n - i) as i128 / (i + 1) as i128;
        }
        r
    }

    fn divide_by_one_minus_x2(p: &[BigInt]) -> Vec<BigInt> {
        // long division by (1 - x^2), highest degree first
        let mut rem: Vec<BigInt> = p.to_vec();
        let deg = rem.len() - 1;
        let mut quot = vec![BigInt::zero(); deg.saturating_sub(1).max(1)];
        for e in (2..=deg).rev() {
            let c = rem[e].clone();
            if c.is_zero() {
                continue;
            }
            // (1 - x^2) * (-c x^{e-2}) = -c x^{e-2} + c x^e
            quot[e - 2] = -c.clone();
            rem[e] = BigInt::zero();
            rem[e - 2] += c;
        }
        assert!(rem.iter().all(|c| c.is_zero()), "division not exact");
        quot
    }

    fn eval_rational_poly(p: &[BigRational], x: f64) -> f64 {
        let mut v = 0.0;
        for c in p.iter().rev() {
            let cf = c.numer().to_string().parse::<f64>().unwrap()
                / c.denom().to_string().parse::<f64>().unwrap();
            v = v * x + cf;
        }
        v
    }

    #[test]
    fn recurrence_matches_rodrigues_through_degree_8() {
        let basis = GegenbauerBasis::shared(8, 32).unwrap();
        for k in 0..=8 {
            let poly = rodrigues_poly(k);
            for &x in &[-0.97, -0.5, -0.123, 0.0, 0.3, 0.77, 1.0] {
                let via_rec = basis.eval(k, x).unwrap();
                let via_rod = eval_rational_poly(&poly, x);
                assert!(
                    (via_rec - via_rod).abs() < 1e-13,
                    "k={k} x={x}: {via_rec} vs {via_rod}"
                );
            }
        }
    }

    #[test]
    fn first_three_elements_are_pinned() {
        let basis = GegenbauerBasis::shared(4, 8).unwrap();
        assert_eq!(basis.eval(0, 0.37).unwrap(), 1.0);
        assert_eq!(basis.eval(1, -0.4).unwrap(), -0.4);
        assert!((basis.eval(2, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let x = 0.6f64;
        assert!((basis.eval(2, x).unwrap() - (5.0 * x * x - 1.0) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn lambda_values() {
        assert_eq!(lambda(0), 0);
        assert_eq!(lambda(2), 10);
        assert_eq!(lambda(6), 54);
        // Paneitz symbol at k = 2 is 120
        assert_eq!(paneitz_symbol(2), 120.0);
    }

    #[test]
    fn norms_are_exact_rationals() {
        assert_eq!(gegenbauer_norm(0), Ratio::new(4, 3));
        assert_eq!(gegenbauer_norm(1), Ratio::new(4, 15));
        assert_eq!(gegenbauer_norm(2), Ratio::new(2, 21));
    }

    #[test]
    fn quadrature_pins() {
        let q = QuadratureRule::gauss_legendre(8).unwrap();
        let sum: f64 = q.weights().iter().sum();
        assert!((sum - 2.0).abs() < 1e-14);
        // int (1-x^2) dx = 4/3
        let v = q.integrate_weighted(&vec![1.0; 8]);
        assert!((v - 4.0 / 3.0).abs() < 1e-14);
        // int (1-x^2) x^2 dx = 4/15
        let xs: Vec<f64> = q.nodes().iter().map(|&x| x * x).collect();
        assert!((q.integrate_weighted(&xs) - 4.0 / 15.0).abs() < 1e-14);
        // int (1-x^2) F2 F3 = 0
        let q16 = QuadratureRule::gauss_legendre(16).unwrap();
        let vals: Vec<f64> = q16
            .nodes()
            .iter()
            .map(|&x| eval_f(2, x) * eval_f(3, x))
            .collect();
        assert!(q16.integrate_weighted(&vals).abs() < 1e-14);
    }

    #[test]
    fn orthogonality_matrix_is_diagonal() {
        let basis = GegenbauerBasis::shared(32, 80).unwrap();
        let q = basis.quadrature();
        for k in 0..=32usize {
            for l in k..=32usize {
                let vals: Vec<f64> = (0..q.len())
                    .map(|j| basis.node_values(k)[j] * basis.node_values(l)[j])
                    .collect();
                let got = q.integrate_weighted(&vals);
                let want = if k == l { basis.norm(k) } else { 0.0 };
                assert!((got - want).abs() < 1e-12, "k={k} l={l}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn eigenrelation_and_derivative_bound() {
        let basis = GegenbauerBasis::shared(32, 128).unwrap();
        for k in 0..=32usize {
            let lam = lambda(k) as f64;
            let mut worst = 0.0f64;
            let mut dmax = 0.0f64;
            for &x in basis.quadrature().nodes() {
                let (f, d, s) = basis.eval_with_derivatives(k, x).unwrap();
                worst = worst.max(((1.0 - x * x) * s - 4.0 * x * d + lam * f).abs());
                dmax = dmax.max(d.abs());
            }
            for &x in &[-1.0, 1.0] {
                let (_, d, _) = basis.eval_with_derivatives(k, x).unwrap();
                dmax = dmax.max(d.abs());
            }
            assert!(worst <= 1e-9, "eigenrelation residual {worst:e} at k={k}");
            assert!(
                dmax <= lam / 4.0 + 1e-10,
                "derivative bound violated at k={k}: {dmax} vs {}",
                lam / 4.0
            );
        }
    }

    #[test]
    fn f2_cubed_weighted_integral() {
        // int (1-x^2) F2^3 = 2/63, closed form; feeds the -20 slope check
        let q = QuadratureRule::gauss_legendre(16).unwrap();
        let vals: Vec<f64> = q.nodes().iter().map(|&x| eval_f(2, x).powi(3)).collect();
        assert!((q.integrate_weighted(&vals) - 2.0 / 63.0).abs() < 1e-13);
    }

    #[test]
    fn analyze_basis_element_and_x_squared() {
        let basis = GegenbauerBasis::shared(16, 48).unwrap();
        let f3 = SpectralField::basis_element(&basis, 3, 1.0).unwrap();
        let re = SpectralField::analyze(&basis, f3.grid_values());
        for k in 0..=16 {
            let want = if k == 3 { 1.0 } else { 0.0 };
            assert!((re.coeff(k) - want).abs() < 1e-13);
        }
        // x^2 = 1/5 + (4/5) F_2
        let sq = SpectralField::from_fn(&basis, |x| x * x);
        assert!((sq.coeff(0) - 0.2).abs() < 1e-14);
        assert!((sq.coeff(2) - 0.8).abs() < 1e-14);
        for k in [1usize, 3, 4, 5, 6] {
            assert!(sq.coeff(k).abs() < 1e-13);
        }
        // the S4 mean is a_0
        assert!((sq.mean_s4() - 0.2).abs() < 1e-14);
    }

    #[test]
    fn x_multiplication_is_exact() {
        let basis = GegenbauerBasis::shared(12, 40).unwrap();
        // x F_1 = x^2 = 1/5 + (4/5) F_2
        let f1 = SpectralField::basis_element(&basis, 1, 1.0).unwrap();
        let xf1 = f1.times_x();
        assert!((xf1.coeff(0) - 0.2).abs() < 1e-15);
        assert!((xf1.coeff(2) - 0.8).abs() < 1e-15);
        // (1 - x^2) F_1 against the grid
        let w = f1.times_one_minus_x2();
        for (j, &x) in basis.quadrature().nodes().iter().enumerate() {
            assert!((w.grid_values()[j] - (1.0 - x * x) * x).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_coeffs_match_finite_differences() {
        let basis = GegenbauerBasis::shared(24, 96).unwrap();
        let u = SpectralField::from_fn(&basis, |x| (1.3 * x).sin() + 0.3 * x * x * x);
        let du = u.derivative();
        for &x in &[-0.82, -0.33, 0.11, 0.52, 0.9] {
            let h = 1e-6;
            let fd = (u.eval(x + h) - u.eval(x - h)) / (2.0 * h);
            assert!(
                (du.eval(x) - fd).abs() < 1e-8,
                "x={x}: {} vs {}",
                du.eval(x),
                fd
            );
        }
    }

    proptest! {
        #[test]
        fn quadrature_exact_on_polynomials(coeffs in proptest::collection::vec(-1.0f64..1.0, 1..12)) {
            // random polynomial of degree <= 11 against an 8-point rule (exact to 15)
            let q = QuadratureRule::gauss_legendre(8).unwrap();
            let poly = |x: f64| coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c);
            let got = q.integrate(poly);
            // exact integral: sum c_e * (1 - (-1)^{e+1}) / (e+1)
            let want: f64 = coeffs.iter().enumerate().map(|(e, &c)| {
                if e % 2 == 0 { 2.0 * c / (e as f64 + 1.0) } else { 0.0 }
            }).sum();
            prop_assert!((got - want).abs() <= 1e-13 * (1.0 + want.abs()));
        }

        #[test]
        fn analyze_synthesize_roundtrip(coeffs in proptest::collection::vec(-2.0f64..2.0, 1..20)) {
            let basis = GegenbauerBasis::shared(19, 64).unwrap();
            let u = SpectralField::from_coeffs(&basis, &coeffs).unwrap();
            let round = SpectralField::analyze(&basis, u.grid_values());
            for k in 0..coeffs.len() {
                prop_assert!((round.coeff(k) - coeffs[k]).abs() < 1e-12);
            }
        }
    }
}
