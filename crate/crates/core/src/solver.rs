//! Residual, Jacobian and damped Newton iteration for the Euler-Lagrange
//! equation in its `rho`-form,
//!
//! ```text
//!     P4 u + rho (1 - e^{4u} / int_{S^4} e^{4u} dw) = 0,   rho = 6/alpha,
//! ```
//!
//! posed on mean-zero spectral coefficients (the equation is invariant
//! under adding constants, so `a_0 = 0` is a pure gauge choice). A
//! deflation mode searches for distinct solutions from many seeds.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::Error;
use crate::gegenbauer::{paneitz_symbol, GegenbauerBasis, SpectralField};
use crate::operators::{self, energy_i, exp4_grid, gradient_field};
use crate::Result;

/// Newton solver configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Residual sup-norm tolerance.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Backtracking damping floor (factor halves from 1 down to this).
    pub damping_floor: f64,
    /// Relative singular-value cutoff below which the Jacobian is treated
    /// as rank-deficient and solved by truncated SVD (the `rho = 6` family
    /// direction).
    pub svd_cutoff: f64,
    /// Deflation shift (`sigma` in `1/||u - u_i||^p + sigma`).
    pub deflation_shift: f64,
    /// Deflation power `p`.
    pub deflation_power: f64,
    /// Solutions closer than this in weighted L2 are considered identical.
    pub deflation_radius: f64,
    /// Sup-norm guard; beyond it the iteration is declared divergent.
    pub sup_guard: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-11,
            max_iterations: 50,
            damping_floor: 1.0 / 64.0,
            svd_cutoff: 1e-8,
            deflation_shift: 1.0,
            deflation_power: 2.0,
            deflation_radius: 1e-4,
            sup_guard: 40.0,
        }
    }
}

/// Converged (or not) Newton output with diagnostics.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub converged: bool,
    /// Solution in the mean-zero gauge.
    pub field: SpectralField,
    pub iterations: usize,
    pub residual_norm: f64,
    pub rho: f64,
    pub alpha: f64,
    /// `F_1` coefficient of `G = (1-x^2)u'`.
    pub beta: f64,
    /// `int (1-x^2) e^{4u}`.
    pub gamma: f64,
    pub sup_norm: f64,
    /// `I_alpha(u)`.
    pub energy: f64,
}

impl SolveResult {
    /// Solution-file payload (JSON via serde).
    pub fn file_record(&self, schema_version: u32) -> SolutionRecord {
        SolutionRecord {
            schema_version,
            rho: self.rho,
            alpha: self.alpha,
            n: self.field.basis().max_degree(),
            coeffs: self.field.coeffs().to_vec(),
            residual_norm: self.residual_norm,
            sup_norm: self.sup_norm,
            beta: self.beta,
            gamma: self.gamma,
            energy: self.energy,
        }
    }
}

/// On-disk solution format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub schema_version: u32,
    pub rho: f64,
    pub alpha: f64,
    pub n: usize,
    pub coeffs: Vec<f64>,
    pub residual_norm: f64,
    pub sup_norm: f64,
    pub beta: f64,
    pub gamma: f64,
    pub energy: f64,
}

/// Spectral residual of the rho-form equation.
///
/// The `k = 0` coefficient vanishes identically (both terms are mean
/// zero); it is computed, asserted small, and zeroed.
pub fn residual(rho: f64, u: &SpectralField) -> Result<SpectralField> {
    let e = exp4_grid(u)?;
    let basis = u.basis();
    let gamma = basis.quadrature().integrate_weighted(&e);
    let ek = SpectralField::analyze(basis, &e);
    let scale = 4.0 / (3.0 * gamma);
    let mut coeffs: Vec<f64> = u
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, &a)| paneitz_symbol(k) * a - rho * scale * ek.coeff(k))
        .collect();
    coeffs[0] += rho; // rho * (1 - (4/3) e4u_0 / gamma)
    debug_assert!(
        coeffs[0].abs() <= 1e-8 * (1.0 + rho.abs()),
        "k = 0 residual coefficient should vanish, got {:e}",
        coeffs[0]
    );
    coeffs[0] = 0.0;
    SpectralField::from_coeffs(basis, &coeffs)
}

/// Sup norm of the synthesized residual.
pub fn residual_sup(rho: f64, u: &SpectralField) -> Result<f64> {
    Ok(residual(rho, u)?.sup_norm())
}

/// Magnitude scale of the residual terms before cancellation; the f64
/// noise floor of a residual evaluation is a small multiple of
/// `f64::EPSILON` times this.
pub fn residual_scale(rho: f64, u: &SpectralField) -> Result<f64> {
    let e = exp4_grid(u)?;
    let basis = u.basis();
    let gamma = basis.quadrature().integrate_weighted(&e);
    let emax = e.iter().fold(0.0f64, |m, &v| m.max(v));
    let p4max = u
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, &a)| (paneitz_symbol(k) * a).abs())
        .fold(0.0, f64::max);
    Ok(rho.abs() * (1.0 + 4.0 / 3.0 * emax / gamma) + p4max)
}

/// Partial derivative of the residual with respect to `rho` (coefficients
/// `1..=N`).
pub fn residual_rho_partial(u: &SpectralField) -> Result<DVector<f64>> {
    let e = exp4_grid(u)?;
    let basis = u.basis();
    let gamma = basis.quadrature().integrate_weighted(&e);
    let ek = SpectralField::analyze(basis, &e);
    let scale = 4.0 / (3.0 * gamma);
    let n = basis.max_degree();
    Ok(DVector::from_fn(n, |i, _| -scale * ek.coeff(i + 1)))
}

/// Dense Jacobian on mean-zero coefficients `1..=N`:
/// `J phi = P4 phi - 4 rho (e^{4u} phi / M - e^{4u} <e^{4u} phi> / M^2)`
/// with `M = int_{S^4} e^{4u} dw`.
///
/// Self-adjoint in the `(1-x^2)`-weighted inner product.
pub fn jacobian(rho: f64, u: &SpectralField) -> Result<DMatrix<f64>> {
    let basis = u.basis();
    let n = basis.max_degree();
    let e = exp4_grid(u)?;
    let m = operators::sphere_integral(basis, &e);
    let quad = basis.quadrature();
    let nq = quad.len();
    // weighted projection coefficients of e^{4u} and of e^{4u} F_m
    let ek = SpectralField::analyze(basis, &e);
    let mut jac = DMatrix::zeros(n, n);
    // column m: analyze(e^{4u} F_m) and the rank-one correction
    let mut col_vals = vec![0.0; nq];
    for mcol in 1..=n {
        let fm = basis.node_values(mcol);
        for j in 0..nq {
            col_vals[j] = e[j] * fm[j];
        }
        let efm = SpectralField::analyze(basis, &col_vals);
        // <e^{4u} F_m>_{S^4} = (3/4) norm_m * coeff_m(e^{4u})
        let efm_mean = 0.75 * basis.norm(mcol) * ek.coeff(mcol);
        for k in 1..=n {
            let mut v = -4.0 * rho * (efm.coeff(k) / m - ek.coeff(k) * efm_mean / (m * m));
            if k == mcol {
                v += paneitz_symbol(k);
            }
            jac[(k - 1, mcol - 1)] = v;
        }
    }
    Ok(jac)
}

fn solve_step(jac: &DMatrix<f64>, rhs: &DVector<f64>, cfg: &SolverConfig) -> Result<DVector<f64>> {
    // LU first; fall back to truncated SVD near rank deficiency
    if let Some(sol) = jac.clone().lu().solve(rhs) {
        let svd = jac.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if smin > cfg.svd_cutoff * smax {
            return Ok(sol);
        }
    }
    let svd = jac.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return Err(Error::SingularJacobian(0.0));
    }
    svd.solve(rhs, cfg.svd_cutoff * smax)
        .map_err(|_| Error::SingularJacobian(svd.singular_values.min()))
}

fn assemble(u: &SpectralField, delta: &DVector<f64>, lam: f64) -> SpectralField {
    let mut coeffs = u.coeffs().to_vec();
    for (i, d) in delta.iter().enumerate() {
        coeffs[i + 1] += lam * d;
    }
    coeffs[0] = 0.0;
    SpectralField::from_coeffs(u.basis(), &coeffs).expect("same basis")
}

fn diagnostics(
    rho: f64,
    u: &SpectralField,
    converged: bool,
    iterations: usize,
    rs: f64,
) -> Result<SolveResult> {
    let alpha = 6.0 / rho;
    let g = gradient_field(u)?;
    let energy = energy_i(u, alpha).map(|e| e.total).unwrap_or(f64::NAN);
    Ok(SolveResult {
        converged,
        iterations,
        residual_norm: rs,
        rho,
        alpha,
        beta: g.beta,
        gamma: g.gamma,
        sup_norm: u.sup_norm(),
        energy,
        field: u.clone(),
    })
}

/// Damped Newton iteration from `u0` at fixed `rho`.
///
/// Backtracks the step by halves while the residual sup-norm increases;
/// declares divergence after `max_iterations`, on exponential overflow, or
/// when the iterate's sup norm passes the guard. The last two accepted
/// steps of a converged run are required to be undamped (quadratic
/// regime).
pub fn newton_solve(rho: f64, u0: &SpectralField, cfg: &SolverConfig) -> Result<SolveResult> {
    let mut u = u0.with_mean_zero();
    let mut rs = residual_sup(rho, &u)?;
    let mut last_damping = [1.0f64; 2];
    for it in 0..cfg.max_iterations {
        if rs <= cfg.tolerance {
            debug_assert!(
                last_damping.iter().all(|&d| d == 1.0),
                "converged run should end with undamped steps"
            );
            return diagnostics(rho, &u, true, it, rs);
        }
        let r = residual(rho, &u)?;
        let rhs =
            -DVector::from_iterator(u.basis().max_degree(), r.coeffs().iter().skip(1).copied());
        let jac = jacobian(rho, &u)?;
        let delta = solve_step(&jac, &rhs, cfg)?;
        let mut lam = 1.0;
        let mut accepted = false;
        while lam >= cfg.damping_floor {
            let cand = assemble(&u, &delta, lam);
            if cand.sup_norm() > cfg.sup_guard {
                lam *= 0.5;
                continue;
            }
            match residual_sup(rho, &cand) {
                Ok(rs_new) if rs_new < rs || rs_new <= cfg.tolerance => {
                    u = cand;
                    rs = rs_new;
                    last_damping = [last_damping[1], lam];
                    accepted = true;
                    break;
                }
                Ok(_) | Err(Error::ExponentialOverflow(_)) => lam *= 0.5,
                Err(e) => return Err(e),
            }
        }
        if !accepted {
            return diagnostics(rho, &u, false, it, rs);
        }
    }
    let converged = rs <= cfg.tolerance;
    diagnostics(rho, &u, converged, cfg.max_iterations, rs)
}

/// Weighted L2 distance between two coefficient vectors.
fn l2w_distance(basis: &GegenbauerBasis, a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(k, (&x, &y))| (x - y) * (x - y) * basis.norm(k))
        .sum::<f64>()
        .sqrt()
}

fn deflation_factor(
    basis: &GegenbauerBasis,
    cfg: &SolverConfig,
    u: &[f64],
    found: &[SpectralField],
) -> f64 {
    let mut m = 1.0;
    for f in found {
        let d = l2w_distance(basis, u, f.coeffs());
        m *= d.powf(-cfg.deflation_power) + cfg.deflation_shift;
    }
    m
}

/// Newton iteration on the deflated residual `m(u) r(u)`, where
/// `m(u) = prod_i (||u - u_i||_w^{-p} + sigma)` repels the iteration from
/// previously found solutions.
fn deflated_newton(
    rho: f64,
    u0: &SpectralField,
    found: &[SpectralField],
    cfg: &SolverConfig,
) -> Result<Option<SpectralField>> {
    let basis = Arc::clone(u0.basis());
    let n = basis.max_degree();
    let mut u = u0.with_mean_zero();
    for _ in 0..(2 * cfg.max_iterations) {
        let r = match residual(rho, &u) {
            Ok(r) => r,
            Err(Error::ExponentialOverflow(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let rs = r.sup_norm();
        if rs <= cfg.tolerance {
            return Ok(Some(u));
        }
        let m = deflation_factor(&basis, cfg, u.coeffs(), found);
        // grad m on coefficients 1..=N
        let mut grad_m: DVector<f64> = DVector::zeros(n);
        for f in found {
            let d = l2w_distance(&basis, u.coeffs(), f.coeffs());
            if d < 1e-14 {
                return Ok(None); // collapsed on a known solution
            }
            let mi = d.powf(-cfg.deflation_power) + cfg.deflation_shift;
            let dm_scale = -cfg.deflation_power * d.powf(-cfg.deflation_power - 2.0);
            for k in 1..=n {
                grad_m[k - 1] += dm_scale * basis.norm(k) * (u.coeff(k) - f.coeff(k)) * (m / mi);
            }
        }
        let jac = jacobian(rho, &u)?;
        let rvec = DVector::from_iterator(n, r.coeffs().iter().skip(1).copied());
        // J_defl = m J + r * grad_m^T
        let mut jd = jac * m;
        for k in 0..n {
            for l in 0..n {
                jd[(k, l)] += rvec[k] * grad_m[l];
            }
        }
        let delta = match solve_step(&jd, &(-&rvec * m), cfg) {
            Ok(d) => d,
            Err(_) => return Ok(None),
        };
        let def_res = |cand: &SpectralField| -> Option<f64> {
            let rr = residual(rho, cand).ok()?;
            Some(rr.sup_norm() * deflation_factor(&basis, cfg, cand.coeffs(), found))
        };
        let cur = rs * m;
        let mut lam = 1.0;
        let mut accepted = false;
        while lam >= cfg.damping_floor {
            let cand = assemble(&u, &delta, lam);
            if cand.sup_norm() > cfg.sup_guard {
                lam *= 0.5;
                continue;
            }
            if let Some(v) = def_res(&cand) {
                if v < cur {
                    u = cand;
                    accepted = true;
                    break;
                }
            }
            lam *= 0.5;
        }
        if !accepted {
            return Ok(None);
        }
    }
    Ok(None)
}

/// Multi-seed deflated search for distinct solutions at fixed `rho`.
///
/// Every hit is re-verified by the undeflated residual (a fresh
/// [`newton_solve`] polish) and deduplicated by weighted-L2 distance.
pub fn deflated_search(
    rho: f64,
    seeds: &[SpectralField],
    cfg: &SolverConfig,
) -> Result<Vec<SolveResult>> {
    let mut results: Vec<SolveResult> = Vec::new();
    let mut found: Vec<SpectralField> = Vec::new();
    if let Some(basis) = seeds.first().map(|s| Arc::clone(s.basis())) {
        // the trivial solution anchors the deflation
        let trivial = newton_solve(rho, &SpectralField::zeros(&basis), cfg)?;
        if trivial.converged {
            found.push(trivial.field.clone());
            results.push(trivial);
        }
    }
    for seed in seeds {
        let hit = match deflated_newton(rho, seed, &found, cfg)? {
            Some(u) => u,
            None => continue,
        };
        // undeflated re-verification
        let polished = newton_solve(rho, &hit, cfg)?;
        if !polished.converged {
            continue;
        }
        let distinct = found.iter().all(|f| {
            l2w_distance(seed.basis(), polished.field.coeffs(), f.coeffs()) > cfg.deflation_radius
        });
        if distinct {
            found.push(polished.field.clone());
            results.push(polished);
        }
    }
    Ok(results)
}
