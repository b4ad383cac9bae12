//! Spherical differential operators and energy functionals for axial
//! fields.
//!
//! On axial functions the Laplacian is `(1-x^2)u'' - 4xu'`, acting
//! diagonally as `-lambda_k` on the basis, and the Paneitz operator
//! `P4 = Delta^2 - 2 Delta = [(1-x^2)^2 u']'''` acts as
//! `lambda_k (lambda_k + 2)`. Integrals over the 4-sphere reduce to
//! `(3/4) int_{-1}^{1} (1-x^2) f dx` with the volume normalized to 1.

use serde::Serialize;

use crate::error::Error;
use crate::gegenbauer::{lambda, paneitz_symbol, GegenbauerBasis, SpectralField};
use crate::Result;

/// Guard for `e^{4u}`: beyond this `4u` the exponential is declared overflowed.
pub const EXP_GUARD: f64 = 300.0;

/// Applies the axial Laplacian spectrally: `a_k -> -lambda_k a_k`.
pub fn apply_laplacian(u: &SpectralField) -> SpectralField {
    let coeffs: Vec<f64> = u
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, &a)| -(lambda(k) as f64) * a)
        .collect();
    SpectralField::from_coeffs(u.basis(), &coeffs).expect("same basis")
}

/// Applies the Paneitz operator spectrally: `a_k -> lambda_k(lambda_k+2) a_k`.
pub fn apply_paneitz(u: &SpectralField) -> SpectralField {
    let coeffs: Vec<f64> = u
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, &a)| paneitz_symbol(k) * a)
        .collect();
    SpectralField::from_coeffs(u.basis(), &coeffs).expect("same basis")
}

/// `int_{S^4} f dw = (3/4) int_{-1}^{1} (1-x^2) f dx` from grid values.
pub fn sphere_integral(basis: &GegenbauerBasis, values: &[f64]) -> f64 {
    0.75 * basis.quadrature().integrate_weighted(values)
}

/// Grid values of `e^{4u}`, guarded against overflow.
pub fn exp4_grid(u: &SpectralField) -> Result<Vec<f64>> {
    let mut max4u = f64::NEG_INFINITY;
    let vals: Vec<f64> = u
        .grid_values()
        .iter()
        .map(|&v| {
            max4u = max4u.max(4.0 * v);
            (4.0 * v).exp()
        })
        .collect();
    if max4u > EXP_GUARD {
        return Err(Error::ExponentialOverflow(max4u));
    }
    Ok(vals)
}

/// `gamma = int_{-1}^{1} (1-x^2) e^{4u}`.
pub fn gamma_weighted(u: &SpectralField) -> Result<f64> {
    let e = exp4_grid(u)?;
    Ok(u.basis().quadrature().integrate_weighted(&e))
}

/// The gradient field `G = (1-x^2) u'` together with the scalars that the
/// estimates revolve around.
#[derive(Debug, Clone)]
pub struct GradientField {
    /// `G` as a spectral field.
    pub field: SpectralField,
    /// Coefficient of `F_1 = x` in `G`.
    pub beta: f64,
    /// Coefficient of `F_0`; vanishes on solutions with `alpha != 1`.
    pub a0: f64,
    /// Coefficient of `F_2`.
    pub a2: f64,
    /// `int (1-x^2) e^{4u}`.
    pub gamma: f64,
}

/// Computes `G = (1-x^2) u'` spectrally (derivative recurrence followed
/// by exact coefficient-space multiplication) and extracts `beta`, `a0`,
/// `a2`, `gamma`.
pub fn gradient_field(u: &SpectralField) -> Result<GradientField> {
    let field = u.derivative().times_one_minus_x2();
    let gamma = gamma_weighted(u)?;
    Ok(GradientField {
        beta: field.coeff(1),
        a0: field.coeff(0),
        a2: field.coeff(2),
        gamma,
        field,
    })
}

/// One energy evaluation split into its terms.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyBreakdown {
    /// `(alpha/2) int (1-x^2)|(1-x^2)u''|^2 + 6|(1-x^2)u'|^2`.
    pub quadratic: f64,
    /// `6 int (1-x^2) u`.
    pub linear: f64,
    /// `-2 ln((3/4) int (1-x^2) e^{4u})`.
    pub log_term: f64,
    pub total: f64,
}

/// The axial energy `I_alpha`, evaluated from the one-dimensional display
/// with `u''` obtained by twice-applied spectral differentiation.
pub fn energy_i(u: &SpectralField, alpha: f64) -> Result<EnergyBreakdown> {
    let q = u.basis().quadrature();
    let nodes = q.nodes();
    let du = u.derivative();
    let ddu = du.derivative();
    let integrand: Vec<f64> = (0..nodes.len())
        .map(|j| {
            let s = 1.0 - nodes[j] * nodes[j];
            s * s * s * ddu.grid_values()[j] * ddu.grid_values()[j]
                + 6.0 * s * s * du.grid_values()[j] * du.grid_values()[j]
        })
        .collect();
    let quadratic = 0.5 * alpha * q.integrate_values(&integrand);
    let linear = 6.0 * q.integrate_weighted(u.grid_values());
    let gamma = gamma_weighted(u)?;
    let log_term = -2.0 * (0.75 * gamma).ln();
    Ok(EnergyBreakdown {
        quadratic,
        linear,
        log_term,
        total: quadratic + linear + log_term,
    })
}

/// The S4 energy `J_alpha`, evaluated spectrally.
pub fn energy_j(u: &SpectralField, alpha: f64) -> Result<f64> {
    let mut bilap = 0.0;
    let mut dir = 0.0;
    for (k, &a) in u.coeffs().iter().enumerate() {
        let l = lambda(k) as f64;
        let nk = u.basis().norm(k);
        bilap += l * l * a * a * nk;
        dir += l * a * a * nk;
    }
    // int |Delta u|^2 dw = (3/4) sum lambda^2 a^2 norm, etc.
    let quad = 0.5 * alpha * 0.75 * (bilap + 2.0 * dir);
    let mean = u.mean_s4();
    let gamma = gamma_weighted(u)?;
    Ok(quad + 6.0 * mean - 1.5 * (0.75 * gamma).ln())
}

/// The first momentum functional: for axial fields only the `xi_1` moment
/// of `e^{4u}` survives (the others vanish by symmetry and are not
/// computed).
pub fn energy_script_j(u: &SpectralField, alpha: f64) -> Result<f64> {
    let mut pan = 0.0;
    for (k, &a) in u.coeffs().iter().enumerate() {
        pan += paneitz_symbol(k) * a * a * u.basis().norm(k);
    }
    let quad = 0.5 * alpha * 0.75 * pan; // (alpha/2) int u P4 u dw
    let e = exp4_grid(u)?;
    let mass = sphere_integral(u.basis(), &e);
    let nodes = u.basis().quadrature().nodes();
    let moment_vals: Vec<f64> = e.iter().zip(nodes).map(|(&v, &x)| v * x).collect();
    let moment = sphere_integral(u.basis(), &moment_vals);
    let arg = mass * mass - moment * moment;
    if arg <= 0.0 {
        return Err(Error::NonPositiveLogArgument(arg));
    }
    Ok(quad + 6.0 * u.mean_s4() - 0.75 * arg.ln())
}

/// The semi-norm `|G|^2 = (4/3) int_{S^4} (P4 G) G dw`, spectrally
/// `sum lambda_k (lambda_k + 2) a_k^2 norm_k`.
pub fn seminorm_g(g: &SpectralField) -> f64 {
    g.coeffs()
        .iter()
        .enumerate()
        .map(|(k, &a)| paneitz_symbol(k) * a * a * g.basis().norm(k))
        .sum()
}
