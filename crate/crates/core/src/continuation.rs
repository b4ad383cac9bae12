//! Bifurcation detection on the trivial branch, branch switching, and
//! pseudo-arclength continuation of the nontrivial branches; transcritical
//! slope measurement at `rho_2 = 30` and blowup extrapolation of the
//! lower `F_2` branch.
//!
//! The trivial branch `u = 0` loses stability at
//! `rho_k = lambda_k (lambda_k + 2) / 4 = k(k+1)(k+2)(k+3)/4`; the `k = 2`
//! point at `rho = 30` is transcritical with slope `-20`, and the branch
//! on the `rho < 30` side blows up in sup norm as `rho` approaches 12.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::Error;
use crate::gegenbauer::{paneitz_symbol, GegenbauerBasis, SpectralField};
use crate::operators::{energy_i, gradient_field};
use crate::solver::{jacobian, residual, residual_rho_partial, residual_scale, SolverConfig};
use crate::Result;

/// Exact bifurcation parameter `rho_k = k(k+1)(k+2)(k+3)/4` (an integer).
pub fn rho_exact(k: usize) -> u64 {
    let k = k as u64;
    k * (k + 1) * (k + 2) * (k + 3) / 4
}

/// Local branching type at `(rho_k, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LocalType {
    /// `int (1-x^2) F_k^3 != 0` (even `k`): the branch crosses with
    /// nonzero slope.
    Transcritical,
    /// Odd `k`: the leading slope vanishes; the normal form is not
    /// resolved here.
    PitchforkUndetermined,
}

/// One bifurcation point on the trivial branch.
#[derive(Debug, Clone, Serialize)]
pub struct BifurcationPoint {
    pub k: usize,
    /// Exact integer value of `rho_k`.
    pub rho_exact: u64,
    pub rho: f64,
    pub local_type: LocalType,
    /// `int (1-x^2) F_k^3`, the cubic self-interaction driving the slope.
    pub cubic_moment: f64,
}

/// Bifurcation points for `k = 1..=k_max`, each cross-checked against a
/// vanishing diagonal entry of the trivial-branch Jacobian.
pub fn bifurcation_points(
    basis: &Arc<GegenbauerBasis>,
    k_max: usize,
) -> Result<Vec<BifurcationPoint>> {
    let zero = SpectralField::zeros(basis);
    let mut out = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let rho = rho_exact(k) as f64;
        let jac = jacobian(rho, &zero)?;
        let diag = jac[(k - 1, k - 1)];
        debug_assert!(
            diag.abs() < 1e-8 * paneitz_symbol(k).max(1.0),
            "diagonal entry at (rho_{k}, 0) should vanish, got {diag:e}"
        );
        let fk = basis.node_values(k);
        let cubic: Vec<f64> = fk.iter().map(|&v| v * v * v).collect();
        let cubic_moment = basis.quadrature().integrate_weighted(&cubic);
        let local_type = if cubic_moment.abs() > 1e-10 {
            LocalType::Transcritical
        } else {
            LocalType::PitchforkUndetermined
        };
        out.push(BifurcationPoint {
            k,
            rho_exact: rho_exact(k),
            rho,
            local_type,
            cubic_moment,
        });
    }
    Ok(out)
}

/// Locates the trivial-branch eigenvalue crossings in `(0, rho_max]` by
/// bisecting the jumps of the negative-eigenvalue count of the (weighted
/// symmetric) Jacobian. Localized to `tol`.
pub fn eigenvalue_crossings(
    basis: &Arc<GegenbauerBasis>,
    rho_max: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    let zero = SpectralField::zeros(basis);
    let count = |rho: f64| -> Result<usize> {
        let eigs = jacobian_eigenvalues(rho, &zero)?;
        Ok(eigs.iter().filter(|&&e| e < 0.0).count())
    };
    let mut crossings = Vec::new();
    let mut lo = 1e-6;
    let mut c_lo = count(lo)?;
    let step = 0.5;
    let mut rho = lo + step;
    while rho <= rho_max + step {
        let c_hi = count(rho)?;
        if c_hi != c_lo {
            // bisect each unit jump (jumps are simple for distinct rho_k)
            let mut a = lo;
            let mut b = rho;
            while b - a > tol {
                let mid = 0.5 * (a + b);
                if count(mid)? == c_lo {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            crossings.push(0.5 * (a + b));
            c_lo = c_hi;
        }
        lo = rho;
        rho += step;
    }
    Ok(crossings)
}

/// Eigenvalues of the Jacobian, computed on its weighted symmetrization
/// `D^{1/2} J D^{-1/2}` with `D = diag(norm_k)`.
pub fn jacobian_eigenvalues(rho: f64, u: &SpectralField) -> Result<Vec<f64>> {
    let jac = jacobian(rho, u)?;
    let basis = u.basis();
    let n = basis.max_degree();
    let mut sym = DMatrix::zeros(n, n);
    for k in 1..=n {
        for m in 1..=n {
            let scale = (basis.norm(k) / basis.norm(m)).sqrt();
            sym[(k - 1, m - 1)] = scale * jac[(k - 1, m - 1)];
        }
    }
    // enforce exact symmetry against roundoff
    let symm = (&sym + sym.transpose()) * 0.5;
    let eig = symm.symmetric_eigen();
    Ok(eig.eigenvalues.iter().copied().collect())
}

/// One stored continuation state.
#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub rho: f64,
    pub field: SpectralField,
    pub arclength: f64,
    pub sup_norm: f64,
    pub l2_norm: f64,
    pub beta: f64,
    pub energy: f64,
    /// Smallest-magnitude eigenvalue of the Jacobian at the point.
    pub min_eig: f64,
    pub residual_norm: f64,
}

/// Why a trace stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Termination {
    LeftWindow,
    SupNormCap,
    ReturnedToTrivial,
    StepUnderflow,
    /// The top spectral coefficients grew past the tail cap: the basis
    /// no longer resolves the solution and further points would be
    /// discretization junk.
    ResolutionExhausted,
    MaxSteps,
}

/// An ordered branch of continuation points.
#[derive(Debug, Clone)]
pub struct Branch {
    pub points: Vec<BranchPoint>,
    pub termination: Termination,
}

/// Continuation parameters.
#[derive(Debug, Clone)]
pub struct ContinuationConfig {
    /// Initial arclength step in the weighted `(u, rho)` metric.
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    /// Corrector residual tolerance (inflated near blowup by the f64
    /// noise floor of the residual evaluation).
    pub corrector_tol: f64,
    pub corrector_max_iter: usize,
    /// Corrector iteration band for step adaptation: halve above, grow
    /// below.
    pub target_iters: (usize, usize),
    /// Stop when the sup norm passes this (blowup is extrapolated, not
    /// computed).
    pub sup_cap: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub max_steps: usize,
    /// Points with weighted-L2 norm below this are "the trivial branch".
    pub trivial_threshold: f64,
    /// Branch-switch offset `epsilon`.
    pub switch_epsilon: f64,
    /// Stop when the top three spectral coefficients exceed this (the
    /// truncation stops resolving the solution).
    pub tail_cap: f64,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        Self {
            initial_step: 1e-2,
            max_step: 0.25,
            min_step: 1e-9,
            corrector_tol: 1e-10,
            corrector_max_iter: 16,
            target_iters: (3, 5),
            sup_cap: 12.0,
            rho_min: 12.05,
            rho_max: 400.0,
            max_steps: 4000,
            trivial_threshold: 1e-7,
            switch_epsilon: 1e-3,
            tail_cap: 5e-5,
        }
    }
}

fn make_point(
    rho: f64,
    field: &SpectralField,
    arclength: f64,
    residual_norm: f64,
) -> Result<BranchPoint> {
    let g = gradient_field(field)?;
    let alpha = 6.0 / rho;
    let energy = energy_i(field, alpha).map(|e| e.total).unwrap_or(f64::NAN);
    let eigs = jacobian_eigenvalues(rho, field)?;
    let min_eig = eigs
        .iter()
        .copied()
        .min_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
        .unwrap_or(f64::NAN);
    Ok(BranchPoint {
        rho,
        field: field.clone(),
        arclength,
        sup_norm: field.sup_norm(),
        l2_norm: field.l2_weighted(),
        beta: g.beta,
        energy,
        min_eig,
        residual_norm,
    })
}

/// Newton-corrected point near `(rho_k, sign * eps * F_k)`, with the
/// correction constrained to keep the `F_k` coefficient pinned at
/// `sign * eps` (so it is orthogonal to `F_k`).
pub fn branch_switch(
    basis: &Arc<GegenbauerBasis>,
    k: usize,
    sign: f64,
    eps: f64,
    scfg: &SolverConfig,
) -> Result<BranchPoint> {
    let n = basis.max_degree();
    let target = sign.signum() * eps;
    let mut u = SpectralField::basis_element(basis, k, target)?;
    let mut rho = rho_exact(k) as f64;
    for _ in 0..60 {
        let r = residual(rho, &u)?;
        let rs = r.sup_norm();
        let c = u.coeff(k) - target;
        if rs <= scfg.tolerance.max(1e-12) && c.abs() < 1e-14 {
            return make_point(rho, &u, 0.0, rs);
        }
        let jac = jacobian(rho, &u)?;
        let drho = residual_rho_partial(&u)?;
        let mut bordered = DMatrix::zeros(n + 1, n + 1);
        bordered.view_mut((0, 0), (n, n)).copy_from(&jac);
        bordered.view_mut((0, n), (n, 1)).copy_from(&drho);
        bordered[(n, k - 1)] = 1.0;
        let mut rhs = DVector::zeros(n + 1);
        for i in 0..n {
            rhs[i] = -r.coeff(i + 1);
        }
        rhs[n] = -c;
        let delta = bordered
            .lu()
            .solve(&rhs)
            .ok_or(Error::SingularJacobian(0.0))?;
        let mut coeffs = u.coeffs().to_vec();
        for i in 0..n {
            coeffs[i + 1] += delta[i];
        }
        rho += delta[n];
        u = SpectralField::from_coeffs(basis, &coeffs)?;
    }
    Err(Error::NoConvergence {
        residual: residual(rho, &u)?.sup_norm(),
        iterations: 60,
    })
}

struct WeightedMetric<'a> {
    basis: &'a GegenbauerBasis,
}

impl WeightedMetric<'_> {
    /// Inner product on `(a_1..a_N, rho)` with the u-part weighted by the
    /// `L2(1-x^2)` norm.
    fn dot(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        let n = a.len() - 1;
        let mut s = a[n] * b[n];
        for i in 0..n {
            s += self.basis.norm(i + 1) * a[i] * b[i];
        }
        s
    }

    fn norm(&self, a: &DVector<f64>) -> f64 {
        self.dot(a, a).sqrt()
    }
}

fn pack(field: &SpectralField, rho: f64) -> DVector<f64> {
    let n = field.basis().max_degree();
    let mut y = DVector::zeros(n + 1);
    for i in 0..n {
        y[i] = field.coeff(i + 1);
    }
    y[n] = rho;
    y
}

fn unpack(basis: &Arc<GegenbauerBasis>, y: &DVector<f64>) -> Result<(SpectralField, f64)> {
    let n = basis.max_degree();
    let mut coeffs = vec![0.0; n + 1];
    for i in 0..n {
        coeffs[i + 1] = y[i];
    }
    Ok((SpectralField::from_coeffs(basis, &coeffs)?, y[n]))
}

/// Arclength corrector: Newton on the residual plus the hyperplane
/// constraint `<y - y_pred, t>_W = 0`. Returns the corrected point, its
/// residual sup-norm and the iteration count.
fn correct(
    basis: &Arc<GegenbauerBasis>,
    y_pred: &DVector<f64>,
    tangent: &DVector<f64>,
    cfg: &ContinuationConfig,
) -> Result<Option<(SpectralField, f64, f64, usize)>> {
    let metric = WeightedMetric { basis };
    let n = basis.max_degree();
    let (mut u, mut rho) = unpack(basis, y_pred)?;
    for it in 0..cfg.corrector_max_iter {
        let r = match residual(rho, &u) {
            Ok(r) => r,
            Err(Error::ExponentialOverflow(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let rs = r.sup_norm();
        // f64 noise floor of the residual evaluation grows with e^{4u}
        let floor = 64.0 * f64::EPSILON * residual_scale(rho, &u)?;
        let tol = cfg.corrector_tol.max(floor);
        if rs <= tol {
            return Ok(Some((u, rho, rs, it)));
        }
        let jac = jacobian(rho, &u)?;
        let drho = residual_rho_partial(&u)?;
        let mut bordered = DMatrix::zeros(n + 1, n + 1);
        bordered.view_mut((0, 0), (n, n)).copy_from(&jac);
        bordered.view_mut((0, n), (n, 1)).copy_from(&drho);
        for i in 0..n {
            bordered[(n, i)] = basis.norm(i + 1) * tangent[i];
        }
        bordered[(n, n)] = tangent[n];
        let y = pack(&u, rho);
        let c = metric.dot(&(&y - y_pred), tangent);
        let mut rhs = DVector::zeros(n + 1);
        for i in 0..n {
            rhs[i] = -r.coeff(i + 1);
        }
        rhs[n] = -c;
        let delta = match bordered.lu().solve(&rhs) {
            Some(d) => d,
            None => return Ok(None),
        };
        let y_new = y + delta;
        let (u2, rho2) = unpack(basis, &y_new)?;
        u = u2;
        rho = rho2;
        if u.sup_norm() > 40.0 {
            return Ok(None);
        }
    }
    Ok(None)
}

/// Pseudo-arclength predictor-corrector trace from two consecutive branch
/// points. Secant predictor, Newton corrector, adaptive step.
pub fn trace_branch(
    first: &BranchPoint,
    second: &BranchPoint,
    cfg: &ContinuationConfig,
) -> Result<Branch> {
    let basis = Arc::clone(first.field.basis());
    let metric_basis = Arc::clone(&basis);
    let metric = WeightedMetric {
        basis: &metric_basis,
    };
    let mut y_prev = pack(&first.field, first.rho);
    let mut y_cur = pack(&second.field, second.rho);
    let mut arclength = second.arclength;
    let mut points = vec![first.clone(), second.clone()];
    let mut h = cfg.initial_step;
    let mut termination = Termination::MaxSteps;
    for _ in 0..cfg.max_steps {
        let mut t = &y_cur - &y_prev;
        let tn = metric.norm(&t);
        if tn == 0.0 {
            termination = Termination::StepUnderflow;
            break;
        }
        t /= tn;
        let y_pred = &y_cur + &t * h;
        match correct(&basis, &y_pred, &t, cfg)? {
            Some((u, rho, rs, its)) => {
                if u.tail_max(3) > cfg.tail_cap {
                    termination = Termination::ResolutionExhausted;
                    break;
                }
                arclength += metric.norm(&(pack(&u, rho) - &y_cur));
                y_prev = y_cur;
                y_cur = pack(&u, rho);
                let point = make_point(rho, &u, arclength, rs)?;
                let l2 = point.l2_norm;
                let sup = point.sup_norm;
                points.push(point);
                if its <= cfg.target_iters.0 {
                    h = (h * 1.5).min(cfg.max_step);
                } else if its > cfg.target_iters.1 {
                    h = (h * 0.5).max(cfg.min_step);
                }
                if rho < cfg.rho_min || rho > cfg.rho_max {
                    termination = Termination::LeftWindow;
                    break;
                }
                if sup > cfg.sup_cap {
                    termination = Termination::SupNormCap;
                    break;
                }
                if l2 < cfg.trivial_threshold {
                    termination = Termination::ReturnedToTrivial;
                    break;
                }
            }
            None => {
                h *= 0.5;
                if h < cfg.min_step {
                    termination = Termination::StepUnderflow;
                    break;
                }
            }
        }
    }
    Ok(Branch {
        points,
        termination,
    })
}

/// Switches onto the `(k, sign)` branch and traces it.
pub fn trace_from_switch(
    basis: &Arc<GegenbauerBasis>,
    k: usize,
    sign: f64,
    cfg: &ContinuationConfig,
    scfg: &SolverConfig,
) -> Result<Branch> {
    let p1 = branch_switch(basis, k, sign, cfg.switch_epsilon, scfg)?;
    let mut p2 = branch_switch(basis, k, sign, 2.0 * cfg.switch_epsilon, scfg)?;
    p2.arclength = {
        let metric = WeightedMetric { basis };
        metric.norm(&(pack(&p2.field, p2.rho) - pack(&p1.field, p1.rho)))
    };
    trace_branch(&p1, &p2, cfg)
}

/// Least-squares slope `d rho / d eps` at `eps = 0`, where `eps` is the
/// signed `F_k` coefficient. Fits `rho = c0 + c1 eps + c2 eps^2` over
/// points whose `|eps|` lies in the window; needs at least 5.
pub fn transcritical_slope(branch: &Branch, k: usize, window: (f64, f64)) -> Result<f64> {
    let pts: Vec<(f64, f64)> = branch
        .points
        .iter()
        .filter(|p| {
            let e = p.field.coeff(k).abs();
            e >= window.0 && e <= window.1
        })
        .map(|p| (p.field.coeff(k), p.rho))
        .collect();
    if pts.len() < 5 {
        return Err(Error::InvalidInput(format!(
            "need at least 5 branch points with |eps| in [{}, {}], have {}",
            window.0,
            window.1,
            pts.len()
        )));
    }
    let m = pts.len();
    let mut a = DMatrix::zeros(m, 3);
    let mut b = DVector::zeros(m);
    for (i, &(e, rho)) in pts.iter().enumerate() {
        a[(i, 0)] = 1.0;
        a[(i, 1)] = e;
        a[(i, 2)] = e * e;
        b[i] = rho;
    }
    let sol = (a.transpose() * &a)
        .lu()
        .solve(&(a.transpose() * b))
        .ok_or(Error::SingularJacobian(0.0))?;
    Ok(sol[1])
}

/// Measures `d rho / d eps` by switching onto the branch at a ladder of
/// `eps` values (all within the fit window).
pub fn slope_by_switching(
    basis: &Arc<GegenbauerBasis>,
    k: usize,
    sign: f64,
    eps_values: &[f64],
    scfg: &SolverConfig,
) -> Result<f64> {
    let mut points = Vec::new();
    for &eps in eps_values {
        let p = branch_switch(basis, k, sign, eps, scfg)?;
        points.push(p);
    }
    let branch = Branch {
        points,
        termination: Termination::MaxSteps,
    };
    transcritical_slope(&branch, k, (0.0, f64::INFINITY))
}

/// Blowup extrapolation report for one branch.
#[derive(Debug, Clone, Serialize)]
pub struct BlowupReport {
    /// `(rho, sup_norm)` samples used by the fit.
    pub table: Vec<(f64, f64)>,
    /// Extrapolated blowup parameter, if a blowup trend was detected.
    pub rho_star: Option<f64>,
    /// Fitted decay rate in `rho - rho_star ~ exp(slope * sup)`.
    pub slope: f64,
    /// Whether `max (1-x^2) e^{4u} / gamma` grows monotonically along the
    /// samples (mass concentration).
    pub concentration_monotone: bool,
}

/// Fits `ln(rho - rho_star) = a + slope * sup` over the branch tail
/// (points with `sup >= min_sup`), scanning `rho_star` for the best fit.
///
/// For the lower `k = 2` branch the expected blowup parameter is
/// `rho = 12`, i.e. `6/alpha` at `alpha = 1/2` (statements of the limit
/// in terms of `rho` and of `alpha` differ by exactly that conversion).
///
/// Returns `rho_star = None` when the branch shows no blowup trend (fewer
/// than `4` tail points or non-decreasing `rho`).
pub fn blowup_monitor(branch: &Branch, min_sup: f64) -> Result<BlowupReport> {
    let mut table: Vec<(f64, f64)> = branch
        .points
        .iter()
        .filter(|p| p.sup_norm >= min_sup)
        .map(|p| (p.rho, p.sup_norm))
        .collect();
    table.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut concentration = Vec::new();
    for p in branch.points.iter().filter(|p| p.sup_norm >= min_sup) {
        let g = gradient_field(&p.field)?;
        let nodes = p.field.basis().quadrature().nodes();
        let peak = p
            .field
            .grid_values()
            .iter()
            .zip(nodes)
            .map(|(&u, &x)| (1.0 - x * x) * (4.0 * u).exp() / g.gamma)
            .fold(0.0f64, f64::max);
        concentration.push((p.arclength, peak));
    }
    concentration.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let concentration_monotone = concentration.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12);
    if table.len() < 4 || table.first().map(|f| f.0) <= table.last().map(|l| l.0) {
        return Ok(BlowupReport {
            table,
            rho_star: None,
            slope: 0.0,
            concentration_monotone,
        });
    }
    let rho_min = table.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let mut best: Option<(f64, f64, f64)> = None; // (sse, rho_star, slope)
    let lo = rho_min - 3.0;
    let hi = rho_min - 1e-4;
    let steps = 3000;
    for i in 0..=steps {
        let rs = lo + (hi - lo) * i as f64 / steps as f64;
        let (sse, slope) = linfit_sse(&table, rs);
        if best.map_or(true, |b| sse < b.0) {
            best = Some((sse, rs, slope));
        }
    }
    let (_, rho_star, slope) = best.unwrap();
    Ok(BlowupReport {
        table,
        rho_star: Some(rho_star),
        slope,
        concentration_monotone,
    })
}

fn linfit_sse(table: &[(f64, f64)], rho_star: f64) -> (f64, f64) {
    let n = table.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(rho, sup) in table {
        let y = (rho - rho_star).ln();
        sx += sup;
        sy += y;
        sxx += sup * sup;
        sxy += sup * y;
    }
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return (f64::INFINITY, 0.0);
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mut sse = 0.0;
    for &(rho, sup) in table {
        let y = (rho - rho_star).ln();
        let r = y - (intercept + slope * sup);
        sse += r * r;
    }
    (sse, slope)
}

/// Branch CSV: `rho,alpha,s,sup_norm,l2_norm,beta,energy,min_eig`.
pub fn branch_to_csv(branch: &Branch) -> String {
    let mut out = String::from("rho,alpha,s,sup_norm,l2_norm,beta,energy,min_eig\n");
    for p in &branch.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            p.rho,
            6.0 / p.rho,
            p.arclength,
            p.sup_norm,
            p.l2_norm,
            p.beta,
            p.energy,
            p.min_eig
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis64() -> Arc<GegenbauerBasis> {
        GegenbauerBasis::shared(64, 256).unwrap()
    }

    #[test]
    fn bifurcation_points_pins() {
        assert_eq!(rho_exact(1), 6);
        assert_eq!(rho_exact(2), 30);
        assert_eq!(rho_exact(3), 90);
        assert_eq!(rho_exact(4), 210);
        let basis = basis64();
        let pts = bifurcation_points(&basis, 10).unwrap();
        assert_eq!(pts[1].local_type, LocalType::Transcritical);
        assert_eq!(pts[2].local_type, LocalType::PitchforkUndetermined);
        // int (1-x^2) F_2^3 = 2/63
        assert!((pts[1].cubic_moment - 2.0 / 63.0).abs() < 1e-13);
        // whether even k >= 4 is transcritical is a numerical report:
        // the cubic self-interaction is nonzero for every even k <= 10
        // and vanishes for odd k
        for p in &pts {
            if p.k % 2 == 0 {
                assert!(p.cubic_moment.abs() > 1e-10, "k = {}", p.k);
                assert_eq!(p.local_type, LocalType::Transcritical);
            } else if p.k > 1 {
                assert!(p.cubic_moment.abs() < 1e-12, "k = {}", p.k);
                assert_eq!(p.local_type, LocalType::PitchforkUndetermined);
            }
        }
    }

    #[test]
    fn crossings_match_exact_rho() {
        let basis = GegenbauerBasis::shared(24, 96).unwrap();
        let crossings = eigenvalue_crossings(&basis, 760.0, 1e-7).unwrap();
        // rho_k for k = 1..6: 6, 30, 90, 210, 420, 756
        let expected = [6.0, 30.0, 90.0, 210.0, 420.0, 756.0];
        assert!(crossings.len() >= 6, "found {crossings:?}");
        for (got, want) in crossings.iter().zip(expected) {
            assert!((got - want).abs() < 1e-6, "crossing {got} vs exact {want}");
        }
    }

    #[test]
    fn traced_points_reverify_at_1e10() {
        let basis = basis64();
        let scfg = SolverConfig::default();
        let cfg = ContinuationConfig {
            rho_min: 24.0,
            ..Default::default()
        };
        let branch = trace_from_switch(&basis, 2, 1.0, &cfg, &scfg).unwrap();
        assert!(branch.points.len() > 10);
        for p in &branch.points {
            let rs = crate::solver::residual_sup(p.rho, &p.field).unwrap();
            assert!(
                rs <= 1e-10,
                "stored point at rho {} has residual {rs:e}",
                p.rho
            );
        }
    }

    #[test]
    fn branch_switch_sides() {
        let basis = basis64();
        let scfg = SolverConfig::default();
        // transcritical at k = 2: eps > 0 goes below rho = 30, eps < 0 above
        let plus = branch_switch(&basis, 2, 1.0, 1e-3, &scfg).unwrap();
        assert!(plus.rho < 30.0, "rho = {}", plus.rho);
        let minus = branch_switch(&basis, 2, -1.0, 1e-3, &scfg).unwrap();
        assert!(minus.rho > 30.0, "rho = {}", minus.rho);
        // odd k: the two sides are reflections x -> -x (a_j -> (-1)^j a_j)
        let p3 = branch_switch(&basis, 3, 1.0, 1e-3, &scfg).unwrap();
        let m3 = branch_switch(&basis, 3, -1.0, 1e-3, &scfg).unwrap();
        assert!((p3.rho - m3.rho).abs() < 1e-8);
        for k in 0..=basis.max_degree() {
            let refl = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert!(
                (p3.field.coeff(k) - refl * m3.field.coeff(k)).abs() < 1e-9,
                "reflection symmetry fails at coeff {k}"
            );
        }
    }

    #[test]
    fn slope_at_k2_is_minus_twenty() {
        let basis = basis64();
        let scfg = SolverConfig::default();
        let eps: Vec<f64> = vec![1e-4, 3e-4, 1e-3, 3e-3, 6e-3, 1e-2];
        let slope = slope_by_switching(&basis, 2, 1.0, &eps, &scfg).unwrap();
        assert!(
            (slope + 20.0).abs() < 0.4,
            "transcritical slope {slope} (want -20 within 2%)"
        );
        // analytic route: -60 * (2/63) / (2/21) = -20
        let analytic: f64 = -60.0 * (2.0 / 63.0) / (2.0 / 21.0);
        assert!((analytic + 20.0).abs() < 1e-10);
        // odd k: slope vanishes
        let slope3 = slope_by_switching(&basis, 3, 1.0, &eps, &scfg).unwrap();
        assert!(slope3.abs() < 0.5, "k=3 slope {slope3}");
    }

    #[test]
    fn k1_branch_keeps_beckner_energy_zero() {
        let basis = basis64();
        let scfg = SolverConfig::default();
        let cfg = ContinuationConfig {
            max_steps: 60,
            rho_min: 5.0,
            rho_max: 7.0,
            sup_cap: 2.0,
            ..Default::default()
        };
        let branch = trace_from_switch(&basis, 1, 1.0, &cfg, &scfg).unwrap();
        assert!(branch.points.len() > 10);
        for p in &branch.points {
            assert!((p.rho - 6.0).abs() < 1e-6, "family stays at rho = 6");
            assert!(
                p.energy.abs() < 1e-8,
                "I_1 = {:e} along the family",
                p.energy
            );
        }
    }
}
