//! Acceptance suite: one test per criterion, each printing a single
//! pass/fail line (run with `--nocapture` to see them).
//!
//! Criterion 7 is split in two: the certificate chain itself (every
//! inequality the conclusion needs, checked with the engine's own exact
//! arithmetic) and a strict reproduction check of three quoted reference
//! constants. The latter is expected to stay red: exact arithmetic shows
//! those three constants are misprints (the engine's values are printed
//! alongside), while every direction and every conclusion they feed is
//! reproduced. See the thresholds module tests for the frozen values.

use std::sync::Arc;
use std::time::Instant;

use qcurve_core::continuation::{
    blowup_monitor, eigenvalue_crossings, slope_by_switching, trace_from_switch,
    ContinuationConfig, Termination,
};
use qcurve_core::family::{bubble, bubble_residual_sup};
use qcurve_core::gegenbauer::{GegenbauerBasis, SpectralField};
use qcurve_core::identities::{
    axial_first_moment, conformal_normalize, conformal_pull, script_j_invariance_defect,
    verify_suite, Tolerances,
};
use qcurve_core::operators::energy_i;
use qcurve_core::sampling::{random_smooth_field, sample_positivity, Functional};
use qcurve_core::solver::{deflated_search, newton_solve, SolverConfig};
use qcurve_core::thresholds;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn basis64() -> Arc<GegenbauerBasis> {
    GegenbauerBasis::shared(64, 256).unwrap()
}

fn report(criterion: &str, started: Instant, budget_s: f64, detail: &str) {
    let elapsed = started.elapsed().as_secs_f64();
    println!("{criterion}: PASS ({elapsed:.2} s, budget {budget_s} s) — {detail}");
    assert!(
        elapsed < budget_s,
        "{criterion} exceeded its runtime budget: {elapsed:.2} s > {budget_s} s"
    );
}

#[test]
fn criterion_1_exact_family_residual() {
    let t0 = Instant::now();
    let basis = basis64();
    let mut worst_res = 0.0f64;
    let mut worst_energy = 0.0f64;
    for &a in &[0.1, 0.3, 0.5, 0.7, 0.9] {
        let res = bubble_residual_sup(&basis, a, 1.0).unwrap();
        assert!(res <= 1e-8, "a = {a}: equation residual {res:e}");
        let u = bubble(&basis, a).unwrap();
        let e = energy_i(&u, 1.0).unwrap().total;
        assert!(e.abs() <= 1e-8, "a = {a}: I_1 = {e:e}");
        worst_res = worst_res.max(res);
        worst_energy = worst_energy.max(e.abs());
    }
    report(
        "criterion 1 (exact-family residual)",
        t0,
        1.0,
        &format!("worst residual {worst_res:.2e}, worst |I_1| {worst_energy:.2e}"),
    );
}

#[test]
fn criterion_2_bifurcation_points() {
    let t0 = Instant::now();
    let basis = GegenbauerBasis::shared(24, 96).unwrap();
    let crossings = eigenvalue_crossings(&basis, 211.0, 1e-7).unwrap();
    // k(k+1)(k+2)(k+3)/4 for k = 1..4
    let exact = [6.0, 30.0, 90.0, 210.0];
    for (k, &want) in (1..=4).zip(exact.iter()) {
        assert_eq!(qcurve_core::continuation::rho_exact(k) as f64, want);
    }
    assert!(crossings.len() >= exact.len(), "found only {crossings:?}");
    let mut worst = 0.0f64;
    for (got, want) in crossings.iter().zip(exact) {
        assert!(
            (got - want).abs() <= 1e-6,
            "crossing at {got} vs exact {want}"
        );
        worst = worst.max((got - want).abs());
    }
    report(
        "criterion 2 (bifurcation points)",
        t0,
        1.0,
        &format!("crossings at 6, 30, 90, 210 located to {worst:.2e}"),
    );
}

#[test]
fn criterion_3_transcritical_slope() {
    let t0 = Instant::now();
    let basis = basis64();
    let scfg = SolverConfig::default();
    let eps: Vec<f64> = vec![1e-4, 3e-4, 1e-3, 3e-3, 6e-3, 1e-2];
    let slope = slope_by_switching(&basis, 2, 1.0, &eps, &scfg).unwrap();
    assert!(
        (slope + 20.0).abs() <= 0.02 * 20.0,
        "fitted slope {slope} not within 2% of -20"
    );
    // quadrature identity: -60 int (1-x^2) F_2^3 / int (1-x^2) F_2^2 = -20
    let q = basis.quadrature();
    let f2 = basis.node_values(2);
    let cubic: Vec<f64> = f2.iter().map(|&v| v * v * v).collect();
    let square: Vec<f64> = f2.iter().map(|&v| v * v).collect();
    let ratio = -60.0 * q.integrate_weighted(&cubic) / q.integrate_weighted(&square);
    assert!(
        (ratio + 20.0).abs() <= 1e-10,
        "quadrature identity gives {ratio}"
    );
    report(
        "criterion 3 (transcritical slope)",
        t0,
        30.0,
        &format!("fit {slope:.4}, quadrature identity {ratio:.12}"),
    );
}

/// Traces the lower k = 2 branch once; criteria 4 and 5 share it.
fn traced_lower_branch(basis: &Arc<GegenbauerBasis>) -> qcurve_core::continuation::Branch {
    let scfg = SolverConfig::default();
    let ccfg = ContinuationConfig {
        rho_min: 12.05,
        ..Default::default()
    };
    trace_from_switch(basis, 2, 1.0, &ccfg, &scfg).unwrap()
}

fn polished_samples(
    branch: &qcurve_core::continuation::Branch,
    targets: &[f64],
) -> Vec<qcurve_core::solver::SolveResult> {
    let cfg = SolverConfig {
        tolerance: 1e-10,
        ..Default::default()
    };
    targets
        .iter()
        .map(|&rho| {
            let nearest = branch
                .points
                .iter()
                .min_by(|a, b| {
                    (a.rho - rho)
                        .abs()
                        .partial_cmp(&(b.rho - rho).abs())
                        .unwrap()
                })
                .expect("branch has points");
            let r = newton_solve(rho, &nearest.field, &cfg).unwrap();
            assert!(
                r.converged && r.sup_norm > 1e-3,
                "no nonconstant solution at rho = {rho} (residual {:e}, sup {:e})",
                r.residual_norm,
                r.sup_norm
            );
            r
        })
        .collect()
}

#[test]
fn criterion_4_lower_branch_and_blowup() {
    let t0 = Instant::now();
    let basis = basis64();
    let branch = traced_lower_branch(&basis);
    assert!(matches!(
        branch.termination,
        Termination::ResolutionExhausted | Termination::LeftWindow | Termination::SupNormCap
    ));
    let samples = polished_samples(&branch, &[29.0, 25.0, 20.0, 15.0, 13.0]);
    for s in &samples {
        assert!(s.residual_norm <= 1e-10);
    }
    // sup norm strictly increasing as rho decreases below 15
    let mut below15: Vec<(f64, f64)> = branch
        .points
        .iter()
        .filter(|p| p.rho <= 15.0)
        .map(|p| (p.rho, p.sup_norm))
        .collect();
    below15.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    assert!(below15.len() >= 5, "too few points below rho = 15");
    for w in below15.windows(2) {
        assert!(
            w[1].1 > w[0].1,
            "sup norm not increasing: {:?} -> {:?}",
            w[0],
            w[1]
        );
    }
    let monitor = blowup_monitor(&branch, 2.0).unwrap();
    let rho_star = monitor.rho_star.expect("blowup trend detected");
    assert!(
        (rho_star - 12.0).abs() <= 0.3,
        "extrapolated blowup at {rho_star}"
    );
    report(
        "criterion 4 (lower branch B2-)",
        t0,
        300.0,
        &format!(
            "samples at rho 29/25/20/15/13 (sup {:.3}..{:.3}), blowup rho* = {rho_star:.4}",
            samples[0].sup_norm, samples[4].sup_norm
        ),
    );
}

#[test]
fn criterion_5_identity_suite_on_branch() {
    let t0 = Instant::now();
    let basis = basis64();
    let branch = traced_lower_branch(&basis);
    let samples = polished_samples(&branch, &[29.0, 25.0, 20.0, 15.0, 13.0]);
    let tols = Tolerances::default();
    let mut worst64 = 0.0f64;
    for s in &samples {
        // cross-module window: solutions carry 0 < beta < 1/alpha; the
        // h(alpha) lower bound applies only above alpha = 1/2, where this
        // branch never goes, so it is reported informationally
        assert!(
            s.beta > 0.0 && s.beta < 1.0 / s.alpha,
            "rho = {}: beta = {} outside (0, 1/alpha)",
            s.rho,
            s.beta
        );
        for r in verify_suite(&s.field, s.alpha, tols).unwrap() {
            assert!(
                r.pass || !r.applicable,
                "rho = {}: {} failed (left {:.6e}, right {:.6e}, rel {:.2e})",
                s.rho,
                r.name,
                r.left,
                r.right,
                r.rel_error
            );
            if r.applicable {
                worst64 = worst64.max(r.rel_error.min(r.abs_error));
            }
        }
    }
    // guard against discretization artifacts: re-run one solution at
    // N = 96 and require the errors not to grow beyond the f64 floor
    let basis96 = GegenbauerBasis::shared(96, 384).unwrap();
    let coarse = &samples[2]; // rho = 20
    let regrid = SpectralField::from_fn(&basis96, |x| coarse.field.eval(x));
    let cfg96 = SolverConfig {
        tolerance: 1e-10,
        ..Default::default()
    };
    let fine = newton_solve(20.0, &regrid, &cfg96).unwrap();
    assert!(fine.converged && fine.sup_norm > 1e-3);
    let mut worst96 = 0.0f64;
    for r in verify_suite(&fine.field, fine.alpha, tols).unwrap() {
        assert!(r.pass || !r.applicable, "{} failed at N = 96", r.name);
        if r.applicable {
            worst96 = worst96.max(r.rel_error.min(r.abs_error));
        }
    }
    assert!(
        worst96 <= worst64.max(1e-12),
        "identity errors grew under refinement: {worst64:.2e} -> {worst96:.2e}"
    );
    report(
        "criterion 5 (identity suite)",
        t0,
        60.0,
        &format!("worst error {worst64:.2e} at N = 64, {worst96:.2e} at N = 96"),
    );
}

#[test]
fn criterion_6_uniqueness_evidence() {
    let t0 = Instant::now();
    let basis = basis64();
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut seeds = Vec::new();
    for k in 1..=4usize {
        for sign in [1.0f64, -1.0] {
            for eps in [0.05, 0.2] {
                seeds.push(SpectralField::basis_element(&basis, k, sign * eps).unwrap());
            }
        }
    }
    while seeds.len() < 50 {
        let mut coeffs = vec![0.0; 9];
        for c in coeffs.iter_mut().skip(1) {
            *c = rng.gen_range(-0.15..0.15);
        }
        seeds.push(SpectralField::from_coeffs(&basis, &coeffs).unwrap());
    }
    for alpha in [0.52, 0.6, 0.75, 0.9] {
        let found = deflated_search(6.0 / alpha, &seeds, &cfg).unwrap();
        let nonconstant = found.iter().filter(|r| r.sup_norm > 1e-6).count();
        assert_eq!(
            nonconstant, 0,
            "alpha = {alpha}: found a nonconstant solution"
        );
    }
    let found = deflated_search(20.0, &seeds, &cfg).unwrap();
    let nonconstant = found.iter().filter(|r| r.sup_norm > 1e-3).count();
    assert!(
        nonconstant >= 1,
        "alpha = 0.3: no nonconstant solution found"
    );
    report(
        "criterion 6 (uniqueness evidence)",
        t0,
        600.0,
        &format!(
            "constants only at alpha 0.52/0.6/0.75/0.9; {nonconstant} nonconstant at alpha 0.3"
        ),
    );
}

#[test]
fn criterion_7_threshold_certificate() {
    let t0 = Instant::now();
    let a3 = thresholds::alpha_n(3).unwrap();
    let a5 = thresholds::alpha_n(5).unwrap();
    assert_eq!((a3.p, a3.q, a3.r), (139, 17281, 510));
    assert_eq!((a5.p, a5.q, a5.r), (473, 209329, 1800));
    assert!((a3.to_f64() - (139.0 + 17281.0f64.sqrt()) / 510.0).abs() <= 1e-12);
    assert!((a5.to_f64() - (473.0 + 209329.0f64.sqrt()) / 1800.0).abs() <= 1e-12);

    let g3 = thresholds::gamma_n(3).unwrap();
    assert!(g3.hi < 0.186, "gamma_3 = {g3}");
    let g5 = thresholds::gamma_n(5).unwrap();
    assert!(g5.hi <= 0.2994, "gamma_5 = {g5}");
    let w5 = thresholds::omega_n(5).unwrap();
    assert!(w5.hi < 0.0, "omega_5 = {w5} should be negative");

    let cert = thresholds::full_certificate().unwrap();
    assert!(cert.all_passed, "a chain-required inequality failed");
    assert_eq!(cert.excluded_alpha, Some((0.5145, 1.0)));
    let margin = |tag: &str| {
        cert.steps
            .iter()
            .find(|s| s.name.contains(tag))
            .unwrap()
            .value_f64
    };
    let m3 = margin("margin (n = 3)");
    let m4 = margin("margin (n = 4)");
    assert!(m3 > 0.0, "n = 3 exclusion margin {m3}");
    assert!(m4 >= 489.5, "n = 4 exclusion margin {m4}");
    assert!(thresholds::replay(&cert).unwrap(), "replay mismatch");
    report(
        "criterion 7 (threshold certificate)",
        t0,
        1.0,
        &format!(
            "alpha_3/alpha_5 exact; gamma_3 < 0.186, gamma_5 <= 0.2994; margins {m3:.1}/{m4:.1} > 0; chain ends at alpha < 0.5145"
        ),
    );
}

/// Strict reproduction of three quoted constants. Exact arithmetic shows
/// all three are misprints (directions hold, magnitudes do not), so this
/// stays red by design; the assertion message carries the engine values.
#[test]
fn criterion_7_reference_constants_strict() {
    let t0 = Instant::now();
    let g4 = thresholds::gamma_n(4).unwrap();
    let cert = thresholds::full_certificate().unwrap();
    let m3 = cert
        .steps
        .iter()
        .find(|s| s.name.contains("margin (n = 3)"))
        .unwrap()
        .value_f64;
    let w5 = thresholds::omega_n(5).unwrap();
    println!(
        "criterion 7 (strict reference constants): gamma_4 = {:.7} (quoted < 0.249), \
         n=3 margin = {m3:.1} (quoted >= 589.5), omega_5 = {:.1} (quoted -632 within 5%)",
        g4.hi,
        w5.mid()
    );
    let _ = t0;
    assert!(
        g4.hi < 0.249,
        "gamma_4 = {:.7}: the quoted bound 0.249 is a rounding misprint (true value 0.2492360)",
        g4.hi
    );
    assert!(
        m3 >= 589.5,
        "n = 3 exclusion margin = {m3:.2}: the quoted 589.5 rests on evaluating \
         3.51/(lambda_5 h(alpha_4)) = 0.0639 as 0.0064; the correct margin is ~493 (still positive)"
    );
    assert!(
        (w5.mid() + 632.0).abs() <= 0.05 * 632.0,
        "omega_5 = {:.2}: the quoted -632 is not derivable from the printed A_5, B_5, gamma_5 \
         (engine gets -201.0; both are negative, so the obstruction conclusion stands)",
        w5.mid()
    );
}

#[test]
fn criterion_8_positivity_sampling() {
    let t0 = Instant::now();
    let basis = basis64();
    let r1 = sample_positivity(&basis, Functional::EnergyI { alpha: 1.0 }, 200, 2.0, 11).unwrap();
    assert!(r1.min_value >= -1e-9, "min I_1 = {:e}", r1.min_value);
    let rj = sample_positivity(&basis, Functional::ScriptJ45, 200, 2.0, 12).unwrap();
    assert!(
        rj.min_value >= -1e-8,
        "min scriptJ_4/5 = {:e}",
        rj.min_value
    );
    let mut mins = Vec::new();
    for (alpha, seed) in [(0.52, 13u64), (0.75, 14u64)] {
        let r = sample_positivity(
            &basis,
            Functional::EnergyINormalized { alpha },
            200,
            2.0,
            seed,
        )
        .unwrap();
        assert!(
            r.min_value >= -1e-8,
            "min I_{alpha} over the center-of-mass class = {:e}",
            r.min_value
        );
        mins.push(r.min_value);
    }
    report(
        "criterion 8 (positivity sampling)",
        t0,
        120.0,
        &format!(
            "min I_1 {:.2e}, min scriptJ {:.2e}, min I_a on L_r {:.2e}/{:.2e}",
            r1.min_value, rj.min_value, mins[0], mins[1]
        ),
    );
}

#[test]
fn criterion_9_conformal_invariance() {
    let t0 = Instant::now();
    let basis = basis64();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let u = random_smooth_field(&basis, &mut rng, 1.5);
        let a = rng.gen_range(-0.8..0.8);
        let defect = script_j_invariance_defect(&u, a).unwrap();
        worst = worst.max(defect);
    }
    assert!(worst <= 1e-8, "invariance defect {worst:e}");
    let mut worst_moment = 0.0f64;
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let u = random_smooth_field(&basis, &mut rng, 1.5);
        let (v, _) = conformal_normalize(&u).unwrap();
        worst_moment = worst_moment.max(axial_first_moment(&v).unwrap().abs());
    }
    let fam = bubble(&basis, 0.5).unwrap();
    let (v, _) = conformal_normalize(&fam).unwrap();
    worst_moment = worst_moment.max(axial_first_moment(&v).unwrap().abs());
    assert!(worst_moment <= 1e-10, "normalized moment {worst_moment:e}");
    // sanity: the pull at a = 0 is the identity
    let u = random_smooth_field(&basis, &mut ChaCha8Rng::seed_from_u64(5), 1.0);
    let v = conformal_pull(&u, 0.0).unwrap();
    assert!(v.sub(&u).sup_norm() < 1e-12);
    report(
        "criterion 9 (conformal invariance)",
        t0,
        60.0,
        &format!("worst scriptJ defect {worst:.2e}, worst normalized moment {worst_moment:.2e}"),
    );
}
