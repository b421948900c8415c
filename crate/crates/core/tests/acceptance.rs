//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Tolerances are pinned here, in code; the expected values come from
//! closed forms (two-branch-point solutions), AGM-based complete elliptic
//! integrals, a direct theta lattice sum, and the cross-check battery of the
//! verification layer.

use std::time::Instant;

use sb_lattice::abelian::AbelianStack;
use sb_lattice::curve::{involute, validate_spec};
use sb_lattice::hierarchy::{self, LatticeSeq};
use sb_lattice::solution::{genus0_solution, SolutionState};
use sb_lattice::theta::{scalar_product, ThetaParams};
use sb_lattice::verify::{full_report, VerifyConfig};
use sb_lattice::C64;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {criterion}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{criterion}: {detail}");
}

/// AGM oracle for the complete elliptic integral K(k), modulus convention.
fn ellip_k(k: f64) -> f64 {
    let mut a = 1.0f64;
    let mut b = (1.0 - k * k).sqrt();
    for _ in 0..64 {
        let (an, bn) = (0.5 * (a + b), (a * b).sqrt());
        if (an - bn).abs() < 1e-16 * an {
            return std::f64::consts::FRAC_PI_2 / an;
        }
        a = an;
        b = bn;
    }
    std::f64::consts::FRAC_PI_2 / a
}

#[test]
fn criterion_1_genus0_closed_form() {
    let t0 = Instant::now();
    let sol = genus0_solution(c(1.0, 0.0), c(4.0, 0.0), 1, c(1.0, 0.0), 0, (-13, 13)).unwrap();
    let mut worst_alpha = 0.0f64;
    let mut worst_prod = 0.0f64;
    for n in -10..=10i64 {
        let expect = c(-2.0, 0.0).powi(n as i32);
        worst_alpha = worst_alpha
            .max((sol.seq.alpha(n) - expect).norm() / expect.norm());
        worst_prod = worst_prod
            .max((sol.seq.alpha(n) * sol.seq.beta(n) - c(1.125, 0.0)).norm() / 1.125);
    }
    let coeffs = hierarchy::run_recursion(&sol.seq, &[sol.c1], 1, 0).unwrap();
    let res = hierarchy::sb_residual(&sol.seq, &coeffs, 0, sol.g1, (-10, 10)).unwrap();
    let worst_sb = res
        .iter()
        .map(|(_, r1, r2)| r1.norm().max(r2.norm()))
        .fold(0.0, f64::max);
    let dt = t0.elapsed().as_secs_f64();
    let pass = worst_alpha <= 1e-12 && worst_prod <= 1e-12 && worst_sb <= 1e-12 && dt < 1.0;
    report(
        "criterion 1 (closed form, two branch points)",
        pass,
        &format!(
            "alpha rel {worst_alpha:.2e} <= 1e-12, product rel {worst_prod:.2e} <= 1e-12, \
             stationary residual {worst_sb:.2e} <= 1e-12, runtime {dt:.3}s < 1s"
        ),
    );
}

#[test]
fn criterion_2_period_oracle() {
    let t0 = Instant::now();
    let spec = validate_spec(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)], 1).unwrap();
    let cuts = sb_lattice::contour::build_cuts(&spec, None).unwrap();
    let mut hom = sb_lattice::contour::build_homology(&spec, &cuts).unwrap();
    let periods = sb_lattice::periods::compute_periods(&spec, &mut hom, 1e-11).unwrap();
    let tau = periods.tau[(0, 0)];
    // cross-ratio modulus of {1,2,3,4}: k^2 = 1/4
    let rho = ellip_k((0.75f64).sqrt()) / ellip_k(0.5);
    let d_rho = (tau - c(0.0, rho)).norm();
    let d_inv = (tau - c(0.0, 1.0 / rho)).norm();
    let oracle_ok = d_rho <= 1e-8 || d_inv <= 1e-8;
    // frozen regression branch: this homology realizes tau = i*rho
    let frozen = c(0.0, 1.2792615711710063);
    let frozen_ok = (tau - frozen).norm() <= 1e-8;
    let dt = t0.elapsed().as_secs_f64();
    let pass = oracle_ok && frozen_ok && dt < 5.0;
    report(
        "criterion 2 (period matrix vs elliptic oracle)",
        pass,
        &format!(
            "tau = {tau}, |tau - i*rho| = {d_rho:.2e}, frozen-branch dev {:.2e} <= 1e-8, \
             runtime {dt:.3}s < 5s",
            (tau - frozen).norm()
        ),
    );
}

#[test]
fn criterion_3_theta_suite() {
    // direct lattice-sum oracle at tau = i
    let mut oracle = 0.0f64;
    for n in (1..=60i64).rev() {
        oracle += 2.0 * (-std::f64::consts::PI * (n * n) as f64).exp();
    }
    oracle += 1.0;
    let params = ThetaParams::new(DMatrix::from_element(1, 1, c(0.0, 1.0)), 1e-14).unwrap();
    let v = params.theta(&[c(0.0, 0.0)]).unwrap();
    let value_ok = (v.re - 1.086434811213308).abs() <= 1e-12
        && (v.re - oracle).abs() <= 1e-13
        && v.im.abs() <= 1e-15;

    // quasi-periodicity over 50 random (z, m, n) on a non-trivial tau
    let tau = DMatrix::from_row_slice(
        2,
        2,
        &[c(0.3, 1.1), c(0.1, 0.2), c(0.1, 0.2), c(-0.2, 0.9)],
    );
    let p2 = ThetaParams::new(tau.clone(), 1e-14).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst_qp = 0.0f64;
    for _ in 0..50 {
        let z = [
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        ];
        let m = [rng.gen_range(-2i64..=2) as f64, rng.gen_range(-2i64..=2) as f64];
        let n = [rng.gen_range(-2i64..=2) as f64, rng.gen_range(-2i64..=2) as f64];
        let ntau = [
            n[0] * tau[(0, 0)] + n[1] * tau[(1, 0)],
            n[0] * tau[(0, 1)] + n[1] * tau[(1, 1)],
        ];
        let shifted = [z[0] + m[0] + ntau[0], z[1] + m[1] + ntau[1]];
        let lhs = p2.theta(&shifted).unwrap();
        let nc = [c(n[0], 0.0), c(n[1], 0.0)];
        let factor = (c(0.0, -2.0 * std::f64::consts::PI) * scalar_product(&nc, &z)
            + c(0.0, -std::f64::consts::PI) * scalar_product(&nc, &ntau))
        .exp();
        let rhs = factor * p2.theta(&z).unwrap();
        worst_qp = worst_qp.max((lhs - rhs).norm() / rhs.norm().max(1e-10));
    }

    // parity
    let mut worst_parity = 0.0f64;
    for _ in 0..20 {
        let z = [
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.7..0.7)),
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.7..0.7)),
        ];
        let a = p2.theta(&z).unwrap();
        let b = p2.theta(&[-z[0], -z[1]]).unwrap();
        worst_parity = worst_parity.max((a - b).norm() / a.norm().max(1.0));
    }

    let pass = value_ok && worst_qp <= 1e-10 && worst_parity <= 1e-14;
    report(
        "criterion 3 (theta value, quasi-periodicity, parity)",
        pass,
        &format!(
            "theta(0|i) = {:.15}, quasi-periodicity {worst_qp:.2e} <= 1e-10, \
             parity {worst_parity:.2e} <= 1e-14",
            v.re
        ),
    );
}

#[test]
fn criterion_4_abelian_self_checks() {
    let spec = validate_spec(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)], 1).unwrap();
    let st = AbelianStack::build(&spec, None, 1e-10, 1e-13).unwrap();
    let mut res_err = 0.0f64;
    let mut a_err = 0.0f64;
    let mut combo_err = 0.0f64;
    for tk in [&st.third_minus, &st.third_plus] {
        a_err = a_err.max(tk.a_period_residual);
        res_err = res_err.max((tk.residue_p0_minus - c(1.0, 0.0)).norm());
        res_err = res_err.max((tk.residue_target + c(1.0, 0.0)).norm());
        let combo = (tk.omega0.zero_minus - tk.omega0.inf_plus - tk.omega0.inf_minus
            + tk.omega0.zero_plus)
            .exp();
        combo_err = combo_err.max((combo - c(1.0, 0.0)).norm());
    }
    let b_err = st.checks.b_period_mod_lattice;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut drift = 0.0f64;
    let mut count = 0;
    while count < 10 {
        let z = c(rng.gen_range(-2.0..6.0), rng.gen_range(0.4..3.0));
        let p = match spec.surface_point(z, 1) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let a1 = st.abel_sp(&p).unwrap();
        let a2 = st.abel_independent(&involute(p)).unwrap();
        let v: Vec<C64> = a1.iter().zip(&a2).map(|(&x, &y)| x + y).collect();
        drift = drift.max(st.theta.dist_mod_lattice(&v));
        count += 1;
    }

    let pass =
        a_err <= 1e-8 && res_err <= 1e-8 && b_err <= 1e-7 && combo_err <= 1e-8 && drift <= 1e-7;
    report(
        "criterion 4 (Abelian self-checks)",
        pass,
        &format!(
            "a-periods {a_err:.2e} <= 1e-8, residues {res_err:.2e} <= 1e-8, \
             b-period relation {b_err:.2e} <= 1e-7, exp combination {combo_err:.2e} <= 1e-8, \
             Abel-theorem drift {drift:.2e} <= 1e-7"
        ),
    );
}

#[test]
fn criterion_5_end_to_end_genus_one() {
    let t0 = Instant::now();
    let spec = validate_spec(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)], 1).unwrap();
    let mu = spec.surface_point(c(2.5, 0.9), 1).unwrap();
    let st = SolutionState::init(&spec, None, vec![mu], c(1.0, 0.0), 0, 1e-10, 1e-13).unwrap();
    let cfg = VerifyConfig::default();
    let rep = full_report(&st, (-5, 5), &cfg).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    let pass = rep.riccati.pass
        && rep.transfer.pass
        && rep.eigenrelation.pass
        && rep.r_match.pass
        && rep.r_drift.pass
        && rep.trace.pass
        && rep.product.pass
        && rep.divisor_flow.pass
        && rep.baker_akhiezer.pass
        && dt < 60.0;
    report(
        "criterion 5 (end-to-end genus 1)",
        pass,
        &format!(
            "riccati {:.2e} <= 1e-6, transfer {:.2e} <= 1e-6, eigen {:.2e} <= 1e-6, \
             R match {:.2e} <= 1e-7, drift {:.2e} <= 1e-8, trace {:.2e} <= 1e-6, \
             product {:.2e} <= 1e-8, flow {:.2e} <= 1e-6, BA {:.2e} <= 1e-6, runtime {dt:.1}s < 60s",
            rep.riccati.max,
            rep.transfer.max,
            rep.eigenrelation.max,
            rep.r_match.max,
            rep.r_drift.max,
            rep.trace.max,
            rep.product.max,
            rep.divisor_flow.max,
            rep.baker_akhiezer.max
        ),
    );
}

#[test]
fn criterion_6_unit_circle_quasiperiodicity() {
    let e = |th: f64| C64::from_polar(1.0, th);
    let spec = validate_spec(&[e(0.5), e(-0.5), e(2.0), e(-2.0)], 1).unwrap();
    // divisor point on the unit circle inside the spectral gap (frozen)
    let mu = spec.surface_point(e(1.25), 1).unwrap();
    let st = SolutionState::init(&spec, None, vec![mu], c(0.6, 0.3), 0, 1e-10, 1e-13).unwrap();
    let growth = (-st.growth_log).exp();
    let growth_dev = (growth.norm() - 1.0).abs();
    let mut mods = Vec::new();
    for n in -20..=20i64 {
        mods.push(st.alpha_n(n).unwrap().norm());
    }
    let max = mods.iter().cloned().fold(0.0f64, f64::max);
    let min = mods.iter().cloned().fold(f64::INFINITY, f64::min);
    let ratio = max / min - 1.0;
    let re_c = st.growth_log.re.abs();
    let pass = growth_dev <= 1e-6 && ratio <= 1e-4 && re_c <= 1e-6;
    report(
        "criterion 6 (unit-circle conjugate pairs: bounded alpha)",
        pass,
        &format!(
            "growth-factor modulus dev {growth_dev:.2e} <= 1e-6, \
             max|alpha|/min|alpha| - 1 = {ratio:.2e} <= 1e-4, |Re growth log| {re_c:.2e}"
        ),
    );
}

#[test]
fn criterion_7_hierarchy_algebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut rnd = |r: &mut ChaCha8Rng| c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));

    // identity residual on fully random 20-site sequences
    let mut worst_dual = 0.0f64;
    for _ in 0..3 {
        let alpha: Vec<C64> = (0..20).map(|_| rnd(&mut rng)).collect();
        let beta: Vec<C64> = (0..20).map(|_| rnd(&mut rng)).collect();
        let seq = LatticeSeq::new(-10, alpha, beta);
        let coeffs =
            hierarchy::run_recursion(&seq, &[rnd(&mut rng), rnd(&mut rng), c(0.0, 0.0)], 3, 0)
                .unwrap();
        worst_dual = worst_dual.max(hierarchy::dual_identity_check(&seq, &coeffs));
    }

    // lattice constancy of G^2 - FH on randomly parameterized 20-site
    // solution sequences (the invariant presupposes the stationary system)
    let mut worst_drift = 0.0f64;
    for k in 0..3 {
        let e0 = c(1.0 + 0.3 * k as f64, 0.2 * k as f64);
        let e1 = c(3.5 - 0.4 * k as f64, -0.1);
        let a0 = rnd(&mut rng);
        let sol = genus0_solution(e0, e1, 1, a0, 0, (-10, 9)).unwrap();
        let coeffs = hierarchy::run_recursion(&sol.seq, &[sol.c1], 1, 0).unwrap();
        let triples: Vec<(i64, hierarchy::PolyTriple)> =
            (-6..=6).map(|n| (n, hierarchy::assemble(&coeffs, 0, n))).collect();
        let inv = hierarchy::lattice_invariant(&triples);
        worst_drift = worst_drift.max(inv.drift);
    }

    // explicit forms agree with the recursion
    let alpha: Vec<C64> = (0..24).map(|_| rnd(&mut rng)).collect();
    let beta: Vec<C64> = (0..24).map(|_| rnd(&mut rng)).collect();
    let seq = LatticeSeq::new(-12, alpha, beta);
    let g_top = c(0.8, -0.3);
    let c1 = rnd(&mut rng);
    let mut worst_explicit = 0.0f64;
    let coeffs0 = hierarchy::run_recursion(&seq, &[c(0.0, 0.0)], 1, 0).unwrap();
    for ((_, a1, a2), (_, b1, b2)) in hierarchy::sb_residual(&seq, &coeffs0, 0, g_top, (-4, 4))
        .unwrap()
        .iter()
        .zip(&hierarchy::sb_residual_explicit(&seq, 0, c(0.0, 0.0), g_top, (-4, 4)))
    {
        worst_explicit = worst_explicit.max((a1 - b1).norm()).max((a2 - b2).norm());
    }
    let coeffs1 = hierarchy::run_recursion(&seq, &[c1, c(0.0, 0.0)], 2, 0).unwrap();
    for ((_, a1, a2), (_, b1, b2)) in hierarchy::sb_residual(&seq, &coeffs1, 1, g_top, (-4, 4))
        .unwrap()
        .iter()
        .zip(&hierarchy::sb_residual_explicit(&seq, 1, c1, g_top, (-4, 4)))
    {
        worst_explicit = worst_explicit.max((a1 - b1).norm()).max((a2 - b2).norm());
    }

    // scaling law, bitwise for a power of two
    let base = hierarchy::sb_residual(&seq, &coeffs1, 1, g_top, (-4, 4)).unwrap();
    let a_scale = 8.0f64;
    let scaled_seq = LatticeSeq::new(
        seq.n_lo(),
        seq.alpha.iter().map(|&x| x * a_scale).collect(),
        seq.beta.iter().map(|&x| x / a_scale).collect(),
    );
    let coeffs_s = hierarchy::run_recursion(&scaled_seq, &[c1, c(0.0, 0.0)], 2, 0).unwrap();
    let scaled = hierarchy::sb_residual(&scaled_seq, &coeffs_s, 1, g_top, (-4, 4)).unwrap();
    let scaling_exact = base
        .iter()
        .zip(&scaled)
        .all(|((_, r1, r2), (_, s1, s2))| *s1 == r1 * a_scale && *s2 == r2 / a_scale);

    let pass = worst_dual <= 1e-12 && worst_drift <= 1e-10 && worst_explicit <= 1e-12 && scaling_exact;
    report(
        "criterion 7 (hierarchy algebra)",
        pass,
        &format!(
            "dual identity {worst_dual:.2e} <= 1e-12, invariant drift {worst_drift:.2e} <= 1e-10, \
             explicit forms {worst_explicit:.2e} <= 1e-12, scaling exact: {scaling_exact}"
        ),
    );
}

#[test]
fn criterion_8_theta_divisor_vanishing() {
    let spec = validate_spec(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)], 1).unwrap();
    let st = AbelianStack::build(&spec, None, 1e-10, 1e-13).unwrap();
    let q = spec.surface_point(c(2.5, 1.3), -1).unwrap();
    let aq = st.abel_sp(&q).unwrap();
    let at_q = {
        let ap = st.abel_sp(&q).unwrap();
        let arg = [st.xi[0] - ap[0] + aq[0]];
        st.theta.theta_reduced(&arg).unwrap().value.norm()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut samples = Vec::new();
    while samples.len() < 20 {
        let z = c(rng.gen_range(-2.0..6.0), rng.gen_range(-3.0..3.0));
        let sheet = if rng.gen_bool(0.5) { 1 } else { -1 };
        let p = match spec.surface_point(z, sheet) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let ap = st.abel_sp(&p).unwrap();
        let arg = [st.xi[0] - ap[0] + aq[0]];
        samples.push(st.theta.theta_reduced(&arg).unwrap().value.norm());
    }
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = samples[samples.len() / 2];
    let ratio = at_q / median;
    let pass = ratio <= 1e-6;
    report(
        "criterion 8 (theta-divisor vanishing)",
        pass,
        &format!("theta at divisor point / median = {ratio:.2e} <= 1e-6"),
    );
}
