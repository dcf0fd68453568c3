//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line with its residual and pinned tolerance.
//!
//! Criterion 7 asserts the λ⁶ growth constant exactly as printed in the
//! source material; the constructed transfer matrix reproducibly gives
//! one quarter of that value (see the companion structural check inside
//! the test and notes/decisions.md), so that single assertion is an
//! expected, documented red.

use ndarray::Array2;
use spinboson::c64;
use spinboson::fock::FockSpinOperator;
use spinboson::open::{
    b_spectrum_recurrence, build_u_matrix, conjectured_bethe_residual,
    diagonal_bethe_residual, open_lattice, qdet_constraint,
    qdet_factorization_open, scan_conjectured, FactorizationVariant, ModifiedFactorization,
    ReflectionParams,
};
use spinboson::poly::ScalarPolynomial;
use spinboson::quasiclassical::{
    gaudin_zeta, lambda2_closed, qc_diag_ode_residual_1, qc_diag_ode_residual_2, qc_diag_q_poly,
    qc_diag_tau2_spectrum, qc_gaudin_ode_residual, qc_nondiag_match, qc_open_diagonal_expansion,
    solve_gaudin, GaudinParams, QcParamsNonDiag,
};
use spinboson::spectral::{
    biorthogonal_eigen, eigenvalue_polynomials, match_spectra, EigenPolyOptions,
};
use spinboson::twisted::{
    bethe_spectrum_twisted, build_monodromy_twisted, twisted_lattice, TwistConfig,
};
use spinboson::yang_baxter::{
    check_reflection_minus, check_reflection_plus, check_rll, k_matrix, lax_boson, lax_spin,
    qdet_boson_closed, qdet_lax, qdet_spin_closed, ModelParams,
};
use spinboson::C64;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn report(name: &str, residual: f64, tol: f64) {
    let status = if residual <= tol { "PASS" } else { "FAIL" };
    println!("acceptance: {name}: {status} (residual {residual:.3e}, tol {tol:.1e})");
    assert!(residual <= tol, "{name}: residual {residual:.3e} exceeds tol {tol:.1e}");
}

fn desk_model(n_t: usize) -> ModelParams {
    ModelParams::new(
        c64(1.0, 0.0),
        c64(0.23, 0.0),
        c64(0.57, 0.0),
        c64(0.9, 0.0),
        c64(0.8, 0.0),
        n_t,
        4,
    )
    .unwrap()
}

fn open_model(n_t: usize) -> ModelParams {
    ModelParams::new(
        c64(1.0, 0.0),
        c64(0.2, 0.0),
        c64(0.1, 0.0),
        c64(0.8, 0.0),
        c64(0.7, 0.0),
        n_t,
        4,
    )
    .unwrap()
}

fn open_boundaries() -> ReflectionParams {
    ReflectionParams::new(
        c64(1.3, 0.0),
        c64(0.9, 0.0),
        c64(0.4, 0.0),
        c64(0.55, 0.0),
        c64(0.25, 0.0),
        c64(-0.3, 0.0),
    )
    .unwrap()
}

fn acceptance_twist() -> TwistConfig {
    let k = ndarray::array![
        [c64(1.0, 0.0), c64(0.0, 0.0)],
        [c64(1.8, 0.0), c64(0.06, 0.0)]
    ];
    TwistConfig::from_twist(&k, c64(0.04, 0.0)).unwrap()
}

fn rand_pair(rng: &mut ChaCha8Rng) -> (C64, C64) {
    (
        c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
    )
}

#[test]
fn criterion_01_quantum_determinants() {
    let mut worst = 0.0f64;
    for n_t in [16usize, 24, 32] {
        let p = desk_model(n_t);
        let db = qdet_lax(&lax_boson(&p).unwrap(), p.eta, p.margin).unwrap();
        let ds = qdet_lax(&lax_spin(&p).unwrap(), p.eta, p.margin).unwrap();
        worst = worst.max(db.sub(&qdet_boson_closed(&p)).max_coeff_norm());
        worst = worst.max(ds.sub(&qdet_spin_closed(&p)).max_coeff_norm());
    }
    report("1 quantum determinants (N_t 16/24/32)", worst, 1e-12);
}

#[test]
fn criterion_02_rll_and_reflection() {
    let p = desk_model(24);
    let lb = lax_boson(&p).unwrap();
    let ls = lax_spin(&p).unwrap();
    let r = open_boundaries();
    let mut rng = ChaCha8Rng::seed_from_u64(2026_08_09);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let (lam, mu) = rand_pair(&mut rng);
        worst = worst.max(check_rll(&lb, lam, mu, p.eta, p.margin).unwrap());
        worst = worst.max(check_rll(&ls, lam, mu, p.eta, p.margin).unwrap());
        let km = move |x: C64| k_matrix(x, r.xi_m, r.kappa_m, r.theta_m);
        let kp = move |x: C64| {
            k_matrix(x + p.eta, r.xi_p, r.kappa_p, r.theta_p).mapv(|z| z * c64(0.5, 0.0))
        };
        worst = worst.max(check_reflection_minus(&km, lam, mu, p.eta).unwrap());
        worst = worst.max(check_reflection_plus(&kp, lam, mu, p.eta).unwrap());
    }
    report("2 RLL and reflection relations", worst, 1e-10);
}

#[test]
fn criterion_03_commuting_families() {
    let p = desk_model(24);
    let tw = build_monodromy_twisted(&p, &acceptance_twist()).unwrap();
    let po = open_model(24);
    let op = build_u_matrix(&po, &open_boundaries()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_tw = 0.0f64;
    let mut worst_op = 0.0f64;
    for _ in 0..5 {
        let (lam, mu) = rand_pair(&mut rng);
        worst_tw = worst_tw.max(tw.commutator_residual(lam, mu));
        worst_op = worst_op.max(op.commutator_residual(lam, mu));
    }
    report("3a twisted commuting family", worst_tw, 1e-10);
    report("3b open commuting family", worst_op, 1e-9);
}

#[test]
fn criterion_04_twisted_operator_zero_spectra() {
    let p = desk_model(24);
    let ch = build_monodromy_twisted(&p, &acceptance_twist()).unwrap();
    let cz = ch.c_zero_ops().unwrap();
    let e1 = biorthogonal_eigen(&cz.c1).unwrap();
    let e2 = biorthogonal_eigen(&cz.c2).unwrap();
    let lat = twisted_lattice(&p);
    assert!(!lat.degenerate_warning);
    let mut worst1 = 0.0f64;
    let mut worst2 = 0.0f64;
    for m in 0..=18usize {
        for sign in [0.5f64, -0.5] {
            let c1v = p.eta * (c64(m as f64, 0.0) + p.z0 + p.z1 + c64(sign, 0.0));
            let c2v = p.eta * p.eta * (p.z0 + c64(sign, 0.0)) * (c64(m as f64, 0.0) + p.z1);
            worst1 = worst1.max(
                e1.values.iter().map(|&v| (v - c1v).norm()).fold(f64::INFINITY, f64::min),
            );
            worst2 = worst2.max(
                e2.values.iter().map(|&v| (v - c2v).norm()).fold(f64::INFINITY, f64::min),
            );
        }
    }
    let eta_n = p.eta.norm();
    report("4a twisted c1 spectrum (m <= 18)", worst1, 1e-10 * eta_n);
    report("4b twisted c2 spectrum (m <= 18)", worst2, 1e-10 * eta_n * eta_n);
}

#[test]
fn criterion_05_twisted_bethe_vs_exact() {
    let p = desk_model(24);
    let cfg = acceptance_twist();
    let ch = build_monodromy_twisted(&p, &cfg).unwrap();
    let nodes = [c64(0.3, 0.2), c64(-0.5, 0.1), c64(0.8, -0.3), c64(0.1, 0.6)];
    let opts = EigenPolyOptions::new(2, p.margin);
    let records =
        eigenvalue_polynomials(&|x| ch.transfer_at(x), &nodes, &opts, None).unwrap();
    let n_trusted = records.iter().filter(|r| r.trusted).count();
    assert!(n_trusted >= 3, "degenerate acceptance run: only {n_trusted} trusted records");
    let bethe = bethe_spectrum_twisted(&p, &cfg, 4, 20_260_809).unwrap();
    let polys: Vec<ScalarPolynomial> = bethe.iter().map(|(_, l, _)| l.clone()).collect();
    let rep = match_spectra(&polys, &records, 1e-7);
    println!(
        "acceptance: 5 detail: {} trusted records, {} Bethe states (M <= 4), {} matched pairs, max distance {:.3e}",
        n_trusted,
        bethe.len(),
        rep.pairs.len(),
        rep.max_matched_distance
    );
    report(
        "5 twisted Bethe covers every trusted record",
        rep.unmatched_trusted_exact.len() as f64,
        0.0,
    );
}

#[test]
fn criterion_06_open_b_operators() {
    let p = open_model(24);
    let r = open_boundaries();
    let chain = build_u_matrix(&p, &r).unwrap();
    let dec = chain.b_symm_decompose().unwrap();
    let (states, warn) = b_spectrum_recurrence(&p, &r, &dec, 16).unwrap();
    assert!(!warn);
    let lat = open_lattice(&p);
    let mut worst = 0.0f64;
    // recurrence eigenvalues == closed forms (by construction they are the
    // closed forms; the content is the eigenvector residuals)...
    for st in &states {
        worst = worst.max(st.residual_b1).max(st.residual_b2);
        let xs = if st.branch == 1 { lat.x_s_minus } else { lat.x_s_plus };
        let xb = lat.x_b[st.m];
        let e1 = (xb / p.eta).powi(2) + (xs / p.eta).powi(2);
        let e2 = (xb / p.eta).powi(2) * (xs / p.eta).powi(2);
        worst = worst.max((st.e1_tilde - e1).norm()).max((st.e2_bar - e2).norm());
    }
    // ... and agreement with dense diagonalization
    let eig1 = biorthogonal_eigen(&dec.b1.transpose()).unwrap();
    let eig2 = biorthogonal_eigen(&dec.b2.transpose()).unwrap();
    for st in &states {
        let t1 = p.eta * p.eta * st.e1_tilde;
        let t2 = p.eta.powi(4) * st.e2_bar;
        worst = worst.max(
            eig1.values.iter().map(|&v| (v - t1).norm()).fold(f64::INFINITY, f64::min)
                / t1.norm().max(1.0),
        );
        worst = worst.max(
            eig2.values.iter().map(|&v| (v - t2).norm()).fold(f64::INFINITY, f64::min)
                / t2.norm().max(1.0),
        );
    }
    report("6 open b1/b2 spectra (recurrence = closed = dense, m <= 16)", worst, 1e-9);
}

#[test]
fn criterion_07_open_lambda6_asymptotics() {
    let p = open_model(24);
    let r = open_boundaries();
    let chain = build_u_matrix(&p, &r).unwrap();
    // diagonal boundaries: the λ⁶ coefficient vanishes
    let rd = ReflectionParams::diagonal(c64(1.3, 0.0), c64(0.9, 0.0)).unwrap();
    let chain_d = build_u_matrix(&open_model(16), &rd).unwrap();
    let a6d = chain_d.lambda6_coefficient().unwrap().norm()
        / chain_d.transfer_poly().max_coeff_norm();
    report("7a diagonal boundaries: λ⁶ vanishes", a6d, 1e-12);

    // fitted λ⁶ of every trusted Λ equals the operator-level coefficient
    let nodes: Vec<C64> = (0..9)
        .map(|k| c64(0.25 + 0.13 * k as f64, 0.2 - 0.09 * k as f64))
        .collect();
    let mut opts = EigenPolyOptions::new(6, p.margin);
    opts.parity_even = true;
    let records = eigenvalue_polynomials(&|x| chain.transfer_at(x), &nodes, &opts, None).unwrap();
    let a6_op = chain.lambda6_coefficient().unwrap();
    let mut worst_fit = 0.0f64;
    let mut n_trusted = 0usize;
    for rec in records.iter().filter(|r| r.trusted) {
        n_trusted += 1;
        worst_fit = worst_fit.max((rec.coeffs.coeff(6) - a6_op).norm() / a6_op.norm());
    }
    assert!(n_trusted >= 3, "only {n_trusted} trusted open records");
    report("7b fitted λ⁶ equals the operator coefficient", worst_fit, 1e-8);

    // structural companion: the coefficient is exactly 1/4 of the printed
    // growth constant (constant, parameter-independent ratio)
    let sp = r.side_plus();
    let sm = r.side_minus();
    let printed = 2.0 * (-r.theta_p).exp() * r.theta_m.exp()
        / (sp.alpha * sm.alpha * sp.beta.unwrap().cosh() * sm.beta.unwrap().cosh());
    let quarter_dev = (a6_op - printed / 4.0).norm() / printed.norm();
    report("7c structural: λ⁶ = printed/4 exactly", quarter_dev, 1e-10);

    // the criterion as printed: λ⁶ equals the printed constant itself.
    // Documented contradiction with criterion 8 (see notes/decisions.md):
    // expected red.
    let printed_dev = (a6_op - printed).norm() / printed.norm();
    report("7d λ⁶ equals the printed growth constant (expected red)", printed_dev, 1e-8);
}

#[test]
fn criterion_08_lambda_half_eta_constraint() {
    let p = open_model(24);
    let r = open_boundaries();
    let chain = build_u_matrix(&p, &r).unwrap();
    let nodes: Vec<C64> = (0..9)
        .map(|k| c64(0.25 + 0.13 * k as f64, 0.2 - 0.09 * k as f64))
        .collect();
    let mut opts = EigenPolyOptions::new(6, p.margin);
    opts.parity_even = true;
    let records = eigenvalue_polynomials(&|x| chain.transfer_at(x), &nodes, &opts, None).unwrap();
    let mut worst = 0.0f64;
    let mut n_trusted = 0;
    let mut constraint_value = c64(0.0, 0.0);
    for rec in records.iter().filter(|r| r.trusted) {
        n_trusted += 1;
        let (dev, rhs) = qdet_constraint(&p, &rec.coeffs).unwrap();
        constraint_value = rhs;
        worst = worst.max(dev);
    }
    assert!(n_trusted >= 3);
    println!(
        "acceptance: 8 detail: constraint value Det_q T(-η/2) = {constraint_value} across {n_trusted} trusted records"
    );
    report("8 Λ(η/2) = Det_q T(-η/2) for every trusted record", worst, 1e-9);
}

#[test]
fn criterion_09_open_qdet_factorization() {
    let p = open_model(24);
    let chain = build_u_matrix(&p, &open_boundaries()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let samples: Vec<C64> = (0..7)
        .map(|_| c64(rng.random_range(-1.2..1.2), rng.random_range(-1.2..1.2)))
        .collect();
    // qdet_factorization_open errors if any of the 7 samples exceeds 1e-9
    // relative or a boundary zero fails exactly
    let (dp, dm) = qdet_factorization_open(&chain, &samples).unwrap();
    let lat = open_lattice(&p);
    let worst = dp
        .eval(lat.x_s_plus)
        .norm()
        .max(dm.eval(lat.x_s_minus).norm())
        .max(dm.eval(lat.x_b[0]).norm());
    report("9 open Δ± factorization + boundary zeros", worst, 1e-12);
}

#[test]
fn criterion_10_diagonal_limit_consistency() {
    let p = open_model(16);
    let r = open_boundaries();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let draw_roots = |m: usize, rng: &mut ChaCha8Rng| -> Vec<C64> {
        loop {
            let roots: Vec<C64> = (0..m)
                .map(|_| c64(rng.random_range(0.4..1.6), rng.random_range(-0.6..0.6)))
                .collect();
            let mut ok = true;
            for i in 0..m {
                for j in 0..m {
                    if i != j {
                        for s in [1.0, -1.0] {
                            if (roots[i] - roots[j] - p.eta * c64(s, 0.0)).norm() < 0.25
                                || (roots[i] + roots[j] - p.eta * c64(s, 0.0)).norm() < 0.25
                            {
                                ok = false;
                            }
                        }
                    }
                }
            }
            if ok {
                return roots;
            }
        }
    };
    let mut prev = f64::INFINITY;
    let mut last = f64::INFINITY;
    for &eps in &[1e-4f64, 1e-8, 1e-13] {
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let m = rng.random_range(1..4usize);
            let roots = draw_roots(m, &mut rng);
            let chi = c64(1.0, 0.0);
            let mf = ModifiedFactorization::with_raw(
                &p,
                &r,
                FactorizationVariant::Minus2,
                c64(eps, 0.0),
                chi,
            );
            let conj = conjectured_bethe_residual(&p, &r, &mf, &roots).unwrap();
            let diag = diagonal_bethe_residual(&p, &r, &roots).unwrap();
            for (a, b) in conj.bethe.iter().zip(diag.iter()) {
                worst = worst.max((a - b).norm());
            }
        }
        assert!(worst < prev * 1.01, "agreement must improve along the limit path");
        prev = worst;
        last = worst;
    }
    report("10 conjectured -> diagonal Bethe limit (20 root sets)", last, 1e-10);
}

#[test]
fn criterion_11_qc_diagonal_open() {
    let base = ModelParams::new(
        c64(1.0, 0.0),
        c64(0.0, 0.0),
        c64(0.3, 0.0),
        c64(0.8, 0.0),
        c64(0.7, 0.0),
        24,
        4,
    )
    .unwrap();
    let xi_p = c64(1.1, 0.0);
    let xi_m = c64(0.8, 0.0);
    let w = xi_p * xi_m;
    let exp = qc_open_diagonal_expansion(&base, xi_p, xi_m, 3).unwrap();
    let scale = exp.orders.values().fold(0.0f64, |m, o| m.max(o.max_coeff_norm()));
    let t0 = exp.order(0).unwrap().max_coeff_norm() / scale;
    report("11a τ⁰ vanishes", t0, 1e-9);
    let t1 = exp.order(1).unwrap();
    let mut t1_dev = 0.0f64;
    for k in 0..=t1.degree() {
        let (_, dev) = t1.coeff(k).edge_safe_scalar(base.margin);
        t1_dev = t1_dev.max(dev);
    }
    report("11b τ¹ scalar", t1_dev / scale, 1e-9);
    let sectors = qc_diag_tau2_spectrum(&exp, &base, 6).unwrap();
    let scaled_dist = |a: &ScalarPolynomial, b: &ScalarPolynomial| -> f64 {
        let s = a.max_coeff_norm().max(b.max_coeff_norm()).max(1e-300);
        let n = a.degree().max(b.degree()) + 1;
        (0..n).fold(0.0f64, |m, i| m.max((a.coeff(i) - b.coeff(i)).norm())) / s
    };
    let mut worst = 0.0f64;
    for sec in &sectors {
        let cands = [
            lambda2_closed(sec.k, base.z1, w, true),
            lambda2_closed(sec.k, base.z1, w, false),
        ];
        for poly in &sec.eigen_polys {
            let d = cands.iter().map(|c| scaled_dist(poly, c)).fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
    }
    report("11c τ² sector spectra = closed forms (k <= 6)", worst, 1e-9);
    // Q ODEs exactly zero
    let mut ode_worst = 0.0f64;
    for k in 0..=6usize {
        let qb = qc_diag_q_poly(k, false, w).unwrap();
        ode_worst = ode_worst
            .max(qc_diag_ode_residual_2(&qb, k, w).max_coeff_norm() / qb.max_coeff_norm().max(1.0));
        if k >= 1 {
            let qa = qc_diag_q_poly(k, true, w).unwrap();
            ode_worst = ode_worst.max(
                qc_diag_ode_residual_1(&qa, k, w).max_coeff_norm() / qa.max_coeff_norm().max(1.0),
            );
        }
    }
    report("11d Q_{k,a/b} first-order ODEs exact", ode_worst, 1e-12);
}

#[test]
fn criterion_12_qc_nondiagonal() {
    let q = QcParamsNonDiag {
        mu1_m: c64(0.35, 0.0),
        nu1_m: c64(0.6, 0.0),
        xi1_m: c64(0.8, 0.0),
        xi0_p: c64(0.4, 0.0),
        xi1_p: c64(0.25, 0.0),
        z0: c64(0.45, 0.0),
        z1: c64(0.0, 0.0),
        beta_c: c64(0.7, 0.0),
        gamma_c: c64(0.9, 0.0),
        lambda: c64(0.6, 0.0),
    };
    let m = qc_nondiag_match(&q, 16, 4).unwrap();
    report("12a H hermitian for real inputs", m.hermiticity, 1e-12);
    report(
        "12b displaced H commutes with n - S^z",
        m.charge_commutator_after_displacement,
        1e-10,
    );
    // couplings equal the printed formulas (symbolic identities)
    let c = q.couplings();
    let mut dev = 0.0f64;
    dev = dev.max((c.g - 2.0 * q.beta_c * q.z0).norm());
    dev = dev.max((c.delta_sx + 2.0 * q.beta_c * q.beta_c * q.z0 * q.nu1_m).norm());
    dev = dev.max((c.omega0 - 2.0 * (q.z0 * q.z0 - q.lambda * q.lambda)).norm());
    dev = dev.max(
        (c.delta_sz - 2.0 * (q.lambda * q.lambda - q.beta_c * q.beta_c * (q.xi1_m - q.z1))).norm(),
    );
    dev = dev.max(
        (c.alpha_drive
            - q.beta_c / 2.0 * q.nu1_m * (q.lambda * q.lambda - q.z0 * q.z0))
            .norm(),
    );
    report("12c couplings equal the printed formulas", dev, 1e-14);
    println!(
        "acceptance: 12 detail: transfer order η^{} = s·H + c with s = {}, c = {}, rel residual {:.3e}",
        m.j0, m.scale, m.shift, m.rel_residual
    );
    report("12d transfer η-order reproduces H (up to scale and shift)", m.rel_residual, 1e-7);
}

#[test]
fn criterion_13_gaudin_suite() {
    let g = GaudinParams::new(0.6, 1.7, 0.8).unwrap();
    let mut worst_ode = 0.0f64;
    let mut worst_zeta = 0.0f64;
    let mut total_states = 0usize;
    for m in 1..=3usize {
        let states = solve_gaudin(&g, m, 13).unwrap();
        assert!(!states.is_empty(), "no Gaudin states at M={m}");
        total_states += states.len();
        for st in &states {
            let q = ScalarPolynomial::from_roots(&st.roots);
            let zeta = gaudin_zeta(&st.roots).unwrap();
            let direct: C64 = st.roots.iter().map(|&r| -c64(1.0, 0.0) / r).sum();
            worst_zeta = worst_zeta.max((zeta - direct).norm());
            let (consistent, _) = qc_gaudin_ode_residual(&g, &q, zeta, m);
            worst_ode = worst_ode.max(consistent.max_coeff_norm());
        }
    }
    println!("acceptance: 13 detail: {total_states} on-shell Gaudin states, M <= 3");
    report("13a Gaudin ζ = -Σ 1/λ_α", worst_zeta, 1e-10);
    report("13b on-shell Gaudin ODE residual polynomial", worst_ode, 1e-10);
}

#[test]
fn criterion_14_scan_runs_and_is_deterministic() {
    let p = open_model(16);
    let r = open_boundaries();
    let chain = build_u_matrix(&p, &r).unwrap();
    let nodes: Vec<C64> = (0..9)
        .map(|k| c64(0.25 + 0.13 * k as f64, 0.2 - 0.09 * k as f64))
        .collect();
    let mut opts = EigenPolyOptions::new(6, p.margin);
    opts.parity_even = true;
    let records = eigenvalue_polynomials(&|x| chain.transfer_at(x), &nodes, &opts, None).unwrap();
    let chis: Vec<C64> = (0..3).map(|k| c64(0.7 + 0.3 * k as f64, 0.0)).collect();
    let run = || {
        scan_conjectured(
            &p,
            &r,
            FactorizationVariant::Minus2,
            &chis,
            1,
            &records,
            &nodes,
            14,
        )
        .unwrap()
    };
    let s1 = run();
    let s2 = run();
    assert_eq!(s1.len(), chis.len());
    let mut max_dev = 0.0f64;
    for (a, b) in s1.iter().zip(s2.iter()) {
        assert_eq!(a.states, b.states);
        // bit-identical floats under a fixed seed
        assert_eq!(a.best_match.to_bits(), b.best_match.to_bits());
        assert_eq!(a.mean_residual.to_bits(), b.mean_residual.to_bits());
        max_dev = max_dev.max((a.chi - b.chi).norm());
        println!(
            "acceptance: 14 detail: chi = {}, states = {}, best spectral match = {:.3e} (exploratory, logged only)",
            a.chi, a.states, a.best_match
        );
    }
    report("14 (p∞, ζ, χ) scan runs deterministically", max_dev, 0.0);
}

// keep the unused-import lint quiet for items used only in some criteria
#[allow(dead_code)]
fn _touch(_: &FockSpinOperator, _: &Array2<C64>) {}
