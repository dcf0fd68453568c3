//! Task orchestration: each subcommand builds the requested suite,
//! captures module errors as failed checks, and fills an envelope.

use crate::config::{Cx, QcSection, RunConfig, ScanSection};
use crate::envelope::{CheckRecord, Envelope, MatchRow, RootRow, ScanRow, SpectrumRow};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spinboson::open::{
    b_spectrum_recurrence, bar_delta, build_u_matrix, open_lattice, qdet_constraint,
    qdet_factorization_open, scan_conjectured, FactorizationVariant,
};
use spinboson::poly::ScalarPolynomial;
use spinboson::quasiclassical::{
    gaudin_zeta, lambda2_closed, qc_diag_ode_residual_1, qc_diag_ode_residual_2, qc_diag_q_poly,
    qc_diag_tau2_spectrum, qc_gaudin_ode_residual, qc_nondiag_match, qc_open_diagonal_expansion,
    solve_gaudin, GaudinParams, QcParamsNonDiag,
};
use spinboson::spectral::{
    biorthogonal_eigen, eigenvalue_polynomials, match_spectra, EigenPolyOptions, SpectrumRecord,
};
use spinboson::twisted::{
    bethe_spectrum_twisted, build_monodromy_twisted, qdet_factorization_twisted,
};
use spinboson::yang_baxter::{
    check_reflection_minus, check_reflection_plus, check_rll, k_matrix, lax_boson, lax_spin,
    qdet_boson_closed, qdet_lax, qdet_spin_closed, r_matrix,
};
use spinboson::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    VerifyYbe,
    Spectrum,
    Bethe,
    TqCheck,
    Qc,
    Scan,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::VerifyYbe => "verify-ybe",
            Task::Spectrum => "spectrum",
            Task::Bethe => "bethe",
            Task::TqCheck => "tq-check",
            Task::Qc => "qc",
            Task::Scan => "scan",
        }
    }
}

fn rand_pair(rng: &mut ChaCha8Rng) -> (C64, C64) {
    (
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
    )
}

fn spectrum_rows(records: &[SpectrumRecord]) -> Vec<SpectrumRow> {
    records
        .iter()
        .enumerate()
        .map(|(index, r)| SpectrumRow {
            index,
            coeffs: r.coeffs.coeffs().iter().map(|&z| Cx::from_c(z)).collect(),
            leak: r.leak,
            trusted: r.trusted,
            sector_charge: r.sector_charge,
            holdout_error: r.holdout_error,
            defective: r.defective,
        })
        .collect()
}

fn probe_nodes(seed: u64, count: usize) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    (0..count)
        .map(|_| C64::new(rng.random_range(0.2..1.3), rng.random_range(-0.8..0.8)))
        .collect()
}

/// Dispatch a task on a validated configuration.
pub fn run_task(task: Task, cfg: &RunConfig) -> Envelope {
    let started = std::time::Instant::now();
    let mut env = Envelope::new(task.name(), cfg);
    if let Some(declared) = &cfg.task {
        if declared != task.name() {
            env.checks.push(CheckRecord::failed(
                "config task matches subcommand",
                &format!("config says {declared}, subcommand is {}", task.name()),
            ));
            env.seal(started.elapsed().as_secs_f64() * 1e3);
            return env;
        }
    }
    let result = match task {
        Task::VerifyYbe => verify_ybe(cfg, &mut env),
        Task::Spectrum => spectrum(cfg, &mut env),
        Task::Bethe => bethe(cfg, &mut env),
        Task::TqCheck => tq_check(cfg, &mut env),
        Task::Qc => qc(cfg, &mut env),
        Task::Scan => scan(cfg, &mut env),
    };
    if let Err(message) = result {
        env.checks.push(CheckRecord::failed(format!("{} completed", task.name()), &message));
    }
    env.seal(started.elapsed().as_secs_f64() * 1e3);
    env
}

type TaskResult = Result<(), String>;

fn verify_ybe(cfg: &RunConfig, env: &mut Envelope) -> TaskResult {
    let p = cfg.model_params().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.numerics.seed);

    // R-matrix structure
    let mut r_dev = 0.0f64;
    for _ in 0..5 {
        let (lam, mu) = rand_pair(&mut rng);
        let m = r_matrix(lam, mu, p.eta).map_err(|e| e.to_string())?;
        r_dev = r_dev.max((m[(1, 1)] + m[(1, 2)] - C64::new(1.0, 0.0)).norm());
    }
    env.checks.push(CheckRecord::gauge("R-matrix b + c = 1", r_dev, 1e-13));

    // quantum determinants against the closed forms
    let lb = lax_boson(&p).map_err(|e| e.to_string())?;
    let ls = lax_spin(&p).map_err(|e| e.to_string())?;
    match (qdet_lax(&lb, p.eta, p.margin), qdet_lax(&ls, p.eta, p.margin)) {
        (Ok(db), Ok(ds)) => {
            let dev = db
                .sub(&qdet_boson_closed(&p))
                .max_coeff_norm()
                .max(ds.sub(&qdet_spin_closed(&p)).max_coeff_norm());
            env.checks.push(CheckRecord::gauge("Lax quantum determinants", dev, 1e-12));
        }
        (Err(e), _) | (_, Err(e)) => {
            env.checks.push(CheckRecord::failed("Lax quantum determinants", &e.to_string()))
        }
    }

    // RLL relations, edge-safe
    let mut rll_dev = 0.0f64;
    for _ in 0..5 {
        let (lam, mu) = rand_pair(&mut rng);
        rll_dev = rll_dev.max(check_rll(&ls, lam, mu, p.eta, p.margin).map_err(|e| e.to_string())?);
        rll_dev = rll_dev.max(check_rll(&lb, lam, mu, p.eta, p.margin).map_err(|e| e.to_string())?);
    }
    env.checks.push(CheckRecord::gauge("RLL relations (edge-safe)", rll_dev, 1e-10));

    // reflection equations; with a twist boundary use a seeded generic K
    let (xi_p, xi_m, ka_p, ka_m, th_p, th_m) = match &cfg.boundary.open {
        Some(o) => {
            (o.xi_p.c(), o.xi_m.c(), o.kappa_p.c(), o.kappa_m.c(), o.theta_p.c(), o.theta_m.c())
        }
        None => (
            C64::new(1.3, 0.0),
            C64::new(0.9, 0.0),
            C64::new(0.4, 0.0),
            C64::new(0.55, 0.0),
            C64::new(0.25, 0.0),
            C64::new(-0.3, 0.0),
        ),
    };
    let mut refl_dev = 0.0f64;
    for _ in 0..5 {
        let (lam, mu) = rand_pair(&mut rng);
        let km = move |x: C64| k_matrix(x, xi_m, ka_m, th_m);
        let kp = move |x: C64| k_matrix(x + p.eta, xi_p, ka_p, th_p).mapv(|z| z * C64::new(0.5, 0.0));
        refl_dev = refl_dev
            .max(check_reflection_minus(&km, lam, mu, p.eta).map_err(|e| e.to_string())?);
        refl_dev =
            refl_dev.max(check_reflection_plus(&kp, lam, mu, p.eta).map_err(|e| e.to_string())?);
    }
    env.checks.push(CheckRecord::gauge("reflection equations (K- and K+)", refl_dev, 1e-10));

    // boundary-specific quantum-determinant factorizations
    if cfg.boundary.twist.is_some() {
        match qdet_factorization_twisted(&p) {
            Ok(_) => env.checks.push(CheckRecord::gauge("twisted Δ± factorization", 0.0, 1e-12)),
            Err(e) => {
                env.checks.push(CheckRecord::failed("twisted Δ± factorization", &e.to_string()))
            }
        }
    } else {
        let r = cfg.reflection_params().map_err(|e| e.to_string())?;
        match build_u_matrix(&p, &r) {
            Ok(chain) => {
                let samples = probe_nodes(cfg.numerics.seed, 7);
                match qdet_factorization_open(&chain, &samples) {
                    Ok(_) => {
                        env.checks.push(CheckRecord::gauge("open Δ± factorization", 0.0, 1e-9))
                    }
                    Err(e) => env
                        .checks
                        .push(CheckRecord::failed("open Δ± factorization", &e.to_string())),
                }
            }
            Err(e) => env.checks.push(CheckRecord::failed("U-matrix construction", &e.to_string())),
        }
    }
    Ok(())
}

fn spectrum(cfg: &RunConfig, env: &mut Envelope) -> TaskResult {
    let p = cfg.model_params().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.numerics.seed);
    if cfg.boundary.twist.is_some() {
        let t = cfg.twist_config().map_err(|e| e.to_string())?;
        let chain = build_monodromy_twisted(&p, &t).map_err(|e| e.to_string())?;
        let mut comm = 0.0f64;
        for _ in 0..5 {
            let (lam, mu) = rand_pair(&mut rng);
            comm = comm.max(chain.commutator_residual(lam, mu));
        }
        env.checks.push(CheckRecord::gauge("commuting family [t(λ), t(μ)]", comm, 1e-10));
        let nodes = probe_nodes(cfg.numerics.seed, 4);
        let mut opts = EigenPolyOptions::new(2, p.margin);
        opts.leak_tol = cfg.numerics.leak_tol;
        let charge = spinboson::twisted::charge_operator(p.n_t).map_err(|e| e.to_string())?;
        let records = eigenvalue_polynomials(&|x| chain.transfer_at(x), &nodes, &opts, Some(&charge))
            .map_err(|e| e.to_string())?;
        let holdout = records
            .iter()
            .filter(|r| r.trusted)
            .fold(0.0f64, |m, r| m.max(r.holdout_error));
        env.checks.push(CheckRecord::gauge("held-out node consistency (trusted)", holdout, 1e-7));
        env.checks.push(CheckRecord::warn(
            "trusted records",
            records.iter().filter(|r| r.trusted).count() as f64,
        ));
        env.spectra = spectrum_rows(&records);
    } else {
        let r = cfg.reflection_params().map_err(|e| e.to_string())?;
        let chain = build_u_matrix(&p, &r).map_err(|e| e.to_string())?;
        let mut comm = 0.0f64;
        for _ in 0..5 {
            let (lam, mu) = rand_pair(&mut rng);
            comm = comm.max(chain.commutator_residual(lam, mu));
        }
        env.checks.push(CheckRecord::gauge("commuting family [t(λ), t(μ)]", comm, 1e-9));
        let nodes = probe_nodes(cfg.numerics.seed, 9);
        let mut opts = EigenPolyOptions::new(6, p.margin);
        opts.parity_even = true;
        opts.leak_tol = cfg.numerics.leak_tol;
        let records = eigenvalue_polynomials(&|x| chain.transfer_at(x), &nodes, &opts, None)
            .map_err(|e| e.to_string())?;
        let holdout = records
            .iter()
            .filter(|r| r.trusted)
            .fold(0.0f64, |m, r| m.max(r.holdout_error));
        env.checks.push(CheckRecord::gauge("held-out node consistency (trusted)", holdout, 1e-7));
        // λ⁶ coefficient scalar and shared by every trusted record
        match chain.lambda6_coefficient() {
            Ok(a6) => {
                let mut dev = 0.0f64;
                for rec in records.iter().filter(|r| r.trusted) {
                    dev = dev.max((rec.coeffs.coeff(6) - a6).norm() / a6.norm().max(1e-12));
                }
                env.checks.push(CheckRecord::gauge(
                    "fitted λ⁶ equals the operator coefficient",
                    dev,
                    1e-8,
                ));
            }
            Err(e) => env.checks.push(CheckRecord::failed("λ⁶ coefficient scalar", &e.to_string())),
        }
        // Λ(η/2) constraint across the trusted spectrum
        let mut cdev = 0.0f64;
        for rec in records.iter().filter(|r| r.trusted) {
            let (d, _) = qdet_constraint(&p, &rec.coeffs).map_err(|e| e.to_string())?;
            cdev = cdev.max(d);
        }
        env.checks.push(CheckRecord::gauge("Λ(η/2) = Det_q T(-η/2)", cdev, 1e-9));
        env.spectra = spectrum_rows(&records);
    }
    Ok(())
}

fn bethe(cfg: &RunConfig, env: &mut Envelope) -> TaskResult {
    let p = cfg.model_params().map_err(|e| e.to_string())?;
    let t = cfg.twist_config().map_err(|e| e.to_string())?;
    let chain = build_monodromy_twisted(&p, &t).map_err(|e| e.to_string())?;
    let nodes = probe_nodes(cfg.numerics.seed, 4);
    let mut opts = EigenPolyOptions::new(2, p.margin);
    opts.leak_tol = cfg.numerics.leak_tol;
    let records = eigenvalue_polynomials(&|x| chain.transfer_at(x), &nodes, &opts, None)
        .map_err(|e| e.to_string())?;
    let bethe = bethe_spectrum_twisted(&p, &t, cfg.numerics.m_max, cfg.numerics.seed)
        .map_err(|e| e.to_string())?;
    let mut worst_res = 0.0f64;
    for (st, lam, rem) in &bethe {
        worst_res = worst_res.max(st.residual_inf);
        env.roots.push(RootRow {
            m: st.m,
            variant: "twisted".into(),
            roots: st.roots.iter().map(|&z| Cx::from_c(z)).collect(),
            residual: st.residual_inf,
        });
        let _ = (lam, rem);
    }
    env.checks.push(CheckRecord::gauge("Bethe residuals (accepted states)", worst_res, 1e-9));
    let polys: Vec<ScalarPolynomial> = bethe.iter().map(|(_, l, _)| l.clone()).collect();
    let rep = match_spectra(&polys, &records, 1e-7);
    for pr in &rep.pairs {
        env.matches.push(MatchRow {
            bethe_index: pr.bethe_index,
            exact_index: pr.exact_index,
            distance: pr.distance,
        });
    }
    env.checks.push(CheckRecord::gauge(
        "unmatched trusted records",
        rep.unmatched_trusted_exact.len() as f64,
        0.0,
    ));
    env.checks.push(CheckRecord::gauge(
        "max matched coefficient distance",
        rep.max_matched_distance,
        1e-7,
    ));
    // Ξ± bookkeeping (pair invariants and the K11 correspondence)
    let xi = t.xi_pair();
    let vieta = (xi.plus * xi.minus - t.det_k())
        .norm()
        .max((xi.plus + xi.minus - t.tr_k()).norm());
    env.checks.push(CheckRecord::gauge("Ξ+Ξ- = det K, Ξ+ + Ξ- = tr K", vieta, 1e-12));
    env.checks.push(CheckRecord::warn("|Ξ- - K11| (reported)", xi.k11_distance));
    env.spectra = spectrum_rows(&records);
    Ok(())
}

fn tq_check(cfg: &RunConfig, env: &mut Envelope) -> TaskResult {
    let p = cfg.model_params().map_err(|e| e.to_string())?;
    let r = cfg.reflection_params().map_err(|e| e.to_string())?;
    let chain = build_u_matrix(&p, &r).map_err(|e| e.to_string())?;
    let nodes = probe_nodes(cfg.numerics.seed, 9);
    let mut opts = EigenPolyOptions::new(6, p.margin);
    opts.parity_even = true;
    opts.leak_tol = cfg.numerics.leak_tol;
    let records = eigenvalue_polynomials(&|x| chain.transfer_at(x), &nodes, &opts, None)
        .map_err(|e| e.to_string())?;
    let lat = open_lattice(&p);
    let bd = bar_delta(&p, &r);
    let det_rhs = bd.minus(lat.x_s_plus) * bd.plus(lat.x_s_minus);
    let mut det_dev = 0.0f64;
    let mut constraint_dev = 0.0f64;
    let mut n_trusted = 0usize;
    for rec in records.iter().filter(|r| r.trusted && r.leak < 1e-10) {
        n_trusted += 1;
        let lhs = rec.coeffs.eval(lat.x_s_plus) * rec.coeffs.eval(lat.x_s_minus);
        det_dev = det_dev.max((lhs - det_rhs).norm() / det_rhs.norm().max(1e-300));
        let (d, _) = qdet_constraint(&p, &rec.coeffs).map_err(|e| e.to_string())?;
        constraint_dev = constraint_dev.max(d);
        // half-infinite boson recursion: decaying Q tail is the expected
        // signature of a true eigenvalue (diagnostic, not a gate)
        let mut q = vec![C64::new(1.0, 0.0)];
        let mut tail = 0.0f64;
        for k in 0..(p.n_t - p.margin).min(12) {
            let x = lat.x_b[k];
            let mut next = rec.coeffs.eval(x) * q[k];
            if k > 0 {
                next -= bd.minus(x) * q[k - 1];
            }
            next /= bd.plus(x);
            if k + 1 >= 8 {
                tail = tail.max(next.norm() / q[k].norm().max(1e-300));
            }
            q.push(next);
        }
        env.checks.push(CheckRecord::warn(
            format!("Q-recursion tail growth (record leak {:.1e})", rec.leak),
            tail,
        ));
    }
    if n_trusted == 0 {
        return Err("no well-trusted records for the TQ lattice checks".into());
    }
    env.checks.push(CheckRecord::gauge(
        "spin-lattice 2x2 determinant condition",
        det_dev,
        1e-7,
    ));
    env.checks.push(CheckRecord::gauge("Λ(η/2) = Det_q T(-η/2)", constraint_dev, 1e-9));
    // diagonal boundaries: the M = 0 TQ solution [S(λ)-S(-λ)]/λ is an
    // exact transfer eigenvalue (the constant-Q sector)
    if r.is_diagonal() {
        let m0 = {
            let mut odd = Vec::new();
            for k in 0..=bd.sextic.degree() {
                if k % 2 == 1 {
                    odd.push(bd.sextic.coeff(k));
                }
            }
            // [S(λ) - S(-λ)]/λ = 2 Σ_odd c_k λ^{k-1}
            let mut coeffs = vec![C64::new(0.0, 0.0); bd.sextic.degree()];
            for (i, &c) in odd.iter().enumerate() {
                coeffs[2 * i] = 2.0 * c;
            }
            ScalarPolynomial::new(coeffs)
        };
        let probe = nodes[0];
        let target = m0.eval(probe);
        let eig = biorthogonal_eigen(&chain.transfer_at(probe)).map_err(|e| e.to_string())?;
        let best = eig
            .values
            .iter()
            .map(|&v| (v - target).norm())
            .fold(f64::INFINITY, f64::min)
            / target.norm().max(1e-300);
        env.checks.push(CheckRecord::gauge("constant-Q sector eigenvalue (diagonal)", best, 1e-8));
    }
    env.spectra = spectrum_rows(&records);
    Ok(())
}

fn qc(cfg: &RunConfig, env: &mut Envelope) -> TaskResult {
    let p = cfg.model_params().map_err(|e| e.to_string())?;
    let qc = cfg.qc.as_ref().ok_or("the qc task needs a [qc] section")?;
    match qc {
        QcSection::OpenDiagonal { xi_p, xi_m, k_max } => {
            let exp = qc_open_diagonal_expansion(&p, xi_p.c(), xi_m.c(), 3)
                .map_err(|e| e.to_string())?;
            let scale = exp
                .orders
                .values()
                .fold(0.0f64, |m, o| m.max(o.max_coeff_norm()))
                .max(1e-300);
            env.checks.push(CheckRecord::gauge(
                "τ⁰ vanishes",
                exp.order(0).map(|o| o.max_coeff_norm()).unwrap_or(0.0) / scale,
                1e-9,
            ));
            let t1 = exp.order(1).ok_or("τ¹ missing")?;
            let mut t1_dev = 0.0f64;
            for k in 0..=t1.degree() {
                let (_, dev) = t1.coeff(k).edge_safe_scalar(p.margin);
                t1_dev = t1_dev.max(dev);
            }
            env.checks.push(CheckRecord::gauge("τ¹ scalar", t1_dev / scale, 1e-9));
            let sectors =
                qc_diag_tau2_spectrum(&exp, &p, *k_max).map_err(|e| e.to_string())?;
            let w = xi_p.c() * xi_m.c();
            let mut worst = 0.0f64;
            for sec in &sectors {
                for poly in &sec.eigen_polys {
                    let d = [true, false]
                        .iter()
                        .map(|&a| {
                            let cand = lambda2_closed(sec.k, p.z1, w, a);
                            let s =
                                poly.max_coeff_norm().max(cand.max_coeff_norm()).max(1e-300);
                            let n = poly.degree().max(cand.degree()) + 1;
                            (0..n)
                                .fold(0.0f64, |m, i| m.max((poly.coeff(i) - cand.coeff(i)).norm()))
                                / s
                        })
                        .fold(f64::INFINITY, f64::min);
                    worst = worst.max(d);
                }
            }
            env.checks.push(CheckRecord::gauge("τ² sector spectra = closed forms", worst, 1e-9));
            let mut ode = 0.0f64;
            for k in 0..=*k_max {
                let qb = qc_diag_q_poly(k, false, w).map_err(|e| e.to_string())?;
                ode = ode.max(
                    qc_diag_ode_residual_2(&qb, k, w).max_coeff_norm()
                        / qb.max_coeff_norm().max(1.0),
                );
                if k >= 1 {
                    let qa = qc_diag_q_poly(k, true, w).map_err(|e| e.to_string())?;
                    ode = ode.max(
                        qc_diag_ode_residual_1(&qa, k, w).max_coeff_norm()
                            / qa.max_coeff_norm().max(1.0),
                    );
                }
            }
            env.checks.push(CheckRecord::gauge("Q first-order ODEs exact", ode, 1e-12));
        }
        QcSection::OpenNondiagonal { mu1_m, nu1_m, xi1_m, xi0_p, xi1_p, lambda } => {
            let q = QcParamsNonDiag {
                mu1_m: mu1_m.c(),
                nu1_m: nu1_m.c(),
                xi1_m: xi1_m.c(),
                xi0_p: xi0_p.c(),
                xi1_p: xi1_p.c(),
                z0: p.z0,
                z1: p.z1,
                beta_c: p.beta_c,
                gamma_c: p.gamma_c,
                lambda: lambda.c(),
            };
            let m = qc_nondiag_match(&q, p.n_t.min(16), p.margin).map_err(|e| e.to_string())?;
            env.checks.push(CheckRecord::gauge("H hermitian (real inputs)", m.hermiticity, 1e-12));
            env.checks.push(CheckRecord::gauge(
                "displaced H commutes with n - S^z",
                m.charge_commutator_after_displacement,
                1e-10,
            ));
            env.checks.push(CheckRecord::gauge(
                "transfer η-order reproduces H",
                m.rel_residual,
                1e-7,
            ));
            env.checks.push(CheckRecord::warn("fit scale s", m.scale.norm()));
        }
        QcSection::Gaudin { u, v, x, m_max } => {
            let g = GaudinParams::new(*u, *v, *x).map_err(|e| e.to_string())?;
            let mut worst_ode = 0.0f64;
            let mut worst_zeta = 0.0f64;
            let mut printed_min = f64::INFINITY;
            for m in 1..=*m_max {
                let states = solve_gaudin(&g, m, cfg.numerics.seed).map_err(|e| e.to_string())?;
                for st in &states {
                    env.roots.push(RootRow {
                        m: st.m,
                        variant: "gaudin".into(),
                        roots: st.roots.iter().map(|&z| Cx::from_c(z)).collect(),
                        residual: st.residual_inf,
                    });
                    let qpoly = ScalarPolynomial::from_roots(&st.roots);
                    let zeta = gaudin_zeta(&st.roots).map_err(|e| e.to_string())?;
                    let direct: C64 =
                        st.roots.iter().map(|&rt| -C64::new(1.0, 0.0) / rt).sum();
                    worst_zeta = worst_zeta.max((zeta - direct).norm());
                    let (consistent, printed) = qc_gaudin_ode_residual(&g, &qpoly, zeta, m);
                    worst_ode = worst_ode.max(consistent.max_coeff_norm());
                    printed_min = printed_min.min(printed.max_coeff_norm());
                }
            }
            env.checks.push(CheckRecord::gauge("ζ = -Σ 1/λ_α", worst_zeta, 1e-10));
            env.checks.push(CheckRecord::gauge(
                "on-shell Gaudin ODE residual (consistent form)",
                worst_ode,
                1e-10,
            ));
            env.checks.push(CheckRecord::warn(
                "printed ODE variant residual (reported, nonzero on shell)",
                printed_min,
            ));
        }
    }
    Ok(())
}

fn scan(cfg: &RunConfig, env: &mut Envelope) -> TaskResult {
    let p = cfg.model_params().map_err(|e| e.to_string())?;
    let section = cfg.scan.as_ref().ok_or("the scan task needs a [scan] section")?;
    match section {
        ScanSection::Conjectured { chi_start, chi_step, chi_count, m_max } => {
            let r = cfg.reflection_params().map_err(|e| e.to_string())?;
            let chain = build_u_matrix(&p, &r).map_err(|e| e.to_string())?;
            let nodes = probe_nodes(cfg.numerics.seed, 9);
            let mut opts = EigenPolyOptions::new(6, p.margin);
            opts.parity_even = true;
            let records = eigenvalue_polynomials(&|x| chain.transfer_at(x), &nodes, &opts, None)
                .map_err(|e| e.to_string())?;
            let chis: Vec<C64> = (0..*chi_count)
                .map(|k| chi_start.c() + chi_step.c() * C64::new(k as f64, 0.0))
                .collect();
            let points = scan_conjectured(
                &p,
                &r,
                FactorizationVariant::Minus2,
                &chis,
                *m_max,
                &records,
                &nodes,
                cfg.numerics.seed,
            )
            .map_err(|e| e.to_string())?;
            for pt in &points {
                env.scan.push(ScanRow {
                    chi: Cx::from_c(pt.chi),
                    p_inf: Cx::from_c(pt.p_inf),
                    zeta: Cx::from_c(pt.zeta),
                    states: pt.states,
                    best_match: pt.best_match,
                    mean_residual: pt.mean_residual,
                });
            }
            env.checks.push(CheckRecord::gauge(
                "scan grid evaluated",
                (chis.len() - points.len()) as f64,
                0.0,
            ));
            // exploratory by design: match quality logged, never gated
            let best = points.iter().fold(f64::INFINITY, |m, pt| m.min(pt.best_match));
            env.checks.push(CheckRecord::warn("best spectral match over the grid", best));
        }
        ScanSection::Gaudin { points, m_max } => {
            for &[u, v, x] in points {
                let g = GaudinParams::new(u, v, x).map_err(|e| e.to_string())?;
                let mut states_total = 0usize;
                let mut worst = 0.0f64;
                for m in 1..=*m_max {
                    let states =
                        solve_gaudin(&g, m, cfg.numerics.seed).map_err(|e| e.to_string())?;
                    states_total += states.len();
                    for st in &states {
                        worst = worst.max(st.residual_inf);
                    }
                }
                env.scan.push(ScanRow {
                    chi: Cx([u, 0.0]),
                    p_inf: Cx([v, 0.0]),
                    zeta: Cx([x, 0.0]),
                    states: states_total,
                    best_match: f64::NAN,
                    mean_residual: worst,
                });
            }
            env.checks.push(CheckRecord::gauge("scan grid evaluated", 0.0, 0.0));
        }
    }
    Ok(())
}

// b_spectrum_recurrence is exercised through the library tests; keep the
// import wired for the tq-check extension point.
#[allow(unused_imports)]
use b_spectrum_recurrence as _b_spectrum_recurrence;
