//! Quasi-classical limit: Laurent expansion of the transfer matrices in
//! the quantum parameter η, the diagonal-boundary τ⁽²⁾ spectra with their
//! first-order Q ODEs, the twisted Gaudin system with its second-order
//! ODE, the non-diagonal quasi-classical hamiltonian, and the Fuchsian
//! equation for the modified Q.

use crate::error::{Error, Result};
use crate::fock::{embed_boson, embed_spin, make_boson_ops, make_spin_ops, FockSpinOperator};
use crate::open::ReflectionParams;
use crate::poly::{OperatorPolynomial, ScalarPolynomial};
use crate::spectral::{biorthogonal_eigen_matrix, newton_multistart, BetheState, BetheVariant, NewtonOptions};
use crate::yang_baxter::ModelParams;
use crate::C64;
use ndarray::{Array1, Array2};
use std::collections::BTreeMap;
use std::f64::consts::PI;

fn c1() -> C64 {
    C64::new(1.0, 0.0)
}

/// Laurent coefficients of an operator-polynomial family `t(λ; η)`.
#[derive(Clone, Debug)]
pub struct EtaExpansion {
    pub orders: BTreeMap<i32, OperatorPolynomial>,
    pub j_min: i32,
    pub j_max: i32,
}

impl EtaExpansion {
    pub fn order(&self, j: i32) -> Option<&OperatorPolynomial> {
        self.orders.get(&j)
    }

    /// Reconstruct the family at a given η.
    pub fn eval_eta(&self, eta: C64) -> OperatorPolynomial {
        let n_t = self.orders.values().next().expect("nonempty expansion").n_boson();
        let mut acc = OperatorPolynomial::zero(n_t);
        for (&j, op) in &self.orders {
            acc = acc.add(&op.scale(eta.powi(j)));
        }
        acc
    }

    /// Index of the first order whose coefficient is not a scalar multiple
    /// of the identity on the edge-safe subspace.
    pub fn first_non_scalar(&self, margin: usize, tol_rel: f64) -> Option<i32> {
        let scale = self
            .orders
            .values()
            .fold(0.0f64, |m, op| m.max(op.max_coeff_norm()))
            .max(1e-300);
        for (&j, op) in &self.orders {
            for k in 0..=op.degree() {
                let (_, dev) = op.coeff(k).edge_safe_scalar(margin);
                if dev > tol_rel * scale {
                    return Some(j);
                }
            }
        }
        None
    }
}

/// Extract Laurent coefficients `η^j`, `j in [j_min, j_max]`, by discrete
/// Fourier transform over a complex η-ring of the given radius.  Exact for
/// finite Laurent families up to rounding; a held-out reconstruction at a
/// different radius guards the window.
pub fn eta_expand(
    builder: &dyn Fn(C64) -> Result<OperatorPolynomial>,
    j_min: i32,
    j_max: i32,
    radius: f64,
) -> Result<EtaExpansion> {
    if j_max < j_min {
        return Err(Error::SampleSet("empty Laurent window".into()));
    }
    let span = (j_max - j_min + 1) as usize;
    let k_samples = 2 * span + 3;
    let mut samples = Vec::with_capacity(k_samples);
    let mut etas = Vec::with_capacity(k_samples);
    for k in 0..k_samples {
        let phi = 2.0 * PI * (k as f64) / (k_samples as f64);
        let eta = C64::new(radius * phi.cos(), radius * phi.sin());
        samples.push(builder(eta)?);
        etas.push(eta);
    }
    let n_t = samples[0].n_boson();
    let mut orders = BTreeMap::new();
    for j in j_min..=j_max {
        let mut acc = OperatorPolynomial::zero(n_t);
        for (s, &eta) in samples.iter().zip(etas.iter()) {
            acc = acc.add(&s.scale(eta.powi(-j) / C64::new(k_samples as f64, 0.0)));
        }
        orders.insert(j, acc);
    }
    let exp = EtaExpansion { orders, j_min, j_max };
    // held-out cross-validation at a different radius
    let eta_test = C64::new(0.83 * radius, 0.31 * radius);
    let direct = builder(eta_test)?;
    let recon = exp.eval_eta(eta_test);
    let dev = direct.sub(&recon).max_coeff_norm();
    let scale = direct.max_coeff_norm().max(1e-300);
    if dev > 1e-8 * scale {
        return Err(Error::SampleSet(format!(
            "held-out η reconstruction error {:.3e} (Laurent window [{j_min}, {j_max}] too small or family not Laurent)",
            dev / scale
        )));
    }
    Ok(exp)
}

/// The diagonal-boundary open transfer family normalized as
/// `t(λ; η) = (β γ / (η² ξ⁺ ξ⁻)) Σ_j η^j τ^{(j)}(λ)`: builds the raw
/// transfer at each η and rescales, so `orders[j] = τ^{(j)}`.
pub fn qc_open_diagonal_expansion(
    base: &ModelParams,
    xi_p: C64,
    xi_m: C64,
    j_max: i32,
) -> Result<EtaExpansion> {
    let builder = |eta: C64| -> Result<OperatorPolynomial> {
        let p = ModelParams::new(eta, base.z0, base.z1, base.beta_c, base.gamma_c, base.n_t, base.margin)?;
        let r = ReflectionParams::diagonal(xi_p, xi_m)?;
        let chain = crate::open::build_u_matrix(&p, &r)?;
        let norm = eta * eta * xi_p * xi_m / (base.beta_c * base.gamma_c);
        Ok(chain.transfer_poly().scale(norm))
    };
    // the composed double-row products span η^0..η^10 after rescaling
    eta_expand(&builder, 0, j_max.max(10), 0.45)
}

/// Closed forms `Λ^{(2)}_{k,a}` and `Λ^{(2)}_{k,b}` of the τ⁽²⁾ sector
/// eigenvalue polynomials.
pub fn lambda2_closed(k: usize, z1: C64, xi_prod: C64, branch_a: bool) -> ScalarPolynomial {
    let kk = C64::new(k as f64, 0.0);
    let c4 = -(2.0 * kk + z1);
    let c2 = if branch_a { -xi_prod * (z1 + c1()) } else { -xi_prod * (z1 - c1()) };
    ScalarPolynomial::new(vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0), c2, C64::new(0.0, 0.0), c4])
}

/// Result of diagonalizing τ⁽²⁾ in one `n - S_z = (2k-1)/2` sector.
#[derive(Clone, Debug)]
pub struct Tau2Sector {
    pub k: usize,
    /// Fitted eigenvalue polynomials (1 entry for k = 0, else 2).
    pub eigen_polys: Vec<ScalarPolynomial>,
    /// Max off-sector leakage of the τ⁽²⁾ coefficients, edge-safe relative.
    pub leakage: f64,
}

/// Sector-wise spectra of τ⁽²⁾ for `k <= k_max`.
pub fn qc_diag_tau2_spectrum(
    exp: &EtaExpansion,
    p: &ModelParams,
    k_max: usize,
) -> Result<Vec<Tau2Sector>> {
    let tau2 = exp
        .order(2)
        .ok_or_else(|| Error::Missing("τ⁽²⁾ not in the expansion window".into()))?;
    let n_t = p.n_t;
    let scale = tau2.max_coeff_norm().max(1e-300);
    let mut out = Vec::new();
    for k in 0..=k_max {
        // sector basis: |k, up>, |k-1, down>
        let mut idx = vec![k];
        if k >= 1 {
            idx.push(n_t + k - 1);
        }
        let d = idx.len();
        // leakage: off-sector entries of the τ² coefficients in these columns
        let mut leakage = 0.0f64;
        let keep = n_t - p.margin;
        for kk in 0..=tau2.degree() {
            let m = tau2.coeff(kk);
            let mm = m.matrix();
            for &col in &idx {
                for s in 0..2 {
                    for n in 0..keep {
                        let row = s * n_t + n;
                        if !idx.contains(&row) {
                            leakage = leakage.max(mm[(row, col)].norm());
                        }
                    }
                }
            }
        }
        let leakage = leakage / scale;
        if leakage > 1e-9 {
            return Err(Error::Numerics(format!(
                "sector k={k} leaks: off-block mass {leakage:.3e}"
            )));
        }
        // block polynomial: d x d matrices per λ-power
        let blocks: Vec<Array2<C64>> = (0..=tau2.degree())
            .map(|kk| {
                let m = tau2.coeff(kk);
                let mm = m.matrix();
                let mut b = Array2::<C64>::zeros((d, d));
                for (i, &r) in idx.iter().enumerate() {
                    for (j, &c) in idx.iter().enumerate() {
                        b[(i, j)] = mm[(r, c)];
                    }
                }
                b
            })
            .collect();
        let block_at = |x: C64| {
            let mut acc = Array2::<C64>::zeros((d, d));
            let mut xp = c1();
            for b in &blocks {
                acc = acc + b.mapv(|z| z * xp);
                xp *= x;
            }
            acc
        };
        // one biorthogonal basis at λ0; eigenvalue polynomials by fit
        let nodes = [
            C64::new(0.41, 0.23),
            C64::new(-0.52, 0.11),
            C64::new(0.87, -0.34),
            C64::new(0.13, 0.64),
            C64::new(-0.29, -0.47),
            C64::new(0.71, 0.52),
        ];
        let eig = biorthogonal_eigen_matrix(&block_at(nodes[0]))?;
        let deg = 4usize;
        let mut vand = Array2::<C64>::zeros((deg + 1, deg + 1));
        for (i, &x) in nodes[..deg + 1].iter().enumerate() {
            let mut xp = c1();
            for j in 0..=deg {
                vand[(i, j)] = xp;
                xp *= x;
            }
        }
        let mut eigen_polys = Vec::new();
        for which in 0..d {
            let mut lam = Vec::new();
            for &x in nodes.iter() {
                let bx = block_at(x);
                let v = eig.right.column(which).to_owned();
                let w = eig.left.column(which).to_owned();
                let bv = bx.dot(&v);
                let mut val = C64::new(0.0, 0.0);
                for r in 0..d {
                    val += w[r] * bv[r];
                }
                lam.push(val);
            }
            let rhs = Array1::from_iter(lam[..deg + 1].iter().copied());
            use ndarray_linalg::Solve;
            let sol = vand
                .solve(&rhs)
                .map_err(|e| Error::Numerics(format!("sector fit failed: {e}")))?;
            let poly = ScalarPolynomial::new(sol.to_vec());
            // held-out consistency
            let hold = (poly.eval(nodes[deg + 1]) - lam[deg + 1]).norm();
            if hold > 1e-8 * scale {
                return Err(Error::Numerics(format!(
                    "sector k={k} eigenvalue fit inconsistent: {hold:.3e}"
                )));
            }
            eigen_polys.push(poly);
        }
        out.push(Tau2Sector { k, eigen_polys, leakage });
    }
    Ok(out)
}

/// The two printed first-order ODE residual operators in `z = λ²`:
/// residual₁(Q) = z(z+w) Q' - (kz+w) Q  (solved by z (z+w)^{k-1}),
/// residual₂(Q) = (z+w) Q' - k Q        (solved by (z+w)^k),
/// with `w = ξ⁺ξ⁻`.  Both as exact polynomial arithmetic.
pub fn qc_diag_ode_residual_1(q: &ScalarPolynomial, k: usize, w: C64) -> ScalarPolynomial {
    let z_zw = ScalarPolynomial::new(vec![C64::new(0.0, 0.0), w, c1()]);
    let kz_w = ScalarPolynomial::new(vec![w, C64::new(k as f64, 0.0)]);
    z_zw.mul(&q.derivative()).sub(&kz_w.mul(q))
}

pub fn qc_diag_ode_residual_2(q: &ScalarPolynomial, k: usize, w: C64) -> ScalarPolynomial {
    let zw = ScalarPolynomial::new(vec![w, c1()]);
    zw.mul(&q.derivative()).sub(&q.scale(C64::new(k as f64, 0.0)))
}

/// Q polynomials in `z = λ²` paired to the Λ branches by the exponents of
/// the general solution: branch a (the `z1+1` coefficient) carries
/// `Q = z (z+w)^{k-1}`, branch b carries `Q = (z+w)^k`.
pub fn qc_diag_q_poly(k: usize, branch_a: bool, w: C64) -> Result<ScalarPolynomial> {
    let zw = ScalarPolynomial::new(vec![w, c1()]);
    let mut pw = ScalarPolynomial::one();
    if branch_a {
        if k == 0 {
            return Err(Error::Config(
                "branch a needs k >= 1 (the k = 0 sector is one dimensional)".into(),
            ));
        }
        for _ in 0..(k - 1) {
            pw = pw.mul(&zw);
        }
        Ok(ScalarPolynomial::new(vec![C64::new(0.0, 0.0), c1()]).mul(&pw))
    } else {
        for _ in 0..k {
            pw = pw.mul(&zw);
        }
        Ok(pw)
    }
}

/// Exponent data of the general solution
/// `Q ∝ z^{pz} (z+w)^{pw} exp(w a0 / 2z)`; the analyticity filter demands
/// `a0 = 0` and an integer `pz ∈ {0, 1}`.
pub fn qc_diag_general_exponents(a4: C64, a2: C64, a0: C64, z1: C64) -> (C64, C64, C64) {
    let pz = (c1() - a2 + a0 - z1) / 2.0;
    let pw = (-c1() - a4 + a2 - a0) / 2.0;
    (pz, pw, a0)
}

pub fn qc_diag_analytic_admissible(a4: C64, a2: C64, a0: C64, z1: C64) -> bool {
    let (pz, _pw, ess) = qc_diag_general_exponents(a4, a2, a0, z1);
    if ess.norm() > 1e-12 {
        return false;
    }
    (pz.im.abs() < 1e-12) && ((pz.re - 0.0).abs() < 1e-10 || (pz.re - 1.0).abs() < 1e-10)
}

/// Twisted Gaudin system for the Tavis-Cummings-type parametrization.
#[derive(Clone, Copy, Debug)]
pub struct GaudinParams {
    pub u: f64,
    pub v: f64,
    pub x: f64,
}

impl GaudinParams {
    pub fn new(u: f64, v: f64, x: f64) -> Result<Self> {
        if u == 0.0 || v == 0.0 || u.signum() != v.signum() {
            return Err(Error::Config("U, V must be nonzero and of the same sign".into()));
        }
        if (u - v).abs() < 1e-12 {
            return Err(Error::Config("V = U is a pole of the Gaudin coefficient".into()));
        }
        Ok(Self { u, v, x })
    }

    /// The linear coefficient `c1 = (X√U + 2(U-1)√V) / (√V (V-U))`.
    pub fn c1_coeff(&self) -> f64 {
        (self.x * self.u.abs().sqrt() + 2.0 * (self.u - 1.0) * self.v.abs().sqrt())
            / (self.v.abs().sqrt() * (self.v - self.u))
    }
}

/// Residuals of the Gaudin Bethe equations
/// `1/2 + (c1/2) λ_k - λ_k² = Σ_{l≠k} λ_k/(λ_k - λ_l)`.
pub fn qc_gaudin_residual(g: &GaudinParams, roots: &[C64]) -> Option<Vec<C64>> {
    let c1c = C64::new(g.c1_coeff(), 0.0);
    let m = roots.len();
    for i in 0..m {
        for j in (i + 1)..m {
            if (roots[i] - roots[j]).norm() < 1e-12 {
                return None;
            }
        }
    }
    Some(
        (0..m)
            .map(|k| {
                let lk = roots[k];
                let mut s = C64::new(0.0, 0.0);
                for (l, &ll) in roots.iter().enumerate() {
                    if l != k {
                        s += lk / (lk - ll);
                    }
                }
                C64::new(0.5, 0.0) + c1c * lk / 2.0 - lk * lk - s
            })
            .collect(),
    )
}

fn gaudin_jacobian(g: &GaudinParams, roots: &[C64]) -> Option<Array2<C64>> {
    let m = roots.len();
    qc_gaudin_residual(g, roots)?;
    let c1c = C64::new(g.c1_coeff(), 0.0);
    let mut jac = Array2::<C64>::zeros((m, m));
    for k in 0..m {
        let lk = roots[k];
        let mut diag = c1c / 2.0 - 2.0 * lk;
        for (l, &ll) in roots.iter().enumerate() {
            if l != k {
                // d/dλ_k [λ_k/(λ_k-λ_l)] = -λ_l/(λ_k-λ_l)²
                diag += ll / ((lk - ll) * (lk - ll));
                jac[(k, l)] = -lk / ((lk - ll) * (lk - ll));
            }
        }
        jac[(k, k)] = diag;
    }
    // residual = lhs - sum, so the sum's derivatives enter with a minus
    for k in 0..m {
        for l in 0..m {
            if k != l {
                jac[(k, l)] = -jac[(k, l)];
            } else {
                let lk = roots[k];
                let mut d = c1c / 2.0 - 2.0 * lk;
                for (l2, &ll) in roots.iter().enumerate() {
                    if l2 != k {
                        d += ll / ((lk - ll) * (lk - ll));
                    }
                }
                jac[(k, k)] = d;
            }
        }
    }
    Some(jac)
}

/// Solve the Gaudin Bethe system for `m` roots (multistart).
pub fn solve_gaudin(g: &GaudinParams, m: usize, seed: u64) -> Result<Vec<BetheState>> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut seeds = Vec::new();
    for _ in 0..40 {
        seeds.push(
            (0..m)
                .map(|_| C64::new(rng.random_range(-2.0..2.0), rng.random_range(-1.0..1.0)))
                .collect::<Vec<C64>>(),
        );
    }
    let res = |x: &[C64]| qc_gaudin_residual(g, x);
    let jac = |x: &[C64]| gaudin_jacobian(g, x);
    newton_multistart(&res, &jac, m, &seeds, BetheVariant::Gaudin, &NewtonOptions::default())
}

/// `ζ = Q'(0)/Q(0) = -Σ λ_α^{-1}` of a root polynomial.
pub fn gaudin_zeta(roots: &[C64]) -> Result<C64> {
    let q = ScalarPolynomial::from_roots(roots);
    let q0 = q.eval(C64::new(0.0, 0.0));
    if q0.norm() < 1e-14 {
        return Err(Error::Singularity("a Gaudin root sits at the origin".into()));
    }
    Ok(q.derivative().eval(C64::new(0.0, 0.0)) / q0)
}

/// Residual polynomial of the second-order Gaudin ODE consistent with the
/// Bethe system (vanishes identically on shell):
/// `λ Q'' - (1 + c1 λ - 2λ²) Q' - (2M λ - ζ) Q`.
/// The printed variant `λ Q'' - (1 + c1 λ + 2λ²) Q' + (M λ - ζ) Q` is
/// returned alongside for comparison (it does not vanish on shell).
pub fn qc_gaudin_ode_residual(
    g: &GaudinParams,
    q: &ScalarPolynomial,
    zeta: C64,
    m: usize,
) -> (ScalarPolynomial, ScalarPolynomial) {
    let c1c = C64::new(g.c1_coeff(), 0.0);
    let lam = ScalarPolynomial::new(vec![C64::new(0.0, 0.0), c1()]);
    let qp = q.derivative();
    let qpp = qp.derivative();
    let bracket_consistent =
        ScalarPolynomial::new(vec![c1(), c1c, C64::new(-2.0, 0.0)]);
    let last_consistent =
        ScalarPolynomial::new(vec![-zeta, C64::new(2.0 * m as f64, 0.0)]);
    let consistent = lam
        .mul(&qpp)
        .sub(&bracket_consistent.mul(&qp))
        .sub(&last_consistent.mul(q));
    let bracket_printed = ScalarPolynomial::new(vec![c1(), c1c, C64::new(2.0, 0.0)]);
    let last_printed = ScalarPolynomial::new(vec![-zeta, C64::new(m as f64, 0.0)]);
    let printed = lam
        .mul(&qpp)
        .sub(&bracket_printed.mul(&qp))
        .add(&last_printed.mul(q));
    (consistent, printed)
}

/// Parameters of the non-diagonal quasi-classical construction; the η
/// scalings of the boundary entries are applied exactly as printed:
/// `μ⁻ = η μ1⁻`, `ν⁻ = η ν1⁻`, `ξ⁻ = η ξ1⁻`,
/// `μ⁺ = η (β/γ)(μ1⁻ + ν1⁻)`, `ν⁺ = 0`, `ξ⁺ = -β²/η + ξ0⁺ + η ξ1⁺`,
/// with `z0 -> z0/η` in the spin Lax operator.
#[derive(Clone, Debug)]
pub struct QcParamsNonDiag {
    pub mu1_m: C64,
    pub nu1_m: C64,
    pub xi1_m: C64,
    pub xi0_p: C64,
    pub xi1_p: C64,
    pub z0: C64,
    pub z1: C64,
    pub beta_c: C64,
    pub gamma_c: C64,
    /// The spectral point the couplings refer to.
    pub lambda: C64,
}

/// Coupling constants of the printed self-adjoint hamiltonian.
#[derive(Clone, Copy, Debug)]
pub struct QcCouplings {
    pub omega0: C64,
    pub delta_sz: C64,
    pub delta_sx: C64,
    pub g: C64,
    pub alpha_drive: C64,
}

impl QcParamsNonDiag {
    pub fn couplings(&self) -> QcCouplings {
        let l2 = self.lambda * self.lambda;
        let z02 = self.z0 * self.z0;
        let b2 = self.beta_c * self.beta_c;
        QcCouplings {
            omega0: 2.0 * (z02 - l2),
            delta_sz: 2.0 * (l2 - b2 * (self.xi1_m - self.z1)),
            delta_sx: -2.0 * b2 * self.z0 * self.nu1_m,
            g: 2.0 * self.beta_c * self.z0,
            alpha_drive: self.beta_c / 2.0 * self.nu1_m * (l2 - z02),
        }
    }

    /// `H = Ω0 n + Δ_sz S_z + (Δ_sx/2)(S⁺+S⁻) + g (S⁺a† + S⁻a) + 2α(a+a†)`,
    /// optionally with the bosonic displacement `a -> a + shift`.
    pub fn hamiltonian(&self, n_t: usize, shift: C64) -> Result<FockSpinOperator> {
        let b = make_boson_ops(n_t)?;
        let s = make_spin_ops();
        let idb = Array2::<C64>::eye(n_t);
        let a_sh = &b.a + &idb.mapv(|z: C64| z * shift);
        let adag_sh = &b.adag + &idb.mapv(|z: C64| z * shift);
        let a = embed_boson(n_t, &a_sh)?;
        let adag = embed_boson(n_t, &adag_sh)?;
        let num = FockSpinOperator::from_matrix(n_t, adag.matrix().dot(a.matrix()))?;
        let sz = embed_spin(n_t, &s.sz)?;
        let sp = embed_spin(n_t, &s.sp)?;
        let sm = embed_spin(n_t, &s.sm)?;
        let c = self.couplings();
        Ok(num
            .scale(c.omega0)
            .add(&sz.scale(c.delta_sz))
            .add(&sp.add(&sm).scale(c.delta_sx / 2.0))
            .add(&sp.mul(&adag).add(&sm.mul(&a)).scale(c.g))
            .add(&a.add(&adag).scale(2.0 * c.alpha_drive)))
    }

    /// Boundary matrices with the printed η scalings (unnormalized form
    /// `K(λ) = [[ξ± + λ, λ μ±], [λ ν±, ξ± - λ]]`).
    fn k_poly(&self, eta: C64, plus: bool) -> [[ScalarPolynomial; 2]; 2] {
        let (xi, mu, nu) = if plus {
            (
                -self.beta_c * self.beta_c / eta + self.xi0_p + eta * self.xi1_p,
                eta * (self.beta_c / self.gamma_c) * (self.mu1_m + self.nu1_m),
                C64::new(0.0, 0.0),
            )
        } else {
            (eta * self.xi1_m, eta * self.mu1_m, eta * self.nu1_m)
        };
        [
            [
                ScalarPolynomial::new(vec![xi, c1()]),
                ScalarPolynomial::new(vec![C64::new(0.0, 0.0), mu]),
            ],
            [
                ScalarPolynomial::new(vec![C64::new(0.0, 0.0), nu]),
                ScalarPolynomial::new(vec![xi, -c1()]),
            ],
        ]
    }

    /// Transfer operator at the spectral point for one η (with `z0 -> z0/η`).
    pub fn transfer_at_eta(&self, n_t: usize, margin: usize, eta: C64) -> Result<FockSpinOperator> {
        let p = ModelParams::new(
            eta,
            self.z0 / eta,
            self.z1,
            self.beta_c,
            self.gamma_c,
            n_t,
            margin,
        )?;
        let bulk = crate::yang_baxter::bulk_monodromy(&p)?;
        let h = eta * C64::new(0.5, 0.0);
        let t_fwd = bulk.compose_affine(c1(), -h);
        let t_bwd = bulk.compose_affine(-c1(), -h).aux_transpose().sigma_y_conjugate();
        let km = {
            let k = self.k_poly(eta, false);
            [
                [k[0][0].shifted(-h), k[0][1].shifted(-h)],
                [k[1][0].shifted(-h), k[1][1].shifted(-h)],
            ]
        };
        let u = t_fwd.right_scalar_mat(&km).mul(&t_bwd);
        let kp = {
            let k = self.k_poly(eta, true);
            // K_+(λ-η/2) = (1/2) K(λ+η/2, +)
            [
                [k[0][0].shifted(h).scale(C64::new(0.5, 0.0)), k[0][1].shifted(h).scale(C64::new(0.5, 0.0))],
                [k[1][0].shifted(h).scale(C64::new(0.5, 0.0)), k[1][1].shifted(h).scale(C64::new(0.5, 0.0))],
            ]
        };
        let mut transfer = OperatorPolynomial::zero(n_t);
        for i in 0..2 {
            for j in 0..2 {
                transfer = transfer.add(&u.e[j][i].mul_scalar_poly(&kp[i][j]));
            }
        }
        Ok(transfer.eval(self.lambda))
    }
}

/// Operator-valued Laurent coefficients of a plain operator family.
pub fn eta_expand_ops(
    builder: &dyn Fn(C64) -> Result<FockSpinOperator>,
    j_min: i32,
    j_max: i32,
    radius: f64,
) -> Result<BTreeMap<i32, FockSpinOperator>> {
    let wrap = |eta: C64| -> Result<OperatorPolynomial> {
        Ok(OperatorPolynomial::constant(builder(eta)?))
    };
    let exp = eta_expand(&wrap, j_min, j_max, radius)?;
    Ok(exp
        .orders
        .into_iter()
        .map(|(j, p)| {
            let n_t = p.n_boson();
            (j, if p.is_zero() { FockSpinOperator::zeros(n_t) } else { p.coeff(0) })
        })
        .collect())
}

/// Outcome of matching the first non-scalar η order against the printed
/// hamiltonian: `τ^{(j0)} ≈ s H + c Id` on the edge-safe subspace.
#[derive(Clone, Debug)]
pub struct QcNonDiagMatch {
    pub j0: i32,
    pub scale: C64,
    pub shift: C64,
    pub rel_residual: f64,
    pub hermiticity: f64,
    pub charge_commutator_after_displacement: f64,
}

/// Expand the non-diagonal transfer family in η, locate the first
/// non-scalar order and fit it against the printed hamiltonian.
pub fn qc_nondiag_match(q: &QcParamsNonDiag, n_t: usize, margin: usize) -> Result<QcNonDiagMatch> {
    let builder = |eta: C64| q.transfer_at_eta(n_t, margin, eta);
    let orders = eta_expand_ops(&builder, -4, 6, 0.4)?;
    let scale_all = orders
        .values()
        .fold(0.0f64, |m, op| m.max(op.max_abs()))
        .max(1e-300);
    let mut j0 = None;
    for (&j, op) in &orders {
        let (_, dev) = op.edge_safe_scalar(margin);
        if dev > 1e-8 * scale_all {
            j0 = Some(j);
            break;
        }
    }
    let j0 = j0.ok_or_else(|| Error::Numerics("no non-scalar η order found".into()))?;
    let tau = &orders[&j0];
    let h = q.hamiltonian(n_t, C64::new(0.0, 0.0))?;
    // hermiticity of H for real inputs
    let hermiticity = h.sub(&h.adjoint()).max_abs() / h.max_abs().max(1e-300);
    // least squares for (s, c) over the edge-safe block
    let keep = n_t - margin;
    let tm = tau.matrix();
    let hm = h.matrix();
    let mut a11 = C64::new(0.0, 0.0);
    let mut a12 = C64::new(0.0, 0.0);
    let mut a22 = C64::new(0.0, 0.0);
    let mut b1 = C64::new(0.0, 0.0);
    let mut b2 = C64::new(0.0, 0.0);
    for sr in 0..2 {
        for nr in 0..keep {
            let i = sr * n_t + nr;
            for sc in 0..2 {
                for nc in 0..keep {
                    let j = sc * n_t + nc;
                    let hv = hm[(i, j)];
                    let dv = if i == j { c1() } else { C64::new(0.0, 0.0) };
                    let tv = tm[(i, j)];
                    a11 += hv.conj() * hv;
                    a12 += hv.conj() * dv;
                    a22 += dv.conj() * dv;
                    b1 += hv.conj() * tv;
                    b2 += dv.conj() * tv;
                }
            }
        }
    }
    let det = a11 * a22 - a12 * a12.conj();
    let s = (b1 * a22 - a12 * b2) / det;
    let c = (a11 * b2 - a12.conj() * b1) / det;
    let mut resid = 0.0f64;
    let mut tnorm = 0.0f64;
    for sr in 0..2 {
        for nr in 0..keep {
            let i = sr * n_t + nr;
            for sc in 0..2 {
                for nc in 0..keep {
                    let j = sc * n_t + nc;
                    let dv = if i == j { c1() } else { C64::new(0.0, 0.0) };
                    resid = resid.max((tm[(i, j)] - s * hm[(i, j)] - c * dv).norm());
                    tnorm = tnorm.max(tm[(i, j)].norm());
                }
            }
        }
    }
    // displaced hamiltonian commutes with the charge n - S^z
    let shift = q.beta_c * q.nu1_m / 2.0;
    let h_disp = q.hamiltonian(n_t, shift)?;
    let charge = crate::twisted::charge_operator(n_t)?;
    let comm = h_disp.commutator(&charge).edge_safe_max(margin)
        / h_disp.max_abs().max(1e-300);
    Ok(QcNonDiagMatch {
        j0,
        scale: s,
        shift: c,
        rel_residual: resid / tnorm.max(1e-300),
        hermiticity,
        charge_commutator_after_displacement: comm,
    })
}

/// The printed polynomials of the Fuchsian equation
/// `(1/2) Λ₋₂ Q̃'' + R Q̃' + U Q̃ = Λ₀ Q̃`.
pub fn fuchsian_polys(q: &QcParamsNonDiag) -> (ScalarPolynomial, ScalarPolynomial, ScalarPolynomial) {
    let b = q.beta_c;
    let g = q.gamma_c;
    let z0 = q.z0;
    let z02 = z0 * z0;
    let z1 = q.z1;
    let b2 = b * b;
    let bg = b * g;
    let zero = C64::new(0.0, 0.0);
    // Λ₋₂(λ) = -β³γ λ²(λ² - z0²)
    let lam_m2 = ScalarPolynomial::new(vec![zero, zero, b2 * bg * z02, zero, -b2 * bg]);
    // R(λ) = -(βγ/2) λ [2λ⁴ - λ²(2z0² + β²(1-2z1+2ξ1⁻)) + β² z0²(1+2z1-2ξ1⁻)]
    let r_c1 = -(bg / 2.0) * b2 * z02 * (c1() + 2.0 * z1 - 2.0 * q.xi1_m);
    let r_c3 = (bg / 2.0) * (2.0 * z02 + b2 * (c1() - 2.0 * z1 + 2.0 * q.xi1_m));
    let r_c5 = -(bg / 2.0) * 2.0;
    let r_poly = ScalarPolynomial::new(vec![zero, r_c1, zero, r_c3, zero, r_c5]);
    // U(λ) as printed (λ⁴, λ², λ⁰ coefficients)
    let u4 = -(bg / 2.0) * (q.mu1_m * q.nu1_m * b2 + 2.0 * (z1 - q.xi1_m - q.xi1_p));
    let u2 = -(bg / 2.0)
        * (bg / 4.0)
        * (-4.0 * z0 * q.xi0_p
            + b2 * (C64::new(3.0, 0.0) - 4.0 * q.xi1_m + 4.0 * z1 * (c1() + q.xi1_m))
            + 2.0 * z02 * (2.0 * z1 + q.mu1_m * q.nu1_m * b2 + 2.0 * (c1() - q.xi1_m - q.xi1_p)));
    let u0 = -(bg / 2.0) * (-(b2 * bg / 4.0) * z02 * (c1() + 4.0 * z1 * q.xi1_m));
    let u_poly = ScalarPolynomial::new(vec![u0, zero, u2, zero, u4]);
    (lam_m2, r_poly, u_poly)
}

/// Residual polynomial of the Fuchsian equation for a given even `Λ0`
/// (coefficients `[Λ0⁽⁰⁾, Λ0⁽¹⁾, Λ0⁽²⁾]` on `1, λ², λ⁴`).
pub fn qc_fuchsian_residual(
    q: &QcParamsNonDiag,
    q_tilde: &ScalarPolynomial,
    lambda0: [C64; 3],
) -> ScalarPolynomial {
    let (lam_m2, r_poly, u_poly) = fuchsian_polys(q);
    let zero = C64::new(0.0, 0.0);
    let lam0 = ScalarPolynomial::new(vec![lambda0[0], zero, lambda0[1], zero, lambda0[2]]);
    lam_m2
        .scale(C64::new(0.5, 0.0))
        .mul(&q_tilde.derivative().derivative())
        .add(&r_poly.mul(&q_tilde.derivative()))
        .add(&u_poly.mul(q_tilde))
        .sub(&lam0.mul(q_tilde))
}

/// Determine `Λ0` by least squares so the Fuchsian residual is as small
/// as possible (exact for admissible polynomial Q̃).
pub fn qc_fuchsian_solve_lambda0(
    q: &QcParamsNonDiag,
    q_tilde: &ScalarPolynomial,
) -> Result<[C64; 3]> {
    use ndarray_linalg::Solve;
    let zero = [C64::new(0.0, 0.0); 3];
    let base = qc_fuchsian_residual(q, q_tilde, zero);
    // residual(Λ0) = base - Σ_i Λ0_i λ^{2i} Q̃: linear least squares
    let n = base.degree().max(q_tilde.degree() + 4) + 1;
    let mut ata = Array2::<C64>::zeros((3, 3));
    let mut atb = Array1::<C64>::zeros(3);
    let col = |i: usize| -> Vec<C64> {
        let zerov = C64::new(0.0, 0.0);
        let mut shift = vec![zerov; 2 * i];
        shift.push(c1());
        let xkpoly = ScalarPolynomial::new(shift);
        let prod = xkpoly.mul(q_tilde);
        (0..n).map(|k| prod.coeff(k)).collect()
    };
    let cols: Vec<Vec<C64>> = (0..3).map(col).collect();
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += cols[i][k].conj() * cols[j][k];
            }
            ata[(i, j)] = acc;
        }
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..n {
            acc += cols[i][k].conj() * base.coeff(k);
        }
        atb[i] = acc;
    }
    let sol = ata
        .solve(&atb)
        .map_err(|e| Error::Numerics(format!("Λ0 solve failed: {e}")))?;
    Ok([sol[0], sol[1], sol[2]])
}
