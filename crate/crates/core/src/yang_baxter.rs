//! Rational R-matrix, boson/spin Lax operators, quantum determinants and
//! checks of the RLL and reflection relations.

use crate::error::{Error, Result};
use crate::fock::{make_boson_ops, make_spin_ops, tensor_embed, FockSpinOperator};
use crate::poly::{OperatorPolynomial, ScalarPolynomial};
use crate::C64;
use ndarray::Array2;

/// Scalar parameters of the two-site spin⊗boson composition.
///
/// `beta_c`, `gamma_c` are the boson Lax couplings (the `_c` suffix keeps
/// them apart from the boundary parameters of the open chain).
#[derive(Clone, Debug)]
pub struct ModelParams {
    pub eta: C64,
    pub z0: C64,
    pub z1: C64,
    pub beta_c: C64,
    pub gamma_c: C64,
    pub n_t: usize,
    pub margin: usize,
}

impl ModelParams {
    pub fn new(
        eta: C64,
        z0: C64,
        z1: C64,
        beta_c: C64,
        gamma_c: C64,
        n_t: usize,
        margin: usize,
    ) -> Result<Self> {
        if eta.norm() == 0.0 {
            return Err(Error::Config("quantum parameter eta must be nonzero".into()));
        }
        if (beta_c * gamma_c).norm() == 0.0 {
            return Err(Error::Config("boson Lax couplings beta_c*gamma_c must be nonzero".into()));
        }
        if n_t < 8 {
            return Err(Error::Config(format!("truncation n_t = {n_t} < 8")));
        }
        if margin >= n_t {
            return Err(Error::Config("margin must be below the truncation level".into()));
        }
        Ok(Self { eta, z0, z1, beta_c, gamma_c, n_t, margin })
    }

    /// Desk-scale defaults with the given truncation.
    pub fn desk(n_t: usize) -> Self {
        Self::new(
            C64::new(1.0, 0.0),
            C64::new(0.3, 0.0),
            C64::new(0.7, 0.0),
            C64::new(0.8, 0.0),
            C64::new(0.9, 0.0),
            n_t,
            4,
        )
        .expect("desk defaults are valid")
    }
}

/// 2x2 matrix over operator polynomials (auxiliary-space indices).
#[derive(Clone, Debug)]
pub struct OpMatrix2 {
    pub e: [[OperatorPolynomial; 2]; 2],
}

impl OpMatrix2 {
    pub fn n_boson(&self) -> usize {
        self.e[0][0].n_boson()
    }

    /// Matrix product; operator coefficient order follows matrix order.
    pub fn mul(&self, other: &Self) -> Self {
        let mk = |i: usize, j: usize| {
            self.e[i][0]
                .mul(&other.e[0][j])
                .add(&self.e[i][1].mul(&other.e[1][j]))
        };
        Self { e: [[mk(0, 0), mk(0, 1)], [mk(1, 0), mk(1, 1)]] }
    }

    /// Left multiplication by a constant 2x2 complex matrix.
    pub fn left_const(&self, g: &Array2<C64>) -> Self {
        let mk = |i: usize, j: usize| {
            self.e[0][j]
                .scale(g[(i, 0)])
                .add(&self.e[1][j].scale(g[(i, 1)]))
        };
        Self { e: [[mk(0, 0), mk(0, 1)], [mk(1, 0), mk(1, 1)]] }
    }

    /// Right multiplication by a constant 2x2 complex matrix.
    pub fn right_const(&self, g: &Array2<C64>) -> Self {
        let mk = |i: usize, j: usize| {
            self.e[i][0]
                .scale(g[(0, j)])
                .add(&self.e[i][1].scale(g[(1, j)]))
        };
        Self { e: [[mk(0, 0), mk(0, 1)], [mk(1, 0), mk(1, 1)]] }
    }

    /// Left multiplication by a 2x2 matrix of scalar polynomials.
    pub fn left_scalar_mat(&self, g: &[[ScalarPolynomial; 2]; 2]) -> Self {
        let mk = |i: usize, j: usize| {
            self.e[0][j]
                .mul_scalar_poly(&g[i][0])
                .add(&self.e[1][j].mul_scalar_poly(&g[i][1]))
        };
        Self { e: [[mk(0, 0), mk(0, 1)], [mk(1, 0), mk(1, 1)]] }
    }

    /// Right multiplication by a 2x2 matrix of scalar polynomials.
    pub fn right_scalar_mat(&self, g: &[[ScalarPolynomial; 2]; 2]) -> Self {
        let mk = |i: usize, j: usize| {
            self.e[i][0]
                .mul_scalar_poly(&g[0][j])
                .add(&self.e[i][1].mul_scalar_poly(&g[1][j]))
        };
        Self { e: [[mk(0, 0), mk(0, 1)], [mk(1, 0), mk(1, 1)]] }
    }

    /// Entrywise substitution `λ -> s λ + t`.
    pub fn compose_affine(&self, s: C64, t: C64) -> Self {
        let mk = |i: usize, j: usize| self.e[i][j].compose_affine(s, t);
        Self { e: [[mk(0, 0), mk(0, 1)], [mk(1, 0), mk(1, 1)]] }
    }

    /// Auxiliary-space transpose.
    pub fn aux_transpose(&self) -> Self {
        Self {
            e: [
                [self.e[0][0].clone(), self.e[1][0].clone()],
                [self.e[0][1].clone(), self.e[1][1].clone()],
            ],
        }
    }

    /// `σ^y M σ^y = [[m11, -m10], [-m01, m00]]` in (row, col) indexing
    /// `[[m00, m01], [m10, m11]]`.
    pub fn sigma_y_conjugate(&self) -> Self {
        let minus = C64::new(-1.0, 0.0);
        Self {
            e: [
                [self.e[1][1].clone(), self.e[1][0].scale(minus)],
                [self.e[0][1].scale(minus), self.e[0][0].clone()],
            ],
        }
    }

    pub fn trace(&self) -> OperatorPolynomial {
        self.e[0][0].add(&self.e[1][1])
    }

    pub fn eval(&self, x: C64) -> [[FockSpinOperator; 2]; 2] {
        [
            [self.e[0][0].eval(x), self.e[0][1].eval(x)],
            [self.e[1][0].eval(x), self.e[1][1].eval(x)],
        ]
    }
}

/// Rational six-vertex R-matrix on C^2 ⊗ C^2, basis index `2*a1 + a2`.
pub fn r_matrix(lambda: C64, mu: C64, eta: C64) -> Result<Array2<C64>> {
    let den = lambda - mu + eta;
    if den.norm() < 1e-14 * (lambda.norm() + mu.norm() + eta.norm()).max(1.0) {
        return Err(Error::Singularity(format!(
            "R-matrix pole: lambda - mu = -eta (lambda={lambda}, mu={mu})"
        )));
    }
    let b = (lambda - mu) / den;
    let c = eta / den;
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let mut r = Array2::from_elem((4, 4), zero);
    r[(0, 0)] = one;
    r[(3, 3)] = one;
    r[(1, 1)] = b;
    r[(2, 2)] = b;
    r[(1, 2)] = c;
    r[(2, 1)] = c;
    Ok(r)
}

/// Boson Lax operator, entries embedded on the joint space:
/// `[[λ - η z1 - η n, β adag], [γ a, -βγ/η]]`.
pub fn lax_boson(p: &ModelParams) -> Result<OpMatrix2> {
    let b = make_boson_ops(p.n_t)?;
    let id2 = Array2::eye(2);
    let a = tensor_embed(&b.a, &id2)?;
    let adag = tensor_embed(&b.adag, &id2)?;
    let num = tensor_embed(&b.num, &id2)?;
    let idop = FockSpinOperator::identity(p.n_t);

    let e00 = OperatorPolynomial::from_parts(vec![
        num.scale(-p.eta).add(&idop.scale(-p.eta * p.z1)),
        idop.clone(),
    ]);
    let e01 = OperatorPolynomial::constant(adag.scale(p.beta_c));
    let e10 = OperatorPolynomial::constant(a.scale(p.gamma_c));
    let e11 = OperatorPolynomial::constant(idop.scale(-p.beta_c * p.gamma_c / p.eta));
    Ok(OpMatrix2 { e: [[e00, e01], [e10, e11]] })
}

/// Spin Lax operator:
/// `[[λ - η z0 + η S^z, η S^-], [η S^+, λ - η z0 - η S^z]]`.
pub fn lax_spin(p: &ModelParams) -> Result<OpMatrix2> {
    let s = make_spin_ops();
    let idb = Array2::eye(p.n_t);
    let sz = tensor_embed(&idb, &s.sz)?;
    let sp = tensor_embed(&idb, &s.sp)?;
    let sm = tensor_embed(&idb, &s.sm)?;
    let idop = FockSpinOperator::identity(p.n_t);

    let e00 = OperatorPolynomial::from_parts(vec![
        sz.scale(p.eta).add(&idop.scale(-p.eta * p.z0)),
        idop.clone(),
    ]);
    let e01 = OperatorPolynomial::constant(sm.scale(p.eta));
    let e10 = OperatorPolynomial::constant(sp.scale(p.eta));
    let e11 = OperatorPolynomial::from_parts(vec![
        sz.scale(-p.eta).add(&idop.scale(-p.eta * p.z0)),
        idop,
    ]);
    Ok(OpMatrix2 { e: [[e00, e01], [e10, e11]] })
}

/// Bulk monodromy `T(λ) = L_b(λ) L_s(λ)`.
pub fn bulk_monodromy(p: &ModelParams) -> Result<OpMatrix2> {
    Ok(lax_boson(p)?.mul(&lax_spin(p)?))
}

/// Quantum determinant `A(λ+η/2) D(λ-η/2) - B(λ+η/2) C(λ-η/2)` of a 2x2
/// operator-polynomial matrix; must be scalar on the edge-safe subspace.
pub fn qdet(m: &OpMatrix2, eta: C64, margin: usize) -> Result<ScalarPolynomial> {
    let half = eta * C64::new(0.5, 0.0);
    let a_plus = m.e[0][0].shifted(half);
    let d_minus = m.e[1][1].shifted(-half);
    let b_plus = m.e[0][1].shifted(half);
    let c_minus = m.e[1][0].shifted(-half);
    let det = a_plus.mul(&d_minus).sub(&b_plus.mul(&c_minus));
    operator_poly_to_scalar(&det, margin, "quantum determinant")
}

/// Quantum determinant of a Lax matrix (same composition rule).
pub fn qdet_lax(l: &OpMatrix2, eta: C64, margin: usize) -> Result<ScalarPolynomial> {
    qdet(l, eta, margin)
}

/// Extract the scalar polynomial from an operator polynomial that is
/// proportional to the identity on the edge-safe subspace.
pub fn operator_poly_to_scalar(
    p: &OperatorPolynomial,
    margin: usize,
    context: &str,
) -> Result<ScalarPolynomial> {
    let scale = p.max_coeff_norm().max(1.0);
    let tol = 1e-10 * scale;
    let mut coeffs = Vec::with_capacity(p.degree() + 1);
    for k in 0..=p.degree() {
        let c = p.coeff(k);
        let z = c.expect_scalar(margin, tol, &format!("{context} coefficient of λ^{k}"))?;
        coeffs.push(z);
    }
    Ok(ScalarPolynomial::new(coeffs))
}

/// Product of the two Lax quantum determinants (the bulk quantum
/// determinant of `T = L_b L_s`).
pub fn qdet_bulk_scalar(p: &ModelParams) -> Result<ScalarPolynomial> {
    let db = qdet_lax(&lax_boson(p)?, p.eta, p.margin)?;
    let ds = qdet_lax(&lax_spin(p)?, p.eta, p.margin)?;
    Ok(db.mul(&ds))
}

/// Closed forms of the Lax quantum determinants.
pub fn qdet_boson_closed(p: &ModelParams) -> ScalarPolynomial {
    // -(βγ/η)(λ - (z1 - 1/2) η)
    ScalarPolynomial::linear(p.eta * (p.z1 - C64::new(0.5, 0.0)))
        .scale(-p.beta_c * p.gamma_c / p.eta)
}

pub fn qdet_spin_closed(p: &ModelParams) -> ScalarPolynomial {
    // (λ - η z0 - η)(λ - η z0 + η)
    ScalarPolynomial::linear(p.eta * p.z0 + p.eta)
        .mul(&ScalarPolynomial::linear(p.eta * p.z0 - p.eta))
}

/// Max-norm residual of the RLL relation
/// `R12(λ-λ') L1(λ) L2(λ') - L2(λ') L1(λ) R12(λ-λ')`
/// restricted to the edge-safe quantum subspace (all auxiliary indices).
pub fn check_rll(l: &OpMatrix2, lambda: C64, lambda_p: C64, eta: C64, margin: usize) -> Result<f64> {
    let r = r_matrix(lambda, lambda_p, eta)?;
    let lv = l.eval(lambda);
    let lp = l.eval(lambda_p);
    let n_t = l.n_boson();
    let dq = 2 * n_t;

    // blocks[(A,B)] of L1(λ)L2(λ') and L2(λ')L1(λ), A=(a1,a2), B=(b1,b2)
    let mut lhs = vec![vec![FockSpinOperator::zeros(n_t); 4]; 4];
    let mut rhs = vec![vec![FockSpinOperator::zeros(n_t); 4]; 4];
    for a1 in 0..2 {
        for a2 in 0..2 {
            for b1 in 0..2 {
                for b2 in 0..2 {
                    let fwd = lv[a1][b1].mul(&lp[a2][b2]);
                    let bwd = lp[a2][b2].mul(&lv[a1][b1]);
                    lhs[2 * a1 + a2][2 * b1 + b2] = fwd;
                    rhs[2 * a1 + a2][2 * b1 + b2] = bwd;
                }
            }
        }
    }
    // X = R * lhs - rhs * R (block-wise over the 4x4 auxiliary structure)
    let mut worst = 0.0f64;
    let keep = n_t - margin;
    for arow in 0..4 {
        for bcol in 0..4 {
            let mut block = Array2::<C64>::zeros((dq, dq));
            for k in 0..4 {
                if r[(arow, k)].norm() > 0.0 {
                    block = block + lhs[k][bcol].matrix().mapv(|z| z * r[(arow, k)]);
                }
                if r[(k, bcol)].norm() > 0.0 {
                    block = block - rhs[arow][k].matrix().mapv(|z| z * r[(k, bcol)]);
                }
            }
            for sr in 0..2 {
                for nr in 0..keep {
                    for sc in 0..2 {
                        for nc in 0..keep {
                            worst =
                                worst.max(block[(sr * n_t + nr, sc * n_t + nc)].norm());
                        }
                    }
                }
            }
        }
    }
    Ok(worst)
}

/// Same residual but over the full truncated space (shows the edge defect).
pub fn check_rll_full(l: &OpMatrix2, lambda: C64, lambda_p: C64, eta: C64) -> Result<f64> {
    check_rll(l, lambda, lambda_p, eta, 0)
}

/// The non-diagonal boundary K-matrix
/// `K(λ; ξ, κ, θ) = (1/ξ) [[λ+ξ, 2κ e^{θ} λ], [2κ e^{-θ} λ, -λ+ξ]]`.
/// `κ = 0` gives the diagonal representative.
pub fn k_matrix(lambda: C64, xi: C64, kappa: C64, theta: C64) -> Array2<C64> {
    let two = C64::new(2.0, 0.0);
    let coupling_p = two * kappa * theta.exp() * lambda;
    let coupling_m = two * kappa * (-theta).exp() * lambda;
    let mut k = Array2::<C64>::zeros((2, 2));
    k[(0, 0)] = (lambda + xi) / xi;
    k[(0, 1)] = coupling_p / xi;
    k[(1, 0)] = coupling_m / xi;
    k[(1, 1)] = (xi - lambda) / xi;
    k
}

fn kron2(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let mut out = Array2::<C64>::zeros((4, 4));
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

fn swap_conjugate(r: &Array2<C64>) -> Array2<C64> {
    // P R P with P the permutation on C^2 ⊗ C^2
    let perm = [0usize, 2, 1, 3];
    let mut out = Array2::<C64>::zeros((4, 4));
    for i in 0..4 {
        for j in 0..4 {
            out[(i, j)] = r[(perm[i], perm[j])];
        }
    }
    out
}

fn max_abs4(m: &Array2<C64>) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// Residual of the reflection equation for a K_- candidate:
/// `R12(λ-λ') K1(λ) R21(λ+λ') K2(λ') = K2(λ') R12(λ+λ') K1(λ) R21(λ-λ')`.
pub fn check_reflection_minus(
    kf: &dyn Fn(C64) -> Array2<C64>,
    lambda: C64,
    lambda_p: C64,
    eta: C64,
) -> Result<f64> {
    let id2 = Array2::eye(2);
    let k1 = kron2(&kf(lambda), &id2);
    let k2 = kron2(&id2, &kf(lambda_p));
    let r12_m = r_matrix(lambda, lambda_p, eta)?;
    let r12_p = r_matrix(lambda + lambda_p, C64::new(0.0, 0.0), eta)?;
    let r21_p = swap_conjugate(&r12_p);
    let r21_m = swap_conjugate(&r12_m);
    let lhs = r12_m.dot(&k1).dot(&r21_p).dot(&k2);
    let rhs = k2.dot(&r12_p).dot(&k1).dot(&r21_m);
    Ok(max_abs4(&(&lhs - &rhs)))
}

/// Residual of the dual reflection equation for a K_+ candidate (the line
/// with transposed K and shifted arguments):
/// `R21(-λ+λ') K1t(λ) R12(-λ-λ'-2η) K2t(λ') = K2t(λ') R21(-λ-λ'-2η) K1t(λ) R12(-λ+λ')`.
pub fn check_reflection_plus(
    kf: &dyn Fn(C64) -> Array2<C64>,
    lambda: C64,
    lambda_p: C64,
    eta: C64,
) -> Result<f64> {
    let id2 = Array2::eye(2);
    let zero = C64::new(0.0, 0.0);
    let kt = |x: C64| kf(x).t().to_owned();
    let k1 = kron2(&kt(lambda), &id2);
    let k2 = kron2(&id2, &kt(lambda_p));
    let two_eta = eta + eta;
    let r12_a = r_matrix(-lambda + lambda_p, zero, eta)?;
    let r21_a = swap_conjugate(&r12_a);
    let r12_b = r_matrix(-lambda - lambda_p - two_eta, zero, eta)?;
    let r21_b = swap_conjugate(&r12_b);
    let lhs = r21_a.dot(&k1).dot(&r12_b).dot(&k2);
    let rhs = k2.dot(&r21_b).dot(&k1).dot(&r12_a);
    Ok(max_abs4(&(&lhs - &rhs)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(20_260_809)
    }

    fn rand_c(r: &mut ChaCha8Rng) -> C64 {
        c64(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
    }

    #[test]
    fn r_matrix_special_points() {
        let eta = c64(0.8, 0.1);
        let lam = c64(0.3, -0.2);
        // coincidence: b = 0, c = 1
        let r = r_matrix(lam, lam, eta).unwrap();
        assert!(r[(1, 1)].norm() < 1e-15);
        assert!((r[(1, 2)] - c64(1.0, 0.0)).norm() < 1e-15);
        // λ - μ = η: b = c = 1/2
        let r2 = r_matrix(lam + eta, lam, eta).unwrap();
        assert!((r2[(1, 1)] - c64(0.5, 0.0)).norm() < 1e-14);
        assert!((r2[(1, 2)] - c64(0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn r_matrix_b_plus_c_is_one() {
        let mut r = rng();
        for _ in 0..5 {
            let (lam, mu, eta) = (rand_c(&mut r), rand_c(&mut r), rand_c(&mut r) + c64(2.0, 0.0));
            let m = r_matrix(lam, mu, eta).unwrap();
            assert!((m[(1, 1)] + m[(1, 2)] - c64(1.0, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn r_matrix_pole_detected() {
        let eta = c64(1.0, 0.0);
        assert!(matches!(
            r_matrix(c64(0.0, 0.0), eta, eta),
            Err(Error::Singularity(_))
        ));
    }

    #[test]
    fn lax_entry_structure() {
        let p = ModelParams::desk(8);
        let lb = lax_boson(&p).unwrap();
        let ls = lax_spin(&p).unwrap();
        // degrees: L_b(0,0) is 1, other boson entries 0; spin diag 1, off 0
        assert_eq!(lb.e[0][0].degree(), 1);
        assert_eq!(lb.e[0][1].degree(), 0);
        assert_eq!(lb.e[1][0].degree(), 0);
        assert_eq!(lb.e[1][1].degree(), 0);
        assert_eq!(ls.e[0][0].degree(), 1);
        assert_eq!(ls.e[1][1].degree(), 1);
        // L_b(1,1) is the constant -βγ/η
        let (z, dev) = lb.e[1][1].coeff(0).edge_safe_scalar(0);
        assert!(dev < 1e-14);
        assert!((z - (-p.beta_c * p.gamma_c / p.eta)).norm() < 1e-14);
        // L_s(0,0) at λ = η z0 acting on |., up> gives η/2 times the state
        let op = ls.e[0][0].eval(p.eta * p.z0);
        let mut v = ndarray::Array1::<C64>::zeros(2 * p.n_t);
        v[2] = c64(1.0, 0.0); // |n=2, up>
        let w = op.apply(&v);
        assert!((w[2] - p.eta * c64(0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn qdet_closed_forms() {
        let p = ModelParams::desk(12);
        let db = qdet_lax(&lax_boson(&p).unwrap(), p.eta, p.margin).unwrap();
        let ds = qdet_lax(&lax_spin(&p).unwrap(), p.eta, p.margin).unwrap();
        let db_ref = qdet_boson_closed(&p);
        let ds_ref = qdet_spin_closed(&p);
        assert!(db.sub(&db_ref).max_coeff_norm() < 1e-12);
        assert!(ds.sub(&ds_ref).max_coeff_norm() < 1e-12);
    }

    #[test]
    fn qdet_specialization() {
        // β = γ = 1, η = 1, z1 = 1/2: Det_q(L_b)(λ) = -λ
        let p = ModelParams::new(
            c64(1.0, 0.0),
            c64(0.3, 0.0),
            c64(0.5, 0.0),
            c64(1.0, 0.0),
            c64(1.0, 0.0),
            8,
            3,
        )
        .unwrap();
        let db = qdet_lax(&lax_boson(&p).unwrap(), p.eta, p.margin).unwrap();
        assert!((db.coeff(0)).norm() < 1e-13);
        assert!((db.coeff(1) + c64(1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn qdet_truncation_independent() {
        let mk = |n_t| {
            let p = ModelParams::desk(n_t);
            qdet_lax(&lax_boson(&p).unwrap(), p.eta, p.margin).unwrap()
        };
        let d1 = mk(12);
        let d2 = mk(24);
        assert!(d1.sub(&d2).max_coeff_norm() < 1e-12);
    }

    #[test]
    fn rll_spin_exact() {
        let p = ModelParams::desk(8);
        let ls = lax_spin(&p).unwrap();
        let mut r = rng();
        for _ in 0..3 {
            let (lam, mu) = (rand_c(&mut r), rand_c(&mut r));
            let res = check_rll(&ls, lam, mu, p.eta, 0).unwrap();
            assert!(res < 1e-12, "spin RLL residual {res:e}");
        }
    }

    #[test]
    fn rll_boson_edge_safe_vs_full() {
        let p = ModelParams::desk(20);
        let lb = lax_boson(&p).unwrap();
        let mut r = rng();
        let (lam, mu) = (rand_c(&mut r), rand_c(&mut r));
        let safe = check_rll(&lb, lam, mu, p.eta, p.margin).unwrap();
        assert!(safe < 1e-10, "boson RLL edge-safe residual {safe:e}");
        let full = check_rll_full(&lb, lam, mu, p.eta).unwrap();
        assert!(full > 1e-2, "full-space residual should expose the cutoff, got {full:e}");
    }

    #[test]
    fn reflection_representations() {
        let eta = c64(0.9, 0.0);
        let mut r = rng();
        let xi = c64(1.3, 0.2);
        let kappa = c64(0.4, -0.1);
        let theta = c64(0.25, 0.3);
        let kf = move |lam: C64| k_matrix(lam, xi, kappa, theta);
        let kdiag = move |lam: C64| k_matrix(lam, xi, c64(0.0, 0.0), theta);
        let kid = |_lam: C64| Array2::<C64>::eye(2);
        for _ in 0..3 {
            let (lam, mu) = (rand_c(&mut r), rand_c(&mut r));
            assert!(check_reflection_minus(&kf, lam, mu, eta).unwrap() < 1e-12);
            assert!(check_reflection_minus(&kdiag, lam, mu, eta).unwrap() < 1e-12);
            assert!(check_reflection_minus(&kid, lam, mu, eta).unwrap() < 1e-14);
            // K_+ side built from the same family via λ -> λ + η and 1/2
            let kp = move |x: C64| kf(x + eta).mapv(|z| z * c64(0.5, 0.0));
            assert!(check_reflection_plus(&kp, lam, mu, eta).unwrap() < 1e-12);
        }
    }
}
