//! Dense operators on (truncated boson) ⊗ (spin-1/2).
//!
//! Basis convention, fixed everywhere: the composite index is
//! `sigma * n_t + n` with spin outer (`sigma = 0` for up, `1` for down) and
//! boson number `n = 0..n_t-1` inner.  All example matrices in the tests use
//! this ordering.

use crate::error::{Error, Result};
use crate::C64;
use ndarray::{Array1, Array2};

/// Dense complex operator on the composite space of dimension `2 * n_t`,
/// with boson-shift bandwidth metadata: every nonzero entry
/// `(n' s' | X | n s)` satisfies `|n' - n| <= shift_bandwidth`.
#[derive(Clone, Debug)]
pub struct FockSpinOperator {
    n_boson: usize,
    shift_bandwidth: usize,
    mat: Array2<C64>,
}

impl FockSpinOperator {
    /// Wrap a matrix, computing the tightest bandwidth.
    pub fn from_matrix(n_boson: usize, mat: Array2<C64>) -> Result<Self> {
        let dim = 2 * n_boson;
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::Dimension(format!(
                "matrix is {}x{}, expected {}x{}",
                mat.nrows(),
                mat.ncols(),
                dim,
                dim
            )));
        }
        let bw = tight_bandwidth(n_boson, &mat);
        Ok(Self { n_boson, shift_bandwidth: bw, mat })
    }

    pub fn zeros(n_boson: usize) -> Self {
        Self { n_boson, shift_bandwidth: 0, mat: Array2::zeros((2 * n_boson, 2 * n_boson)) }
    }

    pub fn identity(n_boson: usize) -> Self {
        Self { n_boson, shift_bandwidth: 0, mat: Array2::eye(2 * n_boson) }
    }

    pub fn scalar(n_boson: usize, z: C64) -> Self {
        let mut m = Array2::zeros((2 * n_boson, 2 * n_boson));
        for i in 0..2 * n_boson {
            m[(i, i)] = z;
        }
        Self { n_boson, shift_bandwidth: 0, mat: m }
    }

    pub fn n_boson(&self) -> usize {
        self.n_boson
    }

    pub fn dim(&self) -> usize {
        2 * self.n_boson
    }

    pub fn shift_bandwidth(&self) -> usize {
        self.shift_bandwidth
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.mat
    }

    /// Composite basis index for (spin, boson); spin 0 = up, 1 = down.
    #[inline]
    pub fn index(&self, spin: usize, n: usize) -> usize {
        spin * self.n_boson + n
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n_boson, other.n_boson, "operand dimension mismatch");
        Self {
            n_boson: self.n_boson,
            shift_bandwidth: self.shift_bandwidth.max(other.shift_bandwidth),
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n_boson, other.n_boson, "operand dimension mismatch");
        Self {
            n_boson: self.n_boson,
            shift_bandwidth: self.shift_bandwidth.max(other.shift_bandwidth),
            mat: &self.mat - &other.mat,
        }
    }

    /// Operator product `self * other` (order preserved).
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n_boson, other.n_boson, "operand dimension mismatch");
        let bw = (self.shift_bandwidth + other.shift_bandwidth).min(self.n_boson.saturating_sub(1));
        Self { n_boson: self.n_boson, shift_bandwidth: bw, mat: self.mat.dot(&other.mat) }
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            n_boson: self.n_boson,
            shift_bandwidth: self.shift_bandwidth,
            mat: self.mat.mapv(|x| x * z),
        }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n_boson: self.n_boson,
            shift_bandwidth: self.shift_bandwidth,
            mat: self.mat.t().mapv(|x| x.conj()),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            n_boson: self.n_boson,
            shift_bandwidth: self.shift_bandwidth,
            mat: self.mat.t().to_owned(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.mat[(i, i)]).sum()
    }

    pub fn apply(&self, v: &Array1<C64>) -> Array1<C64> {
        self.mat.dot(v)
    }

    /// Max absolute entry over the full truncated space.
    pub fn max_abs(&self) -> f64 {
        self.mat.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Max absolute entry of `P X P` where `P` projects onto the edge-safe
    /// subspace of boson numbers `n <= n_t - 1 - margin`.
    pub fn edge_safe_max(&self, margin: usize) -> f64 {
        let keep = self.n_boson.saturating_sub(margin);
        let mut m = 0.0f64;
        for s_row in 0..2 {
            for n_row in 0..keep {
                let i = s_row * self.n_boson + n_row;
                for s_col in 0..2 {
                    for n_col in 0..keep {
                        let j = s_col * self.n_boson + n_col;
                        m = m.max(self.mat[(i, j)].norm());
                    }
                }
            }
        }
        m
    }

    /// Deviation from `z * Id` on the edge-safe subspace, where `z` is read
    /// off a well-interior diagonal entry.  Returns `(z, deviation)`.
    pub fn edge_safe_scalar(&self, margin: usize) -> (C64, f64) {
        let keep = self.n_boson.saturating_sub(margin);
        let probe = self.index(0, keep.saturating_sub(1) / 2);
        let z = self.mat[(probe, probe)];
        let mut dev = 0.0f64;
        for s_row in 0..2 {
            for n_row in 0..keep {
                let i = s_row * self.n_boson + n_row;
                for s_col in 0..2 {
                    for n_col in 0..keep {
                        let j = s_col * self.n_boson + n_col;
                        let expect = if i == j { z } else { C64::new(0.0, 0.0) };
                        dev = dev.max((self.mat[(i, j)] - expect).norm());
                    }
                }
            }
        }
        (z, dev)
    }

    /// Like [`Self::edge_safe_scalar`] but errors above a tolerance.
    pub fn expect_scalar(&self, margin: usize, tol: f64, context: &str) -> Result<C64> {
        let (z, dev) = self.edge_safe_scalar(margin);
        if dev > tol {
            return Err(Error::IdentityViolation { context: context.to_string(), deviation: dev });
        }
        Ok(z)
    }
}

fn tight_bandwidth(n_boson: usize, mat: &Array2<C64>) -> usize {
    let mut bw = 0usize;
    for s_row in 0..2 {
        for n_row in 0..n_boson {
            let i = s_row * n_boson + n_row;
            for s_col in 0..2 {
                for n_col in 0..n_boson {
                    let j = s_col * n_boson + n_col;
                    if mat[(i, j)].norm() > 0.0 {
                        bw = bw.max(n_row.abs_diff(n_col));
                    }
                }
            }
        }
    }
    bw
}

/// Truncated boson ladder operators on the boson factor alone (`n_t x n_t`,
/// pre-tensor).  Hard cutoff: `adag |n_t - 1> = 0`.
#[derive(Clone, Debug)]
pub struct BosonOps {
    pub n_t: usize,
    pub a: Array2<C64>,
    pub adag: Array2<C64>,
    pub num: Array2<C64>,
}

/// `a |n> = sqrt(n) |n-1>`, `adag |n> = sqrt(n+1) |n+1>` below the cutoff.
pub fn make_boson_ops(n_t: usize) -> Result<BosonOps> {
    if n_t < 4 {
        return Err(Error::Config(format!("boson truncation n_t = {n_t} < 4")));
    }
    let mut a = Array2::<C64>::zeros((n_t, n_t));
    let mut adag = Array2::<C64>::zeros((n_t, n_t));
    let mut num = Array2::<C64>::zeros((n_t, n_t));
    for n in 1..n_t {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
        adag[(n, n - 1)] = C64::new((n as f64).sqrt(), 0.0);
    }
    for n in 0..n_t {
        num[(n, n)] = C64::new(n as f64, 0.0);
    }
    Ok(BosonOps { n_t, a, adag, num })
}

/// Spin-1/2 operators on the 2-dimensional factor; basis (up, down).
#[derive(Clone, Debug)]
pub struct SpinOps {
    pub sz: Array2<C64>,
    pub sp: Array2<C64>,
    pub sm: Array2<C64>,
    pub sigma_y: Array2<C64>,
}

pub fn make_spin_ops() -> SpinOps {
    let z = C64::new(0.0, 0.0);
    let sz = ndarray::array![[C64::new(0.5, 0.0), z], [z, C64::new(-0.5, 0.0)]];
    // S^+ |down> = |up>
    let sp = ndarray::array![[z, C64::new(1.0, 0.0)], [z, z]];
    let sm = ndarray::array![[z, z], [C64::new(1.0, 0.0), z]];
    let sigma_y = ndarray::array![[z, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), z]];
    SpinOps { sz, sp, sm, sigma_y }
}

/// Kronecker composite with the fixed ordering (spin outer, boson inner):
/// `(spin ⊗ boson)[(s' n'), (s n)] = spin[s', s] * boson[n', n]`.
pub fn tensor_embed(boson_op: &Array2<C64>, spin_op: &Array2<C64>) -> Result<FockSpinOperator> {
    let n_t = boson_op.nrows();
    if boson_op.ncols() != n_t {
        return Err(Error::Dimension("boson operator must be square".into()));
    }
    if spin_op.nrows() != 2 || spin_op.ncols() != 2 {
        return Err(Error::Dimension("spin operator must be 2x2".into()));
    }
    let dim = 2 * n_t;
    let mut m = Array2::<C64>::zeros((dim, dim));
    for sr in 0..2 {
        for sc in 0..2 {
            let f = spin_op[(sr, sc)];
            if f.norm() == 0.0 {
                continue;
            }
            for nr in 0..n_t {
                for nc in 0..n_t {
                    m[(sr * n_t + nr, sc * n_t + nc)] = f * boson_op[(nr, nc)];
                }
            }
        }
    }
    FockSpinOperator::from_matrix(n_t, m)
}

/// Boson operator embedded with identity on the spin factor.
pub fn embed_boson(n_t: usize, boson_op: &Array2<C64>) -> Result<FockSpinOperator> {
    let _ = n_t;
    tensor_embed(boson_op, &Array2::eye(2))
}

/// Spin operator embedded with identity on the boson factor.
pub fn embed_spin(n_t: usize, spin_op: &Array2<C64>) -> Result<FockSpinOperator> {
    tensor_embed(&Array2::eye(n_t), spin_op)
}

/// Weight of `v` on the edge set of boson numbers `n >= n_t - margin`,
/// relative to the total norm.  Invariant under global phase and scaling.
pub fn edge_leak(v: &Array1<C64>, n_t: usize, margin: usize) -> f64 {
    assert!(margin < n_t, "margin must be below the truncation level");
    assert_eq!(v.len(), 2 * n_t, "state vector dimension mismatch");
    let total: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let mut edge = 0.0;
    for s in 0..2 {
        for n in (n_t - margin)..n_t {
            edge += v[s * n_t + n].norm_sqr();
        }
    }
    edge / total
}

/// Exponential of a nilpotent matrix (finite sum; exact up to rounding).
/// Panics if the series has not terminated after `2 * dim` terms.
pub fn exp_nilpotent(m: &Array2<C64>) -> Array2<C64> {
    let dim = m.nrows();
    let mut acc = Array2::<C64>::eye(dim);
    let mut term = Array2::<C64>::eye(dim);
    for k in 1..=(2 * dim) {
        term = term.dot(m).mapv(|z| z / C64::new(k as f64, 0.0));
        let nrm = term.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        if nrm == 0.0 {
            return acc;
        }
        acc += &term;
    }
    panic!("exp_nilpotent: matrix is not nilpotent");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn boson_number_diagonal_nt4() {
        let b = make_boson_ops(4).unwrap();
        let nd = b.adag.dot(&b.a);
        for n in 0..4 {
            assert!((nd[(n, n)] - c64(n as f64, 0.0)).norm() < 1e-15);
        }
        assert!((&nd - &b.num).iter().fold(0.0f64, |m, z| m.max(z.norm())) < 1e-15);
    }

    #[test]
    fn boson_commutator_truncation_artifact_nt4() {
        // (a adag - adag a)|n> = |n> for n <= 2, but = -3 |3> at the edge.
        let b = make_boson_ops(4).unwrap();
        let comm = &b.a.dot(&b.adag) - &b.adag.dot(&b.a);
        for n in 0..3 {
            assert!((comm[(n, n)] - c64(1.0, 0.0)).norm() < 1e-15);
        }
        assert!((comm[(3, 3)] - c64(-3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn vacuum_annihilation() {
        let b = make_boson_ops(4).unwrap();
        let mut v = Array1::<C64>::zeros(4);
        v[0] = c64(1.0, 0.0);
        let av = b.a.dot(&v);
        assert!(av.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn rejects_tiny_truncation() {
        assert!(matches!(make_boson_ops(3), Err(Error::Config(_))));
    }

    #[test]
    fn spin_algebra() {
        let s = make_spin_ops();
        let sz2 = s.sz.dot(&s.sz);
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { c64(0.25, 0.0) } else { c64(0.0, 0.0) };
                assert!((sz2[(i, j)] - expect).norm() < 1e-15);
            }
        }
        // S^+S^- + S^-S^+ = Id, [S^+, S^-] = 2 S^z, sigma_y^2 = Id.
        let anti = &s.sp.dot(&s.sm) + &s.sm.dot(&s.sp);
        let comm = &s.sp.dot(&s.sm) - &s.sm.dot(&s.sp);
        let yy = s.sigma_y.dot(&s.sigma_y);
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { c64(1.0, 0.0) } else { c64(0.0, 0.0) };
                assert!((anti[(i, j)] - id).norm() < 1e-15);
                assert!((yy[(i, j)] - id).norm() < 1e-15);
                assert!((comm[(i, j)] - 2.0 * s.sz[(i, j)]).norm() < 1e-15);
            }
        }
        // [S^z, S^pm] = pm S^pm
        let cp = &s.sz.dot(&s.sp) - &s.sp.dot(&s.sz);
        let cm = &s.sz.dot(&s.sm) - &s.sm.dot(&s.sz);
        for i in 0..2 {
            for j in 0..2 {
                assert!((cp[(i, j)] - s.sp[(i, j)]).norm() < 1e-15);
                assert!((cm[(i, j)] + s.sm[(i, j)]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn tensor_embed_identity_and_trace() {
        let n_t = 4;
        let b = make_boson_ops(n_t).unwrap();
        let id = tensor_embed(&Array2::eye(n_t), &Array2::eye(2)).unwrap();
        assert!((id.matrix() - &Array2::<C64>::eye(2 * n_t))
            .iter()
            .all(|z| z.norm() < 1e-15));
        // trace(n ⊗ Id) = 2 * (0+1+2+3) = 12
        let n_emb = tensor_embed(&b.num, &Array2::eye(2)).unwrap();
        assert!((n_emb.trace() - c64(12.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn ultra_locality() {
        let n_t = 4;
        let b = make_boson_ops(n_t).unwrap();
        let s = make_spin_ops();
        let a_emb = tensor_embed(&b.a, &Array2::eye(2)).unwrap();
        let sp_emb = tensor_embed(&Array2::eye(n_t), &s.sp).unwrap();
        let comm = a_emb.commutator(&sp_emb);
        assert!(comm.max_abs() < 1e-15);
    }

    #[test]
    fn bandwidth_metadata() {
        let n_t = 6;
        let b = make_boson_ops(n_t).unwrap();
        let a_emb = tensor_embed(&b.a, &Array2::eye(2)).unwrap();
        let n_emb = tensor_embed(&b.num, &Array2::eye(2)).unwrap();
        assert_eq!(a_emb.shift_bandwidth(), 1);
        assert_eq!(n_emb.shift_bandwidth(), 0);
        let aa = a_emb.mul(&a_emb);
        assert!(aa.shift_bandwidth() <= 2);
    }

    #[test]
    fn edge_leak_examples() {
        let n_t = 20;
        let dim = 2 * n_t;
        // |0, up>
        let mut v = Array1::<C64>::zeros(dim);
        v[0] = c64(1.0, 0.0);
        assert_eq!(edge_leak(&v, n_t, 4), 0.0);
        // |n_t - 1, down>
        let mut w = Array1::<C64>::zeros(dim);
        w[n_t + (n_t - 1)] = c64(2.0, -1.0);
        assert!(close(edge_leak(&w, n_t, 4), 1.0, 1e-15));
        // uniform over all 2 n_t states -> 8/40
        let u = Array1::<C64>::from_elem(dim, c64(1.0, 1.0));
        assert!(close(edge_leak(&u, n_t, 4), 0.2, 1e-15));
    }

    #[test]
    fn edge_leak_phase_and_scale_invariant() {
        let n_t = 8;
        let dim = 2 * n_t;
        let v = Array1::<C64>::from_shape_fn(dim, |i| c64((i as f64).sin(), (i as f64 * 0.7).cos()));
        let l0 = edge_leak(&v, n_t, 3);
        let w = v.mapv(|z| z * c64(0.0, 2.5));
        assert!(close(edge_leak(&w, n_t, 3), l0, 1e-14));
    }

    #[test]
    fn exp_nilpotent_displacement() {
        let n_t = 8;
        let b = make_boson_ops(n_t).unwrap();
        let c = c64(0.3, -0.2);
        let e = exp_nilpotent(&b.adag.mapv(|z| z * c));
        let einv = exp_nilpotent(&b.adag.mapv(|z| z * (-c)));
        let prod = einv.dot(&e);
        assert!((&prod - &Array2::<C64>::eye(n_t))
            .iter()
            .fold(0.0f64, |m, z| m.max(z.norm()))
            < 1e-13);
        // e^{-c adag} a e^{c adag} = a + c away from the cutoff; both
        // exponentials are lower triangular, so rows m <= n_t - 3 never see
        // the edge and the identity is exact there.
        let lhs = einv.dot(&b.a).dot(&e);
        let rhs = &b.a + &Array2::eye(n_t).mapv(|z: C64| z * c);
        let diff = &lhs - &rhs;
        let mut dev = 0.0f64;
        for m in 0..n_t - 2 {
            for n in 0..n_t {
                dev = dev.max(diff[(m, n)].norm());
            }
        }
        assert!(dev < 1e-13, "dev = {dev:e}");
    }
}
