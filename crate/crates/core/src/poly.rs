//! Polynomials in the spectral parameter with scalar or operator coefficients.

use crate::error::{Error, Result};
use crate::fock::FockSpinOperator;
use crate::C64;
use ndarray::Array2;
use ndarray_linalg::Eig;

/// Polynomial with complex coefficients, `coeffs[k]` multiplying `λ^k`.
/// Kept in trimmed form (nonzero leading coefficient, or empty for zero).
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarPolynomial {
    coeffs: Vec<C64>,
}

impl ScalarPolynomial {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while let Some(last) = coeffs.last() {
            if last.norm() == 0.0 {
                coeffs.pop();
            } else {
                break;
            }
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Self::constant(C64::new(1.0, 0.0))
    }

    pub fn constant(z: C64) -> Self {
        Self::new(vec![z])
    }

    /// The monic linear factor `λ - root`.
    pub fn linear(root: C64) -> Self {
        Self::new(vec![-root, C64::new(1.0, 0.0)])
    }

    pub fn from_roots(roots: &[C64]) -> Self {
        roots.iter().fold(Self::one(), |acc, &r| acc.mul(&Self::linear(r)))
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the trimmed polynomial; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> C64 {
        self.coeffs.last().copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn eval(&self, x: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = self.coeff(k) + other.coeff(k);
        }
        Self::new(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, z: C64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * z).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(k, &c)| c * C64::new((k + 1) as f64, 0.0))
                .collect(),
        )
    }

    /// Coefficients of `P(s·λ + t)`.
    pub fn compose_affine(&self, s: C64, t: C64) -> Self {
        let mut acc = Self::zero();
        let arg = Self::new(vec![t, s]);
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul(&arg).add(&Self::constant(c));
        }
        acc
    }

    /// `P(λ + t)`.
    pub fn shifted(&self, t: C64) -> Self {
        self.compose_affine(C64::new(1.0, 0.0), t)
    }

    /// Long division: returns `(quotient, remainder)` with
    /// `self = quotient * divisor + remainder`.
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self)> {
        if divisor.is_zero() {
            return Err(Error::Numerics("polynomial division by zero".into()));
        }
        let mut rem = self.coeffs.clone();
        let dd = divisor.degree();
        let lead = divisor.leading();
        if rem.len() <= dd {
            return Ok((Self::zero(), Self::new(rem)));
        }
        let mut quot = vec![C64::new(0.0, 0.0); rem.len() - dd];
        for k in (dd..rem.len()).rev() {
            let q = rem[k] / lead;
            quot[k - dd] = q;
            for j in 0..=dd {
                rem[k - dd + j] -= q * divisor.coeff(j);
            }
        }
        rem.truncate(dd);
        Ok((Self::new(quot), Self::new(rem)))
    }

    /// Roots via the companion matrix of the monic normalization.
    pub fn roots(&self) -> Result<Vec<C64>> {
        let n = self.degree();
        if self.is_zero() {
            return Err(Error::Numerics("zero polynomial has no root list".into()));
        }
        if n == 0 {
            return Ok(vec![]);
        }
        let lead = self.leading();
        let mut comp = Array2::<C64>::zeros((n, n));
        for i in 1..n {
            comp[(i, i - 1)] = C64::new(1.0, 0.0);
        }
        for i in 0..n {
            comp[(i, n - 1)] = -self.coeff(i) / lead;
        }
        let (vals, _) = comp
            .eig()
            .map_err(|e| Error::Numerics(format!("companion eigensolve failed: {e}")))?;
        let mut out: Vec<C64> = vals.to_vec();
        out.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .unwrap()
                .then(a.im.partial_cmp(&b.im).unwrap())
        });
        Ok(out)
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }
}

/// Polynomial with `FockSpinOperator` coefficients, `coeffs[k]` on `λ^k`.
#[derive(Clone, Debug)]
pub struct OperatorPolynomial {
    n_boson: usize,
    coeffs: Vec<FockSpinOperator>,
}

impl OperatorPolynomial {
    /// Relative threshold below which a leading coefficient counts as zero.
    const TRIM_EPS: f64 = 1e-14;

    pub fn new(n_boson: usize, coeffs: Vec<FockSpinOperator>) -> Self {
        let mut p = Self { n_boson, coeffs };
        p.trim();
        p
    }

    pub fn zero(n_boson: usize) -> Self {
        Self { n_boson, coeffs: vec![] }
    }

    pub fn constant(op: FockSpinOperator) -> Self {
        Self::new(op.n_boson(), vec![op])
    }

    /// `λ * scalar + op0` style helper: builds `Σ coeffs[k] λ^k` from parts.
    pub fn from_parts(parts: Vec<FockSpinOperator>) -> Self {
        assert!(!parts.is_empty());
        Self::new(parts[0].n_boson(), parts)
    }

    fn trim(&mut self) {
        let global = self
            .coeffs
            .iter()
            .fold(0.0f64, |m, c| m.max(c.max_abs()));
        while let Some(last) = self.coeffs.last() {
            if last.max_abs() <= Self::TRIM_EPS * global.max(1.0) {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn n_boson(&self) -> usize {
        self.n_boson
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: usize) -> FockSpinOperator {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| FockSpinOperator::zeros(self.n_boson))
    }

    pub fn coeffs(&self) -> &[FockSpinOperator] {
        &self.coeffs
    }

    pub fn eval(&self, x: C64) -> FockSpinOperator {
        let mut acc = FockSpinOperator::zeros(self.n_boson);
        let mut xp = C64::new(1.0, 0.0);
        for c in &self.coeffs {
            acc = acc.add(&c.scale(xp));
            xp *= x;
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n_boson, other.n_boson);
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(self.coeff(k).add(&other.coeff(k)));
        }
        Self::new(self.n_boson, out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, z: C64) -> Self {
        Self::new(self.n_boson, self.coeffs.iter().map(|c| c.scale(z)).collect())
    }

    /// Cauchy product preserving left-to-right operator order.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n_boson, other.n_boson);
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.n_boson);
        }
        let n = self.coeffs.len() + other.coeffs.len() - 1;
        let mut out: Vec<FockSpinOperator> =
            (0..n).map(|_| FockSpinOperator::zeros(self.n_boson)).collect();
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Self::new(self.n_boson, out)
    }

    /// Multiply by a scalar polynomial in the same variable.
    pub fn mul_scalar_poly(&self, s: &ScalarPolynomial) -> Self {
        if self.is_zero() || s.is_zero() {
            return Self::zero(self.n_boson);
        }
        let n = self.coeffs.len() + s.degree();
        let mut out: Vec<FockSpinOperator> =
            (0..n).map(|_| FockSpinOperator::zeros(self.n_boson)).collect();
        for (i, a) in self.coeffs.iter().enumerate() {
            for j in 0..=s.degree() {
                out[i + j] = out[i + j].add(&a.scale(s.coeff(j)));
            }
        }
        Self::new(self.n_boson, out)
    }

    /// Coefficients of `P(s·λ + t)`.
    pub fn compose_affine(&self, s: C64, t: C64) -> Self {
        let mut acc = Self::zero(self.n_boson);
        for c in self.coeffs.iter().rev() {
            // acc = acc * (s λ + t) + c
            acc = acc.mul_scalar_poly(&ScalarPolynomial::new(vec![t, s]))
                .add(&Self::constant(c.clone()));
        }
        acc
    }

    pub fn shifted(&self, t: C64) -> Self {
        self.compose_affine(C64::new(1.0, 0.0), t)
    }

    /// `[P(λ), Q(μ)]` evaluated at the point pair.
    pub fn commutator_at(&self, other: &Self, lambda: C64, mu: C64) -> FockSpinOperator {
        self.eval(lambda).commutator(&other.eval(mu))
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.max_abs()))
    }
}
