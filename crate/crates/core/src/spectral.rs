//! Generic numerical engines: biorthogonal non-hermitian eigensolution,
//! eigenvalue-polynomial reconstruction along a commuting family, damped
//! Newton multistart root solving, and spectrum matching.

use crate::error::{Error, Result};
use crate::fock::{edge_leak, FockSpinOperator};
use crate::poly::ScalarPolynomial;
use crate::C64;
use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Solve};

/// Threshold on the biorthogonal overlap condition above which an
/// eigenvalue cluster is flagged defective.
const DEFECT_COND: f64 = 1e10;

/// Right/left eigenpairs with bilinear biorthogonal normalization
/// `w_i^T v_j = δ_ij` (no conjugation; for hermitian input the left
/// vectors are the complex conjugates of the right ones).
#[derive(Clone, Debug)]
pub struct BiorthogonalEigen {
    pub values: Vec<C64>,
    /// Right eigenvectors, one column per eigenvalue.
    pub right: Array2<C64>,
    /// Left eigenvectors (columns; act as `w^T` rows), paired to `values`.
    pub left: Array2<C64>,
    /// Indices whose overlap was too ill-conditioned to normalize.
    pub defective: Vec<usize>,
}

pub fn biorthogonal_eigen(op: &FockSpinOperator) -> Result<BiorthogonalEigen> {
    biorthogonal_eigen_matrix(op.matrix())
}

pub fn biorthogonal_eigen_matrix(a: &Array2<C64>) -> Result<BiorthogonalEigen> {
    let dim = a.nrows();
    let (vals_r, vecs_r) = a
        .eig()
        .map_err(|e| Error::Numerics(format!("right eigensolve failed: {e}")))?;
    let at = a.t().to_owned();
    let (vals_l, vecs_l) = at
        .eig()
        .map_err(|e| Error::Numerics(format!("left eigensolve failed: {e}")))?;

    // Pair left vectors to right ones by eigenvalue proximity (greedy).
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| {
        let a = vals_r[i];
        let b = vals_r[j];
        a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap())
    });
    let mut used = vec![false; dim];
    let mut left = Array2::<C64>::zeros((dim, dim));
    let mut right = Array2::<C64>::zeros((dim, dim));
    let mut values = vec![C64::new(0.0, 0.0); dim];
    for (slot, &ri) in order.iter().enumerate() {
        values[slot] = vals_r[ri];
        right.column_mut(slot).assign(&vecs_r.column(ri));
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for li in 0..dim {
            if used[li] {
                continue;
            }
            let d = (vals_l[li] - vals_r[ri]).norm();
            if d < best_d {
                best_d = d;
                best = li;
            }
        }
        used[best] = true;
        left.column_mut(slot).assign(&vecs_l.column(best));
    }

    // Within near-degenerate clusters, re-pair by maximal overlap so the
    // bilinear form is as well conditioned as the cluster allows.
    let scale = values.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(1.0);
    let mut defective = Vec::new();
    let mut k = 0;
    while k < dim {
        let mut end = k + 1;
        while end < dim && (values[end] - values[end - 1]).norm() < 1e-8 * scale {
            end += 1;
        }
        if end - k > 1 {
            let idx: Vec<usize> = (k..end).collect();
            let mut taken = vec![false; idx.len()];
            let mut assign = vec![usize::MAX; idx.len()];
            for (ci, &col) in idx.iter().enumerate() {
                let mut best = usize::MAX;
                let mut best_o = -1.0;
                for (li, &lcol) in idx.iter().enumerate() {
                    if taken[li] {
                        continue;
                    }
                    let mut o = C64::new(0.0, 0.0);
                    for r in 0..dim {
                        o += left[(r, lcol)] * right[(r, col)];
                    }
                    if o.norm() > best_o {
                        best_o = o.norm();
                        best = li;
                    }
                }
                taken[best] = true;
                assign[ci] = idx[best];
            }
            let snapshot = left.clone();
            for (ci, &col) in idx.iter().enumerate() {
                left.column_mut(col).assign(&snapshot.column(assign[ci]));
            }
        }
        k = end;
    }

    // Normalize w^T v = 1; flag ill-conditioned overlaps as defective.
    for j in 0..dim {
        let mut o = C64::new(0.0, 0.0);
        let mut wn = 0.0f64;
        let mut vn = 0.0f64;
        for r in 0..dim {
            o += left[(r, j)] * right[(r, j)];
            wn += left[(r, j)].norm_sqr();
            vn += right[(r, j)].norm_sqr();
        }
        let cond = (wn.sqrt() * vn.sqrt()) / o.norm().max(f64::MIN_POSITIVE);
        if !o.norm().is_finite() || cond > DEFECT_COND {
            defective.push(j);
            continue;
        }
        let inv = C64::new(1.0, 0.0) / o;
        for r in 0..dim {
            left[(r, j)] *= inv;
        }
    }

    // One Rayleigh-quotient pass over the paired vectors sharpens the
    // LAPACK eigenvalues of non-normal input by several digits.
    for j in 0..dim {
        if defective.contains(&j) {
            continue;
        }
        let av = a.dot(&right.column(j).to_owned());
        let mut mu = C64::new(0.0, 0.0);
        for r in 0..dim {
            mu += left[(r, j)] * av[r];
        }
        values[j] = mu;
    }

    Ok(BiorthogonalEigen { values, right, left, defective })
}

/// One reconstructed transfer-matrix eigenvalue as a polynomial in the
/// spectral parameter, with truncation-trust metadata.
#[derive(Clone, Debug)]
pub struct SpectrumRecord {
    pub coeffs: ScalarPolynomial,
    /// Edge weight of the right eigenvector.
    pub leak: f64,
    pub trusted: bool,
    /// `n - S^z` expectation when it is conserved (within 1e-6 of a
    /// half-integer), `None` otherwise.
    pub sector_charge: Option<f64>,
    /// Consistency error at held-out nodes, relative.
    pub holdout_error: f64,
    /// Off-diagonal mass of the commuting family in the fixed basis.
    pub offdiag_mass: f64,
    pub defective: bool,
}

/// Options for [`eigenvalue_polynomials`].
#[derive(Clone, Debug)]
pub struct EigenPolyOptions {
    pub degree: usize,
    /// Require odd coefficients to vanish relative to the even scale.
    pub parity_even: bool,
    pub leak_tol: f64,
    pub margin: usize,
    /// Relative tolerance for the held-out node consistency test.
    pub holdout_tol: f64,
}

impl EigenPolyOptions {
    pub fn new(degree: usize, margin: usize) -> Self {
        Self { degree, parity_even: false, leak_tol: 1e-8, margin, holdout_tol: 1e-7 }
    }
}

/// Diagonalize `t(λ0)` once, then read every eigenvalue's polynomial off
/// `Λ_k(λ_j) = w_k^T t(λ_j) v_k` and fit an exact interpolating polynomial.
/// Nodes beyond `degree + 1` are held out for a consistency test.
pub fn eigenvalue_polynomials(
    t_at: &dyn Fn(C64) -> FockSpinOperator,
    nodes: &[C64],
    opts: &EigenPolyOptions,
    charge_op: Option<&FockSpinOperator>,
) -> Result<Vec<SpectrumRecord>> {
    if nodes.len() < opts.degree + 2 {
        return Err(Error::SampleSet(format!(
            "need at least degree+2 = {} nodes (got {})",
            opts.degree + 2,
            nodes.len()
        )));
    }
    let t0 = t_at(nodes[0]);
    let n_t = t0.n_boson();
    let dim = t0.dim();
    let eig = biorthogonal_eigen(&t0)?;

    // Λ values at every node for every eigenvector, plus off-diag mass.
    let mut lam = Array2::<C64>::zeros((dim, nodes.len()));
    let mut offdiag = vec![0.0f64; dim];
    for (j, &x) in nodes.iter().enumerate() {
        let tx = t_at(x);
        let tv = tx.matrix().dot(&eig.right);
        let wt_tv = eig.left.t().dot(&tv); // (k', k) = w_{k'}^T t v_k
        for k in 0..dim {
            lam[(k, j)] = wt_tv[(k, k)];
            let mut off = 0.0f64;
            let mut tot = 0.0f64;
            for kk in 0..dim {
                let w = wt_tv[(kk, k)].norm_sqr();
                tot += w;
                if kk != k {
                    off += w;
                }
            }
            if tot > 0.0 {
                offdiag[k] = offdiag[k].max((off / tot).sqrt());
            }
        }
    }

    // Vandermonde fit on the first degree+1 nodes.
    let nfit = opts.degree + 1;
    let mut vand = Array2::<C64>::zeros((nfit, nfit));
    for (i, &x) in nodes[..nfit].iter().enumerate() {
        let mut xp = C64::new(1.0, 0.0);
        for j in 0..nfit {
            vand[(i, j)] = xp;
            xp *= x;
        }
    }
    let mut records = Vec::with_capacity(dim);
    for k in 0..dim {
        let rhs = Array1::from_iter((0..nfit).map(|j| lam[(k, j)]));
        let sol = vand
            .solve(&rhs)
            .map_err(|e| Error::Numerics(format!("Vandermonde solve failed: {e}")))?;
        let poly = ScalarPolynomial::new(sol.to_vec());
        let scale =
            (0..nodes.len()).fold(0.0f64, |m, j| m.max(lam[(k, j)].norm())).max(1e-300);
        let mut holdout = 0.0f64;
        for (j, &x) in nodes.iter().enumerate().skip(nfit) {
            holdout = holdout.max((poly.eval(x) - lam[(k, j)]).norm() / scale);
        }
        let mut parity_ok = true;
        if opts.parity_even {
            let cs = poly.max_coeff_norm().max(1e-300);
            for (kk, c) in poly.coeffs().iter().enumerate() {
                if kk % 2 == 1 && c.norm() > 1e-8 * cs {
                    parity_ok = false;
                }
            }
        }
        let v = eig.right.column(k).to_owned();
        let leak = edge_leak(&v, n_t, opts.margin);
        let defective = eig.defective.contains(&k);
        let sector_charge = charge_op.and_then(|q| {
            let w = eig.left.column(k);
            let qv = q.matrix().dot(&v);
            let mut e = C64::new(0.0, 0.0);
            for r in 0..dim {
                e += w[r] * qv[r];
            }
            let half = e.re * 2.0;
            if e.im.abs() < 1e-6 && (half - half.round()).abs() < 1e-6 {
                Some(half.round() / 2.0)
            } else {
                None
            }
        });
        let trusted =
            leak < opts.leak_tol && holdout < opts.holdout_tol && parity_ok && !defective;
        records.push(SpectrumRecord {
            coeffs: poly,
            leak,
            trusted,
            sector_charge,
            holdout_error: holdout,
            offdiag_mass: offdiag[k],
            defective,
        });
    }
    Ok(records)
}

/// Variant descriptor of a Bethe-root set.
#[derive(Clone, Debug, PartialEq)]
pub enum BetheVariant {
    Twisted,
    OpenDiagonal,
    OpenConjectured { p_inf: C64, zeta: C64, chi: C64 },
    Gaudin,
}

/// A solved Bethe state: canonically sorted roots plus its residual.
#[derive(Clone, Debug)]
pub struct BetheState {
    pub roots: Vec<C64>,
    pub m: usize,
    pub residual_inf: f64,
    pub variant: BetheVariant,
}

/// Options for the damped Newton multistart driver.
#[derive(Clone, Debug)]
pub struct NewtonOptions {
    pub max_iter: usize,
    pub max_halvings: usize,
    pub step_tol: f64,
    pub accept_residual: f64,
    pub dedup_tol: f64,
    /// Canonicalize roots under λ -> -λ before deduplication.
    pub sign_pairing: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            max_halvings: 8,
            step_tol: 1e-12,
            accept_residual: 1e-10,
            dedup_tol: 1e-8,
            sign_pairing: false,
        }
    }
}

fn canonical_roots(roots: &[C64], sign_pairing: bool) -> Vec<C64> {
    let mut rs: Vec<C64> = roots
        .iter()
        .map(|&r| {
            if sign_pairing && (r.re < 0.0 || (r.re == 0.0 && r.im < 0.0)) {
                -r
            } else {
                r
            }
        })
        .collect();
    rs.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
    rs
}

/// Damped Newton from every seed; `residual_fn` returns `None` on poles.
/// Deduplicated, re-verified states in deterministic order.
pub fn newton_multistart(
    residual_fn: &dyn Fn(&[C64]) -> Option<Vec<C64>>,
    jacobian_fn: &dyn Fn(&[C64]) -> Option<Array2<C64>>,
    m: usize,
    seeds: &[Vec<C64>],
    variant: BetheVariant,
    opts: &NewtonOptions,
) -> Result<Vec<BetheState>> {
    if m == 0 {
        return Ok(vec![BetheState { roots: vec![], m: 0, residual_inf: 0.0, variant }]);
    }
    let inf_norm = |v: &[C64]| v.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    let mut found: Vec<BetheState> = Vec::new();
    'seed: for seed in seeds {
        if seed.len() != m {
            continue;
        }
        let mut x = seed.clone();
        let mut f = match residual_fn(&x) {
            Some(f) => f,
            None => continue 'seed, // seed on a pole: rejected, not fatal
        };
        for _ in 0..opts.max_iter {
            let fnorm = inf_norm(&f);
            let jac = match jacobian_fn(&x) {
                Some(j) => j,
                None => continue 'seed,
            };
            let rhs = Array1::from_iter(f.iter().map(|z| -z));
            let step = match jac.solve(&rhs) {
                Ok(s) => s,
                Err(_) => continue 'seed,
            };
            let scale = 1.0 + inf_norm(&x);
            let step_norm = step.iter().fold(0.0f64, |a, z| a.max(z.norm()));
            if step_norm < opts.step_tol * scale {
                break;
            }
            let mut alpha = 1.0f64;
            let mut accepted = false;
            for _ in 0..=opts.max_halvings {
                let trial: Vec<C64> = x
                    .iter()
                    .zip(step.iter())
                    .map(|(&xi, &si)| xi + si * C64::new(alpha, 0.0))
                    .collect();
                if let Some(ft) = residual_fn(&trial) {
                    if inf_norm(&ft) <= fnorm || alpha <= 1.0 / (1u64 << opts.max_halvings) as f64
                    {
                        x = trial;
                        f = ft;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                continue 'seed;
            }
            if alpha * step_norm < opts.step_tol * scale {
                break;
            }
        }
        let resid = inf_norm(&f);
        if resid > opts.accept_residual {
            continue;
        }
        for i in 0..m {
            for j in (i + 1)..m {
                if (x[i] - x[j]).norm() < opts.dedup_tol {
                    continue 'seed;
                }
            }
        }
        let canon = canonical_roots(&x, opts.sign_pairing);
        let dup = found.iter().any(|st| {
            st.roots
                .iter()
                .zip(canon.iter())
                .all(|(a, b)| (a - b).norm() < opts.dedup_tol * (1.0 + a.norm()))
        });
        if !dup {
            found.push(BetheState {
                roots: canon,
                m,
                residual_inf: resid,
                variant: variant.clone(),
            });
        }
    }
    found.sort_by(|a, b| {
        let ka = a.roots.first().map(|z| (z.re, z.im)).unwrap_or((0.0, 0.0));
        let kb = b.roots.first().map(|z| (z.re, z.im)).unwrap_or((0.0, 0.0));
        ka.partial_cmp(&kb).unwrap()
    });
    Ok(found)
}

/// Central finite-difference Jacobian for residual systems whose analytic
/// derivatives are not worth the ink.
pub fn fd_jacobian(
    residual_fn: &dyn Fn(&[C64]) -> Option<Vec<C64>>,
    x: &[C64],
) -> Option<Array2<C64>> {
    let m = x.len();
    let mut jac = Array2::<C64>::zeros((m, m));
    for g in 0..m {
        let h = 1e-7 * (1.0 + x[g].norm());
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[g] += C64::new(h, 0.0);
        xm[g] -= C64::new(h, 0.0);
        let fp = residual_fn(&xp)?;
        let fm = residual_fn(&xm)?;
        // complex-differentiable residuals: the real-direction difference
        // quotient is the complex derivative
        for b in 0..m {
            jac[(b, g)] = (fp[b] - fm[b]) / C64::new(2.0 * h, 0.0);
        }
    }
    Some(jac)
}

/// Relative distance between two eigenvalue polynomials:
/// max over coefficient indices of `|Δc_i| / (|c_i| + ε)`.
pub fn poly_rel_distance(a: &ScalarPolynomial, b: &ScalarPolynomial) -> f64 {
    let n = (a.degree()).max(b.degree()) + 1;
    let mut worst = 0.0f64;
    for i in 0..n {
        let ca = a.coeff(i);
        let cb = b.coeff(i);
        worst = worst.max((ca - cb).norm() / (ca.norm() + 1e-12));
    }
    worst
}

/// One matched pair in a spectrum-matching report.
#[derive(Clone, Debug)]
pub struct MatchPair {
    pub bethe_index: usize,
    pub exact_index: usize,
    pub distance: f64,
}

/// Result of matching reconstructed Bethe eigenvalues against exact records.
#[derive(Clone, Debug)]
pub struct MatchReport {
    pub pairs: Vec<MatchPair>,
    /// Trusted exact records no Bethe state reproduced (coverage gaps).
    pub unmatched_trusted_exact: Vec<usize>,
    /// Bethe states that matched nothing (spurious or untrusted sector).
    pub unmatched_bethe: Vec<usize>,
    pub max_matched_distance: f64,
}

/// Greedy optimal-first assignment between Bethe eigenvalue polynomials
/// and exact records at the given relative tolerance.
pub fn match_spectra(
    bethe: &[ScalarPolynomial],
    exact: &[SpectrumRecord],
    rel_tol: f64,
) -> MatchReport {
    let mut cands: Vec<(f64, usize, usize)> = Vec::new();
    for (bi, bp) in bethe.iter().enumerate() {
        for (ei, er) in exact.iter().enumerate() {
            let d = poly_rel_distance(bp, &er.coeffs);
            if d <= rel_tol {
                cands.push((d, bi, ei));
            }
        }
    }
    cands.sort_by(|a, b| {
        a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
    });
    let mut bethe_used = vec![false; bethe.len()];
    let mut exact_used = vec![false; exact.len()];
    let mut pairs = Vec::new();
    let mut max_d = 0.0f64;
    for (d, bi, ei) in cands {
        if bethe_used[bi] || exact_used[ei] {
            continue;
        }
        bethe_used[bi] = true;
        exact_used[ei] = true;
        max_d = max_d.max(d);
        pairs.push(MatchPair { bethe_index: bi, exact_index: ei, distance: d });
    }
    let unmatched_trusted_exact = exact
        .iter()
        .enumerate()
        .filter(|(ei, er)| er.trusted && !exact_used[*ei])
        .map(|(ei, _)| ei)
        .collect();
    let unmatched_bethe = bethe_used
        .iter()
        .enumerate()
        .filter(|(_, &u)| !u)
        .map(|(bi, _)| bi)
        .collect();
    MatchReport { pairs, unmatched_trusted_exact, unmatched_bethe, max_matched_distance: max_d }
}
