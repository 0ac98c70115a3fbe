//! General complex eigensolver: Householder reduction to Hessenberg form,
//! single-shift QR to complex Schur form, triangular back-substitution for
//! eigenvectors, then per-pair refinement.
//!
//! Liouvillians are non-normal and may sit exactly on exceptional points, so
//! nothing here assumes diagonalizability. Nearly parallel eigenvectors are a
//! legitimate output.

use super::{fix_phase, inner, lu_solve, norm2, normalize, svd, ComplexMatrix, NumericsError, C64};

const MAX_QR_ITERATIONS_PER_EIGENVALUE: usize = 60;
/// Residual bound relative to the Frobenius norm of the input.
const RESIDUAL_TOL: f64 = 1e-10;
/// Eigenvalues closer than this (relative) are examined as one cluster.
const CLUSTER_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct EigenResult {
    pub eigenvalues: Vec<C64>,
    /// Unit-norm, phase-fixed right eigenvectors, one per eigenvalue.
    pub right_eigenvectors: Vec<Vec<C64>>,
    /// `‖M v_k − λ_k v_k‖₂`.
    pub residual_norms: Vec<f64>,
}

pub fn eigendecompose(m: &ComplexMatrix) -> Result<EigenResult, NumericsError> {
    let n = m.require_square()?;
    if !m.is_finite() {
        return Err(NumericsError::NonFinite);
    }
    let norm = m.frobenius_norm();
    if n == 0 {
        return Ok(EigenResult { eigenvalues: vec![], right_eigenvectors: vec![], residual_norms: vec![] });
    }

    let (mut t, mut z) = hessenberg(m);
    schur_qr(&mut t, &mut z, norm)?;

    let mut eigenvalues: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();
    let mut vectors: Vec<Vec<C64>> = (0..n)
        .map(|k| {
            let x = triangular_eigenvector(&t, k, norm);
            let mut v = z.matvec(&x);
            normalize(&mut v);
            v
        })
        .collect();

    let bound = RESIDUAL_TOL * norm.max(f64::MIN_POSITIVE);
    let mut iterations = 0;
    for k in 0..n {
        let r = residual(m, eigenvalues[k], &vectors[k]);
        if r > bound {
            iterations += refine(m, &mut eigenvalues[k], &mut vectors[k], norm);
        }
    }

    orthonormalize_semisimple_clusters(m, &mut eigenvalues, &mut vectors, norm);

    let mut residual_norms = Vec::with_capacity(n);
    for k in 0..n {
        fix_phase(&mut vectors[k]);
        let r = residual(m, eigenvalues[k], &vectors[k]);
        if !(r <= bound) {
            return Err(NumericsError::NonConvergence { norm, iterations: iterations.max(1) });
        }
        residual_norms.push(r);
    }
    Ok(EigenResult { eigenvalues, right_eigenvectors: vectors, residual_norms })
}

fn residual(m: &ComplexMatrix, lambda: C64, v: &[C64]) -> f64 {
    let mv = m.matvec(v);
    norm2(&mv.iter().zip(v).map(|(a, b)| a - lambda * b).collect::<Vec<_>>())
}

/// Householder reduction `m = Z H Z†`.
fn hessenberg(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = m.rows();
    let mut h = m.clone();
    let mut z = ComplexMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let alpha = norm2(&x);
        if alpha == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { C64::new(1.0, 0.0) };
        let mut w = x.clone();
        w[0] += phase * alpha;
        if normalize(&mut w) == 0.0 {
            continue;
        }
        // H ← P H P with P = I − 2 w w†
        for j in 0..n {
            let s: C64 = (0..w.len()).map(|i| w[i].conj() * h[(k + 1 + i, j)]).sum();
            for i in 0..w.len() {
                h[(k + 1 + i, j)] -= w[i] * s * 2.0;
            }
        }
        for i in 0..n {
            let s: C64 = (0..w.len()).map(|j| h[(i, k + 1 + j)] * w[j]).sum();
            for j in 0..w.len() {
                h[(i, k + 1 + j)] -= s * w[j].conj() * 2.0;
            }
        }
        for i in 0..n {
            let s: C64 = (0..w.len()).map(|j| z[(i, k + 1 + j)] * w[j]).sum();
            for j in 0..w.len() {
                z[(i, k + 1 + j)] -= s * w[j].conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = C64::new(0.0, 0.0);
        }
    }
    (h, z)
}

/// Givens pair `(c, s)` with `[[c, s], [−s̄, c]]·[x; y] = [r; 0]`.
fn givens(x: C64, y: C64) -> (f64, C64) {
    let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
    if r == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if x.norm() == 0.0 {
        return (0.0, y.conj() / y.norm());
    }
    let c = x.norm() / r;
    let s = (x / x.norm()) * y.conj() / r;
    (c, s)
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    let mu1 = half_tr + root;
    let mu2 = half_tr - root;
    if (mu1 - d).norm() <= (mu2 - d).norm() {
        mu1
    } else {
        mu2
    }
}

/// Reduces upper Hessenberg `h` to upper triangular form in place,
/// accumulating the unitary transformations into `z`.
fn schur_qr(h: &mut ComplexMatrix, z: &mut ComplexMatrix, norm: f64) -> Result<(), NumericsError> {
    let n = h.rows();
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let mut s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if s == 0.0 {
                s = norm;
            }
            if h[(l, l - 1)].norm() <= eps * s {
                h[(l, l - 1)] = C64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if iter > MAX_QR_ITERATIONS_PER_EIGENVALUE {
            return Err(NumericsError::NonConvergence { norm, iterations: total });
        }
        let mu = if iter.is_multiple_of(11) {
            // exceptional shift to break cycles
            h[(hi, hi)] + C64::new(0.75, 0.5) * h[(hi, hi - 1)].norm()
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        for k in l..=hi {
            h[(k, k)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..n {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = a * c + s * b;
                h[(k + 1, j)] = -s.conj() * a + b * c;
            }
            h[(k + 1, k)] = C64::new(0.0, 0.0);
            rots.push((k, c, s));
        }
        for &(k, c, s) in &rots {
            let top = (k + 2).min(hi);
            for i in 0..=top {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * c + b * s.conj();
                h[(i, k + 1)] = -a * s + b * c;
            }
            for i in 0..n {
                let a = z[(i, k)];
                let b = z[(i, k + 1)];
                z[(i, k)] = a * c + b * s.conj();
                z[(i, k + 1)] = -a * s + b * c;
            }
        }
        for k in l..=hi {
            h[(k, k)] += mu;
        }
    }
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    Ok(())
}

/// Eigenvector of upper-triangular `t` for `t[k][k]`, in Schur coordinates.
fn triangular_eigenvector(t: &ComplexMatrix, k: usize, norm: f64) -> Vec<C64> {
    let n = t.rows();
    let small = (f64::EPSILON * norm).max(f64::MIN_POSITIVE);
    let lambda = t[(k, k)];
    let mut x = vec![C64::new(0.0, 0.0); n];
    x[k] = C64::new(1.0, 0.0);
    for j in (0..k).rev() {
        let s: C64 = (j + 1..=k).map(|l| t[(j, l)] * x[l]).sum();
        let mut den = t[(j, j)] - lambda;
        if den.norm() < small {
            den = C64::new(small, 0.0);
        }
        x[j] = -s / den;
        let big = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if big > 1e100 {
            for z in x.iter_mut() {
                *z /= big;
            }
        }
    }
    x
}

/// Rayleigh update plus a few steps of shifted inverse iteration. Keeps the
/// best pair seen. Returns the number of iterations spent.
fn refine(m: &ComplexMatrix, lambda: &mut C64, v: &mut Vec<C64>, norm: f64) -> usize {
    let mut best = (residual(m, *lambda, v), *lambda, v.clone());
    let rq = inner(v, &m.matvec(v));
    let r = residual(m, rq, v);
    if r < best.0 {
        best = (r, rq, v.clone());
    }
    let mut iterations = 1;
    let mut cur_v = best.2.clone();
    let mut cur_l = best.1;
    for _ in 0..4 {
        iterations += 1;
        let shift = cur_l + C64::new(f64::EPSILON * norm.max(1.0), 0.0);
        let a = m.shift(shift);
        let Ok(sol) = lu_solve(&a, &ComplexMatrix::column(&cur_v)) else {
            break;
        };
        let mut y = sol.col(0);
        if normalize(&mut y) == 0.0 || y.iter().any(|z| !z.is_finite()) {
            break;
        }
        let rq = inner(&y, &m.matvec(&y));
        let r = residual(m, rq, &y);
        cur_v = y;
        cur_l = rq;
        if r < best.0 {
            best = (r, rq, cur_v.clone());
        }
        if best.0 <= RESIDUAL_TOL * norm * 1e-3 {
            break;
        }
    }
    *lambda = best.1;
    *v = best.2;
    iterations
}

/// Replaces eigenvectors of numerically repeated but non-defective
/// eigenvalues by an orthonormal basis of the eigenspace, with Rayleigh
/// quotients as eigenvalues. Back-substitution alone returns an arbitrary
/// (possibly near-parallel) basis there. The swap is kept only if every new
/// pair meets the residual bound.
fn orthonormalize_semisimple_clusters(m: &ComplexMatrix, eigenvalues: &mut [C64], vectors: &mut [Vec<C64>], norm: f64) {
    let n = eigenvalues.len();
    let tol = CLUSTER_TOL * norm.max(f64::MIN_POSITIVE);
    let mut label: Vec<usize> = (0..n).collect();
    // single-linkage clustering via repeated relabeling (n ≤ 16)
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..n {
            for j in 0..n {
                if label[j] != label[i] && (eigenvalues[i] - eigenvalues[j]).norm() <= tol {
                    let lo = label[i].min(label[j]);
                    let hi = label[i].max(label[j]);
                    for l in label.iter_mut() {
                        if *l == hi {
                            *l = lo;
                        }
                    }
                    changed = true;
                }
            }
        }
    }
    let mut done = vec![false; n];
    for i in 0..n {
        if done[i] {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|&j| label[j] == label[i]).collect();
        for &j in &members {
            done[j] = true;
        }
        if members.len() < 2 {
            continue;
        }
        let mean: C64 = members.iter().map(|&j| eigenvalues[j]).sum::<C64>() / members.len() as f64;
        let dec = svd(&m.shift(mean));
        let null = dec.s.iter().filter(|&&s| s <= tol).count();
        if null < members.len() {
            continue;
        }
        // smallest singular values sit at the end
        let bound = RESIDUAL_TOL * norm;
        let mut swap = Vec::with_capacity(members.len());
        for slot in 0..members.len() {
            let mut v = dec.v.col(dec.s.len() - 1 - slot);
            normalize(&mut v);
            let lambda = inner(&v, &m.matvec(&v));
            if residual(m, lambda, &v) > bound {
                swap.clear();
                break;
            }
            swap.push((lambda, v));
        }
        for (&j, (lambda, v)) in members.iter().zip(swap) {
            eigenvalues[j] = lambda;
            vectors[j] = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::c;

    fn assert_contains(vals: &[C64], want: C64, tol: f64) {
        assert!(vals.iter().any(|v| (v - want).norm() < tol), "{want} not in {vals:?}");
    }

    #[test]
    fn diagonal_matrix() {
        let m = ComplexMatrix::from_diag(&[c(1., 0.), c(0., 2.)]);
        let e = eigendecompose(&m).unwrap();
        for (lam, v) in e.eigenvalues.iter().zip(&e.right_eigenvectors) {
            if (lam - c(1., 0.)).norm() < 1e-14 {
                assert!((v[0] - c(1., 0.)).norm() < 1e-14 && v[1].norm() < 1e-14);
            } else {
                assert!((lam - c(0., 2.)).norm() < 1e-14);
                assert!((v[1] - c(1., 0.)).norm() < 1e-14 && v[0].norm() < 1e-14);
            }
        }
    }

    #[test]
    fn pauli_x() {
        let m = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        let e = eigendecompose(&m).unwrap();
        assert_contains(&e.eigenvalues, c(1., 0.), 1e-14);
        assert_contains(&e.eigenvalues, c(-1., 0.), 1e-14);
    }

    #[test]
    fn jordan_block_is_not_an_error() {
        let m = ComplexMatrix::from_rows(&[[c(-1., 0.), c(1., 0.)], [c(0., 0.), c(-1., 0.)]]);
        let e = eigendecompose(&m).unwrap();
        for lam in &e.eigenvalues {
            assert!((lam - c(-1., 0.)).norm() < 1e-7);
        }
        // both vectors collapse onto e1
        for v in &e.right_eigenvectors {
            assert!((v[0].norm() - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn repeated_semisimple_gets_orthonormal_basis() {
        let m = ComplexMatrix::zeros(3, 3);
        let e = eigendecompose(&m).unwrap();
        for i in 0..3 {
            for j in 0..i {
                assert!(inner(&e.right_eigenvectors[i], &e.right_eigenvectors[j]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn non_square_rejected() {
        assert!(matches!(eigendecompose(&ComplexMatrix::zeros(2, 3)), Err(NumericsError::NotSquare { .. })));
    }
}
