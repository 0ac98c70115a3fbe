//! One-sided (Hestenes) Jacobi SVD and the rank-truncated minimum-norm solver
//! built on it.

use super::{inner, norm2, ComplexMatrix, NumericsError, C64};

/// Relative singular-value cutoff used when callers have no better choice.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

const MAX_SWEEPS: usize = 80;

/// Thin SVD `a = u · diag(s) · v†` with `s` sorted descending.
///
/// For `rows ≥ cols`, `v` is the full `cols × cols` unitary, so the trailing
/// columns of `v` span the numerical null space.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn sigma_max(&self) -> f64 {
        self.s.first().copied().unwrap_or(0.0)
    }

    /// Number of singular values strictly above `abs_tol`.
    pub fn rank_abs(&self, abs_tol: f64) -> usize {
        self.s.iter().filter(|&&s| s > abs_tol).count()
    }

    /// Number of singular values above `rel_tol · σ_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        self.rank_abs(rel_tol * self.sigma_max())
    }
}

pub fn svd(a: &ComplexMatrix) -> Svd {
    if a.rows() >= a.cols() {
        jacobi_tall(a)
    } else {
        let t = jacobi_tall(&a.adjoint());
        Svd { u: t.v, s: t.s, v: t.u }
    }
}

fn jacobi_tall(a: &ComplexMatrix) -> Svd {
    let (m, n) = (a.rows(), a.cols());
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| a.col(j)).collect();
    let mut vcols: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[j] = C64::new(1.0, 0.0);
            e
        })
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = cols[p].iter().map(|z| z.norm_sqr()).sum::<f64>();
                let beta = cols[q].iter().map(|z| z.norm_sqr()).sum::<f64>();
                let g = inner(&cols[p], &cols[q]);
                let gabs = g.norm();
                if gabs == 0.0 || gabs <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let e = g / gabs;
                let zeta = (beta - alpha) / (2.0 * gabs);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                rotate(&mut cols, p, q, e, cs, sn);
                rotate(&mut vcols, p, q, e, cs, sn);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(usize, f64)> = cols.iter().map(|c| norm2(c)).enumerate().collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut u = ComplexMatrix::zeros(m, n);
    let mut v = ComplexMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (k, &(j, sigma)) in order.iter().enumerate() {
        s.push(sigma);
        if sigma > 0.0 {
            let uj: Vec<C64> = cols[j].iter().map(|z| z / sigma).collect();
            u.set_col(k, &uj);
        }
        v.set_col(k, &vcols[j]);
    }
    Svd { u, s, v }
}

fn rotate(cols: &mut [Vec<C64>], p: usize, q: usize, e: C64, cs: f64, sn: f64) {
    let ec = e.conj();
    for i in 0..cols[p].len() {
        let xp = cols[p][i];
        let xq = cols[q][i] * ec;
        cols[p][i] = xp * cs - xq * sn;
        cols[q][i] = xp * sn + xq * cs;
    }
}

#[derive(Debug, Clone)]
pub struct MinNormSolution {
    pub x: Vec<C64>,
    /// `‖a·x − b‖₂`
    pub residual: f64,
    /// Singular values kept after truncation.
    pub rank: usize,
    /// False when the residual exceeds `1e-6·‖b‖`.
    pub consistent: bool,
    /// Orthonormal basis of the truncated (numerical null) directions of `a`.
    pub null_space: Vec<Vec<C64>>,
}

/// Minimum-norm least-squares solution of `a·x = b`, truncating singular
/// values below `tol·σ_max`.
pub fn min_norm_solve(a: &ComplexMatrix, b: &[C64], tol: f64) -> Result<MinNormSolution, NumericsError> {
    if a.rows() != b.len() {
        return Err(NumericsError::DimensionMismatch(format!(
            "min_norm_solve: {} rows vs rhs length {}",
            a.rows(),
            b.len()
        )));
    }
    let dec = svd(a);
    let cutoff = tol * dec.sigma_max();
    let n = a.cols();
    let mut x = vec![C64::new(0.0, 0.0); n];
    let mut rank = 0;
    let mut null_space = Vec::new();
    for (k, &sigma) in dec.s.iter().enumerate() {
        let vk = dec.v.col(k);
        if sigma > cutoff && sigma > 0.0 {
            rank += 1;
            let coef = inner(&dec.u.col(k), b) / sigma;
            for (xi, vi) in x.iter_mut().zip(&vk) {
                *xi += coef * vi;
            }
        } else {
            null_space.push(vk);
        }
    }
    // with rows < cols the thin SVD only has `rows` columns; the remaining
    // null directions are not enumerated
    let ax = a.matvec(&x);
    let residual = norm2(&ax.iter().zip(b).map(|(p, q)| p - q).collect::<Vec<_>>());
    let consistent = residual <= 1e-6 * norm2(b);
    Ok(MinNormSolution { x, residual, rank, consistent, null_space })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::c;

    fn reconstruct(d: &Svd) -> ComplexMatrix {
        let k = d.s.len();
        let mut us = d.u.clone();
        for j in 0..k {
            for i in 0..us.rows() {
                us[(i, j)] *= d.s[j];
            }
        }
        let vk = {
            let mut m = ComplexMatrix::zeros(d.v.rows(), k);
            for j in 0..k {
                m.set_col(j, &d.v.col(j));
            }
            m
        };
        &us * &vk.adjoint()
    }

    #[test]
    fn svd_reconstructs_rectangular() {
        let a = ComplexMatrix::from_rows(&[[c(1., 2.), c(0., -1.), c(3., 0.)], [c(-2., 0.5), c(1., 1.), c(0., 0.)]]);
        for m in [a.clone(), a.adjoint()] {
            let d = svd(&m);
            assert!(reconstruct(&d).max_abs_diff(&m) < 1e-13);
            assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn min_norm_trivial_cases() {
        let b = vec![c(1., -2.), c(0.5, 3.)];
        let sol = min_norm_solve(&ComplexMatrix::identity(2), &b, DEFAULT_RANK_TOL).unwrap();
        assert!(sol.x.iter().zip(&b).all(|(x, y)| (x - y).norm() < 1e-15));
        assert!(sol.consistent);

        let zero = vec![c(0., 0.); 2];
        let sol = min_norm_solve(&ComplexMatrix::zeros(2, 2), &zero, DEFAULT_RANK_TOL).unwrap();
        assert!(sol.x.iter().all(|z| *z == c(0., 0.)));
        assert!(sol.consistent);
        assert_eq!(sol.rank, 0);

        let a = ComplexMatrix::from_real_rows(&[[1.0, 0.0], [0.0, 0.0]]);
        let sol = min_norm_solve(&a, &[c(1., 0.), c(0., 0.)], DEFAULT_RANK_TOL).unwrap();
        assert!((sol.x[0] - c(1., 0.)).norm() < 1e-15 && sol.x[1].norm() < 1e-15);
        assert!(sol.consistent);
        assert_eq!(sol.rank, 1);
    }

    #[test]
    fn inconsistent_system_is_flagged() {
        let a = ComplexMatrix::from_real_rows(&[[1.0, 0.0], [0.0, 0.0]]);
        let sol = min_norm_solve(&a, &[c(1., 0.), c(1., 0.)], DEFAULT_RANK_TOL).unwrap();
        assert!(!sol.consistent);
        assert!((sol.residual - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rhs_length_checked() {
        assert!(min_norm_solve(&ComplexMatrix::identity(2), &[c(1., 0.)], 1e-9).is_err());
    }
}
