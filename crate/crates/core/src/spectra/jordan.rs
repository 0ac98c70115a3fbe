use super::SpectraError;
use crate::lindblad::Superoperator;
use crate::numerics::{fix_phase, frobenius_inner, min_norm_solve, normalize, svd, unvec, vec, ComplexMatrix, C64};

/// Truncation tolerance for the singular Jordan system.
const CHAIN_RANK_TOL: f64 = 1e-9;
/// Relative rank tolerance for powers of `L − λI`.
const BLOCK_RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct JordanChainResult {
    pub eigenvalue: C64,
    pub eigenmatrix: ComplexMatrix,
    /// Minimum-norm member of the family `ρ̃ + c·ρ`.
    pub generalized_eigenmatrix: ComplexMatrix,
    /// `‖L ρ̃ − λ ρ̃ − ρ‖_F`.
    pub residual: f64,
    pub consistent: bool,
    /// Basis of the truncated null space of `L − λI`, i.e. the directions the
    /// family is free in.
    pub family_basis: Vec<ComplexMatrix>,
}

impl JordanChainResult {
    /// Distance of `candidate` from the solution family after fitting both its
    /// overall scale (candidates may be chained to a rescaled `ρ`) and the free
    /// family coefficients.
    pub fn family_distance(&self, s: &Superoperator, candidate: &ComplexMatrix) -> f64 {
        let d = self.eigenmatrix.rows();
        let a = s.matrix.shift(self.eigenvalue);
        let image = unvec(&a.matvec(&vec(candidate).expect("square")), d).expect("square");
        let rr = frobenius_inner(&self.eigenmatrix, &self.eigenmatrix);
        let scale = frobenius_inner(&self.eigenmatrix, &image) / rr;
        if scale.norm() == 0.0 {
            return f64::INFINITY;
        }
        let mut rest = &candidate.scale(scale.inv()) - &self.generalized_eigenmatrix;
        for basis in &self.family_basis {
            let coef = frobenius_inner(basis, &rest) / frobenius_inner(basis, basis);
            rest = &rest - &basis.scale(coef);
        }
        rest.frobenius_norm()
    }
}

/// Solves `(L − λI) vec(ρ̃) = vec(ρ)` in the minimum-norm sense.
pub fn jordan_chain(s: &Superoperator, lambda: C64, rho: &ComplexMatrix) -> Result<JordanChainResult, SpectraError> {
    let d = s.hilbert_dim();
    let a = s.matrix.shift(lambda);
    let b = vec(rho)?;
    let sol = min_norm_solve(&a, &b, CHAIN_RANK_TOL)?;
    let residual = sol.residual;
    let bound = 1e-8 * s.matrix.frobenius_norm().max(1.0);
    let consistent = sol.consistent && residual <= bound;
    let family_basis = sol.null_space.iter().map(|v| unvec(v, d)).collect::<Result<_, _>>()?;
    Ok(JordanChainResult {
        eigenvalue: lambda,
        eigenmatrix: rho.clone(),
        generalized_eigenmatrix: unvec(&sol.x, d)?,
        residual,
        consistent,
        family_basis,
    })
}

/// Unit-norm eigenmatrix taken as the right singular vector of `L − λI` with
/// the smallest singular value. Near an EP this is better conditioned than
/// the eigenvector of an individual (split) eigenvalue.
pub fn refined_eigenmatrix(s: &Superoperator, lambda: C64) -> Result<ComplexMatrix, SpectraError> {
    let dec = svd(&s.matrix.shift(lambda));
    let mut v = dec.v.col(dec.s.len() - 1);
    normalize(&mut v);
    fix_phase(&mut v);
    Ok(unvec(&v, s.hilbert_dim())?)
}

/// Size of the largest Jordan block for `λ`: the number of strict rank drops
/// of `(L − λI)^k`, with rank tolerance `1e-8·σ_max(L − λI)^k`.
pub fn jordan_block_size(s: &Superoperator, lambda: C64) -> Result<usize, SpectraError> {
    let a = s.matrix.shift(lambda);
    let n = a.rows();
    let first = svd(&a);
    let smax = first.sigma_max();
    let rank_of = |m: &ComplexMatrix, k: i32| {
        let dec = if k == 1 { first.clone() } else { svd(m) };
        dec.rank_abs(BLOCK_RANK_TOL * smax.powi(k))
    };
    let r1 = rank_of(&a, 1);
    if r1 == n {
        let sigma_min = first.s.last().copied().unwrap_or(0.0);
        return Err(SpectraError::NotAnEigenvalue { lambda, sigma_min });
    }
    let mut size = 1;
    let mut prev = r1;
    let mut power = a.clone();
    for k in 2..=n as i32 {
        power = &power * &a;
        let r = rank_of(&power, k);
        if r >= prev {
            break;
        }
        size += 1;
        prev = r;
        if r == 0 {
            break;
        }
    }
    Ok(size)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{hybrid_liouvillian, liouvillian};
    use crate::models::{
        example1_generalized_eigenmatrix, example1_model, example2_lep_generalized_eigenmatrix, example2_model,
        Example1Params, Example2Params,
    };
    use crate::numerics::c;

    #[test]
    fn example1_lep_chain_contains_listed_family() {
        let s = liouvillian(&example1_model(&Example1Params { omega: 1.0, gamma_x: 1.0, q: 1.0 }));
        let lambda = c(-1.0, 0.0);
        let rho = ComplexMatrix::from_rows(&[[c(0., 0.), c(0., -1.)], [c(1., 0.), c(0., 0.)]]);
        let r = jordan_chain(&s, lambda, &rho).unwrap();
        assert!(r.consistent);
        assert!(r.residual < 1e-12);
        for a in [c(1.0, 0.0), c(0.0, 0.0), c(0.3, -0.7)] {
            let cand = example1_generalized_eigenmatrix(a);
            assert!(r.family_distance(&s, &cand) < 1e-12, "a={a}");
        }
    }

    #[test]
    fn example2_lep_chain() {
        let s = liouvillian(&example2_model(&Example2Params { omega: 1.0, gamma_minus: 4.0, q: 1.0 }));
        let lambda = c(-3.0, 0.0);
        let rho = ComplexMatrix::from_rows(&[[c(-4., 0.), c(0., 4.)], [c(0., -4.), c(4., 0.)]]);
        let r = jordan_chain(&s, lambda, &rho).unwrap();
        assert!(r.consistent);
        assert!(r.family_distance(&s, &example2_lep_generalized_eigenmatrix()) < 1e-12);
    }

    #[test]
    fn simple_eigenvalue_is_inconsistent() {
        let s = liouvillian(&example1_model(&Example1Params { omega: 1.0, gamma_x: 0.5, q: 1.0 }));
        let rho = ComplexMatrix::identity(2).scale_real(0.5f64.sqrt());
        let r = jordan_chain(&s, c(0.0, 0.0), &rho).unwrap();
        assert!(!r.consistent);
    }

    #[test]
    fn block_sizes() {
        let s = liouvillian(&example1_model(&Example1Params { omega: 1.0, gamma_x: 0.5, q: 1.0 }));
        assert_eq!(jordan_block_size(&s, c(0.0, 0.0)).unwrap(), 1);
        assert!(matches!(jordan_block_size(&s, c(0.3, 0.0)), Err(SpectraError::NotAnEigenvalue { .. })));
        let s = liouvillian(&example1_model(&Example1Params { omega: 1.0, gamma_x: 1.0, q: 1.0 }));
        assert_eq!(jordan_block_size(&s, c(-1.0, 0.0)).unwrap(), 2);
        let m = example2_model(&Example2Params { omega: 1.0, gamma_minus: 2.0, q: 0.0 });
        let s = hybrid_liouvillian(&m, 0.0).unwrap();
        assert!(jordan_block_size(&s, c(-1.0, 0.0)).unwrap() >= 3);
        let s = liouvillian(&example2_model(&Example2Params { omega: 1.0, gamma_minus: 4.0, q: 1.0 }));
        assert_eq!(jordan_block_size(&s, c(-3.0, 0.0)).unwrap(), 2);
    }
}
