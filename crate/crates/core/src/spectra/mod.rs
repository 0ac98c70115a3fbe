//! Sorted spectral decompositions of superoperators, branch tracking over
//! parameter sweeps, exceptional-point location and Jordan chains.

mod ep;
mod jordan;
mod track;

use thiserror::Error;

use crate::lindblad::{hybrid_liouvillian, LindbladError, LindbladModel, Superoperator};
use crate::numerics::{eigendecompose, unvec, ComplexMatrix, NumericsError, C64};

pub use ep::{locate_ep, EpEstimate, EpOutcome, EpSearch};
pub use jordan::{jordan_block_size, jordan_chain, refined_eigenmatrix, JordanChainResult};
pub use track::{sweep, BranchTrack};

/// Residual bound for decompositions, relative to `‖L‖_F`.
pub const DECOMPOSITION_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Lindblad(#[from] LindbladError),
    #[error(
        "no eigenvalue within {tol:.3e} of zero (smallest |λ| = {smallest:.3e}); the generator is not trace preserving"
    )]
    NoSteadyState { smallest: f64, tol: f64 },
    #[error("invalid parameter grid: {0}")]
    Grid(String),
    #[error("{lambda} is not an eigenvalue (min singular value {sigma_min:.3e})")]
    NotAnEigenvalue { lambda: C64, sigma_min: f64 },
    #[error("invalid bracket [{0}, {1}]")]
    Bracket(f64, f64),
}

/// A family of models indexed by one real parameter (typically a rate).
pub trait ModelFamily: Sync {
    fn model_at(&self, param: f64) -> Result<LindbladModel, LindbladError>;

    fn generator(&self, param: f64, q: f64) -> Result<Superoperator, LindbladError> {
        hybrid_liouvillian(&self.model_at(param)?, q)
    }
}

impl<F> ModelFamily for F
where
    F: Fn(f64) -> Result<LindbladModel, LindbladError> + Sync,
{
    fn model_at(&self, param: f64) -> Result<LindbladModel, LindbladError> {
        self(param)
    }
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<C64>,
    /// Unit Frobenius norm, phase fixed.
    pub eigenmatrices: Vec<ComplexMatrix>,
    pub residuals: Vec<f64>,
    pub source: Superoperator,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `max |λ|`, floored so it can serve as a relative scale.
    pub fn spectral_scale(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE)
    }
}

/// Sort permutation: `|Re λ|` ascending, then `Re` descending, then `Im`
/// ascending. Real parts within `1e-9` of the spectral scale are treated as
/// equal so that conjugate pairs order by their imaginary parts.
pub fn sort_order(eigenvalues: &[C64]) -> Vec<usize> {
    let scale = eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max);
    let tol = 1e-9 * scale;
    let mut idx: Vec<usize> = (0..eigenvalues.len()).collect();
    let exact = |a: &usize, b: &usize| {
        let (x, y) = (eigenvalues[*a], eigenvalues[*b]);
        x.re.abs().total_cmp(&y.re.abs()).then(y.re.total_cmp(&x.re)).then(x.im.total_cmp(&y.im)).then(a.cmp(b))
    };
    idx.sort_by(exact);

    // group runs of nearly equal |Re| and re-sort inside each run
    let mut out = Vec::with_capacity(idx.len());
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && eigenvalues[idx[end]].re.abs() - eigenvalues[idx[end - 1]].re.abs() <= tol {
            end += 1;
        }
        let mut group = idx[start..end].to_vec();
        let sign = |k: usize| if eigenvalues[k].re >= -tol { 0 } else { 1 };
        group.sort_by(|a, b| {
            sign(*a).cmp(&sign(*b)).then(eigenvalues[*a].im.total_cmp(&eigenvalues[*b].im)).then_with(|| exact(a, b))
        });
        out.extend(group);
        start = end;
    }
    out
}

pub fn decompose(s: &Superoperator) -> Result<SpectralDecomposition, SpectraError> {
    let eig = eigendecompose(&s.matrix)?;
    let d = s.hilbert_dim();
    let order = sort_order(&eig.eigenvalues);
    let mut eigenvalues = Vec::with_capacity(order.len());
    let mut eigenmatrices = Vec::with_capacity(order.len());
    let mut residuals = Vec::with_capacity(order.len());
    for k in order {
        eigenvalues.push(eig.eigenvalues[k]);
        eigenmatrices.push(unvec(&eig.right_eigenvectors[k], d)?);
        residuals.push(eig.residual_norms[k]);
    }
    Ok(SpectralDecomposition { eigenvalues, eigenmatrices, residuals, source: s.clone() })
}

/// Trace-one, Hermitian-symmetrized eigenmatrix of the eigenvalue nearest 0.
pub fn steady_state(d: &SpectralDecomposition) -> Result<ComplexMatrix, SpectraError> {
    let norm = d.source.matrix.frobenius_norm();
    let tol = 1e-10 * norm.max(1e-300);
    let (k, smallest) = d
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, l)| (k, l.norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .ok_or(SpectraError::NoSteadyState { smallest: f64::INFINITY, tol })?;
    if smallest > tol {
        return Err(SpectraError::NoSteadyState { smallest, tol });
    }
    let rho = &d.eigenmatrices[k];
    let tr = rho.trace();
    if tr.norm() < 1e-12 {
        return Err(SpectraError::NoSteadyState { smallest, tol });
    }
    Ok(rho.scale(tr.inv()).hermitian_part())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{liouvillian, pauli, JumpChannel};
    use crate::models::{example1_model, example2_model, Example1Params, Example2Params};
    use crate::numerics::c;

    #[test]
    fn example1_underdamped_spectrum() {
        let m = example1_model(&Example1Params { omega: 1.0, gamma_x: 0.5, q: 1.0 });
        let d = decompose(&liouvillian(&m)).unwrap();
        let h = 3f64.sqrt() / 2.0;
        let want = [c(0.0, 0.0), c(-0.5, -h), c(-0.5, h), c(-1.0, 0.0)];
        for (x, y) in d.eigenvalues.iter().zip(want) {
            assert!((x - y).norm() < 1e-12, "{:?}", d.eigenvalues);
        }
        for (k, r) in d.eigenmatrices.iter().enumerate() {
            assert!((r.frobenius_norm() - 1.0).abs() < 1e-14);
            assert!(d.residuals[k] <= DECOMPOSITION_RESIDUAL_TOL * d.source.matrix.frobenius_norm());
        }
    }

    #[test]
    fn example1_at_nojump_has_double_decay() {
        let m = example1_model(&Example1Params { omega: 1.0, gamma_x: 0.7, q: 0.0 });
        let d = decompose(&hybrid_liouvillian(&m, 0.0).unwrap()).unwrap();
        let n = d.eigenvalues.iter().filter(|l| (*l - c(-0.7, 0.0)).norm() < 1e-12).count();
        assert_eq!(n, 2);
    }

    #[test]
    fn zero_superoperator() {
        let m = LindbladModel::new(ComplexMatrix::zeros(2, 2), vec![]).unwrap();
        let d = decompose(&liouvillian(&m)).unwrap();
        assert!(d.eigenvalues.iter().all(|l| l.norm() == 0.0));
    }

    #[test]
    fn sort_is_permutation_invariant() {
        let vals = vec![c(-1.0, 2.0), c(0.0, 0.0), c(-1.0, -2.0), c(1.0, 0.5), c(-3.0, 0.0), c(-1.0, 0.0)];
        let sorted: Vec<C64> = sort_order(&vals).into_iter().map(|k| vals[k]).collect();
        assert_eq!(sorted[0], c(0.0, 0.0));
        assert_eq!(sorted[1], c(1.0, 0.5));
        assert_eq!(&sorted[2..5], &[c(-1.0, -2.0), c(-1.0, 0.0), c(-1.0, 2.0)]);
        let mut rev = vals.clone();
        rev.reverse();
        let again: Vec<C64> = sort_order(&rev).into_iter().map(|k| rev[k]).collect();
        assert_eq!(sorted, again);
    }

    #[test]
    fn steady_states() {
        for &g in &[0.3, 1.0, 2.5] {
            let m = example1_model(&Example1Params { omega: 1.0, gamma_x: g, q: 1.0 });
            let ss = steady_state(&decompose(&liouvillian(&m)).unwrap()).unwrap();
            assert!(ss.max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-12);
        }
        let m = example2_model(&Example2Params { omega: 1.0, gamma_minus: 2.0, q: 1.0 });
        let ss = steady_state(&decompose(&liouvillian(&m)).unwrap()).unwrap();
        let want = ComplexMatrix::from_rows(&[[c(5., 0.), c(0., 2.)], [c(0., -2.), c(1., 0.)]]).scale_real(1.0 / 6.0);
        assert!(ss.max_abs_diff(&want) < 1e-12);

        let decay =
            LindbladModel::new(ComplexMatrix::zeros(2, 2), vec![JumpChannel::new(pauli::minus(), 1.0).unwrap()])
                .unwrap();
        let ss = steady_state(&decompose(&liouvillian(&decay)).unwrap()).unwrap();
        let down = ComplexMatrix::from_real_rows(&[[0.0, 0.0], [0.0, 1.0]]);
        assert!(ss.max_abs_diff(&down) < 1e-12);
    }

    #[test]
    fn steady_state_requires_trace_preservation() {
        let m = example1_model(&Example1Params { omega: 1.0, gamma_x: 1.0, q: 0.5 });
        let d = decompose(&hybrid_liouvillian(&m, 0.5).unwrap()).unwrap();
        assert!(matches!(steady_state(&d), Err(SpectraError::NoSteadyState { .. })));
    }
}
