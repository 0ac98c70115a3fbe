use rayon::prelude::*;

use super::{decompose, ModelFamily, SpectraError, SpectralDecomposition};
use crate::numerics::{frobenius_inner, ComplexMatrix, C64};

const GREEDY_FLOOR: f64 = 0.5;

/// Eigenvalue and eigenmatrix paths over a parameter grid, indexed
/// `[branch][grid point]`. Branch `k` starts as the `k`-th sorted eigenvalue
/// at the first grid point.
#[derive(Debug, Clone)]
pub struct BranchTrack {
    pub parameter_grid: Vec<f64>,
    pub q: f64,
    pub eigenvalues: Vec<Vec<C64>>,
    pub eigenmatrices: Vec<Vec<ComplexMatrix>>,
    pub residuals: Vec<Vec<f64>>,
}

impl BranchTrack {
    pub fn n_branches(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Grid indices and branch pairs where two branches touch: a local minimum
    /// along the grid of `|Δλ|/scale + (1 − overlap)` below `threshold`.
    pub fn collisions(&self, threshold: f64) -> Vec<(usize, usize, usize)> {
        let n = self.n_branches();
        let npts = self.parameter_grid.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let score: Vec<f64> = (0..npts).map(|t| self.pair_score(i, j, t)).collect();
                for t in 0..npts {
                    let left = t == 0 || score[t] <= score[t - 1];
                    let right = t + 1 == npts || score[t] < score[t + 1];
                    if left && right && score[t] < threshold {
                        out.push((t, i, j));
                    }
                }
            }
        }
        out.sort();
        out
    }

    fn pair_score(&self, i: usize, j: usize, t: usize) -> f64 {
        let scale =
            (0..self.n_branches()).map(|b| self.eigenvalues[b][t].norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let gap = (self.eigenvalues[i][t] - self.eigenvalues[j][t]).norm() / scale;
        let ov = frobenius_inner(&self.eigenmatrices[i][t], &self.eigenmatrices[j][t]).norm();
        gap + (1.0 - ov).max(0.0)
    }
}

/// Decomposes the generator at every grid point (in parallel) and links the
/// eigenpairs into continuous branches by eigenmatrix overlap.
pub fn sweep<F: ModelFamily + ?Sized>(family: &F, grid: &[f64], q: f64) -> Result<BranchTrack, SpectraError> {
    if grid.is_empty() {
        return Err(SpectraError::Grid("empty grid".into()));
    }
    if grid.iter().any(|p| !p.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SpectraError::Grid("grid must be finite and strictly increasing".into()));
    }
    let decs: Vec<SpectralDecomposition> =
        grid.par_iter().map(|&p| decompose(&family.generator(p, q)?)).collect::<Result<_, SpectraError>>()?;

    let n = decs[0].len();
    let mut track = BranchTrack {
        parameter_grid: grid.to_vec(),
        q,
        eigenvalues: vec![Vec::with_capacity(grid.len()); n],
        eigenmatrices: vec![Vec::with_capacity(grid.len()); n],
        residuals: vec![Vec::with_capacity(grid.len()); n],
    };
    let mut prev: Vec<usize> = (0..n).collect();
    for (t, dec) in decs.iter().enumerate() {
        let assign = if t == 0 { prev.clone() } else { match_branches(&decs[t - 1], &prev, dec) };
        for (b, &k) in assign.iter().enumerate() {
            track.eigenvalues[b].push(dec.eigenvalues[k]);
            track.eigenmatrices[b].push(dec.eigenmatrices[k].clone());
            track.residuals[b].push(dec.residuals[k]);
        }
        prev = assign;
    }
    Ok(track)
}

/// For each branch `b` (currently at index `prev[b]` of `last`), the index in
/// `next` it continues to.
fn match_branches(last: &SpectralDecomposition, prev: &[usize], next: &SpectralDecomposition) -> Vec<usize> {
    let n = prev.len();
    let scale = last.spectral_scale().max(next.spectral_scale());
    let overlap: Vec<Vec<f64>> = prev
        .iter()
        .map(|&i| (0..n).map(|j| frobenius_inner(&last.eigenmatrices[i], &next.eigenmatrices[j]).norm()).collect())
        .collect();
    let dist = |b: usize, j: usize| (last.eigenvalues[prev[b]] - next.eigenvalues[j]).norm() / scale;

    // greedy: best remaining pair first; ties go to the closer eigenvalue
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|b| (0..n).map(move |j| (b, j))).collect();
    pairs.sort_by(|&(b1, j1), &(b2, j2)| {
        overlap[b2][j2]
            .total_cmp(&overlap[b1][j1])
            .then(dist(b1, j1).total_cmp(&dist(b2, j2)))
            .then((b1, j1).cmp(&(b2, j2)))
    });
    let mut assign = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    let mut weakest = f64::INFINITY;
    for (b, j) in pairs {
        if assign[b] == usize::MAX && !taken[j] {
            assign[b] = j;
            taken[j] = true;
            weakest = weakest.min(overlap[b][j]);
        }
    }
    if weakest >= GREEDY_FLOOR {
        return assign;
    }
    // optimal assignment; eigenvalue distance breaks near-ties
    let cost: Vec<Vec<f64>> = (0..n).map(|b| (0..n).map(|j| -overlap[b][j] + 1e-6 * dist(b, j)).collect()).collect();
    hungarian(&cost)
}

/// Minimum-cost perfect matching on a square cost matrix; returns the column
/// assigned to each row.
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let inf = f64::INFINITY;
    // 1-based potentials, standard O(n³) formulation
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}
