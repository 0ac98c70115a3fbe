use rayon::prelude::*;
use serde::Serialize;

use super::{decompose, jordan_block_size, ModelFamily, SpectraError, SpectralDecomposition};
use crate::numerics::{frobenius_inner, C64};

/// Eigenmatrix overlap above which two branches count as coalesced.
pub const COALESCENCE_OVERLAP: f64 = 1.0 - 1e-4;

/// Relative gap below which `m` coalescing eigenvalues are declared an EP:
/// `1e-6` for a pair, loosened as `(1e-12)^{1/m}` because an order-`m` EP
/// splits under rounding like `ε^{1/m}`.
pub fn gap_threshold(m: usize) -> f64 {
    1e-12f64.powf(1.0 / m.max(2) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpEstimate {
    pub parameter_value: f64,
    /// Indices into the sorted decomposition at `parameter_value`.
    pub coalescing_branches: Vec<usize>,
    pub eigenvalue_at_ep: C64,
    pub order: usize,
    /// Cluster diameter relative to the spectral radius.
    pub gap_at_ep: f64,
    /// Smallest pairwise eigenmatrix overlap inside the cluster.
    pub overlap_at_ep: f64,
    /// Rank-based confirmation at the located point, if it succeeded.
    pub jordan_block_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum EpOutcome {
    Found(EpEstimate),
    /// Nothing coalesced; reports the closest approach seen.
    NotFound {
        best_parameter: f64,
        best_gap: f64,
        best_overlap: f64,
    },
}

impl EpOutcome {
    pub fn found(&self) -> Option<&EpEstimate> {
        match self {
            EpOutcome::Found(e) => Some(e),
            EpOutcome::NotFound { .. } => None,
        }
    }
}

/// Search settings; [`locate_ep`] uses the defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpSearch {
    pub scan_points: usize,
    /// Golden-section stopping width relative to the parameter.
    pub rel_tol: f64,
}

impl Default for EpSearch {
    fn default() -> Self {
        Self { scan_points: 201, rel_tol: 1e-14 }
    }
}

struct Probe {
    score: f64,
    pair: (usize, usize),
    dec: SpectralDecomposition,
}

fn overlap(dec: &SpectralDecomposition, i: usize, j: usize) -> f64 {
    frobenius_inner(&dec.eigenmatrices[i], &dec.eigenmatrices[j]).norm().min(1.0)
}

fn probe<F: ModelFamily + ?Sized>(family: &F, p: f64, q: f64) -> Result<Probe, SpectraError> {
    let dec = decompose(&family.generator(p, q)?)?;
    let scale = dec.spectral_scale();
    let n = dec.len();
    let mut best = (f64::INFINITY, (0, 0));
    for i in 0..n {
        for j in i + 1..n {
            let gap = (dec.eigenvalues[i] - dec.eigenvalues[j]).norm() / scale;
            let s = gap + (1.0 - overlap(&dec, i, j));
            if s < best.0 {
                best = (s, (i, j));
            }
        }
    }
    Ok(Probe { score: best.0, pair: best.1, dec })
}

/// Golden-section refinement of the coalescence score
/// `min_{i<j} |λi − λj|/scale + (1 − |⟨ρi, ρj⟩|)` inside `bracket`, followed
/// by the EP declaration test (gap and eigenmatrix coalescence together).
pub fn locate_ep<F: ModelFamily + ?Sized>(family: &F, q: f64, bracket: (f64, f64)) -> Result<EpOutcome, SpectraError> {
    EpSearch::default().run(family, q, bracket)
}

impl EpSearch {
    pub fn run<F: ModelFamily + ?Sized>(
        &self,
        family: &F,
        q: f64,
        bracket: (f64, f64),
    ) -> Result<EpOutcome, SpectraError> {
        let (lo, hi) = bracket;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(SpectraError::Bracket(lo, hi));
        }
        let n = self.scan_points.max(3);
        let grid: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
        let scores: Vec<f64> =
            grid.par_iter().map(|&p| probe(family, p, q).map(|pr| pr.score)).collect::<Result<_, _>>()?;
        let k = (0..n).min_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b))).expect("non-empty");
        let mut a = grid[k.saturating_sub(1)];
        let mut b = grid[(k + 1).min(n - 1)];

        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = b - inv_phi * (b - a);
        let mut x2 = a + inv_phi * (b - a);
        let mut f1 = probe(family, x1, q)?.score;
        let mut f2 = probe(family, x2, q)?.score;
        for _ in 0..200 {
            if b - a <= self.rel_tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE) {
                break;
            }
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - inv_phi * (b - a);
                f1 = probe(family, x1, q)?.score;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + inv_phi * (b - a);
                f2 = probe(family, x2, q)?.score;
            }
        }
        // best of the final probes and the scan minimum
        let mut candidates = [(f1, x1), (f2, x2), (scores[k], grid[k])];
        candidates.sort_by(|u, v| u.0.total_cmp(&v.0));
        let p_star = candidates[0].1;
        Ok(declare(family, q, probe(family, p_star, q)?, p_star))
    }
}

fn declare<F: ModelFamily + ?Sized>(family: &F, q: f64, pr: Probe, p: f64) -> EpOutcome {
    let dec = &pr.dec;
    let scale = dec.spectral_scale();
    let (i, j) = pr.pair;
    let not_found = || EpOutcome::NotFound {
        best_parameter: p,
        best_gap: (dec.eigenvalues[i] - dec.eigenvalues[j]).norm() / scale,
        best_overlap: overlap(dec, i, j),
    };

    // grow the cluster around the best pair
    let mut cluster = vec![i, j];
    loop {
        let m = cluster.len() + 1;
        let next = (0..dec.len()).find(|&k| {
            !cluster.contains(&k)
                && cluster.iter().all(|&c| {
                    (dec.eigenvalues[k] - dec.eigenvalues[c]).norm() / scale < gap_threshold(m)
                        && overlap(dec, k, c) > COALESCENCE_OVERLAP
                })
        });
        match next {
            Some(k) => cluster.push(k),
            None => break,
        }
    }
    cluster.sort_unstable();
    let m = cluster.len();
    let mut diameter: f64 = 0.0;
    let mut min_overlap: f64 = 1.0;
    for (a, &u) in cluster.iter().enumerate() {
        for &v in &cluster[a + 1..] {
            diameter = diameter.max((dec.eigenvalues[u] - dec.eigenvalues[v]).norm() / scale);
            min_overlap = min_overlap.min(overlap(dec, u, v));
        }
    }
    if !(diameter < gap_threshold(m) && min_overlap > COALESCENCE_OVERLAP) {
        return not_found();
    }
    let mean: C64 = cluster.iter().map(|&k| dec.eigenvalues[k]).sum::<C64>() / m as f64;
    let jordan = family.generator(p, q).ok().and_then(|s| jordan_block_size(&s, mean).ok());
    EpOutcome::Found(EpEstimate {
        parameter_value: p,
        coalescing_branches: cluster,
        eigenvalue_at_ep: mean,
        order: m,
        gap_at_ep: diameter,
        overlap_at_ep: min_overlap,
        jordan_block_size: jordan,
    })
}
