#![allow(dead_code)]

use hybrid_lindblad::lindblad::{JumpChannel, LindbladModel};
use hybrid_lindblad::numerics::{c, ComplexMatrix, C64};
use proptest::prelude::*;

pub fn complex(scale: f64) -> impl Strategy<Value = C64> {
    (-scale..scale, -scale..scale).prop_map(|(re, im)| c(re, im))
}

pub fn matrix(n: usize, scale: f64) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec(complex(scale), n * n).prop_map(move |d| ComplexMatrix::new(n, n, d).expect("shape"))
}

pub fn hermitian(n: usize, scale: f64) -> impl Strategy<Value = ComplexMatrix> {
    matrix(n, scale).prop_map(|m| m.hermitian_part())
}

/// `A A† / tr`, a random full-rank density matrix.
pub fn density(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    matrix(n, 1.0).prop_filter_map("nonzero", |a| {
        let r = &a * &a.adjoint();
        let tr = r.trace().re;
        (tr > 1e-3).then(|| r.scale_real(1.0 / tr))
    })
}

/// Dimension 2 or 3, one or two channels with arbitrary operators.
pub fn model() -> impl Strategy<Value = LindbladModel> {
    (2usize..=3).prop_flat_map(|n| {
        (hermitian(n, 1.0), prop::collection::vec((matrix(n, 1.0), 0.05..2.0f64), 1..=2)).prop_map(|(h, chans)| {
            let channels = chans.into_iter().map(|(op, rate)| JumpChannel::new(op, rate).expect("rate")).collect();
            LindbladModel::new(h, channels).expect("hermitian")
        })
    })
}

pub fn max_abs(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A model paired with a density matrix of matching dimension.
pub fn model_and_density() -> impl Strategy<Value = (LindbladModel, ComplexMatrix)> {
    model().prop_flat_map(|m| {
        let d = m.dim;
        (Just(m), density(d))
    })
}

pub fn model_and_hermitian() -> impl Strategy<Value = (LindbladModel, ComplexMatrix)> {
    model().prop_flat_map(|m| {
        let d = m.dim;
        (Just(m), hermitian(d, 1.0))
    })
}
