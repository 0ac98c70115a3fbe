mod common;

use common::{max_abs, model, model_and_density, model_and_hermitian};
use hybrid_lindblad::lindblad::{
    effective_hamiltonian, hybrid_liouvillian, liouvillian, nojump_superop, LindbladModel, ModelDescription,
};
use hybrid_lindblad::numerics::{eigendecompose, unvec, vec, ComplexMatrix, C64};
use hybrid_lindblad::spectra::decompose;
use proptest::prelude::*;

fn identity_vec(d: usize) -> Vec<C64> {
    vec(&ComplexMatrix::identity(d)).unwrap()
}

/// `vec(I)ᵀ L`, i.e. the trace functional composed with `L`.
fn trace_row(m: &ComplexMatrix, d: usize) -> Vec<C64> {
    let id = identity_vec(d);
    (0..m.cols()).map(|j| (0..m.rows()).map(|i| id[i] * m[(i, j)]).sum()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn liouvillian_preserves_trace(m in model()) {
        let s = liouvillian(&m);
        let scale = s.matrix.frobenius_norm();
        prop_assert!(max_abs(&trace_row(&s.matrix, m.dim)) < 1e-12 * scale);
        prop_assert!(s.preserves_trace());
    }

    #[test]
    fn hybrid_is_interpolation(m in model(), qi in 0usize..4) {
        let q = [0.0, 0.3, 1.0, 2.5][qi];
        let h = hybrid_liouvillian(&m, q).unwrap().matrix;
        let l = liouvillian(&m).matrix;
        let lp = nojump_superop(&m).matrix;
        let mix = &l.scale_real(q) + &lp.scale_real(1.0 - q);
        prop_assert!(h.max_abs_diff(&mix) < 1e-12 * l.frobenius_norm().max(1.0));
    }

    #[test]
    fn generators_preserve_hermiticity((m, rho) in model_and_hermitian(), q in 0.0..3.0f64) {
        let d = m.dim;
        let out = unvec(&hybrid_liouvillian(&m, q).unwrap().matrix.matvec(&vec(&rho).unwrap()), d).unwrap();
        prop_assert!(out.is_hermitian(1e-12 * out.frobenius_norm().max(1.0)));
    }

    #[test]
    fn nojump_spectrum_from_effective_hamiltonian(m in model()) {
        let h = eigendecompose(&effective_hamiltonian(&m)).unwrap().eigenvalues;
        let mut want: Vec<C64> = Vec::new();
        for a in &h {
            for b in &h {
                want.push(C64::new(0.0, -1.0) * (a - b.conj()));
            }
        }
        let got = decompose(&nojump_superop(&m)).unwrap().eigenvalues;
        let scale = got.iter().map(|z| z.norm()).fold(1.0, f64::max);
        // every predicted value appears in the computed spectrum
        for w in &want {
            let nearest = got.iter().map(|g| (g - w).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(nearest < 1e-8 * scale, "{w} missing, nearest {nearest}");
        }
    }

    #[test]
    fn hybrid_trace_decays_for_q_below_one((m, rho) in model_and_density(), q in 0.0..1.0f64) {
        let d = m.dim;
        let s = hybrid_liouvillian(&m, q).unwrap();
        let drho = unvec(&s.matrix.matvec(&vec(&rho).unwrap()), d).unwrap();
        // d/dt tr ρ = −(1 − q) Σ tr(Γ†Γ ρ) ≤ 0 for positive ρ
        let rate = (&m.total_decay_operator() * &rho).trace().re;
        prop_assert!((drho.trace().re + (1.0 - q) * rate).abs() < 1e-10 * rate.abs().max(1.0));
    }
}

#[test]
fn json_roundtrip_matches_preset() {
    let preset =
        ModelDescription::from_json(r#"{"preset": "example1", "omega": 1.0, "gamma": 0.5}"#).unwrap().build().unwrap();
    let explicit = ModelDescription::from_json(
        r#"{"dim": 2,
            "hamiltonian": [[0.5, 0], [0, 0], [0, 0], [-0.5, 0]],
            "channels": [{"operator": [[0, 0], [1, 0], [1, 0], [0, 0]], "rate": 0.5}]}"#,
    )
    .unwrap()
    .build()
    .unwrap();
    assert!(liouvillian(&preset).matrix.max_abs_diff(&liouvillian(&explicit).matrix) < 1e-15);
    let _: &LindbladModel = &explicit;
}
