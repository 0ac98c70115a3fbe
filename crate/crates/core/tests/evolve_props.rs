mod common;

use common::model_and_density;
use hybrid_lindblad::evolve::{linspace, propagate};
use hybrid_lindblad::lindblad::hybrid_liouvillian;
use hybrid_lindblad::numerics::eigendecompose;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn full_lindblad_conserves_raw_trace((m, rho) in model_and_density(), t in 0.1..4.0f64) {
        let s = hybrid_liouvillian(&m, 1.0).unwrap();
        let out = propagate(&s, &rho, &linspace(t, 21)).unwrap();
        for tr in &out.raw_traces {
            prop_assert!((tr - 1.0).abs() < 1e-12, "raw trace {tr}");
        }
    }

    #[test]
    fn raw_trace_never_grows_and_states_stay_positive(
        (m, rho) in model_and_density(), q in 0.0..1.0f64, t in 0.1..4.0f64,
    ) {
        let s = hybrid_liouvillian(&m, q).unwrap();
        let out = propagate(&s, &rho, &linspace(t, 21)).unwrap();
        for w in out.raw_traces.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        for st in &out.states {
            prop_assert!((st.trace().re - 1.0).abs() < 1e-12);
            prop_assert!(st.is_hermitian(1e-12));
            let ev = eigendecompose(st).unwrap().eigenvalues;
            prop_assert!(ev.iter().all(|l| l.re > -1e-9), "{ev:?}");
        }
    }

    #[test]
    fn result_independent_of_sampling((m, rho) in model_and_density(), q in 0.0..1.5f64, t in 0.1..3.0f64) {
        let s = hybrid_liouvillian(&m, q).unwrap();
        let coarse = propagate(&s, &rho, &[0.0, t]).unwrap();
        let fine = propagate(&s, &rho, &linspace(t, 40)).unwrap();
        let a = coarse.states.last().unwrap();
        let b = fine.states.last().unwrap();
        prop_assert!(a.max_abs_diff(b) < 1e-10);
        let (ra, rb) = (coarse.raw_traces[1], *fine.raw_traces.last().unwrap());
        prop_assert!((ra - rb).abs() < 1e-10 * ra.max(1e-300));
    }
}
