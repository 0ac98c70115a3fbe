use hybrid_lindblad::lindblad::{hybrid_liouvillian, liouvillian, LindbladError, LindbladModel, Superoperator};
use hybrid_lindblad::models::verify::multiset_distance;
use hybrid_lindblad::models::{
    example1_ep, example1_hybrid_spectrum, example1_model, example2_hybrid_ep, example2_hybrid_spectrum,
    example2_liouvillian_spectrum, example2_model, Example1Params, Example2Params,
};
use hybrid_lindblad::numerics::{eigendecompose, vec, ComplexMatrix, C64};
use hybrid_lindblad::spectra::{decompose, locate_ep, steady_state};
use proptest::prelude::*;

fn eigen_residual(s: &Superoperator, lambda: C64, rho: &ComplexMatrix) -> f64 {
    let v = vec(rho).unwrap();
    let lv = s.matrix.matvec(&v);
    let r: f64 = lv.iter().zip(&v).map(|(a, b)| (a - lambda * b).norm_sqr()).sum::<f64>().sqrt();
    r / rho.frobenius_norm()
}

fn ex1(omega: f64, gamma_x: f64, q: f64) -> (Example1Params, LindbladModel) {
    let p = Example1Params { omega, gamma_x, q };
    (p, example1_model(&p))
}

fn ex2(omega: f64, gamma_minus: f64, q: f64) -> (Example2Params, LindbladModel) {
    let p = Example2Params { omega, gamma_minus, q };
    (p, example2_model(&p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn example1_spectrum_matches_closed_form(w in 0.2..3.0f64, g in 0.05..3.0f64, q in 0.0..2.0f64) {
        let (p, m) = ex1(w, g, q);
        let s = hybrid_liouvillian(&m, q).unwrap();
        let cf = example1_hybrid_spectrum(&p);
        let dec = decompose(&s).unwrap();
        // eigenvalues split like √ε near the EP, so allow for that
        let scale = dec.spectral_scale();
        prop_assert!(multiset_distance(&cf.eigenvalues, &dec.eigenvalues) < 1e-7 * scale);
        for (l, rho) in cf.eigenvalues.iter().zip(cf.eigenmatrices.as_ref().unwrap()) {
            prop_assert!(eigen_residual(&s, *l, rho) < 1e-10 * scale);
        }
    }

    #[test]
    fn example2_liouvillian_matches_closed_form(w in 0.2..3.0f64, g in 0.05..6.0f64) {
        let (p, m) = ex2(w, g, 1.0);
        let s = liouvillian(&m);
        let cf = example2_liouvillian_spectrum(&p);
        let dec = decompose(&s).unwrap();
        prop_assert!(multiset_distance(&cf.eigenvalues, &dec.eigenvalues) < 1e-7 * dec.spectral_scale());
        for (l, rho) in cf.eigenvalues.iter().zip(cf.eigenmatrices.as_ref().unwrap()) {
            prop_assert!(eigen_residual(&s, *l, rho) < 1e-10 * dec.spectral_scale());
        }
    }

    #[test]
    fn example2_hybrid_keeps_half_gamma(w in 0.2..3.0f64, g in 0.05..6.0f64, q in 0.0..1.5f64) {
        let (p, m) = ex2(w, g, q);
        let dec = decompose(&hybrid_liouvillian(&m, q).unwrap()).unwrap();
        let scale = dec.spectral_scale();
        let half = C64::new(-g / 2.0, 0.0);
        prop_assert!(dec.eigenvalues.iter().any(|l| (l - half).norm() < 1e-9 * scale));
        let cf = example2_hybrid_spectrum(&p);
        prop_assert!(multiset_distance(&cf.eigenvalues, &dec.eigenvalues) < 1e-7 * scale);
    }

    #[test]
    fn steady_state_is_a_density_matrix(w in 0.2..3.0f64, g in 0.05..6.0f64, which in 0usize..2) {
        let m = if which == 0 { ex1(w, g, 1.0).1 } else { ex2(w, g, 1.0).1 };
        let ss = steady_state(&decompose(&liouvillian(&m)).unwrap()).unwrap();
        prop_assert!((ss.trace() - C64::new(1.0, 0.0)).norm() < 1e-10);
        prop_assert!(ss.is_hermitian(1e-10));
        let ev = eigendecompose(&ss).unwrap().eigenvalues;
        prop_assert!(ev.iter().all(|l| l.re > -1e-10));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn example1_ep_located_at_omega_over_q(w in 0.5..2.0f64, q in 0.3..1.0f64) {
        let want = example1_ep(w, q).unwrap();
        let family = move |g: f64| -> Result<LindbladModel, LindbladError> { Ok(ex1(w, g, q).1) };
        let out = locate_ep(&family, q, (0.6 * want, 1.5 * want)).unwrap();
        let ep = out.found().expect("EP inside the bracket");
        prop_assert!((ep.parameter_value - want).abs() < 1e-6 * want, "{} vs {want}", ep.parameter_value);
    }

    #[test]
    fn example2_ep_follows_closed_form(w in 0.5..2.0f64, q in 0.2..0.95f64) {
        let want = example2_hybrid_ep(w, q).unwrap();
        let family = move |g: f64| -> Result<LindbladModel, LindbladError> { Ok(ex2(w, g, q).1) };
        let out = locate_ep(&family, q, (0.8 * want, 1.25 * want)).unwrap();
        let ep = out.found().expect("EP inside the bracket");
        prop_assert!((ep.parameter_value - want).abs() < 1e-6 * want, "{} vs {want}", ep.parameter_value);
    }
}
