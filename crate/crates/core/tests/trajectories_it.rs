use hybrid_lindblad::evolve::{linspace, propagate};
use hybrid_lindblad::lindblad::{hybrid_liouvillian, pauli, projector, qubit_state, QubitStateSpec};
use hybrid_lindblad::models::{example1_model, example2_model, Example1Params, Example2Params};
use hybrid_lindblad::numerics::{norm2, C64};
use hybrid_lindblad::trajectories::{run_ensemble, simulate, DetectorSetup, TrajectoryConfig};
use proptest::prelude::*;

fn psi0() -> Vec<C64> {
    qubit_state(QubitStateSpec { theta: 0.7, phi: 0.3 })
}

fn cfg(n: usize, t_max: f64, seed: u64) -> TrajectoryConfig {
    TrajectoryConfig { dt: 2e-3, t_max, n_traj: n, master_seed: seed, sample_times: linspace(t_max, 11) }
}

fn binomial_z(k: usize, n: usize, p: f64) -> f64 {
    (k as f64 - n as f64 * p) / (n as f64 * p * (1.0 - p)).sqrt()
}

#[test]
fn unit_q_accepts_every_record() {
    let m = example1_model(&Example1Params { omega: 1.0, gamma_x: 0.8, q: 1.0 });
    let recs = simulate(&m, DetectorSetup::TwoDetector { q: 1.0 }, &cfg(200, 3.0, 7), &psi0()).unwrap();
    assert!(recs.iter().all(|r| r.accepted && r.n_jumps_by_detector[1] == 0));
    assert!(recs.iter().any(|r| r.n_jumps_by_detector[0] > 0));
}

#[test]
fn acceptance_matches_raw_trace() {
    let (q, t) = (0.4, 1.5);
    let m = example2_model(&Example2Params { omega: 1.0, gamma_minus: 1.0, q });
    let n = 4000;
    let recs = simulate(&m, DetectorSetup::TwoDetector { q }, &cfg(n, t, 11), &psi0()).unwrap();
    let k = recs.iter().filter(|r| r.accepted).count();
    let s = hybrid_liouvillian(&m, q).unwrap();
    let p = *propagate(&s, &projector(&psi0()), &[0.0, t]).unwrap().raw_traces.last().unwrap();
    let z = binomial_z(k, n, p);
    assert!(z.abs() < 4.0, "accepted {k}/{n}, expected fraction {p}, z = {z}");
}

#[test]
fn inefficient_detector_thins_by_jump_count() {
    let eta = 0.3;
    let m = example1_model(&Example1Params { omega: 1.0, gamma_x: 1.0, q: 1.0 });
    let recs = simulate(&m, DetectorSetup::Inefficient { eta }, &cfg(4000, 2.0, 5), &psi0()).unwrap();
    // P(accept | N jumps) = (1 − η)^N for every N with enough records
    for n_jumps in 0..4 {
        let group: Vec<_> = recs.iter().filter(|r| r.jump_events.len() == n_jumps).collect();
        if group.len() < 100 {
            continue;
        }
        let k = group.iter().filter(|r| r.accepted).count();
        let p = (1.0 - eta).powi(n_jumps as i32);
        if n_jumps == 0 {
            assert_eq!(k, group.len());
        } else {
            let z = binomial_z(k, group.len(), p);
            assert!(z.abs() < 4.0, "N = {n_jumps}: {k}/{}, p = {p}, z = {z}", group.len());
        }
    }
}

#[test]
fn same_seed_reproduces_records() {
    let m = example2_model(&Example2Params { omega: 1.0, gamma_minus: 2.0, q: 1.0 });
    let setup = DetectorSetup::TwoDetector { q: 0.5 };
    let c = cfg(64, 2.0, 99);
    let obs = [pauli::z()];
    let a = run_ensemble(&m, setup, &c, &psi0(), &obs).unwrap();
    let b = run_ensemble(&m, setup, &c, &psi0(), &obs).unwrap();
    assert_eq!(serde_json::to_string(&a.records).unwrap(), serde_json::to_string(&b.records).unwrap());
    assert_eq!(a.stats.mean, b.stats.mean);
    let other = run_ensemble(&m, setup, &TrajectoryConfig { master_seed: 100, ..c }, &psi0(), &obs).unwrap();
    assert_ne!(serde_json::to_string(&a.records).unwrap(), serde_json::to_string(&other.records).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn records_are_consistent(g in 0.1..2.0f64, q in 0.0..1.0f64, seed in any::<u64>()) {
        let m = example1_model(&Example1Params { omega: 1.0, gamma_x: g, q });
        let c = cfg(24, 1.0, seed);
        let recs = simulate(&m, DetectorSetup::TwoDetector { q }, &c, &psi0()).unwrap();
        for (i, r) in recs.iter().enumerate() {
            prop_assert_eq!(r.traj_id, i);
            prop_assert!((norm2(&r.final_state) - 1.0).abs() < 1e-10);
            prop_assert_eq!(r.samples.len(), c.sample_times.len());
            prop_assert_eq!(r.n_jumps_by_detector[0] + r.n_jumps_by_detector[1], r.jump_events.len());
            prop_assert!(r.jump_events.windows(2).all(|w| w[0].time <= w[1].time));
            prop_assert!(r.jump_events.iter().all(|e| e.time > 0.0 && e.time <= c.t_max + 1e-12));
            prop_assert_eq!(r.accepted, r.n_jumps_by_detector[1] == 0);
        }
    }
}
