//! Deterministic density-matrix propagation under a fixed generator, with
//! trace renormalization at the output times.

use thiserror::Error;

use crate::lindblad::{pauli, Superoperator};
use crate::numerics::{eigendecompose, expm, unvec, vec, ComplexMatrix, NumericsError};

/// Raw trace below which the postselection weight counts as zero.
pub const UNDERFLOW_TRACE: f64 = 1e-14;
const STATE_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolveError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("invalid initial state: {0}")]
    InvalidState(String),
    #[error("invalid time grid: {0}")]
    InvalidTimes(String),
    #[error("raw trace {raw_trace:.3e} at t = {t} is below {UNDERFLOW_TRACE:.0e}; postselection probability is numerically zero")]
    Underflow { t: f64, raw_trace: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("observable is not Hermitian")]
    NonHermitianObservable,
    #[error("expectation value has imaginary part {0:.3e}")]
    ComplexExpectation(f64),
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    /// Hermitian, trace one.
    pub states: Vec<ComplexMatrix>,
    /// Trace of the unnormalized state at each time.
    pub raw_traces: Vec<f64>,
}

impl EvolutionResult {
    /// `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)` per time; qubit states only.
    pub fn bloch(&self) -> Result<Vec<[f64; 3]>, EvolveError> {
        self.states.iter().map(bloch_vector).collect()
    }
}

pub fn bloch_vector(rho: &ComplexMatrix) -> Result<[f64; 3], EvolveError> {
    Ok([expectation(rho, &pauli::x())?, expectation(rho, &pauli::y())?, expectation(rho, &pauli::z())?])
}

fn check_state(rho: &ComplexMatrix, d: usize) -> Result<(), EvolveError> {
    if rho.rows() != d || rho.cols() != d {
        return Err(EvolveError::DimensionMismatch(format!(
            "state is {}x{}, generator acts on {d}x{d}",
            rho.rows(),
            rho.cols()
        )));
    }
    if !rho.is_hermitian(STATE_TOL) {
        return Err(EvolveError::InvalidState("not Hermitian".into()));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
        return Err(EvolveError::InvalidState(format!("trace is {tr}")));
    }
    let min = eigendecompose(&rho.hermitian_part())?.eigenvalues.iter().map(|l| l.re).fold(f64::INFINITY, f64::min);
    if min < -STATE_TOL {
        return Err(EvolveError::InvalidState(format!("negative eigenvalue {min:.3e}")));
    }
    Ok(())
}

/// `ρ(t) = unvec(exp(L t) vec ρ0)`, stepped interval by interval. Each output
/// state is renormalized to trace one and symmetrized; the trace before
/// renormalization is accumulated in `raw_traces`.
pub fn propagate(s: &Superoperator, rho0: &ComplexMatrix, times: &[f64]) -> Result<EvolutionResult, EvolveError> {
    let d = s.hilbert_dim();
    check_state(rho0, d)?;
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(EvolveError::InvalidTimes("times must be finite and nonnegative".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(EvolveError::InvalidTimes("times must be sorted".into()));
    }

    let mut out = EvolutionResult {
        times: times.to_vec(),
        states: Vec::with_capacity(times.len()),
        raw_traces: Vec::with_capacity(times.len()),
    };
    let mut state = rho0.clone();
    let mut raw = 1.0;
    let mut last_t = 0.0;
    // uniform grids reuse one propagator
    let mut cached: Option<(f64, ComplexMatrix)> = None;
    for &t in times {
        let dt = t - last_t;
        if dt > 0.0 {
            let prop = match &cached {
                Some((h, p)) if *h == dt => p.clone(),
                _ => {
                    let p = expm(&s.matrix.scale_real(dt))?;
                    cached = Some((dt, p.clone()));
                    p
                }
            };
            let next = unvec(&prop.matvec(&vec(&state)?), d)?;
            let tr = next.trace().re;
            raw *= tr;
            if !(raw >= UNDERFLOW_TRACE) {
                return Err(EvolveError::Underflow { t, raw_trace: raw });
            }
            state = next.scale_real(1.0 / tr).hermitian_part();
        }
        out.states.push(state.clone());
        out.raw_traces.push(raw);
        last_t = t;
    }
    Ok(out)
}

/// `Re tr(O ρ)`; the imaginary part must stay below `1e-10`.
pub fn expectation(rho: &ComplexMatrix, obs: &ComplexMatrix) -> Result<f64, EvolveError> {
    if rho.rows() != obs.rows() || rho.cols() != obs.cols() || !rho.is_square() {
        return Err(EvolveError::DimensionMismatch(format!(
            "state {}x{}, observable {}x{}",
            rho.rows(),
            rho.cols(),
            obs.rows(),
            obs.cols()
        )));
    }
    if !obs.is_hermitian(STATE_TOL) {
        return Err(EvolveError::NonHermitianObservable);
    }
    let v = (obs * rho).trace();
    if v.im.abs() > STATE_TOL {
        return Err(EvolveError::ComplexExpectation(v.im));
    }
    Ok(v.re)
}

/// `n` evenly spaced times on `[0, t_max]` (just `[0]` when `n == 1`).
pub fn linspace(t_max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{hybrid_liouvillian, liouvillian, projector, qubit_state, QubitStateSpec};
    use crate::models::{example1_model, Example1Params};
    use crate::numerics::c;

    fn tilted_state() -> ComplexMatrix {
        let s = 3f64.sqrt() * std::f64::consts::PI;
        projector(&qubit_state(QubitStateSpec { theta: s / 2.0, phi: s }))
    }

    fn ex1(g: f64) -> crate::lindblad::LindbladModel {
        example1_model(&Example1Params { omega: 1.0, gamma_x: g, q: 1.0 })
    }

    #[test]
    fn zero_time_is_identity() {
        let rho = tilted_state();
        let r = propagate(&liouvillian(&ex1(0.5)), &rho, &[0.0]).unwrap();
        assert!(r.states[0].max_abs_diff(&rho) < 1e-15);
        assert_eq!(r.raw_traces[0], 1.0);
    }

    #[test]
    fn full_lindblad_relaxes_to_identity() {
        let g = 0.5;
        let r = propagate(&liouvillian(&ex1(g)), &tilted_state(), &[20.0 / g, 40.0 / g]).unwrap();
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(r.states[1].max_abs_diff(&half) < 1e-6);
        assert!(r.raw_traces.iter().all(|t| (t - 1.0).abs() < 1e-12));
    }

    #[test]
    fn nojump_is_gamma_independent() {
        let times = linspace(5.0, 26);
        let base = propagate(&hybrid_liouvillian(&ex1(0.5), 0.0).unwrap(), &tilted_state(), &times).unwrap();
        for g in [1.0, 1.5] {
            let other = propagate(&hybrid_liouvillian(&ex1(g), 0.0).unwrap(), &tilted_state(), &times).unwrap();
            for (a, b) in base.states.iter().zip(&other.states) {
                assert!(a.max_abs_diff(b) < 1e-12);
            }
            // identity decay rate γ shows up only in the raw trace
            let want = (-g * 5.0f64).exp();
            assert!((other.raw_traces[25] / want - 1.0).abs() < 1e-10);
        }
        let b = base.bloch().unwrap();
        let sz0 = b[0][2];
        let (sx0, sy0) = (b[0][0], b[0][1]);
        for (k, t) in times.iter().enumerate() {
            assert!((b[k][2] - sz0).abs() < 1e-12);
            let (s, co) = t.sin_cos();
            assert!((b[k][0] - (sx0 * co - sy0 * s)).abs() < 1e-10);
        }
    }

    #[test]
    fn underflow_is_reported() {
        let s = hybrid_liouvillian(&ex1(10.0), 0.0).unwrap();
        let err = propagate(&s, &tilted_state(), &[0.0, 1.0, 5.0]).unwrap_err();
        assert!(matches!(err, EvolveError::Underflow { .. }), "{err}");
    }

    #[test]
    fn stepwise_matches_single_exponential() {
        let s = hybrid_liouvillian(&ex1(1.0), 0.3).unwrap();
        let stepped = propagate(&s, &tilted_state(), &linspace(3.0, 31)).unwrap();
        let once = propagate(&s, &tilted_state(), &[3.0]).unwrap();
        assert!(stepped.states[30].max_abs_diff(&once.states[0]) < 1e-10);
        assert!((stepped.raw_traces[30] - once.raw_traces[0]).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = liouvillian(&ex1(1.0));
        let bad = ComplexMatrix::from_real_rows(&[[2.0, 0.0], [0.0, -1.0]]);
        assert!(matches!(propagate(&s, &bad, &[0.0]), Err(EvolveError::InvalidState(_))));
        assert!(matches!(propagate(&s, &tilted_state(), &[1.0, 0.5]), Err(EvolveError::InvalidTimes(_))));
        assert!(matches!(propagate(&s, &tilted_state(), &[-1.0]), Err(EvolveError::InvalidTimes(_))));
    }

    #[test]
    fn expectations() {
        let up = projector(&[c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(expectation(&up, &pauli::z()).unwrap(), 1.0);
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert_eq!(expectation(&half, &pauli::x()).unwrap(), 0.0);
        let sz = expectation(&tilted_state(), &pauli::z()).unwrap();
        assert!((sz - (3f64.sqrt() * std::f64::consts::PI / 2.0).cos()).abs() < 1e-14);
        assert!((sz + 0.912724).abs() < 1e-6);
        assert!(matches!(expectation(&half, &ComplexMatrix::identity(3)), Err(EvolveError::DimensionMismatch(_))));
        assert!(matches!(expectation(&half, &pauli::plus()), Err(EvolveError::NonHermitianObservable)));
    }
}
