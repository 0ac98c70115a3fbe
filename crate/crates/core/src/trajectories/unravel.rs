use serde::{Deserialize, Serialize};

use super::TrajectoryError;
use crate::lindblad::{effective_hamiltonian, LindbladModel};
use crate::numerics::{c, eigendecompose, expm, norm2, ComplexMatrix, C64};

/// Largest allowed total jump probability per step.
pub const JUMP_PROBABILITY_CAP: f64 = 0.05;
/// Norm below which a jump is treated as landing on an annihilated state.
pub const COLLAPSE_NORM: f64 = 1e-14;

/// One entry of the split jump list: `√weight·Γ_channel` reported to `detector`.
#[derive(Debug, Clone)]
pub struct EffectiveJump {
    pub operator: ComplexMatrix,
    pub channel: usize,
    pub detector: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub time: f64,
    pub channel: usize,
    pub detector: u8,
}

/// Split `Γ_μ` into `√q_μ·Γ_μ` (detector 1) and `√(1−q_μ)·Γ_μ` (detector 2),
/// where `q_μ = q·w_μ`. The jump channel weights must keep `q_μ ≤ 1`.
pub fn split_channels(model: &LindbladModel, q: f64) -> Result<Vec<EffectiveJump>, TrajectoryError> {
    let mut out = Vec::with_capacity(2 * model.channels.len());
    for (k, ch) in model.channels.iter().enumerate() {
        let qk = q * ch.jump_weight_q;
        if !(0.0..=1.0).contains(&qk) {
            return Err(TrajectoryError::Setup(format!("channel {k}: detector split q = {qk} outside [0, 1]")));
        }
        let g = ch.jump_operator();
        out.push(EffectiveJump { operator: g.scale_real(qk.sqrt()), channel: k, detector: 1 });
        out.push(EffectiveJump { operator: g.scale_real((1.0 - qk).sqrt()), channel: k, detector: 2 });
    }
    Ok(out)
}

/// Every jump reported to a single perfect counter (detector 1).
pub fn unsplit_channels(model: &LindbladModel) -> Vec<EffectiveJump> {
    model
        .channels
        .iter()
        .enumerate()
        .map(|(k, ch)| EffectiveJump { operator: ch.jump_operator(), channel: k, detector: 1 })
        .collect()
}

/// `max_ψ Σ_μ ⟨ψ|Γ_μ†Γ_μ|ψ⟩`, the largest eigenvalue of the total decay
/// operator.
pub fn max_jump_rate(model: &LindbladModel) -> Result<f64, TrajectoryError> {
    let total = model.total_decay_operator().hermitian_part();
    let eig = eigendecompose(&total)?;
    Ok(eig.eigenvalues.iter().map(|l| l.re).fold(0.0, f64::max))
}

/// `1e-3·2π/ω`, halved until the jump probability cap holds.
pub fn default_dt(model: &LindbladModel, omega: f64) -> Result<f64, TrajectoryError> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(TrajectoryError::Config(format!("omega must be positive, got {omega}")));
    }
    let rate = max_jump_rate(model)?;
    let mut dt = 1e-3 * std::f64::consts::TAU / omega;
    while rate * dt > JUMP_PROBABILITY_CAP {
        dt /= 2.0;
    }
    Ok(dt)
}

/// Fixed-step propagator for one step size: jump list plus the exact
/// no-jump factor `exp(−i H_eff h)`.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub h: f64,
    pub jumps: Vec<EffectiveJump>,
    nojump: ComplexMatrix,
}

impl Stepper {
    pub fn new(model: &LindbladModel, jumps: Vec<EffectiveJump>, h: f64) -> Result<Self, TrajectoryError> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(TrajectoryError::Config(format!("step must be positive, got {h}")));
        }
        let rate = max_jump_rate(model)?;
        if rate * h > JUMP_PROBABILITY_CAP {
            return Err(TrajectoryError::StepTooLarge { dt: h, probability: rate * h });
        }
        let nojump = expm(&effective_hamiltonian(model).scale(c(0.0, -h)))?;
        Ok(Self { h, jumps, nojump })
    }

    /// One first-order step. A jump on entry `k` fires when the uniform draw
    /// `u` falls in its slice of `[0, Σ p_k)`, `p_k = ‖Γ_k ψ‖² h`; otherwise
    /// the no-jump factor is applied. The result is renormalized either way.
    pub fn step(&self, psi: &[C64], u: f64) -> Result<(Vec<C64>, Option<&EffectiveJump>), TrajectoryError> {
        let mut acc = 0.0;
        for jump in &self.jumps {
            let phi = jump.operator.matvec(psi);
            let p = norm2(&phi).powi(2) * self.h;
            if p > 0.0 && u < acc + p {
                return Ok((renormalized(phi)?, Some(jump)));
            }
            acc += p;
        }
        Ok((renormalized(self.nojump.matvec(psi))?, None))
    }
}

fn renormalized(mut v: Vec<C64>) -> Result<Vec<C64>, TrajectoryError> {
    let n = norm2(&v);
    if !(n >= COLLAPSE_NORM) {
        return Err(TrajectoryError::NormCollapse(n));
    }
    v.iter_mut().for_each(|x| *x /= n);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{JumpChannel, QubitStateSpec};
    use crate::models::{example1_model, Example1Params};

    fn ex1(g: f64) -> LindbladModel {
        example1_model(&Example1Params { omega: 1.0, gamma_x: g, q: 1.0 })
    }

    const UP: [C64; 2] = [C64 { re: 1.0, im: 0.0 }, C64 { re: 0.0, im: 0.0 }];

    #[test]
    fn jump_flips_spin() {
        let m = ex1(1.0);
        let s = Stepper::new(&m, unsplit_channels(&m), 1e-3).unwrap();
        let (psi, ev) = s.step(&UP, 0.0).unwrap();
        assert_eq!(ev.unwrap().channel, 0);
        assert!((psi[1].norm() - 1.0).abs() < 1e-15 && psi[0].norm() < 1e-15);
    }

    #[test]
    fn nojump_step_is_a_phase_on_up() {
        let m = ex1(1.0);
        let h = 1e-3;
        let s = Stepper::new(&m, unsplit_channels(&m), h).unwrap();
        let (psi, ev) = s.step(&UP, 0.5).unwrap();
        assert!(ev.is_none());
        assert!((psi[0] - C64::from_polar(1.0, -h / 2.0)).norm() < 1e-14);
        assert!(psi[1].norm() < 1e-15);
    }

    #[test]
    fn dark_state_never_jumps() {
        let h0 = ComplexMatrix::zeros(2, 2);
        let ch = JumpChannel::new(crate::lindblad::pauli::minus(), 1.0).unwrap();
        let m = LindbladModel::new(h0, vec![ch]).unwrap();
        let s = Stepper::new(&m, unsplit_channels(&m), 1e-2).unwrap();
        let down = [c(0.0, 0.0), c(1.0, 0.0)];
        let (psi, ev) = s.step(&down, 0.0).unwrap();
        assert!(ev.is_none());
        assert!((psi[1] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn detector_selection_follows_split() {
        let m = ex1(1.0);
        let s = Stepper::new(&m, split_channels(&m, 0.25).unwrap(), 0.01).unwrap();
        // total probability 0.01, detector 1 holds the first quarter
        let psi = crate::lindblad::qubit_state(QubitStateSpec { theta: 1.0, phi: 0.3 });
        assert_eq!(s.step(&psi, 0.002).unwrap().1.unwrap().detector, 1);
        assert_eq!(s.step(&psi, 0.003).unwrap().1.unwrap().detector, 2);
        assert!(s.step(&psi, 0.0101).unwrap().1.is_none());
    }

    #[test]
    fn step_size_cap() {
        let m = ex1(100.0);
        assert!(matches!(Stepper::new(&m, unsplit_channels(&m), 1e-3), Err(TrajectoryError::StepTooLarge { .. })));
        let dt = default_dt(&m, 1.0).unwrap();
        assert!(100.0 * dt <= JUMP_PROBABILITY_CAP);
        assert!((default_dt(&ex1(0.5), 1.0).unwrap() - 1e-3 * std::f64::consts::TAU).abs() < 1e-18);
        assert!(split_channels(&m, 1.5).is_err());
    }
}
