//! Lindblad models and their generators: the full Liouvillian `L`, the
//! no-jump generator `L′`, the effective Hamiltonian, and the hybrid
//! `L_H(q) = q·L + (1−q)·L′`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{c, kron, ComplexMatrix, NumericsError, C64};

const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LindbladError {
    #[error("hamiltonian is not Hermitian (max |H - H†| = {0:.3e})")]
    NonHermitian(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid model description: {0}")]
    Description(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpChannel {
    pub operator: ComplexMatrix,
    pub rate: f64,
    /// Multiplies `q` for this channel in the hybrid generator.
    pub jump_weight_q: f64,
}

impl JumpChannel {
    pub fn new(operator: ComplexMatrix, rate: f64) -> Result<Self, LindbladError> {
        Self::with_weight(operator, rate, 1.0)
    }

    pub fn with_weight(operator: ComplexMatrix, rate: f64, jump_weight_q: f64) -> Result<Self, LindbladError> {
        operator.require_square()?;
        if !operator.is_finite() {
            return Err(NumericsError::NonFinite.into());
        }
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(LindbladError::InvalidParameter(format!("channel rate must be >= 0, got {rate}")));
        }
        if !(jump_weight_q >= 0.0) || !jump_weight_q.is_finite() {
            return Err(LindbladError::InvalidParameter(format!("jump weight must be >= 0, got {jump_weight_q}")));
        }
        Ok(Self { operator, rate, jump_weight_q })
    }

    /// `Γ = √rate · operator`.
    pub fn jump_operator(&self) -> ComplexMatrix {
        self.operator.scale_real(self.rate.sqrt())
    }

    pub fn dim(&self) -> usize {
        self.operator.rows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladModel {
    pub hamiltonian: ComplexMatrix,
    pub channels: Vec<JumpChannel>,
    pub dim: usize,
}

impl LindbladModel {
    pub fn new(hamiltonian: ComplexMatrix, channels: Vec<JumpChannel>) -> Result<Self, LindbladError> {
        let dim = hamiltonian.require_square()?;
        if dim == 0 {
            return Err(LindbladError::DimensionMismatch("empty hamiltonian".into()));
        }
        if !hamiltonian.is_finite() {
            return Err(NumericsError::NonFinite.into());
        }
        let dev = hamiltonian.max_abs_diff(&hamiltonian.adjoint());
        if dev > HERMITIAN_TOL {
            return Err(LindbladError::NonHermitian(dev));
        }
        for (k, ch) in channels.iter().enumerate() {
            if ch.dim() != dim {
                return Err(LindbladError::DimensionMismatch(format!(
                    "channel {k} has dimension {} but the hamiltonian has {dim}",
                    ch.dim()
                )));
            }
        }
        Ok(Self { hamiltonian, channels, dim })
    }

    /// `Σ_μ Γ_μ†Γ_μ`.
    pub fn total_decay_operator(&self) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
        for ch in &self.channels {
            let g = ch.jump_operator();
            acc = &acc + &(&g.adjoint() * &g);
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "q", rename_all = "lowercase")]
pub enum SuperoperatorKind {
    Full,
    NoJump,
    Hybrid(f64),
}

/// A `d²×d²` generator acting on column-stacked density matrices.
#[derive(Debug, Clone)]
pub struct Superoperator {
    pub matrix: ComplexMatrix,
    pub kind: SuperoperatorKind,
    pub model: LindbladModel,
}

impl Superoperator {
    pub fn q(&self) -> Option<f64> {
        match self.kind {
            SuperoperatorKind::Hybrid(q) => Some(q),
            SuperoperatorKind::Full => Some(1.0),
            SuperoperatorKind::NoJump => Some(0.0),
        }
    }

    /// Side length of the operators the generator acts on.
    pub fn hilbert_dim(&self) -> usize {
        self.model.dim
    }

    /// Whether the generator is trace preserving by construction.
    pub fn preserves_trace(&self) -> bool {
        match self.kind {
            SuperoperatorKind::Full => true,
            SuperoperatorKind::NoJump => self.model.channels.iter().all(|c| c.rate == 0.0),
            SuperoperatorKind::Hybrid(q) => {
                self.model.channels.iter().all(|c| c.rate == 0.0 || q * c.jump_weight_q == 1.0)
            }
        }
    }
}

/// Jump term `kron(Γ̄, Γ)`: `vec(Γ ρ Γ†)`.
fn jump_superop(gamma: &ComplexMatrix) -> ComplexMatrix {
    kron(&gamma.conj(), gamma)
}

/// `−½[kron(I, Γ†Γ) + kron((Γ†Γ)ᵀ, I)]`.
fn anticommutator_superop(gdg: &ComplexMatrix) -> ComplexMatrix {
    let eye = ComplexMatrix::identity(gdg.rows());
    (&kron(&eye, gdg) + &kron(&gdg.transpose(), &eye)).scale_real(-0.5)
}

/// Superoperator of `D[Γ]ρ = ΓρΓ† − ½{Γ†Γ, ρ}` with `Γ = √rate·operator`.
pub fn dissipator_superop(channel: &JumpChannel) -> ComplexMatrix {
    let g = channel.jump_operator();
    let gdg = &g.adjoint() * &g;
    &jump_superop(&g) + &anticommutator_superop(&gdg)
}

/// `−i[kron(I, A) − kron(Bᵀ, I)]`, i.e. `ρ ↦ −i(Aρ − ρB)`.
fn left_right(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let eye = ComplexMatrix::identity(a.rows());
    (&kron(&eye, a) - &kron(&b.transpose(), &eye)).scale(c(0.0, -1.0))
}

pub fn liouvillian(model: &LindbladModel) -> Superoperator {
    let h = &model.hamiltonian;
    let mut m = left_right(h, h);
    for ch in &model.channels {
        m = &m + &dissipator_superop(ch);
    }
    Superoperator { matrix: m, kind: SuperoperatorKind::Full, model: model.clone() }
}

/// `H − (i/2)Σ Γ†Γ`.
pub fn effective_hamiltonian(model: &LindbladModel) -> ComplexMatrix {
    &model.hamiltonian - &model.total_decay_operator().scale(c(0.0, 0.5))
}

/// `ρ ↦ −i(H_eff ρ − ρ H_eff†)`.
pub fn nojump_superop(model: &LindbladModel) -> Superoperator {
    let heff = effective_hamiltonian(model);
    let m = left_right(&heff, &heff.adjoint());
    Superoperator { matrix: m, kind: SuperoperatorKind::NoJump, model: model.clone() }
}

/// `L′ + Σ_μ q·w_μ kron(Γ̄_μ, Γ_μ)`, which equals `q·L + (1−q)·L′` when all
/// channel weights are 1.
pub fn hybrid_liouvillian(model: &LindbladModel, q: f64) -> Result<Superoperator, LindbladError> {
    if !(q >= 0.0) || !q.is_finite() {
        return Err(LindbladError::InvalidParameter(format!("q must be >= 0, got {q}")));
    }
    let mut m = nojump_superop(model).matrix;
    for ch in &model.channels {
        let w = q * ch.jump_weight_q;
        if w != 0.0 {
            m = &m + &jump_superop(&ch.jump_operator()).scale_real(w);
        }
    }
    Ok(Superoperator { matrix: m, kind: SuperoperatorKind::Hybrid(q), model: model.clone() })
}

/// Bloch-sphere angles of a pure qubit state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitStateSpec {
    pub theta: f64,
    pub phi: f64,
}

/// `cos(θ/2)|↑⟩ + sin(θ/2)e^{iφ}|↓⟩`, with `|↑⟩` at index 0.
pub fn qubit_state(spec: QubitStateSpec) -> Vec<C64> {
    let (s, co) = (spec.theta / 2.0).sin_cos();
    vec![c(co, 0.0), C64::from_polar(s, spec.phi)]
}

/// `|ψ⟩⟨ψ|`.
pub fn projector(psi: &[C64]) -> ComplexMatrix {
    let n = psi.len();
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = psi[i] * psi[j].conj();
        }
    }
    m
}

pub mod pauli {
    use crate::numerics::{c, ComplexMatrix};

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]])
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]])
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[1.0, 0.0], [0.0, -1.0]])
    }

    /// `|↓⟩⟨↑|` with `|↑⟩` at index 0.
    pub fn minus() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[0.0, 0.0], [1.0, 0.0]])
    }

    pub fn plus() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]])
    }
}

/// JSON model description: either a preset or an explicit model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelDescription {
    Preset(PresetDescription),
    Explicit(ExplicitDescription),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetDescription {
    pub preset: String,
    pub omega: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitDescription {
    pub dim: usize,
    /// Row-major `[re, im]` pairs.
    pub hamiltonian: Vec<[f64; 2]>,
    #[serde(default)]
    pub channels: Vec<ChannelDescription>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelDescription {
    pub operator: Vec<[f64; 2]>,
    pub rate: f64,
    #[serde(default = "default_weight")]
    pub q: f64,
}

fn default_weight() -> f64 {
    1.0
}

fn matrix_from_pairs(dim: usize, pairs: &[[f64; 2]], what: &str) -> Result<ComplexMatrix, LindbladError> {
    if pairs.len() != dim * dim {
        return Err(LindbladError::Description(format!(
            "{what}: expected {} entries for dim {dim}, got {}",
            dim * dim,
            pairs.len()
        )));
    }
    Ok(ComplexMatrix::new(dim, dim, pairs.iter().map(|p| c(p[0], p[1])).collect())?)
}

impl ModelDescription {
    pub fn from_json(text: &str) -> Result<Self, LindbladError> {
        serde_json::from_str(text).map_err(|e| LindbladError::Description(e.to_string()))
    }

    pub fn build(&self) -> Result<LindbladModel, LindbladError> {
        match self {
            ModelDescription::Preset(p) => crate::models::preset(&p.preset, p.omega, p.gamma),
            ModelDescription::Explicit(e) => {
                if e.dim == 0 {
                    return Err(LindbladError::Description("dim must be positive".into()));
                }
                let h = matrix_from_pairs(e.dim, &e.hamiltonian, "hamiltonian")?;
                let channels = e
                    .channels
                    .iter()
                    .enumerate()
                    .map(|(k, ch)| {
                        let op = matrix_from_pairs(e.dim, &ch.operator, &format!("channel {k}"))?;
                        JumpChannel::with_weight(op, ch.rate, ch.q)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                LindbladModel::new(h, channels)
            }
        }
    }
}
