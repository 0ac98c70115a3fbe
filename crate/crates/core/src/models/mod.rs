//! The two qubit models and their closed-form spectra.
//!
//! Conventions: `Γ = √γ·operator` (the channel rate is the full decay rate
//! `γ`), and in example 2 the decay operator lowers toward basis index 0,
//! `[[0,1],[0,0]]`. These are the conventions under which the closed forms
//! below hold. The closed forms never call the eigensolver; [`verify`]
//! compares them against it.

pub mod verify;

use std::collections::BTreeMap;

use crate::lindblad::{pauli, JumpChannel, LindbladError, LindbladModel};
use crate::numerics::{c, ComplexMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example1Params {
    pub omega: f64,
    pub gamma_x: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example2Params {
    pub omega: f64,
    pub gamma_minus: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormSpectrum {
    pub eigenvalues: Vec<C64>,
    pub auxiliary: BTreeMap<&'static str, C64>,
    pub eigenmatrices: Option<Vec<ComplexMatrix>>,
}

fn csqrt(x: f64) -> C64 {
    c(x, 0.0).sqrt()
}

fn aux(pairs: &[(&'static str, C64)]) -> BTreeMap<&'static str, C64> {
    pairs.iter().copied().collect()
}

/// Builds a named preset: `"example1"` or `"example2"`.
pub fn preset(name: &str, omega: f64, gamma: f64) -> Result<LindbladModel, LindbladError> {
    if !omega.is_finite() || !gamma.is_finite() || gamma < 0.0 {
        return Err(LindbladError::InvalidParameter(format!("omega={omega}, gamma={gamma}")));
    }
    match name {
        "example1" => Ok(example1_model(&Example1Params { omega, gamma_x: gamma, q: 1.0 })),
        "example2" => Ok(example2_model(&Example2Params { omega, gamma_minus: gamma, q: 1.0 })),
        other => Err(LindbladError::Description(format!("unknown preset {other:?}"))),
    }
}

/// `H = (ω/2)σz`, channel `σx` at rate `γx`.
pub fn example1_model(p: &Example1Params) -> LindbladModel {
    let h = pauli::z().scale_real(p.omega / 2.0);
    let ch = JumpChannel::new(pauli::x(), p.gamma_x).expect("non-negative rate");
    LindbladModel::new(h, vec![ch]).expect("valid preset")
}

/// `{−γ(1−q), −γ+Ω′, −γ−Ω′, −γ(1+q)}` with `Ω′ = √(q²γ² − ω²)`.
pub fn example1_hybrid_spectrum(p: &Example1Params) -> ClosedFormSpectrum {
    let (w, g, q) = (p.omega, p.gamma_x, p.q);
    let om = csqrt(q * q * g * g - w * w);
    let eigenvalues = vec![c(-g * (1.0 - q), 0.0), -g + om, -g - om, c(-g * (1.0 + q), 0.0)];
    // [[0, −iω ± Ω′], [qγ, 0]] up to scale; each branch is written in the
    // form that stays nonzero at q = 0
    let z = c(0.0, 0.0);
    let plus = ComplexMatrix::from_rows(&[[z, c(q * g, 0.0)], [c(0.0, w) + om, z]]);
    let minus = ComplexMatrix::from_rows(&[[z, c(0.0, -w) - om], [c(q * g, 0.0), z]]);
    let eigenmatrices = vec![
        ComplexMatrix::identity(2).scale_real(0.5),
        plus,
        minus,
        ComplexMatrix::from_real_rows(&[[-1.0, 0.0], [0.0, 1.0]]),
    ];
    ClosedFormSpectrum { eigenvalues, auxiliary: aux(&[("Omega_prime", om)]), eigenmatrices: Some(eigenmatrices) }
}

/// `γx^EP(q) = ω/q`; `None` at `q = 0`, where the EP sits at infinity.
pub fn example1_ep(omega: f64, q: f64) -> Option<f64> {
    (q > 0.0).then(|| omega / q)
}

/// Generalized eigenmatrix family `[[0, a], [i a − i, 0]]` at the full
/// Liouvillian EP `γx = ω`, chained to `ρ = [[0, −iω], [ω, 0]]`.
pub fn example1_generalized_eigenmatrix(a: C64) -> ComplexMatrix {
    let i = c(0.0, 1.0);
    ComplexMatrix::from_rows(&[[c(0.0, 0.0), a], [i * a - i, c(0.0, 0.0)]])
}

/// `H = (ω/2)σx`, decay `[[0,1],[0,0]]` at rate `γ−`.
pub fn example2_model(p: &Example2Params) -> LindbladModel {
    let h = pauli::x().scale_real(p.omega / 2.0);
    let ch = JumpChannel::new(pauli::plus(), p.gamma_minus).expect("non-negative rate");
    LindbladModel::new(h, vec![ch]).expect("valid preset")
}

/// `h₁,₂ = (−iγ ∓ ζ)/4`, `ζ = √(4ω² − γ²)`, eigenvectors `[iγ ∓ ζ, 2ω]`.
pub fn example2_nhh_spectrum(p: &Example2Params) -> ClosedFormSpectrum {
    let (w, g) = (p.omega, p.gamma_minus);
    let zeta = csqrt(4.0 * w * w - g * g);
    let ig = c(0.0, g);
    let eigenvalues = vec![(-ig - zeta) / 4.0, (-ig + zeta) / 4.0];
    let vecs = vec![
        ComplexMatrix::column(&[ig - zeta, c(2.0 * w, 0.0)]),
        ComplexMatrix::column(&[ig + zeta, c(2.0 * w, 0.0)]),
    ];
    ClosedFormSpectrum { eigenvalues, auxiliary: aux(&[("zeta", zeta)]), eigenmatrices: Some(vecs) }
}

/// Generalized eigenvector family `[a, i(4 − a)]` at the NHH EP `γ− = 2ω`,
/// chained to the eigenvector `[iγ−, 2ω]`.
pub fn example2_generalized_eigenvector(a: C64) -> Vec<C64> {
    vec![a, c(0.0, 1.0) * (c(4.0, 0.0) - a)]
}

/// `{0, −γ/2, −3γ/4 + β/4, −3γ/4 − β/4}`, `β = √(γ² − 16ω²)`.
pub fn example2_liouvillian_spectrum(p: &Example2Params) -> ClosedFormSpectrum {
    let (w, g) = (p.omega, p.gamma_minus);
    let beta = csqrt(g * g - 16.0 * w * w);
    let base = c(-0.75 * g, 0.0);
    let eigenvalues = vec![c(0.0, 0.0), c(-g / 2.0, 0.0), base + beta / 4.0, base - beta / 4.0];
    let norm = g * g + 2.0 * w * w;
    let ss = ComplexMatrix::from_rows(&[
        [c((g * g + w * w) / norm, 0.0), c(0.0, g * w / norm)],
        [c(0.0, -g * w / norm), c(w * w / norm, 0.0)],
    ]);
    let branch = |s: f64| {
        ComplexMatrix::from_rows(&[[c(-g, 0.0) + beta * s, c(0.0, 4.0 * w)], [c(0.0, -4.0 * w), c(g, 0.0) - beta * s]])
    };
    let eigenmatrices = vec![ss, pauli::x(), branch(1.0), branch(-1.0)];
    ClosedFormSpectrum { eigenvalues, auxiliary: aux(&[("beta", beta)]), eigenmatrices: Some(eigenmatrices) }
}

/// Generalized eigenmatrix `4·diag(1, −1)` at the Liouvillian EP `γ− = 4ω`,
/// chained to `ρ₂ = [[−γ, 4iω], [−4iω, γ]]`.
pub fn example2_lep_generalized_eigenmatrix() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[[4.0, 0.0], [0.0, -4.0]])
}

/// `f = q^{2/3}(1 + √(1 − q²))^{1/3}`.
pub fn example2_f(q: f64) -> f64 {
    q.powf(2.0 / 3.0) * (1.0 + (1.0 - q * q).sqrt()).cbrt()
}

/// Hybrid EP `γ−(q) = √2 f^{−1/2}(3f² + 3q² + 2f)^{1/2} ω` for `q ∈ (0, 1]`.
pub fn example2_hybrid_ep(omega: f64, q: f64) -> Result<f64, LindbladError> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(LindbladError::InvalidParameter(format!("q must lie in (0, 1], got {q}")));
    }
    let f = example2_f(q);
    Ok(2f64.sqrt() * f.powf(-0.5) * (3.0 * f * f + 3.0 * q * q + 2.0 * f).sqrt() * omega)
}

/// Cube-root quantities of the hybrid cubic: `D` (principal roots) and
/// `F₀ = (D² + 3(γ² − 4ω²)) / (12 D)`, with `F₀ = 0` where `D` vanishes.
pub fn example2_cardano(p: &Example2Params) -> (C64, C64) {
    let (w, g, q) = (p.omega, p.gamma_minus, p.q);
    let a = g * g - 4.0 * w * w;
    let rad = 108.0 * q * q * g * g * w.powi(4) - a.powi(3);
    let inner = c(54.0 * q * g * w * w, 0.0) + csqrt(rad) * (3.0 * 3f64.sqrt());
    let d = inner.cbrt();
    let scale = (g * g + w * w).max(f64::MIN_POSITIVE);
    let f0 = if d.norm() <= 1e-12 * scale.sqrt() { c(0.0, 0.0) } else { (d * d + 3.0 * a) / (12.0 * d) };
    (d, f0)
}

/// Hybrid spectrum of example 2 for any `q ≥ 0`:
/// `λ₀ = −γ/2 + 2F₀`, `λ₁ = −γ/2`, `λ₂,₃ = −γ/2 − F₀ ± i√3(F₀ − D/6)`.
pub fn example2_hybrid_spectrum(p: &Example2Params) -> ClosedFormSpectrum {
    let g = p.gamma_minus;
    let (d, f0) = example2_cardano(p);
    let half = c(-g / 2.0, 0.0);
    let im = c(0.0, 3f64.sqrt()) * (f0 - d / 6.0);
    let eigenvalues = vec![half + f0 * 2.0, half, half - f0 + im, half - f0 - im];
    ClosedFormSpectrum { eigenvalues, auxiliary: cardano_aux(d, f0), eigenmatrices: None }
}

fn cardano_aux(d: C64, f0: C64) -> BTreeMap<&'static str, C64> {
    let s3 = 3f64.sqrt();
    aux(&[("D", d), ("F0", f0), ("u_plus", c(1.0 + s3, 0.0)), ("u_minus", c(1.0 - s3, 0.0))])
}

/// The same spectrum with the imaginary part of `λ₂,₃` taken literally as
/// `i√3(F₀ − 2D)`, plus the listed element formulas for `ρ⁽⁰⁾`, `ρ⁽²⁾`,
/// `ρ⁽³⁾` (undecorated `γ` read as `γ−`), and `ρ⁽¹⁾ = σx`. Kept for
/// cross-checking against the eigensolver; see the verification harness.
pub fn example2_hybrid_spectrum_as_listed(p: &Example2Params) -> ClosedFormSpectrum {
    let (w, g, q) = (p.omega, p.gamma_minus, p.q);
    let (d, f0) = example2_cardano(p);
    let s3 = 3f64.sqrt();
    let (up, um) = (1.0 + s3, 1.0 - s3);
    let half = c(-g / 2.0, 0.0);
    let im = c(0.0, s3) * (f0 - d * 2.0);
    let eigenvalues = vec![half + f0 * 2.0, half, half - f0 + im, half - f0 - im];

    let (w2, g2) = (w * w, g * g);
    let d2 = d * d;
    let d3 = d2 * d;
    let a = g2 - 4.0 * w2;
    let i = c(0.0, 1.0);

    let r0_00 = -(d3 - 54.0 * q * g * w2) * (-d + 3.0 * g) / 6.0
        + (-d + g) * (1.5 * g.powi(3))
        + (d2 - w2 * (27.0 * q + 12.0)) * g2
        + d * (3.0 * g * w2 * (3.0 * q + 2.0))
        + 24.0 * w2
        - d2 * w2;
    let r0_01 = i * 3.0 * w * d2 * (f0 * 4.0 - g * (2.0 * q + 1.0));
    let r0_11 = d2 * 6.0 * (f0 * (4.0 * g * q) + d * w2);
    let r0 = ComplexMatrix::from_rows(&[[r0_00, r0_01], [-r0_01, r0_11]]);

    let r2_00 = d2 * (4.0 * (g2 - w2)) - (d3 - 9.0 * g.powi(3) + 36.0 * g * w2) * d * (up / 3.0)
        + (d3 * g - 16.0 * w2 * g2 - 3.0 * a * a) * um;
    let r2_01 = -i * w * d * (d2 * um + d * (6.0 * g * (2.0 * q + 1.0)) + 3.0 * up * a);
    let r2_11 = d * -2.0 * (d2 * (um * q * g) - d * (6.0 * w2) + 3.0 * up * q * g * a);
    let r2 = ComplexMatrix::from_rows(&[[r2_00, r2_01], [-r2_01, r2_11]]);
    let r3 = ComplexMatrix::from_rows(&[[r2_00, -r2_01], [r2_01, r2_11]]);

    ClosedFormSpectrum { eigenvalues, auxiliary: cardano_aux(d, f0), eigenmatrices: Some(vec![r0, pauli::x(), r2, r3]) }
}
