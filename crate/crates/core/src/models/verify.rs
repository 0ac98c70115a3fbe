//! Cross-checks of the closed forms against the numerical eigensolver.
//!
//! Closed-form checks must pass. The exception is the as-listed cubic-branch
//! forms (the literal `λ₂,₃` and the element formulas of `ρ⁽⁰⁾`, `ρ⁽²⁾`,
//! `ρ⁽³⁾`): each mismatch there is recorded as a [`Deviation`] carrying the
//! numerical ground truth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::*;
use crate::lindblad::{effective_hamiltonian, hybrid_liouvillian, liouvillian, Superoperator};
use crate::numerics::{eigendecompose, vec};
use crate::spectra::{decompose, locate_ep, SpectraError};

/// Eigenvalue tolerance for closed forms against numerics.
pub const EIGENVALUE_TOL: f64 = 1e-10;
/// Tolerance at which a cubic-branch listing counts as matching.
pub const LISTED_TOL: f64 = 1e-8;
/// Relative residual `‖Lρ − λρ‖/‖ρ‖` allowed for closed-form eigenmatrices.
pub const EIGENMATRIX_TOL: f64 = 1e-10;
/// Relative tolerance for located EPs.
pub const EP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Example {
    Example1,
    Example2,
}

impl std::str::FromStr for Example {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "example1" => Ok(Example::Example1),
            "example2" => Ok(Example::Example2),
            other => Err(format!("unknown example {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub max_error: f64,
    pub tolerance: f64,
    pub cases: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleParams {
    pub omega: f64,
    pub gamma: f64,
    pub q: f64,
}

/// One cubic-branch listing that disagrees with the numerics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deviation {
    /// `"eigenvalues"` or `"rho0"`, `"rho2"`, `"rho3"`.
    pub quantity: String,
    pub params: SampleParams,
    /// Values as listed, `[re, im]`; eigenmatrices are row-major.
    pub listed: Vec<[f64; 2]>,
    /// Numerical ground truth in the same layout (eigenmatrices scaled to the
    /// listed one by a least-squares factor when it is nonzero).
    pub numeric: Vec<[f64; 2]>,
    /// Multiset distance for eigenvalues; relative eigen-residual for
    /// eigenmatrices.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub example: Example,
    pub samples: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub deviations: Vec<Deviation>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// `min over bijections max_k |a_k − b_σ(k)|`; brute force, so keep `n ≤ 8`.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    fn go(a: &[C64], b: &[C64], used: &mut [bool], k: usize, cur: f64, best: &mut f64) {
        if cur >= *best {
            return;
        }
        if k == a.len() {
            *best = cur;
            return;
        }
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                go(a, b, used, k + 1, cur.max((a[k] - b[j]).norm()), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(a, b, &mut vec![false; b.len()], 0, 0.0, &mut best);
    best
}

fn relative_residual(s: &Superoperator, lambda: C64, rho: &ComplexMatrix) -> f64 {
    let v = vec(rho).expect("square");
    let lv = s.matrix.matvec(&v);
    let r: f64 = lv.iter().zip(&v).map(|(x, y)| (x - lambda * y).norm_sqr()).sum::<f64>().sqrt();
    r / rho.frobenius_norm().max(f64::MIN_POSITIVE)
}

fn pairs(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

#[derive(Default)]
struct Acc {
    max: f64,
    cases: usize,
}

impl Acc {
    fn add(&mut self, e: f64) {
        self.max = if e.is_nan() { f64::INFINITY } else { self.max.max(e) };
        self.cases += 1;
    }
    fn check(self, name: &str, tol: f64) -> Check {
        Check { name: name.into(), passed: self.max <= tol, max_error: self.max, tolerance: tol, cases: self.cases }
    }
}

fn numeric_eigenvalues(s: &Superoperator) -> Result<Vec<C64>, SpectraError> {
    Ok(decompose(s)?.eigenvalues)
}

/// Runs every check for `example` at `samples` random parameter points.
pub fn verify(example: Example, samples: usize, seed: u64) -> Result<VerifyReport, SpectraError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (checks, deviations) = match example {
        Example::Example1 => (verify_example1(&mut rng, samples)?, Vec::new()),
        Example::Example2 => verify_example2(&mut rng, samples)?,
    };
    Ok(VerifyReport { example, samples, seed, checks, deviations })
}

fn verify_example1(rng: &mut ChaCha8Rng, samples: usize) -> Result<Vec<Check>, SpectraError> {
    let mut spec = Acc::default();
    let mut mats = Acc::default();
    for _ in 0..samples {
        let omega = rng.random_range(0.5..2.0);
        let p = Example1Params { omega, gamma_x: omega * rng.random_range(0.05..3.0), q: rng.random_range(0.0..2.0) };
        let s = hybrid_liouvillian(&example1_model(&p), p.q)?;
        let cf = example1_hybrid_spectrum(&p);
        spec.add(multiset_distance(&cf.eigenvalues, &numeric_eigenvalues(&s)?));
        for (l, r) in cf.eigenvalues.iter().zip(cf.eigenmatrices.as_ref().expect("listed")) {
            mats.add(relative_residual(&s, *l, r));
        }
    }
    let mut ep = Acc::default();
    let family = |g: f64| Ok(example1_model(&Example1Params { omega: 1.0, gamma_x: g, q: 1.0 }));
    for q in [0.25, 0.5, 0.75, 1.0] {
        let want = example1_ep(1.0, q).expect("q > 0");
        let found = locate_ep(&family, q, (0.1, 10.0))?;
        ep.add(found.found().map_or(f64::INFINITY, |e| (e.parameter_value / want - 1.0).abs()));
    }
    let none = locate_ep(&family, 0.0, (0.1, 10.0))?;
    ep.add(if none.found().is_none() { 0.0 } else { f64::INFINITY });
    Ok(vec![
        spec.check("example1.hybrid_spectrum", EIGENVALUE_TOL),
        mats.check("example1.hybrid_eigenmatrices", EIGENMATRIX_TOL),
        ep.check("example1.ep_law", EP_TOL),
    ])
}

fn verify_example2(rng: &mut ChaCha8Rng, samples: usize) -> Result<(Vec<Check>, Vec<Deviation>), SpectraError> {
    let mut nhh = Acc::default();
    let mut full = Acc::default();
    let mut full_mats = Acc::default();
    let mut hybrid = Acc::default();
    let mut deviations = Vec::new();
    for _ in 0..samples {
        let omega = rng.random_range(0.5..2.0);
        let p =
            Example2Params { omega, gamma_minus: omega * rng.random_range(0.1..6.0), q: rng.random_range(0.0..1.0) };
        let model = example2_model(&p);

        let h = effective_hamiltonian(&model);
        let cf = example2_nhh_spectrum(&p);
        nhh.add(multiset_distance(&cf.eigenvalues, &eigendecompose(&h)?.eigenvalues));
        for (l, v) in cf.eigenvalues.iter().zip(cf.eigenmatrices.as_ref().expect("listed")) {
            let hv = h.matvec(v.as_slice());
            let r: f64 = hv.iter().zip(v.as_slice()).map(|(x, y)| (x - l * y).norm_sqr()).sum::<f64>().sqrt();
            nhh.add(r / v.frobenius_norm());
        }

        let s1 = liouvillian(&model);
        let cf = example2_liouvillian_spectrum(&p);
        full.add(multiset_distance(&cf.eigenvalues, &numeric_eigenvalues(&s1)?));
        for (l, r) in cf.eigenvalues.iter().zip(cf.eigenmatrices.as_ref().expect("listed")) {
            full_mats.add(relative_residual(&s1, *l, r));
        }

        let s = hybrid_liouvillian(&model, p.q)?;
        let numeric = decompose(&s)?;
        hybrid.add(multiset_distance(&example2_hybrid_spectrum(&p).eigenvalues, &numeric.eigenvalues));
        listing_deviations(&p, &s, &numeric, &mut deviations);
    }

    let mut ep = Acc::default();
    let family = |g: f64| Ok(example2_model(&Example2Params { omega: 1.0, gamma_minus: g, q: 1.0 }));
    for q in [0.1, 0.25, 0.5, 0.75, 1.0] {
        let want = example2_hybrid_ep(1.0, q)?;
        let found = locate_ep(&family, q, (1.0, 6.0))?;
        ep.add(found.found().map_or(f64::INFINITY, |e| (e.parameter_value / want - 1.0).abs()));
    }
    let hep = locate_ep(&family, 0.0, (1.0, 6.0))?;
    ep.add(hep.found().map_or(f64::INFINITY, |e| (e.parameter_value / 2.0 - 1.0).abs()));

    // endpoints of the hybrid formula: q = 1 is the full Liouvillian, q → 0⁺
    // approaches the no-jump EP at 2ω
    let mut ends = Acc::default();
    ends.add((example2_hybrid_ep(1.0, 1.0)? - 4.0).abs() / 4.0);
    ends.add((example2_hybrid_ep(1.0, 1e-12)? - 2.0).abs() / 2.0);
    for g in [0.7, 2.5, 4.0, 5.3] {
        let p1 = Example2Params { omega: 1.0, gamma_minus: g, q: 1.0 };
        ends.add(multiset_distance(
            &example2_hybrid_spectrum(&p1).eigenvalues,
            &example2_liouvillian_spectrum(&p1).eigenvalues,
        ));
        let p0 = Example2Params { q: 0.0, ..p1 };
        let s0 = hybrid_liouvillian(&example2_model(&p0), 0.0)?;
        ends.add(multiset_distance(&example2_hybrid_spectrum(&p0).eigenvalues, &numeric_eigenvalues(&s0)?));
    }

    let checks = vec![
        nhh.check("example2.nhh_spectrum", EIGENVALUE_TOL),
        full.check("example2.liouvillian_spectrum", EIGENVALUE_TOL),
        full_mats.check("example2.liouvillian_eigenmatrices", EIGENMATRIX_TOL),
        hybrid.check("example2.hybrid_spectrum", LISTED_TOL),
        ep.check("example2.ep_law", EP_TOL),
        ends.check("example2.endpoints", LISTED_TOL),
    ];
    Ok((checks, deviations))
}

/// Deviations of the cubic-branch listings from the numerics at one point.
pub fn example2_listed_deviations(p: &Example2Params) -> Result<Vec<Deviation>, SpectraError> {
    let s = hybrid_liouvillian(&example2_model(p), p.q)?;
    let numeric = decompose(&s)?;
    let mut out = Vec::new();
    listing_deviations(p, &s, &numeric, &mut out);
    Ok(out)
}

fn listing_deviations(
    p: &Example2Params,
    s: &Superoperator,
    numeric: &crate::spectra::SpectralDecomposition,
    out: &mut Vec<Deviation>,
) {
    let params = SampleParams { omega: p.omega, gamma: p.gamma_minus, q: p.q };
    let listed = example2_hybrid_spectrum_as_listed(p);
    let err = multiset_distance(&listed.eigenvalues, &numeric.eigenvalues);
    if !(err <= LISTED_TOL) {
        out.push(Deviation {
            quantity: "eigenvalues".into(),
            params,
            listed: pairs(&listed.eigenvalues),
            numeric: pairs(&numeric.eigenvalues),
            error: err,
        });
    }
    // pair each listed eigenmatrix with the numerical eigenvalue closest to
    // the corrected closed form of the same index
    let corrected = example2_hybrid_spectrum(p).eigenvalues;
    let mats = listed.eigenmatrices.as_ref().expect("listed");
    for (k, name) in [(0usize, "rho0"), (2, "rho2"), (3, "rho3")] {
        let j = (0..numeric.len())
            .min_by(|&a, &b| {
                (numeric.eigenvalues[a] - corrected[k])
                    .norm()
                    .total_cmp(&(numeric.eigenvalues[b] - corrected[k]).norm())
            })
            .expect("non-empty");
        let lambda = numeric.eigenvalues[j];
        let rho = &mats[k];
        let res = relative_residual(s, lambda, rho);
        if !(res <= LISTED_TOL) {
            let truth = &numeric.eigenmatrices[j];
            let fit = crate::numerics::frobenius_inner(truth, rho);
            let truth = if fit.norm() > 0.0 { truth.scale(fit) } else { truth.clone() };
            out.push(Deviation {
                quantity: name.into(),
                params,
                listed: pairs(rho.as_slice()),
                numeric: pairs(truth.as_slice()),
                error: res,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiset() {
        let a = [c(1.0, 0.0), c(2.0, 0.0), c(0.0, 1.0)];
        let b = [c(0.0, 1.0), c(1.0, 1e-12), c(2.0, 0.0)];
        assert!(multiset_distance(&a, &b) <= 1e-12);
        assert_eq!(multiset_distance(&a, &b[..2]), f64::INFINITY);
        let d = [c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)];
        assert!((multiset_distance(&a[..2], &d[..2]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn example1_passes() {
        let r = verify(Example::Example1, 20, 1).unwrap();
        assert!(r.passed(), "{:#?}", r.checks);
        assert!(r.deviations.is_empty());
    }

    #[test]
    fn example2_passes_with_logged_listing_deviations() {
        let r = verify(Example::Example2, 20, 2).unwrap();
        assert!(r.passed(), "{:#?}", r.checks);
        assert!(r.deviations.iter().any(|d| d.quantity == "eigenvalues"));
        assert!(r.deviations.iter().all(|d| d.error > LISTED_TOL && !d.numeric.is_empty()));
    }

    #[test]
    fn parse_example() {
        assert_eq!("example2".parse::<Example>().unwrap(), Example::Example2);
        assert!("example3".parse::<Example>().is_err());
    }
}
