use rand::Rng;
use serde::Serialize;

use super::{detect_rng, TrajectoryError, TrajectoryRecord};
use crate::numerics::{inner, ComplexMatrix};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    /// `[observable][time]`.
    pub mean: Vec<Vec<f64>>,
    /// Standard error of the mean, `[observable][time]`; NaN with a single
    /// accepted trajectory.
    pub sem: Vec<Vec<f64>>,
    pub n_accepted: usize,
    pub n_total: usize,
}

/// Records with no detector-2 click.
pub fn postselect_two_detector(records: &[TrajectoryRecord]) -> Vec<&TrajectoryRecord> {
    records.iter().filter(|r| r.n_jumps_by_detector[1] == 0).collect()
}

/// Thinning by a detector of efficiency `eta`: each of a record's `N` jumps
/// draws `u ∈ (0, 1]` from the record's detection stream, and the record is
/// kept when every draw exceeds `eta` (no jump was seen).
pub fn postselect_inefficient(records: &[TrajectoryRecord], eta: f64, master_seed: u64) -> Vec<&TrajectoryRecord> {
    records.iter().filter(|r| undetected(r, eta, master_seed)).collect()
}

pub(super) fn undetected(r: &TrajectoryRecord, eta: f64, master_seed: u64) -> bool {
    let mut rng = detect_rng(master_seed, r.traj_id);
    (0..r.jump_events.len()).all(|_| 1.0 - rng.random::<f64>() > eta)
}

/// Per-time means of `⟨ψ|O|ψ⟩` over `accepted`, with
/// `SEM = √(⟨(x − x̄)²⟩)/√(N − 1)`.
pub fn ensemble_average(
    accepted: &[&TrajectoryRecord],
    observables: &[ComplexMatrix],
    sample_times: &[f64],
    n_total: usize,
) -> Result<EnsembleStats, TrajectoryError> {
    let n = accepted.len();
    if n == 0 {
        return Err(TrajectoryError::EmptyPostselection { n_total, n_accepted: 0 });
    }
    let nt = sample_times.len();
    if let Some(r) = accepted.iter().find(|r| r.samples.len() != nt) {
        return Err(TrajectoryError::Config(format!(
            "trajectory {} has {} samples, expected {nt}",
            r.traj_id,
            r.samples.len()
        )));
    }
    let mut mean = vec![vec![0.0; nt]; observables.len()];
    let mut sem = vec![vec![f64::NAN; nt]; observables.len()];
    let mut values = vec![0.0; n];
    for (o, obs) in observables.iter().enumerate() {
        for t in 0..nt {
            for (k, r) in accepted.iter().enumerate() {
                let psi = &r.samples[t];
                values[k] = inner(psi, &obs.matvec(psi)).re;
            }
            let m = values.iter().sum::<f64>() / n as f64;
            mean[o][t] = m;
            if n >= 2 {
                let var = values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64;
                sem[o][t] = var.sqrt() / ((n - 1) as f64).sqrt();
            }
        }
    }
    Ok(EnsembleStats { times: sample_times.to_vec(), mean, sem, n_accepted: n, n_total })
}
