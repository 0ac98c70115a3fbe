//! Quantum-jump unraveling of a Lindblad model with detector postselection.
//!
//! Each trajectory draws from its own ChaCha stream keyed by
//! `(master_seed, index)`, so ensembles are reproducible regardless of how
//! many threads run them. Detection thinning for the inefficient-detector
//! protocol uses a second, independent stream per trajectory.

mod stats;
mod unravel;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lindblad::LindbladModel;
use crate::numerics::{norm2, NumericsError, C64};

pub use stats::{ensemble_average, postselect_inefficient, postselect_two_detector, EnsembleStats};
pub use unravel::{
    default_dt, max_jump_rate, split_channels, unsplit_channels, EffectiveJump, JumpEvent, Stepper, COLLAPSE_NORM,
    JUMP_PROBABILITY_CAP,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajectoryError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid detector setup: {0}")]
    Setup(String),
    #[error("step {dt:.3e} gives jump probability {probability:.3e} above the cap {JUMP_PROBABILITY_CAP}")]
    StepTooLarge { dt: f64, probability: f64 },
    #[error("state norm collapsed to {0:.3e} after a jump")]
    NormCollapse(f64),
    #[error("empty postselection: 0 of {n_total} trajectories accepted")]
    EmptyPostselection { n_total: usize, n_accepted: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    pub dt: f64,
    pub t_max: f64,
    pub n_traj: usize,
    pub master_seed: u64,
    /// Sorted, inside `[0, t_max]`.
    pub sample_times: Vec<f64>,
}

impl TrajectoryConfig {
    fn validate(&self) -> Result<(), TrajectoryError> {
        let bad = |m: String| Err(TrajectoryError::Config(m));
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return bad(format!("t_max must be positive, got {}", self.t_max));
        }
        if self.n_traj == 0 {
            return bad("n_traj must be at least 1".into());
        }
        if self.sample_times.iter().any(|t| !(0.0..=self.t_max).contains(t)) {
            return bad("sample times must lie in [0, t_max]".into());
        }
        if self.sample_times.windows(2).any(|w| w[1] < w[0]) {
            return bad("sample times must be sorted".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DetectorSetup {
    /// Jumps split between a kept detector (weight `q`) and a postselected
    /// one (weight `1 − q`).
    TwoDetector { q: f64 },
    /// One detector of efficiency `eta`; equivalent to `q = 1 − eta`.
    Inefficient { eta: f64 },
}

impl DetectorSetup {
    pub fn effective_q(&self) -> f64 {
        match *self {
            DetectorSetup::TwoDetector { q } => q,
            DetectorSetup::Inefficient { eta } => 1.0 - eta,
        }
    }

    fn validate(&self) -> Result<(), TrajectoryError> {
        let (name, v) = match *self {
            DetectorSetup::TwoDetector { q } => ("q", q),
            DetectorSetup::Inefficient { eta } => ("eta", eta),
        };
        if !(0.0..=1.0).contains(&v) {
            return Err(TrajectoryError::Setup(format!("{name} must lie in [0, 1], got {v}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub traj_id: usize,
    pub jump_events: Vec<JumpEvent>,
    pub final_state: Vec<C64>,
    /// State at each configured sample time.
    pub samples: Vec<Vec<C64>>,
    pub accepted: bool,
    /// Clicks on detectors 1 and 2 up to `t_max`.
    pub n_jumps_by_detector: [usize; 2],
}

#[derive(Debug, Clone)]
pub struct EnsembleRun {
    pub records: Vec<TrajectoryRecord>,
    /// Statistics over the accepted records.
    pub stats: EnsembleStats,
}

const DETECT_TAG: u64 = u64::from_be_bytes(*b"\0\0detect");

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Physics stream of trajectory `index`.
pub fn trajectory_rng(master_seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index as u64);
    rng
}

/// Detection-thinning stream of trajectory `index`.
pub fn detect_rng(master_seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(master_seed ^ DETECT_TAG));
    rng.set_stream(index as u64);
    rng
}

/// Per-segment steppers: each gap between consecutive sample times (and the
/// tail up to `t_max`) is cut into equal steps no longer than `dt`.
struct Schedule {
    /// `(number of steps, stepper index)` per segment.
    segments: Vec<(usize, usize)>,
    steppers: Vec<Stepper>,
    /// Whether the segment ends on a sample time.
    samples_at_end: Vec<bool>,
    /// Sample times equal to zero are recorded before any step.
    initial_samples: usize,
}

fn schedule(
    model: &LindbladModel,
    jumps: &[EffectiveJump],
    cfg: &TrajectoryConfig,
) -> Result<Schedule, TrajectoryError> {
    let mut sched =
        Schedule { segments: Vec::new(), steppers: Vec::new(), samples_at_end: Vec::new(), initial_samples: 0 };
    let mut ends: Vec<(f64, bool)> = cfg.sample_times.iter().map(|&t| (t, true)).collect();
    if cfg.sample_times.last().is_none_or(|&t| t < cfg.t_max) {
        ends.push((cfg.t_max, false));
    }
    let mut last = 0.0;
    for (t, is_sample) in ends {
        let span = t - last;
        if span <= 0.0 {
            if is_sample && sched.segments.is_empty() {
                sched.initial_samples += 1;
            } else if is_sample {
                // repeated sample time: zero-length segment
                sched.segments.push((0, 0));
                sched.samples_at_end.push(true);
            }
            continue;
        }
        let n = (span / cfg.dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let h = span / n as f64;
        let idx = match sched.steppers.iter().position(|s| s.h == h) {
            Some(i) => i,
            None => {
                sched.steppers.push(Stepper::new(model, jumps.to_vec(), h)?);
                sched.steppers.len() - 1
            }
        };
        sched.segments.push((n, idx));
        sched.samples_at_end.push(is_sample);
        last = t;
    }
    Ok(sched)
}

fn run_one(
    sched: &Schedule,
    psi0: &[C64],
    index: usize,
    master_seed: u64,
) -> Result<TrajectoryRecord, TrajectoryError> {
    let mut rng = trajectory_rng(master_seed, index);
    let mut psi = psi0.to_vec();
    let mut t = 0.0;
    let mut events = Vec::new();
    let mut counts = [0usize; 2];
    let mut samples = vec![psi.clone(); sched.initial_samples];
    for (seg, &(n, idx)) in sched.segments.iter().enumerate() {
        if n > 0 {
            let stepper = &sched.steppers[idx];
            for _ in 0..n {
                let u: f64 = rng.random();
                let (next, ev) = stepper.step(&psi, u)?;
                t += stepper.h;
                if let Some(j) = ev {
                    events.push(JumpEvent { time: t, channel: j.channel, detector: j.detector });
                    counts[j.detector as usize - 1] += 1;
                }
                psi = next;
            }
        }
        if sched.samples_at_end[seg] {
            samples.push(psi.clone());
        }
    }
    Ok(TrajectoryRecord {
        traj_id: index,
        jump_events: events,
        final_state: psi,
        samples,
        accepted: true,
        n_jumps_by_detector: counts,
    })
}

/// Runs `cfg.n_traj` trajectories from `psi0` and marks each record's
/// `accepted` flag according to `setup`. Records come back in index order.
pub fn simulate(
    model: &LindbladModel,
    setup: DetectorSetup,
    cfg: &TrajectoryConfig,
    psi0: &[C64],
) -> Result<Vec<TrajectoryRecord>, TrajectoryError> {
    cfg.validate()?;
    setup.validate()?;
    if psi0.len() != model.dim {
        return Err(TrajectoryError::Config(format!(
            "initial state has length {}, model dim {}",
            psi0.len(),
            model.dim
        )));
    }
    if (norm2(psi0) - 1.0).abs() > 1e-10 {
        return Err(TrajectoryError::Config("initial state must have unit norm".into()));
    }
    let jumps = match setup {
        DetectorSetup::TwoDetector { q } => split_channels(model, q)?,
        DetectorSetup::Inefficient { .. } => unsplit_channels(model),
    };
    let sched = schedule(model, &jumps, cfg)?;
    let mut records: Vec<TrajectoryRecord> =
        (0..cfg.n_traj).into_par_iter().map(|k| run_one(&sched, psi0, k, cfg.master_seed)).collect::<Result<_, _>>()?;
    for r in &mut records {
        r.accepted = match setup {
            DetectorSetup::TwoDetector { .. } => r.n_jumps_by_detector[1] == 0,
            DetectorSetup::Inefficient { eta } => stats::undetected(r, eta, cfg.master_seed),
        };
    }
    Ok(records)
}

/// [`simulate`] followed by averaging `observables` over the accepted set.
pub fn run_ensemble(
    model: &LindbladModel,
    setup: DetectorSetup,
    cfg: &TrajectoryConfig,
    psi0: &[C64],
    observables: &[crate::numerics::ComplexMatrix],
) -> Result<EnsembleRun, TrajectoryError> {
    let records = simulate(model, setup, cfg, psi0)?;
    let accepted: Vec<&TrajectoryRecord> = records.iter().filter(|r| r.accepted).collect();
    let stats = ensemble_average(&accepted, observables, &cfg.sample_times, records.len())?;
    Ok(EnsembleRun { records, stats })
}
