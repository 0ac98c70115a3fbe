use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use hybrid_lindblad::evolve::{linspace, propagate};
use hybrid_lindblad::lindblad::{
    hybrid_liouvillian, pauli, projector, qubit_state, LindbladError, LindbladModel, QubitStateSpec,
};
use hybrid_lindblad::models::preset;
use hybrid_lindblad::models::verify::{verify as run_verify, Example};
use hybrid_lindblad::spectra::{sweep, EpOutcome, EpSearch};
use hybrid_lindblad::trajectories::{default_dt, run_ensemble, DetectorSetup, TrajectoryConfig};
use serde::Serialize;
use serde_json::json;

use crate::args::{
    EpArgs, EvolveArgs, ModelArgs, OutputArgs, Preset, SpectrumArgs, StateArgs, TrajectoriesArgs, VerifyArgs,
    OUT_DIR_ENV,
};
use crate::manifest::Acceptance;
use crate::plot::{self, Panel, Series};

pub const SWEEP_HEADER: [&str; 6] = ["param", "q", "branch", "re_lambda", "im_lambda", "residual"];
pub const EVOLVE_HEADER: [&str; 5] = ["t", "sx", "sy", "sz", "raw_trace"];
pub const TRAJECTORY_HEADER: [&str; 6] = ["t", "obs", "mean", "sem", "n_accepted", "n_total"];
pub const EVENT_HEADER: [&str; 4] = ["traj_id", "t_jump", "channel", "detector"];
pub const OBSERVABLES: [&str; 3] = ["sx", "sy", "sz"];

/// What a command produced. `files[0]` is the primary output.
#[derive(Debug)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub master_seed: Option<u64>,
    pub acceptance: Option<Acceptance>,
    pub summary: String,
    pub success: bool,
}

/// The explicit path, or `default_name` inside `$HYBRID_LINDBLAD_OUT`
/// (falling back to the working directory).
pub fn resolve_out(out: &Option<PathBuf>, default_name: &str) -> PathBuf {
    match out {
        Some(p) => p.clone(),
        None => {
            std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".")).join(default_name)
        }
    }
}

/// `run.csv` with suffix `events.csv` becomes `run.events.csv`.
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    out.with_extension(suffix)
}

fn prepare(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
        }
        _ => Ok(()),
    }
}

fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = T>) -> Result<()> {
    prepare(path)?;
    // header written by hand so that files with no rows still carry it
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    prepare(path)?;
    fs::write(path, serde_json::to_string_pretty(value)? + "\n").with_context(|| format!("writing {}", path.display()))
}

fn write_plot(out: &Path, title: &str, x_label: &str, panels: &[Panel]) -> Result<PathBuf> {
    let path = sibling(out, "svg");
    fs::write(&path, plot::render(title, x_label, panels)).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn check_omega(m: &ModelArgs) -> Result<()> {
    ensure!(m.omega.is_finite() && m.omega > 0.0, "--omega must be positive, got {}", m.omega);
    Ok(())
}

fn check_q(q: f64) -> Result<()> {
    ensure!(q.is_finite() && q >= 0.0, "--q must be finite and non-negative, got {q}");
    Ok(())
}

fn build(m: &ModelArgs, gamma: f64) -> Result<LindbladModel> {
    check_omega(m)?;
    Ok(preset(m.model.name(), m.omega, gamma)?)
}

/// Models indexed by the rescaled rate `γ/ω`.
fn family(m: &ModelArgs) -> impl Fn(f64) -> Result<LindbladModel, LindbladError> + Sync {
    let (name, omega) = (m.model.name(), m.omega);
    move |p: f64| preset(name, omega, p * omega)
}

fn initial_state(s: &StateArgs) -> Result<Vec<hybrid_lindblad::numerics::C64>> {
    ensure!(s.theta.is_finite() && s.phi.is_finite(), "--theta and --phi must be finite");
    Ok(qubit_state(QubitStateSpec { theta: s.theta, phi: s.phi }))
}

fn default_t_max(m: &ModelArgs) -> f64 {
    5.0 / m.omega
}

impl SpectrumArgs {
    pub fn resolve(mut self) -> Result<Self> {
        self.output.out = Some(resolve_out(&self.output.out, "spectrum.csv"));
        Ok(self)
    }
}

impl EpArgs {
    pub fn resolve(mut self) -> Result<Self> {
        self.output.out = Some(resolve_out(&self.output.out, "ep.json"));
        Ok(self)
    }
}

impl EvolveArgs {
    pub fn resolve(mut self) -> Result<Self> {
        check_omega(&self.model)?;
        self.t_max = Some(self.t_max.unwrap_or_else(|| default_t_max(&self.model)));
        self.output.out = Some(resolve_out(&self.output.out, "evolve.csv"));
        Ok(self)
    }
}

impl TrajectoriesArgs {
    pub fn resolve(mut self) -> Result<Self> {
        let model = build(&self.model, self.gamma)?;
        self.t_max = Some(self.t_max.unwrap_or_else(|| default_t_max(&self.model)));
        if self.dt.is_none() {
            self.dt = Some(default_dt(&model, self.model.omega)?);
        }
        self.output.out = Some(resolve_out(&self.output.out, "trajectories.csv"));
        Ok(self)
    }

    fn setup(&self) -> Result<DetectorSetup> {
        match (self.q, self.eta) {
            (Some(q), None) => Ok(DetectorSetup::TwoDetector { q }),
            (None, Some(eta)) => Ok(DetectorSetup::Inefficient { eta }),
            _ => bail!("exactly one of --q or --eta is required"),
        }
    }
}

impl VerifyArgs {
    pub fn resolve(mut self) -> Result<Self> {
        self.out = Some(resolve_out(&self.out, "verify.json"));
        Ok(self)
    }
}

fn out_of(o: &OutputArgs) -> &Path {
    o.out.as_deref().expect("resolved output path")
}

#[derive(Serialize)]
struct SweepRow {
    param: f64,
    q: f64,
    branch: usize,
    re_lambda: f64,
    im_lambda: f64,
    residual: f64,
}

pub fn spectrum(a: &SpectrumArgs) -> Result<Outcome> {
    check_omega(&a.model)?;
    check_q(a.q)?;
    let (lo, hi, n) = (a.sweep_min, a.sweep_max, a.sweep_steps);
    ensure!(n >= 1, "--sweep-steps must be at least 1");
    ensure!(lo.is_finite() && lo >= 0.0, "--sweep-min must be finite and non-negative, got {lo}");
    ensure!(n == 1 || (hi.is_finite() && hi > lo), "invalid sweep range [{lo}, {hi}]");
    let grid: Vec<f64> =
        if n == 1 { vec![lo] } else { (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect() };

    let track = sweep(&family(&a.model), &grid, a.q)?;
    let out = out_of(&a.output);
    let rows = grid.iter().enumerate().flat_map(|(t, &param)| {
        let track = &track;
        (0..track.n_branches()).map(move |b| SweepRow {
            param,
            q: a.q,
            branch: b,
            re_lambda: track.eigenvalues[b][t].re,
            im_lambda: track.eigenvalues[b][t].im,
            residual: track.residuals[b][t],
        })
    });
    write_csv(out, &SWEEP_HEADER, rows)?;
    let mut files = vec![out.to_path_buf()];

    let mut summary = format!("{} grid points x {} branches -> {}", n, track.n_branches(), out.display());
    for (t, i, j) in track.collisions(1e-3) {
        summary.push_str(&format!("\nbranches {i} and {j} meet near gamma/omega = {}", grid[t]));
    }
    if a.output.plot {
        let panel = |y_label: &str, part: fn(&hybrid_lindblad::numerics::C64) -> f64| Panel {
            y_label: y_label.into(),
            series: (0..track.n_branches())
                .map(|b| Series {
                    label: format!("branch {b}"),
                    points: grid.iter().zip(&track.eigenvalues[b]).map(|(&p, l)| (p, part(l))).collect(),
                })
                .collect(),
        };
        let title = format!("{} spectrum, q = {}", a.model.model.name(), a.q);
        files.push(write_plot(out, &title, "gamma / omega", &[panel("Re λ", |l| l.re), panel("Im λ", |l| l.im)])?);
    }
    Ok(Outcome { files, master_seed: None, acceptance: None, summary, success: true })
}

pub fn ep(a: &EpArgs) -> Result<Outcome> {
    check_omega(&a.model)?;
    check_q(a.q)?;
    ensure!(a.sweep_steps >= 3, "--sweep-steps must be at least 3 for an EP search");
    let search = EpSearch { scan_points: a.sweep_steps, ..EpSearch::default() };
    let outcome = search.run(&family(&a.model), a.q, (a.sweep_min, a.sweep_max))?;
    let base = json!({
        "model": a.model.model.name(),
        "omega": a.model.omega,
        "q": a.q,
        "bracket": [a.sweep_min, a.sweep_max],
    });
    let (report, summary) = match &outcome {
        EpOutcome::Found(e) => (
            json!({
                "found": true,
                "param_value": e.parameter_value,
                "eigenvalue": [e.eigenvalue_at_ep.re, e.eigenvalue_at_ep.im],
                "order": e.order,
                "gap": e.gap_at_ep,
                "overlap": e.overlap_at_ep,
                "branches": e.coalescing_branches,
                "jordan_block_size": e.jordan_block_size,
            }),
            format!("EP of order {} at gamma/omega = {}", e.order, e.parameter_value),
        ),
        EpOutcome::NotFound { best_parameter, best_gap, best_overlap } => (
            json!({
                "found": false,
                "best_parameter": best_parameter,
                "best_gap": best_gap,
                "best_overlap": best_overlap,
            }),
            format!("no EP in [{}, {}]; closest approach at gamma/omega = {best_parameter}", a.sweep_min, a.sweep_max),
        ),
    };
    let mut merged = base;
    merged.as_object_mut().expect("object").extend(report.as_object().expect("object").clone());
    let out = out_of(&a.output);
    write_json(out, &merged)?;
    Ok(Outcome { files: vec![out.to_path_buf()], master_seed: None, acceptance: None, summary, success: true })
}

#[derive(Serialize)]
struct EvolveRow {
    t: f64,
    sx: f64,
    sy: f64,
    sz: f64,
    raw_trace: f64,
}

pub fn evolve(a: &EvolveArgs) -> Result<Outcome> {
    check_q(a.q)?;
    let model = build(&a.model, a.gamma)?;
    let t_max = a.t_max.expect("resolved t_max");
    ensure!(t_max.is_finite() && t_max >= 0.0, "--t-max must be finite and non-negative, got {t_max}");
    ensure!(a.samples >= 1, "--samples must be at least 1");
    let s = hybrid_liouvillian(&model, a.q)?;
    let rho0 = projector(&initial_state(&a.state)?);
    let times = linspace(t_max, a.samples);
    let res = propagate(&s, &rho0, &times)?;
    let bloch = res.bloch()?;

    let out = out_of(&a.output);
    let rows = (0..times.len()).map(|k| EvolveRow {
        t: res.times[k],
        sx: bloch[k][0],
        sy: bloch[k][1],
        sz: bloch[k][2],
        raw_trace: res.raw_traces[k],
    });
    write_csv(out, &EVOLVE_HEADER, rows)?;
    let mut files = vec![out.to_path_buf()];
    if a.output.plot {
        let series = |label: &str, f: &dyn Fn(usize) -> f64| Series {
            label: label.into(),
            points: (0..times.len()).map(|k| (times[k], f(k))).collect(),
        };
        let panels = [
            Panel {
                y_label: "Bloch components".into(),
                series: vec![
                    series("sx", &|k| bloch[k][0]),
                    series("sy", &|k| bloch[k][1]),
                    series("sz", &|k| bloch[k][2]),
                ],
            },
            Panel { y_label: "raw trace".into(), series: vec![series("tr", &|k| res.raw_traces[k])] },
        ];
        let title = format!("{} evolution, gamma = {}, q = {}", a.model.model.name(), a.gamma, a.q);
        files.push(write_plot(out, &title, "t", &panels)?);
    }
    let last = bloch.last().expect("at least one sample");
    let summary = format!(
        "{} samples -> {}; final Bloch vector ({:.6}, {:.6}, {:.6})",
        times.len(),
        out.display(),
        last[0],
        last[1],
        last[2]
    );
    Ok(Outcome { files, master_seed: None, acceptance: None, summary, success: true })
}

#[derive(Serialize)]
struct TrajectoryRow<'a> {
    t: f64,
    obs: &'a str,
    mean: f64,
    sem: f64,
    n_accepted: usize,
    n_total: usize,
}

#[derive(Serialize)]
struct EventRow {
    traj_id: usize,
    t_jump: f64,
    channel: usize,
    detector: u8,
}

pub fn trajectories(a: &TrajectoriesArgs) -> Result<Outcome> {
    let model = build(&a.model, a.gamma)?;
    let setup = a.setup()?;
    let t_max = a.t_max.expect("resolved t_max");
    ensure!(a.samples >= 1, "--samples must be at least 1");
    let cfg = TrajectoryConfig {
        dt: a.dt.expect("resolved dt"),
        t_max,
        n_traj: a.n_traj,
        master_seed: a.seed,
        sample_times: linspace(t_max, a.samples),
    };
    let psi0 = initial_state(&a.state)?;
    let run = run_ensemble(&model, setup, &cfg, &psi0, &[pauli::x(), pauli::y(), pauli::z()])?;
    let st = &run.stats;

    let out = out_of(&a.output);
    let rows = st.times.iter().enumerate().flat_map(|(t, &time)| {
        OBSERVABLES.iter().enumerate().map(move |(o, name)| TrajectoryRow {
            t: time,
            obs: name,
            mean: st.mean[o][t],
            sem: st.sem[o][t],
            n_accepted: st.n_accepted,
            n_total: st.n_total,
        })
    });
    write_csv(out, &TRAJECTORY_HEADER, rows)?;
    let mut files = vec![out.to_path_buf()];

    if a.events {
        let path = sibling(out, "events.csv");
        let rows = run.records.iter().flat_map(|r| {
            r.jump_events.iter().map(move |e| EventRow {
                traj_id: r.traj_id,
                t_jump: e.time,
                channel: e.channel,
                detector: e.detector,
            })
        });
        write_csv(&path, &EVENT_HEADER, rows)?;
        files.push(path);
    }
    if a.output.plot {
        let panels: Vec<Panel> = OBSERVABLES
            .iter()
            .enumerate()
            .map(|(o, name)| {
                let band = |sign: f64| {
                    st.times.iter().enumerate().map(|(t, &x)| (x, st.mean[o][t] + sign * st.sem[o][t])).collect()
                };
                Panel {
                    y_label: format!("<{name}>"),
                    series: vec![
                        Series { label: "mean".into(), points: band(0.0) },
                        Series { label: "+SEM".into(), points: band(1.0) },
                        Series { label: "-SEM".into(), points: band(-1.0) },
                    ],
                }
            })
            .collect();
        let title =
            format!("{} trajectories, {:?}, accepted {}/{}", a.model.model.name(), setup, st.n_accepted, st.n_total);
        files.push(write_plot(out, &title, "t", &panels)?);
    }
    let summary = format!("accepted {} of {} trajectories -> {}", st.n_accepted, st.n_total, out.display());
    Ok(Outcome {
        files,
        master_seed: Some(a.seed),
        acceptance: Some(Acceptance { accepted: st.n_accepted, total: st.n_total }),
        summary,
        success: true,
    })
}

pub fn verify(a: &VerifyArgs) -> Result<Outcome> {
    ensure!(a.samples >= 1, "--samples must be at least 1");
    let example = match a.model {
        Preset::Example1 => Example::Example1,
        Preset::Example2 => Example::Example2,
    };
    let report = run_verify(example, a.samples, a.seed)?;
    let out = a.out.as_deref().expect("resolved output path");
    let deviations = sibling(out, "deviations.json");
    let summary_json = json!({
        "example": report.example,
        "samples": report.samples,
        "seed": report.seed,
        "passed": report.passed(),
        "checks": report.checks,
        "n_deviations": report.deviations.len(),
        "deviations_file": deviations,
    });
    write_json(out, &summary_json)?;
    write_json(&deviations, &report.deviations)?;

    let mut summary = String::new();
    for c in &report.checks {
        summary.push_str(&format!(
            "{} {}: max error {:.3e} (tolerance {:.0e}, {} cases)\n",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.max_error,
            c.tolerance,
            c.cases
        ));
    }
    summary.push_str(&format!("{} listed-formula deviations -> {}", report.deviations.len(), deviations.display()));
    Ok(Outcome {
        files: vec![out.to_path_buf(), deviations],
        master_seed: Some(a.seed),
        acceptance: None,
        summary,
        success: report.passed(),
    })
}
