mod args;
mod commands;
mod manifest;
mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::Parser;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use args::{Cli, Command, EpArgs, EvolveArgs, SpectrumArgs, TrajectoriesArgs, VerifyArgs};
use commands::Outcome;
use manifest::{manifest_path, now_ms, RunManifest, Timestamps};

fn typed<T: DeserializeOwned>(params: Value) -> Result<T> {
    Ok(serde_json::from_value(params)?)
}

fn to_params(a: &impl Serialize) -> Result<Value> {
    Ok(serde_json::to_value(a)?)
}

/// Resolves defaults, runs the command and returns the resolved parameters.
fn dispatch(command: &str, params: Value) -> Result<(Value, Outcome)> {
    match command {
        "spectrum" => {
            let a = typed::<SpectrumArgs>(params)?.resolve()?;
            Ok((to_params(&a)?, commands::spectrum(&a)?))
        }
        "ep" => {
            let a = typed::<EpArgs>(params)?.resolve()?;
            Ok((to_params(&a)?, commands::ep(&a)?))
        }
        "evolve" => {
            let a = typed::<EvolveArgs>(params)?.resolve()?;
            Ok((to_params(&a)?, commands::evolve(&a)?))
        }
        "trajectories" => {
            let a = typed::<TrajectoriesArgs>(params)?.resolve()?;
            Ok((to_params(&a)?, commands::trajectories(&a)?))
        }
        "verify" => {
            let a = typed::<VerifyArgs>(params)?.resolve()?;
            Ok((to_params(&a)?, commands::verify(&a)?))
        }
        other => bail!("unknown command {other:?} in manifest"),
    }
}

fn run(command: &str, params: Value) -> Result<bool> {
    let started = now_ms();
    let (params, outcome) = dispatch(command, params)?;
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        parameters: params,
        master_seed: outcome.master_seed,
        timestamps: Timestamps { started_unix_ms: started, finished_unix_ms: now_ms() },
        output_files: outcome.files.clone(),
        acceptance: outcome.acceptance,
    };
    let path = manifest_path(&outcome.files[0]);
    manifest.write(&path)?;
    println!("{}", outcome.summary);
    println!("manifest -> {}", path.display());
    Ok(outcome.success)
}

fn rerun(manifest: &Path, out: Option<PathBuf>) -> Result<bool> {
    let m = RunManifest::read(manifest)?;
    let mut params = m.parameters;
    if let Some(out) = out {
        let Some(obj) = params.as_object_mut() else { bail!("manifest parameters are not an object") };
        obj.insert("out".into(), serde_json::to_value(out)?);
    }
    run(&m.command, params)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Spectrum(a) => to_params(a).and_then(|p| run("spectrum", p)),
        Command::Ep(a) => to_params(a).and_then(|p| run("ep", p)),
        Command::Evolve(a) => to_params(a).and_then(|p| run("evolve", p)),
        Command::Trajectories(a) => to_params(a).and_then(|p| run("trajectories", p)),
        Command::Verify(a) => to_params(a).and_then(|p| run("verify", p)),
        Command::Rerun(a) => rerun(&a.manifest, a.out.clone()),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
