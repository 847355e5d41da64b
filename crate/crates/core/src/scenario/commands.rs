//! Subcommand bodies. Each reads a config, writes CSV plus a manifest into
//! the output directory, and reports what it did.

use std::path::{Path, PathBuf};

use crate::interference::Strategy;

use super::figures::{analysis_table, rf_sweep, run_figure, simulation_table};
use super::output::{ensure_dir, Manifest, Table};
use super::{parse_config, validate::validate, DistanceSweep, ScenarioConfig, ScenarioError};
use super::{EXIT_FAILED, EXIT_OK};

/// What a command wrote and the exit status it asks for.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub message: String,
    pub exit_code: i32,
}

fn out_dir(config: &ScenarioConfig, out: Option<&Path>) -> PathBuf {
    out.map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(&config.outputs.directory))
}

fn write_all(
    command: &str,
    config: &ScenarioConfig,
    dir: &Path,
    seeds: Vec<u64>,
    tables: &[(String, Table)],
) -> Result<Vec<PathBuf>, ScenarioError> {
    ensure_dir(dir)?;
    let mut files = Vec::new();
    for (name, table) in tables {
        let path = dir.join(name);
        table.write(&path)?;
        files.push(path);
    }
    let names = tables.iter().map(|(n, _)| n.clone()).collect();
    files.push(Manifest::new(command, config, seeds, names).write(dir)?);
    Ok(files)
}

fn done(files: Vec<PathBuf>) -> Outcome {
    let message = files
        .iter()
        .map(|f| format!("wrote {}", f.display()))
        .collect::<Vec<_>>()
        .join("\n");
    Outcome {
        files,
        message,
        exit_code: EXIT_OK,
    }
}

/// Analytic load sweep.
pub fn analyze(config_path: &Path, out: &Path) -> Result<Outcome, ScenarioError> {
    let config = parse_config(config_path)?;
    let table = analysis_table(&config)?;
    let files = write_all("analyze", &config, out, Vec::new(), &[("analysis.csv".into(), table)])?;
    Ok(done(files))
}

/// Simulated load sweep over `seeds` replications (defaults to the config).
pub fn simulate(
    config_path: &Path,
    seeds: Option<u32>,
    out: Option<&Path>,
) -> Result<Outcome, ScenarioError> {
    let mut config = parse_config(config_path)?;
    if let Some(n) = seeds {
        if n == 0 {
            return Err(ScenarioError::Usage("--seeds must be at least 1".into()));
        }
        config.simulation.replications = n;
    }
    let seeds = config.simulation.seeds();
    let table = simulation_table(&config, &seeds)?;
    let dir = out_dir(&config, out);
    let files = write_all("simulate", &config, &dir, seeds, &[("simulation.csv".into(), table)])?;
    Ok(done(files))
}

/// Distance sweep under one strategy.
pub fn rf(
    config_path: &Path,
    strategy: &str,
    sweep: Option<&str>,
    out: Option<&Path>,
) -> Result<Outcome, ScenarioError> {
    let mut config = parse_config(config_path)?;
    let strategy: Strategy = strategy
        .parse()
        .map_err(|e: crate::interference::InterferenceError| ScenarioError::Usage(e.to_string()))?;
    config.strategy = strategy;
    if let Some(s) = sweep {
        config.geometry.sweep = DistanceSweep::parse(s)?;
        config.validate()?;
    }
    let points = rf_sweep(&config, strategy, &config.geometry.sweep.distances())?;
    let mut table = Table::new(&["distance_km", "sinr_db", "capacity_bps_hz", "outage"]);
    for p in &points {
        table.push_numbers(&[p.distance_km, p.sinr_db, p.capacity_bps_hz, p.outage]);
    }
    let dir = out_dir(&config, out);
    let name = format!("rf_{}.csv", strategy.name());
    let files = write_all("rf", &config, &dir, Vec::new(), &[(name, table)])?;
    Ok(done(files))
}

/// Figure tables; `which` defaults to the config's figure list.
pub fn figures(
    config_path: &Path,
    which: Option<&[u32]>,
    out: Option<&Path>,
) -> Result<Outcome, ScenarioError> {
    let mut config = parse_config(config_path)?;
    if let Some(w) = which {
        config.outputs.figures = w.to_vec();
        config.validate()?;
    }
    let tables = config
        .outputs
        .figures
        .iter()
        .map(|&f| Ok((format!("fig{f:02}.csv"), run_figure(&config, f)?)))
        .collect::<Result<Vec<_>, ScenarioError>>()?;
    let seeds = if config.simulation.enabled {
        config.simulation.seeds()
    } else {
        Vec::new()
    };
    let dir = out_dir(&config, out);
    let files = write_all("figures", &config, &dir, seeds, &tables)?;
    Ok(done(files))
}

/// Sim-vs-analytic and invariant checks; exit status 1 when anything fails.
pub fn validate_command(config_path: &Path, out: Option<&Path>) -> Result<Outcome, ScenarioError> {
    let config = parse_config(config_path)?;
    let report = validate(&config)?;
    let dir = out_dir(&config, out);
    let files = write_all(
        "validate",
        &config,
        &dir,
        vec![config.simulation.seed],
        &[("validation.csv".into(), report.z_table())],
    )?;
    let mut outcome = done(files);
    outcome.message = format!("{}{}", report.summary(), outcome.message);
    outcome.exit_code = if report.passed() { EXIT_OK } else { EXIT_FAILED };
    Ok(outcome)
}
