//! The `regcap` command line.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::analysis::{
    capability_routes, identify_scz, impact_surface, lag_window_reports, path_overlap_matrix, rank_channels,
    response_covariance, AxisSpec, DeterrenceWeights, SczThresholds, DEFAULT_BAND_THRESHOLD, DEFAULT_STABILITY,
};
use crate::dynamics::simulate;
use crate::graph::generate_power_law_graph;
use crate::report::{self, AnalysisDocument, LoadError, RunManifest};
use crate::scenario::Scenario;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "regcap", version, about = "Simulate and analyse supply-disruption cascades")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a scenario file and list every problem found.
    Validate { scenario: PathBuf },
    /// Run the scenario and write trajectories and threshold events.
    Simulate {
        #[command(flatten)]
        io: RunIo,
        /// Override the scenario's time step (years).
        #[arg(long)]
        step: Option<f64>,
    },
    /// Lag windows, collapse times, overlap, covariance and critical zones.
    Analyze {
        #[command(flatten)]
        io: RunIo,
        /// Collapse level applied to every capability instead of its own.
        #[arg(long)]
        theta_col: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_STABILITY)]
        stability: f64,
        #[arg(long, default_value_t = DEFAULT_BAND_THRESHOLD)]
        band_threshold: f64,
        #[arg(long, default_value_t = SczThresholds::default().overlap_min)]
        overlap_min: f64,
        #[arg(long, default_value_t = SczThresholds::default().corr_min)]
        corr_min: f64,
        #[arg(long, default_value_t = SczThresholds::default().lag_max)]
        lag_max: f64,
    },
    /// Rank resource-to-capability channels by deterrence weight.
    Channels {
        #[command(flatten)]
        io: RunIo,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        gamma: f64,
    },
    /// Sweep event intensity against suppression activation.
    Surface {
        #[command(flatten)]
        io: RunIo,
        /// Intensity axis as start:end:count.
        #[arg(long)]
        intensity: AxisSpec,
        /// Activation axis as start:end:count.
        #[arg(long)]
        activation: AxisSpec,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Write a synthetic scenario with power-law resource weights.
    Generate {
        #[arg(long)]
        resources: usize,
        #[arg(long)]
        equipment: usize,
        #[arg(long)]
        generations: usize,
        #[arg(long)]
        capabilities: usize,
        #[arg(long, default_value_t = 1.5)]
        exponent: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 12.0)]
        horizon: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct RunIo {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

/// Runs the tool on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            EXIT_FAILURE
        }
    }
}

fn load(path: &Path) -> Result<(Scenario, Vec<u8>), Failure> {
    let bytes = fs::read(path).map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| Failure(format!("{} is not UTF-8", path.display())))?;
    let (scenario, report) = report::parse_scenario(&text)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok((scenario, bytes))
}

fn finish(manifest: RunManifest, out: &Path, started: Instant) -> Result<(), Failure> {
    let manifest = RunManifest {
        wall_time_seconds: started.elapsed().as_secs_f64(),
        ..manifest
    };
    manifest.write(&out.join("manifest.json"))?;
    Ok(())
}

fn dispatch(command: Command) -> Result<(), Failure> {
    let started = Instant::now();
    match command {
        Command::Validate { scenario } => {
            let text = report::read(&scenario)?;
            match report::parse_scenario(&text) {
                Ok((_, r)) => {
                    for w in &r.warnings {
                        eprintln!("warning: {w}");
                    }
                    println!("{}: ok", scenario.display());
                    Ok(())
                }
                Err(LoadError::Validation(r)) => Err(Failure(format!("{} is invalid\n{r}", scenario.display()))),
                Err(e) => Err(e.into()),
            }
        }
        Command::Simulate { io, step } => {
            let (mut s, bytes) = load(&io.scenario)?;
            let mut manifest = RunManifest::new("simulate", &bytes);
            if let Some(step) = step {
                s.step = step;
                manifest = manifest.param("step", step);
            }
            let result = simulate(&s)?;
            fs::create_dir_all(&io.out)?;
            report::write_timeseries(&result, &io.out.join("timeseries.csv"))?;
            let events: Vec<serde_json::Value> = result
                .event_log
                .iter()
                .map(|e| serde_json::json!({"t": report::format_number(e.t).parse::<f64>().unwrap_or(e.t), "kind": e.kind, "node_id": e.node_id}))
                .collect();
            let mut text = serde_json::to_string_pretty(&events)?;
            text.push('\n');
            fs::write(io.out.join("events.json"), text)?;
            finish(manifest, &io.out, started)
        }
        Command::Analyze {
            io,
            theta_col,
            stability,
            band_threshold,
            overlap_min,
            corr_min,
            lag_max,
        } => {
            let (s, bytes) = load(&io.scenario)?;
            let sim = simulate(&s)?;
            let lags = lag_window_reports(&s.graph, &sim, stability, theta_col)?;
            let mut doc = AnalysisDocument {
                lag_windows: Some(lags.clone()),
                ..Default::default()
            };
            let caps = s.capability_ids();
            // Overlap and covariance need at least two capabilities with
            // supply routes; smaller graphs report lag windows only.
            let routes = capability_routes(&s.graph)?;
            if caps.len() >= 2 && routes.values().all(|r| !r.is_empty()) {
                let overlap = path_overlap_matrix(&routes, &routes)?;
                let trajs: Vec<_> = caps.iter().filter_map(|id| sim.trajectory(id)).collect();
                let cov = response_covariance(&trajs, band_threshold)?;
                let thresholds = SczThresholds {
                    overlap_min,
                    corr_min,
                    lag_max,
                };
                doc.scz = Some(identify_scz(&overlap, &cov, &lags, thresholds)?);
                doc.overlap = Some(overlap);
                doc.covariance = Some(cov);
            }
            fs::create_dir_all(&io.out)?;
            report::write_analysis(&doc, &io.out.join("analysis.json"))?;
            let mut manifest = RunManifest::new("analyze", &bytes)
                .param("stability", stability)
                .param("band_threshold", band_threshold)
                .param("overlap_min", overlap_min)
                .param("corr_min", corr_min)
                .param("lag_max", lag_max);
            if let Some(t) = theta_col {
                manifest = manifest.param("theta_col", t);
            }
            finish(manifest, &io.out, started)
        }
        Command::Channels { io, alpha, beta, gamma } => {
            let (s, bytes) = load(&io.scenario)?;
            let sim = simulate(&s)?;
            let weights = DeterrenceWeights { alpha, beta, gamma };
            let doc = AnalysisDocument {
                channels: Some(rank_channels(&s.graph, &s.dynamics, &sim, weights)?),
                ..Default::default()
            };
            fs::create_dir_all(&io.out)?;
            report::write_analysis(&doc, &io.out.join("analysis.json"))?;
            let manifest = RunManifest::new("channels", &bytes)
                .param("alpha", alpha)
                .param("beta", beta)
                .param("gamma", gamma);
            finish(manifest, &io.out, started)
        }
        Command::Surface {
            io,
            intensity,
            activation,
            threads,
        } => {
            let (s, bytes) = load(&io.scenario)?;
            let surface = impact_surface(&s, &intensity.values(), &activation.values(), threads)?;
            for e in &surface.errors {
                eprintln!("warning: cell ({}, {}) failed: {}", e.intensity, e.activation, e.message);
            }
            fs::create_dir_all(&io.out)?;
            fs::write(io.out.join("surface.csv"), report::surface_csv(&surface))?;
            let manifest = RunManifest::new("surface", &bytes)
                .param("intensity", intensity.to_string())
                .param("activation", activation.to_string());
            finish(manifest, &io.out, started)
        }
        Command::Generate {
            resources,
            equipment,
            generations,
            capabilities,
            exponent,
            seed,
            horizon,
            step,
            out,
        } => {
            let graph = generate_power_law_graph(resources, equipment, generations, capabilities, exponent, seed)?;
            let mut s = Scenario::new(graph, horizon, step);
            s.seed = seed;
            let report = s.validate();
            if !report.is_ok() {
                return Err(Failure(format!("generated scenario is invalid\n{report}")));
            }
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(&out, s.to_json_string())?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["regcap"]), EXIT_USAGE);
        assert_eq!(run(["regcap", "simulate", "--out", "x"]), EXIT_USAGE);
        assert_eq!(run(["regcap", "surface", "--scenario", "a", "--out", "b", "--intensity", "0:1", "--activation", "0:1:3"]), EXIT_USAGE);
    }

    #[test]
    fn missing_file_exits_one() {
        assert_eq!(run(["regcap", "validate", "/nonexistent/scenario.json"]), EXIT_FAILURE);
    }
}
