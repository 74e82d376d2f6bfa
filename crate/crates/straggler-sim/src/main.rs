//! Command-line front end: run simulations, sweeps, profile fits, and trace
//! exports from declarative manifests.
//!
//! stdout carries machine-readable results only (one JSON line, or nothing
//! when writing files); diagnostics go to stderr. Exit codes: 0 success,
//! 1 configuration or validation error, 2 I/O error.

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use straggler_sim::dist::Histogram;
use straggler_sim::experiments::{monte_carlo, sweep_with_progress, write_csv_file, write_json_file};
use straggler_sim::fit::{combination_residual, fit_profile_weights};
use straggler_sim::manifest::{RunManifest, SweepManifest};
use straggler_sim::svg::{export_svg, SvgOptions};
use straggler_sim::trace::TaskTrace;

#[derive(Parser)]
#[command(name = "straggler-sim", version, about = "Cluster simulator for straggler mitigation via task grouping")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation from a manifest and print metrics as JSON.
    Simulate {
        /// Run manifest (TOML).
        manifest: PathBuf,
        /// Write the run's trace to this path.
        #[arg(long)]
        trace_out: Option<PathBuf>,
        /// Trace output format.
        #[arg(long, value_enum, default_value_t = TraceFormat::Json)]
        format: TraceFormat,
        #[command(flatten)]
        svg: SvgFlags,
    },
    /// Run a parameter sweep from a manifest and write the table as CSV.
    Sweep {
        /// Sweep manifest (TOML).
        manifest: PathBuf,
        /// CSV output path.
        #[arg(long)]
        out: PathBuf,
        /// Also write a JSON mirror of the table.
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Fit convex weights so basis histograms reproduce a target histogram.
    FitProfile {
        /// Target histogram (JSON with bin_edges and frequencies).
        target: PathBuf,
        /// Basis histograms (JSON), at least one.
        #[arg(required = true)]
        basis: Vec<PathBuf>,
    },
    /// Re-render a stored JSON trace as SVG.
    ExportTrace {
        /// Trace file (JSON, schema version 1).
        trace: PathBuf,
        /// Output format.
        #[arg(long, value_enum, default_value_t = TraceFormat::Svg)]
        format: TraceFormat,
        /// Output path.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        svg: SvgFlags,
    },
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum TraceFormat {
    Json,
    Svg,
}

#[derive(clap::Args, Clone, Copy)]
struct SvgFlags {
    /// SVG width in pixels.
    #[arg(long, default_value_t = 1000)]
    svg_width: u32,
    /// SVG row height in pixels.
    #[arg(long, default_value_t = 34)]
    svg_row_height: u32,
}

impl SvgFlags {
    fn options(&self) -> SvgOptions {
        SvgOptions { width: self.svg_width, row_height: self.svg_row_height }
    }
}

/// Failures split by exit code.
enum CmdError {
    Config(String),
    Io(String),
}

impl CmdError {
    fn code(&self) -> ExitCode {
        match self {
            CmdError::Config(_) => ExitCode::from(1),
            CmdError::Io(_) => ExitCode::from(2),
        }
    }

    fn message(&self) -> &str {
        match self {
            CmdError::Config(m) | CmdError::Io(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { manifest, trace_out, format, svg } => {
            cmd_simulate(&manifest, trace_out.as_deref(), format, svg.options())
        }
        Command::Sweep { manifest, out, json_out } => {
            cmd_sweep(&manifest, &out, json_out.as_deref())
        }
        Command::FitProfile { target, basis } => cmd_fit_profile(&target, &basis),
        Command::ExportTrace { trace, format, out, svg } => {
            cmd_export_trace(&trace, format, &out, svg.options())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

fn read_manifest(path: &Path) -> Result<RunManifest, CmdError> {
    if !path.exists() {
        return Err(CmdError::Io(format!("manifest not found: {}", path.display())));
    }
    RunManifest::from_file(path).map_err(|e| CmdError::Config(e.to_string()))
}

fn cmd_simulate(
    manifest_path: &Path,
    trace_out: Option<&Path>,
    format: TraceFormat,
    svg_options: SvgOptions,
) -> Result<(), CmdError> {
    let manifest = read_manifest(manifest_path)?;
    let config = manifest.to_config().map_err(|e| CmdError::Config(e.to_string()))?;
    let result = straggler_sim::run(&config).map_err(|e| CmdError::Config(e.to_string()))?;

    let summary = if manifest.repetitions > 1 {
        let stats = monte_carlo(&config, manifest.repetitions, config.seed)
            .map_err(|e| CmdError::Config(e.to_string()))?;
        json!({
            "makespan": result.makespan,
            "metrics": result.metrics,
            "repetitions": manifest.repetitions,
            "mean_makespan": stats.mean,
            "std_makespan": stats.std,
        })
    } else {
        json!({
            "makespan": result.makespan,
            "metrics": result.metrics,
        })
    };
    println!("{summary}");

    if let Some(path) = trace_out {
        match format {
            TraceFormat::Json => result
                .trace
                .to_json_file(path)
                .map_err(|e| CmdError::Io(e.to_string()))?,
            TraceFormat::Svg => export_svg(&result.trace, &svg_options, path)
                .map_err(|e| CmdError::Io(e.to_string()))?,
        }
        eprintln!("trace written to {}", path.display());
    }
    Ok(())
}

fn cmd_sweep(manifest_path: &Path, out: &Path, json_out: Option<&Path>) -> Result<(), CmdError> {
    if !manifest_path.exists() {
        return Err(CmdError::Io(format!("manifest not found: {}", manifest_path.display())));
    }
    let manifest =
        SweepManifest::from_file(manifest_path).map_err(|e| CmdError::Config(e.to_string()))?;
    let spec = manifest.to_spec().map_err(|e| CmdError::Config(e.to_string()))?;
    let result = sweep_with_progress(&spec, |done, total| {
        eprintln!("cell {done}/{total}");
    })
    .map_err(|e| CmdError::Config(e.to_string()))?;
    write_csv_file(&result, out).map_err(|e| CmdError::Io(e.to_string()))?;
    eprintln!("sweep table written to {}", out.display());
    if let Some(path) = json_out {
        write_json_file(&result, path).map_err(|e| CmdError::Io(e.to_string()))?;
        eprintln!("json mirror written to {}", path.display());
    }
    Ok(())
}

fn read_histogram(path: &Path) -> Result<Histogram, CmdError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CmdError::Io(format!("{}: {e}", path.display())))?;
    let raw: Histogram =
        serde_json::from_str(&text).map_err(|e| CmdError::Config(format!("{}: {e}", path.display())))?;
    Histogram::new(raw.bin_edges, raw.frequencies)
        .map_err(|e| CmdError::Config(format!("{}: {e}", path.display())))
}

fn cmd_fit_profile(target_path: &Path, basis_paths: &[PathBuf]) -> Result<(), CmdError> {
    let target = read_histogram(target_path)?;
    let basis = basis_paths
        .iter()
        .map(|p| read_histogram(p))
        .collect::<Result<Vec<_>, _>>()?;
    let weights =
        fit_profile_weights(&target, &basis).map_err(|e| CmdError::Config(e.to_string()))?;
    let residual = combination_residual(&target, &basis, &weights);
    println!("{}", json!({ "weights": weights, "residual": residual }));
    Ok(())
}

fn cmd_export_trace(
    trace_path: &Path,
    format: TraceFormat,
    out: &Path,
    svg_options: SvgOptions,
) -> Result<(), CmdError> {
    if !trace_path.exists() {
        return Err(CmdError::Io(format!("trace not found: {}", trace_path.display())));
    }
    let trace = TaskTrace::from_json_file(trace_path).map_err(|e| CmdError::Config(e.to_string()))?;
    match format {
        TraceFormat::Svg => {
            export_svg(&trace, &svg_options, out).map_err(|e| CmdError::Io(e.to_string()))?
        }
        TraceFormat::Json => trace.to_json_file(out).map_err(|e| CmdError::Io(e.to_string()))?,
    }
    eprintln!("written to {}", out.display());
    Ok(())
}
