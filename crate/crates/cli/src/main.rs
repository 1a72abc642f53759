//! Command-line driver for the Sol³ surface verification engine.
//!
//! Five subcommands cover the workflow end to end:
//!
//! * `catalog`   — list the built-in surfaces.
//! * `curvature` — pointwise curvature summary of one surface at one
//!   resolution.
//! * `converge`  — residual refinement table for a set of identities over
//!   increasing resolutions, without gating.
//! * `verify`    — the same table gated by the pass rule (final residual
//!   below tolerance, or a convergence order inside the second-order band);
//!   a failed gate sets exit code 1.
//! * `scan`      — gap predicates, energy statistics, and the randomized
//!   algebra certificates on one surface.
//!
//! Exit codes: 0 on success, 1 when `verify` finds a failing identity, 2
//! for configuration and gating errors (unknown surface or identity, bad
//! resolutions, an identity that needs constant mean curvature requested
//! on a chart without it, malformed config files).

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use solgeo_core::gapscan::{scan, GapReport};
use solgeo_core::immersion::catalog;
use solgeo_core::simons::{identity_residual, passes};
use solgeo_core::surfcalc::ResidualReport;

use config::{resolve, Resolved};
use output::{csv_field, emit, sci, to_json};

#[derive(Parser)]
#[command(
    name = "solgeo",
    version,
    about = "Numerical verification engine for immersed surfaces in Sol3",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in surface catalog
    Catalog(CatalogArgs),
    /// Pointwise curvature summary of a surface at one resolution
    Curvature(JobArgs),
    /// Residual refinement table without pass/fail gating
    Converge(JobArgs),
    /// Residual refinement table gated by the pass rule (exit 1 on failure)
    Verify(JobArgs),
    /// Gap predicates and randomized algebra certificates
    Scan(JobArgs),
}

#[derive(Args)]
pub struct JobArgs {
    /// JSON config file; command-line flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Catalog surface name (see `solgeo catalog`)
    #[arg(long)]
    surface: Option<String>,
    /// Comma-separated lattice resolutions, strictly increasing, each >= 8;
    /// curvature and scan use the finest entry
    #[arg(long)]
    res: Option<String>,
    /// Comma-separated identity tags (default: every identity applicable
    /// to the surface)
    #[arg(long)]
    ids: Option<String>,
    /// Residual tolerance for the pass rule
    #[arg(long)]
    tol: Option<f64>,
    /// Seed for the randomized certificates
    #[arg(long)]
    seed: Option<u64>,
    /// Leaf offset along the suppressed coordinate
    #[arg(long)]
    c: Option<f64>,
    /// Graph amplitude
    #[arg(long)]
    eps: Option<f64>,
    /// Torus major radius
    #[arg(long)]
    major: Option<f64>,
    /// Torus minor radius
    #[arg(long)]
    minor: Option<f64>,
    /// Sphere radius
    #[arg(long)]
    rho: Option<f64>,
    /// Sphere polar exclusion band (radians)
    #[arg(long)]
    band: Option<f64>,
    /// Output format
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output path (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct CatalogArgs {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output path (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

enum CliError {
    /// Configuration or gating problem — exit code 2.
    Gate(String),
    /// A verified identity failed the pass rule — exit code 1.
    Failure(String),
}

fn gate<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Gate(e.to_string())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Failure(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(CliError::Gate(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Catalog(args) => {
            let text = cmd_catalog(args.format)?;
            emit(&text, args.out.as_deref()).map_err(CliError::Gate)
        }
        Command::Curvature(args) => {
            let r = resolve(&args).map_err(CliError::Gate)?;
            let text = cmd_curvature(&r)?;
            emit(&text, r.out.as_deref()).map_err(CliError::Gate)
        }
        Command::Converge(args) => {
            let r = resolve(&args).map_err(CliError::Gate)?;
            let (text, _all_pass) = cmd_table(&r, false)?;
            emit(&text, r.out.as_deref()).map_err(CliError::Gate)
        }
        Command::Verify(args) => {
            let r = resolve(&args).map_err(CliError::Gate)?;
            let (text, all_pass) = cmd_table(&r, true)?;
            emit(&text, r.out.as_deref()).map_err(CliError::Gate)?;
            if all_pass {
                Ok(())
            } else {
                Err(CliError::Failure(format!(
                    "verification failed on {}",
                    r.chart.name()
                )))
            }
        }
        Command::Scan(args) => {
            let r = resolve(&args).map_err(CliError::Gate)?;
            let text = cmd_scan(&r)?;
            emit(&text, r.out.as_deref()).map_err(CliError::Gate)
        }
    }
}

fn cmd_catalog(format: Format) -> Result<String, CliError> {
    let entries = catalog();
    match format {
        Format::Json => to_json(&entries).map_err(CliError::Gate),
        Format::Csv => {
            let mut text = String::from("name,domain,periodic_s,periodic_t,cmc,description\n");
            for e in &entries {
                text.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    e.name,
                    csv_field(e.domain),
                    e.periodic[0],
                    e.periodic[1],
                    e.cmc,
                    csv_field(e.description),
                ));
            }
            Ok(text)
        }
    }
}

#[derive(Serialize)]
struct QuantityStats {
    quantity: &'static str,
    min: f64,
    max: f64,
    mean: f64,
}

#[derive(Serialize)]
struct CurvatureOutput {
    surface: String,
    resolution: usize,
    quantities: Vec<QuantityStats>,
}

/// Extrema and unweighted mean of the curvature scalars over the interior
/// lattice nodes of the finest requested resolution.
fn cmd_curvature(r: &Resolved) -> Result<String, CliError> {
    let n = r.finest();
    let grid = r.chart.sample_grid(n).map_err(gate)?;
    let (si, ti) = grid.interior();

    let fields: [(&'static str, fn(&solgeo_core::PointData) -> f64); 4] = [
        ("f", |d| d.f),
        ("norm_a2", |d| d.norm_a2),
        ("k", |d| d.k),
        ("c3", |d| d.c[2]),
    ];
    let mut quantities = Vec::with_capacity(fields.len());
    for (name, get) in fields {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        let mut count = 0usize;
        for i in si.clone() {
            for j in ti.clone() {
                let v = get(&grid.at(i, j));
                min = min.min(v);
                max = max.max(v);
                sum += v;
                count += 1;
            }
        }
        quantities.push(QuantityStats {
            quantity: name,
            min,
            max,
            mean: sum / count as f64,
        });
    }

    let report = CurvatureOutput {
        surface: r.chart.name().to_string(),
        resolution: n,
        quantities,
    };
    match r.format {
        Format::Json => to_json(&report).map_err(CliError::Gate),
        Format::Csv => {
            let mut text = String::from("quantity,min,max,mean\n");
            for q in &report.quantities {
                text.push_str(&format!(
                    "{},{},{},{}\n",
                    q.quantity,
                    sci(q.min),
                    sci(q.max),
                    sci(q.mean)
                ));
            }
            Ok(text)
        }
    }
}

#[derive(Serialize)]
struct GatedReport {
    #[serde(flatten)]
    report: ResidualReport<f64>,
    pass: bool,
}

#[derive(Serialize)]
struct VerifyOutput {
    surface: String,
    tol: f64,
    all_pass: bool,
    reports: Vec<GatedReport>,
}

#[derive(Serialize)]
struct ConvergeOutput {
    surface: String,
    reports: Vec<ResidualReport<f64>>,
}

fn table_csv(reports: &[ResidualReport<f64>]) -> String {
    let mut text = String::from("identity,resolution,max_res,mean_res,order\n");
    for rep in reports {
        for (i, &n) in rep.resolutions.iter().enumerate() {
            // The order field is empty on the coarsest row and whenever the
            // estimate is undefined (both residuals at the round-off floor).
            let order = match i {
                0 => String::new(),
                _ if !rep.orders[i - 1].is_finite() => String::new(),
                _ => sci(rep.orders[i - 1]),
            };
            text.push_str(&format!(
                "{},{},{},{},{}\n",
                rep.id,
                n,
                sci(rep.max_abs[i]),
                sci(rep.mean_abs[i]),
                order
            ));
        }
    }
    text
}

/// Shared implementation of `converge` (gated = false) and `verify`
/// (gated = true). Returns the rendered table and whether every identity
/// passed; per-identity verdicts go to stderr so stdout stays data-only.
fn cmd_table(r: &Resolved, gated: bool) -> Result<(String, bool), CliError> {
    let mut reports = Vec::with_capacity(r.ids.len());
    for &id in &r.ids {
        reports.push(identity_residual(&r.chart, id, &r.resolutions).map_err(gate)?);
    }
    let verdicts: Vec<bool> = reports.iter().map(|rep| passes(rep, r.tol)).collect();
    let all_pass = verdicts.iter().all(|&p| p);

    if gated {
        for (rep, &ok) in reports.iter().zip(&verdicts) {
            let order = match rep.order {
                Some(o) => format!("{o:.2}"),
                None => "n/a".to_string(),
            };
            eprintln!(
                "{} {:<14} final max {:.3e}, order {}",
                if ok { "PASS" } else { "FAIL" },
                rep.id,
                rep.final_max(),
                order
            );
            for note in &rep.notes {
                eprintln!("     note: {note}");
            }
        }
    }

    let text = match r.format {
        Format::Csv => table_csv(&reports),
        Format::Json if gated => to_json(&VerifyOutput {
            surface: r.chart.name().to_string(),
            tol: r.tol,
            all_pass,
            reports: reports
                .into_iter()
                .zip(verdicts)
                .map(|(report, pass)| GatedReport { report, pass })
                .collect(),
        })
        .map_err(CliError::Gate)?,
        Format::Json => to_json(&ConvergeOutput {
            surface: r.chart.name().to_string(),
            reports,
        })
        .map_err(CliError::Gate)?,
    };
    Ok((text, all_pass))
}

fn scan_csv(g: &GapReport<f64>) -> String {
    let opt = |v: Option<f64>| v.map(sci).unwrap_or_default();
    let mut text = String::from("key,value\n");
    let mut row = |k: &str, v: String| text.push_str(&format!("{k},{v}\n"));
    row("surface", g.surface.clone());
    row("resolution", g.resolution.to_string());
    row("seed", g.seed.to_string());
    row("energy_min", sci(g.energy_min));
    row("energy_max", sci(g.energy_max));
    row("energy_integral", opt(g.energy_integral));
    row("area", opt(g.area));
    row(
        "pinching_window_satisfied",
        g.pinching_window.satisfied_nodes.to_string(),
    );
    row(
        "pinching_window_total",
        g.pinching_window.total_nodes.to_string(),
    );
    row(
        "pinching_window_min_margin",
        sci(g.pinching_window.min_margin),
    );
    row(
        "curvature_product_satisfied",
        g.curvature_product.satisfied_nodes.to_string(),
    );
    row(
        "curvature_product_total",
        g.curvature_product.total_nodes.to_string(),
    );
    row(
        "curvature_product_min_margin",
        sci(g.curvature_product.min_margin),
    );
    row("quartic_samples", g.quartic.samples.to_string());
    row("quartic_seed", g.quartic.seed.to_string());
    row("quartic_max_abs_residual", sci(g.quartic.max_abs_residual));
    row(
        "quartic_factor_eight_min_residual",
        sci(g.quartic.factor_eight_min_residual),
    );
    row("branch_samples", g.branch.samples.to_string());
    row("branch_seed", g.branch.seed.to_string());
    row("branch_max_residual", sci(g.branch.max_residual));
    row(
        "branch_no_solution_below_threshold",
        g.branch.no_solution_below_threshold.to_string(),
    );
    row("constrained_samples", g.constrained.samples.to_string());
    row("constrained_seed", g.constrained.seed.to_string());
    row(
        "constrained_max_norm_residual",
        sci(g.constrained.max_norm_residual),
    );
    row(
        "constrained_max_pairing_residual",
        sci(g.constrained.max_pairing_residual),
    );
    for flag in &g.flags {
        let quoted = csv_field(flag);
        text.push_str(&format!("flag,{quoted}\n"));
    }
    text
}

fn cmd_scan(r: &Resolved) -> Result<String, CliError> {
    let report = scan(&r.chart, r.finest(), r.seed).map_err(gate)?;
    match r.format {
        Format::Json => to_json(&report).map_err(CliError::Gate),
        Format::Csv => Ok(scan_csv(&report)),
    }
}
