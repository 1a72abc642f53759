//! Run configuration: JSON config files, command-line overrides, and the
//! validation gates that turn raw inputs into a fully resolved job.
//!
//! Precedence is flag-over-file: any value given on the command line wins
//! over the same field in `--config`; whatever remains unset falls back to
//! the documented default. Validation failures map to exit code 2.

use std::path::PathBuf;

use serde::Deserialize;
use solgeo_core::immersion::{Chart, SurfaceParams};
use solgeo_core::simons::{default_identities, IdentityId, DEFAULT_TOL};

use crate::{Format, JobArgs};

/// Smallest lattice resolution the driver accepts; below this the interior
/// of a non-periodic chart is too thin to carry a second-order stencil.
pub const MIN_RESOLUTION: usize = 8;
const DEFAULT_RESOLUTIONS: [usize; 3] = [32, 64, 128];
const DEFAULT_SEED: u64 = 7;

/// On-disk shape of `--config` files. Every field is optional; unknown
/// fields are rejected so that typos fail loudly instead of silently
/// falling back to defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub surface: Option<String>,
    pub params: Option<ParamsConfig>,
    pub resolutions: Option<Vec<usize>>,
    pub ids: Option<Vec<String>>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub format: Option<String>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub c: Option<f64>,
    pub eps: Option<f64>,
    pub major: Option<f64>,
    pub minor: Option<f64>,
    pub rho: Option<f64>,
    pub band: Option<f64>,
}

/// A fully validated job: chart constructed, resolutions checked, identity
/// list resolved against the chart's mean-curvature gating.
pub struct Resolved {
    pub chart: Chart<f64>,
    pub resolutions: Vec<usize>,
    pub ids: Vec<IdentityId>,
    pub tol: f64,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl Resolved {
    /// Finest resolution; single-lattice commands (curvature, scan) use it.
    pub fn finest(&self) -> usize {
        *self.resolutions.last().expect("validated non-empty")
    }
}

fn load_config(args: &JobArgs) -> Result<RunConfig, String> {
    match &args.config {
        None => Ok(RunConfig::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            serde_json::from_str(&text)
                .map_err(|e| format!("invalid config {}: {e}", path.display()))
        }
    }
}

fn parse_res_list(text: &str) -> Result<Vec<usize>, String> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| format!("invalid resolution {tok:?}"))
        })
        .collect()
}

fn parse_id_list(tokens: &[String]) -> Result<Vec<IdentityId>, String> {
    tokens
        .iter()
        .map(|tok| tok.trim().parse::<IdentityId>().map_err(|e| e.to_string()))
        .collect()
}

fn validate_resolutions(res: &[usize]) -> Result<(), String> {
    if res.is_empty() {
        return Err("at least one resolution is required".to_string());
    }
    for &n in res {
        if n < MIN_RESOLUTION {
            return Err(format!("resolution {n} is below the minimum {MIN_RESOLUTION}"));
        }
    }
    if res.windows(2).any(|w| w[0] >= w[1]) {
        return Err(format!("resolutions must be strictly increasing, got {res:?}"));
    }
    Ok(())
}

/// Merge flags over the config file, validate everything, and build the
/// chart. `ids` handling: an explicit request for an identity that needs
/// constant mean curvature on a chart without it is a gating error here;
/// when no ids are given the default list already skips it.
pub fn resolve(args: &JobArgs) -> Result<Resolved, String> {
    let file = load_config(args)?;

    let surface = args
        .surface
        .clone()
        .or(file.surface)
        .ok_or_else(|| "no surface given; pass --surface or set it in the config".to_string())?;

    let fp = file.params.unwrap_or_default();
    let defaults = SurfaceParams::<f64>::default();
    let params = SurfaceParams {
        c: args.c.or(fp.c).unwrap_or(defaults.c),
        eps: args.eps.or(fp.eps).unwrap_or(defaults.eps),
        major: args.major.or(fp.major).unwrap_or(defaults.major),
        minor: args.minor.or(fp.minor).unwrap_or(defaults.minor),
        rho: args.rho.or(fp.rho).unwrap_or(defaults.rho),
        band: args.band.or(fp.band).unwrap_or(defaults.band),
    };
    let chart = Chart::by_name(&surface, params).map_err(|e| e.to_string())?;

    let resolutions = match &args.res {
        Some(text) => parse_res_list(text)?,
        None => file
            .resolutions
            .unwrap_or_else(|| DEFAULT_RESOLUTIONS.to_vec()),
    };
    validate_resolutions(&resolutions)?;

    let requested = match &args.ids {
        Some(text) => Some(parse_id_list(
            &text.split(',').map(str::to_string).collect::<Vec<_>>(),
        )?),
        None => file.ids.as_deref().map(parse_id_list).transpose()?,
    };
    let ids = match requested {
        Some(list) => {
            if list.is_empty() {
                return Err("the identity list must not be empty".to_string());
            }
            if let Some(gated) = list
                .iter()
                .find(|id| id.requires_cmc() && !chart.constant_mean_curvature())
            {
                return Err(format!(
                    "identity {gated} requires constant mean curvature, \
                     which {} does not have",
                    chart.name()
                ));
            }
            list
        }
        None => default_identities(&chart),
    };

    let format = match &args.format {
        Some(f) => *f,
        None => match file.format.as_deref() {
            None => Format::Csv,
            Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            Some(other) => return Err(format!("unknown format {other:?}; use csv or json")),
        },
    };

    Ok(Resolved {
        chart,
        resolutions,
        ids,
        tol: args.tol.or(file.tol).unwrap_or(DEFAULT_TOL),
        seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        format,
        out: args.out.clone().or(file.out),
    })
}
