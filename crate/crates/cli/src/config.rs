//! Verification config: TOML file schema, command-line overrides, and the
//! resolved form echoed into reports.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

pub const ALL_CHECKS: [&str; 8] = [
    "extrinsic",
    "pmc",
    "biharmonic",
    "simons",
    "codazzi",
    "deltaT",
    "flatness",
    "classification",
];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub source: SourceSection,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub fd: FdSection,
    #[serde(default)]
    pub checks: ChecksSection,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    #[serde(default)]
    pub catalog: Option<String>,
    #[serde(default)]
    pub dsl: Option<PathBuf>,
    /// Ambient curvature, required for DSL sources.
    #[serde(default)]
    pub c: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default)]
    pub counts: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdSection {
    #[serde(default)]
    pub step: Option<toml::Value>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksSection {
    #[serde(default)]
    pub run: Option<Vec<String>>,
}

/// Step request before resolution against the chart domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSpec {
    Auto,
    Fixed(f64),
}

/// Fully validated configuration; the runner resolves the source and the
/// auto step against the chart.
#[derive(Debug, Clone)]
pub struct VerificationConfig {
    pub source: Source,
    pub params: BTreeMap<String, f64>,
    pub grid_counts: Option<Vec<usize>>,
    pub step: StepSpec,
    pub checks: Vec<String>,
    pub tolerances: BTreeMap<String, f64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub points: bool,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone)]
pub enum Source {
    Catalog(String),
    Dsl { path: PathBuf, c: f64 },
}

impl Source {
    pub fn describe(&self) -> String {
        match self {
            Source::Catalog(id) => format!("catalog:{id}"),
            Source::Dsl { path, c } => format!("dsl:{}:c={c}", path.display()),
        }
    }
}

/// Command-line overrides layered on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub grid: Option<Vec<usize>>,
    pub step: Option<StepSpec>,
    pub checks: Option<Vec<String>>,
    pub points: bool,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

pub fn parse_grid_arg(text: &str) -> Result<Vec<usize>> {
    let counts: Vec<usize> = text
        .split('x')
        .map(|part| part.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("bad grid spec '{text}', expected e.g. 32x32"))?;
    if counts.is_empty() {
        bail!("empty grid spec");
    }
    Ok(counts)
}

pub fn parse_step_arg(text: &str) -> Result<StepSpec> {
    if text == "auto" {
        return Ok(StepSpec::Auto);
    }
    let v: f64 = text
        .parse()
        .with_context(|| format!("bad step '{text}', expected a number or 'auto'"))?;
    if !(v > 0.0) {
        bail!("step must be positive, got {v}");
    }
    Ok(StepSpec::Fixed(v))
}

pub fn parse_checks_arg(text: &str) -> Result<Vec<String>> {
    let list: Vec<String> = text
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    validate_checks(&list)?;
    Ok(list)
}

fn validate_checks(list: &[String]) -> Result<()> {
    if list.is_empty() {
        bail!("checks list is empty");
    }
    for name in list {
        if !ALL_CHECKS.contains(&name.as_str()) {
            bail!(
                "unknown check '{name}'; known checks: {}",
                ALL_CHECKS.join(", ")
            );
        }
    }
    Ok(())
}

/// Load a config file, apply overrides and the `PMCV_SEED` environment
/// variable, and validate the result.
pub fn load(path: &Path, overrides: &Overrides) -> Result<VerificationConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let file: ConfigFile =
        toml::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))?;

    let source = match (&file.source.catalog, &file.source.dsl) {
        (Some(id), None) => Source::Catalog(id.clone()),
        (None, Some(dsl)) => {
            let c = file
                .source
                .c
                .ok_or_else(|| anyhow!("[source] c = <curvature> is required for DSL sources"))?;
            // DSL paths resolve relative to the config file
            let resolved = if dsl.is_absolute() {
                dsl.clone()
            } else {
                path.parent().unwrap_or(Path::new(".")).join(dsl)
            };
            Source::Dsl { path: resolved, c }
        }
        (Some(_), Some(_)) => bail!("[source] must set exactly one of 'catalog' or 'dsl'"),
        (None, None) => bail!("[source] must set 'catalog' or 'dsl'"),
    };

    let step = match overrides.step {
        Some(s) => s,
        None => match &file.fd.step {
            None => StepSpec::Auto,
            Some(toml::Value::String(s)) if s == "auto" => StepSpec::Auto,
            Some(toml::Value::Float(v)) if *v > 0.0 => StepSpec::Fixed(*v),
            Some(toml::Value::Integer(v)) if *v > 0 => StepSpec::Fixed(*v as f64),
            Some(other) => bail!("[fd] step must be a positive number or \"auto\", got {other}"),
        },
    };

    let checks = match &overrides.checks {
        Some(list) => list.clone(),
        None => file
            .checks
            .run
            .clone()
            .unwrap_or_else(|| ALL_CHECKS.iter().map(|s| s.to_string()).collect()),
    };
    validate_checks(&checks)?;

    let grid_counts = overrides.grid.clone().or(file.grid.counts.clone());
    if let Some(counts) = &grid_counts {
        for &k in counts {
            if k < 3 {
                bail!("grid counts must be at least 3 per axis, got {k}");
            }
        }
    }

    let seed = match std::env::var("PMCV_SEED") {
        Ok(text) => text
            .parse()
            .with_context(|| format!("bad PMCV_SEED value '{text}'"))?,
        Err(_) => file.seed,
    };

    Ok(VerificationConfig {
        source,
        params: file.params,
        grid_counts,
        step,
        checks,
        tolerances: file.tolerances,
        seed,
        out: overrides.out.clone().or(file.out),
        points: overrides.points,
        workers: overrides.workers,
    })
}
