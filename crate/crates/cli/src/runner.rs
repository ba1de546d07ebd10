//! Check execution: resolve the source, build sample sets, run the
//! requested checks in dependency order over a worker pool, and assemble
//! the report. Workers are pure; per-point results are collected in index
//! order so reports are identical for any worker count.

use std::collections::BTreeMap;

use anyhow::{anyhow, Context, Result};
use rayon::prelude::*;

use pmcv_core::biharmonic::{self, ClassifyTolerances, Verdict};
use pmcv_core::bounds;
use pmcv_core::catalog;
use pmcv_core::exprdsl;
use pmcv_core::extrinsic::{self, NormalField};
use pmcv_core::fd;
use pmcv_core::identities;
use pmcv_core::immersion::ImmersionSpec;
use pmcv_core::sample;
use pmcv_core::Error as CoreError;

use crate::config::{Source, StepSpec, VerificationConfig, ALL_CHECKS};
use crate::report::{CheckStatus, CheckSummary, ConfigEcho, PointRecord, Report};

/// Margin between sample points and the chart boundary, in units of the FD
/// step: bitension stencils reach 2h, so 2.5h keeps every stencil inside.
const MARGIN_STEPS: f64 = 2.5;
/// Number of low-discrepancy points used by the identity checks.
const IDENTITY_SAMPLES: usize = 64;
/// Number of points where the FD bitension route cross-checks the algebraic
/// route.
const ROUTE_SAMPLES: usize = 8;

pub struct ResolvedRun {
    pub spec: ImmersionSpec,
    pub source_desc: String,
    pub grid_counts: Vec<usize>,
    pub grid: Vec<Vec<f64>>,
    pub identity_points: Vec<Vec<f64>>,
    pub h: f64,
    pub checks: Vec<String>,
    pub tolerances: BTreeMap<String, f64>,
    pub seed: u64,
    pub points_flag: bool,
    pub workers: Option<usize>,
}

fn default_tolerance(check: &str) -> f64 {
    match check {
        "extrinsic" => 1e-10,
        "pmc" => 1e-6,
        "biharmonic" => 1e-8,
        "simons" => 5e-4,
        "codazzi" => 1e-4,
        "deltaT" => 1e-4,
        "flatness" => 1e-10,
        "classification" => 1e-8,
        _ => 1e-8,
    }
}

/// Resolve the configured source into an immersion (exit-code-3 class
/// failures happen here).
pub fn resolve_source(config: &VerificationConfig) -> Result<(ImmersionSpec, String)> {
    match &config.source {
        Source::Catalog(id) => {
            let mut entry = catalog::parse_id(id).map_err(|e| anyhow!("catalog id '{id}': {e}"))?;
            for (name, value) in &config.params {
                entry.immersion = entry
                    .immersion
                    .with_param(name, *value)
                    .map_err(|e| anyhow!("parameter override '{name}': {e}"))?;
            }
            Ok((entry.immersion, format!("catalog:{id}")))
        }
        Source::Dsl { path, c } => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read DSL file {}", path.display()))?;
            let file = exprdsl::parse_dsl_file(&text)
                .map_err(|e| anyhow!("DSL file {}: {e}", path.display()))?;
            let n_outputs = file.exprs.n_outputs();
            if n_outputs < 3 {
                return Err(anyhow!("DSL file needs at least 3 outputs"));
            }
            let ambient = pmcv_core::ambient::AmbientSpace::new(n_outputs - 2, *c)
                .map_err(|e| anyhow!("ambient: {e}"))?;
            let params: exprdsl::Params = config.params.clone();
            let spec = ImmersionSpec::new(ambient, file.exprs, params, file.domain)
                .map_err(|e| anyhow!("immersion: {e}"))?;
            Ok((spec, config.source.describe()))
        }
    }
}

pub fn resolve(config: &VerificationConfig) -> Result<ResolvedRun> {
    let (spec, source_desc) = resolve_source(config)?;
    let m = spec.chart_dim();
    let h = match config.step {
        StepSpec::Fixed(v) => v,
        StepSpec::Auto => 1e-3 * spec.min_extent(),
    };
    let grid_counts = config
        .grid_counts
        .clone()
        .unwrap_or_else(|| vec![8; m]);
    if grid_counts.len() != m {
        return Err(anyhow!(
            "grid has {} axes, chart has {m}",
            grid_counts.len()
        ));
    }
    let margin = MARGIN_STEPS * h;
    let grid = sample::grid_points(&grid_counts, spec.domain(), margin)
        .map_err(|e| anyhow!("grid: {e}"))?;
    // the seed shifts the low-discrepancy window used by identity checks
    let skip = (config.seed % 1024) as usize;
    let identity_points = {
        let mut all = sample::halton_points(IDENTITY_SAMPLES + skip, spec.domain(), margin)
            .map_err(|e| anyhow!("samples: {e}"))?;
        all.split_off(skip)
    };
    let mut tolerances = BTreeMap::new();
    for name in ALL_CHECKS {
        let tol = config
            .tolerances
            .get(name)
            .copied()
            .unwrap_or_else(|| default_tolerance(name));
        tolerances.insert(name.to_string(), tol);
    }
    Ok(ResolvedRun {
        spec,
        source_desc,
        grid_counts,
        grid,
        identity_points,
        h,
        checks: config.checks.clone(),
        tolerances,
        seed: config.seed,
        points_flag: config.points,
        workers: config.workers,
    })
}

fn par_map<T, F>(run: &ResolvedRun, points: &[Vec<f64>], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[f64]) -> T + Sync,
{
    match run.workers {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .expect("worker pool");
            pool.install(|| points.par_iter().map(|u| f(u)).collect())
        }
        None => points.par_iter().map(|u| f(u)).collect(),
    }
}

struct Worst {
    value: f64,
    location: Option<Vec<f64>>,
    order: Option<f64>,
}

impl Worst {
    fn new() -> Self {
        Worst {
            value: f64::NEG_INFINITY,
            location: None,
            order: None,
        }
    }

    fn update(&mut self, value: f64, u: &[f64], order: Option<f64>) {
        if value > self.value {
            self.value = value;
            self.location = Some(u.to_vec());
            self.order = order;
        }
    }
}

fn summary_from_worst(
    name: &str,
    worst: Worst,
    tol: f64,
    errors: Vec<String>,
    details: BTreeMap<String, f64>,
) -> CheckSummary {
    let mut status = if worst.value <= tol {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    let mut message = None;
    if !errors.is_empty() {
        status = CheckStatus::Fail;
        message = Some(errors[0].clone());
    }
    CheckSummary {
        name: name.into(),
        status,
        worst_residual: if worst.value.is_finite() {
            Some(worst.value)
        } else {
            None
        },
        location: worst.location,
        order: worst.order,
        blocked_by: None,
        message,
        details,
    }
}

fn check_extrinsic(run: &ResolvedRun) -> CheckSummary {
    let tol = run.tolerances["extrinsic"];
    let c = run.spec.ambient().c();
    let results = par_map(run, &run.grid, |u| {
        extrinsic::extrinsic_data(&run.spec, u).map(|data| {
            let m = data.chart_dim() as f64;
            let health = data
                .frame_residual(c)
                .max((data.a_h().trace() - m * data.h_norm_sq()).abs())
                .max((data.t_norm_sq() + data.n_norm_sq() - 1.0).abs());
            (health, data.shape_asymmetry)
        })
    });
    let mut worst = Worst::new();
    let mut max_asym: f64 = 0.0;
    let mut errors = Vec::new();
    for (u, res) in run.grid.iter().zip(results) {
        match res {
            Ok((health, asym)) => {
                worst.update(health, u, None);
                max_asym = max_asym.max(asym);
            }
            Err(e) => errors.push(format!("{e} at {u:?}")),
        }
    }
    // symmetrization health gate from the shape-operator contract
    if max_asym > 1e-6 {
        errors.push(format!("shape-operator asymmetry {max_asym:.3e} exceeds 1e-6"));
    }
    let mut details = BTreeMap::new();
    details.insert("max_shape_asymmetry".into(), max_asym);
    summary_from_worst("extrinsic", worst, tol, errors, details)
}

fn check_pmc(run: &ResolvedRun) -> CheckSummary {
    let tol = run.tolerances["pmc"];
    let results = par_map(run, &run.grid, |u| {
        extrinsic::normal_connection_h(&run.spec, u, run.h, true)
            .map(|p| p.nabla_perp_h_norm().unwrap_or(f64::INFINITY))
    });
    let mut worst = Worst::new();
    let mut errors = Vec::new();
    for (u, res) in run.grid.iter().zip(results) {
        match res {
            Ok(v) => worst.update(v, u, None),
            Err(e) => errors.push(format!("{e} at {u:?}")),
        }
    }
    summary_from_worst("pmc", worst, tol, errors, BTreeMap::new())
}

fn check_biharmonic(run: &ResolvedRun) -> CheckSummary {
    let tol = ClassifyTolerances {
        algebraic: run.tolerances["biharmonic"],
        ..ClassifyTolerances::default()
    };
    // classification at every grid point (pmc route with FD fallback)
    let classes = par_map(run, &run.grid, |u| {
        let residuals = match biharmonic::pmc_bih_conditions(&run.spec, u, run.h) {
            Ok(res) => res,
            Err(CoreError::Precondition { .. }) => {
                match biharmonic::tension_and_bitension(&run.spec, u, run.h) {
                    Ok(res) => res,
                    Err(e) => return Err(format!("{e} at {u:?}")),
                }
            }
            Err(e) => return Err(format!("{e} at {u:?}")),
        };
        let class = biharmonic::classify_point(&residuals, &tol).map_err(|e| e.to_string())?;
        let governing = match (&residuals.pmc, &residuals.fd) {
            (Some(pmc), _) => pmc.worst(),
            (None, Some(fd_route)) => fd_route.norm_h2,
            (None, None) => f64::INFINITY,
        };
        Ok((class, governing))
    });
    let mut worst = Worst::new();
    let mut errors = Vec::new();
    let mut counts: BTreeMap<&'static str, f64> = BTreeMap::new();
    let mut any_neither = false;
    let mut any_inconclusive = false;
    for (u, res) in run.grid.iter().zip(classes) {
        match res {
            Ok((class, governing)) => {
                *counts.entry(class.verdict.as_str()).or_insert(0.0) += 1.0;
                worst.update(governing, u, None);
                any_neither |= class.verdict == Verdict::Neither;
                any_inconclusive |= class.verdict == Verdict::Inconclusive;
            }
            Err(e) => errors.push(e),
        }
    }
    // FD route cross-check on a subsample wherever the pmc route applies
    let route_points: Vec<Vec<f64>> = run.identity_points.iter().take(ROUTE_SAMPLES).cloned().collect();
    let fd_checks = par_map(run, &route_points, |u| {
        let alg = match biharmonic::pmc_bih_conditions(&run.spec, u, run.h) {
            Ok(res) => res,
            Err(_) => return Ok(None),
        };
        let alg_class = biharmonic::classify_point(&alg, &tol).map_err(|e| e.to_string())?;
        let fd_res = biharmonic::tension_and_bitension(&run.spec, u, run.h)
            .map_err(|e| e.to_string())?;
        let fd_class = biharmonic::classify_point(&fd_res, &tol).map_err(|e| e.to_string())?;
        let fdr = fd_res.fd.expect("fd route populated");
        Ok(Some((
            alg_class.verdict,
            fd_class.verdict,
            fdr.norm_h,
            fd::observed_order(fdr.norm_h, fdr.norm_h2),
        )))
    });
    let mut tau2_worst: f64 = 0.0;
    let mut tau2_order: Option<f64> = None;
    for (u, res) in route_points.iter().zip(fd_checks) {
        match res {
            Ok(Some((alg_v, fd_v, norm_h, order))) => {
                if alg_v.is_biharmonic() != fd_v.is_biharmonic() {
                    errors.push(format!(
                        "route disagreement at {u:?}: algebraic {} vs fd {}",
                        alg_v.as_str(),
                        fd_v.as_str()
                    ));
                }
                if norm_h > tau2_worst {
                    tau2_worst = norm_h;
                    tau2_order = order;
                }
            }
            Ok(None) => {}
            Err(e) => errors.push(e),
        }
    }
    let mut details: BTreeMap<String, f64> = counts
        .into_iter()
        .map(|(k, v)| (format!("verdict_{k}"), v))
        .collect();
    details.insert("bitension_worst".into(), tau2_worst);
    if let Some(order) = tau2_order {
        details.insert("bitension_order".into(), order);
    }
    let mut summary = summary_from_worst(
        "biharmonic",
        worst,
        run.tolerances["biharmonic"],
        errors,
        details,
    );
    if any_neither {
        summary.status = CheckStatus::Fail;
    } else if any_inconclusive && summary.status == CheckStatus::Pass {
        summary.status = CheckStatus::Inconclusive;
    }
    summary
}

fn identity_summary<F>(run: &ResolvedRun, name: &str, eval: F) -> CheckSummary
where
    F: Fn(&[f64]) -> Result<Vec<identities::IdentityResidual>, CoreError> + Sync,
{
    let tol = run.tolerances[name];
    let results = par_map(run, &run.identity_points, |u| eval(u).map_err(|e| format!("{e} at {u:?}")));
    let mut worst = Worst::new();
    let mut errors = Vec::new();
    let mut min_order: Option<f64> = None;
    for (u, res) in run.identity_points.iter().zip(results) {
        match res {
            Ok(list) => {
                for r in list {
                    worst.update(r.residual, u, r.order);
                    if let Some(order) = r.order {
                        min_order = Some(min_order.map_or(order, |m: f64| m.min(order)));
                    }
                }
            }
            Err(e) => errors.push(e),
        }
    }
    if let Some(order) = min_order {
        if order < 1.5 {
            errors.push(format!("refinement order {order:.2} below 1.5"));
        }
    }
    let mut details = BTreeMap::new();
    if let Some(order) = min_order {
        details.insert("min_order".into(), order);
    }
    summary_from_worst(name, worst, tol, errors, details)
}

fn check_simons(run: &ResolvedRun) -> CheckSummary {
    identity_summary(run, "simons", |u| {
        identities::simons_residual(&run.spec, u, NormalField::MeanCurvature, run.h).map(|r| vec![r])
    })
}

fn check_codazzi(run: &ResolvedRun) -> CheckSummary {
    let m = run.spec.chart_dim();
    identity_summary(run, "codazzi", |u| {
        let mut out = Vec::new();
        for i in 0..m {
            for j in (i + 1)..m {
                out.push(identities::codazzi_residual(
                    &run.spec,
                    u,
                    i,
                    j,
                    NormalField::MeanCurvature,
                    run.h,
                )?);
            }
        }
        Ok(out)
    })
}

fn check_delta_t(run: &ResolvedRun) -> CheckSummary {
    if run.spec.chart_dim() != 2 {
        return CheckSummary::skipped("deltaT", "surface identity; chart dimension is not 2");
    }
    identity_summary(run, "deltaT", |u| {
        identities::delta_t_residual(&run.spec, u, run.h).map(|r| vec![r])
    })
}

fn check_flatness(run: &ResolvedRun) -> CheckSummary {
    if run.spec.chart_dim() != 2 {
        return CheckSummary::skipped("flatness", "surface identity; chart dimension is not 2");
    }
    let tol = run.tolerances["flatness"];
    let results = par_map(run, &run.identity_points, |u| {
        match identities::flatness_relation(&run.spec, u, run.h) {
            Ok(r) => Ok(Some(r)),
            Err(CoreError::Precondition { what }) => Err(format!("precondition: {what}")),
            Err(e) => Err(format!("{e} at {u:?}")),
        }
    });
    let mut worst = Worst::new();
    let mut precondition: Option<String> = None;
    let mut errors = Vec::new();
    for (u, res) in run.identity_points.iter().zip(results) {
        match res {
            Ok(Some(r)) => worst.update(r.residual, u, None),
            Ok(None) => {}
            Err(msg) => {
                if msg.starts_with("precondition") {
                    precondition.get_or_insert(msg);
                } else {
                    errors.push(msg);
                }
            }
        }
    }
    if worst.location.is_none() {
        // no point satisfied the hypotheses; report why instead of a number
        return CheckSummary::skipped(
            "flatness",
            precondition
                .as_deref()
                .unwrap_or("no applicable sample point"),
        );
    }
    summary_from_worst("flatness", worst, tol, errors, BTreeMap::new())
}

fn check_classification(run: &ResolvedRun) -> CheckSummary {
    let tol = run.tolerances["classification"];
    match bounds::classification_report(&run.spec, &run.grid, run.h, tol) {
        Ok(report) => {
            let mut details = BTreeMap::new();
            details.insert("H_sq_min".into(), report.h_norm_sq.min);
            details.insert("H_sq_median".into(), report.h_norm_sq.median);
            details.insert("H_sq_max".into(), report.h_norm_sq.max);
            details.insert("sigma_sq_min".into(), report.sigma_norm_sq.min);
            details.insert("sigma_sq_max".into(), report.sigma_norm_sq.max);
            details.insert("T_sq_max".into(), report.t_norm_sq.max);
            let mut worst_margin = f64::INFINITY;
            for p in &report.predicates {
                details.insert(format!("margin_{}", p.name), p.margin);
                if p.required && p.verdict != bounds::PredicateVerdict::NotApplicable {
                    worst_margin = worst_margin.min(p.margin);
                }
            }
            let ok = report.all_required_hold();
            CheckSummary {
                name: "classification".into(),
                status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
                worst_residual: Some(if worst_margin.is_finite() {
                    -worst_margin
                } else {
                    0.0
                }),
                location: None,
                order: None,
                blocked_by: None,
                message: None,
                details,
            }
        }
        Err(e) => CheckSummary {
            name: "classification".into(),
            status: CheckStatus::Fail,
            worst_residual: None,
            location: None,
            order: None,
            blocked_by: None,
            message: Some(e.to_string()),
            details: BTreeMap::new(),
        },
    }
}

fn prerequisites(check: &str) -> &'static [&'static str] {
    match check {
        "pmc" => &["extrinsic"],
        "biharmonic" => &["extrinsic"],
        "simons" | "codazzi" | "deltaT" => &["extrinsic", "pmc"],
        "flatness" | "classification" => &["extrinsic", "pmc", "biharmonic"],
        _ => &[],
    }
}

/// Run the requested checks and assemble the report.
pub fn run_verification(config: &VerificationConfig) -> Result<Report> {
    let run = resolve(config)?;
    let mut failed: BTreeMap<String, ()> = BTreeMap::new();
    let mut checks = Vec::new();
    for name in ALL_CHECKS {
        if !run.checks.iter().any(|c| c == name) {
            continue;
        }
        let blocked_by = prerequisites(name)
            .iter()
            .find(|p| failed.contains_key(**p));
        if let Some(by) = blocked_by {
            checks.push(CheckSummary::blocked(name, by));
            continue;
        }
        let summary = match name {
            "extrinsic" => check_extrinsic(&run),
            "pmc" => check_pmc(&run),
            "biharmonic" => check_biharmonic(&run),
            "simons" => check_simons(&run),
            "codazzi" => check_codazzi(&run),
            "deltaT" => check_delta_t(&run),
            "flatness" => check_flatness(&run),
            "classification" => check_classification(&run),
            _ => unreachable!(),
        };
        if matches!(summary.status, CheckStatus::Fail | CheckStatus::Inconclusive) {
            failed.insert(name.to_string(), ());
        }
        checks.push(summary);
    }

    let points = if run.points_flag {
        Some(point_records(&run))
    } else {
        None
    };

    Ok(Report {
        config: ConfigEcho {
            source: run.source_desc.clone(),
            params: config.params.clone(),
            grid: run.grid_counts.clone(),
            fd_step: run.h,
            checks: run.checks.clone(),
            tolerances: run.tolerances.clone(),
            seed: run.seed,
        },
        version: pmcv_core::version().to_string(),
        checks,
        points,
    })
}

fn point_records(run: &ResolvedRun) -> Vec<PointRecord> {
    let tol = ClassifyTolerances {
        algebraic: run.tolerances["biharmonic"],
        ..ClassifyTolerances::default()
    };
    let records = par_map(run, &run.grid, |u| {
        let mut values = BTreeMap::new();
        let mut verdict = None;
        if let Ok(data) = extrinsic::extrinsic_data(&run.spec, u) {
            values.insert("H_norm".into(), data.h_norm());
            values.insert("T_norm_sq".into(), data.t_norm_sq());
            values.insert("sigma_norm_sq".into(), data.sigma_norm_sq());
            let c = run.spec.ambient().c();
            if let Some(k) = extrinsic::intrinsic_curvature(&data, c).gaussian {
                values.insert("K".into(), k);
            }
            if let Ok(class) = biharmonic::classify_at(&run.spec, u, run.h, &tol) {
                verdict = Some(class.verdict.as_str().to_string());
            }
        }
        (values, verdict)
    });
    records
        .into_iter()
        .zip(run.grid.iter())
        .enumerate()
        .map(|(index, ((values, verdict), u))| PointRecord {
            index,
            u: u.clone(),
            values,
            verdict,
        })
        .collect()
}
