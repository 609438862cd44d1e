//! Operation dispatch: turn a parsed run configuration into a JSON report
//! with outputs and certificates, and re-verify existing reports.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use regdecomp::applications::{
    graphon_strong_regularity, graphon_weak_regularity, hypercube_uniform,
    strong_regularity_growth, uniform_partition, Graphon, UniformityReport,
};
use regdecomp::bounds::{reg_bound_f64, reg_prime_bound_f64, BoundReport};
use regdecomp::decompose::{decompose, decompose_multi, Certificates, Decomposition};
use regdecomp::growth::GrowthFunction;
use regdecomp::semiring::Semiring;
use regdecomp::space::{GroundSpace, Partition, RandomVar, Subset};
use regdecomp::uniformity::{cut_norm_exact, uniformity_norm, Mode, CUT_NORM_BASE_CAP};
use regdecomp::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, malformed input, or parameters out of range (exit 2).
    Config(String),
    /// Exact computation refused by a feasibility cap (exit 3).
    Infeasible(String),
    /// A certificate failed to re-verify (exit 4).
    Certificate(String),
    /// Filesystem trouble (exit 5).
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Certificate(_) => 4,
            CliError::Io(_) => 5,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m)
            | CliError::Infeasible(m)
            | CliError::Certificate(m)
            | CliError::Io(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::ExactInfeasible { .. } | Error::EnumerationTruncated { .. } => {
                CliError::Infeasible(e.to_string())
            }
            Error::IterationCapExceeded { .. } | Error::Internal(_) => {
                CliError::Certificate(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

/// Echoed into every report; `verify` reruns the operation from this alone
/// plus the input file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub operation: String,
    pub input: Option<String>,
    pub format: String,
    pub semiring: String,
    pub p: f64,
    pub sigma: Option<f64>,
    pub eta: Option<f64>,
    pub eps: Option<f64>,
    pub growth: String,
    pub mode: String,
    pub tol: f64,
    pub seed: u64,
    pub caps: Option<String>,
    pub k: Option<u64>,
    pub ell: Option<u64>,
}

#[derive(Debug, Default, Clone, Copy)]
pub struct Caps {
    pub allow_large: bool,
    pub cut_base: Option<usize>,
}

pub fn parse_caps(spec: &Option<String>) -> Result<Caps, CliError> {
    let mut caps = Caps::default();
    let Some(s) = spec else { return Ok(caps) };
    for item in s.split(',').filter(|s| !s.is_empty()) {
        let (key, val) = item
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("cap '{item}' is not key=value")))?;
        match key {
            "allow-large" => caps.allow_large = val == "1" || val == "true",
            "cut-base" => {
                caps.cut_base = Some(
                    val.parse()
                        .map_err(|e| CliError::Config(format!("cap cut-base: {e}")))?,
                )
            }
            other => return Err(CliError::Config(format!("unknown cap '{other}'"))),
        }
    }
    Ok(caps)
}

pub fn parse_growth(spec: &str) -> Result<GrowthFunction, CliError> {
    if spec == "succ" {
        return Ok(GrowthFunction::successor());
    }
    if let Some(rest) = spec.strip_prefix("affine:") {
        let (a, b) = rest
            .split_once(',')
            .ok_or_else(|| CliError::Config(format!("growth '{spec}': expected affine:a,b")))?;
        let a: f64 = a
            .trim()
            .parse()
            .map_err(|e| CliError::Config(format!("growth '{spec}': {e}")))?;
        let b: f64 = b
            .trim()
            .parse()
            .map_err(|e| CliError::Config(format!("growth '{spec}': {e}")))?;
        return GrowthFunction::affine_f64(a, b).map_err(CliError::from);
    }
    if let Some(rest) = spec.strip_prefix("prop42:") {
        let eta: f64 = rest
            .trim()
            .parse()
            .map_err(|e| CliError::Config(format!("growth '{spec}': {e}")))?;
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(CliError::Config(format!(
                "growth '{spec}': eta must lie in (0, 1]"
            )));
        }
        return GrowthFunction::affine_f64(8.0 / (eta * eta), 1.0).map_err(CliError::from);
    }
    if spec == "cor45:h=recip" {
        return strong_regularity_growth(&|i| 1.0 / (i + 1) as f64, 64).map_err(CliError::from);
    }
    Err(CliError::Config(format!("unknown growth spec '{spec}'")))
}

fn parse_mode(mode: &str, seed: u64) -> Result<Mode, CliError> {
    match mode {
        "exact" => Ok(Mode::Exact),
        "best-effort" => Ok(Mode::Heuristic { seed }),
        other => Err(CliError::Config(format!("unknown mode '{other}'"))),
    }
}

/// Build the named semiring over a matrix instance. Rectangle kinds view the
/// matrix as a kernel on base x base; interval and algebra kinds act on the
/// flattened entry list.
fn build_semiring(spec: &str, base: &GroundSpace, total: usize) -> Result<Semiring, CliError> {
    match spec {
        "rectangles" => {
            if base.len() * base.len() != total {
                return Err(CliError::Config("rectangle semirings need a square matrix".into()));
            }
            Ok(Semiring::rectangles(base))
        }
        "symmetric-rectangles" => {
            if base.len() * base.len() != total {
                return Err(CliError::Config("rectangle semirings need a square matrix".into()));
            }
            Semiring::symmetric_rectangles(base).map_err(CliError::from)
        }
        "intervals" => Ok(Semiring::intervals_natural(GroundSpace::uniform(total))),
        other => {
            if let Some(rest) = other.strip_prefix("algebra:") {
                let mut cells = Vec::new();
                for cell in rest.split('|') {
                    let idx: Result<Vec<usize>, _> =
                        cell.split(',').map(|i| i.trim().parse()).collect();
                    let idx = idx
                        .map_err(|e| CliError::Config(format!("semiring '{other}': {e}")))?;
                    cells.push(Subset::from_indices(total, &idx));
                }
                let part = Partition::new(total, cells).map_err(CliError::from)?;
                Semiring::from_algebra(GroundSpace::uniform(total), part).map_err(CliError::from)
            } else {
                Err(CliError::Config(format!("unknown semiring '{other}'")))
            }
        }
    }
}

fn require(v: Option<f64>, flag: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::Config(format!("--{flag} is required for this operation")))
}

fn input_path(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    cfg.input
        .as_ref()
        .map(PathBuf::from)
        .ok_or_else(|| CliError::Config("--input is required for this operation".into()))
}

// -- JSON shaping ------------------------------------------------------------

fn subset_json(s: &Subset) -> Value {
    json!(s.indices())
}

fn partition_json(p: &Partition) -> Value {
    let mut cells: Vec<Vec<usize>> = p.cells().iter().map(|c| c.indices()).collect();
    cells.sort();
    json!(cells)
}

fn values_json(f: &RandomVar) -> Value {
    json!(f.values())
}

fn certificates_json(c: &Certificates) -> Value {
    json!({
        "err_lp": c.err_lp,
        "unf_norms": c.unf_norms.iter().map(|u| json!({
            "index": u.index,
            "bound": u.bound,
            "measured": u.measured,
        })).collect::<Vec<_>>(),
        "outer_iterations": c.outer_iterations,
        "refinement_steps": c.refinement_steps,
        "scale": c.scale,
        "p_used": c.p_used,
        "exact": c.exact,
        "stage_index": c.stage_index,
    })
}

fn decomposition_json(d: &Decomposition) -> Value {
    json!({
        "p_partition": partition_json(&d.p_partition),
        "q_partition": partition_json(&d.q_partition),
        "f_str": values_json(&d.f_str),
        "f_err": values_json(&d.f_err),
        "f_unf": values_json(&d.f_unf),
        "p": d.p,
        "sigma": d.sigma,
    })
}

fn uniformity_report_json(r: &UniformityReport) -> Value {
    json!({
        "partition": partition_json(&r.partition),
        "eta": r.eta,
        "total_uniform_mass": r.total_uniform_mass,
        "cells": r.cells.iter().map(|c| json!({
            "cell": subset_json(&c.cell),
            "prob": c.prob,
            "uniform": c.uniform,
            "witness": c.witness.as_ref().map(|w| json!({
                "set": subset_json(&w.set),
                "value": w.value,
            })),
        })).collect::<Vec<_>>(),
    })
}

fn bound_report_json(r: &BoundReport) -> Value {
    json!({
        "l": r.l.to_string(),
        "r": r.r.as_ref().map(|v| v.to_string()),
        "h_table": r.h_table.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "reg": r.reg.as_ref().map(|v| v.to_string()),
        "reg_prime": r.reg_prime.as_ref().map(|v| v.to_string()),
        "overflowed": r.overflowed,
        "overflow_digits_log10": r.overflow_digits_log10,
    })
}

fn check_decomposition(c: &Certificates, sigma: f64, tol: f64) -> Result<(), CliError> {
    if c.err_lp > sigma + tol {
        return Err(CliError::Certificate(format!(
            "error part norm {} exceeds sigma {sigma}",
            c.err_lp
        )));
    }
    for u in &c.unf_norms {
        if u.measured > u.bound + tol {
            return Err(CliError::Certificate(format!(
                "uniformity norm {} exceeds bound {} at index {}",
                u.measured, u.bound, u.index
            )));
        }
    }
    Ok(())
}

// -- dispatch ----------------------------------------------------------------

/// Run the configured operation; returns (outputs, certificates).
pub fn execute(cfg: &RunConfig) -> Result<(Value, Value), CliError> {
    let mode = parse_mode(&cfg.mode, cfg.seed)?;
    let caps = parse_caps(&cfg.caps)?;
    match cfg.operation.as_str() {
        "decompose" => {
            let sigma = require(cfg.sigma, "sigma")?;
            let growth = parse_growth(&cfg.growth)?;
            let inst = crate::ingest::ingest_matrix(&input_path(cfg)?, &cfg.format)?;
            let base = inst.base_space()?;
            let sr = build_semiring(&cfg.semiring, &base, inst.flat().len())?;
            let f = inst.function()?;
            let d = decompose(&f, &sr, cfg.p, sigma, &growth, mode)?;
            check_decomposition(&d.certificates, sigma, cfg.tol)?;
            Ok((decomposition_json(&d), certificates_json(&d.certificates)))
        }
        "multi" => {
            let sigma = require(cfg.sigma, "sigma")?;
            let growth = parse_growth(&cfg.growth)?;
            let list = crate::ingest::ingest_matrix_list(&input_path(cfg)?)?;
            let base = list[0].base_space()?;
            let total = list[0].flat().len();
            let sr = build_semiring(&cfg.semiring, &base, total)?;
            let fs: Result<Vec<RandomVar>, CliError> =
                list.iter().map(|m| m.function()).collect();
            let fs = fs?;
            let semirings = vec![sr; fs.len().max(2)];
            let m = decompose_multi(&fs, &semirings, cfg.p, sigma, &growth, mode)?;
            for part in &m.parts {
                check_decomposition(&part.certificates, sigma, cfg.tol)?;
            }
            let outputs = json!({
                "n_index": m.n_index,
                "p_partition": partition_json(&m.p_partition),
                "q_partition": partition_json(&m.q_partition),
                "parts": m.parts.iter().map(decomposition_json).collect::<Vec<_>>(),
            });
            let certs = json!(m
                .parts
                .iter()
                .map(|p| certificates_json(&p.certificates))
                .collect::<Vec<_>>());
            Ok((outputs, certs))
        }
        "uniform" => {
            let eta = require(cfg.eta, "eta")?;
            let inst = crate::ingest::ingest_matrix(&input_path(cfg)?, &cfg.format)?;
            let base = inst.base_space()?;
            let sr = build_semiring(&cfg.semiring, &base, inst.flat().len())?;
            let f = inst.function()?;
            let (rep, d) = uniform_partition(&f, &sr, cfg.p, eta)?;
            let bad: f64 = rep.cells.iter().filter(|c| !c.uniform).map(|c| c.prob).sum();
            if bad > eta + cfg.tol {
                return Err(CliError::Certificate(format!(
                    "non-uniform mass {bad} exceeds eta {eta}"
                )));
            }
            let outputs = json!({
                "report": uniformity_report_json(&rep),
                "decomposition": decomposition_json(&d),
            });
            let certs = json!({
                "total_uniform_mass": rep.total_uniform_mass,
                "non_uniform_mass": bad,
                "decomposition": certificates_json(&d.certificates),
            });
            Ok((outputs, certs))
        }
        "hypercube" => {
            let eps = require(cfg.eps, "eps")?;
            let (spec, d) = crate::ingest::ingest_hypercube(&input_path(cfg)?)?;
            let rep = hypercube_uniform(&spec, &d, eps, caps.allow_large)?;
            if !rep.density_transfer_verified {
                return Err(CliError::Certificate(
                    "density transfer check failed on a uniform cell".into(),
                ));
            }
            let outputs = json!({
                "report": uniformity_report_json(&rep.report),
                "densities": rep.densities,
                "eps": rep.eps,
            });
            let certs = json!({
                "density_transfer_verified": rep.density_transfer_verified,
                "total_uniform_mass": rep.report.total_uniform_mass,
            });
            Ok((outputs, certs))
        }
        "graphon-strong" => {
            let eps = require(cfg.eps, "eps")?;
            let inst = crate::ingest::ingest_matrix(&input_path(cfg)?, &cfg.format)?;
            let w = Graphon::new(inst.base_space()?, inst.function()?)?;
            let res = graphon_strong_regularity(&w, cfg.p, eps, &|i| 1.0 / (i + 1) as f64)?;
            if res.cut_error > res.cut_bound + cfg.tol {
                return Err(CliError::Certificate(format!(
                    "cut norm {} exceeds bound {}",
                    res.cut_error, res.cut_bound
                )));
            }
            let outputs = json!({
                "r_partition": partition_json(&res.r),
                "u": values_json(res.u.values()),
                "size_bound": res.size_bound.as_ref().map(bound_report_json),
            });
            let certs = json!({
                "lp_error": res.lp_error,
                "cut_error": res.cut_error,
                "cut_bound": res.cut_bound,
                "outer_iterations": res.outer_iterations,
                "refinement_steps": res.refinement_steps,
            });
            Ok((outputs, certs))
        }
        "graphon-weak" => {
            let eps = require(cfg.eps, "eps")?;
            let inst = crate::ingest::ingest_matrix(&input_path(cfg)?, &cfg.format)?;
            let w = Graphon::new(inst.base_space()?, inst.function()?)?;
            let res = graphon_weak_regularity(&w, cfg.p, eps)?;
            if res.cut_error > eps + cfg.tol {
                return Err(CliError::Certificate(format!(
                    "cut norm {} exceeds eps {eps}",
                    res.cut_error
                )));
            }
            let outputs = json!({
                "r_partition": partition_json(&res.r),
                "step_log": res.step_log,
            });
            let certs = json!({
                "steps": res.steps,
                "cut_error": res.cut_error,
            });
            Ok((outputs, certs))
        }
        "norm" => {
            let inst = crate::ingest::ingest_matrix(&input_path(cfg)?, &cfg.format)?;
            let base = inst.base_space()?;
            let total = inst.flat().len();
            let sr = build_semiring(&cfg.semiring, &base, total)?;
            let f = inst.function()?;
            let res = uniformity_norm(&f, &sr, mode)?;
            let cut = if cfg.semiring == "rectangles" {
                let cap = caps.cut_base.unwrap_or(CUT_NORM_BASE_CAP);
                Some(cut_norm_exact(&f, &base, cap)?.value)
            } else {
                None
            };
            let outputs = json!({
                "norm": res.value,
                "witness": subset_json(&res.witness.set),
                "witness_integral": res.witness.value,
                "cut_norm": cut,
            });
            let certs = json!({ "exact": res.exact });
            Ok((outputs, certs))
        }
        "bounds" => {
            let k = cfg.k.ok_or_else(|| CliError::Config("--k is required".into()))?;
            let ell = cfg.ell.unwrap_or(1);
            let sigma = require(cfg.sigma, "sigma")?;
            let growth = parse_growth(&cfg.growth)?;
            let reg = reg_bound_f64(k, ell, sigma, cfg.p, &growth)?;
            let prime = reg_prime_bound_f64(k, sigma, cfg.p, &growth)?;
            let outputs = json!({
                "reg": bound_report_json(&reg),
                "reg_prime": bound_report_json(&prime),
            });
            Ok((outputs, json!({})))
        }
        other => Err(CliError::Config(format!("unknown operation '{other}'"))),
    }
}

pub fn build_report(cfg: &RunConfig, outputs: Value, certificates: Value, elapsed_ms: Option<u128>) -> Value {
    let mut report = json!({
        "schema_version": SCHEMA_VERSION,
        "tool": { "name": "regdecomp", "version": env!("CARGO_PKG_VERSION") },
        "operation": cfg.operation,
        "config": serde_json::to_value(cfg).expect("config serializes"),
        "outputs": outputs,
        "certificates": certificates,
    });
    if let Some(ms) = elapsed_ms {
        report["timings_ms"] = json!({ "total": ms as u64 });
    }
    report
}

// -- verification ------------------------------------------------------------

fn deep_compare(path: &str, a: &Value, b: &Value, tol: f64) -> Result<(), String> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap_or(f64::NAN), y.as_f64().unwrap_or(f64::NAN));
            if (x - y).abs() <= tol || x == y {
                Ok(())
            } else {
                Err(format!("{path}: {x} vs {y}"))
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                return Err(format!("{path}: length {} vs {}", x.len(), y.len()));
            }
            for (i, (u, v)) in x.iter().zip(y).enumerate() {
                deep_compare(&format!("{path}[{i}]"), u, v, tol)?;
            }
            Ok(())
        }
        (Value::Object(x), Value::Object(y)) => {
            if x.len() != y.len() {
                return Err(format!("{path}: key sets differ"));
            }
            for (k, u) in x {
                let v = y.get(k).ok_or_else(|| format!("{path}.{k}: missing"))?;
                deep_compare(&format!("{path}.{k}"), u, v, tol)?;
            }
            Ok(())
        }
        _ => {
            if a == b {
                Ok(())
            } else {
                Err(format!("{path}: {a} vs {b}"))
            }
        }
    }
}

/// Re-run the operation echoed in a report and compare outputs and
/// certificates within the tolerance.
pub fn verify_report(report_path: &Path, input_override: Option<&Path>) -> Result<(), CliError> {
    let text = std::fs::read_to_string(report_path)
        .map_err(|e| CliError::Io(format!("{}: {e}", report_path.display())))?;
    let report: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid report JSON: {e}")))?;
    let schema = report.get("schema_version").and_then(|v| v.as_u64());
    if schema != Some(SCHEMA_VERSION as u64) {
        return Err(CliError::Config(format!(
            "unsupported schema version {schema:?}"
        )));
    }
    let mut cfg: RunConfig = serde_json::from_value(
        report
            .get("config")
            .cloned()
            .ok_or_else(|| CliError::Config("report has no config".into()))?,
    )
    .map_err(|e| CliError::Config(format!("invalid config in report: {e}")))?;
    if let Some(p) = input_override {
        cfg.input = Some(p.display().to_string());
    }
    let (outputs, certificates) = execute(&cfg)?;
    let want_out = report.get("outputs").cloned().unwrap_or(Value::Null);
    let want_cert = report.get("certificates").cloned().unwrap_or(Value::Null);
    deep_compare("outputs", &want_out, &outputs, cfg.tol)
        .map_err(CliError::Certificate)?;
    deep_compare("certificates", &want_cert, &certificates, cfg.tol)
        .map_err(CliError::Certificate)?;
    Ok(())
}
