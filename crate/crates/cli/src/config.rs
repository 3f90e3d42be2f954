//! Job configuration: JSON document plus command-line overrides.

use std::path::Path;

use modelspace_core::inner::{InnerFunction, InnerFunctionSpec};
use modelspace_core::measure::{DiscMeasure, MeasureSpec};
use modelspace_core::spectral::clark_measure;
use modelspace_core::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const DEFAULT_EPSILON: f64 = 0.5;
pub const DEFAULT_DEPTH: u32 = 8;
pub const DEFAULT_TOL: f64 = 1e-4;
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
pub const DEFAULT_A: f64 = 1.0;
pub const DEFAULT_SAMPLES: usize = 256;

/// Criteria run by `analyze` when the config does not list any.
pub const DEFAULT_CRITERIA: &[&str] = &["volberg_treil", "V1", "V2", "thm14"];
pub const KNOWN_CRITERIA: &[&str] = &["carleson", "vanishing", "volberg_treil", "V1", "V2", "thm14", "thm31"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexDoc {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<f64>>,
    /// Derivative order of the Bernstein ratio.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    /// Geometric tolerance: distance brackets, Whitney arcs, level-set cells.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, rename = "A", skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criteria: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cls_declared: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub inner: InnerFunctionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    /// Use the Clark measure `σ_α` of the (finite Blaschke) inner function.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clark_alpha: Option<ComplexDoc>,
    #[serde(default)]
    pub params: Params,
}

/// Command-line values that replace config parameters.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub epsilon: Option<f64>,
    pub r: Vec<f64>,
    pub p: Option<f64>,
    pub n: Option<u32>,
    pub depth: Option<u32>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub a: Option<f64>,
}

/// Fully defaulted and validated job.
#[derive(Debug, Clone)]
pub struct Job {
    pub config: JobConfig,
    pub config_hash: String,
    pub theta: InnerFunction,
    pub mu: DiscMeasure,
    pub epsilon: f64,
    pub p: Option<f64>,
    pub r: Vec<f64>,
    pub n: Option<u32>,
    pub depth: u32,
    pub tol: f64,
    pub quad_tol: f64,
    pub seed: Option<u64>,
    pub a: f64,
    pub threshold: Option<f64>,
    pub criteria: Vec<String>,
    pub samples: usize,
    pub cls_declared: bool,
}

pub fn parse(text: &str) -> Result<JobConfig, String> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        format!("config: field `{path}` at line {} column {}: {inner}", inner.line(), inner.column())
    })
}

pub fn load(path: &Path, over: &Overrides) -> Result<Job, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("config: cannot read {}: {e}", path.display()))?;
    let mut config = parse(&text)?;
    apply(&mut config.params, over);
    resolve(config)
}

fn apply(p: &mut Params, o: &Overrides) {
    let set = |slot: &mut Option<f64>, v: Option<f64>| {
        if v.is_some() {
            *slot = v;
        }
    };
    set(&mut p.epsilon, o.epsilon);
    set(&mut p.p, o.p);
    set(&mut p.tol, o.tol);
    set(&mut p.a, o.a);
    if !o.r.is_empty() {
        p.r = Some(o.r.clone());
    }
    if o.n.is_some() {
        p.n = o.n;
    }
    if o.depth.is_some() {
        p.depth = o.depth;
    }
    if o.seed.is_some() {
        p.seed = o.seed;
    }
}

fn positive(name: &str, v: f64) -> Result<f64, String> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("params.{name}: must be positive and finite, got {v}"))
    }
}

/// SHA-256 of the effective config (after overrides) in canonical JSON.
pub fn config_hash(config: &JobConfig) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    hex::encode(Sha256::digest(&bytes))
}

pub fn resolve(config: JobConfig) -> Result<Job, String> {
    let p = &config.params;
    let epsilon = p.epsilon.unwrap_or(DEFAULT_EPSILON);
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(format!("params.epsilon: must lie in (0, 1), got {epsilon}"));
    }
    let depth = p.depth.unwrap_or(DEFAULT_DEPTH);
    if depth == 0 {
        return Err("params.depth: must be at least 1".into());
    }
    let tol = positive("tol", p.tol.unwrap_or(DEFAULT_TOL))?;
    let quad_tol = positive("quad_tol", p.quad_tol.unwrap_or(DEFAULT_QUAD_TOL))?;
    let a = positive("A", p.a.unwrap_or(DEFAULT_A))?;
    let r = p.r.clone().unwrap_or_else(|| vec![2.0]);
    if r.is_empty() {
        return Err("params.r: must list at least one exponent".into());
    }
    for (i, &x) in r.iter().enumerate() {
        positive(&format!("r[{i}]"), x)?;
    }
    if let Some(pp) = p.p {
        if !(pp >= 1.0 && pp.is_finite()) {
            return Err(format!("params.p: must be finite and at least 1, got {pp}"));
        }
    }
    if let Some(t) = p.threshold {
        positive("threshold", t)?;
    }
    let criteria = p.criteria.clone().unwrap_or_else(|| DEFAULT_CRITERIA.iter().map(|s| s.to_string()).collect());
    if let Some((i, c)) = criteria.iter().enumerate().find(|(_, c)| !KNOWN_CRITERIA.contains(&c.as_str())) {
        return Err(format!("params.criteria[{i}]: unknown criterion `{c}` (known: {})", KNOWN_CRITERIA.join(", ")));
    }
    let samples = p.samples.unwrap_or(DEFAULT_SAMPLES);
    if samples == 0 {
        return Err("params.samples: must be at least 1".into());
    }
    if p.n.is_some() && p.p.is_some_and(|pp| pp != 2.0) && p.seed.is_none() {
        return Err("params.seed: required for the sampled Bernstein ratio (p ≠ 2)".into());
    }
    let theta = InnerFunction::from_spec(&config.inner).map_err(|e| format!("inner: {e}"))?;
    let mu = match (&config.measure, config.clark_alpha) {
        (Some(_), Some(_)) => return Err("config: `measure` and `clark_alpha` are mutually exclusive".into()),
        (Some(m), None) => DiscMeasure::from_spec(m).map_err(|e| format!("measure: {e}"))?,
        (None, Some(alpha)) => {
            let alpha = Complex64::new(alpha.re, alpha.im);
            if ((alpha.norm() - 1.0).abs()) > 1e-12 {
                return Err("clark_alpha: must be unimodular".into());
            }
            let b = theta.finite_part().map_err(|e| format!("clark_alpha: {e}"))?;
            clark_measure(&b, alpha).map_err(|e| format!("clark_alpha: {e}"))?
        }
        (None, None) => DiscMeasure::from_spec(&MeasureSpec::default()).map_err(|e| format!("measure: {e}"))?,
    };
    Ok(Job {
        config_hash: config_hash(&config),
        epsilon,
        p: p.p,
        r,
        n: p.n,
        depth,
        tol,
        quad_tol,
        seed: p.seed,
        a,
        threshold: p.threshold,
        criteria,
        samples,
        cls_declared: p.cls_declared.unwrap_or(false),
        theta,
        mu,
        config,
    })
}
