//! Command implementations. Each returns its output text and exit code.

use std::collections::BTreeMap;

use modelspace_core::criteria::{
    check_carleson, check_thm14, check_thm31, check_v1, check_v2, check_vanishing, check_volberg_treil, default_delta_grid, luecking_sum,
    schatten_necessary_sum, schatten_sufficient_sum, thm54_family_sum, ConditionReport, CriterionSum, Thm31Options, Verdict,
};
use modelspace_core::geometry::{whitney_decompose, GenericSquare};
use modelspace_core::inner::LevelSet;
use modelspace_core::kernels::{bernstein_ratio, BernsteinRatio, BernsteinWeightSpec, WeightKind};
use modelspace_core::spectral::{embedding_gram, singular_values, SpectralReport};
use modelspace_core::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Job;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAILS: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

pub const CONVENTION: &str = "lenE";

pub struct Output {
    pub file_name: &'static str,
    pub body: String,
    pub exit_code: i32,
    /// One line per verdict, for the terminal when output goes to a file.
    pub summary: Vec<String>,
}

type CmdResult = Result<Output, String>;

fn err(e: modelspace_core::Error) -> String {
    e.to_string()
}

fn provenance(job: &Job, command: &str) -> BTreeMap<String, Value> {
    let mut p = BTreeMap::new();
    p.insert("tool".into(), json!(format!("modelspace {}", env!("CARGO_PKG_VERSION"))));
    p.insert("command".into(), json!(command));
    p.insert("config_sha256".into(), json!(job.config_hash));
    p.insert("convention".into(), json!(CONVENTION));
    p.insert("params".into(), json!(job.config.params));
    p.insert("epsilon".into(), json!(job.epsilon));
    p.insert("depth".into(), json!(job.depth));
    p.insert("tol".into(), json!(job.tol));
    p.insert("quad_tol".into(), json!(job.quad_tol));
    p.insert("zeros".into(), json!(job.theta.zeros().len()));
    p.insert("boundary_spectrum".into(), json!(job.theta.boundary_spectrum_angles()));
    if let Some(t) = job.theta.truncation() {
        p.insert("truncation".into(), json!({"family": t.family.name(), "n": t.n_trunc}));
    }
    if let Some(s) = job.seed {
        p.insert("seed".into(), json!(s));
    }
    p
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct Bundle {
    provenance: BTreeMap<String, Value>,
    reports: Vec<ConditionReport>,
    sums: Vec<CriterionSum>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bernstein: Option<BernsteinRatio>,
    #[serde(skip_serializing_if = "Option::is_none")]
    spectral: Option<SpectralReport>,
    notes: Vec<String>,
    verdict_counts: BTreeMap<&'static str, usize>,
    exit_code: i32,
}

/// Exit code for a set of verdicts: any failure wins, then all-inconclusive.
pub fn verdict_exit_code(verdicts: &[Verdict]) -> i32 {
    if verdicts.contains(&Verdict::FailsWithWitness) {
        EXIT_FAILS
    } else if !verdicts.is_empty() && verdicts.iter().all(|v| *v == Verdict::Inconclusive) {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    }
}

fn whitney_squares(job: &Job) -> Result<Vec<GenericSquare>, String> {
    Ok(whitney_decompose(&job.theta, job.epsilon, job.tol).map_err(err)?.arcs.iter().map(|a| a.square()).collect())
}

pub fn analyze(job: &Job) -> CmdResult {
    let (theta, mu, eps, depth, t) = (&job.theta, &job.mu, job.epsilon, job.depth, job.threshold);
    let mut reports = Vec::new();
    let mut sums = Vec::new();
    let mut notes = Vec::new();
    let wants = |name: &str| job.criteria.iter().any(|c| c == name);
    if wants("carleson") {
        reports.push(check_carleson(mu, depth, t).map_err(err)?);
    }
    if wants("vanishing") {
        reports.push(check_vanishing(mu, depth, t).map_err(err)?);
    }
    if wants("volberg_treil") {
        reports.push(check_volberg_treil(theta, eps, mu, depth, t).map_err(err)?);
    }
    if wants("V1") {
        reports.push(check_v1(theta, mu, &default_delta_grid(depth), depth, t).map_err(err)?);
    }
    if wants("V2") {
        reports.push(check_v2(theta, eps, mu, depth, t).map_err(err)?);
    }
    for &r in &job.r {
        if wants("thm14") && r >= 1.0 {
            let (rep, sufficient, necessary) = check_thm14(theta, eps, mu, r, depth, job.tol, job.cls_declared).map_err(err)?;
            reports.push(rep);
            sums.push(sufficient);
            sums.push(necessary);
        } else {
            if wants("thm14") {
                notes.push(format!("thm14 skipped for r = {r}: needs r ≥ 1"));
            }
            sums.push(schatten_sufficient_sum(theta, eps, mu, r, job.tol).map_err(err)?);
            sums.push(schatten_necessary_sum(theta, eps, mu, r, depth).map_err(err)?);
        }
        sums.push(luecking_sum(mu, r, depth).map_err(err)?);
        sums.push(thm54_family_sum(theta, eps, job.a, mu, r, depth).map_err(err)?);
    }
    if wants("thm31") {
        match job.p {
            Some(p) => {
                let squares = whitney_squares(job)?;
                for &r in job.r.iter().filter(|&&r| r > 1.0 && r < p) {
                    let mut opts = Thm31Options::new(p, r, depth);
                    opts.tol = job.quad_tol.max(1e-8);
                    let rep = check_thm31(theta, &squares, mu, &opts).map_err(err)?;
                    reports.extend([rep.so, rep.sd, rep.bounded, rep.compact]);
                }
                if !job.r.iter().any(|&r| r > 1.0 && r < p) {
                    notes.push(format!("thm31 skipped: no r in (1, {p})"));
                }
            }
            None => notes.push("thm31 skipped: needs p".into()),
        }
    }
    let bernstein = match job.n {
        Some(n) => {
            let p = job.p.unwrap_or(2.0);
            let spec = BernsteinWeightSpec::new(p, n, WeightKind::DEpsPowN).and_then(|s| s.with_epsilon(eps)).map_err(err)?;
            Some(bernstein_ratio(theta, mu, &spec, job.samples, job.seed.unwrap_or(0), job.quad_tol).map_err(err)?)
        }
        None => None,
    };
    let spectral = if theta.is_finite_blaschke() {
        let finite = theta.finite_part().map_err(err)?;
        let g = embedding_gram(&finite, mu, job.quad_tol).map_err(err)?;
        let mut rep = singular_values(&g, &job.r).map_err(err)?;
        rep.provenance.extend(provenance(job, "analyze"));
        Some(rep)
    } else {
        notes.push("spectral oracle skipped: singular inner factor present".into());
        None
    };
    let verdicts: Vec<Verdict> = reports.iter().map(|r| r.verdict).collect();
    let exit_code = verdict_exit_code(&verdicts);
    let mut verdict_counts = BTreeMap::new();
    for v in [Verdict::HoldsAtResolution, Verdict::FailsWithWitness, Verdict::Inconclusive] {
        verdict_counts.insert(v.as_str(), verdicts.iter().filter(|&&x| x == v).count());
    }
    let summary = reports
        .iter()
        .map(|r| {
            let r_tag = r.parameters.r.map_or(String::new(), |r| format!(" r={r}"));
            format!("{}{r_tag}: {}", r.criterion.as_str(), r.verdict.as_str())
        })
        .collect();
    let bundle = Bundle { provenance: provenance(job, "analyze"), reports, sums, bernstein, spectral, notes, verdict_counts, exit_code };
    Ok(Output { file_name: "analyze.json", body: to_json(&bundle), exit_code, summary })
}

pub fn levelset(job: &Job) -> CmdResult {
    let ls = LevelSet::new(&job.theta, job.epsilon).map_err(err)?;
    let cells = ls.straddling_cells(job.tol).map_err(err)?;
    let mut body =
        format!("# modelspace levelset, config_sha256={}, epsilon={}, tol={}\nx,y,cell_size\n", job.config_hash, job.epsilon, job.tol);
    for c in &cells {
        body.push_str(&format!("{},{},{}\n", c.x, c.y, c.cell_size));
    }
    Ok(Output { file_name: "levelset.csv", body, exit_code: EXIT_OK, summary: vec![format!("{} straddling cells", cells.len())] })
}

pub fn decompose(job: &Job) -> CmdResult {
    let w = whitney_decompose(&job.theta, job.epsilon, job.tol).map_err(err)?;
    let mut body = format!(
        "# modelspace decompose, config_sha256={}, epsilon={}, tol={}, convention={CONVENTION}\n",
        job.config_hash, job.epsilon, job.tol
    );
    body.push_str(&w.to_csv());
    let summary = vec![format!("{} arcs, {} threshold-exact", w.arcs.len(), w.threshold_exact_count())];
    Ok(Output { file_name: "whitney.csv", body, exit_code: EXIT_OK, summary })
}

#[derive(Serialize)]
struct GramDoc {
    #[serde(flatten)]
    report: SpectralReport,
    gram: Vec<Vec<Complex64>>,
}

pub fn gram(job: &Job) -> CmdResult {
    let finite = job.theta.finite_part().map_err(err)?;
    let g = embedding_gram(&finite, &job.mu, job.quad_tol).map_err(err)?;
    let mut report = singular_values(&g, &job.r).map_err(err)?;
    report.provenance.extend(provenance(job, "gram"));
    let summary = vec![format!("dim {}, operator norm {}", g.dim(), report.operator_norm)];
    let doc = GramDoc { report, gram: g.matrix };
    Ok(Output { file_name: "gram.json", body: to_json(&doc), exit_code: EXIT_OK, summary })
}
