//! Embedding criteria as resolution-tagged checkers and partial sums.
//!
//! Every checker works at an explicit finite resolution and returns one of
//! three verdicts. A failing verdict always carries a concrete square whose
//! ratio exceeds the stated threshold.

mod sums;
mod thm31;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

pub use sums::{
    check_thm14, luecking_sum, schatten_necessary_sum, schatten_sufficient_sum, schatten_sufficient_sum_on, thm54_family_sum, CellTerm,
    Convergence, CriterionSum,
};
pub use thm31::{check_thm31, lower_side_measure, Thm31Options, Thm31Report, LOWER_SIDE_NODES};

use crate::error::{invalid, Result};
use crate::geometry::{family_meeting, DyadicSquare, FamilyArc, GenericSquare, MAX_FAMILY_DEPTH};
use crate::inner::InnerFunction;
use crate::measure::{
    carleson_constant, level_maxima, profile_from_levels, vanishing_profile, DiscMeasure, FAMILY_COVER_FACTOR, LENGTH_CONVENTION,
    VANISHING_THRESHOLD,
};

const TWO_PI: f64 = 2.0 * PI;

/// Levels at the fine end of a profile compared against the coarse part.
pub const GROWTH_WINDOW: usize = 4;

/// Growth beyond this factor over the coarse levels counts as unbounded.
pub const GROWTH_FACTOR: f64 = FAMILY_COVER_FACTOR;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    HoldsAtResolution,
    FailsWithWitness,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::HoldsAtResolution => "holds_at_resolution",
            Verdict::FailsWithWitness => "fails_with_witness",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum CriterionId {
    #[serde(rename = "carleson")]
    Carleson,
    #[serde(rename = "vanishing")]
    Vanishing,
    #[serde(rename = "volberg_treil")]
    VolbergTreil,
    V1,
    V2,
    #[serde(rename = "thm31_so")]
    Thm31So,
    #[serde(rename = "thm31_sd")]
    Thm31Sd,
    #[serde(rename = "thm31_bounded")]
    Thm31Bounded,
    #[serde(rename = "thm31_compact")]
    Thm31Compact,
    #[serde(rename = "schatten_sufficient")]
    SchattenSufficient,
    #[serde(rename = "schatten_necessary")]
    SchattenNecessary,
    #[serde(rename = "luecking")]
    Luecking,
    #[serde(rename = "thm54_family")]
    Thm54Family,
    #[serde(rename = "thm14")]
    Thm14,
}

impl CriterionId {
    pub fn as_str(&self) -> &'static str {
        match self {
            CriterionId::Carleson => "carleson",
            CriterionId::Vanishing => "vanishing",
            CriterionId::VolbergTreil => "volberg_treil",
            CriterionId::V1 => "V1",
            CriterionId::V2 => "V2",
            CriterionId::Thm31So => "thm31_so",
            CriterionId::Thm31Sd => "thm31_sd",
            CriterionId::Thm31Bounded => "thm31_bounded",
            CriterionId::Thm31Compact => "thm31_compact",
            CriterionId::SchattenSufficient => "schatten_sufficient",
            CriterionId::SchattenNecessary => "schatten_necessary",
            CriterionId::Luecking => "luecking",
            CriterionId::Thm54Family => "thm54_family",
            CriterionId::Thm14 => "thm14",
        }
    }
}

/// Parameters a report was computed with.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Parameters {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cls_declared: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessSquare {
    Generic(GenericSquare),
    Dyadic(DyadicSquare),
}

/// A square violating a threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub square: WitnessSquare,
    pub ratio: f64,
    pub threshold: f64,
    /// Measure the ratio refers to: `mu`, `mu_delta` or `lower_sides`.
    pub measure: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

impl Witness {
    fn family(f: &FamilyArc, mu: &DiscMeasure, threshold: f64, measure: &'static str) -> Self {
        Self { square: WitnessSquare::Generic(f.square()), ratio: mu.family_ratio(f), threshold, measure, delta: None }
    }

    /// `μ(S)/|J(S)|` for a generic square and `2ⁿ μ(R)` for a dyadic cell.
    pub fn recompute(&self, mu: &DiscMeasure) -> f64 {
        match &self.square {
            WitnessSquare::Generic(s) => mu.mass_on_square(s) / s.lower_side_length(),
            WitnessSquare::Dyadic(c) => 2f64.powi(c.level as i32) * mu.mass_on_dyadic(c),
        }
    }

    pub fn violates(&self) -> bool {
        self.ratio > self.threshold
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub criterion: CriterionId,
    pub parameters: Parameters,
    /// Named profile arrays, e.g. per-level maxima.
    pub profile: BTreeMap<String, Vec<f64>>,
    pub diagnostics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub convention: &'static str,
    pub cover_factor: f64,
}

impl ConditionReport {
    fn new(criterion: CriterionId, parameters: Parameters) -> Self {
        Self {
            criterion,
            parameters,
            profile: BTreeMap::new(),
            diagnostics: BTreeMap::new(),
            notes: Vec::new(),
            verdict: Verdict::Inconclusive,
            witness: None,
            convention: LENGTH_CONVENTION,
            cover_factor: FAMILY_COVER_FACTOR,
        }
    }

    fn holds(&mut self) {
        self.verdict = Verdict::HoldsAtResolution;
        self.witness = None;
    }

    /// Sets the failing verdict; a witness that does not violate its
    /// threshold downgrades the verdict to inconclusive.
    fn fails(&mut self, w: Witness) {
        self.verdict = if w.violates() { Verdict::FailsWithWitness } else { Verdict::Inconclusive };
        self.witness = Some(w);
    }

    /// A failing verdict carries a violating witness.
    pub fn is_consistent(&self) -> bool {
        match self.verdict {
            Verdict::FailsWithWitness => self.witness.as_ref().is_some_and(|w| w.violates()),
            _ => true,
        }
    }
}

fn check_depth(depth: u32) -> Result<()> {
    if depth == 0 || depth > MAX_FAMILY_DEPTH {
        return invalid(format!("depth must lie in 1..={MAX_FAMILY_DEPTH}"));
    }
    Ok(())
}

fn check_threshold(t: Option<f64>) -> Result<()> {
    match t {
        Some(c) if !(c >= 0.0 && c.is_finite()) => invalid("threshold must be finite and non-negative"),
        _ => Ok(()),
    }
}

/// Outcome of comparing the fine end of a per-level profile with its coarse part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Trend {
    Stable,
    /// Index of the coarsest level exceeding the threshold.
    Growing {
        level: usize,
        threshold: f64,
    },
    Unclear,
}

/// Growth rule for a supremum over levels: stable when the last
/// [`GROWTH_WINDOW`] levels add nothing above the coarse maximum, growing when
/// the finest level exceeds [`GROWTH_FACTOR`] times it.
pub(crate) fn growth_trend(per_level: &[f64]) -> Trend {
    if per_level.iter().all(|&v| v == 0.0) {
        return Trend::Stable;
    }
    if per_level.len() <= GROWTH_WINDOW {
        return Trend::Unclear;
    }
    let split = per_level.len() - GROWTH_WINDOW;
    let early = per_level[..split].iter().copied().fold(0.0, f64::max);
    let late = per_level[split..].iter().copied().fold(0.0, f64::max);
    if late <= early * (1.0 + 1e-12) {
        return Trend::Stable;
    }
    let threshold = GROWTH_FACTOR * early;
    if per_level[per_level.len() - 1] > threshold {
        let level = per_level.iter().position(|&v| v > threshold).expect("finest level exceeds");
        return Trend::Growing { level, threshold };
    }
    Trend::Unclear
}

/// Verdict of a supremum condition from per-level maxima and the arcs
/// attaining them, against a supplied threshold or the growth rule.
fn sup_verdict(
    report: &mut ConditionReport,
    mu: &DiscMeasure,
    per_level: &[f64],
    arg: &[Option<FamilyArc>],
    threshold: Option<f64>,
    measure: &'static str,
) {
    let sup = per_level.iter().copied().fold(0.0, f64::max);
    report.diagnostics.insert("sup".into(), sup);
    report.profile.insert("per_level_max".into(), per_level.to_vec());
    if let Some(c) = threshold {
        match per_level.iter().position(|&v| v > c) {
            Some(k) => report.fails(Witness::family(&arg[k].expect("attained"), mu, c, measure)),
            None => report.holds(),
        }
        return;
    }
    match growth_trend(per_level) {
        Trend::Stable => report.holds(),
        Trend::Growing { level, threshold } => {
            report.diagnostics.insert("growth_threshold".into(), threshold);
            report.fails(Witness::family(&arg[level].expect("attained"), mu, threshold, measure));
        }
        Trend::Unclear => {
            report.verdict = Verdict::Inconclusive;
            report.notes.push("per-level maxima still rising at the finest levels".into());
        }
    }
}

/// `M_μ` over the arc family up to `depth`; holds when the estimate stays at
/// or below `threshold` or, without one, is stable over the finest levels.
pub fn check_carleson(mu: &DiscMeasure, depth: u32, threshold: Option<f64>) -> Result<ConditionReport> {
    check_depth(depth)?;
    check_threshold(threshold)?;
    let est = carleson_constant(mu, depth)?;
    let mut report = ConditionReport::new(CriterionId::Carleson, Parameters { depth: Some(depth), threshold, ..Default::default() });
    let arcs: Vec<FamilyArc> = (1..=depth).flat_map(|k| mu.candidate_arcs(k)).collect();
    let (_, arg) = level_maxima(mu, &arcs, depth);
    sup_verdict(&mut report, mu, &est.per_level, &arg, threshold, "mu");
    Ok(report)
}

/// Verdict of a vanishing-type profile `η` on a grid running from coarse to
/// fine: holds below `threshold`, fails when the finest value is at least half
/// the value at the middle of the grid.
fn vanishing_verdict(report: &mut ConditionReport, eta: &[f64], threshold: f64, witness: Option<Witness>) {
    let Some(&last) = eta.last() else {
        report.holds();
        return;
    };
    if last <= threshold {
        report.holds();
        return;
    }
    let mid = eta[(eta.len() - 1) / 2];
    if last >= 0.5 * mid {
        match witness {
            Some(w) => report.fails(w),
            None => report.verdict = Verdict::Inconclusive,
        }
    } else {
        report.verdict = Verdict::Inconclusive;
        report.notes.push("profile decreasing but still above the threshold".into());
    }
}

/// Vanishing Carleson condition over the arc family.
pub fn check_vanishing(mu: &DiscMeasure, depth: u32, threshold: Option<f64>) -> Result<ConditionReport> {
    check_depth(depth)?;
    check_threshold(threshold)?;
    let t = threshold.unwrap_or(VANISHING_THRESHOLD);
    let mut prof = vanishing_profile(mu, depth)?;
    prof.threshold = t;
    prof.consistent_with_vanishing = prof.eta.last().is_some_and(|&e| e <= t);
    let mut report =
        ConditionReport::new(CriterionId::Vanishing, Parameters { depth: Some(depth), threshold: Some(t), ..Default::default() });
    report.profile.insert("delta".into(), prof.deltas.clone());
    report.profile.insert("eta".into(), prof.eta.clone());
    let w = prof.witnesses.last().copied().flatten().map(|f| Witness::family(&f, mu, t, "mu"));
    vanishing_verdict(&mut report, &prof.eta, t, w);
    Ok(report)
}

/// Per-level maxima of `μ(S(I))/|I|` over family arcs whose Carleson squares
/// certifiably meet `Ω(Θ, ε)`.
fn meeting_levels(
    theta: &InnerFunction,
    eps: f64,
    mu: &DiscMeasure,
    depth: u32,
    report: &mut ConditionReport,
) -> Result<(Vec<f64>, Vec<Option<FamilyArc>>)> {
    let (meets, undecided) = family_meeting(theta, eps, depth)?;
    let mut counts = vec![0.0; depth as usize];
    for f in &meets {
        counts[(f.level - 1) as usize] += 1.0;
    }
    let mut undecided_counts = vec![0.0; depth as usize];
    for f in &undecided {
        undecided_counts[(f.level - 1) as usize] += 1.0;
    }
    // Undecided squares that could raise the supremum are reported.
    let (undecided_max, _) = level_maxima(mu, &undecided, depth);
    report.profile.insert("meeting_count".into(), counts);
    report.profile.insert("undecided_count".into(), undecided_counts);
    report.profile.insert("undecided_max".into(), undecided_max);
    if !undecided.is_empty() {
        report.notes.push(format!("{} family squares could not be certified against the level set", undecided.len()));
    }
    Ok(level_maxima(mu, &meets, depth))
}

/// Volberg–Treil condition: `sup μ(S(I))/|I|` over squares meeting `Ω(Θ, ε)`.
pub fn check_volberg_treil(
    theta: &InnerFunction,
    eps: f64,
    mu: &DiscMeasure,
    depth: u32,
    threshold: Option<f64>,
) -> Result<ConditionReport> {
    check_depth(depth)?;
    check_threshold(threshold)?;
    let params = Parameters { epsilon: Some(eps), depth: Some(depth), threshold, ..Default::default() };
    let mut report = ConditionReport::new(CriterionId::VolbergTreil, params);
    let (per_level, arg) = meeting_levels(theta, eps, mu, depth, &mut report)?;
    sup_verdict(&mut report, mu, &per_level, &arg, threshold, "mu");
    Ok(report)
}

/// Condition V2: `η(δ)` over squares meeting `Ω(Θ, ε)` with `|I| ≤ δ`.
pub fn check_v2(theta: &InnerFunction, eps: f64, mu: &DiscMeasure, depth: u32, threshold: Option<f64>) -> Result<ConditionReport> {
    check_depth(depth)?;
    check_threshold(threshold)?;
    let t = threshold.unwrap_or(VANISHING_THRESHOLD);
    let params = Parameters { epsilon: Some(eps), depth: Some(depth), threshold: Some(t), ..Default::default() };
    let mut report = ConditionReport::new(CriterionId::V2, params);
    let (per_level, arg) = meeting_levels(theta, eps, mu, depth, &mut report)?;
    let prof = profile_from_levels(&per_level, &arg, t);
    report.profile.insert("delta".into(), prof.deltas.clone());
    report.profile.insert("eta".into(), prof.eta.clone());
    let w = prof.witnesses.last().copied().flatten().map(|f| Witness::family(&f, mu, t, "mu"));
    vanishing_verdict(&mut report, &prof.eta, t, w);
    Ok(report)
}

/// `δ_j = 2π·2^{-j}` for `j = 1..depth-1`.
pub fn default_delta_grid(depth: u32) -> Vec<f64> {
    (1..depth.max(2)).map(|j| TWO_PI * 2f64.powi(-(j as i32))).collect()
}

/// Condition V1: Carleson constants of `μ|_{H_δ}` with
/// `H_δ = {dist(z, σ(Θ) ∩ T) < δ}` along a decreasing grid of `δ`.
pub fn check_v1(
    theta: &InnerFunction,
    mu: &DiscMeasure,
    delta_grid: &[f64],
    depth: u32,
    threshold: Option<f64>,
) -> Result<ConditionReport> {
    check_depth(depth)?;
    check_threshold(threshold)?;
    if delta_grid.is_empty() || delta_grid.iter().any(|&d| !(d > 0.0)) {
        return invalid("delta grid must be non-empty and positive");
    }
    if delta_grid.windows(2).any(|w| w[1] >= w[0]) {
        return invalid("delta grid must be strictly decreasing");
    }
    let t = threshold.unwrap_or(VANISHING_THRESHOLD);
    let params = Parameters { depth: Some(depth), threshold: Some(t), delta_grid: Some(delta_grid.to_vec()), ..Default::default() };
    let mut report = ConditionReport::new(CriterionId::V1, params);
    let angles = theta.boundary_spectrum_angles();
    if angles.is_empty() {
        report.notes.push("empty boundary spectrum: every restriction vanishes".into());
    }
    let mut values = Vec::with_capacity(delta_grid.len());
    let mut last_witness = None;
    for &delta in delta_grid {
        let restricted = mu.restrict_near(&angles, delta);
        let est = carleson_constant(&restricted, depth)?;
        values.push(est.value);
        last_witness = est.witness.map(|f| Witness { delta: Some(delta), ..Witness::family(&f, &restricted, t, "mu_delta") });
    }
    report.profile.insert("delta".into(), delta_grid.to_vec());
    report.profile.insert("carleson_estimate".into(), values.clone());
    vanishing_verdict(&mut report, &values, t, last_witness);
    Ok(report)
}
