//! Schatten-class sums over Whitney arcs and dyadic cells.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{ConditionReport, CriterionId, Parameters, Verdict, Witness, WitnessSquare};
use crate::error::{invalid, Result};
use crate::geometry::{classify_cell, dyadic_locate, whitney_decompose, CellMode, DyadicSquare, WhitneyDecomposition, MAX_FAMILY_DEPTH};
use crate::inner::{Decision, InnerFunction};
use crate::measure::{DiscMeasure, MeasureAtom};
use crate::spectral::{embedding_gram, r_key, singular_values, MAX_TM_DIM};

/// Number of blocks the Whitney terms are grouped into.
const WHITNEY_BLOCKS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Convergence {
    Converging,
    Diverging,
    Undetermined,
}

/// One dyadic cell carrying mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellTerm {
    pub cell: DyadicSquare,
    pub mass: f64,
    /// `(2ⁿ μ(R))^{r/2}`.
    pub term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionSum {
    pub criterion: CriterionId,
    pub parameters: Parameters,
    /// `arc` (Whitney order) or `level`.
    pub index: &'static str,
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub blocks: Vec<f64>,
    /// `b_{j+1}/b_j`, absent where `b_j = 0`.
    pub block_ratios: Vec<Option<f64>>,
    pub convergence: Convergence,
    pub value: f64,
    /// Cells with mass whose status could not be certified.
    pub undecided: Vec<CellTerm>,
    pub cells: Vec<CellTerm>,
    /// Atoms outside the squares the sum runs over.
    pub uncovered_atoms: Vec<MeasureAtom>,
    pub uncovered_density_mass: f64,
    pub notes: Vec<String>,
}

impl CriterionSum {
    fn new(criterion: CriterionId, parameters: Parameters, index: &'static str, terms: Vec<f64>, blocks: Vec<f64>) -> Self {
        let mut partial_sums = Vec::with_capacity(terms.len());
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for &t in &terms {
            // Neumaier summation in fixed order.
            let s = sum + t;
            comp += if sum.abs() >= t.abs() { (sum - s) + t } else { (t - s) + sum };
            sum = s;
            partial_sums.push(sum + comp);
        }
        let block_ratios = blocks.windows(2).map(|w| if w[0] > 0.0 { Some(w[1] / w[0]) } else { None }).collect();
        let convergence = convergence(&blocks);
        Self {
            criterion,
            parameters,
            index,
            value: partial_sums.last().copied().unwrap_or(0.0),
            terms,
            partial_sums,
            blocks,
            block_ratios,
            convergence,
            undecided: Vec::new(),
            cells: Vec::new(),
            uncovered_atoms: Vec::new(),
            uncovered_density_mass: 0.0,
            notes: Vec::new(),
        }
    }

    /// No mass escaped the squares the sum is taken over.
    pub fn fully_covered(&self) -> bool {
        self.uncovered_atoms.is_empty() && self.uncovered_density_mass == 0.0
    }
}

/// Converging when the last block is at most a quarter of the largest earlier
/// block, diverging when it is at least three quarters of it.
fn convergence(blocks: &[f64]) -> Convergence {
    if blocks.iter().all(|&b| b == 0.0) {
        return Convergence::Converging;
    }
    if blocks.len() < 2 {
        return Convergence::Undetermined;
    }
    let last = blocks[blocks.len() - 1];
    let prev = blocks[..blocks.len() - 1].iter().copied().fold(0.0, f64::max);
    if last <= 0.25 * prev {
        Convergence::Converging
    } else if last > 0.0 && last >= 0.75 * prev {
        Convergence::Diverging
    } else {
        Convergence::Undetermined
    }
}

fn check_r(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return invalid("r must be finite and positive");
    }
    Ok(())
}

/// `Σ_k (μ(S(I_k))/|I_k|)^{r/2}` over a Whitney decomposition.
pub fn schatten_sufficient_sum_on(w: &WhitneyDecomposition, mu: &DiscMeasure, r: f64) -> Result<CriterionSum> {
    check_r(r)?;
    let terms: Vec<f64> = w.arcs.iter().map(|a| (mu.mass_on_square(&a.square()) / a.arc.length()).powf(0.5 * r) + 0.0).collect();
    let n = terms.len();
    let nb = WHITNEY_BLOCKS.min(n.max(1));
    let blocks: Vec<f64> = (0..nb).map(|j| terms[j * n / nb..(j + 1) * n / nb].iter().sum()).collect();
    let params = Parameters { epsilon: Some(w.epsilon), r: Some(r), tol: Some(w.options.tol), ..Default::default() };
    let mut sum = CriterionSum::new(CriterionId::SchattenSufficient, params, "arc", terms, blocks);
    sum.uncovered_atoms = mu.atoms().iter().filter(|a| !w.in_f(a.point)).copied().collect();
    sum.uncovered_density_mass = mu.restrict(|_| false, &w.excluded).total_mass();
    if !sum.fully_covered() {
        sum.notes.push("support of μ is not contained in the union of the Whitney squares".into());
    }
    Ok(sum)
}

pub fn schatten_sufficient_sum(theta: &InnerFunction, eps: f64, mu: &DiscMeasure, r: f64, tol: f64) -> Result<CriterionSum> {
    let w = whitney_decompose(theta, eps, tol)?;
    schatten_sufficient_sum_on(&w, mu, r)
}

fn check_sum_depth(depth: u32) -> Result<()> {
    if depth == 0 || depth > MAX_FAMILY_DEPTH {
        return invalid(format!("depth must lie in 1..={MAX_FAMILY_DEPTH}"));
    }
    Ok(())
}

/// Dyadic cells of level `≤ depth` carrying atoms, with their masses, and the
/// mass left outside them.
fn occupied_cells(mu: &DiscMeasure, depth: u32) -> Result<(BTreeMap<DyadicSquare, f64>, f64, f64)> {
    let mut cells = BTreeMap::new();
    let mut boundary = 0.0;
    let mut deeper = 0.0;
    for a in mu.atoms() {
        if a.on_circle() {
            boundary += a.mass;
            continue;
        }
        let cell = dyadic_locate(a.point)?;
        if cell.level > depth {
            deeper += a.mass;
            continue;
        }
        *cells.entry(cell).or_insert(0.0) += a.mass;
    }
    boundary += mu.density().iter().map(|p| p.density * p.arc.measure()).sum::<f64>();
    Ok((cells, boundary, deeper))
}

/// Per-level sums of `(2ⁿ μ(R))^{r/2}` over occupied cells accepted by `select`.
fn dyadic_sum<F>(criterion: CriterionId, params: Parameters, mu: &DiscMeasure, r: f64, depth: u32, mut select: F) -> Result<CriterionSum>
where
    F: FnMut(&DyadicSquare) -> Result<Decision>,
{
    check_r(r)?;
    check_sum_depth(depth)?;
    let (occupied, boundary, deeper) = occupied_cells(mu, depth)?;
    let mut per_level = vec![0.0; depth as usize];
    let mut cells = Vec::new();
    let mut undecided = Vec::new();
    for (cell, mass) in occupied {
        let term = (2f64.powi(cell.level as i32) * mass).powf(0.5 * r);
        let ct = CellTerm { cell, mass, term };
        match select(&cell)? {
            Decision::Within => {
                per_level[(cell.level - 1) as usize] += term;
                cells.push(ct);
            }
            Decision::Undecided(_) => undecided.push(ct),
            Decision::Beyond => {}
        }
    }
    let mut sum = CriterionSum::new(criterion, params, "level", per_level.clone(), per_level);
    sum.cells = cells;
    sum.undecided = undecided;
    if boundary > 0.0 {
        sum.notes.push(format!("boundary mass {boundary} is not carried by any dyadic cell"));
    }
    if deeper > 0.0 {
        sum.notes.push(format!("mass {deeper} lies in cells deeper than the depth"));
    }
    if !sum.undecided.is_empty() {
        sum.notes.push(format!("{} occupied cells could not be certified", sum.undecided.len()));
    }
    Ok(sum)
}

/// `Σ (2ⁿ μ(R_{n,m}))^{r/2}` over cells meeting `Ω(Θ, ε)`.
pub fn schatten_necessary_sum(theta: &InnerFunction, eps: f64, mu: &DiscMeasure, r: f64, depth: u32) -> Result<CriterionSum> {
    let params = Parameters { epsilon: Some(eps), r: Some(r), depth: Some(depth), ..Default::default() };
    dyadic_sum(CriterionId::SchattenNecessary, params, mu, r, depth, |c| classify_cell(theta, eps, c, CellMode::MeetsLevelSet))
}

/// `Σ (2ⁿ μ(R_{n,m}))^{r/2}` over all cells.
pub fn luecking_sum(mu: &DiscMeasure, r: f64, depth: u32) -> Result<CriterionSum> {
    let params = Parameters { r: Some(r), depth: Some(depth), ..Default::default() };
    dyadic_sum(CriterionId::Luecking, params, mu, r, depth, |_| Ok(Decision::Within))
}

/// `Σ (2ⁿ μ(R_{n,m}))^{r/2}` over cells with `dist(R, Ω(Θ, ε)) ≤ A·2^{-n}`.
pub fn thm54_family_sum(theta: &InnerFunction, eps: f64, a: f64, mu: &DiscMeasure, r: f64, depth: u32) -> Result<CriterionSum> {
    if !(a > 0.0 && a.is_finite()) {
        return invalid("A must be finite and positive");
    }
    let params = Parameters { epsilon: Some(eps), r: Some(r), a: Some(a), depth: Some(depth), ..Default::default() };
    dyadic_sum(CriterionId::Thm54Family, params, mu, r, depth, |c| classify_cell(theta, eps, c, CellMode::WithinScaled { a }))
}

/// Combined Schatten criterion for an inner function declared to be in CLS:
/// the Whitney sum as the sufficient side, the dyadic sum over cells meeting
/// the level set as the necessary side, cross-checked against the spectral
/// oracle when `Θ` is a finite Blaschke product.
pub fn check_thm14(
    theta: &InnerFunction,
    eps: f64,
    mu: &DiscMeasure,
    r: f64,
    depth: u32,
    tol: f64,
    cls_declared: bool,
) -> Result<(ConditionReport, CriterionSum, CriterionSum)> {
    if !(r >= 1.0 && r.is_finite()) {
        return invalid("thm14 needs finite r ≥ 1");
    }
    let sufficient = schatten_sufficient_sum(theta, eps, mu, r, tol)?;
    let necessary = schatten_necessary_sum(theta, eps, mu, r, depth)?;
    let params = Parameters {
        epsilon: Some(eps),
        r: Some(r),
        depth: Some(depth),
        tol: Some(tol),
        cls_declared: Some(cls_declared),
        ..Default::default()
    };
    let mut report = ConditionReport::new(CriterionId::Thm14, params);
    report.profile.insert("sufficient_partial_sums".into(), sufficient.partial_sums.clone());
    report.profile.insert("necessary_partial_sums".into(), necessary.partial_sums.clone());
    report.diagnostics.insert("sufficient_sum".into(), sufficient.value);
    report.diagnostics.insert("necessary_sum".into(), necessary.value);
    if !cls_declared {
        report.notes.push("Θ not declared CLS: the equivalence does not apply".into());
    }
    if theta.atoms().is_empty() && theta.zeros().len() <= MAX_TM_DIM {
        let gram = embedding_gram(&theta.finite_part()?, mu, tol)?;
        let spec = singular_values(&gram, &[r])?;
        report.diagnostics.insert("oracle_schatten".into(), spec.schatten[&r_key(r)]);
        report.diagnostics.insert("oracle_dimension".into(), gram.dim() as f64);
    }
    let boundary_at_spectrum = mu.atoms().iter().any(|a| a.on_circle() && theta.spectrum_distance(a.point) <= 1e-12);
    if boundary_at_spectrum {
        report.notes.push("boundary atoms at spectrum points: neither sum sees this mass".into());
        report.verdict = Verdict::Inconclusive;
    } else if necessary.convergence == Convergence::Diverging {
        let last = necessary.blocks.len() - 1;
        let prev = necessary.blocks[..last].iter().copied().fold(0.0, f64::max);
        let cell = necessary.cells.iter().filter(|c| c.cell.level as usize == last + 1).max_by(|a, b| a.term.total_cmp(&b.term)).copied();
        match cell {
            Some(c) => report.fails(Witness {
                square: WitnessSquare::Dyadic(c.cell),
                ratio: 2f64.powi(c.cell.level as i32) * c.mass,
                threshold: (0.75 * prev).powf(2.0 / r),
                measure: "mu",
                delta: None,
            }),
            None => report.verdict = Verdict::Inconclusive,
        }
    } else if sufficient.fully_covered() && theta.boundary_spectrum_angles().is_empty() {
        report.notes.push("empty boundary spectrum: the Whitney sum is a finite sum".into());
        report.holds();
    } else if sufficient.convergence == Convergence::Converging && sufficient.fully_covered() {
        report.holds();
    } else {
        report.verdict = Verdict::Inconclusive;
    }
    Ok((report, sufficient, necessary))
}
