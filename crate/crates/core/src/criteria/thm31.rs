//! Square-family conditions `(so)`, `(sd)` and the bounded/compact ratio
//! conditions on a supplied family of squares.

use num_complex::Complex64;
use serde::Serialize;

use super::{growth_trend, ConditionReport, CriterionId, Parameters, Trend, Witness, WitnessSquare, GROWTH_FACTOR};
use crate::error::{invalid, Result};
use crate::geometry::{Arc, GenericSquare};
use crate::inner::InnerFunction;
use crate::kernels::kernel_norm;
use crate::measure::{carleson_constant, DensityPiece, DiscMeasure, MeasureAtom};
use crate::quad::{integrate, QuadOptions};

use super::TWO_PI;

/// Atoms used to represent arc length on a lower side inside the disc.
pub const LOWER_SIDE_NODES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thm31Options {
    pub p: f64,
    pub r: f64,
    pub depth: u32,
    pub tol: f64,
    /// Threshold `C` for `μ(S_k) ≤ C|J_k|`; defaults to `2^{depth/2}`.
    pub bounded_threshold: Option<f64>,
}

impl Thm31Options {
    pub fn new(p: f64, r: f64, depth: u32) -> Self {
        Self { p, r, depth, tol: 1e-6, bounded_threshold: None }
    }

    fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p.is_finite()) {
            return invalid("p must be finite and greater than 1");
        }
        if !(self.r > 1.0 && self.r < self.p) {
            return invalid("r must lie in (1, p)");
        }
        if !(self.tol > 0.0) {
            return invalid("tol must be positive");
        }
        super::check_depth(self.depth)?;
        super::check_threshold(self.bounded_threshold)
    }

    fn params(&self) -> Parameters {
        Parameters {
            p: Some(self.p),
            r: Some(self.r),
            depth: Some(self.depth),
            tol: Some(self.tol),
            threshold: self.bounded_threshold,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thm31Report {
    pub so: ConditionReport,
    pub sd: ConditionReport,
    pub bounded: ConditionReport,
    pub compact: ConditionReport,
}

/// Arc length on the lower sides `Σ_k δ_{J_k}`: density `2π·multiplicity` for
/// sides on the circle, evenly spaced atoms for sides inside the disc.
pub fn lower_side_measure(squares: &[GenericSquare]) -> Result<DiscMeasure> {
    let boundary: Vec<Arc> = squares.iter().filter(|s| s.is_carleson()).map(|s| s.angular_arc()).collect();
    let mut cuts: Vec<f64> = boundary.iter().flat_map(|a| [a.start(), a.end().rem_euclid(TWO_PI)]).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let mut density = Vec::new();
    for (i, &t0) in cuts.iter().enumerate() {
        let t1 = if i + 1 < cuts.len() { cuts[i + 1] } else { cuts[0] + TWO_PI };
        if t1 - t0 <= 1e-15 {
            continue;
        }
        let mid = 0.5 * (t0 + t1);
        let count = boundary.iter().filter(|a| a.interior_contains_angle(mid)).count();
        if count > 0 {
            density.push(DensityPiece { arc: Arc::new(t0, t1)?, density: TWO_PI * count as f64 });
        }
    }
    let mut atoms = Vec::new();
    for s in squares.iter().filter(|s| !s.is_carleson()) {
        let mass = s.lower_side_length() / LOWER_SIDE_NODES as f64;
        for j in 0..LOWER_SIDE_NODES {
            let phi = s.phi0 + s.h * (j as f64 + 0.5) / LOWER_SIDE_NODES as f64;
            atoms.push(MeasureAtom { point: Complex64::from_polar(s.h0, phi), mass });
        }
    }
    DiscMeasure::new(atoms, density)
}

/// `|J|·(∫_J w_r^{-q} dm)^{p/q}` with `w_r = ‖k_z²‖_{r'}^{-r/(r+1)}`.
fn sd_term(theta: &InnerFunction, s: &GenericSquare, o: &Thm31Options) -> Result<f64> {
    let q = o.p / (o.p - 1.0);
    let r_conj = o.r / (o.r - 1.0);
    let exponent = q * o.r / (o.r + 1.0);
    let opts = QuadOptions::with_tol(0.0, o.tol);
    let integral = integrate(
        |phi: f64| -> Result<f64> {
            let norm = kernel_norm(theta, Complex64::from_polar(s.h0, phi), r_conj, 2, o.tol)?;
            Ok(norm.powf(exponent))
        },
        &[s.phi0, s.phi0 + s.h],
        opts,
    )?;
    let mean = integral.value / TWO_PI;
    Ok(s.lower_side_length() * mean.powf(o.p / q))
}

/// Squares ordered by decreasing lower side, ties in input order.
fn by_size(squares: &[GenericSquare]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..squares.len()).collect();
    idx.sort_by(|&a, &b| squares[b].lower_side_length().total_cmp(&squares[a].lower_side_length()));
    idx
}

fn generic_witness(s: &GenericSquare, ratio: f64, threshold: f64, measure: &'static str) -> Witness {
    Witness { square: WitnessSquare::Generic(*s), ratio, threshold, measure, delta: None }
}

/// Conditions `(so)`, `(sd)` and the ratio conditions `μ(S_k) ≤ C|J_k|` and
/// `μ(S_k) = o(|J_k|)` on a family of squares.
pub fn check_thm31(theta: &InnerFunction, squares: &[GenericSquare], mu: &DiscMeasure, opts: &Thm31Options) -> Result<Thm31Report> {
    opts.validate()?;
    if squares.is_empty() {
        return invalid("thm31 needs at least one square");
    }
    let params = opts.params();
    let order = by_size(squares);

    let mut so = ConditionReport::new(CriterionId::Thm31So, params.clone());
    let nu = lower_side_measure(squares)?;
    let est = carleson_constant(&nu, opts.depth)?;
    so.diagnostics.insert("carleson_estimate".into(), est.value);
    so.profile.insert("per_level_max".into(), est.per_level.clone());
    match growth_trend(&est.per_level) {
        Trend::Stable => so.holds(),
        Trend::Growing { level, threshold } => {
            let arcs: Vec<_> = (1..=opts.depth).flat_map(|k| nu.candidate_arcs(k)).collect();
            let (_, arg) = crate::measure::level_maxima(&nu, &arcs, opts.depth);
            so.fails(Witness::family(&arg[level].expect("attained"), &nu, threshold, "lower_sides"));
        }
        Trend::Unclear => so.notes.push("lower-side Carleson estimate still rising".into()),
    }

    let mut sd = ConditionReport::new(CriterionId::Thm31Sd, params.clone());
    let terms: Vec<f64> = order.iter().map(|&i| sd_term(theta, &squares[i], opts)).collect::<Result<_>>()?;
    sd.profile.insert("term".into(), terms.clone());
    sd.diagnostics.insert("sup".into(), terms.iter().copied().fold(0.0, f64::max));
    if let Some(pos) = terms.iter().position(|t| !t.is_finite()) {
        sd.fails(generic_witness(&squares[order[pos]], f64::INFINITY, f64::MAX, "mu"));
    } else {
        let half = terms.len().div_ceil(2);
        let head = terms[..half].iter().copied().fold(0.0, f64::max);
        let tail = terms[half..].iter().copied().fold(0.0, f64::max);
        if tail <= GROWTH_FACTOR * head {
            sd.holds();
        } else {
            sd.notes.push("terms grow along the smaller squares".into());
        }
    }

    let ratios: Vec<f64> = order.iter().map(|&i| mu.mass_on_square(&squares[i]) / squares[i].lower_side_length()).collect();
    let lengths: Vec<f64> = order.iter().map(|&i| squares[i].lower_side_length()).collect();

    let mut bounded = ConditionReport::new(CriterionId::Thm31Bounded, params.clone());
    let c = opts.bounded_threshold.unwrap_or(2f64.powf(0.5 * opts.depth as f64));
    bounded.parameters.threshold = Some(c);
    bounded.profile.insert("lower_side".into(), lengths.clone());
    bounded.profile.insert("ratio".into(), ratios.clone());
    bounded.diagnostics.insert("sup".into(), ratios.iter().copied().fold(0.0, f64::max));
    match ratios.iter().position(|&v| v > c) {
        Some(k) => bounded.fails(generic_witness(&squares[order[k]], ratios[k], c, "mu")),
        None => bounded.holds(),
    }

    let mut compact = ConditionReport::new(CriterionId::Thm31Compact, params);
    compact.profile.insert("lower_side".into(), lengths);
    compact.profile.insert("ratio".into(), ratios.clone());
    let n = ratios.len();
    let head_max = ratios[..n.div_ceil(2)].iter().copied().fold(0.0, f64::max);
    let tail_start = n - (n / 4).max(1);
    let (tail_pos, tail_max) =
        ratios[tail_start..].iter().enumerate().fold((0, 0.0f64), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    compact.diagnostics.insert("head_max".into(), head_max);
    compact.diagnostics.insert("tail_max".into(), tail_max);
    if tail_max == 0.0 || (n >= 4 && tail_max <= 0.25 * head_max) {
        compact.holds();
    } else if n >= 4 && tail_max > 0.5 * head_max {
        let k = tail_start + tail_pos;
        compact.fails(generic_witness(&squares[order[k]], ratios[k], 0.5 * head_max, "mu"));
    } else {
        compact.notes.push("ratios on the smallest squares are neither small nor persistent".into());
    }

    Ok(Thm31Report { so, sd, bounded, compact })
}
