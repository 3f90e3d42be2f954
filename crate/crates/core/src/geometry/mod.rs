//! Arcs of the unit circle, generic/Carleson/dyadic squares and the Whitney
//! arcs of a level set.
//!
//! Lengths are Euclidean arc lengths throughout: `|I| = 2π · m(I)`.

mod whitney;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::inner::{Decision, DistanceTarget, InnerFunction, LevelSet};

pub use whitney::{whitney_decompose, whitney_decompose_with, WhitneyArc, WhitneyDecomposition, WhitneyOptions, WHITNEY_THRESHOLD};

const TWO_PI: f64 = 2.0 * PI;

/// Slack used for membership in closed sets.
pub const CLOSED_SLACK: f64 = 1e-12;

/// Offset of angle `t` from `start`, in `[0, 2π)`.
pub fn angle_offset(t: f64, start: f64) -> f64 {
    let d = (t - start).rem_euclid(TWO_PI);
    if d >= TWO_PI {
        0.0
    } else {
        d
    }
}

/// Counterclockwise arc `[start, start + length]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    start: f64,
    length: f64,
}

impl Arc {
    /// Arc from `start` to `end` counterclockwise; `end` may exceed `2π`.
    pub fn new(start: f64, end: f64) -> Result<Self> {
        Self::with_length(start, end - start)
    }

    pub fn with_length(start: f64, length: f64) -> Result<Self> {
        if !(start.is_finite() && length > 0.0 && length <= TWO_PI) {
            return invalid(format!("arc length {length} must lie in (0, 2π]"));
        }
        Ok(Self { start: angle_offset(start, 0.0), length })
    }

    pub fn centered(center: f64, length: f64) -> Result<Self> {
        Self::with_length(center - 0.5 * length, length)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.start + self.length
    }

    /// Euclidean arc length `|I|`.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Normalized measure `m(I) = |I| / 2π`.
    pub fn measure(&self) -> f64 {
        self.length / TWO_PI
    }

    pub fn mid_angle(&self) -> f64 {
        angle_offset(self.start + 0.5 * self.length, 0.0)
    }

    pub fn midpoint(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.mid_angle())
    }

    /// Closed membership of an angle.
    pub fn contains_angle(&self, t: f64) -> bool {
        let d = angle_offset(t, self.start);
        d <= self.length + CLOSED_SLACK || d >= TWO_PI - CLOSED_SLACK
    }

    /// Membership in the open arc.
    pub fn interior_contains_angle(&self, t: f64) -> bool {
        let d = angle_offset(t, self.start);
        d > CLOSED_SLACK && d < self.length - CLOSED_SLACK
    }

    /// Normalized measure of the intersection with another arc.
    pub fn overlap_measure(&self, other: &Arc) -> f64 {
        // Lift `other` to start within one turn after `self.start` and also test
        // the copy one turn earlier.
        let o = angle_offset(other.start, self.start);
        let mut total = 0.0;
        for shift in [o - TWO_PI, o, o + TWO_PI] {
            let lo = shift.max(0.0);
            let hi = (shift + other.length).min(self.length);
            if hi > lo {
                total += hi - lo;
            }
        }
        total.min(self.length.min(other.length)) / TWO_PI
    }

    pub fn polar(&self, radius_lo: f64, radius_hi: f64) -> PolarRect {
        PolarRect { r0: radius_lo, r1: radius_hi, start: self.start, width: self.length }
    }
}

impl DistanceTarget for Arc {
    fn distance_to(&self, z: Complex64) -> f64 {
        self.polar(1.0, 1.0).distance_to(z)
    }
}

/// Closed annular sector `{ρe^{iφ}: r0 ≤ ρ ≤ r1, φ ∈ [start, start + width]}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarRect {
    pub r0: f64,
    pub r1: f64,
    pub start: f64,
    pub width: f64,
}

fn segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (z - (a + ab * t)).norm()
}

impl PolarRect {
    pub fn contains(&self, z: Complex64, slack: f64) -> bool {
        let rho = z.norm();
        if rho < self.r0 - slack || rho > self.r1 + slack {
            return false;
        }
        if rho == 0.0 || self.width >= TWO_PI {
            return true;
        }
        let d = angle_offset(z.arg(), self.start);
        d <= self.width + slack || d >= TWO_PI - slack
    }
}

impl DistanceTarget for PolarRect {
    fn distance_to(&self, z: Complex64) -> f64 {
        let rho = z.norm();
        let radial = if rho < self.r0 {
            self.r0 - rho
        } else if rho > self.r1 {
            rho - self.r1
        } else {
            0.0
        };
        if rho == 0.0 || self.width >= TWO_PI {
            return radial;
        }
        let d = angle_offset(z.arg(), self.start);
        if d <= self.width {
            return radial;
        }
        let e0 = Complex64::from_polar(1.0, self.start);
        let e1 = Complex64::from_polar(1.0, self.start + self.width);
        segment_distance(z, e0 * self.r0, e0 * self.r1).min(segment_distance(z, e1 * self.r0, e1 * self.r1))
    }

    fn nearest_point(&self, z: Complex64) -> Option<Complex64> {
        let rho = z.norm().clamp(self.r0, self.r1);
        if z.norm() == 0.0 || self.width >= TWO_PI {
            return Some(Complex64::from_polar(rho, if z.norm() == 0.0 { self.start } else { z.arg() }));
        }
        let d = angle_offset(z.arg(), self.start);
        if d <= self.width {
            return Some(Complex64::from_polar(rho, z.arg()));
        }
        let candidates = [self.start, self.start + self.width].map(|t| {
            let e = Complex64::from_polar(1.0, t);
            let s = ((z * e.conj()).re).clamp(self.r0, self.r1);
            e * s
        });
        candidates.into_iter().min_by(|a, b| (a - z).norm().total_cmp(&(b - z).norm()))
    }

    fn probe(&self) -> Option<Complex64> {
        let r = 0.5 * (self.r0 + self.r1);
        (r < 1.0).then(|| Complex64::from_polar(r, self.start + 0.5 * self.width))
    }
}

/// `S(h0, φ0, h) = {ρe^{iφ}: h0 - h/2π ≤ ρ ≤ h0, φ0 ≤ φ ≤ φ0 + h}`, closed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenericSquare {
    pub h0: f64,
    pub phi0: f64,
    pub h: f64,
}

impl GenericSquare {
    pub fn new(h0: f64, phi0: f64, h: f64) -> Result<Self> {
        if !(h0 > 0.0 && h0 <= 1.0) {
            return invalid(format!("square: h0 = {h0} must lie in (0, 1]"));
        }
        if !(h > 0.0 && h < TWO_PI * h0) {
            return invalid(format!("square: side {h} must lie in (0, 2π h0)"));
        }
        Ok(Self { h0, phi0: angle_offset(phi0, 0.0), h })
    }

    pub fn inner_radius(&self) -> f64 {
        self.h0 - self.h / TWO_PI
    }

    /// Angular extent, which is also the arc `J(S)` carried to the circle.
    pub fn angular_arc(&self) -> Arc {
        Arc { start: self.phi0, length: self.h }
    }

    /// Euclidean length of the lower side `J(S)` at radius `h0`.
    pub fn lower_side_length(&self) -> f64 {
        self.h0 * self.h
    }

    pub fn is_carleson(&self) -> bool {
        self.h0 == 1.0
    }

    pub fn region(&self) -> PolarRect {
        PolarRect { r0: self.inner_radius(), r1: self.h0, start: self.phi0, width: self.h }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.region().contains(z, CLOSED_SLACK)
    }
}

/// Carleson square `S(I)` of an arc shorter than the circle.
pub fn carleson_square(arc: &Arc) -> Result<GenericSquare> {
    if arc.length() >= TWO_PI {
        return invalid("Carleson square: the arc must be shorter than the full circle");
    }
    GenericSquare::new(1.0, arc.start(), arc.length())
}

/// Dyadic cell `R_{n,m}`: `1 - 2^{1-n} ≤ ρ < 1 - 2^{-n}`, `πm/2^{n-1} ≤ φ < π(m+1)/2^{n-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicSquare {
    pub level: u32,
    pub index: u64,
}

/// Deepest supported dyadic level.
pub const MAX_DYADIC_LEVEL: u32 = 30;

impl DyadicSquare {
    pub fn new(level: u32, index: u64) -> Result<Self> {
        if level == 0 || level > MAX_DYADIC_LEVEL {
            return invalid(format!("dyadic level {level} must lie in 1..={MAX_DYADIC_LEVEL}"));
        }
        if index >= 1u64 << level {
            return invalid(format!("dyadic index {index} out of range at level {level}"));
        }
        Ok(Self { level, index })
    }

    pub fn radii(&self) -> (f64, f64) {
        let n = self.level as i32;
        (1.0 - 2f64.powi(1 - n), 1.0 - 2f64.powi(-n))
    }

    pub fn angular_width(&self) -> f64 {
        PI / 2f64.powi(self.level as i32 - 1)
    }

    pub fn angles(&self) -> (f64, f64) {
        let w = self.angular_width();
        (w * self.index as f64, w * (self.index + 1) as f64)
    }

    /// Half-open membership as in the definition.
    pub fn contains(&self, z: Complex64) -> bool {
        let rho = z.norm();
        let (r0, r1) = self.radii();
        if !(rho >= r0 && rho < r1) {
            return false;
        }
        let (a0, a1) = self.angles();
        let phi = if rho == 0.0 { 0.0 } else { angle_offset(z.arg(), 0.0) };
        phi >= a0 && phi < a1
    }

    /// Closure of the cell.
    pub fn closure(&self) -> PolarRect {
        let (r0, r1) = self.radii();
        PolarRect { r0, r1, start: self.angles().0, width: self.angular_width() }
    }

    /// Closure of the union of this cell and all its descendants.
    pub fn sector(&self) -> PolarRect {
        PolarRect { r0: self.radii().0, r1: 1.0, start: self.angles().0, width: self.angular_width() }
    }

    pub fn children(&self) -> [DyadicSquare; 2] {
        [DyadicSquare { level: self.level + 1, index: 2 * self.index }, DyadicSquare { level: self.level + 1, index: 2 * self.index + 1 }]
    }
}

/// Dyadic cell containing an interior point.
pub fn dyadic_locate(z: Complex64) -> Result<DyadicSquare> {
    let rho = z.norm();
    if !(rho < 1.0) {
        return invalid("dyadic_locate: point must be interior");
    }
    // Largest n with 1 - 2^{1-n} ≤ ρ, corrected for rounding at the seams.
    let mut level = if rho == 0.0 { 1 } else { ((-(1.0 - rho).log2()).floor() as i64 + 1).clamp(1, 64) as u32 };
    loop {
        let n = level as i32;
        if rho < 1.0 - 2f64.powi(1 - n) && level > 1 {
            level -= 1;
        } else if rho >= 1.0 - 2f64.powi(-n) {
            level += 1;
        } else {
            break;
        }
    }
    if level > MAX_DYADIC_LEVEL {
        return invalid(format!("point lies deeper than dyadic level {MAX_DYADIC_LEVEL}"));
    }
    let phi = if rho == 0.0 { 0.0 } else { angle_offset(z.arg(), 0.0) };
    let w = PI / 2f64.powi(level as i32 - 1);
    let mut index = (phi / w).floor() as u64;
    let count = 1u64 << level;
    if index >= count {
        index = count - 1;
    }
    while index > 0 && phi < w * index as f64 {
        index -= 1;
    }
    while index + 1 < count && phi >= w * (index + 1) as f64 {
        index += 1;
    }
    Ok(DyadicSquare { level, index })
}

/// Selection rule for [`dyadic_cells_meeting`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum CellMode {
    /// `R_{n,m} ∩ Ω(Θ, ε) ≠ ∅`.
    MeetsLevelSet,
    /// `dist(R_{n,m}, Ω(Θ, ε)) ≤ A · 2^{-n}`.
    WithinScaled { a: f64 },
}

/// Certified cell list plus the cells whose status could not be decided.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CellSelection {
    pub cells: Vec<DyadicSquare>,
    pub undecided: Vec<DyadicSquare>,
}

/// Per-query budget for cell and square classification.
pub const CLASSIFY_BUDGET: usize = 1 << 18;

/// Classifies one dyadic cell.
pub fn classify_cell(theta: &InnerFunction, eps: f64, cell: &DyadicSquare, mode: CellMode) -> Result<Decision> {
    let ls = LevelSet::new(theta, eps)?.with_budget(CLASSIFY_BUDGET);
    Ok(match mode {
        CellMode::MeetsLevelSet => ls.without_boundary_spectrum().decide(&cell.closure(), 0.0),
        CellMode::WithinScaled { a } => ls.decide(&cell.closure(), a * 2f64.powi(-(cell.level as i32))),
    })
}

/// Every dyadic cell of level at most `max_level` satisfying `mode`, found by
/// descending through sectors: a sector that fails the test rules out all of
/// its descendants.
pub fn dyadic_cells_meeting(theta: &InnerFunction, eps: f64, max_level: u32, mode: CellMode) -> Result<CellSelection> {
    if max_level == 0 || max_level > MAX_DYADIC_LEVEL {
        return invalid(format!("max_level must lie in 1..={MAX_DYADIC_LEVEL}"));
    }
    if let CellMode::WithinScaled { a } = mode {
        if !(a > 0.0) {
            return invalid("A must be positive");
        }
    }
    let ls = LevelSet::new(theta, eps)?.with_budget(CLASSIFY_BUDGET);
    let mut out = CellSelection::default();
    let mut frontier = vec![DyadicSquare { level: 1, index: 0 }, DyadicSquare { level: 1, index: 1 }];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for cell in frontier {
            let (sector_ls, threshold) = match mode {
                CellMode::MeetsLevelSet => (ls.without_boundary_spectrum(), 0.0),
                CellMode::WithinScaled { a } => (ls, a * 2f64.powi(-(cell.level as i32))),
            };
            if sector_ls.decide(&cell.sector(), threshold) == Decision::Beyond {
                continue;
            }
            match sector_ls.decide(&cell.closure(), threshold) {
                Decision::Within => out.cells.push(cell),
                Decision::Undecided(_) => out.undecided.push(cell),
                Decision::Beyond => {}
            }
            if cell.level < max_level {
                next.extend(cell.children());
            }
        }
        frontier = next;
    }
    out.cells.sort();
    out.undecided.sort();
    Ok(out)
}

/// Member of the dyadic-anchored arc family: at level `k` the arcs
/// `[2πj/2^k, 2π(j+1)/2^k]` and their shifts by half a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FamilyArc {
    pub level: u32,
    pub index: u64,
    pub shifted: bool,
}

/// Deepest level of the arc family.
pub const MAX_FAMILY_DEPTH: u32 = 24;

impl FamilyArc {
    pub fn arc(&self) -> Arc {
        let length = TWO_PI / 2f64.powi(self.level as i32);
        let offset = if self.shifted { 0.5 } else { 0.0 };
        Arc { start: angle_offset(length * (self.index as f64 + offset), 0.0), length }
    }

    pub fn square(&self) -> GenericSquare {
        let a = self.arc();
        GenericSquare { h0: 1.0, phi0: a.start, h: a.length }
    }

    /// Family members of the next level contained in this arc.
    pub fn children(&self) -> Vec<FamilyArc> {
        let level = self.level + 1;
        let count = 1u64 << level;
        let j = self.index;
        let pick = |index: u64, shifted: bool| FamilyArc { level, index: index % count, shifted };
        if self.shifted {
            vec![pick(2 * j + 1, false), pick(2 * j + 2, false), pick(2 * j + 1, true)]
        } else {
            vec![pick(2 * j, false), pick(2 * j + 1, false), pick(2 * j, true)]
        }
    }

    /// Family members at `level` whose closed arc contains angle `t`.
    pub fn containing(level: u32, t: f64) -> Vec<FamilyArc> {
        let count = 1u64 << level;
        let cells = angle_offset(t, 0.0) / TWO_PI * count as f64;
        let mut out = Vec::new();
        for shifted in [false, true] {
            let base = (cells - if shifted { 0.5 } else { 0.0 }).floor() as i64;
            for j in [base - 1, base, base + 1] {
                let f = FamilyArc { level, index: j.rem_euclid(count as i64) as u64, shifted };
                if f.arc().contains_angle(t) && !out.contains(&f) {
                    out.push(f);
                }
            }
        }
        out
    }

    /// Family members at `level` whose arc meets the closed arc `span`.
    pub fn overlapping(level: u32, span: &Arc) -> Vec<FamilyArc> {
        let count = 1u64 << level;
        let len = TWO_PI / count as f64;
        let first = (span.start() / len).floor() as i64 - 1;
        let last = (span.end() / len).ceil() as i64 + 1;
        let mut out = Vec::new();
        if (last - first) as u64 >= count {
            for j in 0..count {
                out.push(FamilyArc { level, index: j, shifted: false });
                out.push(FamilyArc { level, index: j, shifted: true });
            }
            return out;
        }
        for j in first..=last {
            for shifted in [false, true] {
                let f = FamilyArc { level, index: j.rem_euclid(count as i64) as u64, shifted };
                if f.arc().overlap_measure(span) > 0.0 || span.contains_angle(f.arc().start()) {
                    out.push(f);
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    pub fn level_arcs(level: u32) -> impl Iterator<Item = FamilyArc> {
        (0..1u64 << level).flat_map(move |index| [FamilyArc { level, index, shifted: false }, FamilyArc { level, index, shifted: true }])
    }
}

/// Certified test `S(I) ∩ Ω(Θ, ε) ≠ ∅`. A boundary-spectrum point strictly
/// inside `I` counts as meeting, since such points lie in the closure of `Ω`
/// and `S(I)` contains a full neighbourhood of them in the disc.
pub fn square_meets_level_set(ls: &LevelSet<'_>, arc: &Arc) -> Decision {
    if ls.inner().boundary_spectrum_angles().iter().any(|&t| arc.interior_contains_angle(t)) {
        return Decision::Within;
    }
    let region = arc.polar(1.0 - arc.measure(), 1.0);
    ls.without_boundary_spectrum().decide(&region, 0.0)
}

/// Family arcs up to `depth` whose Carleson squares meet `Ω(Θ, ε)`, with the
/// undecided ones listed separately. Children are only examined below
/// meeting (or undecided) parents, which is exact because `S(child) ⊂ S(parent)`.
pub fn family_meeting(theta: &InnerFunction, eps: f64, depth: u32) -> Result<(Vec<FamilyArc>, Vec<FamilyArc>)> {
    if depth == 0 || depth > MAX_FAMILY_DEPTH {
        return invalid(format!("depth must lie in 1..={MAX_FAMILY_DEPTH}"));
    }
    let ls = LevelSet::new(theta, eps)?.with_budget(CLASSIFY_BUDGET);
    let mut meets = Vec::new();
    let mut undecided = Vec::new();
    let mut frontier: Vec<FamilyArc> = FamilyArc::level_arcs(1).collect();
    for level in 1..=depth {
        let mut next = Vec::new();
        for f in frontier {
            match square_meets_level_set(&ls, &f.arc()) {
                Decision::Within => meets.push(f),
                Decision::Undecided(_) => undecided.push(f),
                Decision::Beyond => continue,
            }
            if level < depth {
                next.extend(f.children());
            }
        }
        next.sort();
        next.dedup();
        frontier = next;
    }
    meets.sort();
    undecided.sort();
    Ok((meets, undecided))
}
