//! Finite Borel measures on the closed disc: atoms plus piecewise-constant
//! densities against normalized arc measure, and their Carleson functionals
//! over the dyadic-anchored arc family.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{angle_offset, Arc, DyadicSquare, FamilyArc, GenericSquare, WhitneyDecomposition, MAX_FAMILY_DEPTH};
use crate::inner::CIRCLE_TOL;

const TWO_PI: f64 = 2.0 * PI;

/// Tag recorded in every report: `|I|` is Euclidean arc length.
pub const LENGTH_CONVENTION: &str = "lenE";

/// Any arc lies in a family arc at most 4 times longer, so family suprema are
/// within this factor of the suprema over all arcs.
pub const FAMILY_COVER_FACTOR: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDoc {
    pub re: f64,
    pub im: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityDoc {
    pub start: f64,
    pub end: f64,
    pub density: f64,
}

/// Measure document as read from a config file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    #[serde(default)]
    pub atoms: Vec<AtomDoc>,
    #[serde(default)]
    pub boundary_density: Vec<DensityDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureAtom {
    pub point: Complex64,
    pub mass: f64,
}

impl MeasureAtom {
    pub fn on_circle(&self) -> bool {
        self.point.norm() == 1.0
    }
}

/// Constant `density` against `dm` on `arc`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityPiece {
    pub arc: Arc,
    pub density: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DiscMeasure {
    atoms: Vec<MeasureAtom>,
    density: Vec<DensityPiece>,
}

/// Intersection of two arcs as a list of arcs.
pub fn arc_intersection(a: &Arc, b: &Arc) -> Vec<Arc> {
    let o = angle_offset(b.start(), a.start());
    let mut out = Vec::new();
    for shift in [o - TWO_PI, o] {
        let lo = shift.max(0.0);
        let hi = (shift + b.length()).min(a.length());
        if hi > lo {
            if let Ok(arc) = Arc::with_length(a.start() + lo, hi - lo) {
                out.push(arc);
            }
        }
    }
    out
}

impl DiscMeasure {
    /// Validates atoms (closed disc, positive mass) and density pieces
    /// (non-negative, pairwise disjoint interiors). Atoms within `CIRCLE_TOL`
    /// of the circle are placed on it.
    pub fn new(atoms: Vec<MeasureAtom>, density: Vec<DensityPiece>) -> Result<Self> {
        let mut out_atoms = Vec::with_capacity(atoms.len());
        for (i, a) in atoms.into_iter().enumerate() {
            let r = a.point.norm();
            if !r.is_finite() || r > 1.0 + CIRCLE_TOL {
                return invalid(format!("atoms[{i}]: point {} outside the closed disc", a.point));
            }
            if !(a.mass > 0.0 && a.mass.is_finite()) {
                return invalid(format!("atoms[{i}]: mass must be positive"));
            }
            let point = if (1.0 - r).abs() <= CIRCLE_TOL { a.point / r } else { a.point };
            out_atoms.push(MeasureAtom { point, mass: a.mass });
        }
        for (i, p) in density.iter().enumerate() {
            if !(p.density >= 0.0 && p.density.is_finite()) {
                return invalid(format!("boundary_density[{i}]: density must be non-negative"));
            }
            for (j, q) in density.iter().enumerate().skip(i + 1) {
                if p.arc.overlap_measure(&q.arc) > 1e-12 {
                    return invalid(format!("boundary_density[{i}] and [{j}] overlap"));
                }
            }
        }
        let density = density.into_iter().filter(|p| p.density > 0.0).collect();
        Ok(Self { atoms: out_atoms, density })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// Normalized arc measure `m` times `c`.
    pub fn uniform(c: f64) -> Result<Self> {
        Self::new(vec![], vec![DensityPiece { arc: Arc::with_length(0.0, TWO_PI)?, density: c }])
    }

    pub fn point_mass(point: Complex64, mass: f64) -> Result<Self> {
        Self::new(vec![MeasureAtom { point, mass }], vec![])
    }

    pub fn atomic(atoms: &[(Complex64, f64)]) -> Result<Self> {
        Self::new(atoms.iter().map(|&(point, mass)| MeasureAtom { point, mass }).collect(), vec![])
    }

    pub fn from_spec(spec: &MeasureSpec) -> Result<Self> {
        let atoms = spec.atoms.iter().map(|a| MeasureAtom { point: Complex64::new(a.re, a.im), mass: a.mass }).collect();
        let mut density = Vec::new();
        for (i, d) in spec.boundary_density.iter().enumerate() {
            let arc = Arc::new(d.start, d.end).map_err(|e| crate::Error::InvalidInput(format!("boundary_density[{i}]: {e}")))?;
            density.push(DensityPiece { arc, density: d.density });
        }
        Self::new(atoms, density)
    }

    pub fn to_spec(&self) -> MeasureSpec {
        MeasureSpec {
            atoms: self.atoms.iter().map(|a| AtomDoc { re: a.point.re, im: a.point.im, mass: a.mass }).collect(),
            boundary_density: self
                .density
                .iter()
                .map(|p| DensityDoc { start: p.arc.start(), end: p.arc.end(), density: p.density })
                .collect(),
        }
    }

    pub fn atoms(&self) -> &[MeasureAtom] {
        &self.atoms
    }

    pub fn density(&self) -> &[DensityPiece] {
        &self.density
    }

    pub fn is_atomic(&self) -> bool {
        self.density.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.density.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        let a: f64 = self.atoms.iter().map(|a| a.mass).sum();
        let d: f64 = self.density.iter().map(|p| p.density * p.arc.measure()).sum();
        a + d
    }

    /// Density mass `∫_I ρ dm` of an arc.
    pub fn density_on_arc(&self, arc: &Arc) -> f64 {
        self.density.iter().map(|p| p.density * p.arc.overlap_measure(arc)).sum()
    }

    /// `μ(S)` for a closed generic square; only squares reaching the circle
    /// collect boundary density.
    pub fn mass_on_square(&self, s: &GenericSquare) -> f64 {
        let atoms: f64 = self.atoms.iter().filter(|a| s.contains(a.point)).map(|a| a.mass).sum::<f64>() + 0.0;
        if s.is_carleson() {
            atoms + self.density_on_arc(&s.angular_arc())
        } else {
            atoms
        }
    }

    /// `μ(R)` for a half-open dyadic cell (never meets the circle).
    pub fn mass_on_dyadic(&self, cell: &DyadicSquare) -> f64 {
        self.atoms.iter().filter(|a| cell.contains(a.point)).map(|a| a.mass).sum::<f64>() + 0.0
    }

    /// `μ(S(I)) / |I|` for a family arc.
    pub fn family_ratio(&self, f: &FamilyArc) -> f64 {
        let arc = f.arc();
        self.mass_on_square(&f.square()) / arc.length()
    }

    /// Restriction to a set given by a point predicate and a list of arcs
    /// carrying the retained density.
    pub fn restrict<P: Fn(Complex64) -> bool>(&self, keep: P, arcs: &[Arc]) -> Self {
        let atoms = self.atoms.iter().filter(|a| keep(a.point)).copied().collect();
        let mut density = Vec::new();
        for p in &self.density {
            for a in arcs {
                for arc in arc_intersection(&p.arc, a) {
                    density.push(DensityPiece { arc, density: p.density });
                }
            }
        }
        Self { atoms, density }
    }

    /// `μ|_{H_δ}` with `H_δ = {z: dist(z, {e^{it}: t ∈ angles}) < δ}`.
    pub fn restrict_near(&self, angles: &[f64], delta: f64) -> Self {
        let pts: Vec<Complex64> = angles.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
        let near = |z: Complex64| pts.iter().any(|p| (z - p).norm() < delta);
        let arcs: Vec<Arc> = if delta >= 2.0 {
            if angles.is_empty() {
                vec![]
            } else {
                vec![Arc::with_length(0.0, TWO_PI).expect("full circle")]
            }
        } else {
            let half = 2.0 * (0.5 * delta).asin();
            merge_arcs(angles.iter().filter_map(|&t| Arc::centered(t, 2.0 * half).ok()).collect())
        };
        self.restrict(near, &arcs)
    }

    /// Split `μ = μ|_F + μ|_G` along a Whitney decomposition.
    pub fn split_whitney(&self, w: &WhitneyDecomposition) -> (Self, Self) {
        let f_arcs: Vec<Arc> = w.arcs.iter().map(|a| a.arc).collect();
        let f = self.restrict(|z| w.in_f(z), &f_arcs);
        let g = self.restrict(|z| !w.in_f(z), &w.excluded);
        (f, g)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            atoms: self.atoms.iter().map(|a| MeasureAtom { point: a.point, mass: a.mass * c }).collect(),
            density: self.density.iter().map(|p| DensityPiece { arc: p.arc, density: p.density * c }).collect(),
        }
    }

    /// Family arcs at `level` whose ratio can be positive, plus one
    /// representative of the arcs lying inside each density piece. The family
    /// supremum at this level is attained on this list.
    pub fn candidate_arcs(&self, level: u32) -> Vec<FamilyArc> {
        let depth_radius = 1.0 - 2f64.powi(-(level as i32));
        let mut out = Vec::new();
        for a in &self.atoms {
            if a.point.norm() >= depth_radius - 1e-12 {
                out.extend(FamilyArc::containing(level, a.point.arg()));
            }
        }
        let count = 1u64 << level;
        let len = TWO_PI / count as f64;
        for p in &self.density {
            out.extend(FamilyArc::containing(level, p.arc.start()));
            out.extend(FamilyArc::containing(level, p.arc.end()));
            for shifted in [false, true] {
                let off = if shifted { 0.5 } else { 0.0 };
                let first = (p.arc.start() / len - off).ceil() as i64;
                let mut tries = 0;
                let mut j = first;
                while tries < self.atoms.len() + 2 {
                    let f = FamilyArc { level, index: j.rem_euclid(count as i64) as u64, shifted };
                    let arc = f.arc();
                    if (p.arc.overlap_measure(&arc) - arc.measure()).abs() > 1e-15 {
                        break;
                    }
                    if !self.atoms.iter().any(|a| f.square().contains(a.point)) {
                        out.push(f);
                        break;
                    }
                    j += 1;
                    tries += 1;
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

fn merge_arcs(mut arcs: Vec<Arc>) -> Vec<Arc> {
    arcs.sort_by(|a, b| a.start().total_cmp(&b.start()));
    let mut out: Vec<Arc> = Vec::new();
    for a in arcs {
        if let Some(last) = out.last_mut() {
            if a.start() <= last.end() {
                let end = a.end().max(last.end());
                *last = Arc::new(last.start(), end.min(last.start() + TWO_PI)).expect("merged arc");
                continue;
            }
        }
        out.push(a);
    }
    // A final arc may wrap onto the first one.
    if out.len() > 1 {
        let last = *out.last().expect("non-empty");
        if last.end() >= out[0].start() + TWO_PI {
            let first = out.remove(0);
            let end = (first.end() + TWO_PI).max(last.end());
            let n = out.len();
            out[n - 1] = Arc::new(last.start(), end.min(last.start() + TWO_PI)).expect("merged arc");
        }
    }
    out
}

/// Lower-bound estimate of the Carleson constant `M_μ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CarlesonEstimate {
    pub value: f64,
    pub witness: Option<FamilyArc>,
    pub depth: u32,
    /// Largest ratio among family arcs of each level `1..=depth`.
    pub per_level: Vec<f64>,
    pub convention: &'static str,
    pub cover_factor: f64,
}

/// Largest ratio per level over a list of family arcs; returns the maxima and
/// the first arc attaining each.
pub fn level_maxima(mu: &DiscMeasure, arcs: &[FamilyArc], depth: u32) -> (Vec<f64>, Vec<Option<FamilyArc>>) {
    let mut best = vec![0.0f64; depth as usize];
    let mut arg: Vec<Option<FamilyArc>> = vec![None; depth as usize];
    let mut sorted: Vec<&FamilyArc> = arcs.iter().filter(|f| f.level >= 1 && f.level <= depth).collect();
    sorted.sort();
    for f in sorted {
        let r = mu.family_ratio(f);
        let slot = (f.level - 1) as usize;
        if r > best[slot] {
            best[slot] = r;
            arg[slot] = Some(*f);
        }
    }
    (best, arg)
}

fn check_depth(depth: u32) -> Result<()> {
    if depth == 0 || depth > MAX_FAMILY_DEPTH {
        return invalid(format!("depth must lie in 1..={MAX_FAMILY_DEPTH}"));
    }
    Ok(())
}

/// `max μ(S(I))/|I|` over family arcs of levels `1..=depth`.
pub fn carleson_constant(mu: &DiscMeasure, depth: u32) -> Result<CarlesonEstimate> {
    check_depth(depth)?;
    let arcs: Vec<FamilyArc> = (1..=depth).flat_map(|k| mu.candidate_arcs(k)).collect();
    let (per_level, arg) = level_maxima(mu, &arcs, depth);
    let mut value = 0.0;
    let mut witness = None;
    for (k, &v) in per_level.iter().enumerate() {
        if v > value {
            value = v;
            witness = arg[k];
        }
    }
    Ok(CarlesonEstimate { value, witness, depth, per_level, convention: LENGTH_CONVENTION, cover_factor: FAMILY_COVER_FACTOR })
}

/// Absolute level below which a ratio profile counts as vanishing.
pub const VANISHING_THRESHOLD: f64 = 1e-3;

/// `η(δ) = max{μ(S(I))/|I| : I in the family, |I| ≤ δ}` on `δ_k = 2π/2^k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CarlesonProfile {
    pub deltas: Vec<f64>,
    pub eta: Vec<f64>,
    /// Arc attaining `η` at each `δ`.
    pub witnesses: Vec<Option<FamilyArc>>,
    pub depth: u32,
    pub threshold: f64,
    pub consistent_with_vanishing: bool,
    pub convention: &'static str,
    pub cover_factor: f64,
}

/// Profile from per-level maxima (suffix maxima over deeper levels).
pub fn profile_from_levels(per_level: &[f64], arg: &[Option<FamilyArc>], threshold: f64) -> CarlesonProfile {
    let depth = per_level.len();
    let mut eta = vec![0.0; depth];
    let mut witnesses = vec![None; depth];
    let mut run = 0.0f64;
    let mut run_arg = None;
    for k in (0..depth).rev() {
        if per_level[k] >= run && per_level[k] > 0.0 {
            run = per_level[k];
            run_arg = arg[k];
        }
        eta[k] = run;
        witnesses[k] = run_arg;
    }
    let deltas = (1..=depth).map(|k| TWO_PI / 2f64.powi(k as i32)).collect();
    let consistent_with_vanishing = eta.last().is_some_and(|&e| e <= threshold);
    CarlesonProfile {
        deltas,
        eta,
        witnesses,
        depth: depth as u32,
        threshold,
        consistent_with_vanishing,
        convention: LENGTH_CONVENTION,
        cover_factor: FAMILY_COVER_FACTOR,
    }
}

pub fn vanishing_profile(mu: &DiscMeasure, depth: u32) -> Result<CarlesonProfile> {
    check_depth(depth)?;
    let arcs: Vec<FamilyArc> = (1..=depth).flat_map(|k| mu.candidate_arcs(k)).collect();
    let (per_level, arg) = level_maxima(mu, &arcs, depth);
    Ok(profile_from_levels(&per_level, &arg, VANISHING_THRESHOLD))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{carleson_square, dyadic_locate};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Brute-force family maximum at one level.
    fn brute_level(mu: &DiscMeasure, level: u32) -> f64 {
        FamilyArc::level_arcs(level).map(|f| mu.family_ratio(&f)).fold(0.0, f64::max)
    }

    #[test]
    fn mass_on_square_examples() {
        let sq = carleson_square(&Arc::centered(0.0, 0.2 * PI).unwrap()).unwrap();
        let mu = DiscMeasure::point_mass(c(0.9, 0.0), 1.0).unwrap();
        assert_eq!(mu.mass_on_square(&sq), 1.0);
        let m = DiscMeasure::uniform(1.0).unwrap();
        assert!((m.mass_on_square(&sq) - 0.1).abs() < 1e-15);
        let z = Complex64::from_polar(0.9, PI);
        let mu = DiscMeasure::point_mass(z, 1.0).unwrap();
        let cell = dyadic_locate(z).unwrap();
        assert_eq!(cell, DyadicSquare { level: 4, index: 8 });
        let total: f64 = (0..16).map(|m| mu.mass_on_dyadic(&DyadicSquare { level: 4, index: m })).sum();
        assert_eq!(total, 1.0);
        assert_eq!(m.mass_on_dyadic(&cell), 0.0);
    }

    #[test]
    fn carleson_constant_examples() {
        let m = DiscMeasure::uniform(1.0).unwrap();
        for depth in [1, 5, 12] {
            let est = carleson_constant(&m, depth).unwrap();
            assert!((est.value - 1.0 / TWO_PI).abs() < 1e-12, "{}", est.value);
            assert_eq!(est.convention, "lenE");
        }
        let d1 = DiscMeasure::point_mass(c(1.0, 0.0), 1.0).unwrap();
        let e8 = carleson_constant(&d1, 8).unwrap().value;
        let e16 = carleson_constant(&d1, 16).unwrap().value;
        assert!((e8 - 256.0 / TWO_PI).abs() < 1e-9);
        assert!((e16 / e8 - 256.0).abs() < 1e-9);
        assert_eq!(carleson_constant(&DiscMeasure::zero(), 10).unwrap().value, 0.0);
    }

    #[test]
    fn candidates_attain_family_maximum() {
        let mu = DiscMeasure::new(
            vec![
                MeasureAtom { point: Complex64::from_polar(0.97, 1.0), mass: 0.02 },
                MeasureAtom { point: Complex64::from_polar(1.0, 4.0), mass: 0.001 },
                MeasureAtom { point: c(0.3, 0.1), mass: 0.5 },
            ],
            vec![
                DensityPiece { arc: Arc::new(0.5, 2.0).unwrap(), density: 0.3 },
                DensityPiece { arc: Arc::new(5.0, 6.7).unwrap(), density: 1.7 },
            ],
        )
        .unwrap();
        for level in 1..=9 {
            let sparse = mu.candidate_arcs(level).iter().map(|f| mu.family_ratio(f)).fold(0.0, f64::max);
            let brute = brute_level(&mu, level);
            assert!((sparse - brute).abs() <= 1e-12 * brute.max(1.0), "level {level}: {sparse} vs {brute}");
        }
    }

    #[test]
    fn vanishing_profile_examples() {
        let m = DiscMeasure::uniform(1.0).unwrap();
        let p = vanishing_profile(&m, 10).unwrap();
        assert!(p.eta.iter().all(|&e| (e - 1.0 / TWO_PI).abs() < 1e-12));
        assert!(!p.consistent_with_vanishing);

        let mu = DiscMeasure::point_mass(c(0.5, 0.0), 1.0).unwrap();
        let p = vanishing_profile(&mu, 10).unwrap();
        assert!((p.eta[0] - 1.0 / PI).abs() < 1e-12);
        assert!(p.eta[1..].iter().all(|&e| e == 0.0));

        let atoms: Vec<(Complex64, f64)> = (1..=20).map(|k| (c(1.0 - 0.5f64.powi(k), 0.0), 0.25f64.powi(k))).collect();
        let mu = DiscMeasure::atomic(&atoms).unwrap();
        let p = vanishing_profile(&mu, 18).unwrap();
        assert!(p.consistent_with_vanishing);
        for w in p.eta.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn restriction_near_points() {
        let mu = DiscMeasure::new(
            vec![MeasureAtom { point: c(0.99, 0.0), mass: 1.0 }, MeasureAtom { point: c(-0.5, 0.0), mass: 2.0 }],
            vec![DensityPiece { arc: Arc::with_length(0.0, TWO_PI).unwrap(), density: 1.0 }],
        )
        .unwrap();
        let r = mu.restrict_near(&[0.0], 0.1);
        assert_eq!(r.atoms().len(), 1);
        let half = 2.0 * (0.05f64).asin();
        assert!((r.total_mass() - 1.0 - 2.0 * half / TWO_PI).abs() < 1e-12);
        assert!(mu.restrict_near(&[], 0.5).is_zero());
    }
}
