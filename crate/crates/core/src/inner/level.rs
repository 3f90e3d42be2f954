//! Certified search over the level set `Ω(Θ, ε) = {|Θ| < ε}`.
//!
//! The disc is explored with a quadtree of polar cells. Each cell gets an
//! enclosure of `|Θ|` from two independent bounds, intersected:
//!
//! * Schwarz–Pick: `Θ` does not increase pseudo-hyperbolic distances, so the
//!   value at the cell centre pins `|Θ|` on the whole cell;
//! * factor-wise bounds for every Blaschke factor and every singular atom,
//!   which stay sharp up to the unit circle.
//!
//! Cells whose enclosure lies above `ε` are discarded; the rest are refined in
//! order of their distance to the target until the bracket closes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::InnerFunction;
use crate::error::{invalid, Error, Result};

/// Hard cap on processed cells per search.
pub const DEFAULT_BUDGET: usize = 1 << 24;

const ROUNDING_SLACK: f64 = 1e-13;

/// Certified interval `[lo, hi]` containing a distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn exact(v: f64) -> Self {
        Self { lo: v, hi: v }
    }
}

/// Sets whose Euclidean distance to a point can be computed exactly.
pub trait DistanceTarget {
    fn distance_to(&self, z: Complex64) -> f64;

    /// A point of the target worth testing first.
    fn probe(&self) -> Option<Complex64> {
        None
    }

    /// Closest point of the target to `z`, when cheaply available.
    fn nearest_point(&self, _z: Complex64) -> Option<Complex64> {
        None
    }
}

impl DistanceTarget for Complex64 {
    fn distance_to(&self, z: Complex64) -> f64 {
        (self - z).norm()
    }

    fn probe(&self) -> Option<Complex64> {
        (self.norm() < 1.0).then_some(*self)
    }

    fn nearest_point(&self, _z: Complex64) -> Option<Complex64> {
        Some(*self)
    }
}

/// Outcome of a threshold query `dist(target, Ω) ≤ threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decision {
    Within,
    Beyond,
    Undecided(Bracket),
}

/// Result of [`LevelSet::nearest`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nearest {
    pub bracket: Bracket,
    pub point: Option<Complex64>,
    pub value: f64,
}

/// A quadtree cell straddling the level curve `|Θ| = ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StraddleCell {
    pub x: f64,
    pub y: f64,
    pub cell_size: f64,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    r0: f64,
    r1: f64,
    p0: f64,
    p1: f64,
    center: Complex64,
    radius: f64,
}

impl Cell {
    fn new(r0: f64, r1: f64, p0: f64, p1: f64) -> Self {
        let rm = 0.5 * (r0 + r1);
        let pm = 0.5 * (p0 + p1);
        let half_arc = (0.5 * (p1 - p0)).min(2.0);
        let mut center = Complex64::from_polar(rm, pm);
        let mut radius = 0.5 * (r1 - r0) + rm * half_arc;
        if r1 < radius {
            center = Complex64::new(0.0, 0.0);
            radius = r1;
        }
        Self { r0, r1, p0, p1, center, radius }
    }

    fn split(&self) -> [Cell; 4] {
        let rm = 0.5 * (self.r0 + self.r1);
        let pm = 0.5 * (self.p0 + self.p1);
        [
            Cell::new(self.r0, rm, self.p0, pm),
            Cell::new(self.r0, rm, pm, self.p1),
            Cell::new(rm, self.r1, self.p0, pm),
            Cell::new(rm, self.r1, pm, self.p1),
        ]
    }

    fn splittable(&self) -> bool {
        self.radius > 1e-15 && 0.5 * (self.r0 + self.r1) > self.r0 && 0.5 * (self.p0 + self.p1) > self.p0
    }
}

struct Item {
    lower: f64,
    cell: Cell,
}

impl PartialEq for Item {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Item {}
impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Item {
    // Min-heap on the lower bound, ties broken by position for determinism.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .lower
            .total_cmp(&self.lower)
            .then_with(|| other.cell.r0.total_cmp(&self.cell.r0))
            .then_with(|| other.cell.p0.total_cmp(&self.cell.p0))
    }
}

impl InnerFunction {
    /// Enclosure `[lo, hi]` of `|Θ|` on `D(c, r) ∩ closed disc`.
    pub fn modulus_enclosure(&self, c: Complex64, r: f64) -> (f64, f64) {
        let mut lo = 1.0f64;
        let mut hi = 1.0f64;
        for &a in self.zeros() {
            let num = (a - c).norm();
            let den = (1.0 - a.conj() * c).norm();
            let ar = a.norm() * r;
            lo *= (num - r).max(0.0) / (den + ar);
            if den - ar > 0.0 {
                hi *= ((num + r) / (den - ar)).min(1.0);
            }
        }
        if !self.atoms().is_empty() {
            let inner = (c.norm() - r).max(0.0);
            let outer = (c.norm() + r).min(1.0);
            for atom in self.atoms() {
                let dz = (atom.point() - c).norm();
                let p_hi = if dz > r { (1.0 - inner * inner) / ((dz - r) * (dz - r)) } else { f64::INFINITY };
                let p_lo = (1.0 - outer * outer) / ((dz + r) * (dz + r));
                lo *= (-atom.mass * p_hi).exp();
                hi *= (-atom.mass * p_lo).exp();
            }
        }
        let rc = c.norm();
        if rc + r < 1.0 {
            let delta = r / (1.0 - rc * (rc + r));
            if delta < 1.0 {
                let t = self.modulus(c);
                let sp_lo = if t > delta { (t - delta) / (1.0 - t * delta) } else { 0.0 };
                let sp_hi = (t + delta) / (1.0 + t * delta);
                lo = lo.max(sp_lo);
                hi = hi.min(sp_hi);
            }
        }
        ((lo - ROUNDING_SLACK).max(0.0), (hi + ROUNDING_SLACK).min(1.0))
    }
}

/// Certified geometry of `Ω(Θ, ε)`.
#[derive(Debug, Clone, Copy)]
pub struct LevelSet<'a> {
    theta: &'a InnerFunction,
    eps: f64,
    budget: usize,
    boundary_spectrum: bool,
}

impl<'a> LevelSet<'a> {
    pub fn new(theta: &'a InnerFunction, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return invalid(format!("epsilon {eps} must lie in (0, 1)"));
        }
        Ok(Self { theta, eps, budget: DEFAULT_BUDGET, boundary_spectrum: true })
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    /// Distances are taken to `closure(Ω) ∪ (σ(Θ) ∩ T)` by default; this
    /// switch drops the declared boundary spectrum and searches `Ω` alone.
    pub fn without_boundary_spectrum(mut self) -> Self {
        self.boundary_spectrum = false;
        self
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    pub fn inner(&self) -> &InnerFunction {
        self.theta
    }

    fn seeds(&self) -> Vec<Complex64> {
        let mut s: Vec<Complex64> = self.theta.zeros().to_vec();
        if self.boundary_spectrum {
            s.extend(self.theta.boundary_spectrum_angles().iter().map(|&t| Complex64::from_polar(1.0, t)));
        }
        s
    }

    fn roots() -> [Cell; 4] {
        let q = 0.5 * PI;
        [
            Cell::new(0.0, 1.0, 0.0, q),
            Cell::new(0.0, 1.0, q, 2.0 * q),
            Cell::new(0.0, 1.0, 2.0 * q, 3.0 * q),
            Cell::new(0.0, 1.0, 3.0 * q, 4.0 * q),
        ]
    }

    fn in_level_set(&self, z: Complex64) -> bool {
        z.norm() < 1.0 && self.theta.modulus(z) < self.eps
    }

    /// Certified bracket for `dist(target, closure Ω)` with width at most `tol`.
    pub fn distance<T: DistanceTarget + ?Sized>(&self, target: &T, tol: f64) -> Result<Bracket> {
        if !(tol > 0.0) {
            return invalid("tolerance must be positive");
        }
        self.search(target, tol, 0.0)
    }

    /// Bracket of width at most `max(abs_tol, rel_tol · hi)`.
    pub fn distance_relative<T: DistanceTarget + ?Sized>(&self, target: &T, rel_tol: f64, abs_tol: f64) -> Result<Bracket> {
        if !(rel_tol > 0.0 && abs_tol > 0.0) {
            return invalid("tolerances must be positive");
        }
        self.search(target, abs_tol, rel_tol)
    }

    fn search<T: DistanceTarget + ?Sized>(&self, target: &T, abs_tol: f64, rel_tol: f64) -> Result<Bracket> {
        self.search_with_witness(target, abs_tol, rel_tol).map(|(b, _)| b)
    }

    /// Search that also returns a point of `closure Ω` realizing the upper end.
    fn search_with_witness<T: DistanceTarget + ?Sized>(
        &self,
        target: &T,
        abs_tol: f64,
        rel_tol: f64,
    ) -> Result<(Bracket, Option<Complex64>)> {
        let width = |hi: f64| if hi.is_finite() { abs_tol.max(rel_tol * hi) } else { abs_tol };
        let mut hi = f64::INFINITY;
        let mut witness = None;
        let offer = |z: Complex64, hi: &mut f64, witness: &mut Option<Complex64>| {
            let d = target.distance_to(z);
            if d < *hi {
                *hi = d;
                *witness = Some(z);
            }
        };
        for z in self.seeds() {
            offer(z, &mut hi, &mut witness);
        }
        if let Some(p) = target.probe() {
            if self.in_level_set(p) {
                offer(p, &mut hi, &mut witness);
            }
        }
        let mut heap = BinaryHeap::new();
        for cell in Self::roots() {
            let lower = (target.distance_to(cell.center) - cell.radius).max(0.0);
            heap.push(Item { lower, cell });
        }
        let mut stuck = f64::INFINITY;
        // Smallest lower bound among cells dropped as already within tolerance.
        let mut pruned = f64::INFINITY;
        let mut processed = 0usize;
        while let Some(top) = heap.peek() {
            if top.lower >= hi - width(hi) {
                break;
            }
            let Item { lower, cell } = heap.pop().expect("peeked");
            processed += 1;
            if processed > self.budget {
                return Err(Error::ResolutionExhausted { budget: self.budget, tol: width(hi) });
            }
            let (mlo, _) = self.theta.modulus_enclosure(cell.center, cell.radius);
            if mlo > self.eps {
                continue;
            }
            if self.in_level_set(cell.center) {
                offer(cell.center, &mut hi, &mut witness);
            }
            if !cell.splittable() {
                stuck = stuck.min(lower);
                continue;
            }
            for child in cell.split() {
                let l = (target.distance_to(child.center) - child.radius).max(0.0);
                if l < hi - width(hi) {
                    heap.push(Item { lower: l, cell: child });
                } else {
                    pruned = pruned.min(l);
                }
            }
        }
        let lo = heap.peek().map_or(hi, |t| t.lower).min(hi).min(stuck).min(pruned);
        if lo < hi - width(hi) {
            return Err(Error::ResolutionExhausted { budget: self.budget, tol: width(hi) });
        }
        Ok((Bracket { lo, hi }, witness))
    }

    /// Distance from `p` to `closure Ω` with a coarse certified bracket, sharpened
    /// by moving the witness onto the level curve and sliding it to the local
    /// nearest point. The returned value is the distance to a point of the
    /// closure, so it never falls below the true distance.
    pub fn nearest(&self, p: Complex64, rel_tol: f64) -> Result<Nearest> {
        let (bracket, witness) = self.search_with_witness(&p, 1e-15, rel_tol)?;
        let Some(w) = witness else {
            return Ok(Nearest { bracket, point: None, value: bracket.hi });
        };
        if let Some(z) = self.polish(p, w) {
            let v = (z - p).norm();
            if v <= bracket.hi && v >= bracket.lo - 1e-12 {
                return Ok(Nearest { bracket: Bracket { lo: bracket.lo.min(v), hi: v }, point: Some(z), value: v });
            }
        }
        Ok(Nearest { bracket, point: Some(w), value: bracket.hi })
    }

    /// Alternating Newton projection onto `log|Θ| = log ε` and tangential
    /// slide toward `p`. `None` when the iteration leaves the disc or stalls.
    fn polish(&self, p: Complex64, start: Complex64) -> Option<Complex64> {
        if start.norm() >= 1.0 {
            return None;
        }
        let level = self.eps.ln();
        let project = |z: Complex64| -> Option<Complex64> {
            let mut z = z;
            for _ in 0..30 {
                let u = 0.5 * self.theta.log_modulus_sq(z) - level;
                let g = self.theta.log_derivative(z).conj();
                let gn = g.norm_sqr();
                if !u.is_finite() || !(gn > 0.0) || !gn.is_finite() {
                    return None;
                }
                let step = g * (u / gn);
                // Long steps are unreliable far from the curve.
                let step = if step.norm() > 0.1 * (1.0 - z.norm()).max(1e-3) {
                    step * (0.1 * (1.0 - z.norm()).max(1e-3) / step.norm())
                } else {
                    step
                };
                z -= step;
                if z.norm() >= 1.0 {
                    return None;
                }
                if step.norm() <= 1e-16 * z.norm().max(1e-3) {
                    break;
                }
            }
            let u = 0.5 * self.theta.log_modulus_sq(z) - level;
            (u.abs() <= 1e-12).then_some(z)
        };
        let tangent = |z: Complex64| {
            let g = self.theta.log_derivative(z).conj();
            Complex64::i() * g / g.norm()
        };
        // Secant on arc length for the zero of `(z - p) · t`.
        let mut z = project(start)?;
        let mut t = tangent(z);
        let mut f = ((z - p) * t.conj()).re;
        let mut sigma = -f;
        for _ in 0..100 {
            if sigma.abs() <= 1e-15 {
                break;
            }
            let z1 = project(z + t * sigma)?;
            let t1 = tangent(z1);
            let f1 = ((z1 - p) * t1.conj()).re;
            let slope = (f1 - f) / sigma;
            if !(slope.abs() > 0.0 && slope.is_finite()) {
                break;
            }
            let cap = (z1 - p).norm();
            sigma = (-f1 / slope).clamp(-cap, cap);
            z = z1;
            t = t1;
            f = f1;
        }
        Some(z)
    }

    /// Decides `dist(target, Ω) ≤ threshold` without resolving the distance
    /// further than needed. `threshold = 0` asks whether the target meets `Ω`.
    pub fn decide<T: DistanceTarget + ?Sized>(&self, target: &T, threshold: f64) -> Decision {
        let mut hi = self.seeds().iter().map(|&z| target.distance_to(z)).fold(f64::INFINITY, f64::min);
        if let Some(p) = target.probe() {
            if self.in_level_set(p) {
                hi = hi.min(target.distance_to(p));
            }
        }
        if hi <= threshold {
            return Decision::Within;
        }
        let mut heap = BinaryHeap::new();
        for cell in Self::roots() {
            let lower = (target.distance_to(cell.center) - cell.radius).max(0.0);
            if lower <= threshold {
                heap.push(Item { lower, cell });
            }
        }
        let mut processed = 0usize;
        let mut stuck = f64::INFINITY;
        while let Some(Item { lower, cell }) = heap.pop() {
            processed += 1;
            if processed > self.budget {
                return Decision::Undecided(Bracket { lo: lower.min(stuck), hi });
            }
            let (mlo, _) = self.theta.modulus_enclosure(cell.center, cell.radius);
            if mlo > self.eps {
                continue;
            }
            if self.in_level_set(cell.center) {
                hi = hi.min(target.distance_to(cell.center));
                if hi <= threshold {
                    return Decision::Within;
                }
            }
            if let Some(q) = target.nearest_point(cell.center) {
                if (q - cell.center).norm() <= cell.radius && self.in_level_set(q) {
                    hi = hi.min(target.distance_to(q));
                    if hi <= threshold {
                        return Decision::Within;
                    }
                }
            }
            if !cell.splittable() {
                stuck = stuck.min(lower);
                continue;
            }
            for child in cell.split() {
                let l = (target.distance_to(child.center) - child.radius).max(0.0);
                if l <= threshold {
                    heap.push(Item { lower: l, cell: child });
                }
            }
        }
        if stuck <= threshold {
            Decision::Undecided(Bracket { lo: stuck, hi })
        } else {
            Decision::Beyond
        }
    }

    /// Cartesian quadtree cells of side at most `cell_size` on which the
    /// enclosure of `|Θ|` contains `ε`, in deterministic (row-major by
    /// subdivision) order.
    pub fn straddling_cells(&self, cell_size: f64) -> Result<Vec<StraddleCell>> {
        if !(cell_size > 0.0) {
            return invalid("cell size must be positive");
        }
        let mut out = Vec::new();
        let mut stack = vec![(0.0f64, 0.0f64, 2.0f64)];
        let mut processed = 0usize;
        while let Some((x, y, size)) = stack.pop() {
            processed += 1;
            if processed > self.budget {
                return Err(Error::ResolutionExhausted { budget: self.budget, tol: cell_size });
            }
            let c = Complex64::new(x, y);
            let r = size * std::f64::consts::FRAC_1_SQRT_2;
            if c.norm() - r > 1.0 {
                continue;
            }
            let (mlo, mhi) = self.theta.modulus_enclosure(c, r);
            if mlo > self.eps || mhi < self.eps {
                continue;
            }
            if size <= cell_size {
                out.push(StraddleCell { x, y, cell_size: size });
                continue;
            }
            let q = 0.25 * size;
            let h = 0.5 * size;
            // Pushed in reverse so that cells pop in a fixed order.
            for (dx, dy) in [(q, q), (-q, q), (q, -q), (-q, -q)] {
                stack.push((x + dx, y + dy, h));
            }
        }
        Ok(out)
    }
}

/// Certified bracket of `d_ε(p) = dist(p, Ω(Θ, ε))` with width at most `tol`.
/// Points of the declared boundary spectrum belong to the closure of `Ω`.
pub fn level_distance(theta: &InnerFunction, eps: f64, p: Complex64, tol: f64) -> Result<Bracket> {
    if p.norm() > 1.0 + super::CIRCLE_TOL {
        return Err(Error::OutsideDisc(format!("{p}")));
    }
    LevelSet::new(theta, eps)?.distance(&p, tol)
}
