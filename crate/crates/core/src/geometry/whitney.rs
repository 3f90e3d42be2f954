//! Whitney-type arcs for the complement of the boundary spectrum.
//!
//! Arcs are marched counterclockwise through each component of
//! `T ∖ σ(Θ)`; each arc is the longest one with
//! `∫_I d_ε^{-1} dm = τ_W = 1/(8π)`. The mean value of `d_ε^{-1}` on such an
//! arc is `1/(4|I|)`, and `d_ε` is 1-Lipschitz, so `3|I| ≤ d_ε ≤ 5|I|` on `I`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::{angle_offset, Arc, GenericSquare, CLOSED_SLACK};
use crate::error::{invalid, Error, Result};
use crate::inner::{Bracket, InnerFunction, LevelSet};
use crate::quad::{gk15, integrate_panels, QuadOptions};

/// `τ_W`, the value of `∫_I d_ε^{-1} dm` on every threshold-exact arc.
pub const WHITNEY_THRESHOLD: f64 = 1.0 / (8.0 * PI);

const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WhitneyOptions {
    /// Upper bound on the width of each per-arc distance bracket.
    pub tol: f64,
    /// Angular radius of the neighbourhood of each boundary-spectrum point
    /// left uncovered.
    pub exclusion: f64,
    /// Relative accuracy of pointwise `d_ε` evaluations inside the quadrature.
    pub point_rel_tol: f64,
    /// Relative accuracy of the arc integrals.
    pub quad_rel_tol: f64,
}

impl WhitneyOptions {
    pub fn new(tol: f64) -> Self {
        Self { tol, exclusion: tol, point_rel_tol: 5e-2, quad_rel_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WhitneyArc {
    pub k: usize,
    pub arc: Arc,
    /// Bracket of `dist(I, Ω(Θ, ε))`.
    pub d: Bracket,
    pub threshold_exact: bool,
    /// Computed `∫_I d_ε^{-1} dm`.
    pub integral: f64,
}

impl WhitneyArc {
    pub fn square(&self) -> GenericSquare {
        GenericSquare { h0: 1.0, phi0: self.arc.start(), h: self.arc.length() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WhitneyDecomposition {
    pub epsilon: f64,
    pub options: WhitneyOptions,
    /// Arcs in marching order; components in increasing start angle.
    pub arcs: Vec<WhitneyArc>,
    /// Neighbourhoods of boundary-spectrum points left uncovered.
    pub excluded: Vec<Arc>,
    /// Measured `sup dist(z/|z|, Ω) / (1 - |z|)` over `z ∈ G` above the arcs.
    pub g_constant: f64,
    /// The same supremum restricted to threshold-exact arcs.
    pub g_constant_exact: f64,
}

impl WhitneyDecomposition {
    /// `z ∈ F = ∪ S(I_k)` (closed squares).
    pub fn in_f(&self, z: Complex64) -> bool {
        self.arcs.iter().any(|a| a.square().contains(z))
    }

    pub fn threshold_exact_count(&self) -> usize {
        self.arcs.iter().filter(|a| a.threshold_exact).count()
    }

    /// `Σ_k m(I_k)`.
    pub fn covered_measure(&self) -> f64 {
        self.arcs.iter().map(|a| a.arc.measure()).sum()
    }

    /// Index of an arc whose closure contains angle `t`.
    pub fn arc_containing(&self, t: f64) -> Option<usize> {
        self.arcs.iter().position(|a| a.arc.contains_angle(t))
    }

    /// CSV rows `k,start_angle,end_angle,d_lo,d_hi,threshold_exact`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,start_angle,end_angle,d_lo,d_hi,threshold_exact\n");
        for a in &self.arcs {
            out.push_str(&format!("{},{},{},{},{},{}\n", a.k, a.arc.start(), a.arc.end(), a.d.lo, a.d.hi, a.threshold_exact));
        }
        out
    }
}

/// Uncovered components `[start, end]` of the circle (`end` may exceed `2π`).
fn components(spectrum: &[f64], exclusion: f64) -> Vec<(f64, f64)> {
    if spectrum.is_empty() {
        return vec![(0.0, TWO_PI)];
    }
    let mut out = Vec::new();
    for (i, &t) in spectrum.iter().enumerate() {
        let next = if i + 1 < spectrum.len() { spectrum[i + 1] } else { spectrum[0] + TWO_PI };
        let (a, b) = (t + exclusion, next - exclusion);
        if b - a > CLOSED_SLACK {
            out.push((a, b));
        }
    }
    out.sort_by(|x, y| angle_offset(x.0, 0.0).total_cmp(&angle_offset(y.0, 0.0)));
    out
}

struct Marcher<'a> {
    ls: LevelSet<'a>,
    opts: WhitneyOptions,
}

/// Cumulative `∫ d_ε^{-1} dm` along one component, stored panel by panel.
struct Cumulative {
    panels: Vec<(f64, f64)>,
    /// `prefix[i]` is the integral from the component start to `panels[i].0`.
    prefix: Vec<f64>,
    total: f64,
}

impl Marcher<'_> {
    fn d(&self, t: f64) -> Result<f64> {
        let p = Complex64::from_polar(1.0, t);
        Ok(self.ls.nearest(p, self.opts.point_rel_tol)?.value)
    }

    fn g(&self, t: f64) -> Result<f64> {
        Ok(1.0 / (TWO_PI * self.d(t)?))
    }

    fn cumulative(&self, start: f64, end: f64, refine_ends: bool) -> Result<Cumulative> {
        let mut breaks = vec![start, end];
        if refine_ends {
            // Geometric breaks toward spectrum points, where d_ε vanishes.
            let span = end - start;
            let mut h = 0.25 * span;
            while h > 0.5 * self.opts.exclusion {
                breaks.push(start + h);
                breaks.push(end - h);
                h *= 0.5;
            }
            breaks.push(start + 0.5 * span);
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let opts = QuadOptions { abs_tol: 1e-14, rel_tol: self.opts.quad_rel_tol, max_panels: 200_000 };
        let (integral, list) = integrate_panels(|t| self.g(t), &breaks, opts)?;
        let mut prefix = Vec::with_capacity(list.len());
        let mut acc = 0.0;
        for &(_, _, v) in &list {
            prefix.push(acc);
            acc += v;
        }
        Ok(Cumulative { panels: list.iter().map(|p| (p.0, p.1)).collect(), prefix, total: integral.value })
    }

    /// Point `x` with `F(x) = target`, where `F` is the cumulative integral;
    /// `None` when the component ends first.
    fn solve(&self, cum: &Cumulative, from: f64, target: f64) -> Result<Option<(f64, f64)>> {
        let i = cum.prefix.partition_point(|&c| c < target);
        if i == 0 {
            return Ok(None);
        }
        let i = i - 1;
        let end_value = if i + 1 < cum.prefix.len() { cum.prefix[i + 1] } else { cum.total };
        if end_value < target {
            return Ok(None);
        }
        let (p0, p1) = cum.panels[i];
        let base = cum.prefix[i];
        let value_at = |x: f64| -> Result<f64> {
            if x <= p0 {
                return Ok(base);
            }
            let mut f = |t: f64| self.g(t);
            Ok(base + gk15(&mut f, p0, x)?.0)
        };
        let mut lo = from.max(p0);
        let mut hi = p1;
        let mut x = hi;
        let mut fx = end_value;
        for _ in 0..60 {
            if (fx - target).abs() <= 1e-9 * WHITNEY_THRESHOLD || hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
                break;
            }
            let mut next = x - (fx - target) / self.g(x)?;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            x = next;
            fx = value_at(x)?;
            if fx < target {
                lo = x;
            } else {
                hi = x;
            }
        }
        Ok(Some((x, fx)))
    }
}

/// Whitney-type decomposition of `T ∖ σ(Θ)` relative to `Ω(Θ, ε)`.
pub fn whitney_decompose(theta: &InnerFunction, eps: f64, tol: f64) -> Result<WhitneyDecomposition> {
    whitney_decompose_with(theta, eps, WhitneyOptions::new(tol))
}

pub fn whitney_decompose_with(theta: &InnerFunction, eps: f64, opts: WhitneyOptions) -> Result<WhitneyDecomposition> {
    if !(opts.tol > 0.0 && opts.exclusion > 0.0) {
        return invalid("whitney: tolerances must be positive");
    }
    let ls = LevelSet::new(theta, eps)?;
    let spectrum = theta.boundary_spectrum_angles();
    let comps = components(&spectrum, opts.exclusion);
    if comps.is_empty() {
        return Err(Error::EmptyComplement);
    }
    let marcher = Marcher { ls, opts };
    let mut arcs = Vec::new();
    for &(start, end) in &comps {
        let cum = marcher.cumulative(start, end, !spectrum.is_empty())?;
        let (mut a, mut fa) = (start, 0.0);
        while end - a > CLOSED_SLACK {
            let (b, fb, exact) = match marcher.solve(&cum, a, fa + WHITNEY_THRESHOLD)? {
                Some((b, fb)) if end - b > CLOSED_SLACK => (b, fb, true),
                Some((_, fb)) => (end, fb, true),
                None => (end, cum.total, false),
            };
            let arc = Arc::new(a, b)?;
            let d = ls.distance(&arc, opts.tol.min(1e-3 * arc.length()))?;
            arcs.push(WhitneyArc { k: arcs.len(), arc, d, threshold_exact: exact, integral: fb - fa });
            a = b;
            fa = fb;
        }
    }
    let excluded = spectrum.iter().map(|&t| Arc::centered(t, 2.0 * opts.exclusion)).collect::<Result<Vec<_>>>()?;
    let ratio = |a: &WhitneyArc| (a.d.hi + a.arc.length()) / a.arc.measure();
    let g_constant = arcs.iter().map(ratio).fold(0.0, f64::max);
    let g_constant_exact = arcs.iter().filter(|a| a.threshold_exact).map(ratio).fold(0.0, f64::max);
    Ok(WhitneyDecomposition { epsilon: eps, options: opts, arcs, excluded, g_constant, g_constant_exact })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inner::ZeroFamily;

    #[test]
    fn identity_function_arcs() {
        let f = InnerFunction::monomial(1);
        let w = whitney_decompose(&f, 0.5, 1e-4).unwrap();
        // d_ε ≡ 1/2, so every exact arc has m(I) = τ_W / 2 = 1/(16π).
        assert_eq!(w.threshold_exact_count(), 50);
        assert_eq!(w.arcs.len(), 51);
        assert!(!w.arcs[50].threshold_exact);
        for a in w.arcs.iter().filter(|a| a.threshold_exact) {
            assert!((a.arc.measure() - 1.0 / (16.0 * PI)).abs() < 1e-8);
            assert!((a.arc.length() - 0.125).abs() < 1e-7);
            assert!(3.0 * a.arc.length() <= a.d.lo && a.d.hi <= 5.0 * a.arc.length());
        }
        assert!((w.covered_measure() - 1.0).abs() < 1e-12);
        assert!(w.to_csv().lines().count() == 52);
    }

    #[test]
    fn arcs_shrink_toward_spectrum_point() {
        let f = InnerFunction::from_family(ZeroFamily::SpiralDyadic { phase: 1.0 }, 12).unwrap();
        let w = whitney_decompose(&f, 0.5, 1e-4).unwrap();
        for a in &w.arcs {
            assert!(3.0 * a.arc.length() <= a.d.lo, "{a:?}");
        }
        let first = &w.arcs[0];
        let last = w.arcs.last().unwrap();
        let longest = w.arcs.iter().map(|a| a.arc.length()).fold(0.0, f64::max);
        assert!(first.arc.length() < 1e-3 * longest);
        assert!(last.arc.length() < 1e-3 * longest);
    }
}
