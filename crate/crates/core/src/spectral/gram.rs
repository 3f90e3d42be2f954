//! Embedding Gram matrices `M[j][k] = ∫ e_k conj(e_j) dμ` and the
//! Hilbert–Schmidt integral `∫ ‖k_z‖₂² dμ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::basis::TmBasis;
use crate::error::{invalid, Error, Result};
use crate::geometry::{angle_offset, Arc};
use crate::inner::InnerFunction;
use crate::measure::DiscMeasure;
use crate::quad::composite_nodes;

const TWO_PI: f64 = 2.0 * PI;
const MAX_PANELS_PER_SEGMENT: usize = 256;

/// Breakpoints on `arc` (as absolute angles from `arc.start()`) refined
/// geometrically toward the angles of zeros close to the circle.
pub(crate) fn arc_breaks(zeros: &[Complex64], arc: &Arc) -> Vec<f64> {
    let (s, len) = (arc.start(), arc.length());
    let mut b = vec![s, s + len];
    for a in zeros {
        let d = 1.0 - a.norm();
        if d >= 0.25 {
            continue;
        }
        let t0 = s + angle_offset(a.arg(), s);
        for t in [t0 - TWO_PI, t0, t0 + TWO_PI] {
            if t > s - len && t < s + 2.0 * len {
                let mut h = 0.5 * d;
                let mut push = |x: f64| {
                    if x > s && x < s + len {
                        b.push(x);
                    }
                };
                push(t);
                while h < len {
                    push(t - h);
                    push(t + h);
                    h *= 2.0;
                }
            }
        }
    }
    b.sort_by(f64::total_cmp);
    b.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
    b
}

/// Nodes `(angle, weight)` for `∫_arc · dm` with `panels` Kronrod panels per
/// segment between consecutive breaks.
pub(crate) fn arc_rule(breaks: &[f64], panels: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for w in breaks.windows(2) {
        for (t, wt) in composite_nodes(w[0], w[1], panels) {
            out.push((t, wt / TWO_PI));
        }
    }
    out
}

/// `∫_arc f dm` for vector-valued `f`, doubling the panel count until the
/// largest entry changes by at most `tol` (relative to the largest entry).
/// Returns the values and the final panels per segment.
pub(crate) fn integrate_arc_vec<F>(zeros: &[Complex64], arc: &Arc, tol: f64, mut f: F) -> Result<(Vec<Complex64>, usize)>
where
    F: FnMut(f64) -> Result<Vec<Complex64>>,
{
    let breaks = arc_breaks(zeros, arc);
    let mut eval = |panels: usize| -> Result<Vec<Complex64>> {
        let mut acc: Vec<Complex64> = Vec::new();
        for (t, w) in arc_rule(&breaks, panels) {
            let v = f(t)?;
            if acc.is_empty() {
                acc = vec![Complex64::new(0.0, 0.0); v.len()];
            }
            for (a, x) in acc.iter_mut().zip(&v) {
                *a += x * w;
            }
        }
        Ok(acc)
    };
    let mut panels = 1;
    let mut prev = eval(panels)?;
    loop {
        panels *= 2;
        let next = eval(panels)?;
        let scale = next.iter().map(|z| z.norm()).fold(1e-300, f64::max);
        let change = next.iter().zip(&prev).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if change <= tol * scale.max(1.0) {
            return Ok((next, panels));
        }
        if panels >= MAX_PANELS_PER_SEGMENT {
            return Err(Error::QuadratureFailure { panels: panels * breaks.len(), error: change });
        }
        prev = next;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramProvenance {
    pub dim: usize,
    pub atoms: usize,
    pub density_pieces: usize,
    pub tol: f64,
    /// Largest panel count per segment used for density pieces.
    pub panels_per_segment: usize,
}

/// Hermitian `N × N` matrix of the embedding `K²_Θ → L²(μ)` in TM coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingGram {
    pub matrix: Vec<Vec<Complex64>>,
    pub provenance: GramProvenance,
}

impl EmbeddingGram {
    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.matrix[i][i].re).sum()
    }

    /// Max-entry distance to the identity.
    pub fn identity_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for (i, row) in self.matrix.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let id = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((v - id).norm());
            }
        }
        dev
    }
}

/// Gram of `μ` in the Takenaka–Malmquist basis of `Θ` (a Blaschke product).
pub fn embedding_gram(theta: &InnerFunction, mu: &DiscMeasure, tol: f64) -> Result<EmbeddingGram> {
    if !(tol > 0.0) {
        return invalid("tol must be positive");
    }
    let basis = TmBasis::for_inner(theta)?;
    gram_in_basis(&basis, mu, tol)
}

pub fn gram_in_basis(basis: &TmBasis, mu: &DiscMeasure, tol: f64) -> Result<EmbeddingGram> {
    let n = basis.dim();
    let mut m = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for atom in mu.atoms() {
        let e = basis.eval_all(atom.point)?;
        for j in 0..n {
            for k in 0..n {
                m[j][k] += e[k] * e[j].conj() * atom.mass;
            }
        }
    }
    let mut max_panels = 0;
    for piece in mu.density() {
        let (v, panels) = integrate_arc_vec(basis.zeros(), &piece.arc, tol, |t| {
            let e = basis.eval_all(Complex64::from_polar(1.0, t))?;
            let mut out = Vec::with_capacity(n * n);
            for j in 0..n {
                for k in 0..n {
                    out.push(e[k] * e[j].conj());
                }
            }
            Ok(out)
        })?;
        max_panels = max_panels.max(panels);
        for j in 0..n {
            for k in 0..n {
                m[j][k] += v[j * n + k] * piece.density;
            }
        }
    }
    // Exact Hermitian symmetry.
    for j in 0..n {
        m[j][j] = Complex64::new(m[j][j].re, 0.0);
        for k in j + 1..n {
            let h = 0.5 * (m[j][k] + m[k][j].conj());
            m[j][k] = h;
            m[k][j] = h.conj();
        }
    }
    Ok(EmbeddingGram {
        matrix: m,
        provenance: GramProvenance {
            dim: n,
            atoms: mu.atoms().len(),
            density_pieces: mu.density().len(),
            tol,
            panels_per_segment: max_panels,
        },
    })
}

/// `∫ ‖k_z‖₂² dμ(z)`: `(1-|Θ(z)|²)/(1-|z|²)` inside and `|Θ'(ζ)| = S_2(ζ)` on
/// the circle. A Blaschke product built from a zero family is treated as the
/// finite product it is. Returns `+∞` when `S_2` diverges on the support.
pub fn hs_integral(theta: &InnerFunction, mu: &DiscMeasure, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return invalid("tol must be positive");
    }
    let f = if theta.atoms().is_empty() { theta.finite_part()? } else { theta.clone() };
    let mut total = 0.0;
    for atom in mu.atoms() {
        let v = if atom.on_circle() { f.ahern_clark_sum(atom.point, 2.0) } else { f.kernel_diagonal(atom.point)? };
        if !v.is_finite() {
            return Ok(f64::INFINITY);
        }
        total += atom.mass * v;
    }
    let spectrum = f.boundary_spectrum_angles();
    for piece in mu.density() {
        if spectrum.iter().any(|&t| piece.arc.contains_angle(t)) {
            return Ok(f64::INFINITY);
        }
        let mut peaks: Vec<Complex64> = f.zeros().to_vec();
        // Singular atoms act like zeros at the circle for break placement.
        peaks.extend(f.atoms().iter().map(|a| a.point() * (1.0 - 1e-9)));
        let (v, _) = integrate_arc_vec(&peaks, &piece.arc, tol, |t| {
            Ok(vec![Complex64::new(f.ahern_clark_sum(Complex64::from_polar(1.0, t), 2.0), 0.0)])
        })?;
        total += piece.density * v[0].re;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gram_examples() {
        let z2 = InnerFunction::monomial(2);
        let half = DiscMeasure::atomic(&[(c(1.0, 0.0), 0.5), (c(-1.0, 0.0), 0.5)]).unwrap();
        assert!(embedding_gram(&z2, &half, 1e-12).unwrap().identity_deviation() < 1e-15);
        let d0 = DiscMeasure::point_mass(c(0.0, 0.0), 1.0).unwrap();
        let g = embedding_gram(&z2, &d0, 1e-12).unwrap();
        assert_eq!(g.matrix[0][0], c(1.0, 0.0));
        assert_eq!(g.matrix[1][1], c(0.0, 0.0));
        let m = DiscMeasure::uniform(1.0).unwrap();
        assert!(embedding_gram(&z2, &m, 1e-12).unwrap().identity_deviation() < 1e-12);
    }

    #[test]
    fn uniform_gram_is_identity_near_circle_zeros() {
        let theta = InnerFunction::blaschke(&[c(0.999, 0.01), c(-0.3, 0.2), Complex64::from_polar(0.9999, 2.0)]).unwrap();
        let m = DiscMeasure::uniform(1.0).unwrap();
        let g = embedding_gram(&theta, &m, 1e-12).unwrap();
        assert!(g.identity_deviation() < 1e-10, "{}", g.identity_deviation());
    }

    #[test]
    fn hs_examples() {
        let z2 = InnerFunction::monomial(2);
        let d0 = DiscMeasure::point_mass(c(0.0, 0.0), 1.0).unwrap();
        assert!((hs_integral(&z2, &d0, 1e-12).unwrap() - 1.0).abs() < 1e-15);
        let d1 = DiscMeasure::point_mass(c(1.0, 0.0), 1.0).unwrap();
        assert!((hs_integral(&z2, &d1, 1e-12).unwrap() - 2.0).abs() < 1e-15);
        let half = DiscMeasure::atomic(&[(c(1.0, 0.0), 0.5), (c(-1.0, 0.0), 0.5)]).unwrap();
        assert!((hs_integral(&z2, &half, 1e-12).unwrap() - 2.0).abs() < 1e-15);
        let m = DiscMeasure::uniform(1.0).unwrap();
        let theta = InnerFunction::blaschke(&[c(0.99, 0.0), c(0.2, 0.3)]).unwrap();
        assert!((hs_integral(&theta, &m, 1e-12).unwrap() - 2.0).abs() < 1e-10);
        let s = InnerFunction::singular(vec![crate::inner::SingularAtom { angle: 0.0, mass: 1.0 }]).unwrap();
        assert_eq!(hs_integral(&s, &d1, 1e-12).unwrap(), f64::INFINITY);
    }
}
