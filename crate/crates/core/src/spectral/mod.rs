//! Finite-dimensional spectral oracle for embeddings `K²_B ⊂ L²(μ)` with `B` a
//! finite Blaschke product.

mod basis;
mod eigen;
mod gram;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

pub use basis::{TmBasis, MAX_TM_DIM};
pub use eigen::{hermitian_eigenvalues, symmetric_jacobi, HermitianEigen, RESIDUAL_TOL};
pub(crate) use gram::{arc_breaks, arc_rule, integrate_arc_vec};
pub use gram::{embedding_gram, gram_in_basis, hs_integral, EmbeddingGram, GramProvenance};

use crate::error::{invalid, Error, Result};
use crate::inner::InnerFunction;
use crate::measure::{DiscMeasure, MeasureAtom};

const TWO_PI: f64 = 2.0 * PI;

/// Singular values of the embedding and derived norms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub singular_values: Vec<f64>,
    pub operator_norm: f64,
    /// Schatten norms keyed by `r`.
    pub schatten: BTreeMap<String, f64>,
    /// `Σ s_i²`.
    pub hilbert_schmidt: f64,
    pub provenance: BTreeMap<String, serde_json::Value>,
}

/// `(Σ s_i^r)^{1/r}`; `r = ∞` gives the operator norm.
pub fn schatten_norm(s: &[f64], r: f64) -> f64 {
    let top = operator_norm(s);
    if r.is_infinite() || top == 0.0 {
        return top;
    }
    top * s.iter().map(|x| (x / top).powf(r)).sum::<f64>().powf(1.0 / r)
}

pub fn operator_norm(s: &[f64]) -> f64 {
    s.iter().copied().fold(0.0, f64::max)
}

/// Key used for `r` in report maps: `1`, `2`, `2.5`.
pub fn r_key(r: f64) -> String {
    format!("{r}")
}

/// Eigenvalues of the Gram, clamped at zero, turned into singular values.
pub fn singular_values(g: &EmbeddingGram, r_list: &[f64]) -> Result<SpectralReport> {
    if let Some(r) = r_list.iter().find(|r| !(**r > 0.0)) {
        return invalid(format!("Schatten exponent {r} must be positive"));
    }
    let eig = hermitian_eigenvalues(&g.matrix)?;
    let scale = eig.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut s = Vec::with_capacity(eig.values.len());
    for &v in &eig.values {
        if v < -1e-12 * scale.max(1.0) {
            return Err(Error::EigenFailure(format!("Gram has negative eigenvalue {v:e}")));
        }
        s.push(v.max(0.0).sqrt());
    }
    let schatten = r_list.iter().map(|&r| (r_key(r), schatten_norm(&s, r))).collect();
    let mut provenance = BTreeMap::new();
    provenance.insert("dim".into(), g.provenance.dim.into());
    provenance.insert("atoms".into(), g.provenance.atoms.into());
    provenance.insert("density_pieces".into(), g.provenance.density_pieces.into());
    provenance.insert("quadrature_tol".into(), g.provenance.tol.into());
    provenance.insert("panels_per_segment".into(), g.provenance.panels_per_segment.into());
    provenance.insert("eigen_residual".into(), eig.residual.into());
    Ok(SpectralReport {
        operator_norm: operator_norm(&s),
        hilbert_schmidt: s.iter().map(|x| x * x).sum(),
        singular_values: s,
        schatten,
        provenance,
    })
}

/// Unwrapped boundary phase `Φ(θ)` with `B(e^{iθ}) = e^{iΦ(θ)}`; strictly
/// increasing with `Φ(θ + 2π) = Φ(θ) + 2πN`.
fn boundary_phase(zeros: &[Complex64], theta: f64) -> f64 {
    let zeta = Complex64::from_polar(1.0, theta);
    zeros
        .iter()
        .map(|a| {
            let c = if a.norm() == 0.0 { 0.0 } else { PI - a.arg() };
            // Re(1 - ā ζ) > 0, so the principal argument is continuous in θ.
            theta + c - 2.0 * (1.0 - a.conj() * zeta).arg()
        })
        .sum()
}

fn phase_derivative(zeros: &[Complex64], theta: f64) -> f64 {
    let zeta = Complex64::from_polar(1.0, theta);
    zeros.iter().map(|a| (1.0 - a.norm_sqr()) / (zeta - a).norm_sqr()).sum()
}

/// Clark measure of a finite Blaschke product: atoms at the solutions of
/// `B(ζ) = α` with weights `1/|B'(ζ)|`.
pub fn clark_measure(b: &InnerFunction, alpha: Complex64) -> Result<DiscMeasure> {
    if (alpha.norm() - 1.0).abs() > 1e-12 {
        return invalid("alpha must be unimodular");
    }
    if !b.atoms().is_empty() {
        return Err(Error::NotFiniteBlaschke("singular inner factor present".into()));
    }
    let zeros = b.zeros();
    let n = zeros.len();
    if n == 0 {
        return invalid("Clark measure needs a nonconstant Blaschke product");
    }
    let phi0 = boundary_phase(zeros, 0.0);
    let grid_n = 4 * n;
    let grid: Vec<(f64, f64)> = (0..=grid_n)
        .map(|i| {
            let t = TWO_PI * i as f64 / grid_n as f64;
            (t, if i == grid_n { phi0 + TWO_PI * n as f64 } else { boundary_phase(zeros, t) })
        })
        .collect();
    let target0 = alpha.arg();
    let j0 = ((phi0 - target0) / TWO_PI).ceil() as i64;
    let mut atoms = Vec::with_capacity(n);
    for j in j0..j0 + n as i64 {
        let target = target0 + TWO_PI * j as f64;
        let idx = grid.partition_point(|g| g.1 < target);
        if idx == 0 || idx > grid_n {
            if idx == 0 && (grid[0].1 - target).abs() < 1e-12 {
                atoms.push(MeasureAtom { point: Complex64::new(1.0, 0.0), mass: 1.0 / phase_derivative(zeros, 0.0) });
                continue;
            }
            return Err(Error::RootRefinementFailure(target));
        }
        let (mut lo, mut hi) = (grid[idx - 1].0, grid[idx].0);
        let mut t = 0.5 * (lo + hi);
        let mut done = false;
        for _ in 0..200 {
            let f = boundary_phase(zeros, t) - target;
            if f.abs() <= 4.0 * f64::EPSILON * target.abs().max(1.0) {
                done = true;
                break;
            }
            if f < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let next = t - f / phase_derivative(zeros, t);
            t = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
            if hi - lo <= 4.0 * f64::EPSILON * TWO_PI {
                done = true;
                break;
            }
        }
        if !done {
            return Err(Error::RootRefinementFailure(target));
        }
        atoms.push(MeasureAtom { point: Complex64::from_polar(1.0, t), mass: 1.0 / phase_derivative(zeros, t) });
    }
    DiscMeasure::new(atoms, vec![])
}

/// One row of a compactness profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompactnessRow {
    pub n_trunc: usize,
    /// `s_k`, zero when `k` exceeds the dimension.
    pub s_k: f64,
    /// `max_{i > k} s_i`.
    pub tail: f64,
    pub singular_values: Vec<f64>,
}

/// Singular values along truncations `Θ_N` of a zero family, with `μ` built
/// per truncation.
pub fn compactness_profile<F>(
    theta: &InnerFunction,
    truncations: &[usize],
    mut mu_for: F,
    k: usize,
    tol: f64,
) -> Result<Vec<CompactnessRow>>
where
    F: FnMut(&InnerFunction) -> Result<DiscMeasure>,
{
    if k == 0 {
        return invalid("k counts from 1");
    }
    let mut rows = Vec::with_capacity(truncations.len());
    for &n in truncations {
        let t = theta.retruncate(n)?;
        let mu = mu_for(&t)?;
        let report = singular_values(&embedding_gram(&t, &mu, tol)?, &[])?;
        let s = report.singular_values;
        rows.push(CompactnessRow {
            n_trunc: n,
            s_k: s.get(k - 1).copied().unwrap_or(0.0),
            tail: s.iter().skip(k).copied().fold(0.0, f64::max),
            singular_values: s,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inner::ZeroFamily;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn singular_value_examples() {
        let z2 = InnerFunction::monomial(2);
        let d1 = DiscMeasure::point_mass(c(1.0, 0.0), 1.0).unwrap();
        let r = singular_values(&embedding_gram(&z2, &d1, 1e-12).unwrap(), &[1.0, 2.0]).unwrap();
        assert!((r.singular_values[0] - 2f64.sqrt()).abs() < 1e-14);
        assert!(r.singular_values[1].abs() < 1e-7);
        assert!((r.schatten["1"] - 2f64.sqrt()).abs() < 1e-7);
        let half = DiscMeasure::atomic(&[(c(1.0, 0.0), 0.5), (c(-1.0, 0.0), 0.5)]).unwrap();
        let r = singular_values(&embedding_gram(&z2, &half, 1e-12).unwrap(), &[2.0]).unwrap();
        assert!((r.schatten["2"] - 2f64.sqrt()).abs() < 1e-14);
        assert!((r.operator_norm - 1.0).abs() < 1e-14);
        let r = singular_values(&embedding_gram(&z2, &DiscMeasure::zero(), 1e-12).unwrap(), &[1.0]).unwrap();
        assert_eq!(r.singular_values, vec![0.0, 0.0]);
        let json = serde_json::to_value(&r).unwrap();
        assert!(json["schatten"]["1"].is_number());
    }

    #[test]
    fn schatten_examples() {
        assert!((schatten_norm(&[1.0, 1.0], 2.0) - 2f64.sqrt()).abs() < 1e-15);
        assert!((schatten_norm(&[2f64.sqrt(), 0.0], 1.0) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(schatten_norm(&[1.0, 1.0], f64::INFINITY), 1.0);
        assert_eq!(r_key(2.5), "2.5");
        assert_eq!(r_key(1.0), "1");
    }

    #[test]
    fn clark_examples() {
        let z2 = InnerFunction::monomial(2);
        let mu = clark_measure(&z2, c(1.0, 0.0)).unwrap();
        let mut pts: Vec<(f64, f64)> = mu.atoms().iter().map(|a| (a.point.re, a.mass)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert!((pts[0].0 + 1.0).abs() < 1e-14 && (pts[1].0 - 1.0).abs() < 1e-14);
        assert!(pts.iter().all(|p| (p.1 - 0.5).abs() < 1e-14));
        let z5 = InnerFunction::monomial(5);
        let mu = clark_measure(&z5, Complex64::from_polar(1.0, 0.7)).unwrap();
        assert_eq!(mu.atoms().len(), 5);
        for a in mu.atoms() {
            assert!((a.mass - 0.2).abs() < 1e-14);
            assert!((z5.evaluate(a.point).unwrap() - Complex64::from_polar(1.0, 0.7)).norm() < 1e-13);
        }
        // B(z) = (0.5 - z)/(1 - 0.5 z) takes the value -1 at ζ = 1, where |B'| = 3.
        let b = InnerFunction::blaschke(&[c(0.5, 0.0)]).unwrap();
        let mu = clark_measure(&b, c(-1.0, 0.0)).unwrap();
        assert_eq!(mu.atoms().len(), 1);
        assert!((mu.atoms()[0].point - c(1.0, 0.0)).norm() < 1e-14);
        assert!((mu.atoms()[0].mass - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn clark_isometry_random() {
        let b = InnerFunction::blaschke(&[c(0.9, 0.3), c(-0.2, 0.1), c(0.0, -0.95), c(0.5, 0.5)]).unwrap();
        for alpha in [c(1.0, 0.0), Complex64::from_polar(1.0, PI / 4.0), c(-1.0, 0.0)] {
            let mu = clark_measure(&b, alpha).unwrap();
            let g = embedding_gram(&b, &mu, 1e-12).unwrap();
            assert!(g.identity_deviation() < 1e-12, "{}", g.identity_deviation());
        }
    }

    #[test]
    fn compactness_profile_rank_one() {
        let theta = InnerFunction::from_family(ZeroFamily::RadialDyadic { angle: 0.0 }, 4).unwrap();
        let d0 = DiscMeasure::point_mass(c(0.0, 0.0), 1.0).unwrap();
        let rows = compactness_profile(&theta, &[2, 4, 6], |_| Ok(d0.clone()), 1, 1e-12).unwrap();
        assert_eq!(rows.len(), 3);
        for r in &rows {
            assert!(r.tail < 1e-7, "{r:?}");
            assert!(r.s_k > 0.0);
        }
    }
}
