//! Finitely presented inner functions `Θ = B · I_ψ`: a Blaschke product over
//! finitely many zeros (possibly a truncation of a parametric family) times a
//! singular inner factor with finitely many atoms.

mod doc;
pub mod level;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::jet::Jet;

pub use doc::{GeneratorDoc, InnerFunctionSpec, SingularAtom, ZeroDoc, ZeroFamily};
pub use level::{level_distance, Bracket, Decision, DistanceTarget, LevelSet, Nearest, StraddleCell};

/// Boundary points closer than this to a declared spectrum point are refused.
pub const SPECTRUM_TOL: f64 = 1e-12;

/// Tolerance for deciding that a point lies on the unit circle.
pub const CIRCLE_TOL: f64 = 1e-12;

const TWO_PI: f64 = 2.0 * PI;

/// Truncation record for an inner function built from a zero family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub family: ZeroFamily,
    pub n_trunc: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerFunction {
    /// Zeros repeated according to multiplicity, explicit zeros first.
    zeros: Vec<Complex64>,
    atoms: Vec<SingularAtom>,
    /// Declared accumulation angles in `[0, 2π)`, sorted.
    accumulation: Vec<f64>,
    truncation: Option<Truncation>,
}

/// Extensional description of `σ(Θ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSet {
    /// Distinct zeros and atom locations.
    pub points: Vec<Complex64>,
    /// Declared boundary accumulation angles.
    pub accumulation_angles: Vec<f64>,
}

impl SpectrumSet {
    pub fn distance(&self, p: Complex64) -> f64 {
        let pts = self.points.iter().map(|z| (p - z).norm());
        let acc = self.accumulation_angles.iter().map(|&t| (p - Complex64::from_polar(1.0, t)).norm());
        pts.chain(acc).fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, p: Complex64, tol: f64) -> bool {
        self.distance(p) <= tol
    }
}

fn canonical_angle(t: f64) -> f64 {
    let t = t.rem_euclid(TWO_PI);
    if t >= TWO_PI {
        0.0
    } else {
        t
    }
}

impl InnerFunction {
    /// Builds and validates an inner function from explicit data.
    pub fn new(zeros: Vec<(Complex64, u32)>, atoms: Vec<SingularAtom>, accumulation: Vec<f64>) -> Result<Self> {
        let mut expanded = Vec::new();
        for (z, mult) in zeros {
            if !(z.re.is_finite() && z.im.is_finite()) || z.norm() >= 1.0 {
                return Err(Error::PoleInside(format!("{z}")));
            }
            if mult == 0 {
                return invalid("zero multiplicity must be at least 1");
            }
            expanded.extend(std::iter::repeat(z).take(mult as usize));
        }
        for a in &atoms {
            if !(a.mass > 0.0 && a.mass.is_finite()) {
                return invalid(format!("singular atom at angle {}: mass must be positive", a.angle));
            }
            if !(0.0..TWO_PI).contains(&a.angle) {
                return invalid(format!("singular atom angle {} outside [0, 2π)", a.angle));
            }
        }
        for &t in &accumulation {
            if !(0.0..TWO_PI).contains(&t) {
                return invalid(format!("accumulation angle {t} outside [0, 2π)"));
            }
        }
        let mut accumulation = accumulation;
        accumulation.sort_by(f64::total_cmp);
        accumulation.dedup();
        Ok(Self { zeros: expanded, atoms, accumulation, truncation: None })
    }

    /// Finite Blaschke product with the given simple zeros.
    pub fn blaschke(zeros: &[Complex64]) -> Result<Self> {
        Self::new(zeros.iter().map(|&z| (z, 1)).collect(), vec![], vec![])
    }

    /// `Θ(z) = z^n`.
    pub fn monomial(n: u32) -> Self {
        Self::new(vec![(Complex64::new(0.0, 0.0), n)], vec![], vec![]).expect("valid monomial")
    }

    /// Singular inner function with the given atoms.
    pub fn singular(atoms: Vec<SingularAtom>) -> Result<Self> {
        Self::new(vec![], atoms, vec![])
    }

    /// Truncation of a zero family; the family's accumulation angle is declared.
    pub fn from_family(family: ZeroFamily, n_trunc: usize) -> Result<Self> {
        family.check_blaschke(n_trunc)?;
        let zeros = family.zeros(n_trunc).into_iter().map(|z| (z, 1)).collect();
        let mut f = Self::new(zeros, vec![], vec![family.accumulation_angle()])?;
        f.truncation = Some(Truncation { family, n_trunc });
        Ok(f)
    }

    pub fn from_spec(spec: &InnerFunctionSpec) -> Result<Self> {
        let mut zeros: Vec<(Complex64, u32)> = spec.blaschke_zeros.iter().map(|z| (Complex64::new(z.re, z.im), z.mult)).collect();
        let mut accumulation = spec.accumulation_angles.clone();
        let mut truncation = None;
        if let Some(gen) = &spec.generator {
            let family = ZeroFamily::from_doc(gen)?;
            if gen.truncation == 0 {
                return invalid("generator.truncation: must be at least 1");
            }
            family.check_blaschke(gen.truncation)?;
            zeros.extend(family.zeros(gen.truncation).into_iter().map(|z| (z, 1)));
            let acc = family.accumulation_angle();
            if !accumulation.iter().any(|&t| (t - acc).abs() < SPECTRUM_TOL) {
                accumulation.push(acc);
            }
            truncation = Some(Truncation { family, n_trunc: gen.truncation });
        }
        let mut f = Self::new(zeros, spec.singular_atoms.clone(), accumulation)?;
        f.truncation = truncation;
        Ok(f)
    }

    /// Same function with the zero family re-truncated at `n_trunc`.
    pub fn retruncate(&self, n_trunc: usize) -> Result<Self> {
        let t = self.truncation.ok_or_else(|| Error::InvalidInput("inner function has no zero generator".into()))?;
        let explicit = self.zeros.len() - t.n_trunc;
        t.family.check_blaschke(n_trunc)?;
        let mut zeros: Vec<(Complex64, u32)> = self.zeros[..explicit].iter().map(|&z| (z, 1)).collect();
        zeros.extend(t.family.zeros(n_trunc).into_iter().map(|z| (z, 1)));
        let mut f = Self::new(zeros, self.atoms.clone(), self.accumulation.clone())?;
        f.truncation = Some(Truncation { family: t.family, n_trunc });
        Ok(f)
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn atoms(&self) -> &[SingularAtom] {
        &self.atoms
    }

    pub fn accumulation_angles(&self) -> &[f64] {
        &self.accumulation
    }

    pub fn truncation(&self) -> Option<Truncation> {
        self.truncation
    }

    /// No singular factor (possibly a truncation of an infinite product).
    pub fn is_finite_blaschke(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Sorted, deduplicated angles of `σ(Θ) ∩ T`.
    pub fn boundary_spectrum_angles(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.atoms.iter().map(|a| canonical_angle(a.angle)).collect();
        v.extend(self.accumulation.iter().copied());
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() < SPECTRUM_TOL);
        v
    }

    pub fn spectrum(&self) -> SpectrumSet {
        let mut points: Vec<Complex64> = Vec::new();
        for &z in &self.zeros {
            if !points.iter().any(|p| (p - z).norm() < SPECTRUM_TOL) {
                points.push(z);
            }
        }
        for a in &self.atoms {
            let p = a.point();
            if !points.iter().any(|q| (q - p).norm() < SPECTRUM_TOL) {
                points.push(p);
            }
        }
        SpectrumSet { points, accumulation_angles: self.accumulation.clone() }
    }

    pub fn spectrum_distance(&self, p: Complex64) -> f64 {
        self.spectrum().distance(p)
    }

    /// Distance from a boundary point to `σ(Θ) ∩ T`.
    fn boundary_spectrum_gap(&self, z: Complex64) -> f64 {
        self.boundary_spectrum_angles().iter().map(|&t| (z - Complex64::from_polar(1.0, t)).norm()).fold(f64::INFINITY, f64::min)
    }

    fn check_point(&self, z: Complex64) -> Result<bool> {
        let r = z.norm();
        if !r.is_finite() || r > 1.0 + CIRCLE_TOL {
            return Err(Error::OutsideDisc(format!("{z}")));
        }
        let on_circle = (1.0 - r).abs() <= CIRCLE_TOL;
        if on_circle && self.boundary_spectrum_gap(z) <= SPECTRUM_TOL {
            return Err(Error::BoundarySpectrumPoint { angle: canonical_angle(z.arg()), tolerance: SPECTRUM_TOL });
        }
        Ok(on_circle)
    }

    /// `Θ(z)` for `z` in the closed disc off the boundary spectrum.
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        self.check_point(z)?;
        let mut value = Complex64::new(1.0, 0.0);
        for &a in &self.zeros {
            let ra = a.norm();
            if ra >= 1.0 {
                return Err(Error::PoleInside(format!("{a}")));
            }
            if ra == 0.0 {
                value *= z;
            } else {
                value *= (a / ra).conj() * (a - z) / (1.0 - a.conj() * z);
            }
        }
        if !self.atoms.is_empty() {
            let mut exponent = Complex64::new(0.0, 0.0);
            for atom in &self.atoms {
                let zeta = atom.point();
                exponent -= atom.mass * (zeta + z) / (zeta - z);
            }
            value *= exponent.exp();
        }
        Ok(value)
    }

    /// `log |Θ(z)|²` for interior `z`, accumulated factor by factor through the
    /// identity `1 - |b_a(z)|² = (1-|a|²)(1-|z|²)/|1-āz|²`. Returns `-∞` at zeros.
    pub fn log_modulus_sq(&self, z: Complex64) -> f64 {
        let one_minus_z = 1.0 - z.norm_sqr();
        let mut acc = 0.0;
        for &a in &self.zeros {
            let x = (1.0 - a.norm_sqr()) * one_minus_z / (1.0 - a.conj() * z).norm_sqr();
            if x >= 1.0 {
                return f64::NEG_INFINITY;
            }
            acc += (-x).ln_1p();
        }
        for atom in &self.atoms {
            acc -= 2.0 * atom.mass * one_minus_z / (atom.point() - z).norm_sqr();
        }
        acc
    }

    /// Taylor jet of `Θ` at an interior point (or a boundary point off the
    /// boundary spectrum).
    pub fn jet(&self, z: Complex64, order: usize) -> Result<Jet> {
        self.check_point(z)?;
        let var = Jet::variable(z, order);
        let one = Jet::constant(Complex64::new(1.0, 0.0), order);
        let mut acc = one.clone();
        for &a in &self.zeros {
            let ra = a.norm();
            let factor = if ra == 0.0 {
                var.clone()
            } else {
                let num = (&Jet::constant(a, order) - &var).scale((a / ra).conj());
                let den = &one - &var.scale(a.conj());
                num.div(&den).ok_or_else(|| Error::PoleInside(format!("{a}")))?
            };
            acc = &acc * &factor;
        }
        if !self.atoms.is_empty() {
            let mut exponent = Jet::constant(Complex64::new(0.0, 0.0), order);
            for atom in &self.atoms {
                let zeta = Jet::constant(atom.point(), order);
                let q = (&zeta + &var)
                    .div(&(&zeta - &var))
                    .ok_or(Error::BoundarySpectrumPoint { angle: canonical_angle(z.arg()), tolerance: SPECTRUM_TOL })?;
                exponent = &exponent - &q.scale(Complex64::new(atom.mass, 0.0));
            }
            acc = &acc * &exponent.exp();
        }
        Ok(acc)
    }

    /// `Θ'(z)`.
    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.jet(z, 1)?.derivative(1))
    }

    /// The finite Blaschke product with the same zeros, dropping declared
    /// accumulation angles; fails when a singular factor is present.
    pub fn finite_part(&self) -> Result<Self> {
        if !self.atoms.is_empty() {
            return Err(Error::NotFiniteBlaschke("singular inner factor present".into()));
        }
        Ok(Self { zeros: self.zeros.clone(), atoms: vec![], accumulation: vec![], truncation: None })
    }

    /// Upper bound `-(1-|z|²) Σ (1-|z_n|²)/|1-z̄_n z|²` for `log |B(z)|²` over
    /// the zeros.
    pub fn blaschke_log_bound(&self, z: Complex64) -> f64 {
        let one_minus_z = 1.0 - z.norm_sqr();
        -one_minus_z * self.zeros.iter().map(|a| (1.0 - a.norm_sqr()) / (1.0 - a.conj() * z).norm_sqr()).sum::<f64>()
    }

    /// Logarithmic derivative `Θ'(z)/Θ(z)` for interior `z` off the zeros.
    pub fn log_derivative(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &a in &self.zeros {
            acc += (1.0 - a.norm_sqr()) / ((z - a) * (1.0 - a.conj() * z));
        }
        for atom in &self.atoms {
            let zeta = atom.point();
            acc -= 2.0 * atom.mass * zeta / ((zeta - z) * (zeta - z));
        }
        acc
    }

    /// `|Θ(z)|` for interior `z` (never fails; used by the level-set search).
    pub fn modulus(&self, z: Complex64) -> f64 {
        (0.5 * self.log_modulus_sq(z)).exp()
    }

    /// `1 - |Θ(z)|²` without cancellation.
    pub fn one_minus_modulus_sq(&self, z: Complex64) -> f64 {
        -self.log_modulus_sq(z).exp_m1()
    }

    /// Ahern–Clark sum `S_q(ζ) = Σ (1-|z_n|²)/|ζ-z_n|^q + Σ s_j/|ζ-e^{iθ_j}|^q`.
    /// Infinite at atoms and at declared accumulation points.
    pub fn ahern_clark_sum(&self, zeta: Complex64, q: f64) -> f64 {
        let zeta = zeta / zeta.norm();
        if self.boundary_spectrum_gap(zeta) <= SPECTRUM_TOL {
            return f64::INFINITY;
        }
        let half_q = 0.5 * q;
        let zeros: f64 = self.zeros.iter().map(|a| (1.0 - a.norm_sqr()) / (zeta - a).norm_sqr().powf(half_q)).sum();
        let atoms: f64 = self.atoms.iter().map(|t| t.mass / (zeta - t.point()).norm_sqr().powf(half_q)).sum();
        zeros + atoms
    }

    /// `|Θ'(ζ)|` on the circle; equals `S_2(ζ)`.
    pub fn derivative_modulus_boundary(&self, zeta: Complex64) -> f64 {
        self.ahern_clark_sum(zeta, 2.0)
    }

    /// Membership in `Ω(Θ, ε) = {|Θ| < ε}` for interior points.
    pub fn level_set_contains(&self, eps: f64, z: Complex64) -> Result<bool> {
        if z.norm() >= 1.0 {
            return invalid("level_set_contains: point must be interior");
        }
        Ok(self.evaluate(z)?.norm() < eps)
    }

    /// `‖k_z‖₂²`: `(1-|Θ(z)|²)/(1-|z|²)` inside, `S_2(z)` on the circle.
    pub fn kernel_diagonal(&self, z: Complex64) -> Result<f64> {
        if self.check_point(z)? {
            Ok(self.derivative_modulus_boundary(z))
        } else {
            Ok(self.one_minus_modulus_sq(z) / (1.0 - z.norm_sqr()))
        }
    }
}
