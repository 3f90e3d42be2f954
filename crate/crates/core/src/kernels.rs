//! Reproducing kernels of `K²_Θ`, their `L^q` norms, Bernstein weights and
//! measured Bernstein ratios.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::Arc;
use crate::inner::{InnerFunction, LevelSet, CIRCLE_TOL};
use crate::measure::DiscMeasure;
use crate::quad::{circle_mean, geometric_breaks, QuadOptions};
use crate::spectral::{hermitian_eigenvalues, integrate_arc_vec, TmBasis};

const TWO_PI: f64 = 2.0 * PI;

/// Below this separation the boundary kernel uses its diagonal value.
const DIAGONAL_SEPARATION: f64 = 1e-9;

fn on_circle(z: Complex64) -> bool {
    (1.0 - z.norm()).abs() <= CIRCLE_TOL
}

/// `k_z(ζ) = (1 - conj(Θ(z)) Θ(ζ)) / (1 - z̄ ζ)`; on the boundary diagonal
/// `k_ζ(ζ) = S_2(ζ)`.
pub fn reproducing_kernel(theta: &InnerFunction, z: Complex64, zeta: Complex64) -> Result<Complex64> {
    if on_circle(z) && on_circle(zeta) && (z - zeta).norm() <= DIAGONAL_SEPARATION {
        let s2 = theta.ahern_clark_sum(z, 2.0);
        if !s2.is_finite() {
            return Err(Error::UndefinedDiagonal(z.arg().rem_euclid(TWO_PI)));
        }
        return Ok(Complex64::new(s2, 0.0));
    }
    let tz = theta.evaluate(z)?;
    let tzeta = theta.evaluate(zeta)?;
    Ok((1.0 - tz.conj() * tzeta) / (1.0 - z.conj() * zeta))
}

/// Break angles for boundary integrals involving `k_z`: the direction of `z`,
/// zeros near the circle and the boundary spectrum, each refined geometrically.
fn kernel_breaks(theta: &InnerFunction, z: Complex64) -> Vec<f64> {
    let mut b = Vec::new();
    let dz = 1.0 - z.norm();
    if dz < 0.25 {
        geometric_breaks(z.arg(), (0.25 * dz).max(1e-7), &mut b);
    }
    for a in theta.zeros() {
        let d = 1.0 - a.norm();
        if d < 0.25 {
            geometric_breaks(a.arg(), 0.25 * d, &mut b);
        }
    }
    for &t in &theta.boundary_spectrum_angles() {
        geometric_breaks(t, 1e-6, &mut b);
    }
    b
}

/// `‖k_z^{power}‖_{L^q(m)}`. On the circle the norm is `+∞` when the
/// Ahern–Clark sum `S_{power·q}(z)` diverges. `q = ∞` gives the sampled
/// supremum refined by golden-section search.
pub fn kernel_norm(theta: &InnerFunction, z: Complex64, q: f64, power: u32, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return invalid("tol must be positive");
    }
    if !(q >= 1.0) || power == 0 {
        return invalid("kernel_norm needs q ≥ 1 and power ≥ 1");
    }
    if z.norm() > 1.0 + CIRCLE_TOL {
        return Err(Error::OutsideDisc(format!("{z}")));
    }
    let boundary = on_circle(z);
    if boundary {
        let exponent = if q.is_finite() { power as f64 * q } else { 2.0 * power as f64 };
        if !theta.ahern_clark_sum(z, exponent).is_finite() {
            return Ok(f64::INFINITY);
        }
    }
    let modulus = |t: f64| -> Result<f64> {
        let zeta = Complex64::from_polar(1.0, t);
        Ok(reproducing_kernel(theta, z, zeta)?.norm().powi(power as i32))
    };
    if q.is_infinite() {
        return sup_on_circle(modulus, &kernel_breaks(theta, z));
    }
    let opts = QuadOptions::with_tol(1e-300, tol);
    let r = circle_mean(|t| Ok(modulus(t)?.powf(q)), &kernel_breaks(theta, z), opts)?;
    Ok(r.value.powf(1.0 / q))
}

fn sup_on_circle<F: Fn(f64) -> Result<f64>>(f: F, breaks: &[f64]) -> Result<f64> {
    let mut ts: Vec<f64> = (0..4096).map(|i| TWO_PI * i as f64 / 4096.0).collect();
    ts.extend(breaks.iter().map(|t| t.rem_euclid(TWO_PI)));
    let mut best = (0.0, f64::NEG_INFINITY);
    for &t in &ts {
        let v = f(t)?;
        if v > best.1 {
            best = (t, v);
        }
    }
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (best.0 - TWO_PI / 2048.0, best.0 + TWO_PI / 2048.0);
    for _ in 0..80 {
        let x1 = b - golden * (b - a);
        let x2 = a + golden * (b - a);
        if f(x1)? > f(x2)? {
            b = x2;
        } else {
            a = x1;
        }
    }
    Ok(best.1.max(f(0.5 * (a + b))?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightKind {
    /// `w_{p,n}(z) = ‖k_z^{n+1}‖_q^{-pn/(pn+1)}`.
    #[serde(rename = "w_pn")]
    WPn,
    /// `d_ε(z)^n`.
    #[serde(rename = "d_eps_pow_n")]
    DEpsPowN,
    /// `|Θ'(z)|^{-n}`.
    #[serde(rename = "theta_prime_inv_n")]
    ThetaPrimeInvN,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BernsteinWeightSpec {
    pub p: f64,
    pub n: u32,
    pub kind: WeightKind,
    /// Level for `d_eps_pow_n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl BernsteinWeightSpec {
    pub fn new(p: f64, n: u32, kind: WeightKind) -> Result<Self> {
        let s = Self { p, n, kind, epsilon: None };
        s.validate()?;
        Ok(s)
    }

    pub fn with_epsilon(mut self, eps: f64) -> Result<Self> {
        self.epsilon = Some(eps);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return invalid("weight: p must be finite and at least 1");
        }
        if self.n == 0 {
            return invalid("weight: derivative order n must be at least 1");
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e < 1.0) {
                return invalid("weight: epsilon must lie in (0, 1)");
            }
        }
        Ok(())
    }

    /// Conjugate exponent `q = p/(p-1)`.
    pub fn q(&self) -> f64 {
        if self.p == 1.0 {
            f64::INFINITY
        } else {
            self.p / (self.p - 1.0)
        }
    }

    /// `-pn/(pn+1)`.
    pub fn exponent(&self) -> f64 {
        let pn = self.p * self.n as f64;
        -pn / (pn + 1.0)
    }
}

/// Weight value and the width of the interval it was taken from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightValue {
    pub value: f64,
    pub uncertainty: f64,
}

/// `|Θ'(z)|`: `S_2` on the circle, the jet inside.
pub fn derivative_modulus(theta: &InnerFunction, z: Complex64) -> Result<f64> {
    if on_circle(z) {
        Ok(theta.ahern_clark_sum(z, 2.0))
    } else {
        Ok(theta.derivative(z)?.norm())
    }
}

pub fn bernstein_weight(theta: &InnerFunction, z: Complex64, spec: &BernsteinWeightSpec, tol: f64) -> Result<f64> {
    Ok(bernstein_weight_value(theta, z, spec, tol)?.value)
}

/// The selected weight; `d_eps_pow_n` also reports the certified bracket width
/// of `d_ε` propagated through the power.
pub fn bernstein_weight_value(theta: &InnerFunction, z: Complex64, spec: &BernsteinWeightSpec, tol: f64) -> Result<WeightValue> {
    spec.validate()?;
    let n = spec.n as i32;
    match spec.kind {
        WeightKind::WPn => {
            let norm = kernel_norm(theta, z, spec.q(), spec.n + 1, tol)?;
            let value = if norm.is_finite() { norm.powf(spec.exponent()) } else { 0.0 };
            Ok(WeightValue { value, uncertainty: 0.0 })
        }
        WeightKind::DEpsPowN => {
            let eps = spec.epsilon.ok_or_else(|| Error::InvalidInput("weight d_eps_pow_n needs epsilon".into()))?;
            let near = LevelSet::new(theta, eps)?.nearest(z, 1e-3)?;
            let value = near.value.powi(n);
            let uncertainty = near.bracket.hi.powi(n) - near.bracket.lo.powi(n);
            Ok(WeightValue { value, uncertainty })
        }
        WeightKind::ThetaPrimeInvN => {
            let d = derivative_modulus(theta, z)?;
            let value = if d.is_finite() { d.powi(-n) } else { 0.0 };
            Ok(WeightValue { value, uncertainty: 0.0 })
        }
    }
}

/// Residual between `n! ∫ τ̄ⁿ f(τ) conj(k_z(τ))^{n+1} dm(τ)` and `f^{(n)}(z)`
/// for `f = Σ c_k e_k` in the Takenaka–Malmquist basis of `Θ`.
pub fn derivative_representation_check(theta: &InnerFunction, coeffs: &[Complex64], n: u32, z: Complex64, tol: f64) -> Result<f64> {
    let basis = TmBasis::for_inner(theta)?;
    if coeffs.len() != basis.dim() {
        return invalid(format!("expected {} coefficients", basis.dim()));
    }
    if on_circle(z) && !theta.ahern_clark_sum(z, 2.0 * (n as f64 + 1.0)).is_finite() {
        return invalid("boundary point with divergent Ahern–Clark sum");
    }
    let analytic = basis.combination_derivative(coeffs, z, n as usize)?;
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let scale: f64 = coeffs.iter().map(|c| c.norm()).sum();
    let opts = QuadOptions::with_tol(tol * scale.max(1e-300), tol);
    let quad = circle_mean(
        |t| {
            let tau = Complex64::from_polar(1.0, t);
            let f = basis.combination(coeffs, tau)?;
            let k = reproducing_kernel(theta, z, tau)?;
            Ok(tau.conj().powi(n as i32) * f * k.conj().powi(n as i32 + 1))
        },
        &kernel_breaks(theta, z),
        opts,
    )?;
    Ok((quad.value * fact - analytic).norm())
}

/// Measured `sup ‖f^{(n)} W‖_{L^p(μ)} / ‖f‖_{H^p}` over `K^p_Θ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BernsteinRatio {
    pub value: f64,
    /// `true` for `p = 2` (generalized eigenvalue); otherwise a sampled lower bound.
    pub exact: bool,
    pub samples: usize,
    pub seed: Option<u64>,
    /// Largest bracket width of `d_ε` among the weights used.
    pub weight_uncertainty: f64,
}

/// Support point of `μ` with its quadrature weight, the Bernstein weight and
/// the `n`-th derivatives of the basis there.
struct Node {
    mass: f64,
    weight: f64,
    derivs: Vec<Complex64>,
}

const MC_PANELS: usize = 16;

pub fn bernstein_ratio(
    theta: &InnerFunction,
    mu: &DiscMeasure,
    spec: &BernsteinWeightSpec,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<BernsteinRatio> {
    spec.validate()?;
    let basis = TmBasis::for_inner(theta)?;
    let dim = basis.dim();
    let n = spec.n as usize;
    let mut uncertainty: f64 = 0.0;
    let mut node = |z: Complex64, mass: f64| -> Result<Node> {
        let w = bernstein_weight_value(theta, z, spec, tol)?;
        uncertainty = uncertainty.max(w.uncertainty);
        Ok(Node { mass, weight: w.value, derivs: basis.derivatives(z, n)? })
    };
    if spec.p == 2.0 {
        let mut a = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
        for atom in mu.atoms() {
            let nd = node(atom.point, atom.mass)?;
            let w2 = nd.mass * nd.weight * nd.weight;
            for j in 0..dim {
                for k in 0..dim {
                    a[j][k] += nd.derivs[k] * nd.derivs[j].conj() * w2;
                }
            }
        }
        for piece in mu.density() {
            let (v, _) = integrate_arc_vec(basis.zeros(), &piece.arc, tol.max(1e-13), |t| {
                let nd = node(Complex64::from_polar(1.0, t), 1.0)?;
                let w2 = nd.weight * nd.weight;
                let mut out = Vec::with_capacity(dim * dim);
                for j in 0..dim {
                    for k in 0..dim {
                        out.push(nd.derivs[k] * nd.derivs[j].conj() * w2);
                    }
                }
                Ok(out)
            })?;
            for j in 0..dim {
                for k in 0..dim {
                    a[j][k] += v[j * dim + k] * piece.density;
                }
            }
        }
        for j in 0..dim {
            a[j][j].im = 0.0;
            for k in j + 1..dim {
                let h = 0.5 * (a[j][k] + a[k][j].conj());
                a[j][k] = h;
                a[k][j] = h.conj();
            }
        }
        let top = hermitian_eigenvalues(&a)?.values.first().copied().unwrap_or(0.0);
        return Ok(BernsteinRatio { value: top.max(0.0).sqrt(), exact: true, samples: 0, seed: None, weight_uncertainty: uncertainty });
    }
    if samples == 0 {
        return invalid("bernstein_ratio: p ≠ 2 needs at least one sample");
    }
    let mut nodes = Vec::new();
    for atom in mu.atoms() {
        nodes.push(node(atom.point, atom.mass)?);
    }
    let breaks_full = crate::spectral::TmBasis::zeros(&basis).to_vec();
    for piece in mu.density() {
        for (t, w) in arc_nodes(&breaks_full, &piece.arc) {
            nodes.push(node(Complex64::from_polar(1.0, t), w * piece.density)?);
        }
    }
    let circle = Arc::with_length(0.0, TWO_PI)?;
    let boundary: Vec<(f64, Vec<Complex64>)> = arc_nodes(&breaks_full, &circle)
        .into_iter()
        .map(|(t, w)| Ok((w, basis.eval_all(Complex64::from_polar(1.0, t))?)))
        .collect::<Result<_>>()?;
    let p = spec.p;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let c: Vec<Complex64> =
            (0..dim).map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))).collect();
        let norm = c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let c: Vec<Complex64> = c.iter().map(|x| x / norm).collect();
        let hp: f64 = boundary
            .iter()
            .map(|(w, e)| w * e.iter().zip(&c).map(|(a, b)| a * b).sum::<Complex64>().norm().powf(p))
            .sum::<f64>()
            .powf(1.0 / p);
        let lp: f64 = nodes
            .iter()
            .map(|nd| nd.mass * (nd.weight * nd.derivs.iter().zip(&c).map(|(a, b)| a * b).sum::<Complex64>().norm()).powf(p))
            .sum::<f64>()
            .powf(1.0 / p);
        if hp > 0.0 {
            best = best.max(lp / hp);
        }
    }
    Ok(BernsteinRatio { value: best, exact: false, samples, seed: Some(seed), weight_uncertainty: uncertainty })
}

fn arc_nodes(zeros: &[Complex64], arc: &Arc) -> Vec<(f64, f64)> {
    let breaks = crate::spectral::arc_breaks(zeros, arc);
    crate::spectral::arc_rule(&breaks, MC_PANELS)
}

/// Quantities of the Levin inequality `|f'(ζ)| ≤ ‖f‖_∞ |Θ'(ζ)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevinCheck {
    pub derivative: f64,
    pub sup_norm_sampled: f64,
    pub theta_prime: f64,
    /// `|f'(ζ)| / (‖f‖_∞ |Θ'(ζ)|)`.
    pub ratio: f64,
}

/// Levin quantities for `f = Σ c_k e_k` at a boundary point, with `‖f‖_∞`
/// sampled on `grid` equally spaced boundary points.
pub fn levin_check(theta: &InnerFunction, coeffs: &[Complex64], zeta: Complex64, grid: usize) -> Result<LevinCheck> {
    let basis = TmBasis::for_inner(theta)?;
    if coeffs.len() != basis.dim() {
        return invalid(format!("expected {} coefficients", basis.dim()));
    }
    if !on_circle(zeta) {
        return invalid("levin_check needs a boundary point");
    }
    let derivative = basis.combination_derivative(coeffs, zeta, 1)?.norm();
    let mut sup: f64 = 0.0;
    for i in 0..grid.max(1) {
        let t = TWO_PI * i as f64 / grid.max(1) as f64;
        sup = sup.max(basis.combination(coeffs, Complex64::from_polar(1.0, t))?.norm());
    }
    let theta_prime = theta.finite_part()?.ahern_clark_sum(zeta, 2.0);
    Ok(LevinCheck { derivative, sup_norm_sampled: sup, theta_prime, ratio: derivative / (sup * theta_prime) })
}

/// Comparability diagnostics for `d_ε^n ≲ w_{p,n} ≲ |Θ'|^{-n}` at a boundary point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightComparison {
    pub d_eps_pow_n: f64,
    pub w_pn: f64,
    pub theta_prime_inv_n: f64,
    pub lower_ratio: f64,
    pub upper_ratio: f64,
}

pub fn weight_comparison(theta: &InnerFunction, zeta: Complex64, p: f64, n: u32, eps: f64, tol: f64) -> Result<WeightComparison> {
    let d = bernstein_weight(theta, zeta, &BernsteinWeightSpec::new(p, n, WeightKind::DEpsPowN)?.with_epsilon(eps)?, tol)?;
    let w = bernstein_weight(theta, zeta, &BernsteinWeightSpec::new(p, n, WeightKind::WPn)?, tol)?;
    let t = bernstein_weight(theta, zeta, &BernsteinWeightSpec::new(p, n, WeightKind::ThetaPrimeInvN)?, tol)?;
    Ok(WeightComparison { d_eps_pow_n: d, w_pn: w, theta_prime_inv_n: t, lower_ratio: w / d, upper_ratio: t / w })
}

/// `‖k_{z̃}‖_q / ‖k_z‖_q` for `z̃ = ρ̃ e^{iφ}`, `z = ρ e^{iφ}`, `ρ̃ ≤ ρ`.
pub fn radial_ratio(theta: &InnerFunction, phi: f64, rho_inner: f64, rho: f64, q: f64, tol: f64) -> Result<f64> {
    if !(0.0 <= rho_inner && rho_inner <= rho && rho <= 1.0) {
        return invalid("radial_ratio needs 0 ≤ ρ̃ ≤ ρ ≤ 1");
    }
    let a = kernel_norm(theta, Complex64::from_polar(rho_inner, phi), q, 1, tol)?;
    let b = kernel_norm(theta, Complex64::from_polar(rho, phi), q, 1, tol)?;
    Ok(a / b)
}
