//! Takenaka–Malmquist orthonormal basis of `K²_B` for a finite Blaschke
//! product `B`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::inner::InnerFunction;
use crate::jet::Jet;

/// Largest supported dimension.
pub const MAX_TM_DIM: usize = 64;

const POLE_TOL: f64 = 1e-14;

/// `e_k(z) = √(1-|a_k|²)/(1-ā_k z) · Π_{j<k} (z-a_j)/(1-ā_j z)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TmBasis {
    zeros: Vec<Complex64>,
}

impl TmBasis {
    pub fn new(zeros: &[Complex64]) -> Result<Self> {
        if zeros.is_empty() {
            return invalid("basis needs at least one zero");
        }
        if zeros.len() > MAX_TM_DIM {
            return invalid(format!("basis dimension {} exceeds {MAX_TM_DIM}", zeros.len()));
        }
        if let Some(a) = zeros.iter().find(|a| !(a.norm() < 1.0)) {
            return Err(Error::PoleInside(format!("{a}")));
        }
        Ok(Self { zeros: zeros.to_vec() })
    }

    /// Basis of `K²_Θ` for a Blaschke product (truncations included).
    pub fn for_inner(theta: &InnerFunction) -> Result<Self> {
        if !theta.atoms().is_empty() {
            return Err(Error::NotFiniteBlaschke("singular inner factor present".into()));
        }
        Self::new(theta.zeros())
    }

    pub fn dim(&self) -> usize {
        self.zeros.len()
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    fn check_pole(&self, z: Complex64) -> Result<()> {
        for a in &self.zeros {
            if (1.0 - a.conj() * z).norm() < POLE_TOL {
                return Err(Error::PoleOnEvaluation(format!("{z}")));
            }
        }
        Ok(())
    }

    /// All basis functions at `z`.
    pub fn eval_all(&self, z: Complex64) -> Result<Vec<Complex64>> {
        self.check_pole(z)?;
        let mut out = Vec::with_capacity(self.dim());
        let mut prefix = Complex64::new(1.0, 0.0);
        for &a in &self.zeros {
            let den = 1.0 - a.conj() * z;
            out.push(prefix * (1.0 - a.norm_sqr()).sqrt() / den);
            prefix *= (z - a) / den;
        }
        Ok(out)
    }

    pub fn eval(&self, k: usize, z: Complex64) -> Result<Complex64> {
        Ok(self.eval_all(z)?[k])
    }

    /// `Σ c_k e_k(z)`.
    pub fn combination(&self, coeffs: &[Complex64], z: Complex64) -> Result<Complex64> {
        Ok(self.eval_all(z)?.iter().zip(coeffs).map(|(e, c)| e * c).sum())
    }

    /// Taylor jets of all basis functions at `z`.
    pub fn jets(&self, z: Complex64, order: usize) -> Result<Vec<Jet>> {
        self.check_pole(z)?;
        let var = Jet::variable(z, order);
        let one = Jet::constant(Complex64::new(1.0, 0.0), order);
        let mut out = Vec::with_capacity(self.dim());
        let mut prefix = one.clone();
        for &a in &self.zeros {
            let den = &one - &var.scale(a.conj());
            let head = Jet::constant(Complex64::new((1.0 - a.norm_sqr()).sqrt(), 0.0), order);
            let pole = || Error::PoleOnEvaluation(format!("{z}"));
            out.push(&prefix * &head.div(&den).ok_or_else(pole)?);
            let step = (&var - &Jet::constant(a, order)).div(&den).ok_or_else(pole)?;
            prefix = &prefix * &step;
        }
        Ok(out)
    }

    /// `n`-th derivatives of all basis functions at `z`.
    pub fn derivatives(&self, z: Complex64, n: usize) -> Result<Vec<Complex64>> {
        Ok(self.jets(z, n)?.iter().map(|j| j.derivative(n)).collect())
    }

    /// `f^{(n)}(z)` for `f = Σ c_k e_k`.
    pub fn combination_derivative(&self, coeffs: &[Complex64], z: Complex64, n: usize) -> Result<Complex64> {
        Ok(self.derivatives(z, n)?.iter().zip(coeffs).map(|(e, c)| e * c).sum())
    }
}
