//! Truncated Taylor series in one complex variable, for exact derivatives of
//! rational functions.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

/// Coefficients of `f(z0 + h) = Σ_{k ≤ order} c_k h^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    c: Vec<Complex64>,
}

impl Jet {
    pub fn constant(v: Complex64, order: usize) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0); order + 1];
        c[0] = v;
        Self { c }
    }

    /// The identity function expanded at `z0`.
    pub fn variable(z0: Complex64, order: usize) -> Self {
        let mut j = Self::constant(z0, order);
        if order >= 1 {
            j.c[1] = Complex64::new(1.0, 0.0);
        }
        j
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> Complex64 {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.c
    }

    /// `f^{(n)}(z0) = n! c_n`.
    pub fn derivative(&self, n: usize) -> Complex64 {
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        self.c[n] * fact
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { c: self.c.iter().map(|&x| x * s).collect() }
    }

    /// Series quotient; `None` when the divisor vanishes at the expansion point.
    pub fn div(&self, other: &Jet) -> Option<Jet> {
        let d0 = other.c[0];
        if d0.norm() == 0.0 {
            return None;
        }
        let n = self.c.len().min(other.c.len());
        let mut q = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            let mut acc = self.c[k];
            for j in 1..=k {
                acc -= other.c[j] * q[k - j];
            }
            q[k] = acc / d0;
        }
        Some(Jet { c: q })
    }

    pub fn exp(&self) -> Jet {
        // e' = a' e, solved coefficient by coefficient.
        let n = self.c.len();
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[0] = self.c[0].exp();
        for k in 1..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 1..=k {
                acc += self.c[j] * e[k - j] * j as f64;
            }
            e[k] = acc / k as f64;
        }
        Jet { c: e }
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        Jet { c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        Jet { c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet { c: self.c.iter().map(|a| -a).collect() }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        let n = self.c.len().min(o.c.len());
        let mut c = vec![Complex64::new(0.0, 0.0); n];
        for (i, a) in self.c.iter().enumerate().take(n) {
            for (j, b) in o.c.iter().enumerate().take(n - i) {
                c[i + j] += a * b;
            }
        }
        Jet { c }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn polynomial_and_rational_derivatives() {
        let z0 = c(0.3, -0.2);
        let z = Jet::variable(z0, 4);
        let cube = &(&z * &z) * &z;
        assert!((cube.derivative(1) - 3.0 * z0 * z0).norm() < 1e-15);
        assert!((cube.derivative(2) - 6.0 * z0).norm() < 1e-15);
        assert!((cube.derivative(3) - c(6.0, 0.0)).norm() < 1e-14);
        assert_eq!(cube.derivative(4), c(0.0, 0.0));
        // 1/(1-z): n-th derivative n!/(1-z)^{n+1}.
        let one = Jet::constant(c(1.0, 0.0), 4);
        let r = one.div(&(&one - &z)).unwrap();
        for n in 0..=4 {
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            let expect = fact / (c(1.0, 0.0) - z0).powi(n as i32 + 1);
            assert!((r.derivative(n) - expect).norm() < 1e-12 * expect.norm());
        }
        assert!(one.div(&Jet::constant(c(0.0, 0.0), 4)).is_none());
    }

    #[test]
    fn exponential_series() {
        let z0 = c(0.1, 0.4);
        let e = Jet::variable(z0, 5).scale(c(2.0, 0.0)).exp();
        for n in 0..=5 {
            let expect = (2.0 * z0).exp() * 2f64.powi(n as i32);
            assert!((e.derivative(n) - expect).norm() < 1e-12 * expect.norm());
        }
    }
}
