//! Adaptive Gauss–Kronrod quadrature on intervals and on the unit circle.
//!
//! Boundary integrals in this crate are taken against normalized arc measure
//! `dm = dθ / 2π`. Integrands may fail (they often call the certified level-set
//! search), so the adaptive driver works with `Result`-valued integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Values that can be integrated: real or complex scalars.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// One 15-point Kronrod panel with the embedded 7-point Gauss error estimate.
pub fn gk15<V, F>(f: &mut F, a: f64, b: f64) -> Result<(V, f64)>
where
    V: QuadValue,
    F: FnMut(f64) -> Result<V>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx)? + f(c + dx)?;
        kron = kron + s * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + s * WG[j / 2];
        }
    }
    let value = kron * h;
    let err = ((kron - gauss) * h).magnitude();
    Ok((value, err))
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-13, rel_tol: 1e-11, max_panels: 20_000 }
    }
}

impl QuadOptions {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, ..Self::default() }
    }
}

struct Panel<V> {
    a: f64,
    b: f64,
    value: V,
    err: f64,
}

impl<V> PartialEq for Panel<V> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<V> Eq for Panel<V> {}
impl<V> PartialOrd for Panel<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Panel<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral<V> {
    pub value: V,
    pub error: f64,
    pub panels: usize,
}

/// Adaptive integration over the partition given by `breaks` (sorted, at least
/// two entries). Panels with the largest error estimate are bisected until the
/// summed estimate meets the tolerance.
pub fn integrate<V, F>(f: F, breaks: &[f64], opts: QuadOptions) -> Result<Integral<V>>
where
    V: QuadValue,
    F: FnMut(f64) -> Result<V>,
{
    Ok(integrate_panels(f, breaks, opts)?.0)
}

/// Like [`integrate`], also returning the final panels `(a, b, value)` in
/// increasing order.
pub fn integrate_panels<V, F>(mut f: F, breaks: &[f64], opts: QuadOptions) -> Result<(Integral<V>, Vec<(f64, f64, V)>)>
where
    V: QuadValue,
    F: FnMut(f64) -> Result<V>,
{
    assert!(breaks.len() >= 2, "need at least one panel");
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (value, err) = gk15(&mut f, w[0], w[1])?;
            heap.push(Panel { a: w[0], b: w[1], value, err });
        }
    }
    let mut total = heap.iter().fold(V::zero(), |acc, p| acc + p.value);
    let mut err: f64 = heap.iter().map(|p| p.err).sum();
    loop {
        let count = heap.len();
        if err <= opts.abs_tol.max(opts.rel_tol * total.magnitude()) {
            // Final sum in sorted order keeps results independent of refinement history.
            let mut panels: Vec<Panel<V>> = heap.into_vec();
            panels.sort_by(|p, q| p.a.total_cmp(&q.a));
            let value = panels.iter().fold(V::zero(), |acc, p| acc + p.value);
            let error = panels.iter().map(|p| p.err).sum();
            let list = panels.iter().map(|p| (p.a, p.b, p.value)).collect();
            return Ok((Integral { value, error, panels: count }, list));
        }
        if count >= opts.max_panels {
            return Err(Error::QuadratureFailure { panels: count, error: err });
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel cannot be split any further in floating point.
            return Err(Error::QuadratureFailure { panels: count, error: err });
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid)?;
        let (v2, e2) = gk15(&mut f, mid, worst.b)?;
        total = total - worst.value + v1 + v2;
        err = (err - worst.err + e1 + e2).max(0.0);
        heap.push(Panel { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, err: e2 });
    }
}

/// `∫_T g dm` for `g` given as a function of the angle, with optional interior
/// break angles (any real values; they are reduced to `[0, 2π)`).
pub fn circle_mean<V, F>(mut g: F, break_angles: &[f64], opts: QuadOptions) -> Result<Integral<V>>
where
    V: QuadValue,
    F: FnMut(f64) -> Result<V>,
{
    let mut breaks = vec![0.0, 2.0 * PI];
    for &t in break_angles {
        let t = t.rem_euclid(2.0 * PI);
        if t > 0.0 && t < 2.0 * PI {
            breaks.push(t);
        }
    }
    // Four base panels so that smooth periodic integrands are resolved.
    for k in 1..4 {
        breaks.push(k as f64 * PI / 2.0);
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let scaled = QuadOptions { abs_tol: opts.abs_tol * 2.0 * PI, ..opts };
    let r = integrate(|t| g(t), &breaks, scaled)?;
    Ok(Integral { value: r.value * (0.5 / PI), error: r.error * (0.5 / PI), panels: r.panels })
}

/// Break angles `center ± 2^{-j}` down to spacing `smallest`, for integrands
/// peaked near one point of the circle.
pub fn geometric_breaks(center: f64, smallest: f64, out: &mut Vec<f64>) {
    let mut h = 1.0;
    out.push(center);
    while h > smallest {
        out.push(center - h);
        out.push(center + h);
        h *= 0.5;
    }
}

/// Nodes and weights of a composite 15-point Kronrod rule on `[a, b]` with
/// `panels` equal panels.
pub fn composite_nodes(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(15 * panels);
    for p in 0..panels {
        let lo = a + h * p as f64;
        let c = lo + 0.5 * h;
        let half = 0.5 * h;
        for j in 0..7 {
            out.push((c - half * XGK[j], half * WGK[j]));
            out.push((c + half * XGK[j], half * WGK[j]));
        }
        out.push((c, half * WGK[7]));
    }
    out
}
