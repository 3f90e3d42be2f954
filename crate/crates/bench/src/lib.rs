//! Shared fixtures for the benches.

use modelspace_core::inner::{InnerFunction, ZeroFamily};
use modelspace_core::measure::DiscMeasure;
use modelspace_core::Complex64;

/// Finite Blaschke product with `n` zeros on a spiral toward the circle.
pub fn spiral_blaschke(n: usize) -> InnerFunction {
    let zeros: Vec<Complex64> = (1..=n).map(|k| Complex64::from_polar(1.0 - 0.6 / k as f64, 2.4 * k as f64)).collect();
    InnerFunction::blaschke(&zeros).expect("zeros inside the disc")
}

pub fn spiral_truncation(n: usize) -> InnerFunction {
    InnerFunction::from_family(ZeroFamily::SpiralDyadic { phase: 1.0 }, n).expect("valid family")
}

/// Atoms on a grid of radii and angles plus one boundary density piece.
pub fn mixed_measure(atoms: usize) -> DiscMeasure {
    let points: Vec<(Complex64, f64)> =
        (0..atoms).map(|k| (Complex64::from_polar(0.5 + 0.49 * ((k % 7) as f64 / 7.0), 0.37 * k as f64), 1.0 / (k + 1) as f64)).collect();
    let mut spec = DiscMeasure::atomic(&points).expect("valid atoms").to_spec();
    spec.boundary_density.push(modelspace_core::measure::DensityDoc { start: 0.5, end: 2.0, density: 1.5 });
    DiscMeasure::from_spec(&spec).expect("valid measure")
}
