//! JSON presentation of inner functions and the parametric zero families.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZeroDoc {
    pub re: f64,
    pub im: f64,
    #[serde(default = "one")]
    pub mult: u32,
}

/// Point mass `mass · δ_{e^{i angle}}` of the singular measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingularAtom {
    pub angle: f64,
    pub mass: f64,
}

impl SingularAtom {
    pub fn point(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.angle)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorDoc {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub truncation: usize,
}

/// Finitely presented inner function as read from a config file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnerFunctionSpec {
    #[serde(default)]
    pub blaschke_zeros: Vec<ZeroDoc>,
    #[serde(default)]
    pub singular_atoms: Vec<SingularAtom>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorDoc>,
    #[serde(default)]
    pub accumulation_angles: Vec<f64>,
}

/// Closed-form zero sequences accumulating at a single boundary point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZeroFamily {
    /// `z_n = (1 - 2^{-n}) e^{i phase / n}`, accumulating at angle 0.
    SpiralDyadic { phase: f64 },
    /// `z_n = (1 - 2^{-n}) e^{i angle}`.
    RadialDyadic { angle: f64 },
    /// `z_n = (1 - ratio^n) e^{i angle}`.
    RadialGeometric { ratio: f64, angle: f64 },
}

impl ZeroFamily {
    pub fn from_doc(doc: &GeneratorDoc) -> Result<Self> {
        let get = |key: &str, default: f64| doc.params.get(key).copied().unwrap_or(default);
        let known: &[&str] = match doc.name.as_str() {
            "spiral_dyadic" => &["phase"],
            "radial_dyadic" => &["angle"],
            "radial_geometric" => &["ratio", "angle"],
            other => return invalid(format!("generator.name: unknown zero family `{other}`")),
        };
        if let Some(k) = doc.params.keys().find(|k| !known.contains(&k.as_str())) {
            return invalid(format!("generator.params.{k}: not a parameter of `{}`", doc.name));
        }
        let family = match doc.name.as_str() {
            "spiral_dyadic" => ZeroFamily::SpiralDyadic { phase: get("phase", 1.0) },
            "radial_dyadic" => ZeroFamily::RadialDyadic { angle: get("angle", 0.0) },
            _ => {
                let ratio = get("ratio", 0.5);
                if !(ratio > 0.0 && ratio < 1.0) {
                    return invalid("generator.params.ratio: must lie in (0, 1)");
                }
                ZeroFamily::RadialGeometric { ratio, angle: get("angle", 0.0) }
            }
        };
        Ok(family)
    }

    pub fn name(&self) -> &'static str {
        match self {
            ZeroFamily::SpiralDyadic { .. } => "spiral_dyadic",
            ZeroFamily::RadialDyadic { .. } => "radial_dyadic",
            ZeroFamily::RadialGeometric { .. } => "radial_geometric",
        }
    }

    /// The `n`-th zero, `n ≥ 1`.
    pub fn zero(&self, n: usize) -> Complex64 {
        let nf = n as f64;
        match *self {
            ZeroFamily::SpiralDyadic { phase } => Complex64::from_polar(1.0 - 0.5f64.powi(n as i32), phase / nf),
            ZeroFamily::RadialDyadic { angle } => Complex64::from_polar(1.0 - 0.5f64.powi(n as i32), angle),
            ZeroFamily::RadialGeometric { ratio, angle } => Complex64::from_polar(1.0 - ratio.powi(n as i32), angle),
        }
    }

    pub fn accumulation_angle(&self) -> f64 {
        match *self {
            ZeroFamily::SpiralDyadic { .. } => 0.0,
            ZeroFamily::RadialDyadic { angle } | ZeroFamily::RadialGeometric { angle, .. } => angle.rem_euclid(2.0 * PI),
        }
    }

    pub fn zeros(&self, truncation: usize) -> Vec<Complex64> {
        (1..=truncation).map(|n| self.zero(n)).collect()
    }

    /// Numerical Blaschke check on the truncation: the increments `1 - |z_n|`
    /// are positive and decay.
    pub fn check_blaschke(&self, truncation: usize) -> Result<()> {
        let inc: Vec<f64> = self.zeros(truncation).iter().map(|z| 1.0 - z.norm()).collect();
        if inc.iter().any(|&d| d <= 0.0) {
            return invalid("generator: zeros must lie inside the open disc");
        }
        if inc.len() >= 2 && inc[inc.len() - 1] > inc[0] {
            return invalid("generator: increments 1 - |z_n| do not decay");
        }
        if inc.len() >= 4 {
            let half = inc.len() / 2;
            let head: f64 = inc[..half].iter().sum();
            let tail: f64 = inc[inc.len() - half..].iter().sum();
            if tail >= head {
                return invalid("generator: partial sums of 1 - |z_n| do not settle");
            }
        }
        Ok(())
    }
}
