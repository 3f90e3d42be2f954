//! Acceptance suite: runs every criterion and prints one PASS/FAIL line each.

use std::f64::consts::PI;
use std::time::Instant;

use modelspace_core::criteria::{
    check_carleson, check_thm31, check_v1, check_v2, check_volberg_treil, default_delta_grid, luecking_sum, schatten_necessary_sum,
    thm54_family_sum, ConditionReport, Thm31Options, Verdict,
};
use modelspace_core::geometry::Arc;
use modelspace_core::geometry::{family_meeting, whitney_decompose, FamilyArc, GenericSquare};
use modelspace_core::inner::{InnerFunction, ZeroFamily};
use modelspace_core::kernels::{bernstein_ratio, kernel_norm, levin_check, BernsteinWeightSpec, WeightKind};
use modelspace_core::measure::{DensityPiece, DiscMeasure, MeasureAtom};
use modelspace_core::spectral::{clark_measure, compactness_profile, embedding_gram, hs_integral, singular_values};
use modelspace_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TWO_PI: f64 = 2.0 * PI;

type Outcome = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Point with modulus `≤ r_max`, uniform in area.
fn disc_point(rng: &mut ChaCha8Rng, r_max: f64) -> Complex64 {
    Complex64::from_polar(r_max * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TWO_PI))
}

fn random_blaschke(rng: &mut ChaCha8Rng, max_n: usize, r_max: f64) -> InnerFunction {
    let n = rng.gen_range(1..=max_n);
    let zeros: Vec<Complex64> = (0..n).map(|_| disc_point(rng, r_max)).collect();
    InnerFunction::blaschke(&zeros).expect("zeros inside the disc")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn kernel_closed_form() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let theta = random_blaschke(&mut r, 8, 0.97);
        let z = disc_point(&mut r, 0.97);
        let quad = kernel_norm(&theta, z, 2.0, 1, 1e-12).map_err(|e| e.to_string())?.powi(2);
        let closed = theta.kernel_diagonal(z).map_err(|e| e.to_string())?;
        worst = worst.max((quad / closed - 1.0).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst <= 1e-8, || format!("max relative error {worst:e}"))?;
    ensure(secs < 30.0, || format!("runtime {secs:.1}s"))?;
    Ok(format!("max relative error {worst:.2e}, {secs:.2}s"))
}

fn clark_isometry() -> Outcome {
    let mut r = rng(2);
    let mut cases = vec![InnerFunction::monomial(2), InnerFunction::monomial(5)];
    cases.extend((0..5).map(|_| random_blaschke(&mut r, 8, 0.95)));
    let mut worst: f64 = 0.0;
    for b in &cases {
        for alpha in [Complex64::new(1.0, 0.0), Complex64::from_polar(1.0, PI / 4.0)] {
            let mu = clark_measure(b, alpha).map_err(|e| e.to_string())?;
            let g = embedding_gram(b, &mu, 1e-12).map_err(|e| e.to_string())?;
            worst = worst.max(g.identity_deviation());
        }
    }
    ensure(worst <= 1e-8, || format!("max deviation {worst:e}"))?;
    Ok(format!("14 cases, max entry deviation {worst:.2e}"))
}

fn trace_identity() -> Outcome {
    let mut r = rng(3);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let theta = random_blaschke(&mut r, 8, 0.95);
        let count = r.gen_range(1..=6);
        let atoms: Vec<(Complex64, f64)> = (0..count)
            .map(|_| {
                let p = if r.gen_bool(0.3) { Complex64::from_polar(1.0, r.gen_range(0.0..TWO_PI)) } else { disc_point(&mut r, 0.99) };
                (p, r.gen_range(0.01..2.0))
            })
            .collect();
        let mu = DiscMeasure::atomic(&atoms).map_err(|e| e.to_string())?;
        let tr = embedding_gram(&theta, &mu, 1e-12).map_err(|e| e.to_string())?.trace();
        let hs = hs_integral(&theta, &mu, 1e-12).map_err(|e| e.to_string())?;
        worst = worst.max((tr / hs - 1.0).abs());
    }
    ensure(worst <= 1e-10, || format!("max relative error {worst:e}"))?;
    Ok(format!("20 cases, max relative error {worst:.2e}"))
}

fn whitney_invariants() -> Outcome {
    let w = whitney_decompose(&InnerFunction::monomial(1), 0.5, 1e-4).map_err(|e| e.to_string())?;
    let exact = w.threshold_exact_count();
    ensure(exact == 50 && w.arcs.len() == 51, || format!("{exact} threshold-exact arcs of {}", w.arcs.len()))?;
    for a in w.arcs.iter().filter(|a| a.threshold_exact) {
        let len = a.arc.length();
        ensure(a.d.width() <= 1e-4, || format!("bracket width {:e}", a.d.width()))?;
        ensure(a.d.lo >= 3.0 * len - 1e-4 && a.d.hi <= 5.0 * len + 1e-4, || format!("arc {} breaks 3|I| ≤ d ≤ 5|I|", a.k))?;
    }
    let theta = InnerFunction::from_family(ZeroFamily::SpiralDyadic { phase: 1.0 }, 12).map_err(|e| e.to_string())?;
    let w = whitney_decompose(&theta, 0.5, 1e-4).map_err(|e| e.to_string())?;
    for a in &w.arcs {
        ensure(a.d.hi >= 3.0 * a.arc.length(), || format!("truncation arc {} breaks the lower bound", a.k))?;
    }
    // Lengths shrink toward angle 0 from both sides.
    let first = &w.arcs[..6];
    let last = &w.arcs[w.arcs.len() - 6..];
    ensure(first.windows(2).all(|p| p[0].arc.length() < p[1].arc.length()), || "lengths do not grow away from 0⁺".into())?;
    ensure(last.windows(2).all(|p| p[0].arc.length() > p[1].arc.length()), || "lengths do not shrink toward 2π⁻".into())?;
    let smallest = first[0].arc.length().min(last[5].arc.length());
    ensure(smallest < 1e-3, || format!("smallest arc near the spectrum {smallest:e}"))?;
    Ok(format!("z: 50+1 arcs; truncation N=12: {} arcs, smallest {smallest:.2e}", w.arcs.len()))
}

fn blaschke_log_bound() -> Outcome {
    let mut r = rng(5);
    let mut violations = 0;
    for _ in 0..10_000 {
        let theta = random_blaschke(&mut r, 8, 0.99);
        let z = disc_point(&mut r, 0.999);
        let lhs = 2.0 * theta.modulus(z).ln();
        let rhs = theta.blaschke_log_bound(z);
        if lhs > rhs + 4.0 * f64::EPSILON * rhs.abs() {
            violations += 1;
        }
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    Ok("10000 cases, zero violations".into())
}

fn levin() -> Outcome {
    let mut r = rng(6);
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    for _ in 0..100 {
        let theta = random_blaschke(&mut r, 6, 0.95);
        let zeta = loop {
            let t: f64 = r.gen_range(0.0..TWO_PI);
            let clear = theta.zeros().iter().all(|a| a.norm() < 1e-3 || (Complex64::from_polar(1.0, t) - a / a.norm()).norm() > 0.05);
            if clear {
                break Complex64::from_polar(1.0, t);
            }
        };
        let coeffs: Vec<Complex64> =
            (0..theta.zeros().len()).map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
        let l = levin_check(&theta, &coeffs, zeta, 1 << 14).map_err(|e| e.to_string())?;
        worst = worst.max(l.ratio);
        if l.derivative > (1.0 + 1e-3) * l.sup_norm_sampled * l.theta_prime {
            violations += 1;
        }
    }
    ensure(violations == 0, || format!("{violations} violations, worst ratio {worst}"))?;
    Ok(format!("100 cases, worst |f'|/(‖f‖∞|Θ'|) = {worst:.4}"))
}

fn bernstein_exact() -> Outcome {
    let m = DiscMeasure::uniform(1.0).map_err(|e| e.to_string())?;
    let spec = BernsteinWeightSpec::new(2.0, 1, WeightKind::DEpsPowN).and_then(|s| s.with_epsilon(0.5)).map_err(|e| e.to_string())?;
    let v = bernstein_ratio(&InnerFunction::monomial(4), &m, &spec, 0, 0, 1e-12).map_err(|e| e.to_string())?.value;
    let expect = (1.0 - 0.5f64.powf(0.25)) * 3.0;
    ensure((v - expect).abs() <= 1e-6, || format!("z⁴: {v} vs {expect}"))?;
    let zero = bernstein_ratio(&InnerFunction::monomial(1), &m, &spec, 0, 0, 1e-12).map_err(|e| e.to_string())?.value;
    ensure(zero == 0.0, || format!("z: ratio {zero}"))?;
    Ok(format!("z⁴: {v:.9} (expected {expect:.9}); z: 0"))
}

/// Inner functions for the coherence suites: finite Blaschke products with
/// moderate zeros, and truncations coarser than the resolution.
fn coherence_theta(r: &mut ChaCha8Rng, depth: u32) -> InnerFunction {
    if r.gen_bool(0.5) {
        random_blaschke(r, 5, 0.9)
    } else {
        let n = r.gen_range(2..=(depth as usize - 4));
        let family = if r.gen_bool(0.5) {
            ZeroFamily::SpiralDyadic { phase: 1.0 }
        } else {
            ZeroFamily::RadialDyadic { angle: r.gen_range(0.0..TWO_PI) }
        };
        InnerFunction::from_family(family, n).expect("valid family")
    }
}

fn coherence_measure(r: &mut ChaCha8Rng, theta: &InnerFunction) -> DiscMeasure {
    let mut atoms = Vec::new();
    for _ in 0..r.gen_range(0..=5) {
        let point = match r.gen_range(0..3) {
            0 => disc_point(r, 0.999),
            1 => Complex64::from_polar(1.0, r.gen_range(0.0..TWO_PI)),
            _ => {
                // Near a boundary spectrum point when there is one.
                let t = theta.boundary_spectrum_angles().first().copied().unwrap_or(0.0) + r.gen_range(-0.05..0.05);
                Complex64::from_polar(1.0 - 10f64.powf(-r.gen_range(1.0..4.0)), t)
            }
        };
        atoms.push(MeasureAtom { point, mass: 10f64.powf(-r.gen_range(0.0..4.0)) });
    }
    let mut density = Vec::new();
    if r.gen_bool(0.5) {
        let start = r.gen_range(0.0..TWO_PI);
        let arc = Arc::with_length(start, r.gen_range(0.01..3.0)).expect("arc");
        density.push(DensityPiece { arc, density: r.gen_range(0.0..2.0) });
    }
    DiscMeasure::new(atoms, density).expect("valid measure")
}

fn witness_verifies(rep: &ConditionReport, mu: &DiscMeasure) -> Result<(), String> {
    ensure(rep.verdict == Verdict::FailsWithWitness, || format!("{} verdict {:?}", rep.criterion.as_str(), rep.verdict))?;
    let w = rep.witness.as_ref().ok_or("missing witness")?;
    let again = w.recompute(mu);
    ensure(w.violates() && again > w.threshold && (again - w.ratio).abs() <= 1e-9 * w.ratio.abs().max(1.0), || {
        format!("{} witness ratio {} (recomputed {again}) vs threshold {}", rep.criterion.as_str(), w.ratio, w.threshold)
    })
}

fn coherence() -> Outcome {
    const DEPTH: u32 = 8;
    let mut r = rng(8);
    let grid = default_delta_grid(DEPTH);
    let mut v1_holds = 0;
    let mut v2_fails = 0;
    for case in 0..200 {
        let theta = coherence_theta(&mut r, DEPTH);
        let mu = coherence_measure(&mut r, &theta);
        let v1 = check_v1(&theta, &mu, &grid, DEPTH, None).map_err(|e| e.to_string())?;
        let v2 = check_v2(&theta, 0.5, &mu, DEPTH, None).map_err(|e| e.to_string())?;
        v1_holds += (v1.verdict == Verdict::HoldsAtResolution) as usize;
        v2_fails += (v2.verdict == Verdict::FailsWithWitness) as usize;
        ensure(!(v1.verdict == Verdict::HoldsAtResolution && v2.verdict == Verdict::FailsWithWitness), || {
            format!("(a) case {case}: V1 holds while V2 fails")
        })?;
    }
    for case in 0..200 {
        let theta = coherence_theta(&mut r, DEPTH);
        let mu = coherence_measure(&mut r, &theta);
        let rr = r.gen_range(0.5..4.0);
        let a = 10f64.powf(r.gen_range(-2.0..1.5));
        let l = luecking_sum(&mu, rr, DEPTH).map_err(|e| e.to_string())?.value;
        let t = thm54_family_sum(&theta, 0.5, a, &mu, rr, DEPTH).map_err(|e| e.to_string())?.value;
        let n = schatten_necessary_sum(&theta, 0.5, &mu, rr, DEPTH).map_err(|e| e.to_string())?.value;
        ensure(l >= t && t >= n, || format!("(b) case {case}: luecking {l} thm54 {t} necessary {n}"))?;
    }
    let whitney: Vec<GenericSquare> =
        whitney_decompose(&InnerFunction::monomial(1), 0.5, 1e-4).map_err(|e| e.to_string())?.arcs.iter().map(|a| a.square()).collect();
    for case in 0..200 {
        let theta = coherence_theta(&mut r, DEPTH);
        let base = coherence_measure(&mut r, &theta);
        let c = 10f64.powf(r.gen_range(-1.0..2.0));
        let plant = |mu: &DiscMeasure, s: &GenericSquare, mass: f64| {
            let mid = Complex64::from_polar(0.5 * (s.h0 + s.inner_radius()), s.phi0 + 0.5 * s.h);
            let mut atoms = mu.atoms().to_vec();
            atoms.push(MeasureAtom { point: mid, mass });
            DiscMeasure::new(atoms, mu.density().to_vec()).expect("valid measure")
        };
        match case % 3 {
            0 => {
                let f = FamilyArc { level: r.gen_range(1..=DEPTH), index: 0, shifted: r.gen_bool(0.5) };
                let f = FamilyArc { index: r.gen_range(0..1u64 << f.level), ..f };
                let mu = plant(&base, &f.square(), 2.0 * c * f.arc().length());
                witness_verifies(&check_carleson(&mu, DEPTH, Some(c)).map_err(|e| e.to_string())?, &mu)
                    .map_err(|e| format!("(c) case {case}: {e}"))?;
            }
            1 => {
                let (meets, _) = family_meeting(&theta, 0.5, DEPTH).map_err(|e| e.to_string())?;
                if meets.is_empty() {
                    continue;
                }
                let f = meets[r.gen_range(0..meets.len())];
                let mu = plant(&base, &f.square(), 2.0 * c * f.arc().length());
                witness_verifies(&check_volberg_treil(&theta, 0.5, &mu, DEPTH, Some(c)).map_err(|e| e.to_string())?, &mu)
                    .map_err(|e| format!("(c) case {case}: {e}"))?;
            }
            _ => {
                let s = whitney[r.gen_range(0..whitney.len())];
                let mu = plant(&base, &s, 2f64.powi(DEPTH as i32) * s.lower_side_length());
                let opts = Thm31Options::new(3.0, 2.0, DEPTH);
                let rep = check_thm31(&InnerFunction::monomial(1), &whitney, &mu, &opts).map_err(|e| e.to_string())?;
                witness_verifies(&rep.bounded, &mu).map_err(|e| format!("(c) case {case}: {e}"))?;
            }
        }
    }
    Ok(format!("(a) 200 cases, {v1_holds} V1 holds, {v2_fails} V2 fails, no conflict; (b) 200 ordered; (c) 200 planted witnesses verified"))
}

fn spiral_point_mass() -> Outcome {
    let theta = InnerFunction::from_family(ZeroFamily::SpiralDyadic { phase: 1.0 }, 12).map_err(|e| e.to_string())?;
    let d1 = DiscMeasure::point_mass(Complex64::new(1.0, 0.0), 1.0).map_err(|e| e.to_string())?;
    let rep = check_volberg_treil(&theta, 0.5, &d1, 12, None).map_err(|e| e.to_string())?;
    witness_verifies(&rep, &d1)?;
    let mut norms = Vec::new();
    for n in 1..=12 {
        let t = theta.retruncate(n).map_err(|e| e.to_string())?;
        let g = embedding_gram(&t, &d1, 1e-12).map_err(|e| e.to_string())?;
        norms.push(singular_values(&g, &[]).map_err(|e| e.to_string())?.operator_norm);
    }
    let sup = norms.iter().copied().fold(0.0, f64::max);
    ensure(sup <= 2.0 * norms[5], || format!("operator norms {norms:?}"))?;
    Ok(format!(
        "volberg_treil fails (ratio {:.1}); sup operator norm {sup:.4} ≤ 2·{:.4}",
        rep.witness.as_ref().map_or(0.0, |w| w.ratio),
        norms[5]
    ))
}

/// Atoms `a_k|I_k|` at the midpoints of the Whitney arcs of `Θ_N`, with `k`
/// the rank of the arc by decreasing length.
fn whitney_midpoint_measure(theta: &InnerFunction) -> modelspace_core::Result<DiscMeasure> {
    let w = whitney_decompose(theta, 0.5, 1e-3)?;
    let mut arcs: Vec<Arc> = w.arcs.iter().map(|a| a.arc).collect();
    arcs.sort_by(|a, b| b.length().total_cmp(&a.length()));
    let atoms: Vec<(Complex64, f64)> = arcs.iter().enumerate().map(|(k, a)| (a.midpoint(), a.length() / (k + 1) as f64)).collect();
    DiscMeasure::atomic(&atoms)
}

fn compactness_proxy() -> Outcome {
    let theta = InnerFunction::from_family(ZeroFamily::RadialDyadic { angle: 0.0 }, 12).map_err(|e| e.to_string())?;
    let rows = compactness_profile(&theta, &[8, 10, 12], whitney_midpoint_measure, 5, 1e-12).map_err(|e| e.to_string())?;
    let tail = |row: &modelspace_core::spectral::CompactnessRow, k: usize| row.singular_values.iter().skip(k).copied().fold(0.0, f64::max);
    let mut summary = Vec::new();
    let mut bad = Vec::new();
    for k in 5..8 {
        let t: Vec<f64> = rows.iter().map(|row| tail(row, k)).collect();
        summary.push(format!("k={k}: {:.3e}/{:.3e}/{:.3e}", t[0], t[1], t[2]));
        if t.windows(2).any(|p| p[1] > p[0]) {
            bad.push(k);
        }
    }
    ensure(bad.is_empty(), || format!("tails increase in N for k = {bad:?}; {}", summary.join(", ")))?;
    Ok(summary.join(", "))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("kernel closed form", kernel_closed_form),
        ("Clark isometry", clark_isometry),
        ("trace identity", trace_identity),
        ("Whitney invariants", whitney_invariants),
        ("Blaschke log bound", blaschke_log_bound),
        ("Levin inequality", levin),
        ("Bernstein ratio exact cases", bernstein_exact),
        ("criterion coherence", coherence),
        ("spiral point mass", spiral_point_mass),
        ("compactness proxy", compactness_proxy),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name} [{secs:.1}s]: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} [{secs:.1}s]: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of 10 passed in {:.1}s", 10 - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
