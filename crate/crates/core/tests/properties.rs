use std::f64::consts::PI;

use modelspace_core::criteria::{check_volberg_treil, luecking_sum, schatten_necessary_sum, thm54_family_sum};
use modelspace_core::geometry::{carleson_square, family_meeting, whitney_decompose, Arc};
use modelspace_core::inner::{InnerFunction, LevelSet, SingularAtom, ZeroFamily};
use modelspace_core::kernels::reproducing_kernel;
use modelspace_core::measure::{carleson_constant, DensityPiece, DiscMeasure, MeasureAtom};
use modelspace_core::spectral::{embedding_gram, hs_integral, singular_values};
use modelspace_core::Complex64;
use proptest::prelude::*;

const TWO_PI: f64 = 2.0 * PI;

fn polar() -> impl Strategy<Value = Complex64> {
    (0.0f64..0.95, 0.0..TWO_PI).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn blaschke(max: usize) -> impl Strategy<Value = InnerFunction> {
    prop::collection::vec((0.0f64..0.9, 0.0..TWO_PI), 1..=max)
        .prop_map(|zs| InnerFunction::blaschke(&zs.iter().map(|&(r, t)| Complex64::from_polar(r, t)).collect::<Vec<_>>()).unwrap())
}

fn measure() -> impl Strategy<Value = DiscMeasure> {
    let atom = (0.0f64..1.0, 0.0..TWO_PI, 0.001f64..2.0, any::<bool>()).prop_map(|(r, t, m, on_circle)| MeasureAtom {
        point: Complex64::from_polar(if on_circle { 1.0 } else { r.sqrt() * 0.999 }, t),
        mass: m,
    });
    let piece = prop::option::of((0.0..TWO_PI, 0.01f64..2.0, 0.0f64..3.0));
    (prop::collection::vec(atom, 0..6), piece).prop_map(|(atoms, piece)| {
        let density = piece.map(|(s, l, d)| DensityPiece { arc: Arc::with_length(s, l).unwrap(), density: d }).into_iter().collect();
        DiscMeasure::new(atoms, density).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, .. ProptestConfig::default() })]

    #[test]
    fn schwarz_pick_and_unimodularity(theta in blaschke(6), z in polar(), t in 0.0..TWO_PI) {
        let v = theta.evaluate(z).unwrap();
        prop_assert!(v.norm() <= 1.0 + 1e-12);
        let d = theta.derivative(z).unwrap();
        prop_assert!(d.norm() <= (1.0 - v.norm_sqr()) / (1.0 - z.norm_sqr()) * (1.0 + 1e-9) + 1e-12);
        let b = theta.evaluate(Complex64::from_polar(1.0, t)).unwrap();
        prop_assert!((b.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_is_hermitian_positive(theta in blaschke(6), z in polar(), w in polar()) {
        let kzw = reproducing_kernel(&theta, z, w).unwrap();
        let kwz = reproducing_kernel(&theta, w, z).unwrap();
        prop_assert!((kzw - kwz.conj()).norm() <= 1e-10 * (1.0 + kzw.norm()));
        let kzz = reproducing_kernel(&theta, z, z).unwrap();
        let kww = reproducing_kernel(&theta, w, w).unwrap();
        prop_assert!(kzz.im.abs() < 1e-12 && kww.im.abs() < 1e-12);
        prop_assert!((kzz.re - theta.kernel_diagonal(z).unwrap()).abs() <= 1e-12 * kzz.re.max(1.0));
        // Cauchy-Schwarz for the Gram matrix of {k_z, k_w}.
        prop_assert!(kzw.norm_sqr() <= kzz.re * kww.re * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn level_distance_brackets_are_consistent(theta in blaschke(4), t in 0.0..TWO_PI, e1 in 0.1f64..0.5, e2 in 0.5f64..0.9) {
        let p = Complex64::from_polar(1.0, t);
        let small = LevelSet::new(&theta, e1).unwrap().distance(&p, 1e-6).unwrap();
        let large = LevelSet::new(&theta, e2).unwrap().distance(&p, 1e-6).unwrap();
        prop_assert!(small.lo <= small.hi && small.hi - small.lo <= 1e-6);
        // Ω grows with ε, so the distance shrinks.
        prop_assert!(large.lo <= small.hi);
        // Every zero lies in Ω, so it bounds the distance from above.
        for &a in theta.zeros() {
            prop_assert!(small.lo <= (a - p).norm() + 1e-12);
        }
        let n = LevelSet::new(&theta, e1).unwrap().nearest(p, 1e-3).unwrap();
        prop_assert!(n.value >= small.lo - 1e-9 && n.value <= small.hi + 1e-3 * small.hi);
    }

    #[test]
    fn square_mass_is_monotone_and_additive(mu in measure(), s in 0.0..TWO_PI, l in 0.01f64..3.0, frac in 0.1f64..0.9) {
        let outer = Arc::with_length(s, l).unwrap();
        let inner = Arc::with_length(s + 0.5 * (1.0 - frac) * l, frac * l).unwrap();
        let big = mu.mass_on_square(&carleson_square(&outer).unwrap());
        let small = mu.mass_on_square(&carleson_square(&inner).unwrap());
        prop_assert!(small <= big + 1e-12);
        let left = Arc::with_length(s, frac * l).unwrap();
        let right = Arc::with_length(s + frac * l, (1.0 - frac) * l).unwrap();
        let split = mu.density_on_arc(&left) + mu.density_on_arc(&right);
        prop_assert!((split - mu.density_on_arc(&outer)).abs() <= 1e-12 * (1.0 + split));
        prop_assert!(big <= mu.total_mass() + 1e-12);
    }

    #[test]
    fn carleson_estimates_grow_with_depth_and_scale(mu in measure(), c in 0.1f64..10.0) {
        let mut prev = 0.0;
        for depth in [2, 5, 8, 11] {
            let v = carleson_constant(&mu, depth).unwrap().value;
            prop_assert!(v >= prev);
            prev = v;
        }
        let scaled = carleson_constant(&mu.scaled(c), 11).unwrap().value;
        prop_assert!((scaled - c * prev).abs() <= 1e-12 * (1.0 + scaled));
    }

    #[test]
    fn gram_is_hermitian_with_bounded_rank(theta in blaschke(6), points in prop::collection::vec((polar(), 0.01f64..2.0), 1..4)) {
        let mu = DiscMeasure::atomic(&points).unwrap();
        let g = embedding_gram(&theta, &mu, 1e-12).unwrap();
        for j in 0..g.dim() {
            for k in 0..g.dim() {
                prop_assert!((g.matrix[j][k] - g.matrix[k][j].conj()).norm() < 1e-12);
            }
        }
        let s = singular_values(&g, &[2.0]).unwrap();
        let top = s.operator_norm.max(1e-300);
        let rank = s.singular_values.iter().filter(|&&v| v > 1e-6 * top).count();
        prop_assert!(rank <= points.len().min(g.dim()));
        let hs = hs_integral(&theta, &mu, 1e-12).unwrap();
        prop_assert!((s.hilbert_schmidt - hs).abs() <= 1e-9 * hs.max(1.0));
    }

    #[test]
    fn sums_are_ordered_and_nondecreasing(theta in blaschke(4), mu in measure(), r in 0.5f64..4.0, a in 0.01f64..10.0) {
        let l = luecking_sum(&mu, r, 8).unwrap();
        let t = thm54_family_sum(&theta, 0.5, a, &mu, r, 8).unwrap();
        let n = schatten_necessary_sum(&theta, 0.5, &mu, r, 8).unwrap();
        prop_assert!(l.value >= t.value && t.value >= n.value);
        for sum in [&l, &t, &n] {
            prop_assert!(sum.partial_sums.windows(2).all(|w| w[1] >= w[0]));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, .. ProptestConfig::default() })]

    /// `μ = μ|_F + μ|_G`: the `G` part has stable Carleson estimates and each
    /// Whitney square of the `F` part is controlled by the family supremum over
    /// squares meeting `Ω`.
    #[test]
    fn whitney_split_controls_both_parts(theta in blaschke(3), mu in measure()) {
        const DEPTH: u32 = 10;
        let w = whitney_decompose(&theta, 0.5, 1e-4).unwrap();
        let (f, g) = mu.split_whitney(&w);
        prop_assert!((f.total_mass() + g.total_mass() - mu.total_mass()).abs() <= 1e-9 * (1.0 + mu.total_mass()));
        let est: Vec<f64> = [8, 12, 16].iter().map(|&d| carleson_constant(&g, d).unwrap().value).collect();
        prop_assert!(est[0] <= est[1] && est[1] <= est[2]);
        prop_assert!(est[2] <= 8.0 * est[0] + 1e-12, "{est:?}");
        let (meets, undecided) = family_meeting(&theta, 0.5, DEPTH).unwrap();
        let v = meets.iter().chain(&undecided).map(|a| f.family_ratio(a)).fold(0.0, f64::max);
        let vt = check_volberg_treil(&theta, 0.5, &f, DEPTH, None).unwrap();
        prop_assert!(vt.is_consistent());
        // d ≤ 5|I| puts a point of Ω inside S(Ĩ) for the concentric arc of
        // length 32|I|; a family arc of length ≤ 8|Ĩ| contains Ĩ.
        for arc in w.arcs.iter().filter(|a| a.threshold_exact && a.arc.length() <= 0.08) {
            let ratio = f.mass_on_square(&arc.square()) / arc.arc.length();
            prop_assert!(ratio <= 256.0 * v * (1.0 + 1e-9) + 1e-12, "arc {} ratio {ratio} vs {v}", arc.k);
        }
    }
}

fn delta_one() -> DiscMeasure {
    DiscMeasure::point_mass(Complex64::new(1.0, 0.0), 1.0).unwrap()
}

fn oracle_hs_norms(family: ZeroFamily, ns: &[usize]) -> Vec<f64> {
    ns.iter()
        .map(|&n| {
            let theta = InnerFunction::from_family(family, n).unwrap().finite_part().unwrap();
            let g = embedding_gram(&theta, &delta_one(), 1e-12).unwrap();
            let s = singular_values(&g, &[2.0]).unwrap();
            let hs = hs_integral(&theta, &delta_one(), 1e-12).unwrap();
            assert!((s.schatten["2"].powi(2) / hs - 1.0).abs() < 1e-9);
            s.schatten["2"]
        })
        .collect()
}

#[test]
fn divergent_hs_integral_gives_unbounded_oracle_norms() {
    let ns = [2, 4, 6, 8, 10, 12];
    for family in [ZeroFamily::RadialDyadic { angle: 0.0 }, ZeroFamily::RadialGeometric { ratio: 0.7, angle: 0.0 }] {
        let norms = oracle_hs_norms(family, &ns);
        assert!(norms.windows(2).all(|w| w[1] > 1.2 * w[0]), "{family:?}: {norms:?}");
    }
    // Convergent Ahern-Clark series at 1: the norms settle.
    let norms = oracle_hs_norms(ZeroFamily::SpiralDyadic { phase: 1.0 }, &ns);
    assert!(norms[5] <= 1.01 * norms[4], "{norms:?}");
    // A singular atom at the point mass makes the integral itself infinite.
    let s = InnerFunction::new(vec![], vec![SingularAtom { angle: 0.0, mass: 1.0 }], vec![]).unwrap();
    assert_eq!(hs_integral(&s, &delta_one(), 1e-12).unwrap(), f64::INFINITY);
}
