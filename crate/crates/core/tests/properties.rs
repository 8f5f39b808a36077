use std::f64::consts::{PI, TAU};

use num_complex::Complex;
use proptest::prelude::*;
use thinscope::forward::coefficient_pair;
use thinscope::imaging::{e_mf, e_sf, mean_of_maps};
use thinscope::series::{disturbance_sf, truncation_order};
use thinscope::specfun::{bessel_j, bessel_j_sequence, j0_band_integral};
use thinscope::{
    builtin_sigma, discretize, synthesize, DirectionSet, FrequencySet, ImagingGrid, Inclusion, ThinInclusionScene, Vec2,
};

fn scene(eps: f64, mu: f64, nodes: usize) -> ThinInclusionScene<f64> {
    let quad = discretize(&builtin_sigma(1).unwrap(), nodes).unwrap();
    ThinInclusionScene::new(vec![Inclusion::new(quad, 0.02, eps, mu).unwrap()], 1.0, 1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn bessel_three_term_recurrence(x in 0.1f64..100.0, m in 1u32..=60) {
        let lhs = bessel_j(m - 1, x).unwrap() + bessel_j(m + 1, x).unwrap();
        let rhs = 2.0 * f64::from(m) / x * bessel_j(m, x).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn bessel_square_sum_is_one(x in 0.0f64..40.0) {
        let top = x.ceil() as usize + 40;
        let js = bessel_j_sequence(top, x).unwrap();
        let s = js[0] * js[0] + 2.0 * js[1..].iter().map(|j| j * j).sum::<f64>();
        prop_assert!((s - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bessel_zero_order_asymptotic(x in 50.0f64..1000.0) {
        let lead = (2.0 / (PI * x)).sqrt() * (x - PI / 4.0).cos();
        prop_assert!((bessel_j(0, x).unwrap() - lead).abs() < 0.5 * x.powf(-1.5));
    }

    #[test]
    fn bessel_even_order_asymptotic(x in 50.0f64..1000.0, m in 1u32..=3) {
        // leading Hankel term with the first correction's size as bound
        let nu = f64::from(2 * m);
        let lead = (2.0 / (PI * x)).sqrt() * (x - f64::from(m) * PI - PI / 4.0).cos();
        let bound = (2.0 / PI).sqrt() * (4.0 * nu * nu - 1.0) / 8.0 * x.powf(-1.5) * 1.5;
        prop_assert!((bessel_j(2 * m, x).unwrap() - lead).abs() < bound);
    }

    #[test]
    fn band_integral_additive(r in 0.0f64..3.0, a in 0.5f64..30.0, w1 in 0.0f64..20.0, w2 in 0.0f64..20.0) {
        let (b, c) = (a + w1, a + w1 + w2);
        let split = j0_band_integral(r, a, b).unwrap() + j0_band_integral(r, b, c).unwrap();
        prop_assert!((split - j0_band_integral(r, a, c).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn builtin_curves_match_formula(s in -0.5f64..=0.5) {
        let p1 = builtin_sigma::<f64>(1).unwrap().position(s);
        let p2 = builtin_sigma::<f64>(2).unwrap().position(s);
        prop_assert!((p1.x - (s - 0.2)).abs() < 1e-15 && (p1.y - (-0.5 * s * s + 0.5)).abs() < 1e-15);
        prop_assert!((p2.x - (s + 0.2)).abs() < 1e-15 && (p2.y - (s * s * s + s * s - 0.6)).abs() < 1e-15);
    }

    #[test]
    fn arc_length_additive(mid in -0.45f64..0.45, nodes in 64usize..300) {
        for id in [1, 2] {
            let curve = builtin_sigma::<f64>(id).unwrap();
            let full = discretize(&curve, nodes).unwrap().length();
            let left = discretize(&curve.restricted(-0.5, mid).unwrap(), nodes).unwrap().length();
            let right = discretize(&curve.restricted(mid, 0.5).unwrap(), nodes).unwrap().length();
            prop_assert!((left + right - full).abs() < 1e-10);
        }
    }

    #[test]
    fn rotation_multiplies_harmonic_sum(n in 1usize..=12, p in -20i64..=20, alpha in -10.0f64..10.0) {
        let dirs = DirectionSet::<f64>::uniform(n).unwrap();
        let want = dirs.harmonic_sum(p) * Complex::from_polar(1.0, p as f64 * alpha);
        prop_assert!((dirs.rotated(alpha).harmonic_sum(p) - want).norm() < 1e-11);
    }

    #[test]
    fn even_only_reduction(t in 0.0f64..60.0, psi in 0.0f64..TAU) {
        let spec = truncation_order(1.0, 60.0, 1e-12).unwrap();
        let d = disturbance_sf(Vec2::new(t, 0.0), Vec2::new(0.0, 0.0), psi, 1.0, &spec);
        let remainder = (t * psi.cos()).cos() - bessel_j(0, t).unwrap() - 2.0 * d;
        prop_assert!(remainder.abs() < 4.0 * spec.tail_bound + 64.0 * f64::EPSILON);
    }
}

#[test]
fn geometric_sum_law() {
    for n in 1..=12usize {
        let dirs = DirectionSet::<f64>::uniform(n).unwrap();
        for p in -20i64..=20 {
            let hs = dirs.harmonic_sum(p);
            if p.rem_euclid(n as i64) == 0 {
                assert!((hs.norm() - n as f64).abs() < 1e-10);
            } else {
                assert!(hs.norm() < 1e-10, "N={n} p={p}: {hs}");
            }
            if n % 2 == 0 && p % 2 != 0 {
                assert!(hs.norm() < 1e-10);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn frames_orthonormal(nodes in 8usize..400, id in 1u32..=2) {
        let quad = discretize(&builtin_sigma::<f64>(id).unwrap(), nodes).unwrap();
        for node in quad.nodes() {
            prop_assert!((node.tangent.norm() - 1.0).abs() < 1e-14);
            prop_assert!((node.normal.norm() - 1.0).abs() < 1e-14);
            prop_assert!(node.tangent.dot(node.normal).abs() < 1e-14);
            // counter-clockwise
            prop_assert!((node.tangent.x * node.normal.y - node.tangent.y * node.normal.x - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn permittivity_linear_in_contrast(angle in 0.0f64..TAU, omega in 5.0f64..30.0, eps in 1.5f64..8.0) {
        let theta = Vec2::from_angle(angle);
        let (a1, b1) = coefficient_pair(&scene(eps, 3.0, 64), theta, omega);
        let (a2, b2) = coefficient_pair(&scene(1.0 + 2.0 * (eps - 1.0), 3.0, 64), theta, omega);
        prop_assert!((a2 - a1 * 2.0).norm() <= 1e-14 * a1.norm().max(1.0));
        prop_assert_eq!(b1, b2);
    }

    #[test]
    fn permittivity_conjugate_under_reversal(angle in 0.0f64..TAU, omega in 5.0f64..30.0) {
        let s = scene(5.0, 5.0, 64);
        let (a, _) = coefficient_pair(&s, Vec2::from_angle(angle), omega);
        let (a_rev, _) = coefficient_pair(&s, -Vec2::from_angle(angle), omega);
        prop_assert!((a_rev - a.conj()).norm() < 1e-13);
    }

    #[test]
    fn translation_covariance(dx in -0.5f64..0.5, dy in -0.5f64..0.5, n in 2usize..=6) {
        let d = Vec2::new(dx, dy);
        let s = scene(5.0, 5.0, 64);
        let dirs = DirectionSet::uniform(n).unwrap();
        let freqs = FrequencySet::new(vec![TAU / 0.5, TAU / 0.4]).unwrap();
        let grid = ImagingGrid::unit_disk(21).unwrap();
        let base = e_mf(&synthesize(&s, &dirs, &freqs).unwrap(), &grid).unwrap();
        let moved = e_mf(&synthesize(&s.translated(d), &dirs, &freqs).unwrap(), &grid.translated(d)).unwrap();
        prop_assert_eq!(&base.mask, &moved.mask);
        for ((u, v), &m) in base.values.iter().zip(&moved.values).zip(&base.mask) {
            if m {
                prop_assert!((u - v).abs() < 1e-12, "{} vs {}", u, v);
            }
        }
    }

    #[test]
    fn normalized_maps_bounded_and_mean_exact(n in 1usize..=6, k in 1usize..=4) {
        let s = scene(5.0, 5.0, 64);
        let dirs = DirectionSet::uniform(n).unwrap();
        let freqs = FrequencySet::band(0.7, 0.3, k, thinscope::Spacing::Omega).unwrap();
        let meas = synthesize(&s, &dirs, &freqs).unwrap();
        let grid = ImagingGrid::unit_disk(25).unwrap();
        let singles: Vec<_> = (0..k).map(|i| e_sf(&meas, i, &grid).unwrap()).collect();
        for map in &singles {
            prop_assert!(map.unmasked().all(|(_, v)| v.abs() <= 1.0 + 1e-12));
        }
        let mf = e_mf(&meas, &grid).unwrap();
        prop_assert!(mf.unmasked().all(|(_, v)| v.abs() <= 1.0 + 1e-12));
        let mean = mean_of_maps(&singles).unwrap();
        for ((i, v), (_, w)) in mf.unmasked().zip(mean.unmasked()) {
            let direct = singles.iter().map(|m| m.values[i]).sum::<f64>() / k as f64;
            prop_assert!((v - direct).abs() <= 1e-14);
            prop_assert_eq!(v, w);
        }
    }
}

#[test]
fn coefficients_converge_under_refinement() {
    let omega = TAU / 0.3;
    for id in [1u32, 2] {
        let coarse_q = discretize(&builtin_sigma(id).unwrap(), 128).unwrap();
        let fine_q = discretize(&builtin_sigma(id).unwrap(), 256).unwrap();
        let coarse = ThinInclusionScene::new(vec![Inclusion::new(coarse_q, 0.02, 5.0, 5.0).unwrap()], 1.0, 1.0).unwrap();
        let fine = ThinInclusionScene::new(vec![Inclusion::new(fine_q, 0.02, 5.0, 5.0).unwrap()], 1.0, 1.0).unwrap();
        for n in 0..8 {
            let theta = Vec2::from_angle(TAU * n as f64 / 8.0);
            let (a1, b1) = coefficient_pair(&coarse, theta, omega);
            let (a2, b2) = coefficient_pair(&fine, theta, omega);
            assert!((a1 - a2).norm() < 1e-8 * a2.norm().max(1e-3), "σ{id} A drift {}", (a1 - a2).norm());
            assert!((b1 - b2).norm() < 1e-8 * b2.norm().max(1e-3), "σ{id} B drift {}", (b1 - b2).norm());
        }
    }
}
