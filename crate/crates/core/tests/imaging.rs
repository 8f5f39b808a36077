use std::f64::consts::TAU;

use num_complex::Complex;
use thinscope::forward::coefficient_pair;
use thinscope::imaging::mean_of_maps;
use thinscope::{
    add_noise, builtin_sigma, concentration_metric, discretize, distance_to_curve, dte_eps, dte_mu, e_mf, e_sf, synthesize,
    Channel, DirectionSet, Error, FrequencySet, ImagingGrid, Inclusion, MeasurementSet, Spacing, ThinInclusionScene, Vec2,
};

fn sigma1(eps: f64, mu: f64) -> ThinInclusionScene<f64> {
    let quad = discretize(&builtin_sigma(1).unwrap(), 256).unwrap();
    ThinInclusionScene::new(vec![Inclusion::new(quad, 0.02, eps, mu).unwrap()], 1.0, 1.0).unwrap()
}

fn cis(p: f64) -> Complex<f64> {
    Complex::new(p.cos(), p.sin())
}

#[test]
fn single_frequency_map_reaches_one() {
    let meas = synthesize(&sigma1(5.0, 5.0), &DirectionSet::uniform(4).unwrap(), &FrequencySet::single(TAU / 0.5).unwrap())
        .unwrap();
    let grid = ImagingGrid::unit_disk(201).unwrap();
    let map = e_sf(&meas, 0, &grid).unwrap();
    let (idx, peak) = map.unmasked().fold((0, 0.0), |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc });
    assert!((peak - 1.0).abs() < 1e-12);
    assert!(map.mask[idx]);
    assert!(map.values.iter().zip(&map.mask).all(|(v, &m)| m != v.is_nan()));
}

#[test]
fn pure_permeability_contrast_is_degenerate_in_permittivity() {
    let meas = synthesize(&sigma1(1.0, 5.0), &DirectionSet::uniform(3).unwrap(), &FrequencySet::single(12.0).unwrap()).unwrap();
    let grid = ImagingGrid::unit_disk(31).unwrap();
    match e_sf(&meas, 0, &grid) {
        Err(Error::DegenerateChannel { channel, frequency_index, .. }) => {
            assert_eq!(channel, Channel::Permittivity);
            assert_eq!(frequency_index, 0);
        }
        other => panic!("expected a degenerate-channel error, got {other:?}"),
    }
}

#[test]
fn degenerate_error_names_frequency_in_band() {
    let meas = synthesize(&sigma1(1.0, 1.0), &DirectionSet::uniform(3).unwrap(), &FrequencySet::band(0.7, 0.3, 3, Spacing::Omega).unwrap())
        .unwrap();
    let grid = ImagingGrid::unit_disk(21).unwrap();
    assert!(matches!(e_mf(&meas, &grid), Err(Error::DegenerateChannel { frequency_index: 0, .. })));
}

#[test]
fn one_frequency_band_equals_single_frequency_map() {
    let scene = sigma1(5.0, 5.0);
    let dirs = DirectionSet::uniform(5).unwrap();
    let grid = ImagingGrid::unit_disk(41).unwrap();
    let freqs = FrequencySet::band(0.7, 0.3, 1, Spacing::Omega).unwrap();
    assert_eq!(freqs.omegas(), &[TAU / 0.7]);
    let meas = synthesize(&scene, &dirs, &freqs).unwrap();
    let sf = e_sf(&meas, 0, &grid).unwrap();
    let mf = e_mf(&meas, &grid).unwrap();
    assert_eq!(sf.mask, mf.mask);
    for (a, b) in sf.unmasked().zip(mf.unmasked()) {
        assert_eq!(a, b);
    }

    let repeated = synthesize(&scene, &dirs, &FrequencySet::new(vec![10.0, 10.0]).unwrap()).unwrap();
    let once = synthesize(&scene, &dirs, &FrequencySet::single(10.0).unwrap()).unwrap();
    let rep = e_mf(&repeated, &grid).unwrap();
    let single = e_sf(&once, 0, &grid).unwrap();
    for (a, b) in rep.unmasked().zip(single.unmasked()) {
        assert_eq!(a, b);
    }
}

#[test]
fn band_map_is_mean_of_single_maps() {
    let meas = synthesize(&sigma1(5.0, 5.0), &DirectionSet::uniform(4).unwrap(), &FrequencySet::band(0.7, 0.3, 10, Spacing::Omega).unwrap())
        .unwrap();
    let grid = ImagingGrid::unit_disk(51).unwrap();
    let mf = e_mf(&meas, &grid).unwrap();
    let stack: Vec<_> = (0..10).map(|k| e_sf(&meas, k, &grid).unwrap()).collect();
    for (i, v) in mf.unmasked() {
        let direct = stack.iter().map(|m| m.values[i]).sum::<f64>() / 10.0;
        assert!((v - direct).abs() <= 1e-14);
    }
    assert_eq!(mean_of_maps(&stack).unwrap().values.len(), mf.values.len());
    assert_eq!(mf.meta.normalizers.len(), 10);
}

#[test]
fn permeability_channel_matches_direct_quadrature() {
    let scene = sigma1(3.0, 2.5);
    let dirs = DirectionSet::uniform(3).unwrap();
    let omega = TAU / 0.4;
    let meas = synthesize(&scene, &dirs, &FrequencySet::single(omega).unwrap()).unwrap();
    let (ct, cn) = (2.0 * (1.0 / 2.5 - 1.0), 2.0 * (1.0 - 2.5));
    for z in [Vec2::new(0.1, 0.3), Vec2::new(-0.4, -0.2), Vec2::new(0.0, 0.5)] {
        // Σ_n ∫ bracket · cos(ωθ_n·(x − z)) dσ with no phase factorization
        let mut direct = 0.0;
        for node in scene.inclusions[0].quad.nodes() {
            for theta in dirs.vectors() {
                let bracket = ct * theta.dot(node.tangent) + cn * theta.dot(node.normal);
                direct += node.weight * bracket * (omega * theta.dot(node.point - z)).cos();
            }
        }
        assert!((dte_mu(&meas, 0, z).unwrap() - direct).abs() < 1e-10);
    }
    let flat_mu = synthesize(&sigma1(3.0, 1.0), &dirs, &FrequencySet::single(omega).unwrap()).unwrap();
    assert_eq!(dte_mu(&flat_mu, 0, Vec2::new(0.2, 0.1)).unwrap(), 0.0);
}

#[test]
fn point_target_closed_form() {
    let dirs = DirectionSet::uniform(5).unwrap();
    let freqs = FrequencySet::single(9.0).unwrap();
    let z0 = Vec2::new(0.3, -0.1);
    let a: Vec<_> = dirs.vectors().iter().map(|t| cis(9.0 * t.dot(z0))).collect();
    let b = vec![Complex::new(0.0, 0.0); a.len()];
    let meas = MeasurementSet::from_parts(a, b, dirs.clone(), freqs).unwrap();
    assert!((dte_eps(&meas, 0, z0).unwrap() - 5.0).abs() < 1e-14);
    let z = Vec2::new(-0.2, 0.4);
    let want: f64 = dirs.vectors().iter().map(|t| (9.0 * t.dot(z0 - z)).cos()).sum();
    assert!((dte_eps(&meas, 0, z).unwrap() - want).abs() < 1e-12);
    assert_eq!(dte_mu(&meas, 0, z).unwrap(), 0.0);
}

#[test]
fn translated_scene_picks_up_phase() {
    let scene = sigma1(5.0, 4.0);
    let d = Vec2::new(0.25, -0.4);
    let moved = scene.translated(d);
    for (angle, omega) in [(0.3, 10.0), (2.0, 20.0), (4.5, 15.0)] {
        let theta = Vec2::from_angle(angle);
        let (a, b) = coefficient_pair(&scene, theta, omega);
        let (a2, b2) = coefficient_pair(&moved, theta, omega);
        let phase = cis(omega * theta.dot(d));
        assert!((a2 - a * phase).norm() < 1e-13);
        assert!((b2 - b * phase).norm() < 1e-13);
    }
}

#[test]
fn infinite_snr_is_bitwise_identity() {
    let meas = synthesize(&sigma1(5.0, 5.0), &DirectionSet::uniform(4).unwrap(), &FrequencySet::single(12.0).unwrap()).unwrap();
    let same = add_noise(&meas, 300.0, 9).unwrap();
    for ch in [Channel::Permittivity, Channel::Permeability] {
        assert_eq!(same.channel(ch), meas.channel(ch));
    }
    assert_eq!(same.seed(), Some(9));
}

#[test]
fn band_map_concentrates_better_with_four_directions_than_three() {
    let scene = sigma1(5.0, 5.0);
    let quad = &scene.inclusions[0].quad;
    let grid = ImagingGrid::unit_disk(201).unwrap();
    let freqs = FrequencySet::band(0.7, 0.3, 10, Spacing::Omega).unwrap();
    let metric = |n| {
        let map = e_mf(&synthesize(&scene, &DirectionSet::uniform(n).unwrap(), &freqs).unwrap(), &grid).unwrap();
        concentration_metric(&map, quad, 0.01, 0.1).unwrap()
    };
    let (m3, m4) = (metric(3), metric(4));
    assert!(m4 > m3, "N=4 {m4} vs N=3 {m3}");
}

#[test]
fn band_map_plateau_along_the_curve() {
    // Frozen from the noiseless N = 4, K = 10 run: the ratio to the map
    // maximum over cells within one cell of the curve has median 0.805 and
    // minimum 0.206 (reached near the curve ends).
    let scene = sigma1(5.0, 5.0);
    let quad = &scene.inclusions[0].quad;
    let grid = ImagingGrid::unit_disk(201).unwrap();
    let freqs = FrequencySet::band(0.7, 0.3, 10, Spacing::Omega).unwrap();
    let map = e_mf(&synthesize(&scene, &DirectionSet::uniform(4).unwrap(), &freqs).unwrap(), &grid).unwrap();
    let max = map.range().unwrap().1;
    let cell = 2.0 / 200.0;
    let mut ratios: Vec<f64> = map
        .unmasked()
        .filter(|&(i, _)| distance_to_curve(grid.point_at(i), quad).unwrap() <= cell)
        .map(|(_, v)| v / max)
        .collect();
    ratios.sort_by(f64::total_cmp);
    assert!(ratios.len() > 100);
    assert!(ratios[ratios.len() / 2] >= 0.8, "median {}", ratios[ratios.len() / 2]);
    assert!(ratios[0] >= 0.2, "min {}", ratios[0]);
}
