//! Self-checks that compare the library against independent evaluations:
//! quadrature oracles for the special functions, the measurement route
//! against the Bessel-series structures, the direction harmonic-sum law
//! and the disturbance-term regimes.
//!
//! Each check reports a discrepancy, the bound it is held to and whether
//! it passed. Ordering checks report the two compared maxima as
//! `discrepancy < bound`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::directions::DirectionSet;
use crate::error::{Error, Result};
use crate::forward::{synthesize, FrequencySet, Inclusion, ThinInclusionScene};
use crate::geometry::{builtin_sigma, discretize, DEFAULT_NODE_COUNT};
use crate::imaging::{dte_eps, dte_mu};
use crate::quadrature::{gauss_legendre, integrate_adaptive};
use crate::scalar::Vec2;
use crate::series::{disturbance_mf, disturbance_sf, magnitude_bound, structure_mf, structure_sf, truncation_order, TruncationSpec};
use crate::specfun::{bessel_j, bessel_j_sequence, j0_primitive, struve_h};

/// Seed used when the caller does not supply one.
pub const DEFAULT_VALIDATION_SEED: u64 = 20_180_415;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Specfun,
    SeriesEquivalence,
    DirectionSymmetry,
    CorollaryRegimes,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Specfun, Suite::SeriesEquivalence, Suite::DirectionSymmetry, Suite::CorollaryRegimes];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Specfun => "specfun",
            Suite::SeriesEquivalence => "series-equivalence",
            Suite::DirectionSymmetry => "direction-symmetry",
            Suite::CorollaryRegimes => "corollary-regimes",
        }
    }

    /// Resolves a suite name; `all` expands to every suite.
    pub fn parse_selection(name: &str) -> Result<Vec<Suite>> {
        if name == "all" {
            return Ok(Self::ALL.to_vec());
        }
        name.parse().map(|s| vec![s])
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|suite| suite.name() == s).ok_or_else(|| {
            Error::Usage(format!(
                "unknown validation suite {s:?} (expected one of specfun, series-equivalence, direction-symmetry, corollary-regimes, all)"
            ))
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub samples: usize,
    pub max_discrepancy: f64,
    pub mean_discrepancy: f64,
    pub bound: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

impl CheckReport {
    fn from_samples(name: &str, discrepancies: &[f64], bound: f64) -> Self {
        let max = discrepancies.iter().copied().fold(0.0, f64::max);
        let mean = if discrepancies.is_empty() { 0.0 } else { discrepancies.iter().sum::<f64>() / discrepancies.len() as f64 };
        let finite = discrepancies.iter().all(|d| d.is_finite());
        Self {
            name: name.to_string(),
            samples: discrepancies.len(),
            max_discrepancy: max,
            mean_discrepancy: mean,
            bound,
            pass: finite && max <= bound,
            detail: None,
        }
    }

    /// Strict ordering `observed < reference`.
    fn ordering(name: &str, samples: usize, observed: f64, reference: f64) -> Self {
        Self {
            name: name.to_string(),
            samples,
            max_discrepancy: observed,
            mean_discrepancy: observed,
            bound: reference,
            pass: observed.is_finite() && observed < reference,
            detail: None,
        }
    }

    fn with_detail(mut self, detail: serde_json::Value) -> Self {
        self.detail = Some(detail);
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<CheckReport>,
}

/// Runs one suite with samples drawn from `seed`.
pub fn run_suite(suite: Suite, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checks = match suite {
        Suite::Specfun => specfun_checks(&mut rng)?,
        Suite::SeriesEquivalence => series_checks(&mut rng)?,
        Suite::DirectionSymmetry => vec![direction_check()?],
        Suite::CorollaryRegimes => corollary_checks(&mut rng)?,
    };
    let pass = checks.iter().all(|c| c.pass);
    Ok(SuiteReport { suite: suite.name().to_string(), seed, pass, checks })
}

/// `J_m(x) = (1/2π)∫_0^{2π} cos(mτ − x sin τ) dτ` by the periodic trapezoid
/// rule, which converges geometrically once the node count exceeds
/// `m + x` by a margin.
pub fn bessel_trapezoid_oracle(m: u32, x: f64) -> f64 {
    let nodes = (1.5 * (f64::from(m) + x)).ceil() as usize + 64;
    let h = TAU / nodes as f64;
    let mf = f64::from(m);
    (0..nodes).map(|i| {
        let t = i as f64 * h;
        (mf * t - x * t.sin()).cos()
    }).sum::<f64>()
        / nodes as f64
}

/// `H_0(x) = (2/π)∫_0^{π/2} sin(x cos τ) dτ`,
/// `H_1(x) = (2x/π)∫_0^{π/2} sin(x cos τ) sin²τ dτ`, adaptively.
pub fn struve_integral_oracle(order: u32, x: f64) -> f64 {
    let integral = integrate_adaptive(
        |t: f64| {
            let base = (x * t.cos()).sin();
            if order == 0 { base } else { base * t.sin().powi(2) }
        },
        0.0,
        PI / 2.0,
        1e-14,
        0.0,
        20_000,
    )
    .value;
    let pre = if order == 0 { 2.0 / PI } else { 2.0 * x / PI };
    pre * integral
}

fn specfun_checks(rng: &mut ChaCha8Rng) -> Result<Vec<CheckReport>> {
    let pairs: Vec<(u32, f64)> = (0..200).map(|_| (rng.random_range(0..=60u32), rng.random_range(0.0..200.0))).collect();
    let bessel = pairs
        .par_iter()
        .map(|&(m, x)| Ok((bessel_j(m, x)? - bessel_trapezoid_oracle(m, x)).abs()))
        .collect::<Result<Vec<_>>>()?;

    let xs: Vec<f64> = (0..100).map(|_| rng.random_range(0.0..40.0)).collect();
    let struve = xs
        .par_iter()
        .map(|&x| {
            let d0 = (struve_h(0, x)? - struve_integral_oracle(0, x)).abs();
            let d1 = (struve_h(1, x)? - struve_integral_oracle(1, x)).abs();
            Ok(d0.max(d1))
        })
        .collect::<Result<Vec<_>>>()?;

    let xs: Vec<f64> = (0..100).map(|_| rng.random_range(0.0..100.0)).collect();
    let primitive = xs
        .par_iter()
        .map(|&x| {
            let reference =
                integrate_adaptive(|t: f64| bessel_j(0, t).unwrap_or(f64::NAN), 0.0, x, 1e-14, 1e-14, 20_000).value;
            let got = j0_primitive(x)?;
            Ok((got - reference).abs() / reference.abs().max(f64::MIN_POSITIVE))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(vec![
        CheckReport::from_samples("bessel_j vs trapezoid integral", &bessel, 1e-10),
        CheckReport::from_samples("struve_h vs integral representation", &struve, 1e-8),
        CheckReport::from_samples("j0_primitive vs quadrature (relative)", &primitive, 1e-8),
    ])
}

/// The σ₁ scene at the reference parameters: thickness 0.02, ε = μ = 5 in a
/// unit background.
pub fn sigma1_scene() -> Result<ThinInclusionScene<f64>> {
    let quad = discretize(&builtin_sigma(1)?, DEFAULT_NODE_COUNT)?;
    ThinInclusionScene::new(vec![Inclusion::new(quad, 0.02, 5.0, 5.0)?], 1.0, 1.0)
}

fn random_in_disk(rng: &mut ChaCha8Rng, radius: f64) -> Vec2<f64> {
    loop {
        let p = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if p.norm() < 1.0 {
            return p * radius;
        }
    }
}

fn max_node_radius(scene: &ThinInclusionScene<f64>) -> f64 {
    scene.inclusions.iter().flat_map(|inc| inc.quad.nodes()).map(|n| n.point.norm()).fold(0.0, f64::max)
}

fn series_checks(rng: &mut ChaCha8Rng) -> Result<Vec<CheckReport>> {
    let scene = sigma1_scene()?;
    let r_max = 1.0 + max_node_radius(&scene);
    let mut out = Vec::new();

    // structure_sf against Re Σ_n e^{−iωθ_n·z}(A + B)
    let omega = TAU / 0.5;
    let spec = truncation_order(omega, r_max, 1e-12)?;
    let mut gaps = Vec::new();
    for n in [2usize, 4, 6] {
        let dirs = DirectionSet::uniform(n)?;
        let meas = synthesize(&scene, &dirs, &FrequencySet::single(omega)?)?;
        let scale = magnitude_bound(&scene, &dirs);
        let zs: Vec<Vec2<f64>> = (0..50).map(|_| random_in_disk(rng, 1.0)).collect();
        let local = zs
            .par_iter()
            .map(|&z| {
                let route = dte_eps(&meas, 0, z)? + dte_mu(&meas, 0, z)?;
                Ok((structure_sf(&scene, &dirs, omega, z, &spec)? - route).abs() / scale)
            })
            .collect::<Result<Vec<_>>>()?;
        gaps.extend(local);
    }
    out.push(
        CheckReport::from_samples("structure_sf vs measurement route (relative to magnitude bound)", &gaps, 1e-8)
            .with_detail(json!({ "omega": omega, "truncation_m": spec.m, "directions": [2, 4, 6] })),
    );

    // Re e^{it cos ψ} − J0(t) − 2·D against the dropped tail
    let t_max = 40.0;
    let spec = truncation_order(1.0, t_max, 1e-12)?;
    let remainders: Vec<f64> = (0..200)
        .map(|_| {
            let t = rng.random_range(0.0..t_max);
            let psi = rng.random_range(0.0..TAU);
            let x = Vec2::from_angle(0.0) * t;
            let d = disturbance_sf(x, Vec2::new(0.0, 0.0), psi, 1.0, &spec);
            let j0 = bessel_j(0, t).unwrap_or(f64::NAN);
            ((t * psi.cos()).cos() - j0 - 2.0 * d).abs()
        })
        .collect();
    let bound = 4.0 * spec.tail_bound + 64.0 * f64::EPSILON;
    out.push(CheckReport::from_samples("even-order reduction remainder", &remainders, bound));

    // structure_mf against the Gauss-Legendre ω-mean of structure_sf
    let (lo, hi) = (TAU / 0.7, TAU / 0.3);
    let spec = truncation_order(hi, r_max, 1e-12)?;
    let dirs = DirectionSet::uniform(4)?;
    let (nodes, weights) = gauss_legendre::<f64>(200);
    let zs: Vec<Vec2<f64>> = (0..5).map(|_| random_in_disk(rng, 1.0)).collect();
    let gaps = zs
        .par_iter()
        .map(|&z| {
            let mut mean = 0.0;
            for (&u, &w) in nodes.iter().zip(&weights) {
                let omega = 0.5 * (lo + hi) + 0.5 * (hi - lo) * u;
                mean += 0.5 * w * structure_sf(&scene, &dirs, omega, z, &spec)?;
            }
            let mf = structure_mf(&scene, &dirs, lo, hi, z, &spec)?;
            Ok((mf - mean).abs() / mean.abs().max(1.0))
        })
        .collect::<Result<Vec<_>>>()?;
    out.push(CheckReport::from_samples("structure_mf vs ω-mean of structure_sf", &gaps, 1e-6));
    Ok(out)
}

fn direction_check() -> Result<CheckReport> {
    let mut gaps = Vec::new();
    let mut table = Vec::new();
    for n in 1..=8usize {
        let dirs = DirectionSet::<f64>::uniform(n)?;
        let mut row = Vec::new();
        for p in -12i64..=12 {
            let hs = dirs.harmonic_sum(p);
            let expected = if p.rem_euclid(n as i64) == 0 { n as f64 } else { 0.0 };
            gaps.push((hs.re - expected).abs().max(hs.im.abs()));
            row.push(hs.norm());
        }
        table.push(json!({ "n": n, "abs_harmonic_sum_p_-12_to_12": row }));
    }
    Ok(CheckReport::from_samples("harmonic sum equals N·[N divides p]", &gaps, 1e-10).with_detail(json!(table)))
}

/// Regime cutoffs and truncation for the disturbance comparisons on the
/// band `[ω₁, ω_K]`: near samples satisfy `ω_K r < 0.5√(M+1)` and far
/// samples `ω₁ r ∈ [1, 1.5]·M²`.
#[derive(Debug, Clone, Copy)]
pub struct RegimeSetup {
    pub omega_lo: f64,
    pub omega_hi: f64,
    pub spec: TruncationSpec<f64>,
    pub near_r_max: f64,
    pub far_r_min: f64,
}

impl RegimeSetup {
    pub fn reference() -> Result<Self> {
        let (omega_lo, omega_hi) = (TAU / 0.7, TAU / 0.3);
        let spec = truncation_order(omega_hi, 2.0, 1e-12)?;
        let m = spec.m as f64;
        Ok(Self {
            omega_lo,
            omega_hi,
            spec,
            near_r_max: 0.5 * (m + 1.0).sqrt() / omega_hi,
            far_r_min: m * m / omega_lo,
        })
    }
}

/// `(max|D_MF|, max|D_SF(ω_ref)|)` over random `(x, z, θ)` with
/// `|x − z| ∈ [r_lo, r_hi)`.
pub fn sample_disturbances(
    rng: &mut ChaCha8Rng,
    setup: &RegimeSetup,
    r_lo: f64,
    r_hi: f64,
    omega_ref: f64,
    count: usize,
) -> Result<(f64, f64)> {
    let samples: Vec<(Vec2<f64>, Vec2<f64>, f64)> = (0..count)
        .map(|_| {
            let z = random_in_disk(rng, 1.0);
            let r = rng.random_range(r_lo..r_hi);
            let phi = rng.random_range(0.0..TAU);
            let theta = rng.random_range(0.0..TAU);
            (z, z + Vec2::from_angle(phi) * r.max(f64::MIN_POSITIVE), theta)
        })
        .collect();
    let pairs = samples
        .par_iter()
        .map(|&(z, x, theta)| {
            let mf = disturbance_mf(x, z, theta, setup.omega_lo, setup.omega_hi, &setup.spec)?;
            let sf = disturbance_sf(x, z, theta, omega_ref, &setup.spec);
            Ok((mf.abs(), sf.abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(pairs.iter().fold((0.0, 0.0), |(a, b), &(mf, sf)| (f64::max(a, mf), f64::max(b, sf))))
}

/// `sup_ψ |D_SF|` at fixed `ωr`, over a 720-point ψ grid.
pub fn sup_disturbance(omega_r: f64, spec: &TruncationSpec<f64>) -> Result<f64> {
    let js = bessel_j_sequence(2 * spec.m, omega_r)?;
    Ok((0..720)
        .map(|i| {
            let psi = TAU * i as f64 / 720.0;
            (1..=spec.m)
                .map(|m| {
                    let sign = if m % 2 == 1 { -1.0 } else { 1.0 };
                    sign * js[2 * m] * (2.0 * m as f64 * psi).cos()
                })
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max))
}

fn corollary_checks(rng: &mut ChaCha8Rng) -> Result<Vec<CheckReport>> {
    let setup = RegimeSetup::reference()?;
    let (mf, sf) = sample_disturbances(rng, &setup, 0.0, setup.near_r_max, setup.omega_hi, 100)?;
    let near = CheckReport::ordering("near regime: max|D_MF| < max|D_SF(ω_K)|", 100, mf, sf).with_detail(json!({
        "truncation_m": setup.spec.m,
        "r_max": setup.near_r_max,
    }));
    let (mf, sf) = sample_disturbances(rng, &setup, setup.far_r_min, 1.5 * setup.far_r_min, setup.omega_lo, 100)?;
    let far = CheckReport::ordering("far regime: max|D_MF| < max|D_SF(ω₁)|", 100, mf, sf).with_detail(json!({
        "truncation_m": setup.spec.m,
        "r_min": setup.far_r_min,
    }));
    let spec = truncation_order(100.0, 1.0, 1e-12)?;
    let high = sup_disturbance(100.0, &spec)?;
    let low = sup_disturbance(10.0, &spec)?;
    let decay = CheckReport::ordering("sup|D_SF| at ωr = 100 below ωr = 10", 2, high, low);
    Ok(vec![near, far, decay])
}
