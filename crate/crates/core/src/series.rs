//! Bessel-series form of the imaging functions.
//!
//! With `x − z = r(cos φ, sin φ)` the real part of the plane-wave factor
//! expands as
//!
//! ```text
//! Re e^{iωθ_n·(x−z)} = J0(ωr) + 2 Σ_{m≥1} (−1)^m J_2m(ωr) cos(2m(θ_n − φ))
//! ```
//!
//! so the unnormalized channel sum is a curve integral of the material
//! bracket against this series. The `m ≥ 1` part is the disturbance term;
//! its band average replaces the single-frequency one in the
//! multi-frequency structure, and the `J0` part integrates in closed form
//! through [`crate::specfun::j0_band_integral`].

use num_complex::Complex;

use crate::directions::DirectionSet;
use crate::error::{domain, Result};
use crate::forward::{FrequencySet, ThinInclusionScene};
use crate::quadrature::integrate_adaptive_vec;
use crate::scalar::{Real, Vec2};
use crate::specfun::{bessel_j_sequence_unchecked, j0_band_integral_unchecked, MAX_STRUVE_ARG};

/// Absolute tolerance of the ω-quadrature behind the band-averaged
/// disturbance.
pub const BAND_QUADRATURE_TOL: f64 = 1e-10;
const BAND_MAX_PANELS: usize = 20_000;

/// Number of retained even orders `m = 1..=m` and the largest dropped
/// Bessel magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationSpec<T> {
    pub m: usize,
    /// `sup_{r ≤ r_max} |J_{2(m+1)}(ωr)|`.
    pub tail_bound: T,
}

impl<T: Real> TruncationSpec<T> {
    pub fn new(m: usize) -> Self {
        Self { m, tail_bound: T::zero() }
    }
}

/// Smallest `M` with `sup_{r ≤ r_max} |J_{2(M+1)}(ωr)| < tol`, by scanning
/// `t = ωr` on a fine grid.
pub fn truncation_order<T: Real>(omega: T, r_max: T, tol: T) -> Result<TruncationSpec<T>> {
    if !(omega > T::zero()) || !(r_max > T::zero()) {
        return domain(format!("truncation needs ω > 0 and r_max > 0 (got {omega}, {r_max})"));
    }
    if !(tol > T::zero() && tol < T::one()) {
        return domain(format!("truncation tolerance must lie in (0, 1) (got {tol})"));
    }
    let t_max = omega * r_max;
    if t_max > T::lit(MAX_STRUVE_ARG) {
        return domain(format!("ω·r_max = {t_max} outside the supported range"));
    }
    let t_max_f = t_max.to_f64_lossy();
    let samples = ((t_max_f * 40.0).ceil() as usize).clamp(256, 200_000);
    let mut cap = (t_max_f + 20.0 * t_max_f.cbrt() + 40.0).ceil() as usize;
    loop {
        let mut sup = vec![T::zero(); cap + 1];
        for i in 1..=samples {
            let t = t_max * T::from_usize(i) / T::from_usize(samples);
            let js = bessel_j_sequence_unchecked(cap, t);
            for (s, j) in sup.iter_mut().zip(&js) {
                *s = s.max(j.abs());
            }
        }
        let mut m = 0usize;
        while 2 * (m + 1) <= cap {
            let tail = sup[2 * (m + 1)];
            if tail < tol {
                return Ok(TruncationSpec { m, tail_bound: tail });
            }
            m += 1;
        }
        cap *= 2;
    }
}

/// `(|x − z|, φ)` with `x − z = |x − z|(cos φ, sin φ)`.
#[inline]
fn polar<T: Real>(x: Vec2<T>, z: Vec2<T>) -> (T, T) {
    let d = x - z;
    (d.norm(), d.angle())
}

/// `Σ_{|m| ≤ 2M+1} i^m J_m(ω|x−z|) e^{im(θ−φ)}`, the truncated
/// Jacobi-Anger expansion of `e^{iωθ·(x−z)}`.
pub fn jacobi_anger_field<T: Real>(omega: T, z: Vec2<T>, x: Vec2<T>, theta: T, spec: &TruncationSpec<T>) -> Complex<T> {
    let (r, phi) = polar(x, z);
    let top = 2 * spec.m + 1;
    let js = bessel_j_sequence_unchecked(top, omega * r);
    let psi = theta - phi;
    let mut sum = Complex::new(js[0], T::zero());
    // i^m cycles 1, i, −1, −i
    let powers = [
        Complex::new(T::one(), T::zero()),
        Complex::new(T::zero(), T::one()),
        Complex::new(-T::one(), T::zero()),
        Complex::new(T::zero(), -T::one()),
    ];
    for (m, &j) in js.iter().enumerate().skip(1) {
        let c = (T::from_usize(m) * psi).cos();
        sum += powers[m % 4] * (T::lit(2.0) * j * c);
    }
    sum
}

/// `Σ_{m=1}^{M} (−1)^m J_2m · cos(2mψ)` from a precomputed sequence.
#[inline]
fn disturbance_from_sequence<T: Real>(js: &[T], psi: T, m_max: usize) -> T {
    let mut acc = T::zero();
    for m in 1..=m_max {
        let term = js[2 * m] * (T::from_usize(2 * m) * psi).cos();
        if m % 2 == 1 {
            acc -= term;
        } else {
            acc += term;
        }
    }
    acc
}

/// Single-frequency disturbance
/// `Σ_{m=1}^{M} (−1)^m J_2m(ω|x−z|) cos(2m(θ_n − φ))`.
pub fn disturbance_sf<T: Real>(x: Vec2<T>, z: Vec2<T>, theta_n: T, omega: T, spec: &TruncationSpec<T>) -> T {
    let (r, phi) = polar(x, z);
    let js = bessel_j_sequence_unchecked(2 * spec.m, omega * r);
    disturbance_from_sequence(&js, theta_n - phi, spec.m)
}

/// `∫_{ω_lo}^{ω_hi} J_2m(ωr) dω` for `m = 1..=m_max`, integrated term-wise
/// by one vector-valued adaptive quadrature.
pub fn band_even_bessel_integrals<T: Real>(r: T, omega_lo: T, omega_hi: T, m_max: usize) -> Vec<T> {
    if m_max == 0 || r == T::zero() {
        return vec![T::zero(); m_max];
    }
    let (values, _, _) = integrate_adaptive_vec(
        |w: T, out: &mut [T]| {
            let js = bessel_j_sequence_unchecked(2 * m_max, w * r);
            for (m, o) in out.iter_mut().enumerate() {
                *o = js[2 * (m + 1)];
            }
        },
        m_max,
        omega_lo,
        omega_hi,
        T::lit(BAND_QUADRATURE_TOL),
        BAND_MAX_PANELS,
    );
    values
}

fn check_band<T: Real>(omega_lo: T, omega_hi: T) -> Result<()> {
    if !(omega_lo > T::zero()) || !(omega_hi > omega_lo) {
        return domain(format!("band needs 0 < ω_lo < ω_hi (got {omega_lo}, {omega_hi})"));
    }
    Ok(())
}

/// Band-averaged disturbance
/// `(1/(ω_hi−ω_lo)) ∫ Σ_{m=1}^{M} (−1)^m J_2m(ω|x−z|) cos(2m(θ_n − φ)) dω`.
pub fn disturbance_mf<T: Real>(
    x: Vec2<T>,
    z: Vec2<T>,
    theta_n: T,
    omega_lo: T,
    omega_hi: T,
    spec: &TruncationSpec<T>,
) -> Result<T> {
    check_band(omega_lo, omega_hi)?;
    let (r, phi) = polar(x, z);
    let integrals = band_even_bessel_integrals(r, omega_lo, omega_hi, spec.m);
    Ok(combine_band_terms(&integrals, theta_n - phi) / (omega_hi - omega_lo))
}

#[inline]
fn combine_band_terms<T: Real>(integrals: &[T], psi: T) -> T {
    integrals
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let m = i + 1;
            let term = v * (T::from_usize(2 * m) * psi).cos();
            if m % 2 == 1 {
                -term
            } else {
                term
            }
        })
        .sum()
}

/// Series form of the unnormalized single-frequency channel sum:
/// `Σ_n Σ_j ∫_{σ_j} bracket_{n,j}(x) [J0 + 2·D_SF](ω|x−z|) dσ(x)`.
pub fn structure_sf<T: Real>(
    scene: &ThinInclusionScene<T>,
    dirs: &DirectionSet<T>,
    omega: T,
    z: Vec2<T>,
    spec: &TruncationSpec<T>,
) -> Result<T> {
    scene.validate_for(&FrequencySet::single(omega)?)?;
    let two = T::lit(2.0);
    let mut total = T::zero();
    for (j, inc) in scene.inclusions.iter().enumerate() {
        let contrast = scene.permittivity_contrast(j);
        let (ct, cn) = scene.permeability_weights(j);
        for node in inc.quad.nodes() {
            let (r, phi) = polar(node.point, z);
            let js = bessel_j_sequence_unchecked(2 * spec.m, omega * r);
            let mut node_sum = T::zero();
            for (&angle, &theta) in dirs.angles().iter().zip(dirs.vectors()) {
                let bracket = contrast + ct * theta.dot(node.tangent) + cn * theta.dot(node.normal);
                let series = js[0] + two * disturbance_from_sequence(&js, angle - phi, spec.m);
                node_sum += bracket * series;
            }
            total += node.weight * node_sum;
        }
    }
    Ok(total)
}

/// Series form of the band-averaged channel sum:
/// `Σ_n Σ_j ∫ bracket · [Λ(|x−z|) + 2∫D dω] / (ω_hi − ω_lo) dσ`, with
/// `Λ(r) = ∫_{ω_lo}^{ω_hi} J0(ωr) dω`.
pub fn structure_mf<T: Real>(
    scene: &ThinInclusionScene<T>,
    dirs: &DirectionSet<T>,
    omega_lo: T,
    omega_hi: T,
    z: Vec2<T>,
    spec: &TruncationSpec<T>,
) -> Result<T> {
    check_band(omega_lo, omega_hi)?;
    scene.validate_for(&FrequencySet::single(omega_hi)?)?;
    let width = omega_hi - omega_lo;
    let two = T::lit(2.0);
    let mut total = T::zero();
    for (j, inc) in scene.inclusions.iter().enumerate() {
        let contrast = scene.permittivity_contrast(j);
        let (ct, cn) = scene.permeability_weights(j);
        for node in inc.quad.nodes() {
            let (r, phi) = polar(node.point, z);
            if omega_hi * r > T::lit(MAX_STRUVE_ARG) {
                return domain(format!("ω_hi·|x−z| = {} outside the supported range", omega_hi * r));
            }
            let lambda = j0_band_integral_unchecked(r, omega_lo, omega_hi);
            let integrals = band_even_bessel_integrals(r, omega_lo, omega_hi, spec.m);
            let mut node_sum = T::zero();
            for (&angle, &theta) in dirs.angles().iter().zip(dirs.vectors()) {
                let bracket = contrast + ct * theta.dot(node.tangent) + cn * theta.dot(node.normal);
                node_sum += bracket * (lambda + two * combine_band_terms(&integrals, angle - phi)) / width;
            }
            total += node.weight * node_sum;
        }
    }
    Ok(total)
}

/// `Σ_n Σ_j ∫_{σ_j} |bracket_{n,j}| dσ`, an upper bound on the magnitude of
/// the channel sum at any point and frequency.
pub fn magnitude_bound<T: Real>(scene: &ThinInclusionScene<T>, dirs: &DirectionSet<T>) -> T {
    let mut total = T::zero();
    for (j, inc) in scene.inclusions.iter().enumerate() {
        let contrast = scene.permittivity_contrast(j);
        let (ct, cn) = scene.permeability_weights(j);
        for node in inc.quad.nodes() {
            for &theta in dirs.vectors() {
                total += node.weight * (contrast + ct * theta.dot(node.tangent) + cn * theta.dot(node.normal)).abs();
            }
        }
    }
    total
}
