//! Bessel functions of the first kind (integer order), Struve functions of
//! order 0 and 1, and the closed-form primitive of `J0`.
//!
//! Bessel values come from the ascending power series when its terms
//! decrease from the first one. For large arguments with `order < x`,
//! `J0` and `J1` come from Hankel's asymptotic expansion and higher orders
//! from upward recurrence; everything else uses Miller's backward
//! recurrence (normalized with `J0 + 2·ΣJ_2k = 1`). Struve values use the
//! power series below `x = 6` and a composite Gauss-Legendre rule on the
//! Poisson-type integral representation above it.

use crate::error::{domain, Result};
use crate::quadrature::gauss_legendre;
use crate::scalar::Real;

/// Largest order accepted by [`bessel_j`].
pub const MAX_BESSEL_ORDER: u32 = 500;
/// Largest argument accepted by [`bessel_j`].
pub const MAX_BESSEL_ARG: f64 = 1e6;
/// Largest argument accepted by the Struve and `J0`-primitive routines.
pub const MAX_STRUVE_ARG: f64 = 1e4;

const STRUVE_SERIES_LIMIT: f64 = 6.0;
/// Smallest argument served by the Hankel expansion.
const HANKEL_MIN_ARG: f64 = 25.0;
/// Below this value of `ω_hi·r` the band integral uses its Taylor form.
pub const BAND_TAYLOR_THRESHOLD: f64 = 1e-4;

/// A special-function value with an estimated absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialValue<T> {
    pub value: T,
    pub abs_error_bound: T,
}

/// `J_order(x)` for integer `order ≥ 0` and `x ≥ 0`.
pub fn bessel_j<T: Real>(order: u32, x: T) -> Result<T> {
    check_bessel_args(order, x)?;
    Ok(bessel_j_unchecked(order, x))
}

/// Like [`bessel_j`], with an error estimate attached.
pub fn bessel_j_estimate<T: Real>(order: u32, x: T) -> Result<SpecialValue<T>> {
    let value = bessel_j(order, x)?;
    // Series: a few ulps of the (non-cancelling) leading term. Recurrence:
    // rounding grows with the number of steps taken.
    let steps = if use_series(order, x) {
        4.0
    } else if use_upward(order as usize, x) {
        f64::from(order) + 8.0
    } else {
        miller_start(order as usize, x) as f64
    };
    let steps = T::lit(steps.max(4.0));
    let bound = T::epsilon() * steps.sqrt() * T::lit(4.0) * value.abs().max(T::epsilon());
    Ok(SpecialValue { value, abs_error_bound: bound })
}

/// `[J_0(x), J_1(x), …, J_max_order(x)]` from a single recurrence sweep.
pub fn bessel_j_sequence<T: Real>(max_order: usize, x: T) -> Result<Vec<T>> {
    if !(x >= T::zero()) || x > T::lit(MAX_BESSEL_ARG) {
        return domain(format!("Bessel argument {x} outside [0, {MAX_BESSEL_ARG}]"));
    }
    Ok(bessel_j_sequence_unchecked(max_order, x))
}

fn check_bessel_args<T: Real>(order: u32, x: T) -> Result<()> {
    if order > MAX_BESSEL_ORDER {
        return domain(format!("Bessel order {order} exceeds {MAX_BESSEL_ORDER}"));
    }
    if !(x >= T::zero()) || x > T::lit(MAX_BESSEL_ARG) {
        return domain(format!("Bessel argument {x} outside [0, {MAX_BESSEL_ARG}]"));
    }
    Ok(())
}

#[inline]
fn use_series<T: Real>(order: u32, x: T) -> bool {
    x * x * T::lit(0.25) < T::lit(f64::from(order) + 1.0)
}

#[inline]
fn use_upward<T: Real>(max_order: usize, x: T) -> bool {
    x >= T::lit(HANKEL_MIN_ARG) && T::from_usize(max_order) < x
}

pub(crate) fn bessel_j_unchecked<T: Real>(order: u32, x: T) -> T {
    if x == T::zero() {
        return if order == 0 { T::one() } else { T::zero() };
    }
    if use_series(order, x) {
        bessel_series(order, x)
    } else if use_upward(order as usize, x) {
        upward(order as usize, x)[order as usize]
    } else {
        miller(order as usize, x)[order as usize]
    }
}

pub(crate) fn bessel_j_sequence_unchecked<T: Real>(max_order: usize, x: T) -> Vec<T> {
    if x == T::zero() {
        let mut out = vec![T::zero(); max_order + 1];
        out[0] = T::one();
        return out;
    }
    if use_upward(max_order, x) {
        upward(max_order, x)
    } else {
        miller(max_order, x)
    }
}

/// Hankel's expansion `J_ν(x) ≈ √(2/πx)(P cos χ − Q sin χ)`,
/// `χ = x − (ν/2 + 1/4)π`, for `ν ∈ {0, 1}`. The phase is formed from
/// `sin x` and `cos x` so no reduction error enters at large `x`.
fn hankel<T: Real>(nu: u32, x: T) -> T {
    let mu = T::lit(f64::from(4 * nu * nu));
    let eight_x = T::lit(8.0) * x;
    let (mut p, mut q) = (T::one(), T::zero());
    let mut term = T::one();
    let mut prev_abs = T::infinity();
    for k in 1..200usize {
        let odd = T::from_usize(2 * k - 1);
        term *= (mu - odd * odd) / (T::from_usize(k) * eight_x);
        let a = term.abs();
        if a >= prev_abs {
            break;
        }
        prev_abs = a;
        // k = 1, 2, 3, 4, … feed Q+, P−, Q−, P+, …
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if a <= T::epsilon() * T::lit(0.25) {
            break;
        }
    }
    let (s, c) = x.sin_cos();
    let r = T::FRAC_1_SQRT_2();
    let (cos_chi, sin_chi) = if nu == 0 { ((c + s) * r, (s - c) * r) } else { ((s - c) * r, -(s + c) * r) };
    (T::lit(2.0) / (T::PI() * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

/// Upward recurrence from Hankel `J0`, `J1`; stable while `order < x`.
fn upward<T: Real>(max_order: usize, x: T) -> Vec<T> {
    let mut out = Vec::with_capacity(max_order + 1);
    out.push(hankel(0, x));
    if max_order >= 1 {
        out.push(hankel(1, x));
    }
    let two_over_x = T::lit(2.0) / x;
    for n in 1..max_order {
        let next = T::from_usize(n) * two_over_x * out[n] - out[n - 1];
        out.push(next);
    }
    out
}

/// Ascending series; accurate when `x²/4 < order + 1` so that every term is
/// smaller than the one before it.
fn bessel_series<T: Real>(order: u32, x: T) -> T {
    let half = x * T::lit(0.5);
    let mut lead = T::one();
    for k in 1..=order {
        lead *= half / T::lit(f64::from(k));
        if lead == T::zero() {
            return T::zero();
        }
    }
    let q = -half * half;
    let n = T::lit(f64::from(order));
    let mut term = T::one();
    let mut sum = T::one();
    for k in 1..200 {
        let kf = T::from_usize(k);
        term *= q / (kf * (kf + n));
        sum += term;
        if term.abs() <= T::epsilon() * T::lit(0.5) * sum.abs() {
            break;
        }
    }
    lead * sum
}

fn miller_start<T: Real>(max_order: usize, x: T) -> usize {
    let xf = x.to_f64_lossy();
    let top = (max_order as f64).max(xf) + 15.0 * xf.cbrt() + 30.0;
    let start = top.ceil() as usize;
    start + (start % 2)
}

/// Backward recurrence from well above `max(order, x)`, rescaled to avoid
/// overflow and normalized with the Neumann sum `J0 + 2ΣJ_2k = 1`.
fn miller<T: Real>(max_order: usize, x: T) -> Vec<T> {
    let start = miller_start(max_order, x);
    let big = T::max_value().sqrt();
    let inv_big = big.recip();
    let two_over_x = T::lit(2.0) / x;
    let mut out = vec![T::zero(); max_order + 1];
    let mut upper = T::zero(); // J_{k+1}
    let mut current = T::min_positive_value().sqrt(); // J_k
    let mut norm = T::zero();
    if start <= max_order {
        out[start] = current;
    }
    for k in (1..=start).rev() {
        let lower = T::from_usize(k) * two_over_x * current - upper;
        upper = current;
        current = lower;
        let idx = k - 1;
        if idx <= max_order {
            out[idx] = current;
        }
        if idx % 2 == 0 {
            norm += if idx == 0 { current } else { current + current };
        }
        if current.abs() > big {
            current *= inv_big;
            upper *= inv_big;
            norm *= inv_big;
            for v in out.iter_mut().skip(idx) {
                *v *= inv_big;
            }
        }
    }
    let scale = norm.recip();
    for v in &mut out {
        *v *= scale;
    }
    out
}

/// Struve function `H_order(x)` for `order ∈ {0, 1}` and `0 ≤ x ≤ 1e4`.
pub fn struve_h<T: Real>(order: u32, x: T) -> Result<T> {
    if order > 1 {
        return domain(format!("Struve order {order} not supported (0 or 1 only)"));
    }
    if !(x >= T::zero()) || x > T::lit(MAX_STRUVE_ARG) {
        return domain(format!("Struve argument {x} outside [0, {MAX_STRUVE_ARG}]"));
    }
    Ok(struve_unchecked(order, x))
}

/// Like [`struve_h`], with an error estimate attached.
pub fn struve_h_estimate<T: Real>(order: u32, x: T) -> Result<SpecialValue<T>> {
    let value = struve_h(order, x)?;
    let scale = if x < T::lit(STRUVE_SERIES_LIMIT) {
        // Worst-case cancellation in the alternating series ~ e^x.
        x.exp()
    } else {
        x.sqrt() * T::lit(64.0)
    };
    Ok(SpecialValue { value, abs_error_bound: T::epsilon() * scale.max(T::one()) })
}

fn struve_unchecked<T: Real>(order: u32, x: T) -> T {
    if x == T::zero() {
        return T::zero();
    }
    if x < T::lit(STRUVE_SERIES_LIMIT) {
        struve_series(order, x)
    } else {
        struve_integral(order, x)
    }
}

/// `Σ_k (−1)^k (x/2)^{2k+n+1} / (Γ(k+3/2) Γ(k+n+3/2))`.
fn struve_series<T: Real>(order: u32, x: T) -> T {
    let half = x * T::lit(0.5);
    let q = -half * half;
    let sqrt_pi = T::PI().sqrt();
    // k = 0 term: Γ(3/2) = √π/2, Γ(5/2) = 3√π/4.
    let (mut term, n) = match order {
        0 => (half / (T::lit(0.25) * T::PI()), T::zero()),
        _ => (half * half / (sqrt_pi * T::lit(0.5) * sqrt_pi * T::lit(0.75)), T::one()),
    };
    let mut sum = term;
    for k in 0..400 {
        let kf = T::from_usize(k);
        term *= q / ((kf + T::lit(1.5)) * (kf + n + T::lit(1.5)));
        sum += term;
        if term.abs() <= T::epsilon() * T::lit(0.25) * sum.abs() && k > 2 {
            break;
        }
    }
    sum
}

/// `H_n(x) = 2(x/2)^n / (√π Γ(n+½)) ∫_0^{π/2} sin(x cos τ) sin^{2n} τ dτ`,
/// with panels sized to keep a bounded phase change per panel.
fn struve_integral<T: Real>(order: u32, x: T) -> T {
    const NODES: usize = 16;
    let (gx, gw) = gauss_legendre::<T>(NODES);
    let panels = (x.to_f64_lossy() / 4.0).ceil() as usize + 4;
    let width = T::FRAC_PI_2() / T::from_usize(panels);
    let half = width * T::lit(0.5);
    let mut acc = T::zero();
    for p in 0..panels {
        let mid = width * T::from_usize(p) + half;
        let mut panel = T::zero();
        for (&u, &w) in gx.iter().zip(&gw) {
            let tau = mid + half * u;
            let (s, c) = tau.sin_cos();
            let weight = if order == 0 { T::one() } else { s * s };
            panel += w * (x * c).sin() * weight;
        }
        acc += panel * half;
    }
    let prefactor = if order == 0 {
        T::lit(2.0) / T::PI()
    } else {
        T::lit(2.0) * x / T::PI()
    };
    prefactor * acc
}

/// `∫_0^x J0(t) dt = x J0(x) + (πx/2)(J1(x) H0(x) − J0(x) H1(x))`.
pub fn j0_primitive<T: Real>(x: T) -> Result<T> {
    if !(x >= T::zero()) || x > T::lit(MAX_STRUVE_ARG) {
        return domain(format!("J0 primitive argument {x} outside [0, {MAX_STRUVE_ARG}]"));
    }
    Ok(j0_primitive_unchecked(x))
}

fn j0_primitive_unchecked<T: Real>(x: T) -> T {
    if x == T::zero() {
        return T::zero();
    }
    let j = bessel_j_sequence_unchecked(1, x);
    let (j0, j1) = (j[0], j[1]);
    let h0 = struve_unchecked(0, x);
    let h1 = struve_unchecked(1, x);
    x * j0 + T::FRAC_PI_2() * x * (j1 * h0 - j0 * h1)
}

/// `∫_{ω_lo}^{ω_hi} J0(ω r) dω`.
///
/// Uses the primitive difference divided by `r`, switching to a truncated
/// Taylor expansion in `r` when `ω_hi·r` is below
/// [`BAND_TAYLOR_THRESHOLD`].
pub fn j0_band_integral<T: Real>(r: T, omega_lo: T, omega_hi: T) -> Result<T> {
    if !(r >= T::zero()) || !(omega_lo > T::zero()) {
        return domain(format!("band integral needs r ≥ 0 and ω_lo > 0 (got r={r}, ω_lo={omega_lo})"));
    }
    if !(omega_hi >= omega_lo) {
        return domain(format!("empty band: ω_hi={omega_hi} < ω_lo={omega_lo}"));
    }
    if omega_hi * r > T::lit(MAX_STRUVE_ARG) {
        return domain(format!("ω_hi·r = {} outside the supported range", omega_hi * r));
    }
    Ok(j0_band_integral_unchecked(r, omega_lo, omega_hi))
}

pub(crate) fn j0_band_integral_unchecked<T: Real>(r: T, omega_lo: T, omega_hi: T) -> T {
    if omega_hi == omega_lo {
        return T::zero();
    }
    if omega_hi * r < T::lit(BAND_TAYLOR_THRESHOLD) {
        // ∫J0(ωr)dω = ω − r²ω³/12 + r⁴ω⁵/320 − r⁶ω⁷/16128
        let antider = |w: T| {
            let t2 = (w * r) * (w * r);
            w * (T::one() - t2 / T::lit(12.0) + t2 * t2 / T::lit(320.0)
                - t2 * t2 * t2 / T::lit(16128.0))
        };
        return antider(omega_hi) - antider(omega_lo);
    }
    (j0_primitive_unchecked(omega_hi * r) - j0_primitive_unchecked(omega_lo * r)) / r
}
