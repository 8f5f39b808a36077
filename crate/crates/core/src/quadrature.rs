//! One-dimensional quadrature: Gauss-Legendre rules and adaptive
//! Gauss-Kronrod integration.

use crate::scalar::Real;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// nodes ascending.
///
/// Roots are located by Newton iteration on the three-term Legendre
/// recurrence in `f64`, then converted.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0_f64; n];
    let mut weights = vec![0.0_f64; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th largest root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (
        nodes.into_iter().map(T::lit).collect(),
        weights.into_iter().map(T::lit).collect(),
    )
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Fixed-order Gauss-Legendre integral of `f` over `[a, b]`.
pub fn integrate_fixed<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, nodes: &[T], weights: &[T]) -> T {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    nodes
        .iter()
        .zip(weights)
        .map(|(&x, &w)| w * f(mid + half * x))
        .sum::<T>()
        * half
}

// Gauss-Kronrod 7/15 abscissae (positive half, descending) and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub abs_error: T,
    pub converged: bool,
}

fn kronrod_panel<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let fc = f(mid);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let pair = f(mid - dx) + f(mid + dx);
        kronrod += T::lit(WGK[j]) * pair;
        if j % 2 == 1 {
            gauss += T::lit(WG[j / 2]) * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Globally adaptive Gauss-Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// Bisects the panel with the largest error estimate until the summed
/// estimate drops below `max(abs_tol, rel_tol·|value|)` or `max_panels` is
/// reached.
pub fn integrate_adaptive<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    abs_tol: T,
    rel_tol: T,
    max_panels: usize,
) -> Integral<T> {
    if a == b {
        return Integral { value: T::zero(), abs_error: T::zero(), converged: true };
    }
    let (v, e) = kronrod_panel(&f, a, b);
    let mut panels = vec![(a, b, v, e)];
    loop {
        let value: T = panels.iter().map(|p| p.2).sum();
        let err: T = panels.iter().map(|p| p.3).sum();
        let target = abs_tol.max(rel_tol * value.abs());
        if err <= target {
            return Integral { value, abs_error: err, converged: true };
        }
        if panels.len() >= max_panels {
            return Integral { value, abs_error: err, converged: false };
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (pa, pb, _, _) = panels.swap_remove(worst);
        let pm = (pa + pb) * T::lit(0.5);
        if pm <= pa || pm >= pb {
            // Panel cannot be split further at this precision.
            let value: T = panels.iter().map(|p| p.2).sum::<T>() + kronrod_panel(&f, pa, pb).0;
            return Integral { value, abs_error: err, converged: false };
        }
        let (v1, e1) = kronrod_panel(&f, pa, pm);
        let (v2, e2) = kronrod_panel(&f, pm, pb);
        panels.push((pa, pm, v1, e1));
        panels.push((pm, pb, v2, e2));
    }
}

/// Adaptive Gauss-Kronrod integration of a vector-valued integrand.
///
/// `f(t, out)` writes `dim` components into `out`. The error estimate of a
/// panel is the largest component error; refinement stops when the summed
/// estimate is below `abs_tol`.
pub fn integrate_adaptive_vec<T: Real, F: FnMut(T, &mut [T])>(
    mut f: F,
    dim: usize,
    a: T,
    b: T,
    abs_tol: T,
    max_panels: usize,
) -> (Vec<T>, T, bool) {
    let zero = vec![T::zero(); dim];
    if a == b || dim == 0 {
        return (zero, T::zero(), true);
    }
    let mut scratch = vec![T::zero(); dim];
    let mut panel = |pa: T, pb: T, f: &mut F| -> (Vec<T>, T) {
        let half = (pb - pa) * T::lit(0.5);
        let mid = (pa + pb) * T::lit(0.5);
        let mut kron = vec![T::zero(); dim];
        let mut gauss = vec![T::zero(); dim];
        f(mid, &mut scratch);
        for c in 0..dim {
            kron[c] = scratch[c] * T::lit(WGK[7]);
            gauss[c] = scratch[c] * T::lit(WG[3]);
        }
        for j in 0..7 {
            let dx = half * T::lit(XGK[j]);
            for sign in [-T::one(), T::one()] {
                f(mid + sign * dx, &mut scratch);
                for c in 0..dim {
                    kron[c] += T::lit(WGK[j]) * scratch[c];
                    if j % 2 == 1 {
                        gauss[c] += T::lit(WG[j / 2]) * scratch[c];
                    }
                }
            }
        }
        let mut err = T::zero();
        for c in 0..dim {
            err = err.max(((kron[c] - gauss[c]) * half).abs());
            kron[c] *= half;
        }
        (kron, err)
    };
    let (v, e) = panel(a, b, &mut f);
    let mut panels = vec![(a, b, v, e)];
    loop {
        let err: T = panels.iter().map(|p| p.3).sum();
        let done = err <= abs_tol;
        let exhausted = panels.len() >= max_panels;
        if done || exhausted {
            let mut total = zero.clone();
            for p in &panels {
                for (acc, &x) in total.iter_mut().zip(&p.2) {
                    *acc += x;
                }
            }
            return (total, err, done);
        }
        let worst = panels
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc })
            .0;
        let (pa, pb, v, e) = panels.swap_remove(worst);
        let pm = (pa + pb) * T::lit(0.5);
        if pm <= pa || pm >= pb {
            panels.push((pa, pb, v, e));
            let mut total = zero.clone();
            for p in &panels {
                for (acc, &x) in total.iter_mut().zip(&p.2) {
                    *acc += x;
                }
            }
            return (total, err, false);
        }
        let (v1, e1) = panel(pa, pm, &mut f);
        let (v2, e2) = panel(pm, pb, &mut f);
        panels.push((pa, pm, v1, e1));
        panels.push((pm, pb, v2, e2));
    }
}
