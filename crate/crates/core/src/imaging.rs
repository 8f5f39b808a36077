//! Single- and multi-frequency normalized topological-derivative maps.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Channel, Error, Result};
use crate::forward::{cis, MeasurementSet};
use crate::geometry::{distance_to_curve, CurveQuadrature};
use crate::scalar::{Real, Vec2};

/// A channel whose maximum magnitude on the grid is below this is treated
/// as identically zero.
pub const DEGENERATE_MAX_ABS: f64 = 1e-300;

/// A channel whose maximum on the grid is below this fraction of
/// `Σ_n |coefficient|` has cancelled across the direction set (e.g. the
/// permeability channel under antipodal directions) and only carries
/// rounding residue. Such a channel is left out of the normalized average.
/// For scalar types coarser than `f64` the threshold is raised to
/// `1e3·ε` of that type.
pub const CANCELLED_REL: f64 = 1e-9;

fn cancelled_rel<T: Real>() -> T {
    T::lit(CANCELLED_REL).max(T::epsilon() * T::lit(1e3))
}

/// Rectangular sampling grid masked to a disk.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagingGrid<T> {
    pub x_range: (T, T),
    pub y_range: (T, T),
    pub nx: usize,
    pub ny: usize,
    pub disk_center: Vec2<T>,
    pub disk_radius: T,
}

impl<T: Real> ImagingGrid<T> {
    pub fn new(x_range: (T, T), y_range: (T, T), nx: usize, ny: usize, disk_radius: T) -> Result<Self> {
        let center = Vec2::new(
            (x_range.0 + x_range.1) * T::lit(0.5),
            (y_range.0 + y_range.1) * T::lit(0.5),
        );
        Self::with_center(x_range, y_range, nx, ny, center, disk_radius)
    }

    pub fn with_center(
        x_range: (T, T),
        y_range: (T, T),
        nx: usize,
        ny: usize,
        disk_center: Vec2<T>,
        disk_radius: T,
    ) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return domain(format!("grid resolution must be at least 2×2 (got {nx}×{ny})"));
        }
        if !(disk_radius > T::zero()) {
            return domain(format!("disk radius must be positive (got {disk_radius})"));
        }
        if !(x_range.0 < x_range.1 && y_range.0 < y_range.1) {
            return domain("grid ranges must be non-empty intervals");
        }
        Ok(Self { x_range, y_range, nx, ny, disk_center, disk_radius })
    }

    /// `[−1, 1]²` with the given resolution, masked to radius 0.95 about
    /// the origin.
    pub fn unit_disk(resolution: usize) -> Result<Self> {
        let one = T::one();
        Self::new((-one, one), (-one, one), resolution, resolution, T::lit(0.95))
    }

    /// Same grid shifted by `d` (mask included).
    pub fn translated(&self, d: Vec2<T>) -> Self {
        Self {
            x_range: (self.x_range.0 + d.x, self.x_range.1 + d.x),
            y_range: (self.y_range.0 + d.y, self.y_range.1 + d.y),
            disk_center: self.disk_center + d,
            ..self.clone()
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Point of cell `(i, j)`, `i` along x and `j` along y.
    pub fn point(&self, i: usize, j: usize) -> Vec2<T> {
        let fx = T::from_usize(i) / T::from_usize(self.nx - 1);
        let fy = T::from_usize(j) / T::from_usize(self.ny - 1);
        Vec2::new(
            self.x_range.0 + (self.x_range.1 - self.x_range.0) * fx,
            self.y_range.0 + (self.y_range.1 - self.y_range.0) * fy,
        )
    }

    /// Point of the row-major cell index `j·nx + i`.
    pub fn point_at(&self, idx: usize) -> Vec2<T> {
        self.point(idx % self.nx, idx / self.nx)
    }

    pub fn in_mask(&self, p: Vec2<T>) -> bool {
        (p - self.disk_center).norm() <= self.disk_radius
    }

    pub fn mask(&self) -> Vec<bool> {
        (0..self.len()).map(|idx| self.in_mask(self.point_at(idx))).collect()
    }
}

/// Kind of map held by an [`ImageMap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    SingleFrequency,
    MultiFrequency,
    /// Unnormalized single-channel topological derivative.
    Channel(Channel),
}

/// Per-frequency normalization record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Normalizers {
    pub omega: f64,
    /// Max |d_T E_ε| over unmasked cells.
    pub max_eps: f64,
    /// Max |d_T E_μ| over unmasked cells.
    pub max_mu: f64,
    pub eps_active: bool,
    pub mu_active: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapMeta {
    pub kind: MapKind,
    pub n_directions: usize,
    pub angles: Vec<f64>,
    pub omegas: Vec<f64>,
    pub snr_db: Option<f64>,
    pub seed: Option<u64>,
    pub normalizers: Vec<Normalizers>,
}

/// Real map sampled on an [`ImagingGrid`], row-major (`j·nx + i`).
/// Masked-out cells hold NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageMap<T> {
    pub grid: ImagingGrid<T>,
    pub values: Vec<T>,
    pub mask: Vec<bool>,
    pub meta: MapMeta,
}

impl<T: Real> ImageMap<T> {
    pub fn value(&self, i: usize, j: usize) -> Option<T> {
        let idx = j * self.grid.nx + i;
        self.mask[idx].then(|| self.values[idx])
    }

    /// Unmasked `(index, value)` pairs.
    pub fn unmasked(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.values.iter().zip(&self.mask).enumerate().filter(|(_, (_, &m))| m).map(|(i, (&v, _))| (i, v))
    }

    pub fn max_abs(&self) -> T {
        self.unmasked().map(|(_, v)| v.abs()).fold(T::zero(), T::max)
    }

    /// `(min, max)` over unmasked cells.
    pub fn range(&self) -> Option<(T, T)> {
        self.unmasked().fold(None, |acc, (_, v)| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }
}

fn check_k<T: Real>(meas: &MeasurementSet<T>, k: usize) -> Result<()> {
    if k >= meas.n_freqs() {
        return Err(Error::IndexOutOfRange { index: k, len: meas.n_freqs() });
    }
    Ok(())
}

#[inline]
fn backpropagate<T: Real>(meas: &MeasurementSet<T>, channel: Channel, k: usize, z: Vec2<T>) -> T {
    let omega = meas.freqs().omegas()[k];
    meas.dirs()
        .vectors()
        .iter()
        .enumerate()
        .map(|(n, &theta)| (cis(-omega * theta.dot(z)) * meas.coefficient(channel, n, k)).re)
        .sum()
}

/// Permittivity channel `Re Σ_n e^{−iω_k θ_n·z} A[n,k]`.
pub fn dte_eps<T: Real>(meas: &MeasurementSet<T>, k: usize, z: Vec2<T>) -> Result<T> {
    check_k(meas, k)?;
    Ok(backpropagate(meas, Channel::Permittivity, k, z))
}

/// Permeability channel `Re Σ_n e^{−iω_k θ_n·z} B[n,k]`.
pub fn dte_mu<T: Real>(meas: &MeasurementSet<T>, k: usize, z: Vec2<T>) -> Result<T> {
    check_k(meas, k)?;
    Ok(backpropagate(meas, Channel::Permeability, k, z))
}

fn channel_values<T: Real>(meas: &MeasurementSet<T>, channel: Channel, k: usize, grid: &ImagingGrid<T>, mask: &[bool]) -> Vec<T> {
    (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            if mask[idx] {
                backpropagate(meas, channel, k, grid.point_at(idx))
            } else {
                T::nan()
            }
        })
        .collect()
}

fn base_meta<T: Real>(meas: &MeasurementSet<T>, kind: MapKind, omegas: Vec<f64>) -> MapMeta {
    MapMeta {
        kind,
        n_directions: meas.n_dirs(),
        angles: meas.dirs().angles().iter().map(|a| a.to_f64_lossy()).collect(),
        omegas,
        snr_db: meas.noise_snr_db().map(|s| s.to_f64_lossy()),
        seed: meas.seed(),
        normalizers: Vec::new(),
    }
}

/// Unnormalized single-channel map at frequency index `k`.
pub fn channel_map<T: Real>(meas: &MeasurementSet<T>, channel: Channel, k: usize, grid: &ImagingGrid<T>) -> Result<ImageMap<T>> {
    check_k(meas, k)?;
    let mask = grid.mask();
    let values = channel_values(meas, channel, k, grid, &mask);
    let meta = base_meta(meas, MapKind::Channel(channel), vec![meas.freqs().omegas()[k].to_f64_lossy()]);
    Ok(ImageMap { grid: grid.clone(), values, mask, meta })
}

/// Normalized single-frequency map
/// `½(d_T E_ε / max|d_T E_ε| + d_T E_μ / max|d_T E_μ|)`.
///
/// A channel that has cancelled to rounding level across the direction
/// set (see [`CANCELLED_REL`]) is dropped and the remaining channel is used
/// alone; its normalizer is still recorded with `*_active = false`.
pub fn e_sf<T: Real>(meas: &MeasurementSet<T>, k: usize, grid: &ImagingGrid<T>) -> Result<ImageMap<T>> {
    check_k(meas, k)?;
    let mask = grid.mask();
    if !mask.iter().any(|&m| m) {
        return domain("imaging grid has no unmasked cells");
    }
    let eps = channel_values(meas, Channel::Permittivity, k, grid, &mask);
    let mu = channel_values(meas, Channel::Permeability, k, grid, &mask);
    let max_abs = |v: &[T]| {
        v.iter().zip(&mask).filter(|(_, &m)| m).map(|(x, _)| x.abs()).fold(T::zero(), T::max)
    };
    let (max_eps, max_mu) = (max_abs(&eps), max_abs(&mu));
    let mut active = [true, true];
    for (slot, (channel, max)) in [(Channel::Permittivity, max_eps), (Channel::Permeability, max_mu)]
        .into_iter()
        .enumerate()
    {
        if !(max >= T::lit(DEGENERATE_MAX_ABS)) {
            return Err(Error::DegenerateChannel { channel, frequency_index: k, max_abs: max.to_f64_lossy() });
        }
        let scale: T = (0..meas.n_dirs()).map(|n| meas.coefficient(channel, n, k).norm()).sum();
        active[slot] = max > cancelled_rel::<T>() * scale;
    }
    if !active[0] && !active[1] {
        return Err(Error::DegenerateChannel {
            channel: Channel::Permittivity,
            frequency_index: k,
            max_abs: max_eps.to_f64_lossy(),
        });
    }
    let weight = if active[0] && active[1] { T::lit(0.5) } else { T::one() };
    let (inv_eps, inv_mu) = (max_eps.recip(), max_mu.recip());
    let values = eps
        .iter()
        .zip(&mu)
        .zip(&mask)
        .map(|((&e, &m), &keep)| {
            if !keep {
                return T::nan();
            }
            let mut v = T::zero();
            if active[0] {
                v += e * inv_eps;
            }
            if active[1] {
                v += m * inv_mu;
            }
            v * weight
        })
        .collect();
    let omega = meas.freqs().omegas()[k].to_f64_lossy();
    let mut meta = base_meta(meas, MapKind::SingleFrequency, vec![omega]);
    meta.normalizers.push(Normalizers {
        omega,
        max_eps: max_eps.to_f64_lossy(),
        max_mu: max_mu.to_f64_lossy(),
        eps_active: active[0],
        mu_active: active[1],
    });
    Ok(ImageMap { grid: grid.clone(), values, mask, meta })
}

/// Multi-frequency map: pointwise mean of [`e_sf`] over all frequencies.
pub fn e_mf<T: Real>(meas: &MeasurementSet<T>, grid: &ImagingGrid<T>) -> Result<ImageMap<T>> {
    let maps = (0..meas.n_freqs()).map(|k| e_sf(meas, k, grid)).collect::<Result<Vec<_>>>()?;
    let mut out = mean_of_maps(&maps)?;
    out.meta.kind = MapKind::MultiFrequency;
    Ok(out)
}

/// Pointwise mean of maps on the same grid; normalizer records are
/// concatenated.
pub fn mean_of_maps<T: Real>(maps: &[ImageMap<T>]) -> Result<ImageMap<T>> {
    let first = maps.first().ok_or_else(|| Error::Domain("mean of zero maps".into()))?;
    if maps.iter().any(|m| m.grid != first.grid) {
        return domain("maps are on different grids");
    }
    let count = T::from_usize(maps.len());
    let mut values = vec![T::zero(); first.values.len()];
    for m in maps {
        for (acc, &v) in values.iter_mut().zip(&m.values) {
            *acc += v;
        }
    }
    for v in &mut values {
        *v /= count;
    }
    let mut meta = first.meta.clone();
    meta.omegas = maps.iter().flat_map(|m| m.meta.omegas.iter().copied()).collect();
    meta.normalizers = maps.iter().flat_map(|m| m.meta.normalizers.iter().copied()).collect();
    Ok(ImageMap { grid: first.grid.clone(), values, mask: first.mask.clone(), meta })
}

/// Fraction of the highest-valued `top_fraction` of unmasked cells lying
/// within `dist_threshold` of a node of `quad`.
pub fn concentration_metric<T: Real>(
    map: &ImageMap<T>,
    quad: &CurveQuadrature<T>,
    top_fraction: T,
    dist_threshold: T,
) -> Result<T> {
    if !(top_fraction > T::zero() && top_fraction <= T::one()) {
        return domain(format!("top_fraction must lie in (0, 1] (got {top_fraction})"));
    }
    if !(dist_threshold > T::zero()) {
        return domain(format!("dist_threshold must be positive (got {dist_threshold})"));
    }
    let mut cells: Vec<(usize, T)> = map.unmasked().collect();
    if cells.is_empty() {
        return domain("map has no unmasked cells");
    }
    cells.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0)));
    let count = (top_fraction * T::from_usize(cells.len())).ceil().to_f64_lossy().max(1.0) as usize;
    let count = count.min(cells.len());
    let mut hits = 0usize;
    for &(idx, _) in &cells[..count] {
        if distance_to_curve(map.grid.point_at(idx), quad)? <= dist_threshold {
            hits += 1;
        }
    }
    Ok(T::from_usize(hits) / T::from_usize(count))
}

/// `Σ_n e^{−iω θ_n·z} c_n` for arbitrary coefficients; exposed for
/// cross-checks that bypass [`MeasurementSet`].
pub fn backpropagate_coefficients<T: Real>(coeffs: &[Complex<T>], dirs: &[Vec2<T>], omega: T, z: Vec2<T>) -> Complex<T> {
    coeffs
        .iter()
        .zip(dirs)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (&c, &theta)| acc + cis(-omega * theta.dot(z)) * c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::directions::DirectionSet;
    use crate::forward::FrequencySet;
    use crate::geometry::{builtin_sigma, discretize};

    fn point_target(z0: Vec2<f64>, dirs: usize, omegas: Vec<f64>) -> MeasurementSet<f64> {
        let d = DirectionSet::uniform(dirs).unwrap();
        let f = FrequencySet::new(omegas).unwrap();
        let mut a = Vec::new();
        for theta in d.vectors() {
            for &w in f.omegas() {
                a.push(cis(w * theta.dot(z0)));
            }
        }
        let b = a.iter().map(|c| c * 0.5).collect();
        MeasurementSet::from_parts(a, b, d, f).unwrap()
    }

    #[test]
    fn point_target_peaks_at_source() {
        let z0 = Vec2::new(0.1, -0.3);
        let m = point_target(z0, 5, vec![9.0]);
        assert!((dte_eps(&m, 0, z0).unwrap() - 5.0).abs() < 1e-12);
        let z = Vec2::new(-0.4, 0.25);
        let direct: f64 = m.dirs().vectors().iter().map(|t| (9.0 * t.dot(z0 - z)).cos()).sum();
        assert!((dte_eps(&m, 0, z).unwrap() - direct).abs() < 1e-12);
        assert!(matches!(dte_mu(&m, 3, z), Err(Error::IndexOutOfRange { index: 3, len: 1 })));
    }

    #[test]
    fn zero_measurement_is_zero() {
        let d = DirectionSet::uniform(3).unwrap();
        let f = FrequencySet::single(5.0).unwrap();
        let zero = vec![Complex::new(0.0, 0.0); 3];
        let m = MeasurementSet::from_parts(zero.clone(), zero, d, f).unwrap();
        assert_eq!(dte_eps(&m, 0, Vec2::new(0.3, 0.1)).unwrap(), 0.0);
        assert_eq!(dte_mu(&m, 0, Vec2::new(0.3, 0.1)).unwrap(), 0.0);
        let grid = ImagingGrid::unit_disk(11).unwrap();
        let err = e_sf(&m, 0, &grid).unwrap_err();
        assert!(matches!(err, Error::DegenerateChannel { channel: Channel::Permittivity, .. }));
    }

    #[test]
    fn mask_excludes_corners() {
        let grid = ImagingGrid::<f64>::unit_disk(21).unwrap();
        let m = point_target(Vec2::new(0.0, 0.0), 3, vec![7.0]);
        let map = e_sf(&m, 0, &grid).unwrap();
        assert!(map.value(0, 0).is_none());
        assert!(map.values[0].is_nan());
        assert!(map.value(10, 10).is_some());
        let unmasked = map.unmasked().count();
        assert!(unmasked < 21 * 21 && unmasked > 250);
    }

    #[test]
    fn antipodal_permeability_channel_is_dropped() {
        let quad = discretize(&builtin_sigma(1).unwrap(), 128).unwrap();
        let scene = crate::forward::ThinInclusionScene::new(
            vec![crate::forward::Inclusion::new(quad, 0.02, 5.0, 5.0).unwrap()],
            1.0,
            1.0,
        )
        .unwrap();
        let m = crate::forward::synthesize(&scene, &DirectionSet::uniform(4).unwrap(), &FrequencySet::single(12.0).unwrap())
            .unwrap();
        let map = e_sf(&m, 0, &ImagingGrid::unit_disk(41).unwrap()).unwrap();
        let norms = map.meta.normalizers[0];
        assert!(norms.eps_active && !norms.mu_active);
        assert!((map.max_abs() - 1.0_f64).abs() < 1e-12);
        let m3 = crate::forward::synthesize(&scene, &DirectionSet::uniform(3).unwrap(), &FrequencySet::single(12.0).unwrap())
            .unwrap();
        let map3 = e_sf(&m3, 0, &ImagingGrid::unit_disk(41).unwrap()).unwrap();
        assert!(map3.meta.normalizers[0].mu_active);
    }

    #[test]
    fn concentration_edge_cases() {
        let seg = crate::geometry::ParametricCurve::segment(Vec2::new(-0.5, 0.0), Vec2::new(0.5, 0.0)).unwrap();
        let quad = discretize(&seg, 64).unwrap();
        let grid = ImagingGrid::unit_disk(21).unwrap();
        let mask = grid.mask();
        let mut values: Vec<f64> = mask.iter().map(|&m| if m { 0.0 } else { f64::NAN }).collect();
        let on_curve = 10 * 21 + 10; // (0, 0)
        values[on_curve] = 1.0;
        let meta = base_meta(&point_target(Vec2::new(0.0, 0.0), 1, vec![1.0]), MapKind::SingleFrequency, vec![]);
        let map = ImageMap { grid: grid.clone(), values: values.clone(), mask: mask.clone(), meta: meta.clone() };
        assert_eq!(concentration_metric(&map, &quad, 1e-3, 0.05).unwrap(), 1.0);
        values[on_curve] = 0.0;
        values[18 * 21 + 10] = 1.0; // (0, 0.8)
        let far = ImageMap { grid, values, mask, meta };
        assert_eq!(concentration_metric(&far, &quad, 1e-3, 0.05).unwrap(), 0.0);
        assert!(concentration_metric(&far, &quad, 0.0, 0.05).is_err());
        assert!(concentration_metric(&far, &quad, 0.5, 0.0).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(ImagingGrid::<f64>::unit_disk(1).is_err());
        assert!(ImagingGrid::new((0.0, 1.0), (0.0, 1.0), 3, 3, 0.0).is_err());
        let g = ImagingGrid::<f64>::unit_disk(201).unwrap();
        assert_eq!(g.point(0, 0), Vec2::new(-1.0, -1.0));
        assert_eq!(g.point(200, 200), Vec2::new(1.0, 1.0));
        assert!((g.point(100, 150).y - 0.5).abs() < 1e-15);
    }
}
