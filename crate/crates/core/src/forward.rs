//! Synthesis of the backpropagation coefficients of a thin-inclusion scene
//! and calibrated complex Gaussian noise.
//!
//! For direction `θ_n` and frequency `ω_k` the permittivity coefficient is
//!
//! ```text
//! A[n,k] = Σ_j (ε_j − ε₀) ∫_{σ_j} e^{iω_k θ_n·x} dσ(x)
//! ```
//!
//! and the permeability coefficient is
//!
//! ```text
//! B[n,k] = Σ_j ∫_{σ_j} [2(1/μ_j − 1/μ₀) θ_n·t(x) + 2(1/μ₀ − μ_j/μ₀²) θ_n·n(x)] e^{iω_k θ_n·x} dσ(x)
//! ```
//!
//! Positive multiplicative constants (including the thickness `h`) are
//! dropped; the imaging maps are max-normalized per channel.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::directions::DirectionSet;
use crate::error::{domain, Channel, Error, Result};
use crate::geometry::CurveQuadrature;
use crate::scalar::{Real, Vec2};

/// SNR at or above which [`add_noise`] leaves the coefficients untouched.
pub const NOISELESS_SNR_DB: f64 = 300.0;

/// One thin inclusion: supporting-curve quadrature, half-thickness and
/// material parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Inclusion<T> {
    pub quad: CurveQuadrature<T>,
    pub h: T,
    pub eps: T,
    pub mu: T,
}

impl<T: Real> Inclusion<T> {
    pub fn new(quad: CurveQuadrature<T>, h: T, eps: T, mu: T) -> Result<Self> {
        if quad.is_empty() {
            return Err(Error::Validation("inclusion curve quadrature is empty".into()));
        }
        if !(h > T::zero()) || !(eps > T::zero()) || !(mu > T::zero()) {
            return Err(Error::Validation(format!(
                "inclusion needs h, ε, μ > 0 (got h={h}, ε={eps}, μ={mu})"
            )));
        }
        Ok(Self { quad, h, eps, mu })
    }

    /// Rigid translation of the supporting curve.
    pub fn translated(&self, d: Vec2<T>) -> Self {
        let nodes = self
            .quad
            .nodes()
            .iter()
            .map(|n| {
                let mut n = *n;
                n.point = n.point + d;
                n
            })
            .collect();
        Self { quad: CurveQuadrature::from_nodes(nodes), ..self.clone() }
    }
}

/// Inclusions embedded in a background with permittivity `eps0` and
/// permeability `mu0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThinInclusionScene<T> {
    pub inclusions: Vec<Inclusion<T>>,
    pub eps0: T,
    pub mu0: T,
}

impl<T: Real> ThinInclusionScene<T> {
    pub fn new(inclusions: Vec<Inclusion<T>>, eps0: T, mu0: T) -> Result<Self> {
        if !(eps0 > T::zero()) || !(mu0 > T::zero()) {
            return Err(Error::Validation(format!(
                "background needs ε₀, μ₀ > 0 (got ε₀={eps0}, μ₀={mu0})"
            )));
        }
        if inclusions.is_empty() {
            return Err(Error::Validation("scene has no inclusions".into()));
        }
        Ok(Self { inclusions, eps0, mu0 })
    }

    /// Checks `h < λ_min / 10` for the shortest wavelength in `freqs`.
    pub fn validate_for(&self, freqs: &FrequencySet<T>) -> Result<()> {
        let lambda_min = T::TAU() / freqs.max();
        for (j, inc) in self.inclusions.iter().enumerate() {
            if !(inc.h < lambda_min / T::lit(10.0)) {
                return Err(Error::Validation(format!(
                    "inclusion {} thickness h={} is not below λ_min/10 = {}",
                    j + 1,
                    inc.h,
                    lambda_min / T::lit(10.0)
                )));
            }
        }
        Ok(())
    }

    pub fn translated(&self, d: Vec2<T>) -> Self {
        Self {
            inclusions: self.inclusions.iter().map(|i| i.translated(d)).collect(),
            ..self.clone()
        }
    }

    /// `ε_j − ε₀`.
    pub fn permittivity_contrast(&self, j: usize) -> T {
        self.inclusions[j].eps - self.eps0
    }

    /// Coefficients `(c_t, c_n)` of `θ·t` and `θ·n` in the permeability
    /// bracket of inclusion `j`.
    pub fn permeability_weights(&self, j: usize) -> (T, T) {
        let two = T::lit(2.0);
        let mu = self.inclusions[j].mu;
        let mu0 = self.mu0;
        (two * (mu.recip() - mu0.recip()), two * (mu0.recip() - mu / (mu0 * mu0)))
    }
}

/// Angular frequencies `ω_k`, non-decreasing and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySet<T> {
    omegas: Vec<T>,
}

/// How frequencies are spread across a wavelength band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    /// Equally spaced in `ω`.
    Omega,
    /// Equally spaced in `λ`.
    Lambda,
}

impl<T: Real> FrequencySet<T> {
    pub fn new(omegas: Vec<T>) -> Result<Self> {
        if omegas.is_empty() {
            return domain("frequency set must not be empty");
        }
        if omegas.iter().any(|w| !(w.is_finite() && *w > T::zero())) {
            return domain("frequencies must be finite and positive");
        }
        if omegas.windows(2).any(|p| p[1] < p[0]) {
            return domain("frequencies must be sorted ascending");
        }
        Ok(Self { omegas })
    }

    pub fn single(omega: T) -> Result<Self> {
        Self::new(vec![omega])
    }

    /// `K` frequencies between `2π/λ_max` and `2π/λ_min` inclusive. `K = 1`
    /// gives the lower edge `2π/λ_max`.
    pub fn band(lambda_max: T, lambda_min: T, count: usize, spacing: Spacing) -> Result<Self> {
        if count == 0 {
            return domain("band needs K ≥ 1");
        }
        if !(lambda_min > T::zero() && lambda_max >= lambda_min) {
            return domain(format!("wavelength band needs 0 < λ_min ≤ λ_max (got {lambda_min}, {lambda_max})"));
        }
        if count == 1 {
            return Self::single(T::TAU() / lambda_max);
        }
        if lambda_max == lambda_min {
            return domain("band with K ≥ 2 needs λ_min < λ_max");
        }
        let last = T::from_usize(count - 1);
        let omegas: Vec<T> = match spacing {
            Spacing::Omega => {
                let (lo, hi) = (T::TAU() / lambda_max, T::TAU() / lambda_min);
                (0..count).map(|k| lo + (hi - lo) * T::from_usize(k) / last).collect()
            }
            Spacing::Lambda => (0..count)
                .map(|k| T::TAU() / (lambda_max + (lambda_min - lambda_max) * T::from_usize(k) / last))
                .collect(),
        };
        Self::new(omegas)
    }

    pub fn omegas(&self) -> &[T] {
        &self.omegas
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn min(&self) -> T {
        self.omegas[0]
    }

    pub fn max(&self) -> T {
        self.omegas[self.omegas.len() - 1]
    }
}

/// Noise bookkeeping attached to a noised measurement set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseRecord<T> {
    pub snr_db: T,
    pub seed: u64,
    /// Mean `|A|²` before noising.
    pub signal_power_a: T,
    pub signal_power_b: T,
    /// Per-element complex noise variance `E|noise|²`.
    pub noise_variance_a: T,
    pub noise_variance_b: T,
}

/// Coefficients `A[n,k]`, `B[n,k]` with their directions and frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet<T> {
    a: Vec<Complex<T>>,
    b: Vec<Complex<T>>,
    dirs: DirectionSet<T>,
    freqs: FrequencySet<T>,
    noise: Option<NoiseRecord<T>>,
}

impl<T: Real> MeasurementSet<T> {
    /// Builds a set from row-major `(n, k)` arrays.
    pub fn from_parts(
        a: Vec<Complex<T>>,
        b: Vec<Complex<T>>,
        dirs: DirectionSet<T>,
        freqs: FrequencySet<T>,
    ) -> Result<Self> {
        let expected = dirs.len() * freqs.len();
        if a.len() != expected || b.len() != expected {
            return domain(format!(
                "coefficient arrays must have N·K = {expected} entries (got {}, {})",
                a.len(),
                b.len()
            ));
        }
        if a.iter().chain(&b).any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return domain("coefficients must be finite");
        }
        Ok(Self { a, b, dirs, freqs, noise: None })
    }

    pub fn dirs(&self) -> &DirectionSet<T> {
        &self.dirs
    }

    pub fn freqs(&self) -> &FrequencySet<T> {
        &self.freqs
    }

    pub fn n_dirs(&self) -> usize {
        self.dirs.len()
    }

    pub fn n_freqs(&self) -> usize {
        self.freqs.len()
    }

    #[inline]
    pub fn a(&self, n: usize, k: usize) -> Complex<T> {
        self.a[n * self.freqs.len() + k]
    }

    #[inline]
    pub fn b(&self, n: usize, k: usize) -> Complex<T> {
        self.b[n * self.freqs.len() + k]
    }

    pub fn coefficient(&self, channel: Channel, n: usize, k: usize) -> Complex<T> {
        match channel {
            Channel::Permittivity => self.a(n, k),
            Channel::Permeability => self.b(n, k),
        }
    }

    pub fn channel(&self, channel: Channel) -> &[Complex<T>] {
        match channel {
            Channel::Permittivity => &self.a,
            Channel::Permeability => &self.b,
        }
    }

    pub fn noise(&self) -> Option<&NoiseRecord<T>> {
        self.noise.as_ref()
    }

    pub fn noise_snr_db(&self) -> Option<T> {
        self.noise.map(|n| n.snr_db)
    }

    pub fn seed(&self) -> Option<u64> {
        self.noise.map(|n| n.seed)
    }

    /// Mean `|c|²` of one channel.
    pub fn signal_power(&self, channel: Channel) -> T {
        mean_power(self.channel(channel))
    }

    pub(crate) fn with_noise_record(mut self, noise: Option<NoiseRecord<T>>) -> Self {
        self.noise = noise;
        self
    }
}

fn mean_power<T: Real>(c: &[Complex<T>]) -> T {
    if c.is_empty() {
        return T::zero();
    }
    c.iter().map(|z| z.norm_sqr()).sum::<T>() / T::from_usize(c.len())
}

/// `e^{iφ}`.
#[inline]
pub(crate) fn cis<T: Real>(phase: T) -> Complex<T> {
    let (s, c) = phase.sin_cos();
    Complex::new(c, s)
}

/// Noiseless coefficients by curve quadrature.
pub fn synthesize<T: Real>(
    scene: &ThinInclusionScene<T>,
    dirs: &DirectionSet<T>,
    freqs: &FrequencySet<T>,
) -> Result<MeasurementSet<T>> {
    scene.validate_for(freqs)?;
    let n_freqs = freqs.len();
    let pairs: Vec<(Complex<T>, Complex<T>)> = (0..dirs.len() * n_freqs)
        .into_par_iter()
        .map(|idx| {
            let theta = dirs.vectors()[idx / n_freqs];
            let omega = freqs.omegas()[idx % n_freqs];
            coefficient_pair(scene, theta, omega)
        })
        .collect();
    let (a, b) = pairs.into_iter().unzip();
    MeasurementSet::from_parts(a, b, dirs.clone(), freqs.clone())
}

/// `(A, B)` for a single direction and frequency.
pub fn coefficient_pair<T: Real>(
    scene: &ThinInclusionScene<T>,
    theta: Vec2<T>,
    omega: T,
) -> (Complex<T>, Complex<T>) {
    let zero = Complex::new(T::zero(), T::zero());
    let mut a = zero;
    let mut b = zero;
    for (j, inc) in scene.inclusions.iter().enumerate() {
        let contrast = scene.permittivity_contrast(j);
        let (ct, cn) = scene.permeability_weights(j);
        let mut plain = zero;
        let mut weighted = zero;
        for node in inc.quad.nodes() {
            let wave = cis(omega * theta.dot(node.point)) * node.weight;
            plain += wave;
            weighted += wave * (ct * theta.dot(node.tangent) + cn * theta.dot(node.normal));
        }
        a += plain * contrast;
        b += weighted;
    }
    (a, b)
}

/// Adds complex white Gaussian noise to both channels.
///
/// Each channel receives i.i.d. circular noise with per-element variance
/// `P·10^{−snr_db/10}`, `P` being the channel's mean signal power, so that
/// the expected total noise power equals the total signal power scaled by
/// the requested SNR. The draw for entry `(n, k)` of a channel depends only
/// on `(seed, n, k, channel)`.
pub fn add_noise<T: Real>(meas: &MeasurementSet<T>, snr_db: T, seed: u64) -> Result<MeasurementSet<T>> {
    if meas.noise.is_some() {
        return Err(Error::Usage("measurement set is already noised".into()));
    }
    if snr_db.is_nan() {
        return domain("SNR must not be NaN");
    }
    let power_a = meas.signal_power(Channel::Permittivity);
    let power_b = meas.signal_power(Channel::Permeability);
    if snr_db >= T::lit(NOISELESS_SNR_DB) {
        let record = NoiseRecord {
            snr_db,
            seed,
            signal_power_a: power_a,
            signal_power_b: power_b,
            noise_variance_a: T::zero(),
            noise_variance_b: T::zero(),
        };
        return Ok(meas.clone().with_noise_record(Some(record)));
    }
    let ratio = T::lit(10.0).powf(-snr_db / T::lit(10.0));
    let var_a = power_a * ratio;
    let var_b = power_b * ratio;
    let n_freqs = meas.n_freqs();
    let noisy = |channel: Channel, variance: T| -> Vec<Complex<T>> {
        let sigma = (variance * T::lit(0.5)).sqrt();
        meas.channel(channel)
            .iter()
            .enumerate()
            .map(|(idx, &c)| c + gaussian_pair(seed, idx / n_freqs, idx % n_freqs, channel) * sigma)
            .collect()
    };
    let a = noisy(Channel::Permittivity, var_a);
    let b = noisy(Channel::Permeability, var_b);
    let out = MeasurementSet::from_parts(a, b, meas.dirs.clone(), meas.freqs.clone())?;
    Ok(out.with_noise_record(Some(NoiseRecord {
        snr_db,
        seed,
        signal_power_a: power_a,
        signal_power_b: power_b,
        noise_variance_a: var_a,
        noise_variance_b: var_b,
    })))
}

/// Two independent standard normals for one coefficient, from a ChaCha
/// stream keyed by `(n, k, channel)`.
fn gaussian_pair<T: Real>(seed: u64, n: usize, k: usize, channel: Channel) -> Complex<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stream = ((n as u64) << 33) ^ ((k as u64) << 1) ^ channel.index();
    rng.set_stream(stream);
    let re: f64 = StandardNormal.sample(&mut rng);
    let im: f64 = StandardNormal.sample(&mut rng);
    Complex::new(T::lit(re), T::lit(im))
}
