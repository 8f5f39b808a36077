//! Incident-direction sets and the harmonic sums that govern how the
//! angular terms of the imaging series cancel.

use num_complex::Complex;

use crate::error::{domain, Result};
use crate::scalar::{Real, Vec2};

/// Default tolerance of [`DirectionSet::is_antipodal`].
pub const ANTIPODAL_TOL: f64 = 1e-12;

/// Incident directions `θ_n = (cos θ_n, sin θ_n)`, angles in `[0, 2π)`
/// sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet<T> {
    angles: Vec<T>,
    vectors: Vec<Vec2<T>>,
}

impl<T: Real> DirectionSet<T> {
    /// `θ_n = 2π(n−1)/N` for `n = 1..N`.
    pub fn uniform(count: usize) -> Result<Self> {
        if count == 0 {
            return domain("uniform direction set needs N ≥ 1");
        }
        let angles: Vec<T> = (0..count)
            .map(|n| T::TAU() * T::from_usize(n) / T::from_usize(count))
            .collect();
        Ok(Self::from_sorted(angles))
    }

    /// Arbitrary angles in radians; wrapped into `[0, 2π)` and sorted.
    pub fn from_angles(angles: impl IntoIterator<Item = T>) -> Result<Self> {
        let mut wrapped = Vec::new();
        for a in angles {
            if !a.is_finite() {
                return domain(format!("direction angle {a} is not finite"));
            }
            let mut w = a % T::TAU();
            if w < T::zero() {
                w += T::TAU();
            }
            if w >= T::TAU() {
                w = T::zero();
            }
            wrapped.push(w);
        }
        if wrapped.is_empty() {
            return domain("direction set must not be empty");
        }
        wrapped.sort_by(|a, b| a.partial_cmp(b).expect("finite angles"));
        Ok(Self::from_sorted(wrapped))
    }

    fn from_sorted(angles: Vec<T>) -> Self {
        let vectors = angles.iter().map(|&a| Vec2::from_angle(a)).collect();
        Self { angles, vectors }
    }

    pub fn angles(&self) -> &[T] {
        &self.angles
    }

    pub fn vectors(&self) -> &[Vec2<T>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// `Σ_n e^{i p θ_n}`.
    pub fn harmonic_sum(&self, p: i64) -> Complex<T> {
        let pf = T::lit(p as f64);
        self.angles
            .iter()
            .map(|&a| {
                let (s, c) = (pf * a).sin_cos();
                Complex::new(c, s)
            })
            .fold(Complex::new(T::zero(), T::zero()), |acc, z| acc + z)
    }

    /// True iff every direction has its negation in the set, within `tol`
    /// on the unit vectors.
    pub fn is_antipodal(&self, tol: T) -> bool {
        self.vectors
            .iter()
            .all(|&v| self.vectors.iter().any(|&w| (v + w).norm() <= tol))
    }

    /// All angles shifted by `alpha`.
    pub fn rotated(&self, alpha: T) -> Self {
        Self::from_angles(self.angles.iter().map(|&a| a + alpha)).expect("rotation keeps the set valid")
    }
}

/// Free-function form of [`DirectionSet::uniform`].
pub fn uniform_directions<T: Real>(count: usize) -> Result<DirectionSet<T>> {
    DirectionSet::uniform(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn uniform_four() {
        let d = DirectionSet::<f64>::uniform(4).unwrap();
        assert_eq!(d.angles(), &[0.0, PI / 2.0, PI, 3.0 * PI / 2.0]);
        let expected = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
        for (v, e) in d.vectors().iter().zip(expected) {
            assert!((v.x - e.0).abs() < 1e-15 && (v.y - e.1).abs() < 1e-15);
        }
    }

    #[test]
    fn uniform_small_counts() {
        let d = DirectionSet::<f64>::uniform(1).unwrap();
        assert_eq!(d.vectors(), &[Vec2::new(1.0, 0.0)]);
        let d = DirectionSet::<f64>::uniform(2).unwrap();
        assert!((d.vectors()[1].x + 1.0).abs() < 1e-15 && d.vectors()[1].y.abs() < 1e-15);
        assert!(DirectionSet::<f64>::uniform(0).is_err());
    }

    #[test]
    fn harmonic_sums() {
        let d = DirectionSet::<f64>::uniform(4).unwrap();
        let z = d.harmonic_sum(0);
        assert_eq!((z.re, z.im), (4.0, 0.0));
        assert!(d.harmonic_sum(2).norm() < 1e-12);
        assert!((d.harmonic_sum(4) - Complex::new(4.0, 0.0)).norm() < 1e-12);
        let custom = DirectionSet::from_angles([0.3, 1.1, 2.0]).unwrap();
        assert_eq!(custom.harmonic_sum(0).re, 3.0);
    }

    #[test]
    fn antipodal() {
        let tol = ANTIPODAL_TOL;
        assert!(DirectionSet::<f64>::uniform(4).unwrap().is_antipodal(tol));
        assert!(!DirectionSet::<f64>::uniform(5).unwrap().is_antipodal(tol));
        assert!(DirectionSet::<f64>::uniform(6).unwrap().is_antipodal(tol));
        let perturbed = DirectionSet::from_angles([0.0, PI / 2.0, PI + 1e-3, 3.0 * PI / 2.0]).unwrap();
        assert!(!perturbed.is_antipodal(tol));
    }

    #[test]
    fn from_angles_wraps_and_sorts() {
        let d = DirectionSet::from_angles([-PI / 2.0, 5.0 * PI, 0.1]).unwrap();
        let a = d.angles();
        assert!((a[0] - 0.1).abs() < 1e-15);
        assert!((a[1] - PI).abs() < 1e-12);
        assert!((a[2] - 1.5 * PI).abs() < 1e-15);
        assert!(DirectionSet::<f64>::from_angles(Vec::new()).is_err());
        assert!(DirectionSet::from_angles([f64::NAN]).is_err());
    }
}
