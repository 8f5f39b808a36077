//! Text and image serialization of maps and measurement sets.
//!
//! Numbers are written in shortest round-trip exponent form, so every
//! writer is deterministic and a measurement CSV reads back bit-exactly.

use std::io::{BufRead, Write};

use num_complex::Complex;
use serde::Serialize;

use crate::directions::DirectionSet;
use crate::error::{Error, Result};
use crate::forward::{FrequencySet, MeasurementSet, NoiseRecord};
use crate::imaging::ImageMap;
use crate::scalar::Real;

fn io_err(e: std::io::Error) -> Error {
    Error::Validation(format!("i/o failure: {e}"))
}

fn num<T: Real>(v: T) -> String {
    let v = v.to_f64_lossy();
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:e}")
    }
}

/// Writes a map as `#`-prefixed metadata lines, an `x,y,value` column line
/// and one row per cell in row-major order. Masked cells carry `nan`.
pub fn write_map_csv<T: Real, W: Write>(map: &ImageMap<T>, mut out: W) -> Result<()> {
    let g = &map.grid;
    let meta = serde_json::to_string(&map.meta).map_err(|e| Error::Validation(e.to_string()))?;
    let mut s = String::with_capacity(g.len() * 48 + 512);
    s.push_str("# thinscope image map\n");
    s.push_str(&format!("# nx={}\n# ny={}\n", g.nx, g.ny));
    s.push_str(&format!("# x_range={},{}\n", num(g.x_range.0), num(g.x_range.1)));
    s.push_str(&format!("# y_range={},{}\n", num(g.y_range.0), num(g.y_range.1)));
    s.push_str(&format!("# disk_center={},{}\n", num(g.disk_center.x), num(g.disk_center.y)));
    s.push_str(&format!("# disk_radius={}\n", num(g.disk_radius)));
    s.push_str(&format!("# meta={meta}\n"));
    s.push_str("x,y,value\n");
    for (idx, (&v, &m)) in map.values.iter().zip(&map.mask).enumerate() {
        let p = g.point_at(idx);
        let v = if m { num(v) } else { "nan".to_string() };
        s.push_str(&format!("{},{},{}\n", num(p.x), num(p.y), v));
    }
    out.write_all(s.as_bytes()).map_err(io_err)
}

/// Linear gray-level mapping used by [`write_map_pgm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrayScaling {
    /// Value sent to level 0.
    pub min: f64,
    /// Value sent to level 255.
    pub max: f64,
    /// Level written for masked cells.
    pub masked_level: u8,
}

impl GrayScaling {
    pub fn level(&self, v: f64) -> u8 {
        let span = self.max - self.min;
        if !(span > 0.0) || !v.is_finite() {
            return 0;
        }
        (((v - self.min) / span).clamp(0.0, 1.0) * 255.0).round() as u8
    }
}

/// Writes a binary 8-bit graymap (`P5`), top row first (largest y), with
/// the unmasked minimum at 0 and maximum at 255. Returns the mapping used.
pub fn write_map_pgm<T: Real, W: Write>(map: &ImageMap<T>, mut out: W) -> Result<GrayScaling> {
    let (lo, hi) = map.range().map(|(a, b)| (a.to_f64_lossy(), b.to_f64_lossy())).unwrap_or((0.0, 0.0));
    let scaling = GrayScaling { min: lo, max: hi, masked_level: 0 };
    let (nx, ny) = (map.grid.nx, map.grid.ny);
    let mut bytes = format!("P5\n{nx} {ny}\n255\n").into_bytes();
    bytes.reserve(nx * ny);
    for j in (0..ny).rev() {
        for i in 0..nx {
            let idx = j * nx + i;
            bytes.push(if map.mask[idx] { scaling.level(map.values[idx].to_f64_lossy()) } else { scaling.masked_level });
        }
    }
    out.write_all(&bytes).map_err(io_err)?;
    Ok(scaling)
}

const MEASUREMENT_COLUMNS: &str = "n,k,omega,theta,re_a,im_a,re_b,im_b";

/// Writes coefficients as one row per `(n, k)` with 1-based indices.
/// Noise provenance, when present, goes into `#` lines.
pub fn write_measurements_csv<T: Real, W: Write>(meas: &MeasurementSet<T>, mut out: W) -> Result<()> {
    let mut s = String::from("# thinscope measurement set\n");
    s.push_str(&format!("# n_directions={}\n# n_frequencies={}\n", meas.n_dirs(), meas.n_freqs()));
    if let Some(nr) = meas.noise() {
        s.push_str(&format!("# snr_db={}\n# seed={}\n", num(nr.snr_db), nr.seed));
        s.push_str(&format!("# signal_power_a={}\n# signal_power_b={}\n", num(nr.signal_power_a), num(nr.signal_power_b)));
        s.push_str(&format!(
            "# noise_variance_a={}\n# noise_variance_b={}\n",
            num(nr.noise_variance_a),
            num(nr.noise_variance_b)
        ));
    }
    s.push_str(MEASUREMENT_COLUMNS);
    s.push('\n');
    let angles = meas.dirs().angles();
    let omegas = meas.freqs().omegas();
    for (n, &theta) in angles.iter().enumerate() {
        for (k, &omega) in omegas.iter().enumerate() {
            let (a, b) = (meas.a(n, k), meas.b(n, k));
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                n + 1,
                k + 1,
                num(omega),
                num(theta),
                num(a.re),
                num(a.im),
                num(b.re),
                num(b.im)
            ));
        }
    }
    out.write_all(s.as_bytes()).map_err(io_err)
}

fn parse_real<T: Real>(field: &str, line_no: usize) -> Result<T> {
    field
        .trim()
        .parse::<f64>()
        .map(T::lit)
        .map_err(|_| Error::Validation(format!("line {line_no}: not a number: {field:?}")))
}

/// `(n, k, omega, theta, a, b)` as read from one row.
type Row<T> = (usize, usize, T, T, Complex<T>, Complex<T>);

/// Reads the format produced by [`write_measurements_csv`].
pub fn read_measurements_csv<T: Real, R: BufRead>(input: R) -> Result<MeasurementSet<T>> {
    let mut header = std::collections::BTreeMap::new();
    let mut rows: Vec<Row<T>> = Vec::new();
    let mut seen_columns = false;
    for (line_no, line) in input.lines().enumerate() {
        let line_no = line_no + 1;
        let line = line.map_err(io_err)?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.trim().split_once('=') {
                header.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        if !seen_columns {
            if line != MEASUREMENT_COLUMNS {
                return Err(Error::Validation(format!("line {line_no}: expected column line {MEASUREMENT_COLUMNS:?}")));
            }
            seen_columns = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(Error::Validation(format!("line {line_no}: expected 8 fields, got {}", f.len())));
        }
        let idx = |s: &str| -> Result<usize> {
            match s.trim().parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(Error::Validation(format!("line {line_no}: bad 1-based index {s:?}"))),
            }
        };
        rows.push((
            idx(f[0])?,
            idx(f[1])?,
            parse_real(f[2], line_no)?,
            parse_real(f[3], line_no)?,
            Complex::new(parse_real(f[4], line_no)?, parse_real(f[5], line_no)?),
            Complex::new(parse_real(f[6], line_no)?, parse_real(f[7], line_no)?),
        ));
    }
    let n_dirs = rows.iter().map(|r| r.0 + 1).max().unwrap_or(0);
    let n_freqs = rows.iter().map(|r| r.1 + 1).max().unwrap_or(0);
    if n_dirs == 0 || rows.len() != n_dirs * n_freqs {
        return Err(Error::Validation(format!(
            "measurement table must be a full N×K grid (got {} rows for {n_dirs}×{n_freqs})",
            rows.len()
        )));
    }
    let mut angles = vec![None; n_dirs];
    let mut omegas = vec![None; n_freqs];
    let mut a = vec![None; n_dirs * n_freqs];
    let mut b = vec![None; n_dirs * n_freqs];
    for &(n, k, omega, theta, ca, cb) in &rows {
        for (slot, v, what) in [(&mut angles[n], theta, "theta"), (&mut omegas[k], omega, "omega")] {
            match slot {
                Some(prev) if *prev != v => {
                    return Err(Error::Validation(format!("inconsistent {what} for n={}, k={}", n + 1, k + 1)))
                }
                _ => *slot = Some(v),
            }
        }
        let cell = n * n_freqs + k;
        if a[cell].is_some() {
            return Err(Error::Validation(format!("duplicate row n={}, k={}", n + 1, k + 1)));
        }
        a[cell] = Some(ca);
        b[cell] = Some(cb);
    }
    let angles: Vec<T> = angles.into_iter().map(Option::unwrap).collect();
    let dirs = DirectionSet::from_angles(angles.iter().copied())?;
    if dirs.angles() != angles.as_slice() {
        return Err(Error::Validation("direction angles must be listed in increasing order within [0, 2π)".into()));
    }
    let freqs = FrequencySet::new(omegas.into_iter().map(Option::unwrap).collect())?;
    let a = a.into_iter().map(Option::unwrap).collect();
    let b = b.into_iter().map(Option::unwrap).collect();
    let meas = MeasurementSet::from_parts(a, b, dirs, freqs)?;

    let get = |key: &str| -> Result<Option<T>> {
        header.get(key).map(|v| parse_real(v, 0)).transpose()
    };
    let noise = match (get("snr_db")?, header.get("seed")) {
        (Some(snr_db), Some(seed)) => Some(NoiseRecord {
            snr_db,
            seed: seed.parse().map_err(|_| Error::Validation(format!("bad seed {seed:?}")))?,
            signal_power_a: get("signal_power_a")?.unwrap_or_else(T::zero),
            signal_power_b: get("signal_power_b")?.unwrap_or_else(T::zero),
            noise_variance_a: get("noise_variance_a")?.unwrap_or_else(T::zero),
            noise_variance_b: get("noise_variance_b")?.unwrap_or_else(T::zero),
        }),
        _ => None,
    };
    Ok(meas.with_noise_record(noise))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{add_noise, synthesize, Inclusion, ThinInclusionScene};
    use crate::geometry::{builtin_sigma, discretize};
    use crate::imaging::{e_sf, ImagingGrid};

    fn meas() -> MeasurementSet<f64> {
        let quad = discretize(&builtin_sigma(1).unwrap(), 32).unwrap();
        let scene = ThinInclusionScene::new(vec![Inclusion::new(quad, 0.02, 5.0, 5.0).unwrap()], 1.0, 1.0).unwrap();
        let freqs = FrequencySet::new(vec![10.0, 12.5]).unwrap();
        synthesize(&scene, &DirectionSet::uniform(3).unwrap(), &freqs).unwrap()
    }

    #[test]
    fn measurement_roundtrip_is_exact() {
        let m = add_noise(&meas(), 20.0, 7).unwrap();
        let mut buf = Vec::new();
        write_measurements_csv(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().any(|l| l == MEASUREMENT_COLUMNS));
        assert!(text.lines().any(|l| l.starts_with("1,2,")));
        let back: MeasurementSet<f64> = read_measurements_csv(&buf[..]).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn measurement_reader_rejects_gaps() {
        let mut buf = Vec::new();
        write_measurements_csv(&meas(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let truncated: String = text.lines().take(text.lines().count() - 1).map(|l| format!("{l}\n")).collect();
        assert!(read_measurements_csv::<f64, _>(truncated.as_bytes()).is_err());
        assert!(read_measurements_csv::<f64, _>("n,k\n1,1\n".as_bytes()).is_err());
    }

    #[test]
    fn map_csv_layout() {
        let grid = ImagingGrid::unit_disk(5).unwrap();
        let map = e_sf(&meas(), 0, &grid).unwrap();
        let mut buf = Vec::new();
        write_map_csv(&map, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(!text.contains('\r'));
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data[0], "x,y,value");
        assert_eq!(data.len(), 26);
        // corner cell (−1, −1) lies outside the disk
        assert_eq!(data[1], "-1e0,-1e0,nan");
        assert!(text.lines().any(|l| l.starts_with("# meta={")));
    }

    #[test]
    fn pgm_layout_and_scaling() {
        let grid = ImagingGrid::unit_disk(7).unwrap();
        let map = e_sf(&meas(), 0, &grid).unwrap();
        let mut buf = Vec::new();
        let s = write_map_pgm(&map, &mut buf).unwrap();
        let head = b"P5\n7 7\n255\n";
        assert_eq!(&buf[..head.len()], head);
        let px = &buf[head.len()..];
        assert_eq!(px.len(), 49);
        assert_eq!(px[0], 0); // masked corner
        assert!(px.contains(&255));
        assert_eq!(s.level(s.min), 0);
        assert_eq!(s.level(s.max), 255);
        // first written row is the top of the grid
        let (i, j) = (3, 6);
        assert_eq!(px[i], s.level(map.values[j * 7 + i]));
    }

    #[test]
    fn constant_map_maps_to_zero() {
        let s = GrayScaling { min: 1.0, max: 1.0, masked_level: 0 };
        assert_eq!(s.level(1.0), 0);
    }
}
