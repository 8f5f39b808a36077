//! Flat `key = value` experiment configuration.
//!
//! Lines are `key = value`; `#` starts a comment; blank lines are ignored.
//! Lists are comma-separated, and direction counts also accept ranges
//! (`n_directions = 1..6`). Inclusions use indexed keys:
//!
//! ```text
//! inclusion1.curve = sigma1          # sigma1 | sigma2 | poly
//! inclusion1.eps = 5
//! inclusion1.mu = 5
//! inclusion2.curve = poly
//! inclusion2.x = 0.1, 1              # ascending coefficients in s
//! inclusion2.y = -0.3, 0, 0.5
//! inclusion2.s_range = -0.4, 0.4
//! ```

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::PathBuf;

use thinscope::geometry::DEFAULT_NODE_COUNT;
use thinscope::{
    builtin_sigma, discretize, CurveQuadrature, DirectionSet, FrequencySet, ImagingGrid, Inclusion, ParametricCurve,
    Spacing, ThinInclusionScene,
};

use crate::CliError;

/// Shipped scenario presets, `(name, config text)`.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig-gamma1-single", include_str!("../presets/fig-gamma1-single.cfg")),
    ("fig-gamma1-multi", include_str!("../presets/fig-gamma1-multi.cfg")),
    ("fig-gamma2-single", include_str!("../presets/fig-gamma2-single.cfg")),
    ("fig-gamma2-multi", include_str!("../presets/fig-gamma2-multi.cfg")),
    ("fig-gammaM1-single", include_str!("../presets/fig-gammaM1-single.cfg")),
    ("fig-gammaM1-multi", include_str!("../presets/fig-gammaM1-multi.cfg")),
    ("fig-gammaM2-single", include_str!("../presets/fig-gammaM2-single.cfg")),
    ("fig-gammaM2-multi", include_str!("../presets/fig-gammaM2-multi.cfg")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

#[derive(Debug, Clone, PartialEq)]
pub enum CurveSpec {
    Builtin(u32),
    Polynomial { x: Vec<f64>, y: Vec<f64>, s_range: (f64, f64) },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InclusionSpec {
    pub curve: CurveSpec,
    pub eps: f64,
    pub mu: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DirectionSpec {
    /// One run per listed count of uniformly spaced directions.
    Uniform(Vec<usize>),
    /// A single run with explicit angles in radians.
    Angles(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MapSelection {
    /// Normalized single-frequency map at `2π/lambda_sf`.
    Sf,
    /// Normalized multi-frequency map over the band.
    Mf,
    /// Unnormalized permittivity channel at `2π/lambda_sf`.
    Eps,
    /// Unnormalized permeability channel at `2π/lambda_sf`.
    Mu,
}

impl MapSelection {
    pub fn key(self) -> &'static str {
        match self {
            MapSelection::Sf => "sf",
            MapSelection::Mf => "mf",
            MapSelection::Eps => "eps",
            MapSelection::Mu => "mu",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "sf" => Some(Self::Sf),
            "mf" => Some(Self::Mf),
            "eps" => Some(Self::Eps),
            "mu" => Some(Self::Mu),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub inclusions: Vec<InclusionSpec>,
    pub eps0: f64,
    pub mu0: f64,
    pub directions: DirectionSpec,
    pub maps: Vec<MapSelection>,
    pub lambda_sf: f64,
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub k: usize,
    pub spacing: Spacing,
    pub grid: usize,
    pub disk_radius: f64,
    pub snr_db: Option<f64>,
    pub seed: u64,
    pub node_count: usize,
    pub top_fraction: f64,
    pub dist_threshold: f64,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: "custom".into(),
            inclusions: Vec::new(),
            eps0: 1.0,
            mu0: 1.0,
            directions: DirectionSpec::Uniform(vec![4]),
            maps: vec![MapSelection::Sf],
            lambda_sf: 0.5,
            lambda_max: 0.7,
            lambda_min: 0.3,
            k: 10,
            spacing: Spacing::Omega,
            grid: 201,
            disk_radius: 0.95,
            snr_db: None,
            seed: 0,
            node_count: DEFAULT_NODE_COUNT,
            top_fraction: 0.01,
            dist_threshold: 0.1,
            out_dir: PathBuf::from("thinscope-out"),
        }
    }
}

/// Partially specified inclusion while keys are being read.
#[derive(Debug, Clone, Default)]
struct InclusionDraft {
    curve: Option<String>,
    x: Option<Vec<f64>>,
    y: Option<Vec<f64>>,
    s_range: Option<(f64, f64)>,
    eps: Option<f64>,
    mu: Option<f64>,
    h: Option<f64>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    let x: f64 = v.trim().parse().map_err(|_| config_err(format!("{key}: not a number: {v:?}")))?;
    if !x.is_finite() {
        return Err(config_err(format!("{key}: must be finite")));
    }
    Ok(x)
}

fn parse_usize(key: &str, v: &str) -> Result<usize, CliError> {
    v.trim().parse().map_err(|_| config_err(format!("{key}: not a non-negative integer: {v:?}")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, CliError> {
    v.split(',').map(|s| parse_f64(key, s)).collect()
}

fn parse_pair(key: &str, v: &str) -> Result<(f64, f64), CliError> {
    match parse_list(key, v)?.as_slice() {
        &[a, b] => Ok((a, b)),
        _ => Err(config_err(format!("{key}: expected two numbers"))),
    }
}

/// `4`, `4, 5` or `1..6` (inclusive).
pub fn parse_counts(key: &str, v: &str) -> Result<Vec<usize>, CliError> {
    let mut out = Vec::new();
    for part in v.split(',') {
        let part = part.trim();
        if let Some((a, b)) = part.split_once("..") {
            let (a, b) = (parse_usize(key, a)?, parse_usize(key, b.trim_start_matches('='))?);
            if a > b {
                return Err(config_err(format!("{key}: empty range {part}")));
            }
            out.extend(a..=b);
        } else {
            out.push(parse_usize(key, part)?);
        }
    }
    if out.contains(&0) {
        return Err(config_err(format!("{key}: direction counts must be at least 1")));
    }
    Ok(out)
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// Key-value reader that keeps inclusion keys until the end.
#[derive(Debug, Default)]
struct Reader {
    inclusions: BTreeMap<usize, InclusionDraft>,
    /// Set once any `inclusionN.*` key is seen, replacing inherited inclusions.
    touched_inclusions: bool,
}

impl ExperimentConfig {
    /// Parses a configuration text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        cfg.merge_text(text)?;
        Ok(cfg)
    }

    /// Applies the keys of `text` on top of `self`.
    pub fn merge_text(&mut self, text: &str) -> Result<(), CliError> {
        let mut reader = Reader::default();
        self.seed_reader(&mut reader);
        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected `key = value`", line_no + 1)))?;
            self.apply_with(&mut reader, key.trim(), value.trim())
                .map_err(|e| config_err(format!("line {}: {}", line_no + 1, e.message())))?;
        }
        self.finish_reader(reader)
    }

    /// Applies one `key = value` pair; an inclusion key edits that field
    /// only.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let mut reader = Reader::default();
        self.seed_reader(&mut reader);
        reader.touched_inclusions = true;
        self.apply_with(&mut reader, key, value)?;
        self.finish_reader(reader)
    }

    fn seed_reader(&self, reader: &mut Reader) {
        for (i, inc) in self.inclusions.iter().enumerate() {
            let mut d = InclusionDraft { eps: Some(inc.eps), mu: Some(inc.mu), h: Some(inc.h), ..Default::default() };
            match &inc.curve {
                CurveSpec::Builtin(id) => d.curve = Some(format!("sigma{id}")),
                CurveSpec::Polynomial { x, y, s_range } => {
                    d.curve = Some("poly".into());
                    d.x = Some(x.clone());
                    d.y = Some(y.clone());
                    d.s_range = Some(*s_range);
                }
            }
            reader.inclusions.insert(i + 1, d);
        }
    }

    fn apply_with(&mut self, reader: &mut Reader, key: &str, value: &str) -> Result<(), CliError> {
        if let Some(rest) = key.strip_prefix("inclusion") {
            let (idx, field) = rest
                .split_once('.')
                .ok_or_else(|| config_err(format!("{key}: expected inclusion<N>.<field>")))?;
            let idx: usize = idx.parse().ok().filter(|&i| i >= 1).ok_or_else(|| config_err(format!("{key}: bad inclusion index")))?;
            if !reader.touched_inclusions {
                // a config that names inclusions replaces the inherited ones
                reader.inclusions.clear();
                reader.touched_inclusions = true;
            }
            let d = reader.inclusions.entry(idx).or_default();
            match field {
                "curve" => d.curve = Some(value.to_string()),
                "x" => d.x = Some(parse_list(key, value)?),
                "y" => d.y = Some(parse_list(key, value)?),
                "s_range" => d.s_range = Some(parse_pair(key, value)?),
                "eps" => d.eps = Some(parse_f64(key, value)?),
                "mu" => d.mu = Some(parse_f64(key, value)?),
                "h" => d.h = Some(parse_f64(key, value)?),
                _ => return Err(config_err(format!("unknown inclusion field {field:?}"))),
            }
            return Ok(());
        }
        match key {
            "scenario" => self.scenario = value.to_string(),
            "eps0" => self.eps0 = parse_f64(key, value)?,
            "mu0" => self.mu0 = parse_f64(key, value)?,
            "n_directions" => self.directions = DirectionSpec::Uniform(parse_counts(key, value)?),
            "angles" => self.directions = DirectionSpec::Angles(parse_list(key, value)?),
            "maps" => {
                let mut maps = value
                    .split(',')
                    .map(|s| MapSelection::parse(s.trim()).ok_or_else(|| config_err(format!("maps: unknown map {:?} (sf, mf, eps, mu)", s.trim()))))
                    .collect::<Result<Vec<_>, _>>()?;
                maps.sort();
                maps.dedup();
                self.maps = maps;
            }
            "lambda_sf" => self.lambda_sf = parse_f64(key, value)?,
            "lambda_max" => self.lambda_max = parse_f64(key, value)?,
            "lambda_min" => self.lambda_min = parse_f64(key, value)?,
            "k" | "K" => self.k = parse_usize(key, value)?,
            "spacing" => {
                self.spacing = match value {
                    "omega" => Spacing::Omega,
                    "lambda" => Spacing::Lambda,
                    _ => return Err(config_err(format!("spacing: expected omega or lambda, got {value:?}"))),
                }
            }
            "grid" => self.grid = parse_usize(key, value)?,
            "disk_radius" => self.disk_radius = parse_f64(key, value)?,
            "snr_db" => self.snr_db = if value == "none" { None } else { Some(parse_f64(key, value)?) },
            "seed" => self.seed = value.parse().map_err(|_| config_err(format!("seed: not an unsigned integer: {value:?}")))?,
            "node_count" => self.node_count = parse_usize(key, value)?,
            "top_fraction" => self.top_fraction = parse_f64(key, value)?,
            "dist_threshold" => self.dist_threshold = parse_f64(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            _ => return Err(config_err(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    fn finish_reader(&mut self, reader: Reader) -> Result<(), CliError> {
        if !reader.touched_inclusions {
            return Ok(());
        }
        let mut out = Vec::new();
        for (expected, (idx, d)) in (1..).zip(reader.inclusions) {
            if idx != expected {
                return Err(config_err(format!("inclusion indices must be 1, 2, …; inclusion{expected} is missing")));
            }
            let curve_name = d.curve.ok_or_else(|| config_err(format!("inclusion{idx}.curve is required")))?;
            let curve = match curve_name.as_str() {
                "sigma1" => CurveSpec::Builtin(1),
                "sigma2" => CurveSpec::Builtin(2),
                "poly" => CurveSpec::Polynomial {
                    x: d.x.ok_or_else(|| config_err(format!("inclusion{idx}.x is required for poly curves")))?,
                    y: d.y.ok_or_else(|| config_err(format!("inclusion{idx}.y is required for poly curves")))?,
                    s_range: d.s_range.unwrap_or((-0.5, 0.5)),
                },
                other => return Err(config_err(format!("inclusion{idx}.curve: expected sigma1, sigma2 or poly, got {other:?}"))),
            };
            out.push(InclusionSpec {
                curve,
                eps: d.eps.ok_or_else(|| config_err(format!("inclusion{idx}.eps is required")))?,
                mu: d.mu.ok_or_else(|| config_err(format!("inclusion{idx}.mu is required")))?,
                h: d.h.unwrap_or(0.02),
            });
        }
        self.inclusions = out;
        Ok(())
    }

    /// Canonical key-value form; parsing [`Self::render`] reproduces `self`.
    pub fn to_key_values(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("scenario", self.scenario.clone());
        put("eps0", self.eps0.to_string());
        put("mu0", self.mu0.to_string());
        match &self.directions {
            DirectionSpec::Uniform(ns) => put("n_directions", ns.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(", ")),
            DirectionSpec::Angles(a) => put("angles", fmt_list(a)),
        }
        put("maps", self.maps.iter().map(|m| m.key()).collect::<Vec<_>>().join(", "));
        put("lambda_sf", self.lambda_sf.to_string());
        put("lambda_max", self.lambda_max.to_string());
        put("lambda_min", self.lambda_min.to_string());
        put("k", self.k.to_string());
        put("spacing", match self.spacing {
            Spacing::Omega => "omega".into(),
            Spacing::Lambda => "lambda".into(),
        });
        put("grid", self.grid.to_string());
        put("disk_radius", self.disk_radius.to_string());
        put("snr_db", self.snr_db.map_or("none".into(), |s| s.to_string()));
        put("seed", self.seed.to_string());
        put("node_count", self.node_count.to_string());
        put("top_fraction", self.top_fraction.to_string());
        put("dist_threshold", self.dist_threshold.to_string());
        put("out_dir", self.out_dir.display().to_string());
        for (i, inc) in self.inclusions.iter().enumerate() {
            let p = format!("inclusion{}", i + 1);
            match &inc.curve {
                CurveSpec::Builtin(id) => put(&format!("{p}.curve"), format!("sigma{id}")),
                CurveSpec::Polynomial { x, y, s_range } => {
                    put(&format!("{p}.curve"), "poly".into());
                    put(&format!("{p}.x"), fmt_list(x));
                    put(&format!("{p}.y"), fmt_list(y));
                    put(&format!("{p}.s_range"), fmt_list(&[s_range.0, s_range.1]));
                }
            }
            put(&format!("{p}.eps"), inc.eps.to_string());
            put(&format!("{p}.mu"), inc.mu.to_string());
            put(&format!("{p}.h"), inc.h.to_string());
        }
        m
    }

    pub fn render(&self) -> String {
        self.to_key_values().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// Checks every value against the library's own validation and builds
    /// the objects a run needs.
    pub fn build(&self) -> Result<Plan, CliError> {
        let lib = |e: thinscope::Error| config_err(e.to_string());
        if self.inclusions.is_empty() {
            return Err(config_err("no inclusions configured (inclusion1.curve, …)"));
        }
        if self.maps.is_empty() {
            return Err(config_err("maps: at least one map kind is required"));
        }
        if !(self.top_fraction > 0.0 && self.top_fraction <= 1.0) {
            return Err(config_err("top_fraction must lie in (0, 1]"));
        }
        if !(self.dist_threshold > 0.0) {
            return Err(config_err("dist_threshold must be positive"));
        }
        if let Some(snr) = self.snr_db {
            if snr.is_nan() {
                return Err(config_err("snr_db must be a number"));
            }
        }
        let mut inclusions = Vec::new();
        let mut quads = Vec::new();
        for (i, spec) in self.inclusions.iter().enumerate() {
            let curve: ParametricCurve<f64> = match &spec.curve {
                CurveSpec::Builtin(id) => builtin_sigma(*id).map_err(lib)?,
                CurveSpec::Polynomial { x, y, s_range } => {
                    ParametricCurve::polynomial(x.clone(), y.clone(), *s_range).map_err(lib)?
                }
            };
            let quad = discretize(&curve, self.node_count).map_err(lib)?;
            quads.push(quad.clone());
            inclusions.push(
                Inclusion::new(quad, spec.h, spec.eps, spec.mu).map_err(|e| config_err(format!("inclusion{}: {e}", i + 1)))?,
            );
        }
        let scene = ThinInclusionScene::new(inclusions, self.eps0, self.mu0).map_err(lib)?;
        let needs_sf = self.maps.iter().any(|m| *m != MapSelection::Mf);
        let needs_mf = self.maps.contains(&MapSelection::Mf);
        let sf_freqs = if needs_sf {
            if !(self.lambda_sf > 0.0) {
                return Err(config_err("lambda_sf must be positive"));
            }
            let f = FrequencySet::single(TAU / self.lambda_sf).map_err(lib)?;
            scene.validate_for(&f).map_err(lib)?;
            Some(f)
        } else {
            None
        };
        let band = if needs_mf {
            let f = FrequencySet::band(self.lambda_max, self.lambda_min, self.k, self.spacing).map_err(lib)?;
            scene.validate_for(&f).map_err(lib)?;
            Some(f)
        } else {
            None
        };
        let grid = ImagingGrid::new((-1.0, 1.0), (-1.0, 1.0), self.grid, self.grid, self.disk_radius).map_err(lib)?;
        let direction_sets = match &self.directions {
            DirectionSpec::Uniform(ns) => {
                if ns.is_empty() {
                    return Err(config_err("n_directions: at least one count is required"));
                }
                ns.iter()
                    .map(|&n| Ok((format!("n{n}"), DirectionSet::uniform(n).map_err(lib)?)))
                    .collect::<Result<Vec<_>, CliError>>()?
            }
            DirectionSpec::Angles(a) => vec![("angles".to_string(), DirectionSet::from_angles(a.iter().copied()).map_err(lib)?)],
        };
        Ok(Plan { scene, target: CurveQuadrature::concat(&quads), sf_freqs, band, grid, direction_sets })
    }
}

/// Validated objects for one run.
#[derive(Debug, Clone)]
pub struct Plan {
    pub scene: ThinInclusionScene<f64>,
    /// All supporting curves together, for the concentration metric.
    pub target: CurveQuadrature<f64>,
    pub sf_freqs: Option<FrequencySet<f64>>,
    pub band: Option<FrequencySet<f64>>,
    pub grid: ImagingGrid<f64>,
    /// `(label, directions)` per run.
    pub direction_sets: Vec<(String, DirectionSet<f64>)>,
}
