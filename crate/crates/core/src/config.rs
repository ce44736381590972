//! Plain-text scenario configuration.
//!
//! ```text
//! # defaults shared by every section
//! resolutions = 32, 64, 128
//!
//! [clifford]
//! check = t11
//! shape = clifford
//!
//! [cosh-graph]
//! check = t13
//! shape = graph
//! warping = cosh
//! perturbation = Y20
//! amplitude = 0.1
//! ```
//!
//! A file without sections describes one scenario named `scenario`.

use std::collections::BTreeMap;

use crate::assembly::MassMode;
use crate::catalog::{Perturbation, ShapeKind, ShapeSpec};
use crate::error::{Error, Result};
use crate::harness::{CheckOptions, Scenario, TheoremId, DEFAULT_RESOLUTIONS};
use crate::warping::{Profile, WarpingFunction};

pub type Settings = BTreeMap<String, String>;

pub const KEYS: [&str; 17] = [
    "check",
    "shape",
    "r",
    "amplitude",
    "mode",
    "rho",
    "t0",
    "perturbation",
    "warping",
    "interval",
    "dim",
    "resolutions",
    "tol",
    "solver_tol",
    "seed",
    "mass",
    "eigen_count",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub defaults: Settings,
    pub sections: Vec<(String, Settings)>,
}

fn insert(map: &mut Settings, key: &str, value: &str, line: usize) -> Result<()> {
    if !KEYS.contains(&key) {
        return Err(Error::Parse(format!("line {line}: unknown key '{key}'")));
    }
    map.insert(key.to_string(), value.to_string());
    Ok(())
}

pub fn parse_config(text: &str) -> Result<ConfigFile> {
    let mut cfg = ConfigFile::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::Parse(format!("line {}: unterminated section header", i + 1)))?
                .trim();
            if name.is_empty() || cfg.sections.iter().any(|(n, _)| n == name) {
                return Err(Error::Parse(format!("line {}: empty or repeated section '{name}'", i + 1)));
            }
            cfg.sections.push((name.to_string(), Settings::new()));
            continue;
        }
        let (k, v) =
            line.split_once('=').ok_or_else(|| Error::Parse(format!("line {}: expected key = value", i + 1)))?;
        let target = match cfg.sections.last_mut() {
            Some((_, m)) => m,
            None => &mut cfg.defaults,
        };
        insert(target, k.trim(), v.trim(), i + 1)?;
    }
    Ok(cfg)
}

/// Parse `key=value` overrides such as those given on the command line.
pub fn parse_overrides(items: &[String]) -> Result<Settings> {
    let mut out = Settings::new();
    for item in items {
        let (k, v) = item.split_once('=').ok_or_else(|| Error::Parse(format!("override '{item}' is not key=value")))?;
        insert(&mut out, k.trim(), v.trim(), 0)?;
    }
    Ok(out)
}

fn number(map: &Settings, key: &str) -> Result<Option<f64>> {
    map.get(key)
        .map(|v| v.parse::<f64>().map_err(|_| Error::Parse(format!("{key} = '{v}' is not a number"))))
        .transpose()
}

fn required(map: &Settings, key: &str, shape: &str) -> Result<f64> {
    number(map, key)?.ok_or_else(|| Error::Parse(format!("shape '{shape}' needs '{key}'")))
}

fn list<T: std::str::FromStr>(value: &str, key: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|s| s.trim().parse::<T>().map_err(|_| Error::Parse(format!("{key}: bad entry '{s}'"))))
        .collect()
}

/// `Y20`, `Y2-1`, or `harmonic:l,m`.
pub fn parse_perturbation(s: &str) -> Result<Perturbation> {
    let bad = || Error::Parse(format!("perturbation '{s}' (expected Y<l><m> or harmonic:l,m)"));
    if let Some(rest) = s.strip_prefix("harmonic:") {
        let v: Vec<i64> = list(rest, "perturbation")?;
        if v.len() != 2 || v[0] < 0 {
            return Err(bad());
        }
        return Ok(Perturbation::Harmonic { l: v[0] as usize, m: v[1] as i32 });
    }
    let rest = s.strip_prefix('Y').or_else(|| s.strip_prefix('y')).ok_or_else(bad)?;
    let mut chars = rest.chars();
    let l = chars.next().and_then(|c| c.to_digit(10)).ok_or_else(bad)? as usize;
    let m: i32 = chars.as_str().parse().map_err(|_| bad())?;
    Ok(Perturbation::Harmonic { l, m })
}

pub fn warping_from(map: &Settings) -> Result<WarpingFunction> {
    let spec = map.get("warping").ok_or_else(|| Error::Parse("warped shapes need 'warping'".into()))?;
    let profile = Profile::from_spec(spec)?;
    let dim = match map.get("dim") {
        Some(d) => d.parse::<usize>().map_err(|_| Error::Parse(format!("dim = '{d}'")))?,
        None => 2,
    };
    if dim < 2 {
        return Err(Error::Hypothesis(format!(
            "sphere factor of dimension {dim}: the one-dimensional case is not supported"
        )));
    }
    let interval = match map.get("interval") {
        Some(v) => {
            let ab: Vec<f64> = list(v, "interval")?;
            if ab.len() != 2 {
                return Err(Error::Parse(format!("interval = '{v}' needs two entries")));
            }
            (ab[0], ab[1])
        }
        None => profile.default_interval(),
    };
    WarpingFunction::new(profile, interval, dim)
}

pub fn shape_from(map: &Settings) -> Result<ShapeSpec> {
    let name = map.get("shape").ok_or_else(|| Error::Parse("missing 'shape'".into()))?.as_str();
    let kind = match name {
        "clifford" => ShapeKind::CliffordTorus,
        "flat-torus" => ShapeKind::FlatTorus { r: required(map, "r", name)? },
        "rotational-torus" => ShapeKind::RotationalTorus {
            r: required(map, "r", name)?,
            amplitude: required(map, "amplitude", name)?,
            mode: required(map, "mode", name)? as u32,
        },
        "geodesic-sphere" => ShapeKind::GeodesicSphere { rho: required(map, "rho", name)? },
        "slice" => ShapeKind::Slice { t0: number(map, "t0")?.unwrap_or(0.0) },
        "graph" => ShapeKind::GraphOverSlice {
            t0: number(map, "t0")?.unwrap_or(0.0),
            perturbation: parse_perturbation(map.get("perturbation").map_or("Y20", |s| s.as_str()))?,
            amplitude: required(map, "amplitude", name)?,
        },
        other => return Err(Error::Parse(format!("unknown shape '{other}'"))),
    };
    let resolution = resolutions_from(map)?[0];
    if kind.in_sphere3() {
        Ok(ShapeSpec::sphere3(kind, resolution))
    } else {
        Ok(ShapeSpec::warped(kind, resolution, warping_from(map)?))
    }
}

pub fn resolutions_from(map: &Settings) -> Result<Vec<usize>> {
    match map.get("resolutions") {
        Some(v) => {
            let r: Vec<usize> = list(v, "resolutions")?;
            if r.is_empty() {
                return Err(Error::Parse("empty resolution list".into()));
            }
            Ok(r)
        }
        None => Ok(DEFAULT_RESOLUTIONS.to_vec()),
    }
}

pub fn options_from(map: &Settings) -> Result<CheckOptions> {
    let mut o = CheckOptions::default();
    if let Some(t) = number(map, "tol")? {
        o.tol_floor = t;
    }
    if let Some(t) = number(map, "solver_tol")? {
        o.solver_tol = t;
    }
    if let Some(s) = map.get("seed") {
        o.seed = s.parse().map_err(|_| Error::Parse(format!("seed = '{s}'")))?;
    }
    if let Some(k) = map.get("eigen_count") {
        o.eigen_count = k.parse().map_err(|_| Error::Parse(format!("eigen_count = '{k}'")))?;
    }
    if let Some(m) = map.get("mass") {
        o.mass = match m.as_str() {
            "lumped" => MassMode::Lumped,
            "consistent" => MassMode::Consistent,
            _ => return Err(Error::Parse(format!("mass = '{m}' (expected lumped or consistent)"))),
        };
    }
    Ok(o)
}

pub fn scenario_from(name: &str, map: &Settings, default_check: Option<TheoremId>) -> Result<Scenario> {
    let theorem = match (map.get("check"), default_check) {
        (Some(c), _) => TheoremId::parse(c)?,
        (None, Some(t)) => t,
        (None, None) => return Err(Error::Parse(format!("scenario '{name}' has no 'check'"))),
    };
    Ok(Scenario {
        name: name.to_string(),
        theorem,
        shape: shape_from(map)?,
        resolutions: resolutions_from(map)?,
        options: options_from(map)?,
    })
}

/// Merge `defaults`, each section and `overrides` (later wins).
pub fn scenarios(cfg: &ConfigFile, overrides: &Settings, default_check: Option<TheoremId>) -> Result<Vec<Scenario>> {
    let merged = |section: &Settings| {
        let mut m = cfg.defaults.clone();
        m.extend(section.clone());
        m.extend(overrides.clone());
        m
    };
    if cfg.sections.is_empty() {
        return Ok(vec![scenario_from("scenario", &merged(&Settings::new()), default_check)?]);
    }
    cfg.sections.iter().map(|(name, s)| scenario_from(name, &merged(s), default_check)).collect()
}
