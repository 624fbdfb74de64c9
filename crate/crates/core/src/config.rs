//! INI-style experiment configuration.
//!
//! Sections: `[run] [metric] [grid] [data] [signal.a] [signal.b] [F]
//! [F.a<i>.b<j>] [geometry] [phi] [isaacs] [extend] [modulus]`. Unknown keys
//! are rejected so that typos surface as configuration errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;
use nalgebra::DMatrix;
use thiserror::Error;

use crate::doubling::LambdaReading;
use crate::geometry::{MetricField, ScalarField};
use crate::harness::{DataKind, DataSpec, ExperimentConfig, SignalSpec};
use crate::signals::{Modulus, PathSignal};
use crate::solver::{BModel, CModel, FSpec, Grid, IsaacsEntry, IsaacsOptions, SigmaModel, Wave};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(String),
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("[{section}] {field}: {message}")]
    Field {
        section: String,
        field: String,
        message: String,
    },
}

fn field_err(section: &str, field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        section: section.to_string(),
        field: field.to_string(),
        message: message.into(),
    }
}

/// Settings for the doubled-variable checks.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiSettings {
    pub lambda: f64,
    pub gammas: Vec<f64>,
    pub samples: usize,
    pub reading: LambdaReading,
}

/// Settings for the structure-condition check on `F`.
#[derive(Clone, Debug, PartialEq)]
pub struct IsaacsSettings {
    pub options: IsaacsOptions,
    pub samples: usize,
    /// Pair separations are uniform in `[-spread, spread]` per axis.
    pub spread: f64,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    pub phi: PhiSettings,
    pub isaacs: IsaacsSettings,
    /// `[extend] monotone_from`: first level of the monotonicity check.
    pub monotone_from: u32,
    /// `[modulus] max_spread`: allowed relative spread of Lipschitz estimates.
    pub max_spread: f64,
    pub out_dir: Option<PathBuf>,
}

/// Key-value view of one section that tracks which keys were consumed.
struct Section<'a> {
    name: String,
    map: BTreeMap<&'a str, &'a str>,
    used: std::cell::RefCell<Vec<String>>,
}

impl<'a> Section<'a> {
    fn new(ini: &'a Ini, name: &str) -> Self {
        let map = ini
            .section(Some(name))
            .map(|p| p.iter().collect())
            .unwrap_or_default();
        Self {
            name: name.to_string(),
            map,
            used: Default::default(),
        }
    }

    fn raw(&self, key: &str) -> Option<&'a str> {
        self.used.borrow_mut().push(key.to_string());
        self.map.get(key).map(|v| v.trim())
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => T::from_str(v)
                .map(Some)
                .map_err(|e| field_err(&self.name, key, format!("cannot parse '{v}': {e}"))),
        }
    }

    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    fn num(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => parse_number(v)
                .map(Some)
                .ok_or_else(|| field_err(&self.name, key, format!("not a number: '{v}'"))),
        }
    }

    fn num_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.num(key)?.unwrap_or(default))
    }

    fn numbers(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| {
                    parse_number(s)
                        .ok_or_else(|| field_err(&self.name, key, format!("not a number: '{s}'")))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
        }
    }

    fn err(&self, key: &str, message: impl Into<String>) -> ConfigError {
        field_err(&self.name, key, message)
    }

    fn finish(&self) -> Result<(), ConfigError> {
        let used = self.used.borrow();
        for k in self.map.keys() {
            if !used.iter().any(|u| u == k) {
                return Err(self.err(k, "unknown key"));
            }
        }
        Ok(())
    }
}

/// Plain number, `pi`, or a number followed by `pi` (e.g. `2pi`).
fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    let lower = s.to_ascii_lowercase();
    if let Some(head) = lower.strip_suffix("pi") {
        let head = head.trim().trim_end_matches('*');
        let k = if head.is_empty() {
            1.0
        } else {
            head.parse::<f64>().ok()?
        };
        return Some(k * std::f64::consts::PI);
    }
    if lower == "inf" || lower == "infinity" {
        return Some(f64::INFINITY);
    }
    s.parse().ok()
}

fn matrix(sec: &Section, key: &str, n: usize) -> Result<Option<DMatrix<f64>>, ConfigError> {
    match sec.numbers(key)? {
        None => Ok(None),
        Some(v) if v.len() == 1 => Ok(Some(DMatrix::identity(n, n) * v[0])),
        Some(v) if v.len() == n * n => Ok(Some(DMatrix::from_row_slice(n, n, &v))),
        Some(v) => Err(sec.err(
            key,
            format!("expected 1 or {} entries, got {}", n * n, v.len()),
        )),
    }
}

fn wave(sec: &Section, prefix: &str) -> Result<Option<Wave>, ConfigError> {
    let amp = sec.num(&format!("{prefix}_amplitude"))?;
    let freq = sec.num_or(&format!("{prefix}_frequency"), 1.0)?;
    let axis: usize = sec.get(&format!("{prefix}_axis"), 0)?;
    Ok(amp.map(|amplitude| Wave {
        amplitude,
        axis,
        frequency: freq,
    }))
}

fn parse_metric(ini: &Ini) -> Result<MetricField, ConfigError> {
    let sec = Section::new(ini, "metric");
    let family = sec.raw("family").unwrap_or("identity").to_ascii_lowercase();
    let dim: usize = sec.get("dim", 1)?;
    let radius = sec.num("domain_radius")?;
    let phi = |axis_default: usize| -> Result<ScalarField, ConfigError> {
        Ok(ScalarField::sine(
            sec.get("axis", axis_default)?,
            sec.num_or("amplitude", 0.2)?,
            sec.num_or("frequency", 1.0)?,
        ))
    };
    let m = match family.as_str() {
        "identity" => Ok(MetricField::identity(dim)),
        "constant" => {
            let a = matrix(&sec, "matrix", dim)?
                .ok_or_else(|| sec.err("matrix", "required for a constant metric"))?;
            MetricField::constant(a)
        }
        "conformal" => MetricField::conformal(phi(0)?, dim),
        "diagonal" => {
            let amps = sec
                .numbers("amplitudes")?
                .ok_or_else(|| sec.err("amplitudes", "required for a diagonal metric"))?;
            let freqs = sec
                .numbers("frequencies")?
                .unwrap_or_else(|| vec![1.0; amps.len()]);
            if amps.len() != dim || freqs.len() != dim {
                return Err(sec.err(
                    "amplitudes",
                    format!("need {dim} amplitudes and frequencies"),
                ));
            }
            MetricField::diagonal(
                (0..dim)
                    .map(|i| ScalarField::sine(i, amps[i], freqs[i]))
                    .collect(),
            )
        }
        other => return Err(sec.err("family", format!("unknown family '{other}'"))),
    }
    .map_err(|e| sec.err("family", e.to_string()))?;
    let m = match radius {
        Some(r) => MetricField::with_domain_radius(m.family().clone(), dim, r)
            .map_err(|e| sec.err("domain_radius", e.to_string()))?,
        None => m,
    };
    sec.finish()?;
    Ok(m)
}

fn parse_grid(ini: &Ini) -> Result<Grid, ConfigError> {
    let sec = Section::new(ini, "grid");
    let dim: usize = sec.get("dim", 1)?;
    let points: usize = sec.get("points", 200)?;
    let length = sec.num_or("length", 2.0 * std::f64::consts::PI)?;
    sec.finish()?;
    Grid::new(dim, points, length).map_err(|e| field_err("grid", "points", e.to_string()))
}

fn parse_data(
    sec: &Section,
    prefix: &str,
    fallback: Option<&DataSpec>,
) -> Result<DataSpec, ConfigError> {
    let key = |k: &str| format!("{prefix}_{k}");
    let kind = match sec.raw(&key("kind")) {
        None => {
            if let Some(f) = fallback {
                let mut d = f.clone();
                if let Some(o) = sec.num(&key("offset"))? {
                    d.offset = o;
                }
                return Ok(d);
            }
            "sine".to_string()
        }
        Some(k) => k.to_ascii_lowercase(),
    };
    let axis: usize = sec.get(&key("axis"), 0)?;
    let kind = match kind.as_str() {
        "constant" => DataKind::Constant,
        "sine" => DataKind::Sine {
            amplitude: sec.num_or(&key("amplitude"), 0.5)?,
            frequency: sec.num_or(&key("frequency"), 1.0)?,
            axis,
        },
        "negabs" | "neg_abs" => DataKind::NegAbs {
            slope: sec.num_or(&key("slope"), 1.0)?,
            axis,
        },
        other => return Err(sec.err(&key("kind"), format!("unknown data kind '{other}'"))),
    };
    Ok(DataSpec {
        kind,
        offset: sec.num_or(&key("offset"), 0.0)?,
    })
}

fn parse_signal(ini: &Ini, name: &str, base: &Path) -> Result<SignalSpec, ConfigError> {
    let sec = Section::new(ini, name);
    let kind = sec.raw("kind").unwrap_or("zero").to_ascii_lowercase();
    let s = match kind.as_str() {
        "zero" => SignalSpec::Zero,
        "linear" => SignalSpec::Linear {
            slope: sec.num_or("slope", 1.0)?,
        },
        "zigzag" => SignalSpec::Zigzag {
            amplitude: sec.num_or("amplitude", 0.05)?,
            periods: sec.get("periods", 8)?,
        },
        "brownian" => SignalSpec::Brownian {
            level: sec.get("level", 6)?,
            seed: sec.parse("seed")?,
        },
        "file" => {
            let rel = sec
                .raw("path")
                .ok_or_else(|| sec.err("path", "required for a file signal"))?;
            let path = base.join(rel);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| sec.err("path", format!("{}: {e}", path.display())))?;
            SignalSpec::Sampled(
                PathSignal::from_csv(&text).map_err(|e| sec.err("path", e.to_string()))?,
            )
        }
        other => return Err(sec.err("kind", format!("unknown signal kind '{other}'"))),
    };
    sec.finish()?;
    Ok(s)
}

fn parse_entry(sec: &Section, dim: usize) -> Result<IsaacsEntry, ConfigError> {
    let base = matrix(sec, "sigma", dim)?.unwrap_or_else(|| DMatrix::zeros(dim, dim));
    let sigma = match wave(sec, "sigma_wave")? {
        Some(w) => SigmaModel::Modulated { base, wave: w },
        None => SigmaModel::Constant(base),
    };
    let drift = sec.numbers("drift")?.unwrap_or_else(|| vec![0.0; dim]);
    if drift.len() != dim {
        return Err(sec.err("drift", format!("expected {dim} entries")));
    }
    Ok(IsaacsEntry {
        sigma,
        b: BModel {
            drift,
            source: wave(sec, "source")?,
        },
        c: CModel {
            mean: sec.num_or("c", 0.0)?,
            wave: wave(sec, "c_wave")?,
        },
    })
}

fn parse_f(ini: &Ini, dim: usize) -> Result<FSpec, ConfigError> {
    let sec = Section::new(ini, "F");
    let kind = sec.raw("kind").unwrap_or("zero").to_ascii_lowercase();
    let modulus = match (sec.num("modulus_lipschitz")?, sec.num("modulus_cap")?) {
        (None, _) => None,
        (Some(l), cap) => Some(
            Modulus::new(l, cap.unwrap_or(f64::INFINITY))
                .map_err(|e| sec.err("modulus_lipschitz", e.to_string()))?,
        ),
    };
    let f = match kind.as_str() {
        "zero" => FSpec::zero(),
        "linear_diffusion" => {
            let a = matrix(&sec, "a", dim)?.unwrap_or_else(|| DMatrix::identity(dim, dim));
            FSpec::linear_diffusion(a, sec.num_or("nu", 1.0)?, sec.num_or("decay", 1.0)?)
                .map_err(|e| sec.err("a", e.to_string()))?
        }
        "isaacs" => {
            let mut rows: BTreeMap<usize, BTreeMap<usize, IsaacsEntry>> = BTreeMap::new();
            for name in ini.sections().flatten() {
                let Some(rest) = name.strip_prefix("F.a") else {
                    continue;
                };
                let parts: Vec<&str> = rest.split(".b").collect();
                let idx = match parts.as_slice() {
                    [a, b] => a.parse::<usize>().ok().zip(b.parse::<usize>().ok()),
                    _ => None,
                };
                let (a, b) =
                    idx.ok_or_else(|| field_err(name, "", "entry sections are named F.a<i>.b<j>"))?;
                let es = Section::new(ini, name);
                let e = parse_entry(&es, dim)?;
                es.finish()?;
                rows.entry(a).or_default().insert(b, e);
            }
            let entries: Vec<Vec<IsaacsEntry>> = if rows.is_empty() {
                vec![vec![parse_entry(&sec, dim)?]]
            } else {
                rows.into_values()
                    .map(|r| r.into_values().collect())
                    .collect()
            };
            FSpec::isaacs(entries).map_err(|e| sec.err("kind", e.to_string()))?
        }
        other => return Err(sec.err("kind", format!("unknown operator kind '{other}'"))),
    };
    sec.finish()?;
    Ok(match modulus {
        Some(m) => f.with_modulus(m),
        None => f,
    })
}

/// Parse a configuration from text; relative signal files resolve against the
/// working directory.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_in(text, Path::new("."))
}

/// Parse a configuration from text; relative signal files resolve against `base`.
pub fn parse_config_in(text: &str, base: &Path) -> Result<RunConfig, ConfigError> {
    let ini = Ini::load_from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    let known = [
        "run", "metric", "grid", "data", "signal.a", "signal.b", "F", "geometry", "phi", "isaacs",
        "extend", "modulus",
    ];
    for name in ini.sections().flatten() {
        if !known.contains(&name) && !name.starts_with("F.a") {
            return Err(field_err(name, "", "unknown section"));
        }
    }

    let run = Section::new(&ini, "run");
    let mut cfg = ExperimentConfig::new(run.raw("name").unwrap_or("experiment"));
    cfg.metric = parse_metric(&ini)?;
    cfg.grid = parse_grid(&ini)?;
    if cfg.metric.dim() != cfg.grid.dim() {
        return Err(field_err("grid", "dim", "must equal the metric dimension"));
    }
    let data = Section::new(&ini, "data");
    cfg.u0 = parse_data(&data, "u0", None)?;
    cfg.v0 = parse_data(&data, "v0", Some(&cfg.u0))?;
    data.finish()?;
    cfg.xi = parse_signal(&ini, "signal.a", base)?;
    cfg.zeta = parse_signal(&ini, "signal.b", base)?;
    cfg.f = parse_f(&ini, cfg.grid.dim())?;

    cfg.horizon = run.num_or("horizon", 1.0)?;
    cfg.dt_max = run.num_or("dt_max", 0.01)?;
    cfg.observe_stride = match run.num("observe_stride")? {
        Some(s) if s > 0.0 => Some(s),
        Some(_) => None,
        None => cfg.observe_stride,
    };
    cfg.seed = run.get("seed", cfg.seed)?;
    cfg.margin_factor = run.num_or("margin_factor", cfg.margin_factor)?;
    if !(cfg.margin_factor > 0.0) {
        return Err(run.err("margin_factor", "must be positive"));
    }
    if !(cfg.horizon > 0.0) {
        return Err(run.err("horizon", "must be positive"));
    }
    if !(cfg.dt_max > 0.0) {
        return Err(run.err("dt_max", "must be positive"));
    }
    let out_dir = run.raw("out").map(PathBuf::from);
    run.finish()?;

    let geo = Section::new(&ini, "geometry");
    cfg.upsilon = geo.num("upsilon")?;
    cfg.probe.samples = geo.get("samples", cfg.probe.samples)?;
    cfg.probe.hessian_samples = geo.get("hessian_samples", cfg.probe.hessian_samples)?;
    cfg.probe.directions = geo.get("directions", cfg.probe.directions)?;
    cfg.probe.box_half_width = geo.num_or("box_half_width", cfg.probe.box_half_width)?;
    cfg.probe.seed = geo.get("seed", cfg.probe.seed)?;
    cfg.probe.shooting.steps = geo.get("steps", cfg.probe.shooting.steps)?;
    if let Some(rmax) = geo.num("radius_max")? {
        let k: usize = geo.get("radius_steps", 10)?;
        if !(rmax > 0.0) || k == 0 {
            return Err(geo.err(
                "radius_max",
                "needs a positive radius and at least one step",
            ));
        }
        cfg.probe.radius_grid = (1..=k).map(|i| rmax * i as f64 / k as f64).collect();
    }
    geo.finish()?;

    let phi = Section::new(&ini, "phi");
    let phi_settings = PhiSettings {
        lambda: phi.num_or("lambda", 1.0)?,
        gammas: phi.numbers("gamma")?.unwrap_or_else(|| vec![0.0, 1.0]),
        samples: phi.get("samples", 100)?,
        reading: phi.get("reading", LambdaReading::default())?,
    };
    if let Some(g) = phi.numbers("gamma_grid")? {
        cfg.gamma_grid = g;
    }
    phi.finish()?;

    let isa = Section::new(&ini, "isaacs");
    let isaacs = IsaacsSettings {
        options: IsaacsOptions {
            alpha: isa.num_or("alpha", 10.0)?,
            eps: isa.num_or("eps", 0.1)?,
            r_bound: isa.num_or("r_bound", 1.0)?,
            upsilon: f64::INFINITY,
            shooting: cfg.probe.shooting,
        },
        samples: isa.get("samples", 100)?,
        spread: isa.num_or("spread", 0.8)?,
        seed: isa.get("seed", 12)?,
    };
    isa.finish()?;

    let ext = Section::new(&ini, "extend");
    let lo: u32 = ext.get("level_min", cfg.levels.0)?;
    let hi: u32 = ext.get("level_max", cfg.levels.1)?;
    if lo > hi {
        return Err(ext.err("level_min", "must not exceed level_max"));
    }
    cfg.levels = (lo, hi);
    let monotone_from: u32 = ext.get("monotone_from", 5)?;
    ext.finish()?;

    let md = Section::new(&ini, "modulus");
    if let Some(a) = md.numbers("amplitudes")? {
        let p = md
            .numbers("periods")?
            .ok_or_else(|| md.err("periods", "required with amplitudes"))?;
        if p.len() != a.len() {
            return Err(md.err("periods", "must match the number of amplitudes"));
        }
        cfg.family = a.into_iter().zip(p).map(|(a, p)| (a, p as usize)).collect();
    }
    let max_spread = md.num_or("max_spread", 0.1)?;
    md.finish()?;

    Ok(RunConfig {
        experiment: cfg,
        phi: phi_settings,
        isaacs,
        monotone_from,
        max_spread,
        out_dir,
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
    parse_config_in(&text, path.parent().unwrap_or(Path::new(".")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::FKind;

    #[test]
    fn defaults_from_empty_text() {
        let c = parse_config("").unwrap();
        assert_eq!(c.experiment.grid.points(), 200);
        assert_eq!(c.experiment.xi, SignalSpec::Zero);
        assert!(c.experiment.f.is_zero());
        assert_eq!(c.phi.reading, LambdaReading::Squared);
    }

    #[test]
    fn full_fixture() {
        let text = "
[run]
name = zz
horizon = 1
seed = 7
[metric]
family = conformal
dim = 2
amplitude = 0.2
[grid]
dim = 2
points = 32
length = 2pi
[data]
u0_kind = negabs
u0_slope = 0.5
v0_offset = -0.1
[signal.a]
kind = zigzag
amplitude = 0.05
periods = 8
[signal.b]
kind = brownian
level = 5
[F]
kind = linear_diffusion
a = 0.1
decay = 1
[phi]
gamma = 0 1 2
reading = linear
";
        let c = parse_config(text).unwrap();
        let e = &c.experiment;
        assert_eq!(e.name, "zz");
        assert_eq!(e.seed, 7);
        assert_eq!(e.grid.dim(), 2);
        assert!((e.grid.length() - 2.0 * std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(e.v0.offset, -0.1);
        assert_eq!(e.v0.kind, e.u0.kind);
        assert_eq!(
            e.zeta,
            SignalSpec::Brownian {
                level: 5,
                seed: None
            }
        );
        assert!(matches!(e.f.kind(), FKind::LinearDiffusion { .. }));
        assert_eq!(e.f.rho(), 1.0);
        assert_eq!(c.phi.gammas, vec![0.0, 1.0, 2.0]);
        assert_eq!(c.phi.reading, LambdaReading::Linear);
    }

    #[test]
    fn isaacs_entry_sections() {
        let text = "
[metric]
dim = 2
[grid]
dim = 2
points = 8
[F]
kind = isaacs
[F.a0.b0]
sigma = 0.2
c = 1
[F.a0.b1]
sigma = 0.4 0 0 0.1
drift = 1 0
c = 1
[F.a1.b0]
sigma = 0.1
sigma_wave_amplitude = 0.3
sigma_wave_frequency = 2
c = 1
";
        let c = parse_config(text).unwrap();
        match c.experiment.f.kind() {
            FKind::Isaacs(rows) => {
                assert_eq!(rows.len(), 2);
                assert_eq!(rows[0].len(), 2);
                assert_eq!(rows[0][1].b.drift, vec![1.0, 0.0]);
                assert!(matches!(rows[1][0].sigma, SigmaModel::Modulated { .. }));
            }
            _ => panic!("expected isaacs"),
        }
        assert_eq!(c.experiment.f.rho(), 1.0);
    }

    #[test]
    fn diagnostics_name_section_and_field() {
        let e = parse_config("[grid]\npoints = many\n").unwrap_err();
        assert!(
            matches!(&e, ConfigError::Field { section, field, .. } if section == "grid" && field == "points")
        );
        let e = parse_config("[signal.a]\nkind = spline\n").unwrap_err();
        assert!(e.to_string().starts_with("[signal.a] kind:"));
        let e = parse_config("[run]\nhorizn = 1\n").unwrap_err();
        assert_eq!(e.to_string(), "[run] horizn: unknown key");
        assert!(parse_config("[wat]\n").is_err());
        assert!(parse_config("[metric]\ndim = 2\n").is_err());
        assert!(matches!(
            parse_config("[run\n"),
            Err(ConfigError::Syntax(_))
        ));
    }

    #[test]
    fn signal_from_file() {
        let dir = std::env::temp_dir().join(format!("pathvisc-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = PathSignal::zigzag(0.1, 2, 1.0).unwrap();
        std::fs::write(dir.join("xi.csv"), p.to_csv()).unwrap();
        std::fs::write(
            dir.join("run.ini"),
            "[signal.a]\nkind = file\npath = xi.csv\n",
        )
        .unwrap();
        let c = load_config(&dir.join("run.ini")).unwrap();
        assert_eq!(c.experiment.xi, SignalSpec::Sampled(p));
        assert!(c.experiment.xi.build(2.0, 0).is_err());
        let e = parse_config_in("[signal.a]\nkind = file\npath = missing.csv\n", &dir).unwrap_err();
        assert!(e.to_string().starts_with("[signal.a] path:"));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn numbers_accept_pi() {
        assert_eq!(parse_number("pi"), Some(std::f64::consts::PI));
        assert_eq!(parse_number("0.5pi"), Some(0.5 * std::f64::consts::PI));
        assert_eq!(parse_number("inf"), Some(f64::INFINITY));
        assert_eq!(parse_number("x"), None);
    }
}
