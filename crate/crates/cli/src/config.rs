//! Flat `section.key = value` configuration.
//!
//! Resolution order for every key: command-line override, then the file,
//! then the preset's default, then the global default.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use relaycap::montecarlo::SimStrategy;
use relaycap::topology::{GeometryViolation, NetworkGeometry, Point, Region};
use relaycap::SystemParams;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}{key}: {message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct ConfigError {
    pub key: String,
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn new(key: &str, message: impl Into<String>) -> Self {
        Self {
            key: key.to_string(),
            line: None,
            message: message.into(),
        }
    }
}

pub const KEYS: &[&str] = &[
    "geometry.dimension",
    "geometry.source",
    "geometry.dest",
    "geometry.region_min",
    "geometry.region_max",
    "geometry.theta",
    "geometry.s0",
    "system.gamma0_db",
    "system.p",
    "system.alpha",
    "system.epsilon",
    "sim.strategy",
    "sim.n_relays",
    "sim.target_rate",
    "sim.trials",
    "sim.seed",
    "sim.resample_positions",
    "experiment.preset",
    "experiment.gamma0_db_start",
    "experiment.gamma0_db_stop",
    "experiment.gamma0_db_step",
    "experiment.epsilons",
    "experiment.ps",
    "experiment.alpha",
    "experiment.n_relays",
    "experiment.rates",
    "experiment.output",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Custom,
}

impl Preset {
    pub fn as_str(&self) -> &'static str {
        match self {
            Preset::Fig2 => "FIG2",
            Preset::Fig3 => "FIG3",
            Preset::Fig4 => "FIG4",
            Preset::Fig5 => "FIG5",
            Preset::Custom => "CUSTOM",
        }
    }

    pub fn from_figure(n: u8) -> Option<Self> {
        match n {
            2 => Some(Preset::Fig2),
            3 => Some(Preset::Fig3),
            4 => Some(Preset::Fig4),
            5 => Some(Preset::Fig5),
            _ => None,
        }
    }

    fn default_for(&self, key: &str) -> Option<&'static str> {
        use Preset::*;
        Some(match (self, key) {
            (Fig2, "system.p") => "0.1",
            (Fig2, "system.alpha") => "0.5",
            (Fig2, "experiment.epsilons") => "0.1, 0.05, 0.01",
            (Fig3, "system.gamma0_db") => "30",
            (Fig3, "system.p") => "0.2",
            (Fig3, "system.alpha") => "0.5",
            (Fig4, "system.p") => "0.1",
            (Fig4, "experiment.alpha") => "optimal",
            (Fig4, "experiment.epsilons") => "0.1, 0.01",
            (Fig5, "system.alpha") => "0.6",
            (Fig5, "system.epsilon") => "0.1",
            (Fig5, "experiment.ps") => "0.1, 0.2, 0.3",
            _ => return None,
        })
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Preset {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "FIG2" => Ok(Preset::Fig2),
            "FIG3" => Ok(Preset::Fig3),
            "FIG4" => Ok(Preset::Fig4),
            "FIG5" => Ok(Preset::Fig5),
            "CUSTOM" => Ok(Preset::Custom),
            _ => Err("expected one of FIG2, FIG3, FIG4, FIG5, CUSTOM".into()),
        }
    }
}

fn global_default(key: &str) -> Option<&'static str> {
    Some(match key {
        "geometry.dimension" => "1",
        "geometry.theta" => "2",
        "geometry.s0" => "1",
        "system.gamma0_db" => "30",
        "system.p" => "0.1",
        "system.alpha" => "0.5",
        "system.epsilon" => "0.1",
        "sim.strategy" => "DF",
        "sim.n_relays" => "200",
        "sim.target_rate" => "1",
        "sim.trials" => "10000",
        "sim.seed" => "0",
        "sim.resample_positions" => "true",
        "experiment.preset" => "CUSTOM",
        "experiment.gamma0_db_start" => "-10",
        "experiment.gamma0_db_stop" => "40",
        "experiment.gamma0_db_step" => "1",
        "experiment.epsilons" => "0.1",
        "experiment.ps" => "0.1",
        "experiment.alpha" => "0.5",
        "experiment.n_relays" => "10, 50, 200, 1000",
        "experiment.rates" => "0.25, 0.5, 0.75, 1, 1.25, 1.5, 1.75, 2, 2.25, 2.5, 2.75, 3",
        _ => return None,
    })
}

fn line_default(key: &str) -> Option<&'static str> {
    Some(match key {
        "geometry.source" => "0",
        "geometry.dest" => "12",
        "geometry.region_min" => "1",
        "geometry.region_max" => "11",
        _ => return None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaPolicy {
    Fixed(f64),
    Optimal,
}

impl fmt::Display for AlphaPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaPolicy::Fixed(a) => write!(f, "{a}"),
            AlphaPolicy::Optimal => f.write_str("optimal"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbSweep {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl DbSweep {
    /// `start, start + step, …` up to and including `stop`.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|k| self.start + k as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSettings {
    pub strategy: SimStrategy,
    pub n_relays: usize,
    pub target_rate: f64,
    pub trials: u64,
    pub seed: u64,
    pub resample_positions: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub preset: Preset,
    pub gamma0_db: DbSweep,
    pub epsilons: Vec<f64>,
    pub ps: Vec<f64>,
    pub alpha: AlphaPolicy,
    pub n_relays: Vec<usize>,
    pub rates: Vec<f64>,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub trials: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub geometry: NetworkGeometry,
    pub params: SystemParams,
    /// `system.gamma0_db` as given, kept for output.
    pub gamma0_db: f64,
    pub sim: SimSettings,
    pub experiment: ExperimentSpec,
}

/// Key/value pairs of a document, with 1-based line numbers.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String, usize)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError {
                key: line.to_string(),
                line: Some(i + 1),
                message: "expected `key = value`".into(),
            });
        };
        out.push((k.trim().to_string(), v.trim().to_string(), i + 1));
    }
    Ok(out)
}

/// Merged view of overrides, file entries and defaults.
struct Source {
    values: BTreeMap<String, (String, Option<usize>)>,
    preset: Preset,
}

impl Source {
    fn raw(&self, key: &str) -> Option<(&str, Option<usize>)> {
        if let Some((v, l)) = self.values.get(key) {
            return Some((v.as_str(), *l));
        }
        self.preset
            .default_for(key)
            .or_else(|| global_default(key))
            .map(|v| (v, None))
    }

    fn error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            key: key.to_string(),
            line: self.values.get(key).and_then(|v| v.1),
            message: message.into(),
        }
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        let (v, _) = self
            .raw(key)
            .ok_or_else(|| self.error(key, "missing required key"))?;
        v.parse::<T>()
            .map_err(|e| self.error(key, format!("cannot parse `{v}`: {e}")))
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        let (v, _) = self
            .raw(key)
            .ok_or_else(|| self.error(key, "missing required key"))?;
        let items: Vec<T> = v
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<T>()
                    .map_err(|e| self.error(key, format!("cannot parse `{s}`: {e}")))
            })
            .collect::<Result<_, _>>()?;
        if items.is_empty() {
            return Err(self.error(key, "list must not be empty"));
        }
        Ok(items)
    }

    fn finite(&self, key: &str) -> Result<f64, ConfigError> {
        let x: f64 = self.get(key)?;
        if x.is_finite() {
            Ok(x)
        } else {
            Err(self.error(key, format!("{x} is not finite")))
        }
    }

    fn point(&self, key: &str, dims: usize, fallback: Option<&str>) -> Result<Point, ConfigError> {
        let v = match self.raw(key) {
            Some((v, _)) => v,
            None => fallback.ok_or_else(|| self.error(key, "missing required key"))?,
        };
        let coords: Vec<f64> = v
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| self.error(key, format!("cannot parse `{v}`: {e}")))?;
        if coords.len() != dims || coords.iter().any(|c| !c.is_finite()) {
            return Err(self.error(key, format!("expected {dims} finite coordinate(s), got `{v}`")));
        }
        Ok(Point::new(coords[0], coords.get(1).copied().unwrap_or(0.0)))
    }
}

fn strategy_from_str(key: &str, v: &str) -> Result<SimStrategy, ConfigError> {
    match v.to_ascii_uppercase().as_str() {
        "MAC" => Ok(SimStrategy::Mac),
        "AF" => Ok(SimStrategy::Af),
        "DF" => Ok(SimStrategy::Df),
        _ => Err(ConfigError::new(key, format!("`{v}` is not one of MAC, AF, DF"))),
    }
}

fn geometry_key(v: &GeometryViolation) -> &'static str {
    match v {
        GeometryViolation::SourceDeadZone { .. } | GeometryViolation::DestinationDeadZone { .. } => {
            "geometry.s0"
        }
        GeometryViolation::NonPositiveDeadZone(_) => "geometry.s0",
        GeometryViolation::NonPositiveTheta(_) => "geometry.theta",
        GeometryViolation::DensityNormalization { .. } | GeometryViolation::DegenerateRegion => {
            "geometry.region_min"
        }
        GeometryViolation::OffLine => "geometry.source",
    }
}

fn range_key(name: &str) -> &'static str {
    match name {
        "gamma0" => "system.gamma0_db",
        "p" => "system.p",
        "alpha" => "system.alpha",
        _ => "system.epsilon",
    }
}

/// Parses a document with no overrides.
pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    parse_config_with(text, &[])
}

/// Parses a document, then applies `overrides` (`key`, `value`) on top.
pub fn parse_config_with(text: &str, overrides: &[(String, String)]) -> Result<Config, ConfigError> {
    let mut values = BTreeMap::new();
    let file = parse_pairs(text)?;
    let entries = file
        .into_iter()
        .map(|(k, v, l)| (k, v, Some(l)))
        .chain(overrides.iter().map(|(k, v)| (k.clone(), v.clone(), None)));
    for (k, v, line) in entries {
        if !KEYS.contains(&k.as_str()) {
            return Err(ConfigError {
                key: k,
                line,
                message: "unknown key".into(),
            });
        }
        values.insert(k, (v, line));
    }
    let preset = match values.get("experiment.preset") {
        Some((v, line)) => v.parse::<Preset>().map_err(|m| ConfigError {
            key: "experiment.preset".into(),
            line: *line,
            message: m,
        })?,
        None => Preset::Custom,
    };
    resolve(&Source { values, preset })
}

fn resolve(src: &Source) -> Result<Config, ConfigError> {
    let geometry = resolve_geometry(src)?;

    let gamma0_db = src.finite("system.gamma0_db")?;
    let params = SystemParams::from_db(
        gamma0_db,
        src.get("system.p")?,
        src.get("system.alpha")?,
        src.get("system.epsilon")?,
    )
    .map_err(|e| match e {
        relaycap::Error::OutOfRange { name, .. } => src.error(range_key(name), e.to_string()),
        other => src.error("system", other.to_string()),
    })?;

    let (strategy, _) = src.raw("sim.strategy").unwrap_or(("DF", None));
    let sim = SimSettings {
        strategy: strategy_from_str("sim.strategy", strategy).map_err(|e| src.error(&e.key, e.message))?,
        n_relays: src.get("sim.n_relays")?,
        target_rate: src.finite("sim.target_rate")?,
        trials: src.get("sim.trials")?,
        seed: src.get("sim.seed")?,
        resample_positions: src.get("sim.resample_positions")?,
    };
    if sim.n_relays == 0 {
        return Err(src.error("sim.n_relays", "must be at least 1"));
    }
    if sim.trials == 0 {
        return Err(src.error("sim.trials", "must be at least 1"));
    }
    if sim.target_rate < 0.0 {
        return Err(src.error("sim.target_rate", "must be non-negative"));
    }

    let experiment = resolve_experiment(src, &sim)?;
    Ok(Config {
        geometry,
        params,
        gamma0_db,
        sim,
        experiment,
    })
}

fn resolve_geometry(src: &Source) -> Result<NetworkGeometry, ConfigError> {
    let dims: usize = src.get("geometry.dimension")?;
    let fallback = |k: &str| if dims == 1 { line_default(k) } else { None };
    let point = |k: &str| src.point(k, dims, fallback(k));
    let theta = src.finite("geometry.theta")?;
    let s0 = src.finite("geometry.s0")?;
    let (source, dest, min, max) = match dims {
        1 | 2 => (
            point("geometry.source")?,
            point("geometry.dest")?,
            point("geometry.region_min")?,
            point("geometry.region_max")?,
        ),
        _ => return Err(src.error("geometry.dimension", format!("expected 1 or 2, got {dims}"))),
    };
    let region = if dims == 1 {
        Region::Interval { min: min.x, max: max.x }
    } else {
        Region::Rectangle { min, max }
    };
    NetworkGeometry::new(source, dest, region, theta, s0).map_err(|e| match e {
        relaycap::Error::Geometry(report) => {
            let key = report.violations.first().map(geometry_key).unwrap_or("geometry");
            src.error(key, report.to_string())
        }
        other => src.error("geometry", other.to_string()),
    })
}

fn resolve_experiment(src: &Source, sim: &SimSettings) -> Result<ExperimentSpec, ConfigError> {
    let gamma0_db = DbSweep {
        start: src.finite("experiment.gamma0_db_start")?,
        stop: src.finite("experiment.gamma0_db_stop")?,
        step: src.finite("experiment.gamma0_db_step")?,
    };
    if !(gamma0_db.step > 0.0) {
        return Err(src.error("experiment.gamma0_db_step", "must be positive"));
    }
    if gamma0_db.stop < gamma0_db.start {
        return Err(src.error("experiment.gamma0_db_stop", "must not be below gamma0_db_start"));
    }

    let epsilons: Vec<f64> = src.list("experiment.epsilons")?;
    if let Some(e) = epsilons.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
        return Err(src.error("experiment.epsilons", format!("{e} is outside (0, 1)")));
    }
    let ps: Vec<f64> = src.list("experiment.ps")?;
    if let Some(p) = ps.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(src.error("experiment.ps", format!("{p} is outside [0, 1]")));
    }
    let alpha = match src.raw("experiment.alpha") {
        Some((v, _)) if v.eq_ignore_ascii_case("optimal") => AlphaPolicy::Optimal,
        _ => {
            let a: f64 = src.get("experiment.alpha")?;
            if !(0.0..1.0).contains(&a) {
                return Err(src.error("experiment.alpha", format!("{a} is outside [0, 1)")));
            }
            AlphaPolicy::Fixed(a)
        }
    };
    let n_relays: Vec<usize> = src.list("experiment.n_relays")?;
    if n_relays.contains(&0) {
        return Err(src.error("experiment.n_relays", "relay counts must be at least 1"));
    }
    let rates: Vec<f64> = src.list("experiment.rates")?;
    if let Some(r) = rates.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
        return Err(src.error("experiment.rates", format!("{r} is not a non-negative rate")));
    }
    let output = src.raw("experiment.output").map(|(v, _)| PathBuf::from(v));

    Ok(ExperimentSpec {
        preset: src.preset,
        gamma0_db,
        epsilons,
        ps,
        alpha,
        n_relays,
        rates,
        output,
        seed: sim.seed,
        trials: sim.trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_line_defaults() {
        let c = parse_config_with("", &[("experiment.preset".into(), "FIG4".into())]).unwrap();
        assert_eq!(c.geometry, NetworkGeometry::default_line());
        assert_eq!(c.experiment.preset, Preset::Fig4);
        assert_eq!(c.experiment.alpha, AlphaPolicy::Optimal);
        assert_eq!(c.experiment.epsilons, vec![0.1, 0.01]);
        assert_eq!(c.params.p(), 0.1);
    }

    #[test]
    fn range_errors_name_the_key() {
        let e = parse_config("system.p = 1.5").unwrap_err();
        assert_eq!((e.key.as_str(), e.line), ("system.p", Some(1)));
        let e = parse_config("# comment\nsystem.alpha = 1.0\n").unwrap_err();
        assert_eq!((e.key.as_str(), e.line), ("system.alpha", Some(2)));
        let e = parse_config("sim.n_relays = 0").unwrap_err();
        assert_eq!(e.key, "sim.n_relays");
        let e = parse_config("experiment.gamma0_db_step = 0").unwrap_err();
        assert_eq!(e.key, "experiment.gamma0_db_step");
    }

    #[test]
    fn unknown_and_malformed_lines() {
        let e = parse_config("system.beta = 1").unwrap_err();
        assert_eq!(e.key, "system.beta");
        assert!(e.to_string().contains("unknown key"));
        assert!(parse_config("just words").is_err());
        let e = parse_config("geometry.theta = two").unwrap_err();
        assert_eq!(e.key, "geometry.theta");
    }

    #[test]
    fn dead_zone_violation_is_reported() {
        let e = parse_config("geometry.region_min = 0.5").unwrap_err();
        assert_eq!(e.key, "geometry.s0");
        assert!(e.message.contains("source dead zone"), "{}", e.message);
    }

    #[test]
    fn overrides_beat_file_beat_preset() {
        let text = "experiment.preset = FIG3\nsystem.p = 0.3\n";
        assert_eq!(parse_config(text).unwrap().params.p(), 0.3);
        let c = parse_config_with(text, &[("system.p".into(), "0.4".into())]).unwrap();
        assert_eq!(c.params.p(), 0.4);
        let c = parse_config("experiment.preset = fig3").unwrap();
        assert_eq!((c.params.p(), c.params.alpha(), c.gamma0_db), (0.2, 0.5, 30.0));
    }

    #[test]
    fn two_dimensional_geometry() {
        let text = "geometry.dimension = 2\ngeometry.source = 0, 0\ngeometry.dest = 12, 0\n\
                    geometry.region_min = 1, -5\ngeometry.region_max = 11, 5\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c.geometry.region(), Region::Rectangle {
            min: Point::new(1.0, -5.0),
            max: Point::new(11.0, 5.0)
        });
        let e = parse_config("geometry.dimension = 2").unwrap_err();
        assert_eq!(e.key, "geometry.source");
        let e = parse_config("geometry.source = 0, 0").unwrap_err();
        assert_eq!(e.key, "geometry.source");
    }

    #[test]
    fn sweep_points_include_stop() {
        let s = DbSweep { start: -10.0, stop: 40.0, step: 2.5 };
        let p = s.points();
        assert_eq!(p.len(), 21);
        assert_eq!(*p.last().unwrap(), 40.0);
        assert_eq!(DbSweep { start: 3.0, stop: 3.0, step: 1.0 }.points(), vec![3.0]);
    }

    #[test]
    fn lists_and_policies() {
        let c = parse_config("experiment.epsilons = 0.1,0.2 , 0.3\nexperiment.alpha = Optimal").unwrap();
        assert_eq!(c.experiment.epsilons, vec![0.1, 0.2, 0.3]);
        assert_eq!(c.experiment.alpha, AlphaPolicy::Optimal);
        assert!(parse_config("experiment.epsilons =").is_err());
        assert!(parse_config("experiment.ps = 0.1, 2").is_err());
        assert!(parse_config("sim.strategy = XF").is_err());
    }
}
