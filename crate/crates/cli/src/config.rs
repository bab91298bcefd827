//! Line-oriented `section.key = value` experiment configuration.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Kg,
    Em,
    Pca,
    Algebra,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Kg => "kg",
            Kind::Em => "em",
            Kind::Pca => "pca",
            Kind::Algebra => "algebra",
        }
    }

    /// Tolerance names understood by this kind, with their defaults.
    pub fn default_tolerances(self) -> &'static [(&'static str, f64)] {
        match self {
            Kind::Kg => &[
                ("noether_translation", 1e-10),
                ("noether_rotation", 1e-10),
                ("noether_boost", 1e-6),
                ("eom", 1e-6),
            ],
            Kind::Algebra => &[("closure", 1e-7), ("defining_relation", 1e-8), ("trace_pairing", 1e-12)],
            Kind::Em => &[
                ("helmholtz", 1e-12),
                ("constraint", 1e-12),
                ("kernel", 1e-10),
                ("kernel_detection", 1e-3),
                ("eom", 1e-6),
                ("defining_relation", 1e-6),
                ("pullback", 1e-12),
                ("closure", 1e-6),
                ("gauge_invariance", 1e-10),
                ("noether", 1e-6),
            ],
            Kind::Pca => &[("oracle_distance", 1e-10), ("orthonormality", 1e-12)],
        }
    }
}

impl FromStr for Kind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "kg" => Ok(Kind::Kg),
            "em" => Ok(Kind::Em),
            "pca" => Ok(Kind::Pca),
            "algebra" => Ok(Kind::Algebra),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridConfig {
    pub n: usize,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Envelope {
    /// Total envelope width as a fraction of the box edge.
    pub width: f64,
    pub amplitude: f64,
}

impl Default for Envelope {
    fn default() -> Self {
        Self { width: 0.25, amplitude: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KgConfig {
    pub grid: GridConfig,
    pub mass: f64,
    pub dt: f64,
    pub steps: usize,
    pub envelope: Envelope,
    pub eom_dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmConfig {
    pub grid: GridConfig,
    pub dt: f64,
    pub steps: usize,
    pub envelope: Envelope,
    pub eom_dt: f64,
    /// Defining-relation test directions per rotation axis.
    pub directions: usize,
    /// Size of the kernel test battery.
    pub battery: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgebraConfig {
    pub grid: GridConfig,
    pub mass: f64,
    pub envelope: Envelope,
    /// Number of independent states for the closure check.
    pub seeds: usize,
    /// Defining-relation test directions per generator.
    pub directions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PcaExample {
    Dim3,
    Dim4,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum PcaSystem {
    Example { name: PcaExample },
    /// `ω` as a sum of wedges `e_i∧e_j` (1-based), `H = ½xᵀAx + bᵀx`.
    Explicit { dim: usize, omega: Vec<[usize; 2]>, hessian: Vec<f64>, linear: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcaConfig {
    pub system: PcaSystem,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expect: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Experiment {
    Kg(KgConfig),
    Em(EmConfig),
    Pca(PcaConfig),
    Algebra(AlgebraConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub experiment: Experiment,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn kind(&self) -> Kind {
        match self.experiment {
            Experiment::Kg(_) => Kind::Kg,
            Experiment::Em(_) => Kind::Em,
            Experiment::Pca(_) => Kind::Pca,
            Experiment::Algebra(_) => Kind::Algebra,
        }
    }

    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances[name]
    }

    /// Overrides one tolerance; `name` may carry the `tolerance.` prefix.
    pub fn set_tolerance(&mut self, name: &str, value: f64) -> Result<(), ConfigError> {
        let name = name.strip_prefix("tolerance.").unwrap_or(name);
        let key = format!("tolerance.{name}");
        if !self.tolerances.contains_key(name) {
            return Err(ConfigError::Validation { key, reason: format!("unknown for kind {}", self.kind().name()) });
        }
        if !(value.is_finite() && value >= 0.0) {
            return Err(ConfigError::Validation { key, reason: "must be finite and non-negative".into() });
        }
        self.tolerances.insert(name.to_string(), value);
        Ok(())
    }
}

/// Parses and validates a configuration document.
///
/// Blank lines and `#` comments are ignored. Keys that the selected kind
/// does not use are rejected like unknown keys.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut doc = Document::parse(text)?;
    let kind: Kind = match doc.take_raw("kind") {
        Some(v) => v.parse().map_err(|_| invalid("kind", "expected one of kg, em, pca, algebra"))?,
        None => return Err(invalid("kind", "required")),
    };
    let mut tolerances: BTreeMap<String, f64> =
        kind.default_tolerances().iter().map(|(k, v)| (k.to_string(), *v)).collect();
    for key in doc.keys_with_prefix("tolerance.") {
        let name = &key["tolerance.".len()..];
        if !tolerances.contains_key(name) {
            let line = doc.line_of(&key);
            return Err(ConfigError::Parse { line, key, reason: format!("unknown tolerance for kind {}", kind.name()) });
        }
        let v: f64 = doc.require(&key)?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(invalid(&key, "must be finite and non-negative"));
        }
        tolerances.insert(name.to_string(), v);
    }
    let seed = doc.take("seed")?.unwrap_or(0);
    let output = doc.take_raw("output.path").map(PathBuf::from);

    let experiment = match kind {
        Kind::Kg => Experiment::Kg(KgConfig {
            grid: grid(&mut doc)?,
            mass: mass(&mut doc)?,
            dt: time_step(&mut doc, "dt")?,
            steps: steps(&mut doc)?,
            envelope: envelope(&mut doc)?,
            eom_dt: eom_dt(&mut doc)?,
        }),
        Kind::Em => Experiment::Em(EmConfig {
            grid: grid(&mut doc)?,
            dt: time_step(&mut doc, "dt")?,
            steps: steps(&mut doc)?,
            envelope: envelope(&mut doc)?,
            eom_dt: eom_dt(&mut doc)?,
            directions: count(&mut doc, "checks.directions", 3)?,
            battery: count(&mut doc, "checks.battery", 32)?,
        }),
        Kind::Algebra => Experiment::Algebra(AlgebraConfig {
            grid: grid(&mut doc)?,
            mass: mass(&mut doc)?,
            envelope: envelope(&mut doc)?,
            seeds: count(&mut doc, "checks.seeds", 3)?,
            directions: count(&mut doc, "checks.directions", 10)?,
        }),
        Kind::Pca => Experiment::Pca(pca(&mut doc)?),
    };
    doc.finish(kind)?;
    Ok(ExperimentConfig { experiment, seed, tolerances, output })
}

fn invalid(key: &str, reason: &str) -> ConfigError {
    ConfigError::Validation { key: key.to_string(), reason: reason.to_string() }
}

fn grid(doc: &mut Document) -> Result<GridConfig, ConfigError> {
    let n: usize = doc.require("grid.n")?;
    if n < 4 || !n.is_power_of_two() {
        return Err(invalid("grid.n", "power of two required"));
    }
    let length: f64 = doc.require("grid.length")?;
    if !(length.is_finite() && length > 0.0) {
        return Err(invalid("grid.length", "must be positive"));
    }
    Ok(GridConfig { n, length })
}

fn mass(doc: &mut Document) -> Result<f64, ConfigError> {
    let m: f64 = doc.require("mass")?;
    if !(m.is_finite() && m >= 0.0) {
        return Err(invalid("mass", "must be finite and non-negative"));
    }
    Ok(m)
}

fn time_step(doc: &mut Document, key: &str) -> Result<f64, ConfigError> {
    let dt: f64 = doc.require(key)?;
    check_step(key, dt)
}

fn check_step(key: &str, dt: f64) -> Result<f64, ConfigError> {
    if !(dt.is_finite() && dt != 0.0) {
        return Err(invalid(key, "must be finite and non-zero"));
    }
    Ok(dt)
}

fn eom_dt(doc: &mut Document) -> Result<f64, ConfigError> {
    let dt = doc.take("eom.dt")?.unwrap_or(1e-4);
    check_step("eom.dt", dt)
}

fn steps(doc: &mut Document) -> Result<usize, ConfigError> {
    let s: usize = doc.require("steps")?;
    if s < 1 {
        return Err(invalid("steps", "must be at least 1"));
    }
    Ok(s)
}

fn count(doc: &mut Document, key: &str, default: usize) -> Result<usize, ConfigError> {
    let c = doc.take(key)?.unwrap_or(default);
    if c < 1 {
        return Err(invalid(key, "must be at least 1"));
    }
    Ok(c)
}

fn envelope(doc: &mut Document) -> Result<Envelope, ConfigError> {
    let d = Envelope::default();
    let width = doc.take("envelope.width")?.unwrap_or(d.width);
    if !(width > 0.0 && width <= 1.0) {
        return Err(invalid("envelope.width", "must lie in (0, 1]"));
    }
    let amplitude = doc.take("envelope.amplitude")?.unwrap_or(d.amplitude);
    if !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(invalid("envelope.amplitude", "must be finite and non-negative"));
    }
    Ok(Envelope { width, amplitude })
}

fn pca(doc: &mut Document) -> Result<PcaConfig, ConfigError> {
    let example = doc.take_raw("pca.example");
    let system = match example.as_deref() {
        Some("dim3") => PcaSystem::Example { name: PcaExample::Dim3 },
        Some("dim4") => PcaSystem::Example { name: PcaExample::Dim4 },
        Some("random") => PcaSystem::Example { name: PcaExample::Random },
        Some(_) => return Err(invalid("pca.example", "expected one of dim3, dim4, random")),
        None => {
            let dim: usize = doc.require("pca.dim")?;
            if dim == 0 {
                return Err(invalid("pca.dim", "must be at least 1"));
            }
            let omega = doc.take_raw("pca.omega").map(|s| parse_wedges(&s, dim)).transpose()?.unwrap_or_default();
            let hessian = match doc.take_raw("pca.hessian") {
                Some(s) => parse_list::<f64>("pca.hessian", &s)?,
                None => vec![0.0; dim * dim],
            };
            if hessian.len() != dim * dim {
                return Err(invalid("pca.hessian", "expected dim² row-major entries"));
            }
            if (0..dim).any(|i| (0..dim).any(|j| hessian[i * dim + j] != hessian[j * dim + i])) {
                return Err(invalid("pca.hessian", "must be symmetric"));
            }
            let linear = match doc.take_raw("pca.linear") {
                Some(s) => parse_list::<f64>("pca.linear", &s)?,
                None => vec![0.0; dim],
            };
            if linear.len() != dim {
                return Err(invalid("pca.linear", "expected dim entries"));
            }
            PcaSystem::Explicit { dim, omega, hessian, linear }
        }
    };
    let expect = doc.take_raw("pca.expect").map(|s| parse_list::<usize>("pca.expect", &s)).transpose()?;
    Ok(PcaConfig { system, expect })
}

fn parse_list<T: FromStr>(key: &str, s: &str) -> Result<Vec<T>, ConfigError> {
    s.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| invalid(key, &format!("cannot parse entry `{}`", t.trim()))))
        .collect()
}

/// `1-2, 3-4` → `[[1, 2], [3, 4]]`.
fn parse_wedges(s: &str, dim: usize) -> Result<Vec<[usize; 2]>, ConfigError> {
    s.split(',')
        .map(|t| {
            let (i, j) = t.trim().split_once('-').ok_or_else(|| invalid("pca.omega", "expected pairs i-j"))?;
            let i: usize = i.trim().parse().map_err(|_| invalid("pca.omega", "expected pairs i-j"))?;
            let j: usize = j.trim().parse().map_err(|_| invalid("pca.omega", "expected pairs i-j"))?;
            if i == 0 || j == 0 || i > dim || j > dim || i == j {
                return Err(invalid("pca.omega", "indices must be distinct and in 1..=dim"));
            }
            Ok([i, j])
        })
        .collect()
}

/// Raw key-value pairs with line numbers; consumed key by key.
struct Document {
    entries: BTreeMap<String, (usize, String)>,
    used: BTreeSet<String>,
}

impl Document {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((k, v)) = content.split_once('=') else {
                return Err(ConfigError::Parse { line, key: content.to_string(), reason: "expected `key = value`".into() });
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || k.contains(char::is_whitespace) {
                return Err(ConfigError::Parse { line, key: k.to_string(), reason: "malformed key".into() });
            }
            if let Some((first, _)) = entries.insert(k.to_string(), (line, v.to_string())) {
                return Err(ConfigError::Parse {
                    line,
                    key: k.to_string(),
                    reason: format!("duplicate key (first set on line {first})"),
                });
            }
        }
        Ok(Self { entries, used: BTreeSet::new() })
    }

    fn take_raw(&mut self, key: &str) -> Option<String> {
        let v = self.entries.get(key)?.1.clone();
        self.used.insert(key.to_string());
        Some(v)
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.take_raw(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| invalid(key, &format!("cannot parse `{v}`"))),
        }
    }

    fn require<T: FromStr>(&mut self, key: &str) -> Result<T, ConfigError> {
        self.take(key)?.ok_or_else(|| invalid(key, "required"))
    }

    fn keys_with_prefix(&self, prefix: &str) -> Vec<String> {
        self.entries.keys().filter(|k| k.starts_with(prefix)).cloned().collect()
    }

    fn line_of(&self, key: &str) -> usize {
        self.entries[key].0
    }

    /// Rejects the earliest key nothing asked for.
    fn finish(self, kind: Kind) -> Result<(), ConfigError> {
        let unused = self.entries.iter().filter(|(k, _)| !self.used.contains(*k)).min_by_key(|(_, (line, _))| *line);
        match unused {
            Some((key, (line, _))) => Err(ConfigError::Parse {
                line: *line,
                key: key.clone(),
                reason: format!("unknown key for kind {}", kind.name()),
            }),
            None => Ok(()),
        }
    }
}
