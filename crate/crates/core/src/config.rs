//! Plain-text run configuration.
//!
//! The format is `key = value` lines grouped under `[section]` headers. Blank
//! lines and lines starting with `#` or `;` are ignored. Every key is checked
//! against a fixed schema, so unknown sections, unknown keys and malformed
//! values are rejected with the offending line. Integer lists accept
//! inclusive ranges such as `1..8`.
//!
//! [`RunConfig::normalized`] prints the configuration with sections and keys
//! in schema order and values in canonical form; parsing that text yields the
//! same configuration again.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::index_fn::{IndexFunction, Table};
use crate::spectrum::{LeadingConstant, Univariate, DEFAULT_COUNT_CAP, DEFAULT_MATERIALIZE_LIMIT};
use crate::tract::{log_grid, ProblemFamily, SmoothnessConvention, SpectrumModel, Thresholds};

#[derive(Clone, Copy, Debug, PartialEq)]
enum Kind {
    Float,
    Int,
    Bool,
    Word(&'static [&'static str]),
    Text,
    FloatList,
    IntList,
}

const SPECTRA: &[&str] = &[
    "power_decay",
    "log_decay",
    "tensor_product",
    "mixed_integration",
    "lower_bound_speed",
    "explicit",
];

const SCHEMA: &[(&str, &[(&str, Kind)])] = &[
    (
        "family",
        &[
            ("spectrum", Kind::Word(SPECTRA)),
            ("a", Kind::Float),
            ("leading", Kind::Word(&["constant", "linear", "sublinear"])),
            ("c_bar", Kind::Float),
            ("q", Kind::Float),
            ("m", Kind::Float),
            ("M", Kind::Float),
            (
                "univariate",
                Kind::Word(&["integration", "geometric", "power", "table"]),
            ),
            ("ratio", Kind::Float),
            ("exponent", Kind::Float),
            ("values", Kind::FloatList),
            ("csv", Kind::Text),
            ("zero_tail", Kind::Bool),
            ("materialize_limit", Kind::Int),
        ],
    ),
    (
        "smoothness",
        &[
            (
                "kind",
                Kind::Word(&["power", "log_power", "sublinear_benchmark", "tabulated"]),
            ),
            ("convention", Kind::Word(&["operator", "sobolev", "general"])),
            ("p", Kind::Float),
            ("nu", Kind::Float),
            ("q", Kind::Float),
            ("scale", Kind::Float),
            ("table", Kind::Text),
            ("domain_max", Kind::Float),
        ],
    ),
    (
        "grid",
        &[
            ("delta", Kind::Float),
            ("d", Kind::Int),
            ("delta_start", Kind::Float),
            ("delta_stop", Kind::Float),
            ("delta_points", Kind::Int),
            ("delta_list", Kind::FloatList),
            ("d_list", Kind::IntList),
            ("diagonal", Kind::Bool),
            ("cap", Kind::Int),
        ],
    ),
    (
        "classify",
        &[
            ("q_tol", Kind::Float),
            ("min_shells", Kind::Int),
            ("max_decay", Kind::Float),
            ("records", Kind::Text),
        ],
    ),
    (
        "recon",
        &[
            ("mode", Kind::Word(&["adversarial", "random"])),
            ("delta", Kind::Float),
            ("levels", Kind::IntList),
            ("instances", Kind::Int),
            ("support", Kind::Int),
            ("seed", Kind::Int),
        ],
    ),
    ("svd", &[("d", Kind::Int), ("n_grid", Kind::Int), ("j_max", Kind::Int)]),
    ("spectrum", &[("count", Kind::Int)]),
    ("output", &[("csv", Kind::Text), ("json", Kind::Text)]),
];

#[derive(Clone, Debug, PartialEq)]
enum Value {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    FloatList(Vec<f64>),
    IntList(Vec<u64>),
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn lookup(section: &str, key: &str) -> Option<Kind> {
    SCHEMA
        .iter()
        .find(|(s, _)| *s == section)
        .and_then(|(_, keys)| keys.iter().find(|(k, _)| *k == key))
        .map(|(_, kind)| *kind)
}

fn parse_float(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_int(s: &str) -> Option<u64> {
    if let Ok(v) = s.parse::<u64>() {
        return Some(v);
    }
    // Scientific notation such as 1e9, when it denotes an integer.
    let f = parse_float(s)?;
    (f >= 0.0 && f.fract() == 0.0 && f < 1.8e19).then_some(f as u64)
}

fn parse_value(kind: Kind, raw: &str) -> std::result::Result<Value, String> {
    let items = || raw.split(',').map(str::trim).filter(|s| !s.is_empty());
    match kind {
        Kind::Float => parse_float(raw)
            .map(Value::Float)
            .ok_or_else(|| format!("expected a number, got {raw:?}")),
        Kind::Int => parse_int(raw)
            .map(Value::Int)
            .ok_or_else(|| format!("expected a non-negative integer, got {raw:?}")),
        Kind::Bool => match raw {
            "true" => Ok(Value::Bool(true)),
            "false" => Ok(Value::Bool(false)),
            _ => Err(format!("expected true or false, got {raw:?}")),
        },
        Kind::Word(options) => {
            if options.contains(&raw) {
                Ok(Value::Text(raw.to_string()))
            } else {
                Err(format!("expected one of {}, got {raw:?}", options.join(", ")))
            }
        }
        Kind::Text => {
            if raw.is_empty() {
                Err("expected a non-empty value".into())
            } else {
                Ok(Value::Text(raw.to_string()))
            }
        }
        Kind::FloatList => {
            let v = items()
                .map(|s| parse_float(s).ok_or_else(|| format!("expected a number, got {s:?}")))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            if v.is_empty() {
                return Err("expected a non-empty list".into());
            }
            Ok(Value::FloatList(v))
        }
        Kind::IntList => {
            let mut v = Vec::new();
            for item in items() {
                if let Some((a, b)) = item.split_once("..") {
                    let (a, b) = (parse_int(a.trim()), parse_int(b.trim()));
                    match (a, b) {
                        (Some(a), Some(b)) if a <= b && b - a < 1_000_000 => v.extend(a..=b),
                        _ => return Err(format!("malformed range {item:?}")),
                    }
                } else {
                    v.push(parse_int(item).ok_or_else(|| format!("expected a non-negative integer, got {item:?}"))?);
                }
            }
            if v.is_empty() {
                return Err("expected a non-empty list".into());
            }
            Ok(Value::IntList(v))
        }
    }
}

/// Canonical text of a float: plain decimals for moderate magnitudes and
/// exponent notation otherwise, both with the shortest round-trip digits.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn format_value(v: &Value) -> String {
    let join = |it: Vec<String>| it.join(", ");
    match v {
        Value::Float(x) => format_float(*x),
        Value::Int(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Text(s) => s.clone(),
        Value::FloatList(xs) => join(xs.iter().map(|x| format_float(*x)).collect()),
        Value::IntList(ns) => join(ns.iter().map(|n| n.to_string()).collect()),
    }
}

/// A parsed and schema-checked configuration.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    entries: BTreeMap<(usize, usize), Value>,
}

fn position(section: &str, key: &str) -> Option<(usize, usize)> {
    let si = SCHEMA.iter().position(|(s, _)| *s == section)?;
    let ki = SCHEMA[si].1.iter().position(|(k, _)| *k == key)?;
    Some((si, ki))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut section: Option<String> = None;
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            let no = no + 1;
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| config_err(format!("line {no}: malformed section header {line:?}")))?
                    .trim();
                if !SCHEMA.iter().any(|(s, _)| *s == name) {
                    return Err(config_err(format!("line {no}: unknown section [{name}]")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, raw) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {no}: expected key = value, got {line:?}")))?;
            let sec = section
                .as_deref()
                .ok_or_else(|| config_err(format!("line {no}: key outside of any section")))?;
            cfg.insert(sec, key.trim(), raw.trim())
                .map_err(|e| config_err(format!("line {no}: {e}")))?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => config_err(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    fn insert(&mut self, section: &str, key: &str, raw: &str) -> std::result::Result<(), String> {
        let kind = lookup(section, key).ok_or_else(|| format!("unknown key {key:?} in [{section}]"))?;
        let value = parse_value(kind, raw).map_err(|e| format!("{section}.{key}: {e}"))?;
        self.entries.insert(position(section, key).unwrap(), value);
        Ok(())
    }

    /// Applies an override of the form `section.key=value`.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (path, raw) = assignment
            .split_once('=')
            .ok_or_else(|| config_err(format!("override {assignment:?} must read section.key=value")))?;
        let (section, key) = path
            .trim()
            .split_once('.')
            .ok_or_else(|| config_err(format!("override key {path:?} must read section.key")))?;
        if !SCHEMA.iter().any(|(s, _)| *s == section) {
            return Err(config_err(format!("unknown section [{section}] in override")));
        }
        self.insert(section, key, raw.trim()).map_err(config_err)
    }

    /// Canonical text form.
    pub fn normalized(&self) -> String {
        let mut out = String::new();
        let mut current = None;
        for (&(si, ki), v) in &self.entries {
            if current != Some(si) {
                if current.is_some() {
                    out.push('\n');
                }
                let _ = writeln!(out, "[{}]", SCHEMA[si].0);
                current = Some(si);
            }
            let _ = writeln!(out, "{} = {}", SCHEMA[si].1[ki].0, format_value(v));
        }
        out
    }

    fn get(&self, section: &str, key: &str) -> Option<&Value> {
        self.entries.get(&position(section, key).expect("key is in the schema"))
    }

    pub fn has(&self, section: &str, key: &str) -> bool {
        self.get(section, key).is_some()
    }

    pub fn float(&self, section: &str, key: &str) -> Option<f64> {
        match self.get(section, key)? {
            Value::Float(x) => Some(*x),
            _ => None,
        }
    }

    pub fn int(&self, section: &str, key: &str) -> Option<u64> {
        match self.get(section, key)? {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn flag(&self, section: &str, key: &str) -> Option<bool> {
        match self.get(section, key)? {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn text(&self, section: &str, key: &str) -> Option<&str> {
        match self.get(section, key)? {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    fn float_list(&self, section: &str, key: &str) -> Option<&[f64]> {
        match self.get(section, key)? {
            Value::FloatList(v) => Some(v),
            _ => None,
        }
    }

    fn int_list(&self, section: &str, key: &str) -> Option<&[u64]> {
        match self.get(section, key)? {
            Value::IntList(v) => Some(v),
            _ => None,
        }
    }

    fn require_float(&self, section: &str, key: &str) -> Result<f64> {
        self.float(section, key)
            .ok_or_else(|| config_err(format!("missing {section}.{key}")))
    }

    fn require_int(&self, section: &str, key: &str) -> Result<u64> {
        self.int(section, key)
            .ok_or_else(|| config_err(format!("missing {section}.{key}")))
    }

    pub fn path(&self, section: &str, key: &str) -> Option<PathBuf> {
        self.text(section, key).map(PathBuf::from)
    }

    /// The dimension-indexed spectrum model.
    pub fn spectrum_model(&self) -> Result<SpectrumModel> {
        let spectrum = self
            .text("family", "spectrum")
            .ok_or_else(|| config_err("missing family.spectrum"))?;
        let c_bar = self.float("family", "c_bar").unwrap_or(1.0);
        Ok(match spectrum {
            "power_decay" => {
                let leading = match self.text("family", "leading").unwrap_or("constant") {
                    "constant" => LeadingConstant::Constant(c_bar),
                    "linear" => LeadingConstant::Linear(c_bar),
                    _ => LeadingConstant::SublinearPower(self.require_float("family", "q")?),
                };
                SpectrumModel::PowerDecay {
                    a: self.require_float("family", "a")?,
                    leading,
                    m: self.float("family", "m").unwrap_or(1.0),
                    big_m: self.float("family", "M").unwrap_or(1.0),
                }
            }
            "log_decay" => SpectrumModel::LogDecay,
            "tensor_product" => {
                let univariate = match self.text("family", "univariate").unwrap_or("integration") {
                    "integration" => Univariate::Integration,
                    "geometric" => Univariate::geometric(self.require_float("family", "ratio")?)?,
                    "power" => Univariate::power(self.require_float("family", "exponent")?)?,
                    _ => Univariate::table(
                        self.float_list("family", "values")
                            .ok_or_else(|| config_err("missing family.values"))?
                            .to_vec(),
                    )?,
                };
                SpectrumModel::TensorProduct { univariate }
            }
            "mixed_integration" => SpectrumModel::MixedIntegration,
            "lower_bound_speed" => SpectrumModel::LowerBoundSpeed { c_bar },
            _ => {
                let zero_tail = self.flag("family", "zero_tail").unwrap_or(false);
                let values = match (self.float_list("family", "values"), self.path("family", "csv")) {
                    (Some(v), None) => v.to_vec(),
                    (None, Some(p)) => match crate::spectrum::Spectrum::explicit_from_csv(&p, zero_tail)?.kind() {
                        crate::spectrum::SpectrumKind::Explicit { values, .. } => values.clone(),
                        _ => unreachable!(),
                    },
                    _ => {
                        return Err(config_err(
                            "an explicit spectrum needs exactly one of family.values or family.csv",
                        ))
                    }
                };
                SpectrumModel::Explicit { values, zero_tail }
            }
        })
    }

    pub fn materialize_limit(&self) -> usize {
        self.int("family", "materialize_limit")
            .map_or(DEFAULT_MATERIALIZE_LIMIT, |n| n as usize)
    }

    /// The smoothness index function and its convention.
    pub fn smoothness(&self) -> Result<(IndexFunction, SmoothnessConvention)> {
        let kind = self.text("smoothness", "kind").unwrap_or("power");
        let convention = self.text("smoothness", "convention");
        let (phi, convention) = match kind {
            "power" => {
                let p = self.require_float("smoothness", "p")?;
                match convention.unwrap_or("operator") {
                    "operator" => (IndexFunction::power(p)?, SmoothnessConvention::Operator),
                    "sobolev" => {
                        let a = self
                            .float("family", "a")
                            .filter(|_| self.text("family", "spectrum") == Some("power_decay"))
                            .ok_or_else(|| config_err("the sobolev convention needs a power_decay family with a"))?;
                        (IndexFunction::power(p / (2.0 * a))?, SmoothnessConvention::Sobolev)
                    }
                    _ => return Err(config_err("power smoothness needs convention operator or sobolev")),
                }
            }
            other => {
                if convention.is_some_and(|c| c != "general") {
                    return Err(config_err(format!(
                        "smoothness kind {other} only supports convention general"
                    )));
                }
                let phi = match other {
                    "log_power" => IndexFunction::log_power(self.require_float("smoothness", "nu")?)?,
                    "sublinear_benchmark" => IndexFunction::sublinear_benchmark_scaled(
                        self.require_float("smoothness", "q")?,
                        self.float("smoothness", "scale").unwrap_or(1.0),
                    )?,
                    _ => {
                        let path = self
                            .path("smoothness", "table")
                            .ok_or_else(|| config_err("missing smoothness.table"))?;
                        IndexFunction::tabulated(read_table(&path)?)
                    }
                };
                (phi, SmoothnessConvention::General)
            }
        };
        let phi = match self.float("smoothness", "domain_max") {
            Some(m) => phi.with_domain_max(m)?,
            None => phi,
        };
        Ok((phi, convention))
    }

    pub fn family(&self) -> Result<ProblemFamily> {
        let model = self.spectrum_model()?;
        let (phi, convention) = self.smoothness()?;
        let family = match convention {
            SmoothnessConvention::General => ProblemFamily::new(model, phi)?,
            _ => {
                let p = self.require_float("smoothness", "p")?;
                ProblemFamily::with_power_smoothness(model, p, convention)?
            }
        };
        Ok(family.with_materialize_limit(self.materialize_limit()))
    }

    /// Noise levels: `delta_list`, else the log grid from `delta_start` to
    /// `delta_stop`, else the single `delta`.
    pub fn deltas(&self) -> Result<Vec<f64>> {
        if let Some(v) = self.float_list("grid", "delta_list") {
            return Ok(v.to_vec());
        }
        if self.has("grid", "delta_start") || self.has("grid", "delta_stop") {
            let points = self.require_int("grid", "delta_points")? as usize;
            return log_grid(
                self.require_float("grid", "delta_start")?,
                self.require_float("grid", "delta_stop")?,
                points,
            )
            .map_err(|e| config_err(e.to_string()));
        }
        Ok(vec![self.require_float("grid", "delta")?])
    }

    pub fn dims(&self) -> Result<Vec<u32>> {
        let raw: Vec<u64> = match self.int_list("grid", "d_list") {
            Some(v) => v.to_vec(),
            None => vec![self.require_int("grid", "d")?],
        };
        raw.into_iter()
            .map(|d| {
                u32::try_from(d)
                    .ok()
                    .filter(|&d| d >= 1)
                    .ok_or_else(|| config_err(format!("dimension {d} out of range")))
            })
            .collect()
    }

    /// Grid points in sweep order; `diagonal = true` pairs each `d` with
    /// `δ = 1/d`.
    pub fn points(&self) -> Result<Vec<(f64, u32)>> {
        let dims = self.dims()?;
        if self.flag("grid", "diagonal").unwrap_or(false) {
            return Ok(dims.into_iter().map(|d| (1.0 / d as f64, d)).collect());
        }
        let deltas = self.deltas()?;
        Ok(dims.iter().flat_map(|&d| deltas.iter().map(move |&x| (x, d))).collect())
    }

    /// The single `(δ, d)` point of a `kstar` run.
    pub fn single_point(&self) -> Result<(f64, u32)> {
        let pts = self.points()?;
        match pts.as_slice() {
            [p] => Ok(*p),
            _ => Err(config_err(format!(
                "expected a single (delta, d) point, the grid has {}",
                pts.len()
            ))),
        }
    }

    pub fn cap(&self) -> u64 {
        self.int("grid", "cap").unwrap_or(DEFAULT_COUNT_CAP)
    }

    pub fn thresholds(&self) -> Thresholds {
        let def = Thresholds::default();
        Thresholds {
            q_tol: self.float("classify", "q_tol").unwrap_or(def.q_tol),
            min_shells: self
                .int("classify", "min_shells")
                .map_or(def.min_shells, |n| n as usize),
            max_decay: self.float("classify", "max_decay").unwrap_or(def.max_decay),
        }
    }

    pub fn seed(&self) -> u64 {
        self.int("recon", "seed").unwrap_or(0)
    }

    pub fn levels(&self) -> Option<Vec<usize>> {
        self.int_list("recon", "levels")
            .map(|v| v.iter().map(|&n| n as usize).collect())
    }
}

/// Reads `(t, φ(t))` pairs from a two-column CSV file; a non-numeric first
/// row is treated as a header.
pub fn read_table(path: &Path) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut points = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let parsed = (rec.get(0).and_then(parse_float), rec.get(1).and_then(parse_float));
        match parsed {
            (Some(t), Some(p)) => points.push((t, p)),
            _ if i == 0 => continue,
            _ => {
                return Err(config_err(format!(
                    "{}: row {} is not a (t, phi) pair",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Table::new(&points)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = "
# comment
[family]
spectrum = power_decay
a = 1
[smoothness]
p = 0.5
[grid]
delta = 0.01
d = 1
cap = 1e9
";

    #[test]
    fn parses_and_builds() {
        let c = RunConfig::parse(EXAMPLE).unwrap();
        let f = c.family().unwrap();
        assert_eq!(f.convention(), SmoothnessConvention::Operator);
        assert_eq!(c.single_point().unwrap(), (0.01, 1));
        assert_eq!(c.cap(), 1_000_000_000);
    }

    #[test]
    fn normalized_round_trip() {
        let c = RunConfig::parse(EXAMPLE).unwrap();
        let n = c.normalized();
        let again = RunConfig::parse(&n).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.normalized(), n);
        assert!(n.starts_with("[family]\nspectrum = power_decay\na = 1\n"));
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(RunConfig::parse("[family]\nbogus = 1\n").is_err());
        assert!(RunConfig::parse("[nowhere]\n").is_err());
        assert!(RunConfig::parse("a = 1\n").is_err());
        assert!(RunConfig::parse("[grid]\ndelta = abc\n").is_err());
        assert!(RunConfig::parse("[grid]\nd = -1\n").is_err());
        assert!(RunConfig::parse("[family]\nspectrum = nope\n").is_err());
        assert!(RunConfig::parse("[grid]\ndelta 0.1\n").is_err());
    }

    #[test]
    fn overrides() {
        let mut c = RunConfig::parse(EXAMPLE).unwrap();
        c.set("grid.delta=0.001").unwrap();
        assert_eq!(c.float("grid", "delta"), Some(0.001));
        assert!(c.set("grid.nothing=1").is_err());
        assert!(c.set("novalue").is_err());
    }

    #[test]
    fn ranges_and_grids() {
        let c = RunConfig::parse("[grid]\nd_list = 1..3, 8\ndelta_start = 0.1\ndelta_stop = 0.001\ndelta_points = 3\n")
            .unwrap();
        assert_eq!(c.dims().unwrap(), vec![1, 2, 3, 8]);
        let deltas = c.deltas().unwrap();
        assert_eq!(deltas.len(), 3);
        assert_eq!(c.points().unwrap().len(), 12);
        let c = RunConfig::parse("[grid]\nd_list = 2, 4\ndiagonal = true\n").unwrap();
        assert_eq!(c.points().unwrap(), vec![(0.5, 2), (0.25, 4)]);
    }

    #[test]
    fn float_format() {
        assert_eq!(format_float(0.01), "0.01");
        assert_eq!(format_float(1e-6), "1e-6");
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(1e20), "1e20");
    }
}
