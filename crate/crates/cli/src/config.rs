//! Scenario files.
//!
//! A scenario is a TOML document with a top-level `scenario = "<kind>"`,
//! one `[params]` table and an optional `[output]` table:
//!
//! ```toml
//! scenario = "packet"
//!
//! [params]
//! a = 1.0
//!
//! [output]
//! path = "packet-out"
//! format = "csv"
//! ```
//!
//! Every kind has a fixed key set (see [`ScenarioKind::keys`]); unknown
//! keys, missing required keys and out-of-range values are all reported
//! together, each with its line number.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::Serialize;
use toml::de::{DeTable, DeValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Packet,
    Breathing,
    Rabi,
    Scan,
    Compton,
    Photo,
    Timescales,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 7] = [
        ScenarioKind::Packet,
        ScenarioKind::Breathing,
        ScenarioKind::Rabi,
        ScenarioKind::Scan,
        ScenarioKind::Compton,
        ScenarioKind::Photo,
        ScenarioKind::Timescales,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Packet => "packet",
            ScenarioKind::Breathing => "breathing",
            ScenarioKind::Rabi => "rabi",
            ScenarioKind::Scan => "scan",
            ScenarioKind::Compton => "compton",
            ScenarioKind::Photo => "photo",
            ScenarioKind::Timescales => "timescales",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Accepted `[params]` keys.
    pub fn keys(self) -> &'static [KeySpec] {
        match self {
            ScenarioKind::Packet => PACKET,
            ScenarioKind::Breathing => BREATHING,
            ScenarioKind::Rabi => RABI,
            ScenarioKind::Scan => SCAN,
            ScenarioKind::Compton => COMPTON,
            ScenarioKind::Photo => PHOTO,
            ScenarioKind::Timescales => TIMESCALES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ty {
    /// Closed interval unless the bound is flagged open.
    Float {
        min: f64,
        max: f64,
        open_min: bool,
    },
    Int {
        min: i64,
        max: i64,
    },
    Choice(&'static [&'static str]),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Default {
    Required,
    /// Left absent; the runner derives a value from the other parameters.
    Derived,
    Float(f64),
    Int(i64),
    Str(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeySpec {
    pub name: &'static str,
    pub ty: Ty,
    pub default: Default,
}

const fn positive(name: &'static str, max: f64, default: Default) -> KeySpec {
    KeySpec {
        name,
        ty: Ty::Float {
            min: 0.0,
            max,
            open_min: true,
        },
        default,
    }
}

const fn float(name: &'static str, min: f64, max: f64, default: Default) -> KeySpec {
    KeySpec {
        name,
        ty: Ty::Float {
            min,
            max,
            open_min: false,
        },
        default,
    }
}

const fn int(name: &'static str, min: i64, max: i64, default: Default) -> KeySpec {
    KeySpec {
        name,
        ty: Ty::Int { min, max },
        default,
    }
}

const fn choice(
    name: &'static str,
    options: &'static [&'static str],
    default: &'static str,
) -> KeySpec {
    KeySpec {
        name,
        ty: Ty::Choice(options),
        default: Default::Str(default),
    }
}

const STEPPERS: &[&str] = &["pade4", "crank_nicolson"];
const STENCILS: &[&str] = &["sixth", "fourth", "second"];
const COUPLINGS: &[&str] = &["1", "x", "x2", "x3"];
const FORMATS: &[&str] = &["csv", "json"];

const PACKET: &[KeySpec] = &[
    float("a", -10.0, 10.0, Default::Required),
    positive("mass", 1e6, Default::Float(1.0)),
    positive("omega_c", 1e6, Default::Float(1.0)),
    positive("hbar", 1e6, Default::Float(1.0)),
    positive("t_end", 1e4, Default::Derived),
    positive("dt", 1.0, Default::Derived),
    int("points", 64, 65_536, Default::Int(2048)),
    choice("stepper", STEPPERS, "pade4"),
    choice("stencil", STENCILS, "sixth"),
    int("frames", 1, 500, Default::Int(50)),
    int("x_stride", 1, 64, Default::Int(4)),
];

const BREATHING: &[KeySpec] = &[
    positive("beta", 100.0, Default::Required),
    positive("mass", 1e6, Default::Float(1.0)),
    positive("omega_c", 1e6, Default::Float(1.0)),
    positive("hbar", 1e6, Default::Float(1.0)),
    positive("t_end", 1e4, Default::Derived),
    positive("dt", 1.0, Default::Derived),
    int("points", 64, 65_536, Default::Int(2048)),
    choice("stepper", STEPPERS, "pade4"),
    choice("stencil", STENCILS, "sixth"),
    int("frames", 1, 500, Default::Int(50)),
    int("x_stride", 1, 64, Default::Int(4)),
];

const RABI: &[KeySpec] = &[
    positive("eta", 1.0, Default::Required),
    positive("omega_nm", 1e6, Default::Float(1.0)),
    float("detuning", -1e3, 1e3, Default::Float(0.0)),
    positive("t_end", 1e7, Default::Derived),
    int("samples", 10, 1_000_000, Default::Int(4000)),
];

const SCAN: &[KeySpec] = &[
    choice("coupling", COUPLINGS, "x"),
    positive("amplitude", 0.1, Default::Float(1e-3)),
    positive("omega_min", 100.0, Default::Float(0.5)),
    positive("omega_max", 100.0, Default::Float(2.5)),
    positive("omega_step", 10.0, Default::Float(0.01)),
    int("level", 0, 50, Default::Int(0)),
    int("n_max", 2, 200, Default::Int(12)),
    positive("t_probe", 1e7, Default::Derived),
    positive("mass", 1e6, Default::Float(1.0)),
    positive("omega_c", 1e6, Default::Float(1.0)),
    positive("hbar", 1e6, Default::Float(1.0)),
];

const COMPTON: &[KeySpec] = &[
    positive("energy_kev", 1e6, Default::Required),
    float("theta_min_deg", 0.0, 180.0, Default::Float(0.0)),
    float("theta_max_deg", 0.0, 180.0, Default::Float(180.0)),
    positive("theta_step_deg", 180.0, Default::Float(1.0)),
];

const PHOTO: &[KeySpec] = &[
    positive("work_function_ev", 100.0, Default::Required),
    float("energy_min_ev", 0.0, 1e3, Default::Derived),
    positive("energy_max_ev", 1e3, Default::Float(10.0)),
    int("points", 2, 100_000, Default::Int(101)),
];

const TIMESCALES: &[KeySpec] = &[float("size_angstrom", 0.1, 100.0, Default::Float(1.0))];

const OUTPUT: &[KeySpec] = &[
    KeySpec {
        name: "path",
        ty: Ty::Choice(&[]),
        default: Default::Derived,
    },
    choice("format", FORMATS, "csv"),
];

/// A validated parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Float(f64),
    Int(i64),
    Str(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    /// Every key of the kind that has a value, defaults included.
    pub params: BTreeMap<String, Value>,
    /// Output directory as written (relative paths resolve against the
    /// config file's directory).
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

impl ScenarioConfig {
    pub fn float(&self, key: &str) -> Option<f64> {
        match self.params.get(key)? {
            Value::Float(v) => Some(*v),
            Value::Int(v) => Some(*v as f64),
            Value::Str(_) => None,
        }
    }

    pub fn int(&self, key: &str) -> Option<i64> {
        match self.params.get(key)? {
            Value::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        match self.params.get(key)? {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    /// Value of a key the schema guarantees to be present.
    pub fn f(&self, key: &str) -> f64 {
        self.float(key)
            .unwrap_or_else(|| panic!("validated config lacks `{key}`"))
    }

    pub fn i(&self, key: &str) -> i64 {
        self.int(key)
            .unwrap_or_else(|| panic!("validated config lacks `{key}`"))
    }

    pub fn s(&self, key: &str) -> &str {
        self.str(key)
            .unwrap_or_else(|| panic!("validated config lacks `{key}`"))
    }
}

/// One problem found in a config file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigError {
    /// The text is not a well-formed document.
    Parse(Vec<Issue>),
    /// Well-formed, but keys or values are wrong.
    Validation(Vec<Issue>),
}

impl ConfigError {
    pub fn issues(&self) -> &[Issue] {
        match self {
            ConfigError::Parse(v) | ConfigError::Validation(v) => v,
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self {
            ConfigError::Parse(_) => "parse error",
            ConfigError::Validation(_) => "validation error",
        };
        for (i, issue) in self.issues().iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{label}: {issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())]
        .bytes()
        .filter(|&b| b == b'\n')
        .count()
        + 1
}

/// Key locations: (section, key) → line. Section "" is the top level.
fn key_lines(text: &str) -> BTreeMap<(String, String), usize> {
    let mut lines = BTreeMap::new();
    let Ok(doc) = DeTable::parse(text) else {
        return lines;
    };
    for (key, value) in doc.get_ref().iter() {
        lines.insert(
            (String::new(), key.get_ref().to_string()),
            line_of(text, key.span().start),
        );
        if let DeValue::Table(inner) = value.get_ref() {
            for (k, _) in inner.iter() {
                lines.insert(
                    (key.get_ref().to_string(), k.get_ref().to_string()),
                    line_of(text, k.span().start),
                );
            }
        }
    }
    lines
}

struct Checker<'a> {
    lines: &'a BTreeMap<(String, String), usize>,
    issues: Vec<Issue>,
}

impl Checker<'_> {
    fn line(&self, section: &str, key: &str) -> Option<usize> {
        self.lines
            .get(&(section.to_string(), key.to_string()))
            .copied()
    }

    fn push(&mut self, section: &str, key: &str, message: String) {
        let line = self.line(section, key);
        self.issues.push(Issue {
            line,
            key: Some(key.to_string()),
            message,
        });
    }

    fn table(
        &mut self,
        section: &str,
        table: Option<&toml::Table>,
        specs: &[KeySpec],
    ) -> BTreeMap<String, Value> {
        let empty = toml::Table::new();
        let table = table.unwrap_or(&empty);
        let mut out = BTreeMap::new();
        for key in table.keys() {
            if !specs.iter().any(|s| s.name == key) {
                let accepted: Vec<&str> = specs.iter().map(|s| s.name).collect();
                self.push(
                    section,
                    key,
                    format!(
                        "unknown key `{key}` in [{section}]; accepted keys: {}",
                        accepted.join(", ")
                    ),
                );
            }
        }
        for spec in specs {
            match table.get(spec.name) {
                Some(raw) => {
                    if let Some(v) = self.convert(section, spec, raw) {
                        out.insert(spec.name.to_string(), v);
                    }
                }
                None => match spec.default {
                    Default::Required => {
                        let line = self.line("", section);
                        self.issues.push(Issue {
                            line,
                            key: Some(spec.name.to_string()),
                            message: format!("missing required key `{}` in [{section}]", spec.name),
                        });
                    }
                    Default::Derived => {}
                    Default::Float(v) => {
                        out.insert(spec.name.to_string(), Value::Float(v));
                    }
                    Default::Int(v) => {
                        out.insert(spec.name.to_string(), Value::Int(v));
                    }
                    Default::Str(v) => {
                        out.insert(spec.name.to_string(), Value::Str(v.to_string()));
                    }
                },
            }
        }
        out
    }

    fn convert(&mut self, section: &str, spec: &KeySpec, raw: &toml::Value) -> Option<Value> {
        let name = spec.name;
        match spec.ty {
            Ty::Float { min, max, open_min } => {
                let v = match raw {
                    toml::Value::Float(v) => *v,
                    toml::Value::Integer(v) => *v as f64,
                    other => {
                        self.push(
                            section,
                            name,
                            format!("`{name}` must be a number, got {}", other.type_str()),
                        );
                        return None;
                    }
                };
                let below = if open_min { v <= min } else { v < min };
                if !v.is_finite() || below || v > max {
                    let lo = if open_min { "(" } else { "[" };
                    self.push(
                        section,
                        name,
                        format!("`{name}` = {v} is outside {lo}{min}, {max}]"),
                    );
                    return None;
                }
                Some(Value::Float(v))
            }
            Ty::Int { min, max } => match raw {
                toml::Value::Integer(v) if (min..=max).contains(v) => Some(Value::Int(*v)),
                toml::Value::Integer(v) => {
                    self.push(
                        section,
                        name,
                        format!("`{name}` = {v} is outside [{min}, {max}]"),
                    );
                    None
                }
                other => {
                    self.push(
                        section,
                        name,
                        format!("`{name}` must be an integer, got {}", other.type_str()),
                    );
                    None
                }
            },
            Ty::Choice(options) => match raw {
                toml::Value::String(s) if options.is_empty() || options.contains(&s.as_str()) => {
                    Some(Value::Str(s.clone()))
                }
                toml::Value::String(s) => {
                    self.push(
                        section,
                        name,
                        format!("`{name}` = \"{s}\" is not one of {}", options.join(", ")),
                    );
                    None
                }
                other => {
                    self.push(
                        section,
                        name,
                        format!("`{name}` must be a string, got {}", other.type_str()),
                    );
                    None
                }
            },
        }
    }
}

fn cross_checks(kind: ScenarioKind, params: &BTreeMap<String, Value>, checker: &mut Checker<'_>) {
    let get = |k: &str| match params.get(k) {
        Some(Value::Float(v)) => Some(*v),
        Some(Value::Int(v)) => Some(*v as f64),
        _ => None,
    };
    match kind {
        ScenarioKind::Scan => {
            if let (Some(lo), Some(hi)) = (get("omega_min"), get("omega_max")) {
                if hi <= lo {
                    checker.push(
                        "params",
                        "omega_max",
                        format!("`omega_max` = {hi} must exceed `omega_min` = {lo}"),
                    );
                }
            }
            if let (Some(level), Some(n_max)) = (get("level"), get("n_max")) {
                if level > n_max / 2.0 {
                    checker.push(
                        "params",
                        "level",
                        format!("`level` = {level} must be at most n_max/2"),
                    );
                }
            }
        }
        ScenarioKind::Rabi => {
            if let (Some(eta), Some(w)) = (get("eta"), get("omega_nm")) {
                if eta > 0.1 * w {
                    checker.push(
                        "params",
                        "eta",
                        format!("`eta` = {eta} exceeds 0.1·omega_nm; the drive is not weak"),
                    );
                }
            }
        }
        ScenarioKind::Compton => {
            if let (Some(lo), Some(hi)) = (get("theta_min_deg"), get("theta_max_deg")) {
                if hi < lo {
                    checker.push(
                        "params",
                        "theta_max_deg",
                        "`theta_max_deg` is below `theta_min_deg`".into(),
                    );
                }
            }
        }
        ScenarioKind::Photo => {
            if let (Some(lo), Some(hi)) = (get("energy_min_ev"), get("energy_max_ev")) {
                if hi <= lo {
                    checker.push(
                        "params",
                        "energy_max_ev",
                        "`energy_max_ev` must exceed `energy_min_ev`".into(),
                    );
                }
            }
        }
        _ => {}
    }
}

/// Parses and validates a scenario document.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let doc: toml::Table = toml::from_str(text).map_err(|e| {
        ConfigError::Parse(vec![Issue {
            line: e.span().map(|s| line_of(text, s.start)),
            key: None,
            message: e.message().to_string(),
        }])
    })?;
    let lines = key_lines(text);
    let mut checker = Checker {
        lines: &lines,
        issues: Vec::new(),
    };
    for key in doc.keys() {
        if !matches!(key.as_str(), "scenario" | "params" | "output") {
            checker.push(
                "",
                key,
                format!("unknown top-level key `{key}`; expected scenario, [params], [output]"),
            );
        }
    }
    let sub_table = |name: &str, checker: &mut Checker<'_>| match doc.get(name) {
        None => None,
        Some(toml::Value::Table(t)) => Some(t.clone()),
        Some(_) => {
            checker.push("", name, format!("`{name}` must be a table"));
            None
        }
    };
    let params_table = sub_table("params", &mut checker);
    let output_table = sub_table("output", &mut checker);

    let kind = match doc.get("scenario") {
        None => {
            checker.issues.push(Issue {
                line: None,
                key: Some("scenario".into()),
                message: "missing required key `scenario`".into(),
            });
            None
        }
        Some(toml::Value::String(s)) => match ScenarioKind::parse(s) {
            Some(k) => Some(k),
            None => {
                let names: Vec<&str> = ScenarioKind::ALL.iter().map(|k| k.name()).collect();
                checker.push(
                    "",
                    "scenario",
                    format!(
                        "unknown scenario `{s}`; expected one of {}",
                        names.join(", ")
                    ),
                );
                None
            }
        },
        Some(_) => {
            checker.push("", "scenario", "`scenario` must be a string".into());
            None
        }
    };
    let output = checker.table("output", output_table.as_ref(), OUTPUT);
    let Some(kind) = kind else {
        return Err(ConfigError::Validation(checker.issues));
    };
    let params = checker.table("params", params_table.as_ref(), kind.keys());
    cross_checks(kind, &params, &mut checker);
    if !checker.issues.is_empty() {
        return Err(ConfigError::Validation(checker.issues));
    }
    let format = match output.get("format") {
        Some(Value::Str(s)) if s == "json" => Format::Json,
        _ => Format::Csv,
    };
    let output_path = match output.get("path") {
        Some(Value::Str(s)) => Some(PathBuf::from(s)),
        _ => None,
    };
    Ok(ScenarioConfig {
        kind,
        params,
        output_path,
        format,
    })
}
