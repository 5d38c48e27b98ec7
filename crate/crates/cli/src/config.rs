//! Line-oriented `key = value` experiment configs.
//!
//! Top-level keys come first, then an optional `[profile]` section and one
//! section named after the command. See `docs/config.md`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hardylab::function::{DegreeProfile, FunctionClass, FunctionExpr, Precision};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Classify,
    Sequence,
    SumsetGaps,
    BasisOrder,
    Residues,
    Density,
    CircleCheck,
    ExpsumScan,
    VdcScan,
    HkSolve,
    Represent,
    RepresentScan,
}

impl Command {
    pub const ALL: [Command; 12] = [
        Command::Classify,
        Command::Sequence,
        Command::SumsetGaps,
        Command::BasisOrder,
        Command::Residues,
        Command::Density,
        Command::CircleCheck,
        Command::ExpsumScan,
        Command::VdcScan,
        Command::HkSolve,
        Command::Represent,
        Command::RepresentScan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Sequence => "sequence",
            Command::SumsetGaps => "sumset-gaps",
            Command::BasisOrder => "basis-order",
            Command::Residues => "residues",
            Command::Density => "density",
            Command::CircleCheck => "circle-check",
            Command::ExpsumScan => "expsum-scan",
            Command::VdcScan => "vdc-scan",
            Command::HkSolve => "hk-solve",
            Command::Represent => "represent",
            Command::RepresentScan => "represent-scan",
        }
    }

    /// hk-solve is the only command without a function.
    pub fn needs_function(self) -> bool {
        self != Command::HkSolve
    }

    pub fn keys(self) -> &'static [KeySpec] {
        use self::Default::*;
        use Kind::*;
        const BITSET: KeySpec = KeySpec::new("bitset_budget", Int, Value("8589934592"));
        const NODES: KeySpec = KeySpec::new("node_budget", Int, Value("20000000"));
        const PANELS: KeySpec = KeySpec::new("panel_budget", Int, Value("10000000"));
        match self {
            Command::Classify => const { &[] },
            Command::Sequence => {
                const { &[KeySpec::new("n_start", Int, Value("1")), KeySpec::new("count", Int, Required)] }
            }
            Command::SumsetGaps => {
                const {
                    &[
                        KeySpec::new("s", Int, Required),
                        KeySpec::new("lo", Int, Required),
                        KeySpec::new("hi", Int, Required),
                        KeySpec::new("n_start", Int, Value("1")),
                        KeySpec::new("count", Int, Auto),
                        KeySpec::new("oracle_hi", Int, Value("2000")),
                        KeySpec::new("dump", Bool, Value("false")),
                        BITSET,
                    ]
                }
            }
            Command::BasisOrder => {
                const {
                    &[
                        KeySpec::new("s_max", Int, Required),
                        KeySpec::new("lo", Int, Required),
                        KeySpec::new("hi", Int, Required),
                        KeySpec::new("n_start", Int, Value("1")),
                        KeySpec::new("count", Int, Auto),
                        KeySpec::new("lemma3_s", Int, Auto),
                        KeySpec::new("lemma3_from", Int, Auto),
                        KeySpec::new("lemma3_count", Int, Value("0")),
                        BITSET,
                    ]
                }
            }
            Command::Residues => {
                const { &[KeySpec::new("q_max", Int, Value("20")), KeySpec::new("n_max", Int, Required)] }
            }
            Command::Density => {
                const {
                    &[
                        KeySpec::new("q", IntList, Value("1")),
                        KeySpec::new("n_max", Int, Required),
                        KeySpec::new("bins", Int, Value("10")),
                        KeySpec::new("tolerance", Real, Value("0.05")),
                    ]
                }
            }
            Command::CircleCheck => {
                const {
                    &[
                        KeySpec::new("N", Int, Required),
                        KeySpec::new("s", Int, Required),
                        KeySpec::new("x0", Real, Auto),
                        KeySpec::new("x1", Real, Auto),
                        KeySpec::new("grid", Int, Auto),
                        KeySpec::new("identity_max_work", Real, Value("1e9")),
                        KeySpec::new("major", Bool, Value("true")),
                        KeySpec::new("minor", Bool, Value("true")),
                        KeySpec::new("samples", Int, Value("1000")),
                        KeySpec::new("sigma", Real, Auto),
                        PANELS,
                    ]
                }
            }
            Command::ExpsumScan => {
                const {
                    &[
                        KeySpec::new("variant", Choice(&["S", "T"]), Value("S")),
                        KeySpec::new("lo", Real, Auto),
                        KeySpec::new("hi", Real, Auto),
                        KeySpec::new("N", Int, Auto),
                        KeySpec::new("s", Int, Auto),
                        KeySpec::new("sampler", Choice(&["linear", "minor"]), Value("linear")),
                        KeySpec::new("alpha_min", Real, Value("0")),
                        KeySpec::new("alpha_max", Real, Value("0.5")),
                        KeySpec::new("samples", Int, Value("1000")),
                    ]
                }
            }
            Command::VdcScan => {
                const {
                    &[
                        KeySpec::new("k", Int, Value("2")),
                        KeySpec::new("beta_min", Real, Required),
                        KeySpec::new("beta_max", Real, Required),
                        KeySpec::new("beta_points", Int, Value("10")),
                        KeySpec::new("p_min", Real, Required),
                        KeySpec::new("p_max", Real, Required),
                        KeySpec::new("p_points", Int, Value("10")),
                    ]
                }
            }
            Command::HkSolve => {
                const {
                    &[
                        KeySpec::new("k", Int, Required),
                        KeySpec::new("s", Int, Required),
                        KeySpec::new("targets", IntList, Required),
                        KeySpec::new("xmax", Int, Required),
                        NODES,
                    ]
                }
            }
            Command::Represent => {
                const {
                    &[
                        KeySpec::new("N", Int, Required),
                        KeySpec::new("s", Int, Required),
                        KeySpec::new("delta", Real, Value("0.25")),
                        KeySpec::new("xmax", Int, Auto),
                        NODES,
                    ]
                }
            }
            Command::RepresentScan => {
                const {
                    &[
                        KeySpec::new("n_start", Int, Required),
                        KeySpec::new("count", Int, Required),
                        KeySpec::new("s", Int, Auto),
                        KeySpec::new("delta", Real, Value("0.25")),
                        KeySpec::new("xmax", Int, Auto),
                        KeySpec::new("pilots", IntList, Auto),
                        KeySpec::new("s_min", Int, Value("2")),
                        KeySpec::new("s_max", Int, Value("16")),
                        NODES,
                    ]
                }
            }
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| s.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kind {
    Int,
    Real,
    Bool,
    IntList,
    Choice(&'static [&'static str]),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Default {
    Required,
    /// Derived at run time when absent; `auto` may also be written explicitly.
    Auto,
    Value(&'static str),
}

#[derive(Clone, Copy, Debug)]
pub struct KeySpec {
    pub name: &'static str,
    pub kind: Kind,
    pub default: Default,
}

impl KeySpec {
    const fn new(name: &'static str, kind: Kind, default: Default) -> Self {
        KeySpec { name, kind, default }
    }

    fn production(&self) -> String {
        let v = match self.kind {
            Kind::Int => "integer".to_string(),
            Kind::Real => "real".to_string(),
            Kind::Bool => "true | false".to_string(),
            Kind::IntList => "integer {\",\" integer}".to_string(),
            Kind::Choice(c) => c.join(" | "),
        };
        if self.default == Default::Auto {
            format!("{} = {v} | auto", self.name)
        } else {
            format!("{} = {v}", self.name)
        }
    }
}

const TOP_KEYS: [&str; 5] = ["function", "command", "output", "precision", "parallelism"];
const PROFILE_KEYS: [&str; 5] = ["class", "d_f", "c_f", "subpolynomial", "poly"];

/// Where a setting came from, for error messages.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Origin {
    Line(usize),
    Flag(String),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Flag(name) => write!(f, "flag --{name}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub source: String,
    pub origin: Origin,
    pub message: String,
    /// Grammar production the offending input should match.
    pub expected: Option<String>,
    pub suggestion: Option<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.source, self.origin, self.message)?;
        if let Some(e) = &self.expected {
            write!(f, "\n  expected: {e}")?;
        }
        if let Some(s) = &self.suggestion {
            write!(f, "\n  help: did you mean `{s}`?")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Setting {
    pub value: String,
    pub origin: Origin,
}

/// Raw sections before validation.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    pub source: String,
    pub top: BTreeMap<String, Setting>,
    pub profile: Option<(Origin, BTreeMap<String, Setting>)>,
    /// Section name, its header origin and its entries.
    pub section: Option<(String, Origin, BTreeMap<String, Setting>)>,
    pub end_line: usize,
}

/// Command parameters after validation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Params {
    #[serde(skip)]
    pub command: Command,
    pub entries: BTreeMap<String, Setting>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub source: String,
    pub command: Command,
    /// Function text as written.
    pub function_text: Option<String>,
    #[serde(skip)]
    pub function: Option<FunctionExpr>,
    pub declared: Option<DegreeProfile>,
    pub params: Params,
    pub output: PathBuf,
    #[serde(serialize_with = "ser_precision")]
    pub precision: Precision,
    pub parallelism: usize,
}

fn ser_precision<S: serde::Serializer>(p: &Precision, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(match p {
        Precision::Double => "double",
        Precision::Extended => "extended",
    })
}

fn suggest<'a>(word: &str, candidates: impl IntoIterator<Item = &'a str>) -> Option<String> {
    candidates
        .into_iter()
        .map(|c| (strsim::levenshtein(word, c), c))
        .filter(|(d, c)| *d <= 2.max(c.len() / 3))
        .min()
        .map(|(_, c)| c.to_string())
}

impl RawConfig {
    fn err(&self, origin: Origin, message: impl Into<String>) -> ConfigError {
        ConfigError { source: self.source.clone(), origin, message: message.into(), expected: None, suggestion: None }
    }
}

impl RawConfig {
    /// A top-level setting from a command-line flag; replaces any file value.
    pub fn set_top(&mut self, key: &str, value: &str, flag: &str) {
        self.top.insert(key.into(), Setting { value: value.into(), origin: Origin::Flag(flag.into()) });
    }

    pub fn set_profile(&mut self, key: &str, value: &str, flag: &str) {
        let (_, map) = self.profile.get_or_insert_with(|| (Origin::Flag(flag.into()), BTreeMap::new()));
        map.insert(key.into(), Setting { value: value.into(), origin: Origin::Flag(flag.into()) });
    }

    /// A command parameter from a flag, creating the section if the file had none.
    pub fn set_param(&mut self, command: Command, key: &str, value: &str, flag: &str) {
        let (_, _, map) =
            self.section.get_or_insert_with(|| (command.name().into(), Origin::Flag(flag.into()), BTreeMap::new()));
        map.insert(key.into(), Setting { value: value.into(), origin: Origin::Flag(flag.into()) });
    }
}

/// Split `text` into sections; no key validation yet.
pub fn parse_raw(text: &str, source: &str) -> Result<RawConfig, ConfigError> {
    let mut raw = RawConfig { source: source.to_string(), ..RawConfig::default() };
    // 0 = top level, 1 = profile, 2 = command section
    let mut state = 0;
    let mut lines = 0;
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        lines = n;
        let body = strip_comment(line).trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let name = rest.strip_suffix(']').map(str::trim).ok_or_else(|| ConfigError {
                expected: Some("section = \"[\" name \"]\"".into()),
                ..raw.err(Origin::Line(n), "unterminated section header")
            })?;
            if name == "profile" {
                if raw.profile.is_some() || state == 2 {
                    return Err(raw.err(Origin::Line(n), "[profile] must appear once, before the command section"));
                }
                raw.profile = Some((Origin::Line(n), BTreeMap::new()));
                state = 1;
            } else {
                if raw.section.is_some() {
                    return Err(raw.err(Origin::Line(n), format!("second command section [{name}]")));
                }
                if name.parse::<Command>().is_err() {
                    let names = Command::ALL.iter().map(|c| c.name());
                    return Err(ConfigError {
                        expected: Some("\"[profile]\" | \"[\" command \"]\"".into()),
                        suggestion: suggest(name, names),
                        ..raw.err(Origin::Line(n), format!("unknown section [{name}]"))
                    });
                }
                raw.section = Some((name.to_string(), Origin::Line(n), BTreeMap::new()));
                state = 2;
            }
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| ConfigError {
            expected: Some("entry = key \"=\" value".into()),
            ..raw.err(Origin::Line(n), format!("expected `key = value`, found `{body}`"))
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(ConfigError {
                expected: Some("key = letter {letter | digit | \"_\"}".into()),
                ..raw.err(Origin::Line(n), format!("invalid key `{key}`"))
            });
        }
        if value.is_empty() {
            return Err(raw.err(Origin::Line(n), format!("empty value for `{key}`")));
        }
        let map = match state {
            0 => &mut raw.top,
            1 => &mut raw.profile.as_mut().unwrap().1,
            _ => &mut raw.section.as_mut().unwrap().2,
        };
        if let Some(prev) = map.get(key) {
            let msg = format!("duplicate key `{key}` (first set on {})", prev.origin);
            return Err(raw.err(Origin::Line(n), msg));
        }
        map.insert(key.to_string(), Setting { value: value.to_string(), origin: Origin::Line(n) });
    }
    raw.end_line = lines;
    Ok(raw)
}

/// `#` starts a comment when it begins the line or follows whitespace.
fn strip_comment(line: &str) -> &str {
    let b = line.as_bytes();
    for (i, &c) in b.iter().enumerate() {
        if c == b'#' && (i == 0 || b[i - 1].is_ascii_whitespace()) {
            return &line[..i];
        }
    }
    line
}

pub fn parse_int(v: &str) -> Option<u128> {
    let t: String = v.chars().filter(|&c| c != '_').collect();
    if let Ok(x) = t.parse::<u128>() {
        return Some(x);
    }
    // 1e6 style, only when exact
    let x: f64 = t.parse().ok()?;
    (x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x <= 9.007_199_254_740_992e15).then_some(x as u128)
}

pub fn parse_real(v: &str) -> Option<f64> {
    v.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn check_kind(spec: &KeySpec, value: &str) -> bool {
    if value == "auto" {
        return spec.default == Default::Auto;
    }
    match spec.kind {
        Kind::Int => parse_int(value).is_some(),
        Kind::Real => parse_real(value).is_some(),
        Kind::Bool => value == "true" || value == "false",
        Kind::IntList => value.split(',').all(|p| parse_int(p.trim()).is_some()),
        Kind::Choice(c) => c.contains(&value),
    }
}

/// Check every key of `entries` against `specs` and fill nothing in; defaults are applied on access.
fn validate_params(
    raw: &RawConfig,
    command: Command,
    entries: BTreeMap<String, Setting>,
) -> Result<Params, ConfigError> {
    let specs = command.keys();
    for (key, s) in &entries {
        let Some(spec) = specs.iter().find(|k| k.name == key) else {
            let all: Vec<&str> = specs.iter().map(|k| k.name).collect();
            return Err(ConfigError {
                expected: Some(if all.is_empty() {
                    format!("no keys ([{command}] takes no parameters)")
                } else {
                    format!("one of: {}", all.join(", "))
                }),
                suggestion: suggest(key, all.iter().copied()),
                ..raw.err(s.origin.clone(), format!("unknown key `{key}` for {command}"))
            });
        };
        if !check_kind(spec, &s.value) {
            return Err(ConfigError {
                expected: Some(spec.production()),
                ..raw.err(s.origin.clone(), format!("bad value `{}` for `{key}`", s.value))
            });
        }
    }
    if let Some(spec) = specs.iter().find(|k| k.default == Default::Required && !entries.contains_key(k.name)) {
        let origin = raw.section.as_ref().map(|s| s.1.clone()).unwrap_or(Origin::Line(raw.end_line));
        return Err(ConfigError {
            expected: Some(spec.production()),
            ..raw.err(origin, format!("missing required key `{}` for {command}", spec.name))
        });
    }
    Ok(Params { command, entries })
}

fn parse_profile(
    raw: &RawConfig,
    origin: &Origin,
    map: &BTreeMap<String, Setting>,
) -> Result<DegreeProfile, ConfigError> {
    for (k, s) in map {
        if !PROFILE_KEYS.contains(&k.as_str()) {
            return Err(ConfigError {
                expected: Some(format!("one of: {}", PROFILE_KEYS.join(", "))),
                suggestion: suggest(k, PROFILE_KEYS),
                ..raw.err(s.origin.clone(), format!("unknown profile key `{k}`"))
            });
        }
    }
    let bad = |s: &Setting, what: &str| ConfigError {
        expected: Some(what.to_string()),
        ..raw.err(s.origin.clone(), format!("bad value `{}`", s.value))
    };
    let class_s = map.get("class").ok_or_else(|| ConfigError {
        expected: Some("class = I | II | III".into()),
        ..raw.err(origin.clone(), "profile needs `class`")
    })?;
    let class = match class_s.value.as_str() {
        "I" => FunctionClass::I,
        "II" => FunctionClass::II,
        "III" => FunctionClass::III,
        _ => return Err(bad(class_s, "class = I | II | III")),
    };
    let poly = match map.get("poly") {
        Some(s) => s
            .value
            .split(',')
            .map(|p| parse_real(p.trim()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| bad(s, "poly = real {\",\" real}"))?,
        None => Vec::new(),
    };
    let c_f = match map.get("c_f") {
        Some(s) => parse_real(&s.value).ok_or_else(|| bad(s, "c_f = real"))?,
        None => 0.0,
    };
    let d_f = match map.get("d_f") {
        Some(s) => parse_int(&s.value).ok_or_else(|| bad(s, "d_f = integer"))? as u32,
        None if class == FunctionClass::II => c_f.round().max(0.0) as u32,
        None => poly.len() as u32,
    };
    let subpolynomial = match map.get("subpolynomial") {
        Some(s) => match s.value.as_str() {
            "true" => true,
            "false" => false,
            _ => return Err(bad(s, "subpolynomial = true | false")),
        },
        None => class == FunctionClass::I,
    };
    Ok(DegreeProfile { class, d_f, c_f, c_real: f64::NAN, subpolynomial_remainder: subpolynomial, poly_part: poly })
}

/// Validate a raw config into an [`ExperimentConfig`].
pub fn build_config(raw: RawConfig) -> Result<ExperimentConfig, ConfigError> {
    for (k, s) in &raw.top {
        if !TOP_KEYS.contains(&k.as_str()) {
            return Err(ConfigError {
                expected: Some(format!("one of: {} (or a [section])", TOP_KEYS.join(", "))),
                suggestion: suggest(k, TOP_KEYS),
                ..raw.err(s.origin.clone(), format!("unknown top-level key `{k}`"))
            });
        }
    }
    let eof = Origin::Line(raw.end_line);
    let cmd_s = raw.top.get("command").ok_or_else(|| ConfigError {
        expected: Some("command = classify | sequence | ... | represent-scan".into()),
        ..raw.err(eof.clone(), "missing required key `command`")
    })?;
    let command: Command = cmd_s.value.parse().map_err(|_| ConfigError {
        expected: Some(format!("command = {}", Command::ALL.map(|c| c.name()).join(" | "))),
        suggestion: suggest(&cmd_s.value, Command::ALL.iter().map(|c| c.name())),
        ..raw.err(cmd_s.origin.clone(), format!("unknown command `{}`", cmd_s.value))
    })?;
    let (function_text, function) = match raw.top.get("function") {
        Some(s) => {
            let f = FunctionExpr::parse(&s.value).map_err(|e| ConfigError {
                expected: Some("function = expr [\";\" \"shift\" \"=\" real] (see docs/grammar.md)".into()),
                ..raw.err(s.origin.clone(), format!("function does not parse: {e}"))
            })?;
            (Some(s.value.clone()), Some(f))
        }
        None if command.needs_function() => {
            return Err(ConfigError {
                expected: Some("function = expr".into()),
                ..raw.err(eof, format!("missing required key `function` for {command}"))
            })
        }
        None => (None, None),
    };
    let precision = match raw.top.get("precision") {
        None => Precision::Double,
        Some(s) => match s.value.as_str() {
            "double" => Precision::Double,
            "extended" => Precision::Extended,
            _ => {
                return Err(ConfigError {
                    expected: Some("precision = double | extended".into()),
                    ..raw.err(s.origin.clone(), format!("bad precision `{}`", s.value))
                })
            }
        },
    };
    let parallelism = match raw.top.get("parallelism") {
        None => 0,
        Some(s) => parse_int(&s.value).filter(|&p| p <= 1024).ok_or_else(|| ConfigError {
            expected: Some("parallelism = integer (0 = all cores)".into()),
            ..raw.err(s.origin.clone(), format!("bad parallelism `{}`", s.value))
        })? as usize,
    };
    let output = PathBuf::from(raw.top.get("output").map(|s| s.value.as_str()).unwrap_or("out"));
    let declared = match &raw.profile {
        Some((origin, map)) => Some(parse_profile(&raw, origin, map)?),
        None => None,
    };
    let entries = match &raw.section {
        Some((name, origin, map)) => {
            if name != command.name() {
                return Err(ConfigError {
                    expected: Some(format!("[{command}]")),
                    ..raw.err(origin.clone(), format!("section [{name}] does not match command `{command}`"))
                });
            }
            map.clone()
        }
        None => BTreeMap::new(),
    };
    let params = validate_params(&raw, command, entries)?;
    Ok(ExperimentConfig {
        source: raw.source.clone(),
        command,
        function_text,
        function,
        declared,
        params,
        output,
        precision,
        parallelism,
    })
}

pub fn parse_config(text: &str, source: &str) -> Result<ExperimentConfig, ConfigError> {
    build_config(parse_raw(text, source)?)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let source = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        source: source.clone(),
        origin: Origin::Line(0),
        message: format!("cannot read config: {e}"),
        expected: None,
        suggestion: None,
    })?;
    parse_config(&text, &source)
}

impl Params {
    fn spec(&self, key: &str) -> &'static KeySpec {
        self.command
            .keys()
            .iter()
            .find(|k| k.name == key)
            .unwrap_or_else(|| panic!("{key} is not a {} key", self.command))
    }

    /// The written value, or the default; `None` for auto.
    fn raw(&self, key: &str) -> Option<&str> {
        let spec = self.spec(key);
        match self.entries.get(key) {
            Some(s) if s.value == "auto" => None,
            Some(s) => Some(s.value.as_str()),
            None => match spec.default {
                Default::Value(v) => Some(v),
                _ => None,
            },
        }
    }

    pub fn int(&self, key: &str) -> Option<u128> {
        self.raw(key).map(|v| parse_int(v).expect("validated"))
    }

    pub fn u64(&self, key: &str) -> Option<u64> {
        self.int(key).map(|v| v.min(u64::MAX as u128) as u64)
    }

    pub fn real(&self, key: &str) -> Option<f64> {
        self.raw(key).map(|v| parse_real(v).expect("validated"))
    }

    pub fn flag(&self, key: &str) -> bool {
        self.raw(key) == Some("true")
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        self.raw(key)
    }

    pub fn int_list(&self, key: &str) -> Option<Vec<u128>> {
        self.raw(key).map(|v| v.split(',').map(|p| parse_int(p.trim()).expect("validated")).collect())
    }

    /// Value of a required key (checked at load time).
    pub fn req(&self, key: &str) -> u64 {
        self.u64(key).expect("required key")
    }
}
