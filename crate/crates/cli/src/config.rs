//! Flat TOML configuration with command-line overrides.
//!
//! A run is described by one table of `key = value` pairs. Values come from
//! the built-in defaults, then the `--config` file, then each `--set` flag in
//! order. Every key is consumed exactly once while the typed spec is built;
//! anything left over is reported as an unknown key.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use mvoac::guidance::Strategy;
use mvoac::{Alpha, ChannelKind};
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Gen,
    Pmepr,
    Cer,
    Lemma1,
    Uav,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Gen => "gen",
            Command::Pmepr => "pmepr",
            Command::Cer => "cer",
            Command::Lemma1 => "lemma1",
            Command::Uav => "uav",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Why a TOML value could not become the requested type.
pub enum Mismatch {
    Type,
    Value(String),
}

/// Conversion between TOML values and the typed parameters.
pub trait TomlValue: Sized {
    const EXPECTED: &'static str;
    fn from_toml(v: &Value) -> Result<Self, Mismatch>;
    fn to_toml(&self) -> Value;
}

fn describe(v: &Value) -> String {
    match v {
        Value::String(s) => format!("string:{s}"),
        other => format!("{}:{other}", other.type_str()),
    }
}

macro_rules! unsigned {
    ($($t:ty),*) => {$(
        impl TomlValue for $t {
            const EXPECTED: &'static str = "non-negative integer";
            fn from_toml(v: &Value) -> Result<Self, Mismatch> {
                let i = v.as_integer().ok_or(Mismatch::Type)?;
                <$t>::try_from(i).map_err(|_| Mismatch::Value(format!("{i} is out of range")))
            }
            fn to_toml(&self) -> Value {
                Value::Integer(*self as i64)
            }
        }
    )*};
}

unsigned!(u32, usize);

// Seeds use the full 64-bit range; values past i64::MAX wrap through the
// signed TOML integer.
impl TomlValue for u64 {
    const EXPECTED: &'static str = "integer";
    fn from_toml(v: &Value) -> Result<Self, Mismatch> {
        v.as_integer().map(|i| i as u64).ok_or(Mismatch::Type)
    }
    fn to_toml(&self) -> Value {
        Value::Integer(*self as i64)
    }
}

impl TomlValue for i64 {
    const EXPECTED: &'static str = "integer";
    fn from_toml(v: &Value) -> Result<Self, Mismatch> {
        v.as_integer().ok_or(Mismatch::Type)
    }
    fn to_toml(&self) -> Value {
        Value::Integer(*self)
    }
}

impl TomlValue for f64 {
    const EXPECTED: &'static str = "number";
    fn from_toml(v: &Value) -> Result<Self, Mismatch> {
        match v {
            Value::Float(f) => Ok(*f),
            Value::Integer(i) => Ok(*i as f64),
            _ => Err(Mismatch::Type),
        }
    }
    fn to_toml(&self) -> Value {
        Value::Float(*self)
    }
}

impl TomlValue for bool {
    const EXPECTED: &'static str = "boolean";
    fn from_toml(v: &Value) -> Result<Self, Mismatch> {
        v.as_bool().ok_or(Mismatch::Type)
    }
    fn to_toml(&self) -> Value {
        Value::Boolean(*self)
    }
}

impl TomlValue for String {
    const EXPECTED: &'static str = "string";
    fn from_toml(v: &Value) -> Result<Self, Mismatch> {
        v.as_str().map(str::to_string).ok_or(Mismatch::Type)
    }
    fn to_toml(&self) -> Value {
        Value::String(self.clone())
    }
}

impl TomlValue for PathBuf {
    const EXPECTED: &'static str = "string";
    fn from_toml(v: &Value) -> Result<Self, Mismatch> {
        v.as_str().map(PathBuf::from).ok_or(Mismatch::Type)
    }
    fn to_toml(&self) -> Value {
        Value::String(self.display().to_string())
    }
}

impl<T: TomlValue> TomlValue for Vec<T> {
    const EXPECTED: &'static str = "array";
    fn from_toml(v: &Value) -> Result<Self, Mismatch> {
        v.as_array()
            .ok_or(Mismatch::Type)?
            .iter()
            .map(T::from_toml)
            .collect()
    }
    fn to_toml(&self) -> Value {
        Value::Array(self.iter().map(T::to_toml).collect())
    }
}

impl TomlValue for [f64; 3] {
    const EXPECTED: &'static str = "array of 3 numbers";
    fn from_toml(v: &Value) -> Result<Self, Mismatch> {
        let items = Vec::<f64>::from_toml(v)?;
        <[f64; 3]>::try_from(items)
            .map_err(|items| Mismatch::Value(format!("expected 3 coordinates, got {}", items.len())))
    }
    fn to_toml(&self) -> Value {
        self.to_vec().to_toml()
    }
}

/// `alpha` is a positive number, `inf`, or the string `"inf"`.
impl TomlValue for Alpha<f64> {
    const EXPECTED: &'static str = "positive number or inf";
    fn from_toml(v: &Value) -> Result<Self, Mismatch> {
        let a = match v {
            Value::String(s) if matches!(s.as_str(), "inf" | "infinity" | "+inf") => f64::INFINITY,
            Value::String(_) => return Err(Mismatch::Type),
            other => f64::from_toml(other)?,
        };
        Alpha::finite(a).map_err(|_| Mismatch::Value(format!("{a} is not > 0")))
    }
    fn to_toml(&self) -> Value {
        Value::Float(self.to_f64())
    }
}

fn parse_named<T: FromStr>(v: &Value) -> Result<T, Mismatch>
where
    T::Err: fmt::Display,
{
    let s = v.as_str().ok_or(Mismatch::Type)?;
    s.parse().map_err(|e: T::Err| Mismatch::Value(e.to_string()))
}

impl TomlValue for ChannelKind {
    const EXPECTED: &'static str = "string (awgn, flat, selective)";
    fn from_toml(v: &Value) -> Result<Self, Mismatch> {
        parse_named(v)
    }
    fn to_toml(&self) -> Value {
        Value::String(self.name().to_string())
    }
}

impl TomlValue for Strategy {
    const EXPECTED: &'static str = "string (continuous, ideal_mv, oac_mv)";
    fn from_toml(v: &Value) -> Result<Self, Mismatch> {
        parse_named(v)
    }
    fn to_toml(&self) -> Value {
        Value::String(self.name().to_string())
    }
}

/// The merged key-value table, with consumption tracking.
#[derive(Debug, Clone, Default)]
pub struct Params {
    table: Table,
    used: BTreeSet<String>,
}

impl Params {
    pub fn new(table: Table) -> Self {
        Self {
            table,
            used: BTreeSet::new(),
        }
    }

    /// Parses a config file's text.
    pub fn parse(source_name: &str, text: &str) -> CliResult<Self> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| CliError::Syntax {
            source_name: source_name.to_string(),
            reason: e.message().to_string(),
        })?;
        for (key, value) in &table {
            if value.is_table() {
                return Err(CliError::invalid(key, "nested tables are not supported"));
            }
        }
        Ok(Self::new(table))
    }

    /// Applies one `key=value` override. The value is read as a TOML
    /// value when it parses as one and as a bare string otherwise.
    pub fn apply_override(&mut self, assignment: &str) -> CliResult<()> {
        let (key, raw) = assignment.split_once('=').ok_or_else(|| CliError::Syntax {
            source_name: "--set".to_string(),
            reason: format!("expected key=value, got {assignment}"),
        })?;
        let key = key.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(CliError::Syntax {
                source_name: "--set".to_string(),
                reason: format!("bad key in {assignment}"),
            });
        }
        let raw = raw.trim();
        let value = format!("v = {raw}")
            .parse::<Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| Value::String(raw.to_string()));
        self.table.insert(key.to_string(), value);
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.table.insert(key.to_string(), value);
    }

    pub fn contains(&self, key: &str) -> bool {
        self.table.contains_key(key)
    }

    fn convert<T: TomlValue>(&self, key: &str, v: &Value) -> CliResult<T> {
        T::from_toml(v).map_err(|m| match m {
            Mismatch::Type => CliError::TypeMismatch {
                key: key.to_string(),
                expected: T::EXPECTED,
                found: describe(v),
            },
            Mismatch::Value(reason) => CliError::invalid(key, reason),
        })
    }

    pub fn get<T: TomlValue>(&mut self, key: &str) -> CliResult<Option<T>> {
        self.used.insert(key.to_string());
        match self.table.get(key) {
            Some(v) => self.convert(key, v).map(Some),
            None => Ok(None),
        }
    }

    pub fn get_or<T: TomlValue>(&mut self, key: &str, default: T) -> CliResult<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: TomlValue>(&mut self, key: &str) -> CliResult<T> {
        self.get(key)?.ok_or_else(|| CliError::MissingKey {
            key: key.to_string(),
        })
    }

    /// Fails on the first key nothing asked for.
    pub fn finish(self) -> CliResult<()> {
        match self.table.keys().find(|k| !self.used.contains(*k)) {
            Some(key) => Err(CliError::UnknownKey { key: key.clone() }),
            None => Ok(()),
        }
    }
}

fn positive(key: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::invalid(key, format!("{v} is not a positive finite number")))
    }
}

fn probability(key: &str, v: f64) -> CliResult<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(CliError::invalid(key, format!("{v} is not in [0, 1]")))
    }
}

fn simplex(key: &str, p: f64, z: f64) -> CliResult<()> {
    let q = 1.0 - p - z;
    if q < -1e-12 {
        return Err(CliError::invalid(
            key,
            format!("q = 1 - p - z = {q} < 0 for p = {p}, z = {z}"),
        ));
    }
    Ok(())
}

fn at_least<T: PartialOrd + fmt::Display + Copy>(key: &str, v: T, min: T) -> CliResult<T> {
    if v >= min {
        Ok(v)
    } else {
        Err(CliError::invalid(key, format!("{v} is below the minimum {min}")))
    }
}

fn exponent(key: &str, m: usize) -> CliResult<usize> {
    if (1..=mvoac::cs::MAX_M).contains(&m) {
        Ok(m)
    } else {
        Err(CliError::invalid(key, format!("m = {m} is outside 1..={}", mvoac::cs::MAX_M)))
    }
}

fn phase_alphabet(key: &str, h: u32) -> CliResult<u32> {
    if h >= 2 && h % 2 == 0 {
        Ok(h)
    } else {
        Err(CliError::invalid(key, format!("{h} is not an even integer >= 2")))
    }
}

fn oversample(key: &str, o: usize) -> CliResult<usize> {
    at_least(key, o, 4)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub m: usize,
    pub pi: Vec<usize>,
    pub h: u32,
    pub alpha: Alpha<f64>,
    pub votes: Vec<i64>,
    pub b: Vec<u32>,
    pub c: u32,
    pub random_phases: bool,
    pub oversample: usize,
    pub digits: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PmeprSpec {
    pub k: usize,
    pub m: usize,
    pub p: f64,
    pub z: f64,
    pub alpha: Alpha<f64>,
    pub h: u32,
    pub samples: u64,
    pub oversample: usize,
    pub ccdf_step: f64,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CerSpec {
    pub k: usize,
    pub m_list: Vec<usize>,
    pub p_sweep: Vec<f64>,
    pub z: f64,
    pub channels: Vec<ChannelKind>,
    pub snr_db: f64,
    pub alpha: Alpha<f64>,
    pub h: u32,
    pub trials: u64,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma1Spec {
    pub k_plus: usize,
    pub k_minus: usize,
    pub k_zero: usize,
    pub alpha: Alpha<f64>,
    pub sigma2: f64,
    pub m: usize,
    pub index: usize,
    pub channel: ChannelKind,
    pub h: u32,
    pub trials: u64,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UavSpec {
    pub strategy: Strategy,
    pub initial: [f64; 3],
    pub waypoints: Vec<[f64; 3]>,
    pub t_update: f64,
    pub mu: f64,
    pub u_limit: f64,
    pub sigma_sensor2: f64,
    pub k: usize,
    pub snr_db: f64,
    pub m: usize,
    pub channel: ChannelKind,
    pub waypoint_epsilon: f64,
    pub max_rounds: u64,
    pub alpha: Alpha<f64>,
    pub h: u32,
    pub phase_randomization: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Settings {
    Gen(GenSpec),
    Pmepr(PmeprSpec),
    Cer(CerSpec),
    Lemma1(Lemma1Spec),
    Uav(UavSpec),
}

/// A fully resolved and validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub settings: Settings,
}

/// Keys that change where or how fast a run happens, not what it computes.
const NON_RESULT_KEYS: &[&str] = &["out", "workers"];

impl ExperimentSpec {
    pub fn command(&self) -> Command {
        match self.settings {
            Settings::Gen(_) => Command::Gen,
            Settings::Pmepr(_) => Command::Pmepr,
            Settings::Cer(_) => Command::Cer,
            Settings::Lemma1(_) => Command::Lemma1,
            Settings::Uav(_) => Command::Uav,
        }
    }

    /// Builds the spec for `command` from merged parameters.
    pub fn from_params(command: Command, mut p: Params) -> CliResult<Self> {
        if let Some(name) = p.get::<String>("command")? {
            if name != command.name() {
                return Err(CliError::invalid(
                    "command",
                    format!("config is for {name}, not {command}"),
                ));
            }
        }
        let seed = p.get_or("seed", 0u64)?;
        let out = p.get::<PathBuf>("out")?;
        let settings = match command {
            Command::Gen => Settings::Gen(gen_spec(&mut p)?),
            Command::Pmepr => Settings::Pmepr(pmepr_spec(&mut p)?),
            Command::Cer => Settings::Cer(cer_spec(&mut p)?),
            Command::Lemma1 => Settings::Lemma1(lemma1_spec(&mut p)?),
            Command::Uav => Settings::Uav(uav_spec(&mut p)?),
        };
        p.finish()?;
        Ok(Self {
            seed,
            out,
            settings,
        })
    }

    /// The effective configuration as a table that parses back to `self`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new();
        let mut put = |k: &str, v: Value| {
            t.insert(k.to_string(), v);
        };
        put("command", Value::String(self.command().name().to_string()));
        put("seed", self.seed.to_toml());
        if let Some(out) = &self.out {
            put("out", out.to_toml());
        }
        match &self.settings {
            Settings::Gen(s) => {
                put("m", s.m.to_toml());
                put("pi", s.pi.to_toml());
                put("h", s.h.to_toml());
                put("alpha", s.alpha.to_toml());
                put("votes", s.votes.to_toml());
                put("b", s.b.to_toml());
                put("c", s.c.to_toml());
                put("random_phases", s.random_phases.to_toml());
                put("oversample", s.oversample.to_toml());
                put("digits", s.digits.to_toml());
            }
            Settings::Pmepr(s) => {
                put("K", s.k.to_toml());
                put("m", s.m.to_toml());
                put("p", s.p.to_toml());
                put("z", s.z.to_toml());
                put("alpha", s.alpha.to_toml());
                put("h", s.h.to_toml());
                put("samples", s.samples.to_toml());
                put("oversample", s.oversample.to_toml());
                put("ccdf_step", s.ccdf_step.to_toml());
                put("workers", s.workers.to_toml());
            }
            Settings::Cer(s) => {
                put("K", s.k.to_toml());
                put("m_list", s.m_list.to_toml());
                put("p_sweep", s.p_sweep.to_toml());
                put("z", s.z.to_toml());
                put("channels", s.channels.to_toml());
                put("snr_db", s.snr_db.to_toml());
                put("alpha", s.alpha.to_toml());
                put("h", s.h.to_toml());
                put("trials", s.trials.to_toml());
                put("workers", s.workers.to_toml());
            }
            Settings::Lemma1(s) => {
                put("K_plus", s.k_plus.to_toml());
                put("K_minus", s.k_minus.to_toml());
                put("K_zero", s.k_zero.to_toml());
                put("alpha", s.alpha.to_toml());
                put("sigma2", s.sigma2.to_toml());
                put("m", s.m.to_toml());
                put("index", s.index.to_toml());
                put("channel", s.channel.to_toml());
                put("h", s.h.to_toml());
                put("trials", s.trials.to_toml());
                put("workers", s.workers.to_toml());
            }
            Settings::Uav(s) => {
                put("strategy", s.strategy.to_toml());
                put("initial", s.initial.to_toml());
                put("waypoints", s.waypoints.to_toml());
                put("t_update", s.t_update.to_toml());
                put("mu", s.mu.to_toml());
                put("u_limit", s.u_limit.to_toml());
                put("sigma_sensor2", s.sigma_sensor2.to_toml());
                put("K", s.k.to_toml());
                put("snr_db", s.snr_db.to_toml());
                put("m", s.m.to_toml());
                put("channel", s.channel.to_toml());
                put("waypoint_epsilon", s.waypoint_epsilon.to_toml());
                put("max_rounds", s.max_rounds.to_toml());
                put("alpha", s.alpha.to_toml());
                put("h", s.h.to_toml());
                put("phase_randomization", s.phase_randomization.to_toml());
            }
        }
        t
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&self.to_table()).expect("flat tables always serialize")
    }

    /// SHA-256 over the result-relevant part of the configuration.
    pub fn config_hash(&self) -> String {
        let mut t = self.to_table();
        for k in NON_RESULT_KEYS {
            t.remove(*k);
        }
        let text = toml::to_string(&t).expect("flat tables always serialize");
        Sha256::digest(text.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

fn gen_spec(p: &mut Params) -> CliResult<GenSpec> {
    let m = exponent("m", p.get_or("m", 3usize)?)?;
    let pi = p.get_or("pi", (1..=m).collect::<Vec<usize>>())?;
    mvoac::Permutation::new(pi.clone()).map_err(|e| CliError::invalid("pi", e))?;
    if pi.len() != m {
        return Err(CliError::invalid("pi", format!("length {} differs from m = {m}", pi.len())));
    }
    let h = phase_alphabet("h", p.get_or("h", 2u32)?)?;
    let alpha = p.get_or("alpha", Alpha::Infinite)?;
    let votes = p.get_or("votes", vec![0i64; m])?;
    if votes.len() != m {
        return Err(CliError::invalid("votes", format!("length {} differs from m = {m}", votes.len())));
    }
    if let Some(bad) = votes.iter().find(|v| !(-1..=1).contains(*v)) {
        return Err(CliError::invalid("votes", format!("{bad} is not one of -1, 0, 1")));
    }
    let b = p.get_or("b", vec![0u32; m])?;
    if b.len() != m {
        return Err(CliError::invalid("b", format!("length {} differs from m = {m}", b.len())));
    }
    if let Some(bad) = b.iter().find(|&&v| v >= h) {
        return Err(CliError::invalid("b", format!("{bad} is not in Z_{h}")));
    }
    let c = p.get_or("c", 0u32)?;
    if c >= h {
        return Err(CliError::invalid("c", format!("{c} is not in Z_{h}")));
    }
    let random_phases = p.get_or("random_phases", false)?;
    let oversample = oversample("oversample", p.get_or("oversample", 16usize)?)?;
    let digits = p.get_or("digits", 9usize)?;
    if !(1..=17).contains(&digits) {
        return Err(CliError::invalid("digits", format!("{digits} is outside 1..=17")));
    }
    Ok(GenSpec {
        m,
        pi,
        h,
        alpha,
        votes,
        b,
        c,
        random_phases,
        oversample,
        digits,
    })
}

fn pmepr_spec(p: &mut Params) -> CliResult<PmeprSpec> {
    let k = at_least("K", p.get_or("K", 50usize)?, 1)?;
    let m = exponent("m", p.get_or("m", 8usize)?)?;
    let pr = probability("p", p.get_or("p", 0.1)?)?;
    let z = probability("z", p.get_or("z", 0.1)?)?;
    simplex("p", pr, z)?;
    let alpha = p.get_or("alpha", Alpha::Infinite)?;
    let h = phase_alphabet("h", p.get_or("h", 2u32)?)?;
    let samples = at_least("samples", p.get_or("samples", 10_000u64)?, 1)?;
    let oversample = oversample("oversample", p.get_or("oversample", 16usize)?)?;
    let ccdf_step = positive("ccdf_step", p.get_or("ccdf_step", 0.05)?)?;
    let workers = p.get_or("workers", 0usize)?;
    Ok(PmeprSpec {
        k,
        m,
        p: pr,
        z,
        alpha,
        h,
        samples,
        oversample,
        ccdf_step,
        workers,
    })
}

fn cer_spec(p: &mut Params) -> CliResult<CerSpec> {
    let k = at_least("K", p.get_or("K", 50usize)?, 1)?;
    let m_list = p.get_or("m_list", vec![2usize, 4, 6, 8])?;
    if m_list.is_empty() {
        return Err(CliError::invalid("m_list", "must not be empty"));
    }
    for &m in &m_list {
        exponent("m_list", m)?;
    }
    let p_sweep = p.get_or("p_sweep", vec![0.2, 0.35, 0.65, 0.8])?;
    let z = probability("z", p.get_or("z", 0.1)?)?;
    if p_sweep.is_empty() {
        return Err(CliError::invalid("p_sweep", "must not be empty"));
    }
    for &pr in &p_sweep {
        probability("p_sweep", pr)?;
        simplex("p_sweep", pr, z)?;
    }
    let channels = p.get_or("channels", vec![ChannelKind::FlatRayleigh, ChannelKind::SelectiveRayleigh])?;
    if channels.is_empty() {
        return Err(CliError::invalid("channels", "must not be empty"));
    }
    let snr_db = p.get_or("snr_db", 10.0)?;
    if !snr_db.is_finite() {
        return Err(CliError::invalid("snr_db", "must be finite"));
    }
    let alpha = p.get_or("alpha", Alpha::Infinite)?;
    let h = phase_alphabet("h", p.get_or("h", 2u32)?)?;
    let trials = at_least("trials", p.get_or("trials", 10_000u64)?, 1)?;
    let workers = p.get_or("workers", 0usize)?;
    Ok(CerSpec {
        k,
        m_list,
        p_sweep,
        z,
        channels,
        snr_db,
        alpha,
        h,
        trials,
        workers,
    })
}

fn lemma1_spec(p: &mut Params) -> CliResult<Lemma1Spec> {
    let k_plus = p.get_or("K_plus", 3usize)?;
    let k_minus = p.get_or("K_minus", 1usize)?;
    let k_zero = p.get_or("K_zero", 1usize)?;
    let alpha = p.get_or("alpha", Alpha::Infinite)?;
    let sigma2 = p.get_or("sigma2", 0.0)?;
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(CliError::invalid("sigma2", format!("{sigma2} is not a finite number >= 0")));
    }
    let m = exponent("m", p.get_or("m", 3usize)?)?;
    let index = p.get_or("index", 1usize)?;
    if !(1..=m).contains(&index) {
        return Err(CliError::invalid("index", format!("{index} is outside 1..={m}")));
    }
    let channel = p.get_or("channel", ChannelKind::SelectiveRayleigh)?;
    let h = phase_alphabet("h", p.get_or("h", 2u32)?)?;
    let trials = at_least(
        "trials",
        p.get_or("trials", 100_000u64)?,
        mvoac::experiment::MIN_LEMMA1_TRIALS,
    )?;
    let workers = p.get_or("workers", 0usize)?;
    Ok(Lemma1Spec {
        k_plus,
        k_minus,
        k_zero,
        alpha,
        sigma2,
        m,
        index,
        channel,
        h,
        trials,
        workers,
    })
}

fn uav_spec(p: &mut Params) -> CliResult<UavSpec> {
    let strategy = p.get_or("strategy", Strategy::OacMv)?;
    let initial = p.get_or("initial", [0.0; 3])?;
    let waypoints = p.get_or("waypoints", vec![[10.0, 8.0, 6.0]])?;
    if waypoints.is_empty() {
        return Err(CliError::invalid("waypoints", "at least one waypoint is required"));
    }
    if initial.iter().chain(waypoints.iter().flatten()).any(|v| !v.is_finite()) {
        return Err(CliError::invalid("waypoints", "coordinates must be finite"));
    }
    let t_update = positive("t_update", p.get_or("t_update", 0.01)?)?;
    let mu = positive("mu", p.get_or("mu", 2.0)?)?;
    let u_limit = positive("u_limit", p.get_or("u_limit", 3.0)?)?;
    let sigma_sensor2 = p.get_or("sigma_sensor2", 2.0)?;
    if !(sigma_sensor2 >= 0.0 && sigma_sensor2.is_finite()) {
        return Err(CliError::invalid(
            "sigma_sensor2",
            format!("{sigma_sensor2} is not a finite number >= 0"),
        ));
    }
    let k = at_least("K", p.get_or("K", 50usize)?, 1)?;
    let snr_db = p.get_or("snr_db", 10.0)?;
    if snr_db.is_nan() {
        return Err(CliError::invalid("snr_db", "must be a number"));
    }
    let m = exponent("m", p.get_or("m", 6usize)?)?;
    if strategy == Strategy::OacMv && m < 3 {
        return Err(CliError::invalid("m", format!("oac_mv needs m >= 3, got {m}")));
    }
    let channel = p.get_or("channel", ChannelKind::SelectiveRayleigh)?;
    let waypoint_epsilon = positive("waypoint_epsilon", p.get_or("waypoint_epsilon", 0.25)?)?;
    let max_rounds = p.get_or("max_rounds", 100_000u64)?;
    let alpha = p.get_or("alpha", Alpha::Infinite)?;
    let h = phase_alphabet("h", p.get_or("h", 2u32)?)?;
    let phase_randomization = p.get_or("phase_randomization", true)?;
    Ok(UavSpec {
        strategy,
        initial,
        waypoints,
        t_update,
        mu,
        u_limit,
        sigma_sensor2,
        k,
        snr_db,
        m,
        channel,
        waypoint_epsilon,
        max_rounds,
        alpha,
        h,
        phase_randomization,
    })
}
