//! Run configuration: a line-oriented `key = value` format with `[section]`
//! headers, with JSON accepted as an alternative. Both map onto the same
//! serde model, so a config survives either format unchanged.

use nls_gibbs_core::expansion::{default_eta, Observable, SparseMatrix};
use nls_gibbs_core::potentials::{self, in_q_set, PotentialSpec};
use nls_gibbs_core::TorusSpec;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{field}: {msg}")]
    Field { field: String, msg: String },
    #[error("{0}")]
    Schema(String),
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn field(f: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Field { field: f.into(), msg: msg.into() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Torus {
    pub d: usize,
    pub kappa: f64,
    pub cutoff: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialBlock {
    /// constant, powerFourier, selfConvolution or endpointSquare.
    pub variant: String,
    /// `c`, `q` or `ε`, depending on the variant.
    pub param: f64,
    /// Integrability exponent.
    pub p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionBlock {
    pub m_max: u32,
    pub r: u32,
    /// empty, proj0, proj1, cos1, mix01, pair01 or identity.
    pub observable: String,
    pub eta: f64,
    pub quad_order: usize,
    pub taus: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McBlock {
    pub n: usize,
    pub z: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsBlock {
    /// `L^q` exponent for kernel convergence checks.
    pub q: f64,
    pub ts: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub torus: Torus,
    pub potential: PotentialBlock,
    pub expansion: ExpansionBlock,
    pub mc: McBlock,
    pub bounds: BoundsBlock,
}

/// Largest cutoff allowed per dimension.
pub const CUTOFF_CAP: [u32; 3] = [64, 16, 8];

const LIST_KEYS: [&str; 3] = ["taus", "z", "ts"];
const STRING_KEYS: [&str; 3] = ["out", "variant", "observable"];

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 20240601,
            out: PathBuf::from("nls-lab-out"),
            torus: Torus { d: 2, kappa: 1.0, cutoff: 2 },
            potential: PotentialBlock { variant: "powerFourier".into(), param: 1.5, p: 2.0 },
            expansion: ExpansionBlock {
                m_max: 2,
                r: 1,
                observable: "mix01".into(),
                eta: 0.125,
                quad_order: 4,
                taus: vec![1.0, 10.0, 100.0, 1000.0, 10000.0],
            },
            mc: McBlock { n: 20000, z: vec![0.1, 0.5] },
            bounds: BoundsBlock { q: 6.0, ts: vec![0.0, 0.5] },
        }
    }
}

fn scalar(raw: &str) -> Value {
    if let Ok(u) = raw.parse::<u64>() {
        return Value::from(u);
    }
    if let Ok(x) = raw.parse::<f64>() {
        if let Some(n) = serde_json::Number::from_f64(x) {
            return Value::Number(n);
        }
    }
    match raw {
        "true" => Value::Bool(true),
        "false" => Value::Bool(false),
        _ => Value::String(raw.trim_matches('"').to_string()),
    }
}

impl RunConfig {
    /// Parse the key/value format. Later keys override earlier ones.
    pub fn from_kv(text: &str) -> Result<Self, ConfigError> {
        let mut root = Map::new();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or(ConfigError::Syntax { line: i + 1, msg: "unclosed section header".into() })?;
                let name = name.trim().to_string();
                root.entry(name.clone()).or_insert_with(|| Value::Object(Map::new()));
                section = Some(name);
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1, msg: format!("expected key = value, got `{line}`") })?;
            let (k, v) = (k.trim(), v.trim());
            let value = if LIST_KEYS.contains(&k) {
                let v = v.strip_prefix('[').and_then(|x| x.strip_suffix(']')).unwrap_or(v);
                Value::Array(v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(scalar).collect())
            } else if STRING_KEYS.contains(&k) {
                Value::String(v.trim_matches('"').to_string())
            } else {
                scalar(v)
            };
            let target = match &section {
                Some(s) => root.get_mut(s).and_then(Value::as_object_mut).expect("section exists"),
                None => &mut root,
            };
            target.insert(k.to_string(), value);
        }
        Self::from_value(Value::Object(root))
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let v: Value = serde_json::from_str(text).map_err(|e| ConfigError::Schema(e.to_string()))?;
        Self::from_value(v)
    }

    /// Missing keys fall back to the defaults, section by section.
    fn from_value(v: Value) -> Result<Self, ConfigError> {
        let mut base = serde_json::to_value(Self::default()).expect("default serialises");
        merge(&mut base, v);
        serde_json::from_value(base).map_err(|e| ConfigError::Schema(e.to_string()))
    }

    /// JSON if the text starts with `{`, key/value otherwise.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        if text.trim_start().starts_with('{') {
            Self::from_json(text)
        } else {
            Self::from_kv(text)
        }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::parse(&text)
    }

    pub fn to_kv(&self) -> String {
        let v = serde_json::to_value(self).expect("config serialises");
        let obj = v.as_object().expect("object");
        let mut out = String::new();
        let fmt = |v: &Value| match v {
            Value::String(s) => s.clone(),
            Value::Array(a) => a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "),
            other => other.to_string(),
        };
        for (k, v) in obj.iter().filter(|(_, v)| !v.is_object()) {
            let _ = writeln!(out, "{k} = {}", fmt(v));
        }
        for (name, sec) in obj.iter().filter(|(_, v)| v.is_object()) {
            let _ = writeln!(out, "\n[{name}]");
            for (k, v) in sec.as_object().expect("object") {
                let _ = writeln!(out, "{k} = {}", fmt(v));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Canonical text of every field that affects results (all but `out`).
    pub fn semantic_text(&self) -> String {
        let mut c = self.clone();
        c.out = PathBuf::new();
        c.to_kv()
    }

    pub fn spec(&self) -> Result<TorusSpec, ConfigError> {
        TorusSpec::new(self.torus.d, self.torus.kappa, self.torus.cutoff).map_err(|e| field("torus", e.to_string()))
    }

    pub fn build_potential(&self) -> Result<PotentialSpec, ConfigError> {
        let spec = self.spec()?;
        let p = &self.potential;
        let r = match p.variant.as_str() {
            "constant" => potentials::build_constant(&spec, p.param),
            "powerFourier" => potentials::build_power_fourier(&spec, p.param, p.p),
            "selfConvolution" => potentials::build_self_convolution(&spec, p.param, p.p),
            "endpointSquare" => potentials::build_endpoint_square(&spec, p.param),
            other => return Err(field("potential.variant", format!("unknown variant `{other}`"))),
        };
        r.map_err(|e| field("potential", e.to_string()))
    }

    pub fn observable(&self) -> Result<Observable, ConfigError> {
        let spec = self.spec()?;
        let name = self.expansion.observable.as_str();
        let xi = match name {
            "identity" => Observable::identity(self.expansion.r).map_err(|e| field("expansion.observable", e.to_string()))?,
            "pair01" => {
                let one = Complex64::new(1.0, 0.0);
                let p0 = SparseMatrix::new().with([0; 3], [0; 3], one);
                let p1 = SparseMatrix::new().with([1, 0, 0], [1, 0, 0], one);
                Observable::rank2(vec![(1.0, p0, p1)]).map_err(|e| field("expansion.observable", e.to_string()))?
            }
            _ => Observable::battery(&spec)
                .into_iter()
                .find(|(n, _)| n == name)
                .map(|(_, o)| o)
                .ok_or_else(|| field("expansion.observable", format!("unknown observable `{name}` for K={}", spec.cutoff)))?,
        };
        if xi.rank() != self.expansion.r {
            return Err(field("expansion.r", format!("{} does not match observable `{name}` of rank {}", self.expansion.r, xi.rank())));
        }
        Ok(xi)
    }

    /// Cross-field checks; the first violation is reported with its field path.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let t = &self.torus;
        if !(1..=3).contains(&t.d) {
            return Err(field("torus.d", format!("{} is not in 1..=3", t.d)));
        }
        if !(t.kappa > 0.0 && t.kappa.is_finite()) {
            return Err(field("torus.kappa", format!("{} must be positive", t.kappa)));
        }
        if t.cutoff > CUTOFF_CAP[t.d - 1] {
            return Err(field("torus.cutoff", format!("{} exceeds the cap {} for d={}", t.cutoff, CUTOFF_CAP[t.d - 1], t.d)));
        }
        let e = &self.expansion;
        if (t.d == 1) != (e.eta == 0.0) {
            return Err(field("expansion.eta", format!("η must be 0 exactly when d = 1 (d={}, η={}); the default for this d is {}", t.d, e.eta, default_eta(t.d))));
        }
        if !(0.0..0.5).contains(&e.eta) {
            return Err(field("expansion.eta", format!("{} is outside [0, 1/2)", e.eta)));
        }
        if e.m_max > 4 {
            return Err(field("expansion.m_max", format!("{} exceeds 4", e.m_max)));
        }
        if e.r > 2 {
            return Err(field("expansion.r", format!("{} exceeds 2", e.r)));
        }
        if e.quad_order < 2 {
            return Err(field("expansion.quad_order", "must be at least 2"));
        }
        if e.taus.is_empty() || e.taus.iter().any(|x| !(*x >= 1.0 && x.is_finite())) {
            return Err(field("expansion.taus", "need finite values >= 1"));
        }
        if self.mc.n < 1000 {
            return Err(field("mc.n", format!("{} is below 1000", self.mc.n)));
        }
        if let Some(z) = self.mc.z.iter().find(|z| !(0.0..=2.0).contains(*z)) {
            return Err(field("mc.z", format!("{z} is outside [0, 2]")));
        }
        if !in_q_set(t.d, self.bounds.q) {
            return Err(field("bounds.q", format!("{} is not admissible in d={}", self.bounds.q, t.d)));
        }
        if let Some(x) = self.bounds.ts.iter().find(|x| !(**x > -1.0 && **x < 1.0)) {
            return Err(field("bounds.ts", format!("{x} is outside (-1, 1)")));
        }
        self.build_potential()?;
        self.observable()?;
        Ok(())
    }
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}
