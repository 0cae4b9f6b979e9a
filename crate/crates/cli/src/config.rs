//! Experiment configuration: a config file (JSON object or `key = value` lines) overridden by
//! command-line flags, validated against the chosen experiment before anything runs.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use freechaos::experiments::Family;
use freechaos::normcalc::PIndex;
use freechaos::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    QfockSelftest,
    Haagerup,
    Voiculescu,
    Rosenthal,
    Reduction,
    Khintchine,
    GenCircular,
    TheoremF,
    TheoremD,
    Triangular,
    Sweep,
}

pub const EXPERIMENTS: [Experiment; 11] = [
    Experiment::QfockSelftest,
    Experiment::Haagerup,
    Experiment::Voiculescu,
    Experiment::Rosenthal,
    Experiment::Reduction,
    Experiment::Khintchine,
    Experiment::GenCircular,
    Experiment::TheoremF,
    Experiment::TheoremD,
    Experiment::Triangular,
    Experiment::Sweep,
];

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::QfockSelftest => "qfock-selftest",
            Experiment::Haagerup => "haagerup",
            Experiment::Voiculescu => "voiculescu",
            Experiment::Rosenthal => "rosenthal",
            Experiment::Reduction => "reduction",
            Experiment::Khintchine => "khintchine",
            Experiment::GenCircular => "gen-circular",
            Experiment::TheoremF => "theorem-f",
            Experiment::TheoremD => "theorem-d",
            Experiment::Triangular => "triangular",
            Experiment::Sweep => "sweep",
        }
    }

    /// Parameter keys the experiment reads.
    pub fn keys(&self) -> &'static [&'static str] {
        match self {
            Experiment::QfockSelftest => &["n", "depth", "q"],
            Experiment::Haagerup => &["n", "d", "trials", "seed", "m_max"],
            Experiment::Voiculescu => &["n", "m", "trials", "seed", "depth"],
            Experiment::Rosenthal | Experiment::Reduction | Experiment::Khintchine => {
                &["n", "d", "p", "m", "trials", "seed", "depth"]
            }
            Experiment::GenCircular => &[
                "n", "q", "p", "m", "lambda", "mu", "trials", "seed", "depth",
            ],
            Experiment::TheoremF => &["n", "m", "lambda", "mu", "trials", "seed", "depth"],
            Experiment::TheoremD => &[
                "n",
                "method",
                "pmax",
                "depth",
                "quadrature_size",
                "witness_path",
            ],
            Experiment::Triangular => &["ns", "witness_path"],
            Experiment::Sweep => &["family", "ns", "ds", "ps", "trials", "seed", "depth"],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        EXPERIMENTS
            .iter()
            .find(|e| e.name() == s)
            .copied()
            .ok_or_else(|| Error::Parse(format!("unknown experiment '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" | "jsonl" => Ok(Format::Json),
            o => Err(Error::Parse(format!("unknown format '{o}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Moments,
    Rep,
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "moments" => Ok(Method::Moments),
            "rep" | "representation" => Ok(Method::Rep),
            o => Err(Error::Parse(format!("unknown method '{o}'"))),
        }
    }
}

/// Typed parameters; unset fields take the per-experiment defaults in [`ExperimentConfig::from_settings`].
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub n: usize,
    pub d: usize,
    pub p: PIndex,
    pub q: Option<f64>,
    pub m: usize,
    pub lambda: Option<Vec<f64>>,
    pub mu: Option<Vec<f64>>,
    pub depth: usize,
    pub quadrature_size: usize,
    pub trials: usize,
    pub seed: u64,
    pub m_max: usize,
    pub method: Method,
    pub pmax: usize,
    pub witness_path: Option<PathBuf>,
    pub family: Family,
    pub ns: Vec<usize>,
    pub ds: Vec<usize>,
    pub ps: Vec<PIndex>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub params: Params,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub capacity: Option<usize>,
}

/// Keys accepted everywhere besides the experiment parameters.
const GLOBAL_KEYS: [&str; 4] = ["experiment", "out", "format", "capacity"];

pub fn normalize_key(k: &str) -> String {
    k.trim().trim_start_matches("--").replace('-', "_")
}

/// Reads a config file: a JSON object, or `key = value` lines with `#` comments.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    if text.trim_start().starts_with('{') {
        let v: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("bad JSON config: {e}")))?;
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Parse("config must be a JSON object".into()))?;
        for (k, v) in obj {
            out.insert(normalize_key(k), json_to_setting(v)?);
        }
        return Ok(out);
    }
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line {}: expected key = value", i + 1)))?;
        out.insert(normalize_key(k), v.trim().trim_matches('"').to_string());
    }
    Ok(out)
}

fn json_to_setting(v: &serde_json::Value) -> Result<String> {
    use serde_json::Value;
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        Value::Array(a) => a
            .iter()
            .map(json_to_setting)
            .collect::<Result<Vec<_>>>()
            .map(|v| v.join(",")),
        _ => Err(Error::Parse(
            "config values must be scalars or lists".into(),
        )),
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    v.trim()
        .parse::<T>()
        .map_err(|e| Error::Parse(format!("{key}: cannot parse '{v}': {e}")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse(key, s))
        .collect()
}

/// Inclusive ranges such as `1..3`, or lists such as `1,2,3`.
fn parse_usize_list(key: &str, v: &str) -> Result<Vec<usize>> {
    if let Some((a, b)) = v.split_once("..") {
        let (a, b): (usize, usize) = (parse(key, a)?, parse(key, b.trim_start_matches('='))?);
        if a > b {
            return Err(Error::Parse(format!("{key}: empty range {v}")));
        }
        return Ok((a..=b).collect());
    }
    parse_list(key, v)
}

impl ExperimentConfig {
    /// Builds the config from merged settings; every key must belong to the experiment.
    pub fn from_settings(settings: &BTreeMap<String, String>) -> Result<Self> {
        let experiment: Experiment = settings
            .get("experiment")
            .ok_or_else(|| Error::validation("no experiment given"))?
            .parse()?;
        for k in settings.keys() {
            if !GLOBAL_KEYS.contains(&k.as_str()) && !experiment.keys().contains(&k.as_str()) {
                return Err(Error::validation(format!(
                    "unknown key '{k}' for {experiment}"
                )));
            }
        }
        let get = |k: &str| settings.get(k).map(|s| s.as_str());
        let e = experiment;
        let default_n = match e {
            Experiment::QfockSelftest | Experiment::Voiculescu | Experiment::TheoremF => 3,
            Experiment::TheoremD => 4,
            _ => 2,
        };
        let default_depth = match e {
            Experiment::QfockSelftest => 4,
            Experiment::GenCircular => 5,
            _ => 3,
        };
        let default_p = match e {
            Experiment::GenCircular => PIndex::Finite(2.0),
            _ => PIndex::Infinity,
        };
        let default_d = match e {
            Experiment::Haagerup => 2,
            _ => 1,
        };
        let params = Params {
            n: get("n")
                .map(|v| parse("n", v))
                .transpose()?
                .unwrap_or(default_n),
            d: get("d")
                .map(|v| parse("d", v))
                .transpose()?
                .unwrap_or(default_d),
            p: get("p")
                .map(|v| parse("p", v))
                .transpose()?
                .unwrap_or(default_p),
            q: get("q").map(|v| parse("q", v)).transpose()?,
            m: get("m").map(|v| parse("m", v)).transpose()?.unwrap_or(2),
            lambda: get("lambda").map(|v| parse_list("lambda", v)).transpose()?,
            mu: get("mu").map(|v| parse_list("mu", v)).transpose()?,
            depth: get("depth")
                .map(|v| parse("depth", v))
                .transpose()?
                .unwrap_or(default_depth),
            quadrature_size: get("quadrature_size")
                .map(|v| parse("quadrature_size", v))
                .transpose()?
                .unwrap_or(5),
            trials: get("trials")
                .map(|v| parse("trials", v))
                .transpose()?
                .unwrap_or(20),
            seed: get("seed")
                .map(|v| parse("seed", v))
                .transpose()?
                .unwrap_or(1),
            m_max: get("m_max")
                .map(|v| parse("m_max", v))
                .transpose()?
                .unwrap_or(8),
            method: get("method")
                .map(|v| v.parse())
                .transpose()?
                .unwrap_or(Method::Moments),
            pmax: get("pmax")
                .map(|v| parse("pmax", v))
                .transpose()?
                .unwrap_or(8),
            witness_path: get("witness_path").map(PathBuf::from),
            family: get("family")
                .map(|v| v.parse())
                .transpose()?
                .unwrap_or(Family::Khintchine),
            ns: get("ns")
                .map(|v| parse_usize_list("ns", v))
                .transpose()?
                .unwrap_or_else(|| {
                    if e == Experiment::Triangular {
                        vec![8, 64]
                    } else {
                        vec![3]
                    }
                }),
            ds: get("ds")
                .map(|v| parse_usize_list("ds", v))
                .transpose()?
                .unwrap_or_else(|| vec![1, 2]),
            ps: get("ps")
                .map(|v| parse_list("ps", v))
                .transpose()?
                .unwrap_or_else(|| {
                    vec![PIndex::Finite(2.0), PIndex::Finite(4.0), PIndex::Infinity]
                }),
        };
        let cfg = ExperimentConfig {
            experiment,
            params,
            out: get("out").map(PathBuf::from),
            format: get("format")
                .map(|v| v.parse())
                .transpose()?
                .unwrap_or(Format::Json),
            capacity: get("capacity").map(|v| parse("capacity", v)).transpose()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Preconditions checked before any computation.
    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        let even_or_inf = |x: PIndex| x.is_infinite() || x.even().is_some();
        let bad = |s: String| Err(Error::validation(s));
        if self.capacity == Some(0) {
            return bad("capacity must be positive".into());
        }
        match self.experiment {
            Experiment::QfockSelftest => {
                if p.n == 0 || p.n > 3 || p.depth > 6 {
                    return bad("qfock-selftest needs 1 ≤ n ≤ 3 and depth ≤ 6".into());
                }
                if let Some(q) = p.q {
                    if q.abs() >= 1.0 {
                        return bad("q must lie in (−1, 1)".into());
                    }
                }
            }
            Experiment::Haagerup => {
                if p.n == 0 || p.d == 0 || p.m_max == 0 {
                    return bad("haagerup needs n, d, m_max ≥ 1".into());
                }
            }
            Experiment::Voiculescu => {
                if p.n == 0 || p.m == 0 {
                    return bad("voiculescu needs n, m ≥ 1".into());
                }
            }
            Experiment::Rosenthal | Experiment::Reduction | Experiment::Khintchine => {
                if p.n == 0 || p.m == 0 {
                    return bad("n and m must be positive".into());
                }
                if !even_or_inf(p.p) {
                    return bad(format!("p must be an even integer or inf, got {}", p.p));
                }
                if p.d > 3 {
                    return bad("d must be at most 3".into());
                }
                if p.d > 1 && p.n < 2 {
                    return bad("d ≥ 2 needs n ≥ 2".into());
                }
                if self.experiment == Experiment::Reduction && p.d > 0 && p.n < 2 {
                    return bad("reduction with d ≥ 1 needs n ≥ 2".into());
                }
            }
            Experiment::GenCircular => {
                if p.p != PIndex::Finite(2.0) && !p.p.is_infinite() {
                    return bad(format!("p must be 2 or inf, got {}", p.p));
                }
                if let Some(q) = p.q {
                    if q.abs() >= 1.0 {
                        return bad("q must lie in (−1, 1)".into());
                    }
                }
                check_weights(p.n, &p.lambda, &p.mu)?;
            }
            Experiment::TheoremF => {
                if p.n < 2 {
                    return bad("theorem-f needs n ≥ 2".into());
                }
                check_weights(p.n, &p.lambda, &p.mu)?;
            }
            Experiment::TheoremD => {
                if p.n < 2 {
                    return bad("theorem-d needs n ≥ 2".into());
                }
                if p.method == Method::Moments && (p.pmax < 2 || p.pmax % 2 != 0) {
                    return bad("pmax must be an even integer ≥ 2".into());
                }
                if p.quadrature_size < 2 {
                    return bad("quadrature_size must be at least 2".into());
                }
            }
            Experiment::Triangular => {
                if p.ns.is_empty() {
                    return bad("ns must not be empty".into());
                }
            }
            Experiment::Sweep => {
                if p.ps.iter().any(|&x| !even_or_inf(x)) {
                    return bad("every p must be an even integer or inf".into());
                }
                if p.ds.iter().any(|&d| d > 3) {
                    return bad("d must be at most 3".into());
                }
            }
        }
        Ok(())
    }
}

fn check_weights(n: usize, lambda: &Option<Vec<f64>>, mu: &Option<Vec<f64>>) -> Result<()> {
    for (name, w) in [("lambda", lambda), ("mu", mu)] {
        if let Some(w) = w {
            if w.len() != n {
                return Err(Error::validation(format!(
                    "{name} needs {n} entries, got {}",
                    w.len()
                )));
            }
            if w.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                return Err(Error::validation(format!(
                    "{name} entries must be positive"
                )));
            }
        }
    }
    Ok(())
}
