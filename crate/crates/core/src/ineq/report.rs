//! Inequality reports and their JSON / CSV encodings.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

/// A hard assertion `value ≤ bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub params: BTreeMap<String, Value>,
    pub lhs: f64,
    pub rhs_terms: Vec<NamedValue>,
    pub rhs_combined: f64,
    pub ratio_lo: f64,
    pub ratio_hi: f64,
    pub certified: bool,
    pub notes: String,
    pub checks: Vec<Check>,
    /// Recorded quantities that enter neither side (empirical ratios, sweeps).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<NamedValue>,
}

/// lhs / rhs, with 0/0 read as 1 and x/0 capped at f64::MAX so every field stays finite.
pub fn safe_ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            1.0
        } else {
            f64::MAX
        }
    } else {
        num / den
    }
}

impl InequalityReport {
    pub fn new(name: impl Into<String>) -> Self {
        InequalityReport {
            name: name.into(),
            params: BTreeMap::new(),
            lhs: 0.0,
            rhs_terms: Vec::new(),
            rhs_combined: 0.0,
            ratio_lo: 1.0,
            ratio_hi: 1.0,
            certified: true,
            notes: String::new(),
            checks: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, v: impl Serialize) -> Self {
        self.params.insert(
            key.to_string(),
            serde_json::to_value(v).unwrap_or(Value::Null),
        );
        self
    }

    pub fn set_param(&mut self, key: &str, v: impl Serialize) {
        self.params.insert(
            key.to_string(),
            serde_json::to_value(v).unwrap_or(Value::Null),
        );
    }

    pub fn push_term(&mut self, name: &str, value: f64) {
        self.rhs_terms.push(NamedValue {
            name: name.to_string(),
            value,
        });
    }

    pub fn diag(&mut self, name: &str, value: f64) {
        self.diagnostics.push(NamedValue {
            name: name.to_string(),
            value,
        });
    }

    pub fn diagnostic(&self, name: &str) -> Option<f64> {
        self.diagnostics
            .iter()
            .find(|t| t.name == name)
            .map(|t| t.value)
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.rhs_terms
            .iter()
            .find(|t| t.name == name)
            .map(|t| t.value)
    }

    /// Records `value ≤ bound` (with absolute slack `tol`).
    pub fn check(&mut self, name: &str, value: f64, bound: f64, tol: f64) -> bool {
        let passed = value.is_finite() && value <= bound + tol;
        self.checks.push(Check {
            name: name.to_string(),
            value,
            bound,
            passed,
        });
        passed
    }

    /// Records |a − b| ≤ tol·max(1, |b|).
    pub fn check_equal(&mut self, name: &str, a: f64, b: f64, tol: f64) -> bool {
        let err = (a - b).abs();
        let bound = tol * b.abs().max(1.0);
        let passed = err <= bound;
        self.checks.push(Check {
            name: name.to_string(),
            value: err,
            bound,
            passed,
        });
        passed
    }

    pub fn note(&mut self, s: &str) {
        if !self.notes.is_empty() {
            self.notes.push_str("; ");
        }
        self.notes.push_str(s);
    }

    /// Sets lhs and the combined right-hand side and derives both ratios.
    pub fn finish(&mut self, lhs: f64, rhs_combined: f64) {
        self.lhs = lhs;
        self.rhs_combined = rhs_combined;
        self.ratio_lo = safe_ratio(lhs, rhs_combined);
        self.ratio_hi = safe_ratio(rhs_combined, lhs);
    }

    pub fn sum_terms(&self) -> f64 {
        self.rhs_terms.iter().map(|t| t.value).sum()
    }

    pub fn max_terms(&self) -> f64 {
        self.rhs_terms.iter().map(|t| t.value).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn seed(&self) -> Option<u64> {
        self.params.get("seed").and_then(|v| v.as_u64())
    }

    /// Every value finite and non-negative, ratios consistent with lhs and rhs_combined.
    pub fn validate(&self) -> Result<()> {
        let vals = [self.lhs, self.rhs_combined, self.ratio_lo, self.ratio_hi]
            .into_iter()
            .chain(self.rhs_terms.iter().map(|t| t.value))
            .chain(self.diagnostics.iter().map(|t| t.value));
        for v in vals {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Numerical(format!(
                    "report {} has value {v}",
                    self.name
                )));
            }
        }
        if (self.ratio_lo - safe_ratio(self.lhs, self.rhs_combined)).abs()
            > 1e-12 * self.ratio_lo.max(1.0)
        {
            return Err(Error::Numerical(format!(
                "report {} has inconsistent ratio_lo",
                self.name
            )));
        }
        Ok(())
    }
}

/// Writes floats as 17 significant digits in scientific notation.
struct FixedFloat;

impl serde_json::ser::Formatter for FixedFloat {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> std::io::Result<()> {
        w.write_all(format_float(v).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> std::io::Result<()> {
        self.write_f64(w, v as f64)
    }
}

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Compact JSON with the fixed float format.
pub fn to_json_string<T: Serialize>(v: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloat);
    v.serialize(&mut ser)
        .map_err(|e| Error::Io(format!("cannot serialize: {e}")))?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

/// One JSON object per line.
pub fn reports_to_jsonl(reports: &[InequalityReport]) -> Result<String> {
    let mut out = String::new();
    for r in reports {
        out.push_str(&to_json_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn reports_from_jsonl(s: &str) -> Result<Vec<InequalityReport>> {
    s.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| Error::Parse(format!("bad report line: {e}"))))
        .collect()
}

/// Flattened CSV: `experiment,seed,params_json,lhs,rhs_1..rhs_k,rhs_combined,ratio_lo,ratio_hi,certified,notes`.
pub fn reports_to_csv(reports: &[InequalityReport]) -> Result<String> {
    let k = reports.iter().map(|r| r.rhs_terms.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "experiment".to_string(),
        "seed".into(),
        "params_json".into(),
        "lhs".into(),
    ];
    header.extend((1..=k).map(|i| format!("rhs_{i}")));
    header.extend(["rhs_combined", "ratio_lo", "ratio_hi", "certified", "notes"].map(String::from));
    w.write_record(&header).map_err(csv_err)?;
    for r in reports {
        let mut row = vec![
            r.name.clone(),
            r.seed().map(|s| s.to_string()).unwrap_or_default(),
            to_json_string(&r.params)?,
            format_float(r.lhs),
        ];
        for i in 0..k {
            row.push(
                r.rhs_terms
                    .get(i)
                    .map(|t| format_float(t.value))
                    .unwrap_or_default(),
            );
        }
        row.push(format_float(r.rhs_combined));
        row.push(format_float(r.ratio_lo));
        row.push(format_float(r.ratio_hi));
        row.push(r.certified.to_string());
        row.push(r.notes.clone());
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(format!("csv: {e}"))
}

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub experiment: String,
    pub seed: Option<u64>,
    pub params: BTreeMap<String, Value>,
    pub lhs: f64,
    pub rhs: Vec<f64>,
    pub rhs_combined: f64,
    pub ratio_lo: f64,
    pub ratio_hi: f64,
    pub certified: bool,
    pub notes: String,
}

pub fn reports_from_csv(s: &str) -> Result<Vec<CsvRow>> {
    let mut rd = csv::Reader::from_reader(s.as_bytes());
    let headers = rd.headers().map_err(csv_err)?.clone();
    let k = headers
        .iter()
        .filter(|h| h.starts_with("rhs_") && *h != "rhs_combined")
        .count();
    let num = |x: &str| -> Result<f64> {
        x.parse()
            .map_err(|_| Error::Parse(format!("bad number '{x}'")))
    };
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let rhs = (0..k)
            .filter_map(|i| {
                let v = &rec[4 + i];
                if v.is_empty() {
                    None
                } else {
                    Some(num(v))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(CsvRow {
            experiment: rec[0].to_string(),
            seed: if rec[1].is_empty() {
                None
            } else {
                rec[1].parse().ok()
            },
            params: serde_json::from_str(&rec[2]).map_err(|e| Error::Parse(e.to_string()))?,
            lhs: num(&rec[3])?,
            rhs,
            rhs_combined: num(&rec[4 + k])?,
            ratio_lo: num(&rec[5 + k])?,
            ratio_hi: num(&rec[6 + k])?,
            certified: &rec[7 + k] == "true",
            notes: rec[8 + k].to_string(),
        });
    }
    Ok(out)
}

/// Sidecar metadata: the distinct rhs term name lists of each experiment, listed once.
pub fn sidecar_json(reports: &[InequalityReport]) -> Result<String> {
    let mut names: BTreeMap<String, Vec<Vec<String>>> = BTreeMap::new();
    for r in reports {
        let list: Vec<String> = r.rhs_terms.iter().map(|t| t.name.clone()).collect();
        let e = names.entry(r.name.clone()).or_default();
        if !e.contains(&list) {
            e.push(list);
        }
    }
    let v = serde_json::json!({ "rhs_term_names": names });
    to_json_string(&v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> InequalityReport {
        let mut r = InequalityReport::new("demo")
            .param("seed", 7u64)
            .param("p", "inf")
            .param("n", 3);
        r.push_term("row", 0.1 + 0.2);
        r.push_term("col", 1.0 / 3.0);
        let rhs = r.sum_terms();
        r.finish(std::f64::consts::PI, rhs);
        r.check("row <= lhs", 0.3, r.lhs, 0.0);
        r
    }

    #[test]
    fn json_round_trip_is_exact() {
        let r = sample();
        let s = to_json_string(&r).unwrap();
        assert!(s.contains("3.1415926535897931e0"));
        let back: InequalityReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
        assert_eq!(to_json_string(&back).unwrap(), s);
    }

    #[test]
    fn csv_encodes_the_same_values() {
        let r = sample();
        let csv = reports_to_csv(std::slice::from_ref(&r)).unwrap();
        assert!(csv.starts_with("experiment,seed,params_json,lhs,rhs_1,rhs_2,rhs_combined"));
        let rows = reports_from_csv(&csv).unwrap();
        assert_eq!(rows[0].lhs, r.lhs);
        assert_eq!(
            rows[0].rhs,
            vec![r.rhs_terms[0].value, r.rhs_terms[1].value]
        );
        assert_eq!(rows[0].ratio_hi, r.ratio_hi);
        assert_eq!(rows[0].seed, Some(7));
        assert_eq!(rows[0].params, r.params);
    }

    #[test]
    fn ratios_stay_finite() {
        assert_eq!(safe_ratio(0.0, 0.0), 1.0);
        assert!(safe_ratio(1.0, 0.0).is_finite());
        let mut r = InequalityReport::new("zero");
        r.finish(0.0, 0.0);
        r.validate().unwrap();
    }
}
