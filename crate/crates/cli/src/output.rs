//! Writing reports: JSON lines and the flattened CSV, a sidecar with the rhs term names, and
//! the exit code derived from the checks.

use std::path::{Path, PathBuf};

use freechaos::ineq::{reports_to_csv, reports_to_jsonl, sidecar_json, InequalityReport};
use freechaos::{Error, Result};

use crate::config::{ExperimentConfig, Format};
use crate::run::RunOutput;
use crate::{EXIT_CAPACITY, EXIT_FAILED_CHECK, EXIT_OK};

pub fn render(reports: &[InequalityReport], format: Format) -> Result<String> {
    match format {
        Format::Json => reports_to_jsonl(reports),
        Format::Csv => reports_to_csv(reports),
    }
}

fn with_extension(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

/// Path of an extra artifact: `out.csv` + `summary.csv` → `out.summary.csv`.
pub fn extra_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}"))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)
        .map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))
}

/// Writes every artifact (or prints to stdout without `--out`) and returns the exit code.
pub fn emit(cfg: &ExperimentConfig, result: &RunOutput) -> Result<i32> {
    let mut reports = result.reports.clone();
    if let Some(e) = &result.aborted {
        for r in &mut reports {
            r.note("partial run");
        }
        eprintln!("capacity exceeded after {} reports: {e}", reports.len());
    }
    let primary_path = match &cfg.out {
        Some(out) => {
            let (primary, other, other_ext) = match cfg.format {
                Format::Json => (Format::Json, Format::Csv, "csv"),
                Format::Csv => (Format::Csv, Format::Json, "jsonl"),
            };
            write(out, &render(&reports, primary)?)?;
            write(&with_extension(out, other_ext), &render(&reports, other)?)?;
            write(&extra_path(out, "meta.json"), &sidecar_json(&reports)?)?;
            for (suffix, contents) in &result.extras {
                write(&extra_path(out, suffix), contents)?;
            }
            out.display().to_string()
        }
        None => {
            print!("{}", render(&reports, cfg.format)?);
            for (suffix, contents) in &result.extras {
                println!("# {suffix}");
                print!("{contents}");
            }
            "<stdout>".to_string()
        }
    };
    if result.aborted.is_some() {
        return Ok(EXIT_CAPACITY);
    }
    let failing: Vec<(usize, &InequalityReport)> = reports
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.passed())
        .collect();
    if failing.is_empty() {
        return Ok(EXIT_OK);
    }
    for (i, r) in failing {
        let names: Vec<&str> = r.failed_checks().iter().map(|c| c.name.as_str()).collect();
        eprintln!(
            "FAILED {primary_path} record {i} ({}): {}",
            r.name,
            names.join(", ")
        );
    }
    Ok(EXIT_FAILED_CHECK)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ExperimentConfig, Format};
    use std::collections::BTreeMap;

    fn cfg(out: &Path) -> ExperimentConfig {
        let mut s = BTreeMap::new();
        s.insert("experiment".to_string(), "triangular".to_string());
        s.insert("out".to_string(), out.display().to_string());
        s.insert("format".to_string(), "csv".to_string());
        ExperimentConfig::from_settings(&s).unwrap()
    }

    #[test]
    fn failing_check_gives_exit_two() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("r.csv");
        let mut r = InequalityReport::new("synthetic");
        r.check("always_false", 2.0, 1.0, 0.0);
        r.finish(2.0, 1.0);
        let result = RunOutput {
            reports: vec![r],
            ..Default::default()
        };
        let c = cfg(&out);
        assert_eq!(c.format, Format::Csv);
        assert_eq!(emit(&c, &result).unwrap(), EXIT_FAILED_CHECK);
        assert!(
            out.exists()
                && dir.path().join("r.jsonl").exists()
                && dir.path().join("r.meta.json").exists()
        );
    }

    #[test]
    fn capacity_abort_marks_partial_results() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("r.csv");
        let mut r = InequalityReport::new("synthetic");
        r.finish(1.0, 1.0);
        let result = RunOutput {
            reports: vec![r],
            extras: vec![],
            aborted: Some(Error::capacity("basis", 10, 5)),
        };
        assert_eq!(emit(&cfg(&out), &result).unwrap(), EXIT_CAPACITY);
        let text = std::fs::read_to_string(dir.path().join("r.jsonl")).unwrap();
        assert!(text.contains("partial run"));
    }
}
