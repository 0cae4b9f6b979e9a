//! Command-line driver: flags and config files to [`config::ExperimentConfig`], dispatch
//! through [`run::run`], artifacts through [`output`].

pub mod config;
pub mod output;
pub mod run;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

use config::{normalize_key, read_config_file, ExperimentConfig, EXPERIMENTS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILED_CHECK: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "freechaos",
    about = "Numerical checks of free-product, free-group and q-Fock operator inequalities",
    after_help = "Experiments: qfock-selftest, haagerup, voiculescu, rosenthal, reduction, khintchine, \
                  gen-circular, theorem-f, theorem-d, triangular, sweep.\n\
                  Exit codes: 0 all checks passed, 1 bad input, 2 a check failed, 3 capacity exceeded.\n\
                  FREECHAOS_CAPACITY overrides the default basis and support limits."
)]
pub struct Cli {
    /// Experiment name (may instead come from the config file).
    pub experiment: Option<String>,
    /// Config file: a JSON object or `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub d: Option<String>,
    /// Norm index: an even integer or `inf`.
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub q: Option<String>,
    /// Coefficient matrix size.
    #[arg(long)]
    pub m: Option<String>,
    /// Comma-separated weights.
    #[arg(long)]
    pub lambda: Option<String>,
    #[arg(long)]
    pub mu: Option<String>,
    /// Truncation depth of Fock or free-product representations.
    #[arg(long)]
    pub depth: Option<String>,
    #[arg(long = "quadrature-size")]
    pub quadrature_size: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long = "m-max")]
    pub m_max: Option<String>,
    /// `moments` or `rep`.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub pmax: Option<String>,
    /// Square witness matrix file, one row per line.
    #[arg(long = "witness")]
    pub witness_path: Option<String>,
    /// Sweep family: rosenthal, khintchine or reduction.
    #[arg(long)]
    pub family: Option<String>,
    /// Lists such as `2,3` or ranges such as `1..3`.
    #[arg(long)]
    pub ns: Option<String>,
    #[arg(long)]
    pub ds: Option<String>,
    #[arg(long)]
    pub ps: Option<String>,
    /// Output file; the other format and a `.meta.json` sidecar are written next to it.
    #[arg(long)]
    pub out: Option<String>,
    /// `csv` or `json`.
    #[arg(long)]
    pub format: Option<String>,
    /// Basis and support limit for this run.
    #[arg(long)]
    pub capacity: Option<String>,
}

impl Cli {
    fn flag_settings(&self) -> BTreeMap<String, String> {
        let pairs: [(&str, &Option<String>); 23] = [
            ("experiment", &self.experiment),
            ("n", &self.n),
            ("d", &self.d),
            ("p", &self.p),
            ("q", &self.q),
            ("m", &self.m),
            ("lambda", &self.lambda),
            ("mu", &self.mu),
            ("depth", &self.depth),
            ("quadrature_size", &self.quadrature_size),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("m_max", &self.m_max),
            ("method", &self.method),
            ("pmax", &self.pmax),
            ("witness_path", &self.witness_path),
            ("family", &self.family),
            ("ns", &self.ns),
            ("ds", &self.ds),
            ("ps", &self.ps),
            ("out", &self.out),
            ("format", &self.format),
            ("capacity", &self.capacity),
        ];
        pairs
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (normalize_key(k), v.clone())))
            .collect()
    }
}

/// Merges the config file (if any) with the flags; flags win.
pub fn parse_config<I, T>(args: I) -> Result<ExperimentConfig, String>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| e.to_string())?;
    let mut settings = match &cli.config {
        Some(path) => read_config_file(path).map_err(|e| e.to_string())?,
        None => BTreeMap::new(),
    };
    settings.extend(cli.flag_settings());
    ExperimentConfig::from_settings(&settings).map_err(|e| e.to_string())
}

/// Full command-line entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    if let Err(e) = Cli::try_parse_from(args.clone()) {
        if matches!(
            e.kind(),
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
        ) {
            print!("{e}");
            return EXIT_OK;
        }
    }
    let cfg = match parse_config(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}", e.trim_end());
            let names: Vec<&str> = EXPERIMENTS.iter().map(|e| e.name()).collect();
            eprintln!("experiments: {}", names.join(", "));
            return EXIT_USAGE;
        }
    };
    if let Some(c) = cfg.capacity {
        std::env::set_var(freechaos::capacity::CAPACITY_ENV, c.to_string());
    }
    let result = match run::run(&cfg) {
        Ok(r) => r,
        Err(e) if e.is_capacity() => {
            eprintln!("error: {e}");
            return EXIT_CAPACITY;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match output::emit(&cfg, &result) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
