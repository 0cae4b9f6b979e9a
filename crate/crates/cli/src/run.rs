//! Dispatch of a validated config to the harnesses.

use std::path::Path;

use nalgebra::DMatrix;

use freechaos::experiments::{
    constant_growth_sweep, hilbert_witness, k_estimate_sweep, product_grid, standard_factors,
    summary_to_csv, triangular_projection_witness, NormRoute,
};
use freechaos::freeprod::catalan;
use freechaos::group_lab::GroupWord;
use freechaos::ineq::random::{
    gaussian_matrix, instance_seed, meanzero_element, random_poly, random_q_poly, rng, uniform,
    InstanceRng,
};
use freechaos::ineq::{
    haagerup_report, khintchine_report, random_haagerup, random_reduction_items, reduction_report,
    rosenthal_report, theorem_e_report, theorem_f_report, voiculescu_report, FreeNorms,
    InequalityReport,
};
use freechaos::qfock::{self, FockSpaceSpec};
use freechaos::scalar::C64;
use freechaos::{Error, Result};

use crate::config::{Experiment, ExperimentConfig, Method};

/// Reports produced so far, extra artifacts as (file suffix, contents), and the error that
/// stopped the run early, if any.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub reports: Vec<InequalityReport>,
    pub extras: Vec<(String, String)>,
    pub aborted: Option<Error>,
}

impl RunOutput {
    /// Runs `count` seeded trials; a capacity error keeps the finished ones and stops.
    fn trials(
        &mut self,
        count: usize,
        seed: u64,
        mut f: impl FnMut(&mut InstanceRng) -> Result<InequalityReport>,
    ) -> Result<()> {
        for i in 0..count {
            let s = instance_seed(seed, i as u64);
            let mut g = rng(s);
            match f(&mut g) {
                Ok(mut r) => {
                    r.set_param("seed", s);
                    self.reports.push(r);
                }
                Err(e) if e.is_capacity() => {
                    self.aborted = Some(e);
                    return Ok(());
                }
                Err(e) => return Err(e),
            }
        }
        Ok(())
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let p = &cfg.params;
    let mut out = RunOutput::default();
    match cfg.experiment {
        Experiment::QfockSelftest => qfock_selftest(cfg, &mut out)?,
        Experiment::Haagerup => {
            let n = u32::try_from(p.n).map_err(|_| Error::validation("n too large"))?;
            out.trials(p.trials, p.seed, |g| {
                let alpha: Vec<(GroupWord, C64)> = random_haagerup(g, n, p.d);
                haagerup_report(&alpha, p.d, p.m_max)
            })?;
        }
        Experiment::Voiculescu => {
            let f = standard_factors(p.n)?;
            let eng = FreeNorms::new(f.clone(), p.depth);
            out.trials(p.trials, p.seed, |g| {
                let a: Vec<DMatrix<C64>> = f.iter().map(|x| meanzero_element(g, x)).collect();
                let b: Vec<DMatrix<C64>> =
                    (0..f.len()).map(|_| gaussian_matrix(g, p.m, p.m)).collect();
                voiculescu_report(&eng, &a, &b)
            })?;
        }
        Experiment::Rosenthal => {
            let f = standard_factors(p.n)?;
            let eng = FreeNorms::new(f.clone(), p.depth);
            out.trials(p.trials, p.seed, |g| {
                let a = (0..p.n)
                    .map(|k| random_q_poly(g, &f, k, p.m, p.d, 3))
                    .collect::<Result<Vec<_>>>()?;
                rosenthal_report(&eng, &a, p.p)
            })?;
        }
        Experiment::Reduction => {
            let f = standard_factors(p.n)?;
            let eng = FreeNorms::new(f.clone(), p.depth);
            out.trials(p.trials, p.seed, |g| {
                let items = random_reduction_items(g, &f, p.m, p.d, 3, 2)?;
                reduction_report(&eng, &items, p.p)
            })?;
        }
        Experiment::Khintchine => {
            let f = standard_factors(p.n)?;
            let eng = FreeNorms::new(f.clone(), p.depth);
            out.trials(p.trials, p.seed, |g| {
                let x = random_poly(g, &f, p.m, p.d, 3)?;
                khintchine_report(&eng, &x, p.p)
            })?;
        }
        Experiment::GenCircular => {
            let q = p.q.unwrap_or(0.0);
            out.trials(p.trials, p.seed, |g| {
                let (lambda, mu) = weights(g, p.n, &p.lambda, &p.mu);
                let x: Vec<DMatrix<C64>> = (0..p.n).map(|_| gaussian_matrix(g, p.m, p.m)).collect();
                theorem_e_report(&x, &lambda, &mu, q, p.p, p.depth)
            })?;
        }
        Experiment::TheoremF => {
            out.trials(p.trials, p.seed, |g| {
                let (lambda, mu) = weights(g, p.n, &p.lambda, &p.mu);
                let x: Vec<Vec<Option<DMatrix<C64>>>> = (0..p.n)
                    .map(|i| {
                        (0..p.n)
                            .map(|j| (i != j).then(|| gaussian_matrix(g, p.m, p.m)))
                            .collect()
                    })
                    .collect();
                theorem_f_report(&x, &lambda, &mu, p.depth)
            })?;
        }
        Experiment::TheoremD => {
            let route = match p.method {
                Method::Moments => NormRoute::Moments { pmax: p.pmax },
                Method::Rep => NormRoute::Representation { depth: p.depth },
            };
            let base = match &p.witness_path {
                Some(path) => Some(read_witness(path)?),
                None => None,
            };
            if let Some(b) = &base {
                if b.nrows() < p.n {
                    return Err(Error::validation(format!(
                        "witness has {} rows, n = {}",
                        b.nrows(),
                        p.n
                    )));
                }
            }
            let witness = |n: usize| match &base {
                Some(b) => b.view((0, 0), (n, n)).into_owned(),
                None => hilbert_witness(n),
            };
            for n in 2..=p.n {
                match k_estimate_sweep(witness, &[n], route, p.quadrature_size) {
                    Ok(rs) => out.reports.extend(rs),
                    Err(e) if e.is_capacity() => {
                        out.aborted = Some(e);
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        Experiment::Triangular => {
            let base = match &p.witness_path {
                Some(path) => Some(read_witness(path)?),
                None => None,
            };
            for &n in &p.ns {
                let w = match &base {
                    Some(b) if b.nrows() >= n => b.view((0, 0), (n, n)).into_owned(),
                    Some(b) => {
                        return Err(Error::validation(format!(
                            "witness has {} rows, n = {n}",
                            b.nrows()
                        )));
                    }
                    None => hilbert_witness(n),
                };
                let t = triangular_projection_witness(&w)?;
                let mut r = InequalityReport::new("triangular").param("n", n);
                r.push_term("full_norm", t.full_norm);
                r.diag("ratio", t.ratio);
                if let Some(note) = &t.note {
                    r.note(note);
                }
                r.finish(t.triangular_norm, t.full_norm);
                out.reports.push(r);
            }
        }
        Experiment::Sweep => {
            let grid = product_grid(&p.ns, &p.ds, &p.ps);
            let s = constant_growth_sweep(p.family, &grid, p.trials, p.seed, p.depth)?;
            out.reports = s.reports;
            out.extras
                .push(("summary.csv".into(), summary_to_csv(&s.summary)?));
            if !s.notes.is_empty() {
                out.extras
                    .push(("skipped.txt".into(), s.notes.join("\n") + "\n"));
            }
        }
    }
    Ok(out)
}

fn weights(
    g: &mut InstanceRng,
    n: usize,
    lambda: &Option<Vec<f64>>,
    mu: &Option<Vec<f64>>,
) -> (Vec<f64>, Vec<f64>) {
    let mut draw = |w: &Option<Vec<f64>>| match w {
        Some(v) => v.clone(),
        None => (0..n).map(|_| uniform(g, 0.25, 1.0)).collect(),
    };
    let l = draw(lambda);
    let m = draw(mu);
    (l, m)
}

fn qfock_selftest(cfg: &ExperimentConfig, out: &mut RunOutput) -> Result<()> {
    let p = &cfg.params;
    let qs: Vec<f64> = match p.q {
        Some(q) => vec![q],
        None => vec![-0.9, -0.5, 0.0, 0.5, 0.9],
    };
    for letters in 1..=p.n {
        for &q in &qs {
            let t = match qfock::self_test(letters, p.depth, q) {
                Ok(t) => t,
                Err(e) if e.is_capacity() => {
                    out.aborted = Some(e);
                    return Ok(());
                }
                Err(e) => return Err(e),
            };
            let mut r = InequalityReport::new("qfock_selftest")
                .param("num_letters", letters)
                .param("depth", p.depth)
                .param("q", q);
            r.push_term("tolerance", 1e-12);
            r.diag("min_gram_eigenvalue", t.min_gram_eigenvalue);
            r.check("adjointness_defect", t.max_adjointness_defect, 1e-12, 0.0);
            r.check("gram_min_eigenvalue", -t.min_gram_eigenvalue, 1e-10, 0.0);
            r.finish(t.max_adjointness_defect, 1e-12);
            out.reports.push(r);
        }
    }
    let depth = 6;
    let spec = FockSpaceSpec::new(1, depth, 0.0)?;
    let s = qfock::semicircular(&spec, 1)?;
    let mut v = vec![C64::new(0.0, 0.0); spec.dim()];
    v[0] = C64::new(1.0, 0.0);
    for k in 1..=depth {
        v = s.apply(&v);
        let moment: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let mut r = InequalityReport::new("semicircular_moment")
            .param("k", k)
            .param("depth", depth);
        let c = catalan(k) as f64;
        r.push_term("catalan", c);
        r.check_equal("moment_equals_catalan", moment, c, 0.0);
        r.finish(moment, c);
        out.reports.push(r);
    }
    Ok(())
}

/// Rows of real numbers separated by commas or whitespace; `#` starts a comment.
pub fn read_witness(path: &Path) -> Result<DMatrix<C64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("cannot read witness {}: {e}", path.display())))?;
    parse_witness(&text)
}

pub fn parse_witness(text: &str) -> Result<DMatrix<C64>> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("witness entry '{s}': {e}")))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse(
            "witness must be a non-empty square matrix".into(),
        ));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0)))
}
