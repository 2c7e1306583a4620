//! Command-line experiment runner.
//!
//! Every subcommand writes `<out>.csv` (data, preceded by `#` lines echoing
//! the effective configuration), `<out>.summary.json`, and `<out>.config`,
//! a key-value file that replays the run via `--config`. Flags given on the
//! command line override values from the config file.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{ArgAction, Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::{default_alpha_grid, mu_bound_optimized, BoundInputs};
use crate::connectivity::{lln_sweep, min_degree_diagnostic, SweepConfig};
use crate::error::{Error, Result};
use crate::latticecoupling::{binomial_two_sided_p, sample_coupled_fields, MarginalCounts};
use crate::percolation::{
    crossing_probability, estimate_lambda_c, estimate_mu_c, BoxSetup, Model, MuOptions, ProbeRecord,
};
use crate::pointprocess::{sample_poisson, Region, RegionKind};
use crate::rng::derive_seed;

/// Formats a real with 17 significant digits, locale-free.
pub fn fmt_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

#[derive(Debug, Parser, Serialize)]
#[command(name = "abperc", version, about = "Continuum AB percolation and AB random geometric graphs")]
#[command(args_override_self = true, arg_required_else_help = true)]
pub struct Cli {
    /// Master seed; every trial stream is derived from it.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,

    /// Output path prefix.
    #[arg(long, global = true, default_value = "abperc-out")]
    pub out: PathBuf,

    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Sample one Poisson pattern.
    Sample(SampleArgs),
    /// Crossing probability of G(P_λ, 2r), or bisection for its critical λ.
    Percolate(PercolateArgs),
    /// Bisection for the critical B-intensity of the AB graph.
    MuC(MuArgs),
    /// Explicit upper bound on the critical B-intensity.
    Bound(BoundArgs),
    /// Connectivity threshold sweep on the unit square.
    Lln(LlnArgs),
    /// Frequency of minimum degree zero in G¹.
    Mindeg(MindegArgs),
    /// Sample coupled lattice fields and test their laws.
    CoupleTest(CoupleArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Sample(_) => "sample",
            Command::Percolate(_) => "percolate",
            Command::MuC(_) => "mu-c",
            Command::Bound(_) => "bound",
            Command::Lln(_) => "lln",
            Command::Mindeg(_) => "mindeg",
            Command::CoupleTest(_) => "couple-test",
        }
    }
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SampleArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 1.0)]
    pub side: f64,
    #[arg(long, default_value = "box", value_parser = ["box", "torus"])]
    pub kind: String,
    #[arg(long)]
    pub intensity: f64,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct PercolateArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Half the connection distance of the one-type graph.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, default_value_t = 30.0)]
    pub side: f64,
    #[arg(long, default_value_t = 400)]
    pub trials: u64,
    #[arg(long, default_value_t = 0.02)]
    pub tol: f64,
    /// Estimate only the crossing probability at this intensity.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub bracket_low: Option<f64>,
    #[arg(long)]
    pub bracket_high: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct MuArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, default_value_t = 30.0)]
    pub side: f64,
    #[arg(long, default_value_t = 400)]
    pub trials: u64,
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mu_start: f64,
    #[arg(long, default_value_t = 1e6)]
    pub mu_max: f64,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct BoundArgs {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long)]
    pub lambda_c: f64,
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct LlnArgs {
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub n: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub tau: Vec<f64>,
    #[arg(long, default_value_t = 30)]
    pub trials: u64,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct MindegArgs {
    #[arg(long)]
    pub n: f64,
    #[arg(long)]
    pub tau: f64,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 30)]
    pub trials: u64,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct CoupleArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Sites per axis of each window.
    #[arg(long, default_value_t = 128)]
    pub extent: usize,
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 2.0)]
    pub t: f64,
    #[arg(long)]
    pub p_lambda: f64,
    #[arg(long)]
    pub p_nu: f64,
    /// Number of independent windows.
    #[arg(long, default_value_t = 8)]
    pub fields: u64,
    /// Also write the first window site by site to `<out>.sites.csv`.
    #[arg(long, default_value_t = false, action = ArgAction::Set)]
    pub dump: bool,
    #[arg(long, default_value_t = 1e-3)]
    pub level: f64,
}

/// Files written by one run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub data: PathBuf,
    pub summary: PathBuf,
    pub config: PathBuf,
    pub extra: Vec<PathBuf>,
    pub summary_value: Value,
}

const SUBCOMMANDS: [&str; 7] = ["sample", "percolate", "mu-c", "bound", "lln", "mindeg", "couple-test"];

fn parse_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("{}:{}: expected key = value", path.display(), lineno + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Merges an optional `--config FILE` into the argument list; explicit
/// flags come last so they win.
fn expand_args(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut iter = args.into_iter();
    let bin = iter.next().unwrap_or_else(|| "abperc".into());
    let mut rest = Vec::new();
    let mut config = None;
    while let Some(a) = iter.next() {
        let s = a.to_string_lossy().into_owned();
        if s == "--config" {
            config = Some(iter.next().ok_or_else(|| Error::Usage("--config needs a path".into()))?);
        } else if let Some(p) = s.strip_prefix("--config=") {
            config = Some(p.into());
        } else {
            rest.push(a);
        }
    }
    let Some(config) = config else {
        let mut v = vec![bin];
        v.extend(rest);
        return Ok(v);
    };
    let entries = parse_config_file(Path::new(&config))?;
    let cli_sub = rest.iter().position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()));
    let file_sub = entries.iter().find(|(k, _)| k == "subcommand").map(|(_, v)| v.clone());
    let sub: OsString = match (cli_sub, file_sub) {
        (Some(i), _) => rest.remove(i),
        (None, Some(s)) => s.into(),
        (None, None) => return Err(Error::Usage("no subcommand on the command line or in the config file".into())),
    };
    let mut v = vec![bin, sub];
    for (k, val) in entries.into_iter().filter(|(k, _)| k != "subcommand") {
        v.push(format!("--{k}").into());
        v.push(val.into());
    }
    v.extend(rest);
    Ok(v)
}

/// Parses `args` (including the program name) and runs the experiment.
pub fn run_cli<I, T>(args: I) -> Result<RunOutput>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args = expand_args(args.into_iter().map(Into::into).collect())?;
    let cli = Cli::try_parse_from(args).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Error::Help(e.to_string()),
        _ => Error::Usage(e.to_string()),
    })?;
    run(&cli)
}

/// Effective configuration as ordered key-value pairs.
pub fn config_pairs(cli: &Cli) -> Vec<(String, String)> {
    let mut pairs = vec![
        ("subcommand".to_string(), cli.command.name().to_string()),
        ("seed".to_string(), cli.seed.to_string()),
        ("out".to_string(), cli.out.display().to_string()),
    ];
    let value = serde_json::to_value(&cli.command).expect("arguments serialize");
    if let Value::Object(outer) = value {
        for (_, inner) in outer {
            if let Value::Object(fields) = inner {
                for (k, v) in fields {
                    let text = match v {
                        Value::Null => continue,
                        Value::Array(items) => items.iter().map(json_scalar).collect::<Vec<_>>().join(","),
                        other => json_scalar(&other),
                    };
                    pairs.push((k, text));
                }
            }
        }
    }
    pairs
}

fn json_scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn run(cli: &Cli) -> Result<RunOutput> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| Error::Usage(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(cli))
}

struct Emitter {
    prefix: PathBuf,
    pairs: Vec<(String, String)>,
}

impl Emitter {
    fn path(&self, suffix: &str) -> PathBuf {
        let mut s = self.prefix.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    }

    fn csv(&self, suffix: &str, header: &str, rows: &[Vec<String>]) -> Result<PathBuf> {
        let path = self.path(suffix);
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let mut w = BufWriter::new(File::create(&path)?);
        for (k, v) in &self.pairs {
            writeln!(w, "# {k} = {v}")?;
        }
        writeln!(w, "{header}")?;
        for row in rows {
            writeln!(w, "{}", row.join(","))?;
        }
        w.flush()?;
        Ok(path)
    }

    fn finish(&self, data: PathBuf, extra: Vec<PathBuf>, result: Value) -> Result<RunOutput> {
        let config: BTreeMap<&str, &str> = self.pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
        let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let summary_value = json!({
            "subcommand": self.pairs[0].1,
            "config": config,
            "created_unix": created,
            "result": result,
        });
        let summary = self.path(".summary.json");
        fs::write(&summary, serde_json::to_string_pretty(&summary_value)?)?;

        let config_path = self.path(".config");
        let mut text = String::new();
        for (k, v) in &self.pairs {
            text.push_str(&format!("{k} = {v}\n"));
        }
        fs::write(&config_path, text)?;
        Ok(RunOutput { data, summary, config: config_path, extra, summary_value })
    }
}

fn probe_rows(probes: &[ProbeRecord]) -> Vec<Vec<String>> {
    probes
        .iter()
        .map(|p| {
            vec![
                fmt_real(p.value),
                p.trials.to_string(),
                p.successes.to_string(),
                fmt_real(p.ci_low),
                fmt_real(p.ci_high),
            ]
        })
        .collect()
}

const PROBE_HEADER: &str = "value,trials,successes,ci_low,ci_high";

fn dispatch(cli: &Cli) -> Result<RunOutput> {
    let em = Emitter { prefix: cli.out.clone(), pairs: config_pairs(cli) };
    let seed = cli.seed;
    match &cli.command {
        Command::Sample(a) => {
            let kind = if a.kind == "torus" { RegionKind::Torus } else { RegionKind::Box };
            let pattern = sample_poisson(Region::new(kind, a.side, a.dim)?, a.intensity, seed)?;
            let rows: Vec<Vec<String>> = pattern
                .points()
                .enumerate()
                .map(|(i, p)| std::iter::once(i.to_string()).chain(p.iter().map(|&x| fmt_real(x))).collect())
                .collect();
            let header = std::iter::once("index".to_string())
                .chain((1..=a.dim).map(|k| format!("x{k}")))
                .collect::<Vec<_>>()
                .join(",");
            let data = em.csv(".csv", &header, &rows)?;
            em.finish(data, vec![], json!({ "count": pattern.len(), "intensity": a.intensity }))
        }
        Command::Percolate(a) => {
            let setup = BoxSetup { dim: a.dim, ..BoxSetup::new(a.r, a.side, a.trials, seed) };
            if let Some(lambda) = a.lambda {
                let probe = crossing_probability(Model::OneType { lambda }, &setup)?;
                let data = em.csv(".csv", PROBE_HEADER, &probe_rows(std::slice::from_ref(&probe)))?;
                return em.finish(data, vec![], serde_json::to_value(&probe)?);
            }
            let bracket = match (a.bracket_low, a.bracket_high) {
                (Some(lo), Some(hi)) => Some((lo, hi)),
                (None, None) => None,
                _ => return Err(Error::Usage("give both --bracket-low and --bracket-high".into())),
            };
            let search = estimate_lambda_c(&setup, a.tol, bracket)?;
            let data = em.csv(".csv", PROBE_HEADER, &probe_rows(&search.probes))?;
            em.finish(data, vec![], serde_json::to_value(&search.estimate)?)
        }
        Command::MuC(a) => {
            let setup = BoxSetup { dim: a.dim, ..BoxSetup::new(a.r, a.side, a.trials, seed) };
            let options = MuOptions { mu_start: a.mu_start, mu_max: a.mu_max };
            let search = estimate_mu_c(&setup, a.lambda, a.tol, &options)?;
            let data = em.csv(".csv", PROBE_HEADER, &probe_rows(&search.probes))?;
            em.finish(
                data,
                vec![],
                json!({ "outcome": search.outcome, "one_type": search.one_type, "lambda": search.lambda }),
            )
        }
        Command::Bound(a) => {
            let inputs = BoundInputs::new(a.d, a.r, a.lambda, a.lambda_c).with_alphas(default_alpha_grid(a.grid));
            let report = mu_bound_optimized(&inputs)?;
            let opt = |v: Option<f64>| v.map(fmt_real).unwrap_or_default();
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|r| {
                    vec![
                        fmt_real(r.alpha),
                        fmt_real(r.s),
                        fmt_real(r.t),
                        fmt_real(r.epsilon),
                        r.delta_count.map(|d| d.to_string()).unwrap_or_default(),
                        fmt_real(r.p_nu),
                        fmt_real(r.p_lambda),
                        fmt_real(r.ratio_power),
                        fmt_real(r.mu_relaxed),
                        opt(r.mu_exact_delta),
                    ]
                })
                .collect();
            let data = em.csv(
                ".csv",
                "alpha,s,t,epsilon,delta_count,p_nu,p_lambda,ratio_power,mu_relaxed,mu_exact_delta",
                &rows,
            )?;
            em.finish(
                data,
                vec![],
                json!({
                    "delta": report.delta,
                    "alpha_opt": report.alpha_opt,
                    "mu_hat": report.mu_hat,
                    "alpha_opt_exact": report.alpha_opt_exact,
                    "mu_hat_exact": report.mu_hat_exact,
                    "asymptotic_constant": report.asymptotic_constant,
                    "normalized": report.normalized(),
                }),
            )
        }
        Command::Lln(a) => {
            let table =
                lln_sweep(&SweepConfig { n_grid: a.n.clone(), tau_grid: a.tau.clone(), trials: a.trials, seed })?;
            let rows: Vec<Vec<String>> = table
                .samples
                .iter()
                .map(|s| {
                    vec![fmt_real(s.n), fmt_real(s.tau), s.trial.to_string(), fmt_real(s.rho), fmt_real(s.statistic)]
                })
                .collect();
            let data = em.csv(".csv", "n,tau,trial,rho,statistic", &rows)?;
            let summary_rows: Vec<Vec<String>> = table
                .summary
                .iter()
                .map(|c| {
                    vec![
                        fmt_real(c.n),
                        fmt_real(c.tau),
                        c.trials.to_string(),
                        fmt_real(c.median),
                        fmt_real(c.q1),
                        fmt_real(c.q3),
                        fmt_real(c.iqr()),
                    ]
                })
                .collect();
            let medians = em.csv(".summary.csv", "n,tau,trials,median,q1,q3,iqr", &summary_rows)?;
            em.finish(data, vec![medians], json!({ "cells": table.summary }))
        }
        Command::Mindeg(a) => {
            let report = min_degree_diagnostic(a.n, a.tau, a.alpha, a.trials, seed)?;
            let row = vec![
                fmt_real(report.n),
                fmt_real(report.tau),
                fmt_real(report.alpha),
                fmt_real(report.radius),
                report.trials.to_string(),
                report.zero_count.to_string(),
                report.fraction.map(fmt_real).unwrap_or_default(),
            ];
            let data = em.csv(".csv", "n,tau,alpha,radius,trials,zero_count,fraction", &[row])?;
            em.finish(data, vec![], serde_json::to_value(&report)?)
        }
        Command::CoupleTest(a) => couple_test(a, seed, &em),
    }
}

fn couple_test(a: &CoupleArgs, seed: u64, em: &Emitter) -> Result<RunOutput> {
    use rayon::prelude::*;

    let extents = vec![a.extent; a.dim];
    let fields: Vec<(MarginalCounts, usize, Option<Vec<u8>>)> = (0..a.fields)
        .into_par_iter()
        .map(|i| {
            let f = sample_coupled_fields(&extents, a.epsilon, a.t, a.p_lambda, a.p_nu, derive_seed(seed, &[i]))?;
            let dump = if a.dump && i == 0 {
                let mut buf = Vec::new();
                f.write_csv(&mut buf)?;
                Some(buf)
            } else {
                None
            };
            Ok((f.interior_counts(), f.implication_violations(), dump))
        })
        .collect::<Result<_>>()?;

    let delta = crate::bounds::delta_count(a.t, a.epsilon, a.dim)?;
    let q = crate::bounds::q_coupling(a.p_nu, a.p_lambda, delta)?;
    let mut total = MarginalCounts::default();
    let mut violations = 0;
    let mut rows = Vec::new();
    let mut extra = Vec::new();
    for (i, (c, v, dump)) in fields.into_iter().enumerate() {
        total += c;
        violations += v;
        rows.push(vec![
            i.to_string(),
            c.sites.to_string(),
            c.t_ones.to_string(),
            c.v_ones.to_string(),
            c.w_ones.to_string(),
            v.to_string(),
        ]);
        if let Some(buf) = dump {
            let path = em.path(".sites.csv");
            fs::write(&path, buf)?;
            extra.push(path);
        }
    }
    let data = em.csv(".csv", "field,interior_sites,t_ones,v_ones,w_ones,implication_violations", &rows)?;
    let p_t = binomial_two_sided_p(total.t_ones, total.sites, a.p_lambda);
    let p_v = binomial_two_sided_p(total.v_ones, total.sites, a.p_nu);
    let p_w = binomial_two_sided_p(total.w_ones, total.sites, q);
    em.finish(
        data,
        extra,
        json!({
            "delta": delta,
            "q": q,
            "interior": total,
            "p_value_t": p_t,
            "p_value_v": p_v,
            "p_value_w": p_w,
            "implication_violations": violations,
            "pass": p_t >= a.level && p_v >= a.level && p_w >= a.level && violations == 0,
        }),
    )
}
