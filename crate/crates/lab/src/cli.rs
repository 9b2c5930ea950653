use crate::acceptance::SuiteSettings;
use crate::commands::{self, Ctx, RunResult};
use crate::config::RunConfig;
use crate::exec::Parallel;
use crate::manifest::RunManifest;
use anyhow::Result;
use clap::{ArgAction, Args, Parser, Subcommand};
use nls_gibbs_core::exec::{Executor, Sequential};
use nls_gibbs_core::wick::Family;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

/// Every flag can also be set through an environment variable with this prefix.
pub const ENV_PREFIX: &str = "NLS_LAB_";

#[derive(Debug, Parser)]
#[command(name = "nls-lab", version, about = "Kernels, graph expansion, Monte Carlo and acceptance checks for Gibbs states of the nonlocal NLS")]
pub struct Cli {
    /// Run configuration (key/value sections or JSON).
    #[arg(long, global = true, env = "NLS_LAB_CONFIG")]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true, env = "NLS_LAB_SEED")]
    pub seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, global = true, env = "NLS_LAB_OUT")]
    pub out: Option<PathBuf>,
    /// Single-threaded, bit-exact mode.
    #[arg(long, global = true, env = "NLS_LAB_SEQUENTIAL", action = ArgAction::SetTrue)]
    pub sequential: bool,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "NLS_LAB_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Export spectral kernel coefficients.
    Kernels,
    /// Mollify the configured potential and verify the result.
    Potential,
    /// Enumerate pairings and export the collapsed graphs.
    Graphs(GraphArgs),
    /// Classical and quantum expansion coefficients.
    Coeffs,
    /// Monte Carlo moments and state expectations.
    Mc,
    /// Kernel bounds and Green-function convergence.
    Bounds,
    /// Series-vs-MC remainder and coefficient convergence.
    Compare,
    /// The acceptance gate.
    Suite(SuiteArgs),
    /// Print the effective configuration.
    Config {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub r: Option<u32>,
    /// R (no self-pairs) or Q (all pairings).
    #[arg(long)]
    pub family: Option<String>,
    /// `m=2 r=0 family=R` style assignments.
    pub assignments: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    /// Samples per Wick/MC comparison.
    #[arg(long, env = "NLS_LAB_SUITE_MC_N")]
    pub mc_n: Option<usize>,
    /// Samples for the series remainder check.
    #[arg(long, env = "NLS_LAB_SUITE_SERIES_N")]
    pub series_n: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

fn parse_family(s: &str) -> Result<Family> {
    match s {
        "R" | "r" => Ok(Family::R),
        "Q" | "q" => Ok(Family::Q),
        _ => Err(UsageError(format!("family must be R or Q, got `{s}`")).into()),
    }
}

fn graph_params(g: &GraphArgs, cfg: &RunConfig) -> Result<(u32, u32, Option<Family>)> {
    let mut m = g.m.unwrap_or(cfg.expansion.m_max);
    let mut r = g.r.unwrap_or(cfg.expansion.r);
    let mut family = g.family.as_deref().map(parse_family).transpose()?;
    for a in &g.assignments {
        let (k, v) = a.split_once('=').ok_or_else(|| UsageError(format!("expected key=value, got `{a}`")))?;
        let num = || v.parse::<u32>().map_err(|_| UsageError(format!("{k}: `{v}` is not a count")));
        match k {
            "m" => m = num()?,
            "r" => r = num()?,
            "family" => family = Some(parse_family(v)?),
            _ => return Err(UsageError(format!("unknown graph parameter `{k}`")).into()),
        }
    }
    Ok((m, r, family))
}

/// Loads the configuration and applies command-line overrides.
pub fn effective_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn name(c: &Command) -> &'static str {
    match c {
        Command::Kernels => "kernels",
        Command::Potential => "potential",
        Command::Graphs(_) => "graphs",
        Command::Coeffs => "coeffs",
        Command::Mc => "mc",
        Command::Bounds => "bounds",
        Command::Compare => "compare",
        Command::Suite(_) => "suite",
        Command::Config { .. } => "config",
    }
}

/// `Ok(true)` when every check passed.
pub fn run(cli: &Cli) -> Result<bool> {
    let cfg = effective_config(cli)?;
    if let Command::Config { json } = &cli.command {
        print!("{}", if *json { cfg.to_json() + "\n" } else { cfg.to_kv() });
        return Ok(true);
    }
    let par = if cli.sequential { None } else { Some(Parallel::new(cli.threads.unwrap_or(0))?) };
    let exec: &dyn Executor = match &par {
        Some(p) => p,
        None => &Sequential,
    };
    let threads = par.as_ref().map_or(1, Parallel::threads);
    let sub = name(&cli.command);
    let mut manifest = RunManifest::new(&cfg, sub, cli.sequential, threads);
    manifest.write(&cfg.out)?;
    let t0 = Instant::now();
    let cx = Ctx { cfg: &cfg, out: &cfg.out, exec, sequential: cli.sequential };
    let res: RunResult = match &cli.command {
        Command::Kernels => commands::kernels(&cx)?,
        Command::Potential => commands::potential(&cx)?,
        Command::Graphs(g) => {
            let (m, r, f) = graph_params(g, &cfg)?;
            commands::graphs(&cx, m, r, f)?
        }
        Command::Coeffs => commands::coeffs(&cx)?,
        Command::Mc => commands::mc(&cx)?,
        Command::Bounds => commands::bounds(&cx)?,
        Command::Compare => commands::compare(&cx)?,
        Command::Suite(a) => {
            let mut s = SuiteSettings { seed: cfg.seed, ..SuiteSettings::default() };
            if let Some(n) = a.mc_n {
                s.mc_n = n;
            }
            if let Some(n) = a.series_n {
                s.series_n = n;
            }
            commands::suite(&cx, &s)?
        }
        Command::Config { .. } => unreachable!("handled above"),
    };
    for l in &res.lines {
        println!("{l}");
    }
    manifest.wall_clock_secs = Some(t0.elapsed().as_secs_f64());
    manifest.artifacts.insert(sub.into(), res.artifacts);
    manifest.write(&cfg.out)?;
    Ok(res.pass)
}

/// Exit 0 when all checks pass, 1 on a check failure, 2 on config or IO errors.
pub fn main_with(cli: Cli) -> ExitCode {
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
