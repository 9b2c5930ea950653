use crate::acceptance::{self, Outcome, SuiteSettings};
use crate::config::RunConfig;
use crate::output::{fmt, Sink};
use anyhow::{bail, Context, Result};
use nls_gibbs_core::analysis::{
    coefficient_convergence, density_growth, green_convergence, q_bound_suite, series_vs_mc, truncation_convergence,
    CheckReport,
};
use nls_gibbs_core::exec::{Executor, Sequential};
use nls_gibbs_core::expansion::{coeff_classical_with, coeff_quantum_with, KernelPart, QuadOptions};
use nls_gibbs_core::mc::{mc_moments, mc_state_expectation, McConfig};
use nls_gibbs_core::potentials::mollification_scan;
use nls_gibbs_core::spectral::{classical_green, quantum_green, quantum_kernels};
use nls_gibbs_core::wick::{build_vertex_set, collapse, enumerate_pairings, Family, ObservableKind};
use nls_gibbs_core::FourierKernel;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::Path;

/// What a subcommand produced: whether its checks passed and what it wrote.
pub struct RunResult {
    pub pass: bool,
    pub artifacts: Vec<String>,
    pub lines: Vec<String>,
}

pub struct Ctx<'a> {
    pub cfg: &'a RunConfig,
    pub out: &'a Path,
    pub exec: &'a dyn Executor,
    pub sequential: bool,
}

fn kernel_rows(rows: &mut Vec<Vec<String>>, name: &str, tau: f64, t: f64, k: &FourierKernel) {
    for (m, c) in k.iter() {
        rows.push(vec![name.into(), fmt(tau), fmt(t), m[0].to_string(), m[1].to_string(), m[2].to_string(), fmt(c)]);
    }
}

pub fn kernels(cx: &Ctx) -> Result<RunResult> {
    let spec = cx.cfg.spec()?;
    let mut sink = Sink::new(cx.out, "kernels")?;
    let mut rows = Vec::new();
    kernel_rows(&mut rows, "G", f64::INFINITY, 0.0, &classical_green(&spec));
    for &tau in &cx.cfg.expansion.taus {
        kernel_rows(&mut rows, "G_tau", tau, 0.0, &quantum_green(&spec, tau)?);
        for &t in &cx.cfg.bounds.ts {
            let (q1, q2) = quantum_kernels(&spec, tau, t)?;
            kernel_rows(&mut rows, "Q1", tau, t, &q1);
            kernel_rows(&mut rows, "Q2", tau, t, &q2);
        }
    }
    sink.csv("kernels.csv", &["kernel", "tau", "t", "k1", "k2", "k3", "coeff"], &rows)?;
    Ok(RunResult { pass: true, lines: vec![format!("{} kernel coefficients", rows.len())], artifacts: sink.written })
}

pub fn potential(cx: &Ctx) -> Result<RunResult> {
    let w = cx.cfg.build_potential()?;
    let mut sink = Sink::new(cx.out, "potential")?;
    let coeffs: Vec<Vec<String>> = w.coeffs.iter().map(|(m, c)| vec![m[0].to_string(), m[1].to_string(), m[2].to_string(), fmt(c)]).collect();
    sink.csv("coefficients.csv", &["k1", "k2", "k3", "w_hat"], &coeffs)?;
    let rows = mollification_scan(&w, &cx.cfg.expansion.taus, w.p)?;
    let mut out = Vec::new();
    let mut pass = true;
    let mut lines = Vec::new();
    for r in &rows {
        for c in &r.report.clauses {
            pass &= c.pass;
            out.push(vec![fmt(r.tau), c.name.clone(), fmt(c.measured), fmt(c.bound), c.pass.to_string()]);
        }
        lines.push(format!("tau={} distance={:.4e} {}", r.tau, r.distance, if r.report.all_pass() { "ok" } else { "CLAUSE FAILED" }));
    }
    sink.csv("clauses.csv", &["tau", "clause", "measured", "bound", "pass"], &out)?;
    Ok(RunResult { pass, lines, artifacts: sink.written })
}

/// `overrides` holds `m`, `r` and `family` from the command line.
pub fn graphs(cx: &Ctx, m: u32, r: u32, family: Option<Family>) -> Result<RunResult> {
    let d = cx.cfg.torus.d;
    let family = family.unwrap_or(Family::for_dim(d));
    let order_d = if family == Family::R && d == 1 { bail!("family R needs d >= 2 (config has d = 1)") } else { d };
    let vs = build_vertex_set(m, r, order_d, ObservableKind::Operator)?;
    let mut pairings = enumerate_pairings(&vs, family)?;
    pairings.sort();
    let mut sink = Sink::new(cx.out, "graphs")?;
    let mut rows = Vec::new();
    let mut lists = String::new();
    for (i, p) in pairings.iter().enumerate() {
        let g = collapse(p, &vs)?;
        let edges: Vec<String> = g.edges.iter().map(|e| format!("{}-{}:{}", e.a, e.b, e.sigma)).collect();
        rows.push(vec![i.to_string(), format!("{:016x}", g.canonical_hash()), edges.join(";")]);
        lists.push_str(&format!("# pairing {i}\n{}\n", g.to_edge_list()));
    }
    sink.csv("pairings.csv", &["index", "hash", "edges"], &rows)?;
    sink.text("graphs.txt", &lists)?;
    Ok(RunResult {
        pass: true,
        lines: vec![format!("m={m} r={r} family={family:?}: {} pairings", pairings.len())],
        artifacts: sink.written,
    })
}

pub fn coeffs(cx: &Ctx) -> Result<RunResult> {
    let spec = cx.cfg.spec()?;
    let w = cx.cfg.build_potential()?;
    let xi = cx.cfg.observable()?;
    let e = &cx.cfg.expansion;
    let opts = QuadOptions { order: e.quad_order, eta: e.eta, part: KernelPart::Full };
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for m in 0..=e.m_max {
        let c = coeff_classical_with(m, &xi, &w, &spec, cx.exec)?;
        rows.push(vec![m.to_string(), "inf".into(), fmt(c.value), fmt(0.0), c.pairings.to_string()]);
        lines.push(format!("a_{m} = {:.10e} ({} pairings)", c.value, c.pairings));
        for &tau in &e.taus {
            let wt = w.mollify(tau)?;
            let q = coeff_quantum_with(m, &xi, tau, &wt, &spec, opts, cx.exec)?;
            rows.push(vec![m.to_string(), fmt(tau), fmt(q.value), fmt(q.quad_error), q.pairings.to_string()]);
        }
    }
    let mut sink = Sink::new(cx.out, "coeffs")?;
    sink.csv("coefficients.csv", &["m", "tau", "value", "quad_error", "pairings"], &rows)?;
    Ok(RunResult { pass: true, lines, artifacts: sink.written })
}

pub fn mc(cx: &Ctx) -> Result<RunResult> {
    let spec = cx.cfg.spec()?;
    let w = cx.cfg.build_potential()?;
    let xi = cx.cfg.observable()?;
    let cfg = McConfig { n: cx.cfg.mc.n, seed: cx.cfg.seed };
    let est = mc_moments(&spec, &w, std::slice::from_ref(&xi), cx.cfg.expansion.m_max.min(4), cfg, cx.exec)?;
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for (m, e) in est[0].iter().enumerate() {
        rows.push(vec![m.to_string(), fmt(e.mean), fmt(e.stderr), e.n.to_string()]);
        lines.push(format!("E[Θ W^{m}] = {:.6e} ± {:.1e}", e.mean, e.stderr));
    }
    let mut srows = Vec::new();
    for &z in &cx.cfg.mc.z {
        let e = mc_state_expectation(&xi, &w, z, cfg, cx.exec)?;
        srows.push(vec![fmt(z), fmt(e.mean), fmt(e.stderr), e.n.to_string()]);
        lines.push(format!("state(z={z}) = {:.6e} ± {:.1e}", e.mean, e.stderr));
    }
    let mut sink = Sink::new(cx.out, "mc")?;
    sink.csv("moments.csv", &["m", "mean", "stderr", "n"], &rows)?;
    sink.csv("state.csv", &["z", "mean", "stderr", "n"], &srows)?;
    Ok(RunResult { pass: true, lines, artifacts: sink.written })
}

fn emit(cx: &Ctx, sub: &str, reports: Vec<CheckReport>) -> Result<RunResult> {
    let mut sink = Sink::new(cx.out, sub)?;
    let mut pass = true;
    let mut lines = Vec::new();
    let mut summary = BTreeMap::new();
    for (j, mut r) in reports.into_iter().enumerate() {
        pass &= r.pass;
        lines.push(format!("{} {}", if r.pass { "PASS" } else { "FAIL" }, r.check_id));
        for v in r.verdicts.iter().filter(|v| !v.pass) {
            lines.push(format!("  {} {}: {}", if v.gating { "failed" } else { "note" }, v.name, v.detail));
        }
        let stem = format!("{j}_{}", r.check_id);
        sink.report(&stem, &mut r)?;
        summary.insert(stem, Summary { pass: r.pass, metrics: r.metrics.iter().map(|(k, v)| (k.clone(), v.0)).collect() });
    }
    sink.json("summary.json", &SummaryFile { pass, checks: summary, criteria: Vec::new() })?;
    Ok(RunResult { pass, lines, artifacts: sink.written })
}

#[derive(Serialize)]
struct Summary {
    pass: bool,
    metrics: BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct SummaryFile {
    pass: bool,
    criteria: Vec<Outcome>,
    checks: BTreeMap<String, Summary>,
}

pub fn bounds(cx: &Ctx) -> Result<RunResult> {
    let c = cx.cfg;
    let (d, kappa, k) = (c.torus.d, c.torus.kappa, c.torus.cutoff);
    let mut reps = vec![q_bound_suite(d, kappa, &c.expansion.taus, &c.bounds.ts)?];
    let t = c.bounds.ts.first().copied().unwrap_or(0.0);
    reps.push(green_convergence(d, kappa, k, c.bounds.q, t, &c.expansion.taus)?);
    let ks: Vec<u32> = (0..8).map(|j| 1u32 << j).take_while(|x| *x <= k.max(1)).collect();
    if ks.len() >= 2 {
        reps.push(truncation_convergence(d, kappa, c.bounds.q, &ks)?);
    }
    reps.push(density_growth(d, kappa, &c.expansion.taus)?);
    emit(cx, "bounds", reps)
}

pub fn compare(cx: &Ctx) -> Result<RunResult> {
    let c = cx.cfg;
    let spec = c.spec()?;
    let w = c.build_potential()?;
    let xi = c.observable()?;
    let mut reps = Vec::new();
    for &z in c.mc.z.iter().filter(|z| **z > 0.0 && **z <= 0.5) {
        for big_m in 1..=c.expansion.m_max.clamp(1, 3) {
            reps.push(series_vs_mc(&xi, &w, z, big_m, c.mc.n, c.seed, cx.exec)?);
        }
    }
    let opts = QuadOptions { order: c.expansion.quad_order, eta: c.expansion.eta, part: KernelPart::Full };
    if c.expansion.taus.len() >= 2 {
        let xis = vec![(c.expansion.observable.clone(), xi.clone())];
        reps.push(coefficient_convergence(1, &xis, &w, &spec, &c.expansion.taus, opts, cx.exec)?);
    }
    emit(cx, "compare", reps)
}

pub fn suite(cx: &Ctx, settings: &SuiteSettings) -> Result<RunResult> {
    let crit = acceptance::criteria();
    let outcomes: Vec<Outcome> = crit.iter().map(|c| c.run(settings, if cx.sequential { &Sequential } else { cx.exec })).collect();
    let mut sink = Sink::new(cx.out, "suite")?;
    let mut checks = BTreeMap::new();
    let mut lines = Vec::new();
    for o in &outcomes {
        lines.push(o.line());
        for (j, r) in o.reports.iter().enumerate() {
            let mut r = r.clone();
            let stem = format!("c{}_{j}_{}", o.id, r.check_id);
            sink.report(&stem, &mut r).context("writing suite reports")?;
            checks.insert(stem, Summary { pass: r.pass, metrics: r.metrics.iter().map(|(k, v)| (k.clone(), v.0)).collect() });
        }
    }
    let pass = outcomes.iter().all(|o| o.pass);
    sink.json("summary.json", &SummaryFile { pass, criteria: outcomes, checks })?;
    Ok(RunResult { pass, lines, artifacts: sink.written })
}
