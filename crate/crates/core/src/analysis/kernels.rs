use super::{differenced_exponents, loglog_slope, within, CheckReport, Table};
use crate::error::{Error, Result};
use crate::num::frac;
use crate::potentials::{build_endpoint_square, in_q_set, mollification_scan};
use crate::spectral::heat::{q1_full_grid, q1_full_max, q2_full_max};
use crate::spectral::{
    classical_green, lp_norm, norm2, quantum_density, quantum_kernels, sobolev_norm, truncated_classical_green, GridSpec,
    KernelKind, TorusSpec,
};
use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// Exponent fits use only `τ >= TAIL_TAU`; below it the asymptotics have not set in.
const TAIL_TAU: f64 = 10.0;

fn check_taus(taus: &[f64]) -> Result<()> {
    if taus.is_empty() || taus.iter().any(|t| !(*t >= 1.0)) || taus.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("taus", "need an increasing list of values >= 1"));
    }
    Ok(())
}

fn tail(taus: &[f64], ys: &[f64]) -> (Vec<f64>, Vec<f64>) {
    taus.iter().zip(ys).filter(|(t, _)| **t >= TAIL_TAU).map(|(t, y)| (*t, *y)).unzip()
}

fn extremes(xs: &[f64]) -> (f64, f64) {
    xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)))
}

/// Growth of the quantum density: `√τ` in d = 3 (offset-free differenced
/// exponent in `[0.4, 0.6]`), `log τ` in d = 2 (increment per unit `ln τ`
/// varies by less than 25%), bounded in d = 1.
pub fn density_growth(d: usize, kappa: f64, taus: &[f64]) -> Result<CheckReport> {
    check_taus(taus)?;
    let mut rep = CheckReport::new("density_growth");
    rep.input("d", d).input("kappa", kappa).input("taus", format!("{taus:?}"));
    let rho: Vec<f64> = taus.iter().map(|&t| quantum_density(d, kappa, t, 1e-12)).collect::<Result<_>>()?;
    let mut tab = Table::new("density", &["tau", "rho"]);
    for (t, r) in taus.iter().zip(&rho) {
        tab.push(&[*t, *r]);
    }
    rep.table(tab);
    match d {
        3 => {
            let (x, y) = tail(taus, &rho);
            let e = differenced_exponents(&x, &y);
            let (lo, hi) = extremes(&e);
            rep.metric("exponent_min", lo).metric("exponent_max", hi).metric("loglog_slope", loglog_slope(taus, &rho));
            rep.require("sqrt-growth", !e.is_empty() && within(lo, 0.4, 0.6) && within(hi, 0.4, 0.6), format!("exponents {e:?}"));
        }
        2 => {
            let (x, y) = tail(taus, &rho);
            let rates: Vec<f64> = x.windows(2).zip(y.windows(2)).map(|(a, b)| (b[1] - b[0]) / libm::log(a[1] / a[0])).collect();
            let (lo, hi) = extremes(&rates);
            let raw: Vec<f64> = x.iter().zip(&y).map(|(t, r)| r / libm::log(*t)).collect();
            let (rlo, rhi) = extremes(&raw);
            rep.metric("log_rate_min", lo).metric("log_rate_max", hi).metric("log_rate_variation", (hi - lo) / lo);
            rep.metric("raw_ratio_variation", (rhi - rlo) / rlo);
            rep.require("log-growth", !rates.is_empty() && (hi - lo) / lo < 0.25, format!("rates {rates:?}"));
        }
        _ => {
            let inc: Vec<f64> = rho.windows(2).map(|w| w[1] - w[0]).collect();
            rep.metric("last_increment", inc.last().copied().unwrap_or(0.0));
            rep.require("bounded", inc.windows(2).all(|w| w[1] <= w[0]), format!("increments {inc:?}"));
        }
    }
    Ok(rep)
}

/// Bounds on the untruncated `Q^(1)`, `Q^(2)` over a `(τ, t)` scan: the
/// `L∞` scaling class of `Q^(1)`, the row integral of `Q^(2)`, the `τ^{d/2}`
/// growth of `max Q^(2)` for `{t} >= 1/2`, and a positive grid minimum of `Q^(1)`.
pub fn q_bound_suite(d: usize, kappa: f64, taus: &[f64], ts: &[f64]) -> Result<CheckReport> {
    check_taus(taus)?;
    if let Some(t) = ts.iter().find(|t| !(**t > -1.0 && **t < 1.0)) {
        return Err(Error::param("t", format!("{t} is outside (-1, 1)")));
    }
    let spec0 = TorusSpec::new(d, kappa, 0)?;
    let mut rep = CheckReport::new("q_bound_suite");
    rep.input("d", d).input("kappa", kappa).input("taus", format!("{taus:?}")).input("ts", format!("{ts:?}"));
    let axis = [0.0, 0.125, 0.25, 0.375, 0.5];
    let mut lower = f64::INFINITY;
    let mut spread = 1.0f64;
    for (j, &t) in ts.iter().enumerate() {
        let mut mins = Vec::new();
        let ft = frac(t);
        let mut tab = Table::new(&format!("q_bounds_{j}"), &["tau", "t", "q1_max", "row_integral", "q2_max", "grid_min"]);
        let mut q1 = Vec::new();
        let mut q2 = Vec::new();
        let mut row_ok = true;
        for &tau in taus {
            let m1 = q1_full_max(d, kappa, tau, t);
            let m2 = q2_full_max(d, kappa, tau, t);
            let row = quantum_kernels(&spec0, tau, t)?.1.coeffs()[0];
            if t != 0.0 {
                let exact = libm::exp(-ft * kappa / tau);
                row_ok &= libm::fabs(row - exact) <= 1e-10 && row <= 1.0;
            }
            let gmin = q1_full_grid(d, kappa, tau, t, &axis).into_iter().fold(f64::INFINITY, f64::min);
            mins.push((tau, gmin));
            tab.push(&[tau, t, m1, row, m2, gmin]);
            q1.push(m1);
            q2.push(m2);
        }
        rep.table(tab);
        rep.require(&format!("row-integral[t={t}]"), row_ok, "Q2 zero mode equals e^{-{t}κ/τ} and is at most 1");
        let (x, y) = tail(taus, &q1);
        match d {
            3 => {
                let e = differenced_exponents(&x, &y);
                let (lo, hi) = extremes(&e);
                rep.metric(&format!("q1_exponent_min[t={t}]"), lo).metric(&format!("q1_exponent_max[t={t}]"), hi);
                rep.require(&format!("q1-class[t={t}]"), !e.is_empty() && within(lo, 0.35, 0.65) && within(hi, 0.35, 0.65), format!("{e:?}"));
            }
            2 => {
                let e = differenced_exponents(&x, &y);
                let (_, hi) = extremes(&e);
                rep.metric(&format!("q1_log_excess[t={t}]"), hi);
                rep.require(&format!("q1-class[t={t}]"), !e.is_empty() && hi < 0.1, format!("{e:?}"));
            }
            _ => {
                let s = loglog_slope(taus, &q1);
                rep.metric(&format!("q1_slope[t={t}]"), s);
                rep.require(&format!("q1-class[t={t}]"), libm::fabs(s) < 0.15, format!("slope {s}"));
            }
        }
        if ft >= 0.5 {
            let (x, y) = tail(taus, &q2);
            let half = d as f64 / 2.0;
            let slope = if x.len() >= 2 { loglog_slope(&x, &y) } else { f64::NAN };
            let c = taus.iter().zip(&q2).map(|(tau, v)| v / libm::pow(*tau, half)).fold(0.0, f64::max);
            rep.metric(&format!("q2_slope[t={t}]"), slope).metric(&format!("q2_const[t={t}]"), c);
            rep.require(&format!("q2-growth[t={t}]"), libm::fabs(slope - half) <= 0.15, format!("slope {slope} vs {half}"));
        }
        lower = lower.min(mins.iter().map(|m| m.1).fold(f64::INFINITY, f64::min));
        let early: Vec<f64> = mins.iter().filter(|(t, _)| *t <= 100.0).map(|m| m.1).collect();
        if !early.is_empty() {
            let (lo, hi) = extremes(&early);
            spread = spread.max(hi / lo);
            rep.note(&format!("grid-min-stable[t={t}]"), hi <= 2.0 * lo, format!("{lo}..{hi}"));
        }
    }
    rep.metric("grid_min_lower", lower).metric("grid_min_spread", spread);
    rep.require("grid-min-positive", lower > 0.0, format!("{lower}"));
    Ok(rep)
}

/// `‖Q^(1)_{τ,t} - G‖_{L^q}` at cutoff `K` along `taus` (an infinite entry
/// marks the limit, where the gap is zero by construction), plus the
/// modewise bound `|Q^(1)_k - 1/λ_k| <= C/(|k|²+1)` with `C` fitted at the
/// first `τ`.
pub fn green_convergence(d: usize, kappa: f64, cutoff: u32, q: f64, t: f64, taus: &[f64]) -> Result<CheckReport> {
    if !in_q_set(d, q) {
        return Err(Error::param("q", format!("{q} is not admissible in d={d}")));
    }
    let spec = TorusSpec::new(d, kappa, cutoff)?;
    let g = classical_green(&spec);
    let grid = GridSpec::for_cutoff(cutoff);
    let mut rep = CheckReport::new("green_convergence");
    rep.input("d", d).input("kappa", kappa).input("K", cutoff).input("q", q).input("t", t).input("taus", format!("{taus:?}"));
    let mut tab = Table::new("green_gap", &["tau", "gap", "modewise"]);
    let mut gaps = Vec::new();
    let mut c_fit: Option<f64> = None;
    let mut modewise_ok = true;
    for &tau in taus {
        if tau.is_infinite() {
            tab.push(&[tau, 0.0, 0.0]);
            gaps.push((tau, 0.0));
            continue;
        }
        let q1 = quantum_kernels(&spec, tau, t)?.0;
        let diff = q1.axpy(-1.0, &g, KernelKind::Custom)?;
        let gap = lp_norm(&diff, q, &grid)?;
        let mw = diff.iter().map(|(k, c)| libm::fabs(c) * (norm2(k) as f64 + 1.0)).fold(0.0, f64::max);
        let c = *c_fit.get_or_insert(mw);
        modewise_ok &= mw <= c * (1.0 + 1e-12);
        tab.push(&[tau, gap, mw]);
        gaps.push((tau, gap));
    }
    rep.table(tab);
    rep.metric("modewise_const", c_fit.unwrap_or(0.0));
    rep.require("modewise-bound", modewise_ok, "C fitted at the first τ holds along the scan");
    let decreasing = gaps.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-12));
    rep.require("decreasing", decreasing, format!("{gaps:?}"));
    if let (Some(first), Some(at)) = (gaps.first(), gaps.iter().find(|g| g.0 == 1e4)) {
        rep.metric("gap_first", first.1).metric("gap_1e4", at.1).metric("gap_ratio", at.1 / first.1);
        if cutoff <= 8 {
            rep.require("small-at-1e4", at.1 < 1e-3, format!("{}", at.1));
        }
    }
    Ok(rep)
}

/// `‖G_[K'] - G_[K_max]‖_{L^q}` for each `K'` in `ks`.
pub fn truncation_convergence(d: usize, kappa: f64, q: f64, ks: &[u32]) -> Result<CheckReport> {
    if !in_q_set(d, q) {
        return Err(Error::param("q", format!("{q} is not admissible in d={d}")));
    }
    let kmax = *ks.iter().max().ok_or_else(|| Error::param("ks", "empty cutoff list"))?;
    let spec = TorusSpec::new(d, kappa, kmax)?;
    let full = classical_green(&spec);
    let grid = GridSpec::for_cutoff(kmax);
    let mut rep = CheckReport::new("truncation_convergence");
    rep.input("d", d).input("kappa", kappa).input("q", q).input("ks", format!("{ks:?}"));
    let mut sorted = ks.to_vec();
    sorted.sort_unstable();
    let mut tab = Table::new("truncation_gap", &["k", "gap"]);
    let mut gaps = Vec::new();
    for &k in &sorted {
        let diff = full.axpy(-1.0, &truncated_classical_green(&spec, k)?, KernelKind::Custom)?;
        let gap = lp_norm(&diff, q, &grid)?;
        tab.push(&[k as f64, gap]);
        gaps.push(gap);
    }
    rep.table(tab);
    rep.metric("gap_first", gaps[0]).metric("gap_last", *gaps.last().unwrap_or(&0.0));
    rep.require("decreasing", gaps.windows(2).all(|w| w[1] < w[0] || w[1] == 0.0), format!("{gaps:?}"));
    rep.require("zero-at-max", *gaps.last().unwrap_or(&1.0) == 0.0, "K' = K_max gives identical kernels");
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EndpointOptions {
    pub eps: f64,
    pub cutoff: u32,
    pub kappa: f64,
    pub w_taus: Vec<f64>,
    pub q_taus: Vec<f64>,
    pub t: f64,
    pub alpha: f64,
    pub s: f64,
}

impl Default for EndpointOptions {
    fn default() -> Self {
        Self {
            eps: 0.5,
            cutoff: 4,
            kappa: 1.0,
            w_taus: alloc::vec![1.0, 10.0, 100.0, 1000.0],
            q_taus: alloc::vec![1.0, 100.0, 1e4],
            t: 0.5,
            alpha: 0.2,
            s: 0.9,
        }
    }
}

/// Two-dimensional endpoint checks: `H^s` bounds on `Q^(1)` for `s < 1`,
/// `H^{1-α}` convergence of `Q^(1)` to `G`, and the mollification clauses
/// with `H^{-1+δ}` convergence of the endpoint potential.
pub fn endpoint_suite(o: &EndpointOptions) -> Result<CheckReport> {
    if !(o.s < 1.0) || !(o.alpha > 0.0 && o.alpha < 1.0) {
        return Err(Error::param("s", "need s < 1 and α in (0, 1)"));
    }
    let spec = TorusSpec::new(2, o.kappa, o.cutoff)?;
    let mut rep = CheckReport::new("endpoint_suite");
    rep.input("eps", o.eps).input("K", o.cutoff).input("t", o.t).input("alpha", o.alpha).input("s", o.s);
    let g = classical_green(&spec);
    let g_norm = sobolev_norm(&g, o.s);
    let mut qtab = Table::new("endpoint_q", &["tau", "h_s_norm", "h_gap"]);
    let mut bounded = true;
    let mut gaps = Vec::new();
    for &tau in &o.q_taus {
        let q1 = quantum_kernels(&spec, tau, o.t)?.0;
        let h = sobolev_norm(&q1, o.s);
        let gap = sobolev_norm(&q1.axpy(-1.0, &g, KernelKind::Custom)?, 1.0 - o.alpha);
        // For t >= 0 each coefficient of Q^(1) is at most 1/λ_k.
        bounded &= o.t < 0.0 || h <= g_norm * (1.0 + 1e-12);
        qtab.push(&[tau, h, gap]);
        gaps.push(gap);
    }
    rep.table(qtab);
    rep.metric("g_h_s_norm", g_norm);
    rep.require("q1-h-s-bounded", bounded, format!("‖Q1‖_H^{} <= ‖G‖ = {g_norm}", o.s));
    rep.require("q1-h-gap-decreasing", gaps.windows(2).all(|w| w[1] < w[0]), format!("{gaps:?}"));

    let w = build_endpoint_square(&spec, o.eps)?;
    let rows = mollification_scan(&w, &o.w_taus, 1.0)?;
    let mut wtab = Table::new("endpoint_w", &["tau", "h_distance", "clauses_pass"]);
    let mut all = true;
    for r in &rows {
        all &= r.report.all_pass();
        wtab.push(&[r.tau, r.distance, if r.report.all_pass() { 1.0 } else { 0.0 }]);
        for c in r.report.clauses.iter().filter(|c| !c.pass) {
            rep.require(&format!("clause[{}@{}]", c.name, r.tau), false, format!("{} > {}", c.measured, c.bound));
        }
    }
    rep.table(wtab);
    let dist: Vec<f64> = rows.iter().map(|r| r.distance).collect();
    rep.metric("w_distance_last", *dist.last().unwrap_or(&f64::NAN));
    rep.require("w-clauses", all, "every approximation clause at every τ");
    rep.require("w-h-distance-decreasing", dist.windows(2).all(|w| w[1] < w[0]), format!("{dist:?}"));
    Ok(rep)
}
