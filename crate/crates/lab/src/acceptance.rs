//! The ten acceptance criteria. Each one runs its checks, measures its own
//! wall clock against its budget and returns a single verdict with the
//! reports it produced.

use anyhow::Result;
use nls_gibbs_core::analysis::{
    abs_counterexample, coefficient_convergence, density_growth, endpoint_suite, green_convergence, q_bound_suite,
    series_vs_mc, sobolev_product_check, CheckReport, EndpointOptions, Table,
};
use nls_gibbs_core::exec::Executor;
use nls_gibbs_core::expansion::{coeff_classical_with, Observable, QuadOptions};
use nls_gibbs_core::mc::{mc_moments, McConfig};
use nls_gibbs_core::num::{binomial, factorial, frac};
use nls_gibbs_core::potentials::{
    build_constant, build_endpoint_square, build_power_fourier, from_coefficients, PotentialSpec,
};
use nls_gibbs_core::spectral::{heat_poisson_residual, lp_norm, q_kernel, quantum_kernels, GridSpec, KernelKind};
use nls_gibbs_core::wick::{build_vertex_set, enumerate_pairings, wick_ordered_count, Family, ObservableKind};
use nls_gibbs_core::{FourierKernel, TorusSpec};
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Outcome {
    pub id: u32,
    pub title: String,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget_secs: f64,
    #[serde(skip)]
    pub reports: Vec<CheckReport>,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} [{:.1}s / {:.0}s] {}: {}",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.seconds,
            self.budget_secs,
            self.title,
            self.detail
        )
    }
}

/// Knobs the acceptance gate reads from the run configuration.
#[derive(Clone, Copy, Debug)]
pub struct SuiteSettings {
    pub seed: u64,
    /// Samples per Wick/MC comparison.
    pub mc_n: usize,
    /// Samples for the series remainder check.
    pub series_n: usize,
}

impl Default for SuiteSettings {
    fn default() -> Self {
        Self { seed: 20240601, mc_n: 200_000, series_n: 200_000 }
    }
}

type CriterionFn = fn(&SuiteSettings, &dyn Executor) -> Result<(bool, String, Vec<CheckReport>)>;

pub struct Criterion {
    pub id: u32,
    pub title: &'static str,
    pub budget_secs: f64,
    run: CriterionFn,
}

impl Criterion {
    pub fn run(&self, s: &SuiteSettings, exec: &dyn Executor) -> Outcome {
        let t0 = Instant::now();
        let res = (self.run)(s, exec);
        let seconds = t0.elapsed().as_secs_f64();
        let (pass, mut detail, reports) = match res {
            Ok(x) => x,
            Err(e) => (false, format!("error: {e:#}"), Vec::new()),
        };
        let in_time = seconds <= self.budget_secs;
        if !in_time {
            detail.push_str(&format!("; over budget ({seconds:.1}s > {}s)", self.budget_secs));
        }
        Outcome { id: self.id, title: self.title.into(), pass: pass && in_time, detail, seconds, budget_secs: self.budget_secs, reports }
    }
}

pub fn criteria() -> Vec<Criterion> {
    vec![
        Criterion { id: 1, title: "pairing counts", budget_secs: 5.0, run: c1_pairings },
        Criterion { id: 2, title: "Wick/MC equivalence", budget_secs: 180.0, run: c2_wick_mc },
        Criterion { id: 3, title: "exact kernel identities", budget_secs: 10.0, run: c3_identities },
        Criterion { id: 4, title: "coefficient convergence", budget_secs: 120.0, run: c4_coefficients },
        Criterion { id: 5, title: "density growth", budget_secs: 30.0, run: c5_density },
        Criterion { id: 6, title: "Q-bound scaling", budget_secs: 60.0, run: c6_q_bounds },
        Criterion { id: 7, title: "Green-function convergence", budget_secs: 60.0, run: c7_green },
        Criterion { id: 8, title: "series vs MC remainder", budget_secs: 120.0, run: c8_series },
        Criterion { id: 9, title: "Sobolev product estimate", budget_secs: 30.0, run: c9_sobolev },
        Criterion { id: 10, title: "endpoint suite", budget_secs: 60.0, run: c10_endpoint },
    ]
}

/// Runs every criterion, in order.
pub fn run_all(s: &SuiteSettings, exec: &dyn Executor) -> Vec<Outcome> {
    criteria().iter().map(|c| c.run(s, exec)).collect()
}

fn spec(d: usize, k: u32) -> TorusSpec {
    TorusSpec::new(d, 1.0, k).expect("valid torus")
}

fn c1_pairings(_: &SuiteSettings, _: &dyn Executor) -> Result<(bool, String, Vec<CheckReport>)> {
    let mut rep = CheckReport::new("pairing_counts");
    let mut tab = Table::new("counts", &["m", "r", "all", "all_expected", "wick", "wick_expected"]);
    let mut ok = true;
    for m in 0..=3u32 {
        for r in 0..=2u32 {
            let all = enumerate_pairings(&build_vertex_set(m, r, 1, ObservableKind::Operator)?, Family::Q)?.len() as f64;
            let wick = enumerate_pairings(&build_vertex_set(m, r, 2, ObservableKind::Operator)?, Family::R)?.len() as f64;
            let n = 2 * m + r;
            let want_all = factorial(n);
            let want_wick: i128 = (0..=2 * m)
                .map(|j| {
                    let s: i128 = if j % 2 == 0 { 1 } else { -1 };
                    s * binomial(2 * m, j) as i128 * factorial(n - j) as i128
                })
                .sum();
            ok &= all == want_all && wick == want_wick as f64 && wick_ordered_count(m, r) == want_wick;
            tab.push(&[m as f64, r as f64, all, want_all, wick, want_wick as f64]);
        }
    }
    rep.table(tab).require("exact", ok, "");
    Ok((ok, "all 12 (m, r) pairs match both formulas".into(), vec![rep]))
}

/// `1 + cos 2πx`: a nonconstant, pointwise nonnegative d = 1 potential.
fn raised_cosine(sp: &TorusSpec) -> Result<PotentialSpec> {
    let k = FourierKernel::from_fn(*sp, KernelKind::Potential, |m| match m[0].abs() {
        0 => 1.0,
        1 => 0.5,
        _ => 0.0,
    });
    Ok(from_coefficients(sp, k, 1.0)?)
}

fn c2_wick_mc(s: &SuiteSettings, exec: &dyn Executor) -> Result<(bool, String, Vec<CheckReport>)> {
    let s1 = spec(1, 4);
    let s2 = spec(2, 2);
    let cases: Vec<(&str, PotentialSpec)> = vec![
        ("constant", build_constant(&s1, 0.5)?),
        ("raisedCosine", raised_cosine(&s1)?),
        ("constant", build_constant(&s2, 0.5)?),
        ("powerFourier", build_power_fourier(&s2, 1.5, 2.0)?),
        ("endpointSquare", build_endpoint_square(&s2, 0.5)?),
    ];
    let mut rep = CheckReport::new("wick_mc");
    rep.input("n", s.mc_n).input("seed", s.seed);
    let mut tab = Table::new("comparisons", &["case", "d", "K", "observable", "m", "coeff", "mc_scaled", "stderr_scaled", "z_score"]);
    let mut worst = 0.0f64;
    let mut fails = 0;
    let mut total = 0;
    for (ci, (_, w)) in cases.iter().enumerate() {
        let sp = w.spec;
        let obs: Vec<(String, Observable)> = Observable::battery(&sp).into_iter().filter(|(n, _)| n == "empty" || n == "mix01").collect();
        let xis: Vec<Observable> = obs.iter().map(|o| o.1.clone()).collect();
        let est = mc_moments(&sp, w, &xis, 2, McConfig { n: s.mc_n, seed: s.seed.wrapping_add(ci as u64) }, exec)?;
        for (oi, (_, xi)) in obs.iter().enumerate() {
            for m in 0..=2u32 {
                let a = coeff_classical_with(m, xi, w, &sp, exec)?.value;
                let scale = if m % 2 == 0 { 1.0 } else { -1.0 } / factorial(m);
                let e = est[oi][m as usize];
                let (mc, se) = (scale * e.mean, e.stderr / factorial(m));
                let diff = (a - mc).abs();
                let z = if se > 0.0 { diff / se } else { 0.0 };
                let ok = diff <= 3.0 * se + 1e-12 * (1.0 + a.abs());
                total += 1;
                if !ok {
                    fails += 1;
                }
                worst = worst.max(z);
                tab.push(&[ci as f64, sp.d as f64, sp.cutoff as f64, oi as f64, m as f64, a, mc, se, z]);
            }
        }
    }
    rep.table(tab).metric("worst_z", worst).metric("failures", fails as f64).metric("comparisons", total as f64);
    rep.require("within-3-sigma", fails == 0, format!("{fails} of {total} outside 3σ"));
    let names: Vec<String> = cases.iter().map(|c| format!("d{}:{}", c.1.spec.d, c.0)).collect();
    Ok((fails == 0, format!("{total} comparisons over {names:?}, worst |z| = {worst:.2}"), vec![rep]))
}

fn c3_identities(_: &SuiteSettings, _: &dyn Executor) -> Result<(bool, String, Vec<CheckReport>)> {
    let mut rep = CheckReport::new("kernel_identities");
    let mut split = 0.0f64;
    let mut row = 0.0f64;
    let mut planch = 0.0f64;
    for d in 1..=3 {
        let sp = spec(d, 3);
        for tau in [1.0, 10.0, 1e4] {
            for t in [-0.75, -0.2, 0.0, 0.3, 0.95] {
                let (q1, q2) = quantum_kernels(&sp, tau, t)?;
                let q = q_kernel(&sp, tau, t)?;
                for ((a, b), c) in q1.coeffs().iter().zip(q2.coeffs()).zip(q.coeffs()) {
                    split = split.max((a + b / tau - c).abs() / c.abs());
                }
                if t != 0.0 {
                    let exact = (-frac(t) * sp.kappa / tau).exp();
                    row = row.max((q2.zero_mode() - exact).abs() / exact);
                }
                let l2 = lp_norm(&q1, 2.0, &GridSpec::uniform(2 * sp.cutoff as usize + 2))?;
                planch = planch.max((l2 - q1.coeff_l2()).abs() / q1.coeff_l2());
            }
        }
    }
    let points: [(usize, f64, f64, f64, &[f64]); 4] = [
        (1, 1.0, 1.0, 0.5, &[0.3]),
        (2, 1.0, 10.0, 0.2, &[0.1, 0.4]),
        (3, 2.0, 1.0, 0.9, &[0.5, 0.5, 0.5]),
        (2, 0.5, 100.0, 0.7, &[0.25, 0.0]),
    ];
    let mut poisson = 0.0f64;
    for (d, kappa, tau, t, x) in points {
        poisson = poisson.max(heat_poisson_residual(d, kappa, tau, t, x)?);
    }
    rep.metric("split_rel", split).metric("row_rel", row).metric("plancherel_rel", planch).metric("poisson_abs", poisson);
    let ok = split <= 1e-14 && row <= 1e-14 && planch <= 1e-10 && poisson < 1e-10;
    rep.require("identities", ok, "");
    Ok((ok, format!("split {split:.1e}, row {row:.1e}, Plancherel {planch:.1e}, Poisson {poisson:.1e}"), vec![rep]))
}

fn c4_coefficients(_: &SuiteSettings, exec: &dyn Executor) -> Result<(bool, String, Vec<CheckReport>)> {
    let sp = spec(2, 4);
    let w = build_power_fourier(&sp, 1.5, 2.0)?;
    let xis = Observable::battery(&sp);
    let rep = coefficient_convergence(1, &xis, &w, &sp, &[1.0, 10.0, 100.0, 1e3, 1e4], QuadOptions::new(2), exec)?;
    let g = |k: &str| rep.get(k).unwrap_or(f64::NAN);
    let detail = format!(
        "gap {:.3e} -> {:.3e} (drop {:.0}x, needs >= 10x); final gap / quadrature error = {:.1e} (needs < 10)",
        g("gap_first"),
        g("gap_last"),
        g("drop"),
        g("gap_over_quad")
    );
    Ok((rep.pass, detail, vec![rep]))
}

fn c5_density(_: &SuiteSettings, _: &dyn Executor) -> Result<(bool, String, Vec<CheckReport>)> {
    let r3 = density_growth(3, 1.0, &[10.0, 100.0, 1e3, 1e4])?;
    let r2 = density_growth(2, 1.0, &[100.0, 1e3, 1e4])?;
    let detail = format!(
        "d=3 exponents [{:.4}, {:.4}]; d=2 log-rate variation {:.2}%",
        r3.get("exponent_min").unwrap_or(f64::NAN),
        r3.get("exponent_max").unwrap_or(f64::NAN),
        100.0 * r2.get("log_rate_variation").unwrap_or(f64::NAN)
    );
    Ok((r3.pass && r2.pass, detail, vec![r3, r2]))
}

fn c6_q_bounds(_: &SuiteSettings, _: &dyn Executor) -> Result<(bool, String, Vec<CheckReport>)> {
    let taus = [1.0, 10.0, 100.0, 1e3, 1e4];
    let ts = [0.0, 0.5];
    let r3 = q_bound_suite(3, 1.0, &taus, &ts)?;
    let r2 = q_bound_suite(2, 1.0, &taus, &ts)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for t in ts {
        let lo = r3.get(&format!("q1_exponent_min[t={t}]")).unwrap_or(f64::NAN);
        let hi = r3.get(&format!("q1_exponent_max[t={t}]")).unwrap_or(f64::NAN);
        let ex = r2.get(&format!("q1_log_excess[t={t}]")).unwrap_or(f64::NAN);
        ok &= (0.4..=0.6).contains(&lo) && (0.4..=0.6).contains(&hi) && ex < 0.1;
        parts.push(format!("t={t}: d=3 slope [{lo:.3}, {hi:.3}], d=2 excess {ex:.4}"));
    }
    let min = r3.get("grid_min_lower").unwrap_or(f64::NAN).min(r2.get("grid_min_lower").unwrap_or(f64::NAN));
    ok &= min > 0.0;
    parts.push(format!("grid min {min:.4}"));
    Ok((ok, parts.join("; "), vec![r3, r2]))
}

fn c7_green(_: &SuiteSettings, _: &dyn Executor) -> Result<(bool, String, Vec<CheckReport>)> {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut reps = Vec::new();
    for (d, q, k) in [(1usize, 4.0, 8u32), (2, 6.0, 2), (3, 2.5, 2)] {
        let r = green_convergence(d, 1.0, k, q, 0.0, &[1.0, 10.0, 100.0, 1e3, 1e4])?;
        let ratio = r.get("gap_ratio").unwrap_or(f64::NAN);
        ok &= ratio < 1e-3;
        parts.push(format!("(d={d}, q={q}, K={k}) ratio {ratio:.2e}"));
        reps.push(r);
    }
    Ok((ok, parts.join("; "), reps))
}

fn c8_series(s: &SuiteSettings, exec: &dyn Executor) -> Result<(bool, String, Vec<CheckReport>)> {
    let sp = spec(1, 4);
    let w = build_constant(&sp, 0.5)?;
    let xi = Observable::identity(1)?;
    let mut ok = true;
    let mut parts = Vec::new();
    let mut reps = Vec::new();
    for big_m in [1u32, 2] {
        let r = series_vs_mc(&xi, &w, 0.1, big_m, s.series_n, s.seed, exec)?;
        ok &= r.pass;
        parts.push(format!(
            "M={big_m}: |diff| {:.3e} <= {:.3e} (margin {:.3e})",
            r.get("difference").unwrap_or(f64::NAN),
            r.get("remainder_bound").unwrap_or(f64::NAN) + 3.0 * r.get("mc_stderr").unwrap_or(f64::NAN),
            r.get("margin").unwrap_or(f64::NAN)
        ));
        reps.push(r);
    }
    Ok((ok, parts.join("; "), reps))
}

fn c9_sobolev(s: &SuiteSettings, _: &dyn Executor) -> Result<(bool, String, Vec<CheckReport>)> {
    let r = sobolev_product_check(0.9, 0.05, 200, s.seed)?;
    let c = abs_counterexample(-0.5, &[1, 2, 4, 8, 16, 32])?;
    let detail = format!(
        "max ratio {:.4} -> {:.4} on doubling; |f_n| growth exponent {:.4} (expected {})",
        r.get("max_ratio").unwrap_or(f64::NAN),
        r.get("max_ratio_doubled").unwrap_or(f64::NAN),
        c.get("growth_exponent").unwrap_or(f64::NAN),
        0.5
    );
    Ok((r.pass && c.pass, detail, vec![r, c]))
}

fn c10_endpoint(_: &SuiteSettings, _: &dyn Executor) -> Result<(bool, String, Vec<CheckReport>)> {
    let r = endpoint_suite(&EndpointOptions::default())?;
    let w = r.get_table("endpoint_w").and_then(|t| t.column("h_distance")).unwrap_or_default();
    let failed: Vec<&str> = r.verdicts.iter().filter(|v| !v.pass).map(|v| v.name.as_str()).collect();
    let w: Vec<String> = w.iter().map(|x| format!("{x:.3e}")).collect();
    let detail = format!("H^(-1+δ) distances [{}]; failed verdicts {failed:?}", w.join(", "));
    Ok((r.pass, detail, vec![r]))
}
