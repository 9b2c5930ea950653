use super::{differenced_exponents, loglog_slope, within, CheckReport, Table};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::expansion::{coeff_classical_with, convergence_scan, Observable, QuadOptions};
use crate::mc::{mc_deformed, McConfig};
use crate::num::factorial;
use crate::potentials::PotentialSpec;
use crate::spectral::{sub, TorusSpec};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// Envelope `|a_m| <= ν σ^m m!`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GrowthFit {
    pub nu: f64,
    pub sigma: f64,
    /// Least-squares growth rate before clamping to `σ >= 1`.
    pub raw_sigma: f64,
    pub orders: Vec<u32>,
}

impl GrowthFit {
    pub fn bound(&self, m: u32) -> f64 {
        self.nu * libm::pow(self.sigma, m as f64) * factorial(m)
    }
}

/// `σ` from a least-squares fit of `ln(|a_m|/m!)` against `m`, clamped to
/// at least 1; then the smallest `ν` for which the envelope holds at every
/// order. `coeffs[m] = a_m`.
pub fn factorial_growth_fit(coeffs: &[f64]) -> Result<GrowthFit> {
    if coeffs.len() < 3 {
        return Err(Error::param("coeffs", format!("need at least 3 orders, got {}", coeffs.len())));
    }
    let (ms, ys): (Vec<f64>, Vec<f64>) = coeffs
        .iter()
        .enumerate()
        .filter(|(_, a)| **a != 0.0)
        .map(|(m, a)| (m as f64, libm::log(libm::fabs(*a) / factorial(m as u32))))
        .unzip();
    let raw_sigma = if ms.len() >= 2 { libm::exp(crate::num::linear_fit(&ms, &ys).0) } else { 1.0 };
    let sigma = raw_sigma.max(1.0);
    let nu = coeffs
        .iter()
        .enumerate()
        .map(|(m, a)| libm::fabs(*a) / (libm::pow(sigma, m as f64) * factorial(m as u32)))
        .fold(0.0, f64::max);
    Ok(GrowthFit { nu, sigma, raw_sigma, orders: (0..coeffs.len() as u32).collect() })
}

/// Whether the fitted growth rate scales linearly with the potential
/// strength: log-log slope of raw `σ` against `‖w‖` within 30% of 1.
/// `fits` holds `(‖w‖, coefficients)` pairs.
pub fn growth_strength_scan(fits: &[(f64, Vec<f64>)]) -> Result<CheckReport> {
    let mut rep = CheckReport::new("growth_strength_scan");
    let mut tab = Table::new("growth", &["w_norm", "nu", "sigma", "raw_sigma", "scaled_sigma"]);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (norm, c) in fits {
        let f = factorial_growth_fit(c)?;
        tab.push(&[*norm, f.nu, f.sigma, f.raw_sigma, f.raw_sigma / (1.0 + norm)]);
        xs.push(*norm);
        ys.push(f.raw_sigma);
    }
    if xs.len() < 2 {
        return Err(Error::param("fits", "need at least two strengths"));
    }
    let slope = loglog_slope(&xs, &ys);
    rep.input("strengths", format!("{xs:?}"));
    rep.metric("sigma_slope", slope);
    rep.table(tab);
    rep.require("linear-in-strength", within(slope, 0.7, 1.3), format!("slope {slope}"));
    Ok(rep)
}

/// Remainder check: `|E[Θ e^{-zW}] - Σ_{m<M} a_m z^m| <= ν σ^M M! z^M + 3σ_MC`
/// with `(ν, σ)` fitted on `a_0 .. a_{max(M,3)}`. For `M = 0` the partial
/// sum is `a_0` and the bound is `ν`.
pub fn series_vs_mc(
    xi: &Observable,
    w: &PotentialSpec,
    z: f64,
    big_m: u32,
    n: usize,
    seed: u64,
    exec: &dyn Executor,
) -> Result<CheckReport> {
    if !(z > 0.0 && z <= 0.5) {
        return Err(Error::param("z", format!("{z} is outside (0, 0.5]")));
    }
    if big_m > 3 {
        return Err(Error::param("M", format!("{big_m} exceeds 3")));
    }
    let spec = w.spec;
    let top = big_m.max(3);
    let coeffs: Vec<f64> = (0..=top).map(|m| coeff_classical_with(m, xi, w, &spec, exec).map(|c| c.value)).collect::<Result<_>>()?;
    let fit = factorial_growth_fit(&coeffs)?;
    let mc = mc_deformed(xi, w, z, McConfig { n, seed }, exec)?;
    let (partial, bound) = if big_m == 0 {
        (coeffs[0], fit.nu)
    } else {
        let p: f64 = (0..big_m as usize).map(|m| coeffs[m] * libm::pow(z, m as f64)).sum();
        (p, fit.bound(big_m) * libm::pow(z, big_m as f64))
    };
    let diff = libm::fabs(mc.mean - partial);
    let allowed = bound + 3.0 * mc.stderr;
    let mut rep = CheckReport::new("series_vs_mc");
    rep.input("z", z).input("M", big_m).input("n", n).input("seed", seed).input("d", spec.d).input("K", spec.cutoff);
    let mut tab = Table::new("series_coefficients", &["m", "a_m", "envelope"]);
    for (m, a) in coeffs.iter().enumerate() {
        tab.push(&[m as f64, *a, fit.bound(m as u32)]);
    }
    rep.table(tab);
    rep.metric("mc_mean", mc.mean).metric("mc_stderr", mc.stderr).metric("partial_sum", partial);
    rep.metric("difference", diff).metric("remainder_bound", bound).metric("margin", allowed - diff);
    rep.metric("nu", fit.nu).metric("sigma", fit.sigma);
    rep.require("remainder-bound", diff <= allowed, format!("{diff} <= {allowed}"));
    Ok(rep)
}

/// `|a_{τ,m} - a_{∞,m}|` along `taus` with the potential re-mollified at
/// every `τ`, maximised over the observables. Requires a 10x drop from the
/// first to the last `τ` and a final gap below 10x the quadrature error.
pub fn coefficient_convergence(
    m: u32,
    xis: &[(String, Observable)],
    w: &PotentialSpec,
    spec: &TorusSpec,
    taus: &[f64],
    opts: QuadOptions,
    exec: &dyn Executor,
) -> Result<CheckReport> {
    if taus.len() < 2 || xis.is_empty() {
        return Err(Error::param("taus", "need two τ values and at least one observable"));
    }
    let mut rep = CheckReport::new("coefficient_convergence");
    rep.input("m", m).input("d", spec.d).input("K", spec.cutoff).input("taus", format!("{taus:?}"));
    rep.input("order", opts.order).input("eta", opts.eta);
    let mut tab = Table::new("coefficient_gap", &["observable", "tau", "value", "classical", "gap", "quad_error"]);
    let mut gap = vec![0.0f64; taus.len()];
    let mut quad = vec![0.0f64; taus.len()];
    for (j, (_, xi)) in xis.iter().enumerate() {
        let scan = convergence_scan(m, xi, taus, w, spec, opts, false, exec)?;
        for (i, r) in scan.rows.iter().enumerate() {
            tab.push(&[j as f64, r.tau, r.value, scan.classical, r.gap, r.quad_error]);
            gap[i] = gap[i].max(r.gap);
            quad[i] = quad[i].max(r.quad_error);
        }
    }
    rep.table(tab);
    let (g0, g1, q1) = (gap[0], gap[taus.len() - 1], quad[taus.len() - 1]);
    rep.metric("gap_first", g0).metric("gap_last", g1).metric("drop", g0 / g1).metric("quad_error_last", q1);
    rep.metric("gap_over_quad", g1 / q1);
    rep.require("tenfold-drop", g0 >= 10.0 * g1, format!("{g0} -> {g1}"));
    rep.require("quadrature-floor", g1 < 10.0 * q1, format!("gap {g1} vs 10 x quad {q1}"));
    Ok(rep)
}

/// `∫ w G_[K]² = Σ_{k,l} ŵ(k-l) / (λ_k λ_l)` across cutoffs, using the
/// potential's stored coefficients. `expect_divergent` selects the verdict:
/// sustained growth or saturation. Growth means successive increments shrink
/// by less than half per cutoff doubling with a positive differenced exponent.
pub fn optimality_probe(
    d: usize,
    kappa: f64,
    ks: &[u32],
    build: &dyn Fn(&TorusSpec) -> Result<PotentialSpec>,
    expect_divergent: bool,
) -> Result<CheckReport> {
    if !(2..=3).contains(&d) || ks.len() < 3 {
        return Err(Error::param("d", "need d in {2,3} and at least three cutoffs"));
    }
    let mut rep = CheckReport::new("optimality_probe");
    rep.input("d", d).input("kappa", kappa).input("ks", format!("{ks:?}")).input("expect_divergent", expect_divergent);
    let mut tab = Table::new("optimality", &["k", "value"]);
    let mut vals = Vec::new();
    for &k in ks {
        let spec = TorusSpec::new(d, kappa, k)?;
        let w = build(&spec)?;
        let modes = spec.modes();
        let inv: Vec<f64> = modes.iter().map(|m| 1.0 / spec.eigenvalue(m)).collect();
        let mut acc = crate::num::Sum::new();
        for (a, ka) in modes.iter().enumerate() {
            let mut row = 0.0;
            for (b, kb) in modes.iter().enumerate() {
                row += w.coeff(&sub(ka, kb)) * inv[b];
            }
            acc.add(row * inv[a]);
        }
        tab.push(&[k as f64, acc.value()]);
        vals.push(acc.value());
    }
    rep.table(tab);
    let inc: Vec<f64> = vals.windows(2).map(|w| w[1] - w[0]).collect();
    let ratio = inc[inc.len() - 1] / inc[inc.len() - 2];
    let kx: Vec<f64> = ks.iter().map(|k| *k as f64).collect();
    let exps = differenced_exponents(&kx, &vals);
    rep.metric("value_last", vals[vals.len() - 1]).metric("increment_ratio_last", ratio);
    rep.metric("relative_last_increment", inc[inc.len() - 1] / vals[vals.len() - 1]);
    if expect_divergent {
        rep.require("grows", ratio >= 0.5 && inc.iter().all(|x| *x > 0.0), format!("increments {inc:?}, exponents {exps:?}"));
    } else {
        rep.require("saturates", ratio < 0.5, format!("increments {inc:?}"));
    }
    Ok(rep)
}
