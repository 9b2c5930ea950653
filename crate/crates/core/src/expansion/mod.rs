//! Graph values, expansion coefficients and `τ`-convergence scans.

mod momentum;
mod observable;

pub use momentum::{EdgeTables, GraphPlan};
pub use crate::exec::{Executor, Sequential};
pub use observable::{Observable, Representation, SparseMatrix};

use crate::error::{Error, Result};
use crate::num::{factorial, frac, gauss_legendre, Sum};
use crate::potentials::PotentialSpec;
use crate::spectral::{green_coeff, FourierKernel, KernelKind, ModeBall, TorusSpec};
use crate::wick::{self, Family, Multigraph, Pairing, VertexSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Ordered interaction times `t_1 > … > t_m` inside `(η, 1-η)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeConfig {
    pub eta: f64,
    pub times: Vec<f64>,
}

impl TimeConfig {
    pub fn new(eta: f64, times: Vec<f64>) -> Result<Self> {
        if !(0.0..=0.25).contains(&eta) {
            return Err(Error::param("eta", format!("{eta} is outside [0, 1/4]")));
        }
        let ordered = times.windows(2).all(|w| w[0] > w[1]);
        let inside = times.iter().all(|&t| t > eta && t < 1.0 - eta);
        if !ordered || !inside {
            return Err(Error::param("times", "need strictly decreasing times inside (eta, 1 - eta)"));
        }
        Ok(Self { eta, times })
    }

    /// Classical evaluation has no times; this is the empty placeholder.
    pub fn none() -> Self {
        Self { eta: 0.0, times: Vec::new() }
    }

    /// Time of collapsed vertex `v`; the observable sits at `0`.
    pub fn slot_time(&self, g: &Multigraph, v: usize) -> f64 {
        let i = g.vertices[v].i as usize;
        if i <= g.m as usize {
            self.times[i - 1]
        } else {
            0.0
        }
    }
}

/// `η = 0` in one dimension, `1/8` otherwise.
pub fn default_eta(d: usize) -> f64 {
    if d == 1 {
        0.0
    } else {
        0.125
    }
}

/// Which part of the quantum edge kernel to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum KernelPart {
    Full,
    /// Only `Q^(1)`: drops the heat-kernel and contact terms.
    Q1Only,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Regime {
    Quantum { tau: f64, part: KernelPart },
    Classical,
}

impl Regime {
    pub fn quantum(tau: f64) -> Self {
        Regime::Quantum { tau, part: KernelPart::Full }
    }
}

/// Coefficients of the edge kernel for colour `sigma`, time gap
/// `dt = s_a - s_b >= 0`, and whether both ends share a time slot.
pub fn edge_coeffs(spec: &TorusSpec, sigma: i8, dt: f64, same_slot: bool, regime: Regime) -> Result<Vec<f64>> {
    let modes = spec.modes();
    match regime {
        Regime::Classical => Ok(modes.iter().map(|k| 1.0 / spec.eigenvalue(k)).collect()),
        Regime::Quantum { tau, part } => {
            if !(tau >= 1.0 && tau.is_finite()) {
                return Err(Error::param("tau", format!("{tau} must be finite and >= 1")));
            }
            let t = sigma as f64 * dt;
            if !(t > -1.0 && t < 1.0) {
                return Err(Error::param("t", format!("time difference {t} is outside (-1, 1)")));
            }
            let ft = frac(t);
            let heat = part == KernelPart::Full && t != 0.0;
            let contact = part == KernelPart::Full && sigma == 1 && same_slot;
            Ok(modes
                .iter()
                .map(|k| {
                    let lam = spec.eigenvalue(k);
                    let mut c = green_coeff(lam, tau, ft);
                    if heat {
                        c += libm::exp(-ft * (lam / tau)) / tau;
                    }
                    if contact {
                        c += 1.0 / tau;
                    }
                    c
                })
                .collect())
        }
    }
}

/// Kernel of edge `e` of `g`.
pub fn edge_kernel(g: &Multigraph, e: usize, times: &TimeConfig, regime: Regime, spec: &TorusSpec) -> Result<FourierKernel> {
    let c = edge_table(g, e, times, regime, spec)?;
    FourierKernel::new(*spec, KernelKind::Custom, c)
}

fn edge_table(g: &Multigraph, e: usize, times: &TimeConfig, regime: Regime, spec: &TorusSpec) -> Result<Vec<f64>> {
    let ed = g.edges.get(e).ok_or_else(|| Error::param("edge", format!("no edge {e}")))?;
    let (sa, sb) = match regime {
        Regime::Classical => (0.0, 0.0),
        Regime::Quantum { .. } => {
            if times.times.len() != g.m as usize {
                return Err(Error::param("times", format!("need {} times, got {}", g.m, times.times.len())));
            }
            (times.slot_time(g, ed.a), times.slot_time(g, ed.b))
        }
    };
    edge_coeffs(spec, ed.sigma, (sa - sb).max(0.0), g.slot(ed.a) == g.slot(ed.b), regime)
}

/// All collapsed graphs of one pairing family with their plans, in canonical
/// order.
#[derive(Clone, Debug)]
pub struct GraphSet {
    pub vertex_set: VertexSet,
    pub family: Family,
    pub pairings: Vec<Pairing>,
    pub graphs: Vec<Multigraph>,
    pub plans: Vec<GraphPlan>,
}

impl GraphSet {
    pub fn new(m: u32, xi: &Observable, d: usize) -> Result<Self> {
        let vs = wick::build_vertex_set(m, xi.rank(), d, xi.kind())?;
        let family = Family::for_dim(d);
        let mut pairings = wick::enumerate_pairings(&vs, family)?;
        pairings.sort();
        let graphs = pairings.iter().map(|p| wick::collapse(p, &vs)).collect::<Result<Vec<_>>>()?;
        let plans = graphs.iter().map(GraphPlan::new).collect();
        Ok(Self { vertex_set: vs, family, pairings, graphs, plans })
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }
}

fn check_setup(spec: &TorusSpec, w: &PotentialSpec, xi: &Observable) -> Result<()> {
    if w.spec != *spec {
        return Err(Error::CutoffMismatch);
    }
    xi.check(spec)
}

fn tables_for(g: &Multigraph, times: &TimeConfig, regime: Regime, spec: &TorusSpec) -> Result<Vec<Vec<f64>>> {
    (0..g.edges.len()).map(|e| edge_table(g, e, times, regime, spec)).collect()
}

/// Value of one collapsed graph, complex in general.
pub fn graph_value_complex(
    g: &Multigraph,
    times: &TimeConfig,
    regime: Regime,
    w: &PotentialSpec,
    xi: &Observable,
    spec: &TorusSpec,
) -> Result<Complex64> {
    check_setup(spec, w, xi)?;
    let plan = GraphPlan::new(g);
    let props = tables_for(g, times, regime, spec)?;
    let pb = spec.ball();
    let wb = ModeBall::new(spec.d, w.radius());
    let t = EdgeTables { prop_ball: &pb, props: &props, w_ball: &wb, w: w.coeffs.coeffs() };
    Ok(plan.evaluate(&t, xi))
}

/// Value of the graph of `pairing`, asserting a negligible imaginary part.
pub fn graph_value(
    pairing: &Pairing,
    vs: &VertexSet,
    times: &TimeConfig,
    regime: Regime,
    w: &PotentialSpec,
    xi: &Observable,
    spec: &TorusSpec,
) -> Result<f64> {
    let g = wick::collapse(pairing, vs)?;
    real_part(graph_value_complex(&g, times, regime, w, xi, spec)?)
}

fn real_part(z: Complex64) -> Result<f64> {
    if libm::fabs(z.im) > 1e-10 * (1.0 + libm::fabs(z.re)) {
        return Err(Error::ImaginaryResidue { residual: libm::fabs(z.im) });
    }
    Ok(z.re)
}

/// One expansion coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CoeffRecord {
    pub m: u32,
    /// `None` stands for the classical limit `τ = ∞`.
    pub tau: Option<f64>,
    pub value: f64,
    pub quad_error: f64,
    pub pairings: usize,
}

fn sum_graphs(gs: &GraphSet, tables: &[Vec<Vec<f64>>], wb: &ModeBall, w: &[f64], xi: &Observable, spec: &TorusSpec, exec: &dyn Executor) -> Complex64 {
    let pb = spec.ball();
    let vals = exec.map_complex(gs.len(), &|j| {
        let t = EdgeTables { prop_ball: &pb, props: &tables[j], w_ball: wb, w };
        gs.plans[j].evaluate(&t, xi)
    });
    let mut re = Sum::new();
    let mut im = Sum::new();
    for v in vals {
        re.add(v.re);
        im.add(v.im);
    }
    Complex64::new(re.value(), im.value())
}

/// `a_m = (-1)^m / (m! 2^m) Σ_Π ℐ_Π`.
pub fn coeff_classical(m: u32, xi: &Observable, w: &PotentialSpec, spec: &TorusSpec) -> Result<CoeffRecord> {
    coeff_classical_with(m, xi, w, spec, &Sequential)
}

pub fn coeff_classical_with(m: u32, xi: &Observable, w: &PotentialSpec, spec: &TorusSpec, exec: &dyn Executor) -> Result<CoeffRecord> {
    check_setup(spec, w, xi)?;
    let gs = GraphSet::new(m, xi, spec.d)?;
    let none = TimeConfig::none();
    let tables = gs.graphs.iter().map(|g| tables_for(g, &none, Regime::Classical, spec)).collect::<Result<Vec<_>>>()?;
    let wb = ModeBall::new(spec.d, w.radius());
    let s = real_part(sum_graphs(&gs, &tables, &wb, w.coeffs.coeffs(), xi, spec, exec))?;
    let pre = sign(m) / (factorial(m) * libm::pow(2.0, m as f64));
    Ok(CoeffRecord { m, tau: None, value: pre * s, quad_error: 0.0, pairings: gs.len() })
}

fn sign(m: u32) -> f64 {
    if m.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Options for the simplex quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QuadOptions {
    /// Gauss–Legendre points per direction; the error estimate compares
    /// against twice this order, whose value is reported.
    pub order: usize,
    pub eta: f64,
    pub part: KernelPart,
}

impl QuadOptions {
    pub fn new(d: usize) -> Self {
        Self { order: 8, eta: default_eta(d), part: KernelPart::Full }
    }
}

/// `a_{τ,m} = (-1)^m / ((1-2η)^m 2^m) ∫_simplex Σ_Π ℐ_{τ,Π}(t) dt`, with `w`
/// already mollified.
pub fn coeff_quantum(m: u32, xi: &Observable, tau: f64, w: &PotentialSpec, spec: &TorusSpec, opts: QuadOptions) -> Result<CoeffRecord> {
    coeff_quantum_with(m, xi, tau, w, spec, opts, &Sequential)
}

pub fn coeff_quantum_with(
    m: u32,
    xi: &Observable,
    tau: f64,
    w: &PotentialSpec,
    spec: &TorusSpec,
    opts: QuadOptions,
    exec: &dyn Executor,
) -> Result<CoeffRecord> {
    if opts.order < 2 {
        return Err(Error::param("quadOrder", format!("{} is below 2", opts.order)));
    }
    if (spec.d == 1) != (opts.eta == 0.0) {
        return Err(Error::param("eta", format!("eta = 0 exactly when d = 1 (d = {}, eta = {})", spec.d, opts.eta)));
    }
    check_setup(spec, w, xi)?;
    let gs = GraphSet::new(m, xi, spec.d)?;
    let wb = ModeBall::new(spec.d, w.radius());
    let regime = Regime::Quantum { tau, part: opts.part };
    let integrand = |times: &TimeConfig| -> Result<Complex64> {
        let tables = gs.graphs.iter().map(|g| tables_for(g, times, regime, spec)).collect::<Result<Vec<_>>>()?;
        Ok(sum_graphs(&gs, &tables, &wb, w.coeffs.coeffs(), xi, spec, exec))
    };
    let pre = sign(m) / libm::pow(2.0, m as f64);
    if m == 0 {
        let v = real_part(integrand(&TimeConfig::none())?)?;
        return Ok(CoeffRecord { m, tau: Some(tau), value: v, quad_error: 0.0, pairings: gs.len() });
    }
    let coarse = simplex_integral(m as usize, opts.eta, opts.order, &integrand)?;
    let fine = simplex_integral(m as usize, opts.eta, 2 * opts.order, &integrand)?;
    let v = real_part(fine)?;
    let err = (fine - coarse).norm();
    Ok(CoeffRecord { m, tau: Some(tau), value: pre * v, quad_error: pre.abs() * err, pairings: gs.len() })
}

/// `(1-2η)^{-m} ∫_{η<t_m<…<t_1<1-η} f(t) dt`, by stick-breaking
/// `x_1 = v_1, x_{j+1} = x_j v_{j+1}`, `t_j = η + (1-2η) x_j`, and tensor
/// Gauss–Legendre in `v`.
pub fn simplex_integral(
    m: usize,
    eta: f64,
    order: usize,
    f: &dyn Fn(&TimeConfig) -> Result<Complex64>,
) -> Result<Complex64> {
    let (x, wq) = gauss_legendre(order);
    let span = 1.0 - 2.0 * eta;
    let mut idx = vec![0usize; m];
    let mut re = Sum::new();
    let mut im = Sum::new();
    loop {
        let mut xs = 1.0;
        let mut jac = 1.0;
        let mut wt = 1.0;
        let mut times = Vec::with_capacity(m);
        for (j, &q) in idx.iter().enumerate() {
            if j > 0 {
                jac *= xs;
            }
            xs *= x[q];
            wt *= wq[q];
            times.push(eta + span * xs);
        }
        let tc = TimeConfig { eta, times };
        let v = f(&tc)? * (wt * jac);
        re.add(v.re);
        im.add(v.im);
        let mut a = m;
        loop {
            if a == 0 {
                return Ok(Complex64::new(re.value(), im.value()));
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] < order {
                break;
            }
            idx[a] = 0;
        }
    }
}

/// Partial sum `Σ_{m<M} a_m z^m`.
pub fn series_eval(coeffs: &[f64], z: f64, big_m: usize) -> Result<f64> {
    if big_m > coeffs.len() {
        return Err(Error::param("M", format!("need {big_m} coefficients, have {}", coeffs.len())));
    }
    let mut s = Sum::new();
    let mut zp = 1.0;
    for a in &coeffs[..big_m] {
        s.add(a * zp);
        zp *= z;
    }
    Ok(s.value())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScanRow {
    pub tau: f64,
    pub value: f64,
    pub gap: f64,
    pub quad_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConvergenceScan {
    pub m: u32,
    pub classical: f64,
    /// Same `w` at every `τ`; diagnostic only.
    pub frozen: bool,
    pub rows: Vec<ScanRow>,
}

/// `a_{τ,m}` and its distance to `a_{∞,m}` along `taus`. The potential is
/// re-mollified at every `τ` unless `frozen`.
#[allow(clippy::too_many_arguments)]
pub fn convergence_scan(
    m: u32,
    xi: &Observable,
    taus: &[f64],
    w: &PotentialSpec,
    spec: &TorusSpec,
    opts: QuadOptions,
    frozen: bool,
    exec: &dyn Executor,
) -> Result<ConvergenceScan> {
    let classical = coeff_classical_with(m, xi, w, spec, exec)?.value;
    let mut rows = Vec::with_capacity(taus.len());
    for &tau in taus {
        let wt = if frozen { w.clone() } else { w.mollify(tau)? };
        let c = coeff_quantum_with(m, xi, tau, &wt, spec, opts, exec)?;
        rows.push(ScanRow { tau, value: c.value, gap: libm::fabs(c.value - classical), quad_error: c.quad_error });
    }
    Ok(ConvergenceScan { m, classical, frozen, rows })
}

#[cfg(test)]
mod tests;
