//! Interaction potentials, their bounded mollifications and the property
//! checks those mollifications must satisfy.

use crate::error::{Error, Result};
use crate::num::{gauss_legendre, Sum};
use crate::spectral::{
    bracket, grid_values, norm2, sobolev_norm_coeffs, FourierKernel, GridSpec, KernelKind, Mode, TorusSpec,
};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use serde::{Deserialize, Serialize};

/// Which construction produced the coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "variant")]
pub enum Variant {
    Constant { c: f64 },
    PowerFourier { q: f64 },
    SelfConvolution { q: f64 },
    EndpointSquare { eps: f64 },
    UserCoefficients,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Constant { .. } => "constant",
            Variant::PowerFourier { .. } => "powerFourier",
            Variant::SelfConvolution { .. } => "selfConvolution",
            Variant::EndpointSquare { .. } => "endpointSquare",
            Variant::UserCoefficients => "userCoefficients",
        }
    }

    /// The variant's own parameter, if any, as `(name, value)`.
    pub fn param(&self) -> Option<(&'static str, f64)> {
        match *self {
            Variant::Constant { c } => Some(("c", c)),
            Variant::PowerFourier { q } | Variant::SelfConvolution { q } => Some(("q", q)),
            Variant::EndpointSquare { eps } => Some(("eps", eps)),
            Variant::UserCoefficients => None,
        }
    }

    pub fn from_parts(name: &str, value: Option<f64>) -> Result<Self> {
        let need = |v: Option<f64>| v.ok_or_else(|| Error::param("variant", format!("{name} needs a parameter")));
        Ok(match name {
            "constant" => Variant::Constant { c: need(value)? },
            "powerFourier" => Variant::PowerFourier { q: need(value)? },
            "selfConvolution" => Variant::SelfConvolution { q: need(value)? },
            "endpointSquare" => Variant::EndpointSquare { eps: need(value)? },
            "userCoefficients" => Variant::UserCoefficients,
            _ => return Err(Error::param("variant", format!("unknown variant {name}"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum MollifierKind {
    /// Pointwise clipping on the interpolation grid (d = 1).
    Clip,
    /// Smooth Fourier cutoff `χ(k/M)`.
    Multiplier,
    /// Gaussian damping `e^{-π|k|²/τ^β}`.
    Gaussian,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mollification {
    pub kind: MollifierKind,
    pub tau: f64,
    pub beta: f64,
    /// `M(τ)` for the multiplier, `τ^{β/2}` for the Gaussian, `τ^β` for clipping.
    pub scale: f64,
}

/// An even interaction potential stored as Fourier coefficients.
///
/// `spec` is the field torus (cutoff `K`); `coeffs` may live on a larger ball
/// and is zero outside it.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSpec {
    pub spec: TorusSpec,
    pub variant: Variant,
    pub p: f64,
    pub beta: f64,
    /// Fitted `L` in `ŵ(k) <= L⟨k⟩^{-ε}` (endpoint variant only).
    pub l: Option<f64>,
    pub coeffs: FourierKernel,
    pub mollified: Option<Mollification>,
}

impl PotentialSpec {
    #[inline]
    pub fn coeff(&self, k: &Mode) -> f64 {
        self.coeffs.coeff(k)
    }

    pub fn radius(&self) -> u32 {
        self.coeffs.spec().cutoff
    }

    pub fn epsilon(&self) -> Option<f64> {
        match self.variant {
            Variant::EndpointSquare { eps } => Some(eps),
            _ => None,
        }
    }

    /// `δ = ε/2`.
    pub fn delta(&self) -> Option<f64> {
        self.epsilon().map(|e| e / 2.0)
    }

    pub fn is_positive_type(&self) -> bool {
        self.coeffs.is_positive_type()
    }

    /// Grid on which norms of this potential are measured.
    pub fn grid(&self) -> GridSpec {
        GridSpec::for_cutoff(self.radius())
    }

    /// Grid `L^q` norm.
    pub fn lp_norm(&self, q: f64) -> Result<f64> {
        crate::spectral::lp_norm(&self.coeffs, q, &self.grid())
    }

    /// Replace the stored coefficients; validation as for `FourierKernel::new`.
    fn with_coeffs(&self, coeffs: Vec<f64>, m: Mollification) -> Result<Self> {
        let k = FourierKernel::new(*self.coeffs.spec(), KernelKind::Potential, coeffs)?;
        Ok(Self { coeffs: k, mollified: Some(m), ..self.clone() })
    }

    /// The τ-dependent bounded approximation appropriate for this potential.
    pub fn mollify(&self, tau: f64) -> Result<Self> {
        match (self.spec.d, self.variant) {
            (1, _) => mollify_1d(self, tau, self.beta),
            (2, Variant::EndpointSquare { .. }) => mollify_endpoint(self, tau, self.beta),
            _ => mollify_fourier(self, tau, self.beta, Chi::default()),
        }
    }
}

/// `p ∈ 𝒫_d`.
pub fn in_p_set(d: usize, p: f64) -> bool {
    match d {
        1 => p >= 1.0 && p.is_finite(),
        2 => p > 1.0 && p.is_finite(),
        3 => p > 3.0 && p.is_finite(),
        _ => false,
    }
}

/// `β ∈ ℬ_d`.
pub fn in_b_set(d: usize, beta: f64) -> bool {
    match d {
        1 | 2 => beta > 0.0 && beta < 1.0,
        3 => beta > 0.0 && beta < 0.5,
        _ => false,
    }
}

/// `q ∈ 𝒬_d`; `q = ∞` allowed only for `d = 1`.
pub fn in_q_set(d: usize, q: f64) -> bool {
    match d {
        1 => q >= 1.0,
        2 => q >= 1.0 && q.is_finite(),
        3 => (1.0..3.0).contains(&q),
        _ => false,
    }
}

pub fn default_beta(d: usize) -> f64 {
    if d == 3 {
        0.45
    } else {
        0.9
    }
}

fn check_p(d: usize, p: f64) -> Result<()> {
    if in_p_set(d, p) {
        Ok(())
    } else {
        Err(Error::param("p", format!("{p} is not admissible in d={d}")))
    }
}

fn make(spec: &TorusSpec, radius: u32, variant: Variant, p: f64, coeffs: Vec<f64>) -> Result<PotentialSpec> {
    let store = spec.with_cutoff(radius);
    Ok(PotentialSpec {
        spec: *spec,
        variant,
        p,
        beta: default_beta(spec.d),
        l: None,
        coeffs: FourierKernel::new(store, KernelKind::Potential, coeffs)?,
        mollified: None,
    })
}

/// `w ≡ c`, `c >= 0`.
pub fn build_constant(spec: &TorusSpec, c: f64) -> Result<PotentialSpec> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::param("c", format!("{c} must be finite and nonnegative")));
    }
    let modes = spec.modes();
    let coeffs = modes.iter().map(|m| if norm2(m) == 0 { c } else { 0.0 }).collect();
    make(spec, spec.cutoff, Variant::Constant { c }, 2.0, coeffs)
}

/// `ŵ(k) = ⟨k⟩^{-d/q}` on `|k| <= K`, for `p >= 2` in `𝒫_d` and `q ∈ (1, p')`.
pub fn build_power_fourier(spec: &TorusSpec, q: f64, p: f64) -> Result<PotentialSpec> {
    if !(2..=3).contains(&spec.d) {
        return Err(Error::param("d", format!("power-law potential needs d in {{2,3}}, got {}", spec.d)));
    }
    check_p(spec.d, p)?;
    if p < 2.0 {
        return Err(Error::param("p", format!("{p} < 2; use the self-convolution family")));
    }
    let pc = p / (p - 1.0);
    if !(q > 1.0 && q < pc) {
        return Err(Error::param("q", format!("{q} is outside (1, {pc})")));
    }
    let e = spec.d as f64 / q;
    let coeffs = spec.modes().iter().map(|m| libm::pow(bracket(m), -e)).collect();
    make(spec, spec.cutoff, Variant::PowerFourier { q }, p, coeffs)
}

/// `w = f * f` with `f = |x|^{-d/q} χ(x)`, `χ = 1` on `|x| <= 1/3` and `0`
/// past `1/2`; `ŵ = f̂²` on `|k| <= K`. Needs `p ∈ 𝒫_d ∩ [1,2)` and `q ∈ (p,2)`.
pub fn build_self_convolution(spec: &TorusSpec, q: f64, p: f64) -> Result<PotentialSpec> {
    if spec.d == 3 {
        return Err(Error::param("d", "no exponent p < 2 is admissible in d=3"));
    }
    check_p(spec.d, p)?;
    if !(p < 2.0 && q > p && q < 2.0) {
        return Err(Error::param("q", format!("need p < q < 2, got p={p}, q={q}")));
    }
    let modes = spec.modes();
    let mut cache: Vec<(i64, f64)> = Vec::new();
    let mut coeffs = Vec::with_capacity(modes.len());
    for m in &modes {
        let n2 = norm2(m);
        let f = match cache.iter().find(|(k, _)| *k == n2) {
            Some(&(_, v)) => v,
            None => {
                let v = radial_hat(spec.d, q, libm::sqrt(n2 as f64));
                cache.push((n2, v));
                v
            }
        };
        coeffs.push(f * f);
    }
    make(spec, spec.cutoff, Variant::SelfConvolution { q }, p, coeffs)
}

/// Fourier transform at frequency `rho` of `|x|^{-d/q} χ(|x|)` on `R^d`.
pub fn radial_hat(d: usize, q: f64, rho: f64) -> f64 {
    let (lo, hi) = (1.0 / 3.0, 0.5);
    // r^b dr with b = d - 1 - d/q; substitute r = R v^{1/a}, a = b + 1.
    let a = d as f64 * (1.0 - 1.0 / q);
    let w = 2.0 * PI * rho;
    let kern = |r: f64| -> f64 {
        let c = smooth_cut(r, lo, hi);
        match d {
            1 => 2.0 * c * libm::cos(w * r),
            2 => 2.0 * PI * c * libm::j0(w * r),
            _ => {
                let z = w * r;
                4.0 * PI * c * if z == 0.0 { 1.0 } else { libm::sin(z) / z }
            }
        }
    };
    let (x, wt) = gauss_legendre(16);
    let panels = 96;
    let mut acc = Sum::new();
    for j in 0..panels {
        let h = 1.0 / panels as f64;
        for (xi, wi) in x.iter().zip(&wt) {
            let v = (j as f64 + xi) * h;
            acc.add(h * wi * kern(hi * libm::pow(v, 1.0 / a)));
        }
    }
    libm::pow(hi, a) / a * acc.value()
}

/// Autocorrelation of `f̂(k) = ⟨k⟩^{-1-ε}` over `|k'|, |k-k'| <= K`, stored on
/// the `2K` ball so that `w = f_K²` holds exactly and is pointwise nonnegative.
pub fn build_endpoint_square(spec: &TorusSpec, eps: f64) -> Result<PotentialSpec> {
    if spec.d != 2 {
        return Err(Error::param("d", format!("endpoint potentials need d = 2, got {}", spec.d)));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::param("eps", format!("{eps} is outside (0, 1]")));
    }
    let coeffs = square_autocorrelation(spec, eps, spec.cutoff, 2 * spec.cutoff);
    let mut w = make(spec, 2 * spec.cutoff, Variant::EndpointSquare { eps }, 1.0, coeffs)?;
    w.l = Some(fit_l(&w.coeffs, eps));
    Ok(w)
}

/// `Σ f̂(k')f̂(k-k')` with `f̂ = ⟨k⟩^{-1-ε}` supported on `|k'| <= inner`,
/// for every `k` on the ball of radius `outer` (in `spec.modes()` order).
pub fn square_autocorrelation(spec: &TorusSpec, eps: f64, inner: u32, outer: u32) -> Vec<f64> {
    let inner = spec.with_cutoff(inner).ball();
    let fhat: Vec<f64> = inner.modes().iter().map(|m| libm::pow(bracket(m), -1.0 - eps)).collect();
    let outer = spec.with_cutoff(outer).modes();
    let mut coeffs = Vec::with_capacity(outer.len());
    for k in &outer {
        let mut s = Sum::new();
        for (i, kp) in inner.modes().iter().enumerate() {
            if let Some(j) = inner.index(&crate::spectral::sub(k, kp)) {
                s.add(fhat[i] * fhat[j]);
            }
        }
        coeffs.push(s.value());
    }
    coeffs
}

/// Smallest `L` with `ŵ(k) <= L⟨k⟩^{-ε}` on the stored ball.
pub fn fit_l(w: &FourierKernel, eps: f64) -> f64 {
    w.iter().map(|(m, c)| c * libm::pow(bracket(m), eps)).fold(0.0, f64::max)
}

/// Wrap user coefficients (any ball radius) as a potential.
pub fn from_coefficients(spec: &TorusSpec, coeffs: FourierKernel, p: f64) -> Result<PotentialSpec> {
    if coeffs.spec().d != spec.d || coeffs.spec().kappa != spec.kappa {
        return Err(Error::CutoffMismatch);
    }
    let coeffs = coeffs.with_kind(KernelKind::Potential);
    Ok(PotentialSpec {
        spec: *spec,
        variant: Variant::UserCoefficients,
        p,
        beta: default_beta(spec.d),
        l: None,
        coeffs,
        mollified: None,
    })
}

/// Septic smoothstep: `1` for `r <= lo`, `0` for `r >= hi`, `C³` in between.
pub fn smooth_cut(r: f64, lo: f64, hi: f64) -> f64 {
    if r <= lo {
        return 1.0;
    }
    if r >= hi {
        return 0.0;
    }
    let u = (r - lo) / (hi - lo);
    let u4 = u * u * u * u;
    1.0 - u4 * (35.0 - 84.0 * u + 70.0 * u * u - 20.0 * u * u * u)
}

/// Radial cutoff profile for the Fourier multiplier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chi {
    pub inner: f64,
    pub outer: f64,
}

impl Default for Chi {
    fn default() -> Self {
        Self { inner: 0.5, outer: 1.0 }
    }
}

impl Chi {
    #[inline]
    pub fn at(&self, r: f64) -> f64 {
        smooth_cut(r, self.inner, self.outer)
    }

    pub fn describe(&self) -> String {
        format!("septic-smoothstep[{},{}]", self.inner, self.outer)
    }
}

/// `w_τ = w 1{w <= τ^β}` on the `2R+1` interpolation grid, re-expanded.
pub fn mollify_1d(w: &PotentialSpec, tau: f64, beta: f64) -> Result<PotentialSpec> {
    if w.spec.d != 1 {
        return Err(Error::param("d", "clipping mollifier is one-dimensional"));
    }
    check_tau_beta(tau, beta)?;
    let cap = libm::pow(tau, beta);
    let n = 2 * w.radius() as usize + 1;
    let (vals, _) = grid_values(&w.coeffs, &GridSpec::uniform(n))?;
    if let Some(v) = vals.iter().copied().find(|v| *v < -1e-10) {
        return Err(Error::param("w", format!("grid value {v} is negative")));
    }
    let clipped: Vec<f64> = vals.iter().map(|&v| if v <= cap { v.max(0.0) } else { 0.0 }).collect();
    let coeffs = crate::spectral::coeffs_from_grid(w.coeffs.spec(), &clipped, n)?;
    w.with_coeffs(coeffs, Mollification { kind: MollifierKind::Clip, tau, beta, scale: cap })
}

/// `M(τ) = (τ^β/‖w‖_p)^{1/d}`.
pub fn multiplier_scale(w: &PotentialSpec, tau: f64, beta: f64) -> Result<f64> {
    let norm = w.lp_norm(w.p)?;
    if norm == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(libm::pow(libm::pow(tau, beta) / norm, 1.0 / w.spec.d as f64))
}

/// `ŵ_τ(k) = χ(k/M(τ)) ŵ(k)`.
pub fn mollify_fourier(w: &PotentialSpec, tau: f64, beta: f64, chi: Chi) -> Result<PotentialSpec> {
    if !(2..=3).contains(&w.spec.d) {
        return Err(Error::param("d", "Fourier multiplier mollifier needs d in {2,3}"));
    }
    check_tau_beta(tau, beta)?;
    if !w.is_positive_type() {
        return Err(Error::param("w", "negative Fourier coefficient"));
    }
    let m = multiplier_scale(w, tau, beta)?;
    let coeffs = w.coeffs.iter().map(|(k, c)| chi.at(libm::sqrt(norm2(k) as f64) / m) * c).collect();
    w.with_coeffs(coeffs, Mollification { kind: MollifierKind::Multiplier, tau, beta, scale: m })
}

/// `ŵ_τ(k) = e^{-π|k|²/τ^β} ŵ(k)`.
pub fn mollify_endpoint(w: &PotentialSpec, tau: f64, beta: f64) -> Result<PotentialSpec> {
    if !matches!(w.variant, Variant::EndpointSquare { .. }) {
        return Err(Error::param("w", "Gaussian mollifier is for endpoint potentials"));
    }
    check_tau_beta(tau, beta)?;
    let tb = libm::pow(tau, beta);
    let coeffs = w.coeffs.iter().map(|(k, c)| libm::exp(-PI * norm2(k) as f64 / tb) * c).collect();
    w.with_coeffs(coeffs, Mollification { kind: MollifierKind::Gaussian, tau, beta, scale: libm::sqrt(tb) })
}

fn check_tau_beta(tau: f64, beta: f64) -> Result<()> {
    if !(tau >= 1.0 && tau.is_finite()) {
        return Err(Error::param("tau", format!("{tau} must be finite and >= 1")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::param("beta", format!("{beta} must be positive")));
    }
    Ok(())
}

/// One checked property with its measured value and bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub variant: String,
    pub tau: f64,
    pub beta: f64,
    pub clauses: Vec<Clause>,
}

impl PropertyReport {
    pub fn all_pass(&self) -> bool {
        self.clauses.iter().all(|c| c.pass)
    }

    pub fn clause(&self, name: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &str, measured: f64, bound: f64) {
        let slack = 1e-10 * (1.0 + libm::fabs(bound));
        self.clauses.push(Clause { name: name.into(), pass: measured <= bound + slack, measured, bound });
    }
}

const NEG_TOL: f64 = 1e-10;

/// Check every property the relevant approximation result lists for `w_τ`.
/// Never fails on a violated property; the report carries it.
pub fn verify_potential(w: &PotentialSpec, wt: &PotentialSpec, p: f64) -> Result<PropertyReport> {
    if w.spec != wt.spec || w.coeffs.spec() != wt.coeffs.spec() {
        return Err(Error::CutoffMismatch);
    }
    let (tau, beta) = wt.mollified.map(|m| (m.tau, m.beta)).unwrap_or((1.0, w.beta));
    let cap = libm::pow(tau, beta);
    let mut rep = PropertyReport { variant: w.variant.name().into(), tau, beta, clauses: Vec::new() };
    let modewise = w
        .coeffs
        .iter()
        .zip(wt.coeffs.coeffs())
        .map(|((_, a), b)| libm::fabs(*b) - libm::fabs(a))
        .fold(f64::NEG_INFINITY, f64::max);
    let min_hat = wt.coeffs.coeffs().iter().copied().fold(f64::INFINITY, f64::min);

    match (w.spec.d, wt.mollified.map(|m| m.kind)) {
        (1, _) => {
            let n = 2 * w.radius() as usize + 1;
            let g = GridSpec::uniform(n);
            let (a, wts) = grid_values(&w.coeffs, &g)?;
            let (b, _) = grid_values(&wt.coeffs, &g)?;
            let min_b = b.iter().copied().fold(f64::INFINITY, f64::min);
            rep.push("pointwise-nonneg", -min_b, NEG_TOL);
            rep.push("sup-bound", crate::spectral::grid::lp_of_values(&b, &wts, f64::INFINITY), cap);
            rep.push(
                "lp-control",
                crate::spectral::grid::lp_of_values(&b, &wts, p),
                crate::spectral::grid::lp_of_values(&a, &wts, p),
            );
            let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
            let dist = crate::spectral::grid::lp_of_values(&diff, &wts, p);
            rep.clauses.push(Clause { name: "lp-distance".into(), pass: true, measured: dist, bound: f64::INFINITY });
        }
        (2, Some(MollifierKind::Gaussian)) => endpoint_clauses(w, wt, cap, &mut rep)?,
        _ => {
            rep.push("positive-type", -min_hat, 0.0);
            rep.push("monotone-damping", modewise, 0.0);
            // Positive type: the sup is the value at the origin.
            let sup: f64 = wt.coeffs.coeffs().iter().map(|c| libm::fabs(*c)).sum();
            rep.push("sup-bound", sup, cap);
            let m = wt.mollified.map(|m| m.scale).unwrap_or(f64::INFINITY);
            let (ratio_num, ratio_den, c) = multiplier_lp(w, wt, p, m)?;
            rep.push("lp-control", ratio_num, c * ratio_den);
            let d = wt.coeffs.axpy(-1.0, &w.coeffs, KernelKind::Custom)?;
            let dist = crate::spectral::lp_norm(&d, p, &w.grid())?;
            rep.clauses.push(Clause { name: "lp-distance".into(), pass: true, measured: dist, bound: f64::INFINITY });
        }
    }
    Ok(rep)
}

/// `(‖w_τ‖_p, ‖w‖_p, ‖K_M‖_1)` on a grid fine enough that the discrete
/// convolution identity `w_τ = K_M ⊛ w` is exact, so the Young bound is rigorous.
fn multiplier_lp(w: &PotentialSpec, wt: &PotentialSpec, p: f64, m: f64) -> Result<(f64, f64, f64)> {
    let r = w.radius();
    if !(m < 2.0 * r as f64) {
        let a = w.lp_norm(p)?;
        let b = wt.lp_norm(p)?;
        return Ok((b, a, 1.0));
    }
    let mr = libm::ceil(m) as u32;
    let g = GridSpec::uniform(2 * (r + mr) as usize + 1);
    let chi = Chi::default();
    let kspec = w.spec.with_cutoff(mr);
    let kern = FourierKernel::from_fn(kspec, KernelKind::Custom, |k| chi.at(libm::sqrt(norm2(k) as f64) / m));
    let (kv, kw) = grid_values(&kern, &g)?;
    let (a, wts) = grid_values(&w.coeffs, &g)?;
    let (b, _) = grid_values(&wt.coeffs, &g)?;
    let l = &crate::spectral::grid::lp_of_values;
    Ok((l(&b, &wts, p), l(&a, &wts, p), l(&kv, &kw, 1.0)))
}

fn endpoint_clauses(w: &PotentialSpec, wt: &PotentialSpec, cap: f64, rep: &mut PropertyReport) -> Result<()> {
    let eps = w.epsilon().ok_or_else(|| Error::param("w", "not an endpoint potential"))?;
    let delta = eps / 2.0;
    let l = w.l.unwrap_or_else(|| fit_l(&w.coeffs, eps));
    let s = -1.0 + delta;
    let hw = sobolev_norm_coeffs(w.coeffs.iter(), s);
    let hwt = sobolev_norm_coeffs(wt.coeffs.iter(), s);
    let weight_sum: f64 = w.coeffs.modes().iter().map(|k| libm::pow(bracket(k), -2.0 - eps)).sum();
    rep.push("h-norm-control", hwt, hw);
    rep.push("h-norm-ceiling", hw, libm::sqrt(weight_sum) * l);
    let min_hat = wt.coeffs.coeffs().iter().copied().fold(f64::INFINITY, f64::min);
    rep.push("positive-type", -min_hat, 0.0);
    let max_hat = wt.coeffs.coeffs().iter().copied().fold(0.0, f64::max);
    rep.push("fourier-ceiling", max_hat, l);
    let g = w.grid();
    let (a, wts) = grid_values(&w.coeffs, &g)?;
    let (b, _) = grid_values(&wt.coeffs, &g)?;
    let min_b = b.iter().copied().fold(f64::INFINITY, f64::min);
    rep.push("pointwise-nonneg", -min_b, NEG_TOL);
    let sup: f64 = wt.coeffs.coeffs().iter().map(|c| libm::fabs(*c)).sum();
    rep.push("sup-bound", sup, l * weight_sum * cap);
    let l1 = &crate::spectral::grid::lp_of_values;
    rep.push("l1-control", l1(&b, &wts, 1.0), l1(&a, &wts, 1.0));
    let dist = sobolev_norm_coeffs(w.coeffs.iter().zip(wt.coeffs.coeffs()).map(|((k, a), b)| (k, a - b)), s);
    rep.clauses.push(Clause { name: "h-distance".into(), pass: true, measured: dist, bound: f64::INFINITY });
    Ok(())
}

/// One row of a mollification scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub tau: f64,
    pub distance: f64,
    pub report: PropertyReport,
}

/// Mollify at each `τ`, verify, and record the distance to `w` (grid `L^p`,
/// or `H^{-1+δ}` for endpoint potentials).
pub fn mollification_scan(w: &PotentialSpec, taus: &[f64], p: f64) -> Result<Vec<ScanRow>> {
    let mut out = Vec::with_capacity(taus.len());
    for &tau in taus {
        let wt = w.mollify(tau)?;
        let report = verify_potential(w, &wt, p)?;
        let distance = report
            .clause("h-distance")
            .or_else(|| report.clause("lp-distance"))
            .map(|c| c.measured)
            .unwrap_or(0.0);
        out.push(ScanRow { tau, distance, report });
    }
    Ok(out)
}

/// Non-increasing up to `slack`.
pub fn non_increasing(xs: &[f64], slack: f64) -> bool {
    xs.windows(2).all(|w| w[1] <= w[0] + slack)
}

/// Least-squares slope of `log ŵ` against `log⟨k⟩` over `lo <= |k| <= hi`.
pub fn decay_exponent(w: &FourierKernel, lo: f64, hi: f64) -> f64 {
    let mut xs = vec![];
    let mut ys = vec![];
    for (k, c) in w.iter() {
        let r = libm::sqrt(norm2(k) as f64);
        if r >= lo && r <= hi && c > 0.0 {
            xs.push(libm::log(bracket(k)));
            ys.push(libm::log(c));
        }
    }
    crate::num::linear_fit(&xs, &ys).0
}

#[cfg(test)]
mod tests;
