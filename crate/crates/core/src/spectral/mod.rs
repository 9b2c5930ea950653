//! Spectral data of `h = -Δ + κ` on the unit torus at finite mode cutoff.
//! Green functions come in classical and quantum flavours; the quantum one
//! splits into `Q` kernels. Grid evaluation and norms sit in `grid`.

pub(crate) mod grid;
pub mod heat;

pub use grid::{coeffs_from_grid, grid_values, lp_norm, GridSpec, QuadRule};
pub use heat::{heat_poisson_residual, quantum_density};

use crate::error::{Error, Result};
use crate::num::frac;
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
use serde::{Deserialize, Serialize};

/// Lattice mode; components past the dimension are zero.
pub type Mode = [i32; 3];

pub const FOUR_PI2: f64 = 4.0 * PI * PI;

#[inline]
pub fn norm2(k: &Mode) -> i64 {
    k.iter().map(|&c| (c as i64) * (c as i64)).sum()
}

/// Japanese bracket `(1 + |k|^2)^{1/2}`.
#[inline]
pub fn bracket(k: &Mode) -> f64 {
    libm::sqrt(1.0 + norm2(k) as f64)
}

#[inline]
pub fn add(a: &Mode, b: &Mode) -> Mode {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: &Mode, b: &Mode) -> Mode {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn neg(a: &Mode) -> Mode {
    [-a[0], -a[1], -a[2]]
}

/// Dimension, chemical potential and Euclidean mode cutoff.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusSpec {
    pub d: usize,
    pub kappa: f64,
    pub cutoff: u32,
}

impl TorusSpec {
    pub fn new(d: usize, kappa: f64, cutoff: u32) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::param("d", format!("{d} is not in {{1,2,3}}")));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::param("kappa", format!("{kappa} must be positive")));
        }
        Ok(Self { d, kappa, cutoff })
    }

    pub fn with_cutoff(&self, cutoff: u32) -> Self {
        Self { cutoff, ..*self }
    }

    /// Modes with `|k| <= K`, lexicographically ordered.
    pub fn modes(&self) -> Vec<Mode> {
        ball_modes(self.d, self.cutoff)
    }

    pub fn ball(&self) -> ModeBall {
        ModeBall::new(self.d, self.cutoff)
    }

    #[inline]
    pub fn eigenvalue(&self, k: &Mode) -> f64 {
        FOUR_PI2 * norm2(k) as f64 + self.kappa
    }
}

pub(crate) fn ball_modes(d: usize, cutoff: u32) -> Vec<Mode> {
    let k = cutoff as i32;
    let r2 = (cutoff as i64) * (cutoff as i64);
    let range = |active: bool| if active { -k..=k } else { 0..=0 };
    let mut out = Vec::new();
    for a in range(true) {
        for b in range(d >= 2) {
            for c in range(d >= 3) {
                let m = [a, b, c];
                if norm2(&m) <= r2 {
                    out.push(m);
                }
            }
        }
    }
    out
}

/// Dense index over the cut ball, for hot loops.
#[derive(Clone, Debug)]
pub struct ModeBall {
    d: usize,
    cutoff: u32,
    modes: Vec<Mode>,
    side: usize,
    lookup: Vec<u32>,
}

impl ModeBall {
    pub fn new(d: usize, cutoff: u32) -> Self {
        let modes = ball_modes(d, cutoff);
        let side = 2 * cutoff as usize + 1;
        let mut lookup = alloc::vec![u32::MAX; side.pow(d as u32)];
        let mut ball = Self { d, cutoff, modes: Vec::new(), side, lookup: Vec::new() };
        for (i, m) in modes.iter().enumerate() {
            let slot = ball.slot(m).expect("ball mode inside box");
            lookup[slot] = i as u32;
        }
        ball.modes = modes;
        ball.lookup = lookup;
        ball
    }

    #[inline]
    fn slot(&self, k: &Mode) -> Option<usize> {
        let c = self.cutoff as i32;
        let mut s = 0usize;
        for (j, &kj) in k.iter().enumerate() {
            if j >= self.d {
                if kj != 0 {
                    return None;
                }
                continue;
            }
            if kj < -c || kj > c {
                return None;
            }
            s = s * self.side + (kj + c) as usize;
        }
        Some(s)
    }

    #[inline]
    pub fn index(&self, k: &Mode) -> Option<usize> {
        let s = self.slot(k)?;
        match self.lookup[s] {
            u32::MAX => None,
            i => Some(i as usize),
        }
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum KernelKind {
    ClassicalGreen,
    TruncatedClassicalGreen,
    QuantumGreen,
    TimeEvolvedGreen,
    TimeEvolvedDelta,
    Q1,
    Q2,
    DeltaK,
    Potential,
    Custom,
}

impl KernelKind {
    /// Kinds whose coefficients must be nonnegative.
    pub fn positive(&self) -> bool {
        !matches!(self, KernelKind::Custom | KernelKind::Potential)
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelKind::ClassicalGreen => "classicalGreen",
            KernelKind::TruncatedClassicalGreen => "truncatedClassicalGreen",
            KernelKind::QuantumGreen => "quantumGreen",
            KernelKind::TimeEvolvedGreen => "timeEvolvedGreen",
            KernelKind::TimeEvolvedDelta => "timeEvolvedDelta",
            KernelKind::Q1 => "Q1",
            KernelKind::Q2 => "Q2",
            KernelKind::DeltaK => "deltaK",
            KernelKind::Potential => "potential",
            KernelKind::Custom => "custom",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        use KernelKind::*;
        [
            ClassicalGreen,
            TruncatedClassicalGreen,
            QuantumGreen,
            TimeEvolvedGreen,
            TimeEvolvedDelta,
            Q1,
            Q2,
            DeltaK,
            Potential,
            Custom,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }
}

/// Translation-invariant kernel `K(x - y) = Σ c_k e^{2πik(x-y)}` with real,
/// even coefficients on the cut ball of `spec`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierKernel {
    spec: TorusSpec,
    kind: KernelKind,
    modes: Vec<Mode>,
    coeffs: Vec<f64>,
}

impl FourierKernel {
    /// Validated constructor; coefficients follow `spec.modes()` order.
    pub fn new(spec: TorusSpec, kind: KernelKind, coeffs: Vec<f64>) -> Result<Self> {
        let modes = spec.modes();
        if modes.len() != coeffs.len() {
            return Err(Error::param(
                "coeffs",
                format!("expected {} coefficients, got {}", modes.len(), coeffs.len()),
            ));
        }
        let k = Self { spec, kind, modes, coeffs };
        k.validate()?;
        Ok(k)
    }

    pub fn from_fn(spec: TorusSpec, kind: KernelKind, f: impl Fn(&Mode) -> f64) -> Self {
        let modes = spec.modes();
        let coeffs = modes.iter().map(&f).collect();
        Self { spec, kind, modes, coeffs }
    }

    pub fn zero(spec: TorusSpec, kind: KernelKind) -> Self {
        Self::from_fn(spec, kind, |_| 0.0)
    }

    fn validate(&self) -> Result<()> {
        for (m, c) in self.modes.iter().zip(&self.coeffs) {
            if !c.is_finite() {
                return Err(Error::param("coeffs", format!("non-finite coefficient at {m:?}")));
            }
            let other = self.coeff(&neg(m));
            if libm::fabs(other - c) > 1e-12 * (1.0 + libm::fabs(*c)) {
                return Err(Error::NotEven { residual: libm::fabs(other - c) });
            }
            if self.kind.positive() && *c < 0.0 {
                return Err(Error::param(
                    "coeffs",
                    format!("negative coefficient {c} at {m:?} for kind {}", self.kind.name()),
                ));
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> &TorusSpec {
        &self.spec
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Mode, f64)> + '_ {
        self.modes.iter().zip(self.coeffs.iter().copied())
    }

    /// Coefficient at `k`; zero outside the stored ball.
    pub fn coeff(&self, k: &Mode) -> f64 {
        match self.modes.binary_search(k) {
            Ok(i) => self.coeffs[i],
            Err(_) => 0.0,
        }
    }

    pub fn with_kind(mut self, kind: KernelKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn map(&self, kind: KernelKind, f: impl Fn(&Mode, f64) -> f64) -> Self {
        let coeffs = self.iter().map(|(m, c)| f(m, c)).collect();
        Self { spec: self.spec, kind, modes: self.modes.clone(), coeffs }
    }

    /// `self + a * other` on a common torus.
    pub fn axpy(&self, a: f64, other: &FourierKernel, kind: KernelKind) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::CutoffMismatch);
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| x + a * y).collect();
        Ok(Self { spec: self.spec, kind, modes: self.modes.clone(), coeffs })
    }

    /// Zero-mode coefficient, i.e. the row integral `∫ K(x - y) dy`.
    pub fn zero_mode(&self) -> f64 {
        self.coeff(&[0, 0, 0])
    }

    /// `ℓ²` norm of the coefficient array.
    pub fn coeff_l2(&self) -> f64 {
        libm::sqrt(self.coeffs.iter().map(|c| c * c).sum())
    }

    pub fn is_positive_type(&self) -> bool {
        self.coeffs.iter().all(|&c| c >= 0.0)
    }

    /// Value at `x`, after checking that the imaginary residue vanishes.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let (re, im) = self.eval_complex(x);
        let scale: f64 = self.coeffs.iter().map(|c| libm::fabs(*c)).sum();
        if libm::fabs(im) > 1e-12 * (1.0 + scale) {
            return Err(Error::NotEven { residual: libm::fabs(im) });
        }
        Ok(re)
    }

    fn eval_complex(&self, x: &[f64]) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for (m, c) in self.iter() {
            let phase: f64 = (0..self.spec.d).map(|j| m[j] as f64 * x[j]).sum::<f64>();
            let (s, co) = libm::sincos(2.0 * PI * phase);
            re += c * co;
            im += c * s;
        }
        (re, im)
    }
}

#[inline]
pub fn eigenvalue(spec: &TorusSpec, k: &Mode) -> f64 {
    spec.eigenvalue(k)
}

/// `G = h^{-1}` on the cut ball.
pub fn classical_green(spec: &TorusSpec) -> FourierKernel {
    FourierKernel::from_fn(*spec, KernelKind::ClassicalGreen, |k| 1.0 / spec.eigenvalue(k))
}

/// `G_[K']` stored on the ball of `spec`, zero for `|k| > K'`.
pub fn truncated_classical_green(spec: &TorusSpec, k_prime: u32) -> Result<FourierKernel> {
    if k_prime > spec.cutoff {
        return Err(Error::param("cutoff", format!("K'={k_prime} exceeds K={}", spec.cutoff)));
    }
    let r2 = (k_prime as i64).pow(2);
    Ok(FourierKernel::from_fn(*spec, KernelKind::TruncatedClassicalGreen, |k| {
        if norm2(k) <= r2 {
            1.0 / spec.eigenvalue(k)
        } else {
            0.0
        }
    }))
}

fn check_tau(tau: f64) -> Result<()> {
    if tau >= 1.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::param("tau", format!("{tau} must be finite and >= 1")))
    }
}

/// `e^{-t λ/τ} / (τ (e^{λ/τ} - 1))`, written as `e^{-(1+t)x} / (τ(1 - e^{-x}))`
/// with `x = λ/τ` so that no intermediate overflows.
#[inline]
pub fn green_coeff(lambda: f64, tau: f64, t: f64) -> f64 {
    let x = lambda / tau;
    libm::exp(-(1.0 + t) * x) / (-tau * libm::expm1(-x))
}

/// Quantum Green function `G_τ`.
pub fn quantum_green(spec: &TorusSpec, tau: f64) -> Result<FourierKernel> {
    check_tau(tau)?;
    Ok(FourierKernel::from_fn(*spec, KernelKind::QuantumGreen, |k| {
        green_coeff(spec.eigenvalue(k), tau, 0.0)
    }))
}

/// Time-evolved quantum Green function `G_{τ,t}`, `t > -1`.
pub fn time_evolved_green(spec: &TorusSpec, tau: f64, t: f64) -> Result<FourierKernel> {
    check_tau(tau)?;
    if !(t > -1.0) {
        return Err(Error::param("t", format!("{t} must exceed -1")));
    }
    Ok(FourierKernel::from_fn(*spec, KernelKind::TimeEvolvedGreen, |k| {
        green_coeff(spec.eigenvalue(k), tau, t)
    }))
}

/// Time-evolved delta function `S_{τ,t} = e^{-t h/τ}`, `t >= 0`.
pub fn time_evolved_delta(spec: &TorusSpec, tau: f64, t: f64) -> Result<FourierKernel> {
    check_tau(tau)?;
    if !(t >= 0.0) {
        return Err(Error::param("t", format!("{t} must be nonnegative")));
    }
    Ok(FourierKernel::from_fn(*spec, KernelKind::TimeEvolvedDelta, |k| {
        libm::exp(-t * (spec.eigenvalue(k) / tau))
    }))
}

/// The all-ones kernel, i.e. the delta function projected to the cut ball.
pub fn delta_k(spec: &TorusSpec) -> FourierKernel {
    FourierKernel::from_fn(*spec, KernelKind::DeltaK, |_| 1.0)
}

fn check_t(t: f64) -> Result<()> {
    if t > -1.0 && t < 1.0 {
        Ok(())
    } else {
        Err(Error::param("t", format!("{t} is outside (-1, 1)")))
    }
}

/// The splitting `Q_{τ,t} = Q1 + Q2/τ`.
pub fn quantum_kernels(spec: &TorusSpec, tau: f64, t: f64) -> Result<(FourierKernel, FourierKernel)> {
    check_tau(tau)?;
    check_t(t)?;
    let ft = frac(t);
    let q1 = FourierKernel::from_fn(*spec, KernelKind::Q1, |k| green_coeff(spec.eigenvalue(k), tau, ft));
    let q2 = FourierKernel::from_fn(*spec, KernelKind::Q2, |k| {
        if t == 0.0 {
            0.0
        } else {
            libm::exp(-ft * (spec.eigenvalue(k) / tau))
        }
    });
    Ok((q1, q2))
}

/// `Q_{τ,t}` from its case definition (`G + S/τ` for `t > 0`, `G` otherwise).
pub fn q_kernel(spec: &TorusSpec, tau: f64, t: f64) -> Result<FourierKernel> {
    check_t(t)?;
    let g = time_evolved_green(spec, tau, t)?;
    let q = if t > 0.0 {
        g.axpy(1.0 / tau, &time_evolved_delta(spec, tau, t)?, KernelKind::Custom)?
    } else {
        g
    };
    Ok(q.with_kind(KernelKind::Custom))
}

/// Physical-space value at `x`.
pub fn kernel_eval(kernel: &FourierKernel, x: &[f64]) -> Result<f64> {
    kernel.eval(x)
}

/// `(Σ ⟨k⟩^{2s} c_k²)^{1/2}`.
pub fn sobolev_norm(kernel: &FourierKernel, s: f64) -> f64 {
    sobolev_norm_coeffs(kernel.iter(), s)
}

pub fn sobolev_norm_coeffs<'a>(it: impl Iterator<Item = (&'a Mode, f64)>, s: f64) -> f64 {
    let mut acc = crate::num::Sum::new();
    for (m, c) in it {
        acc.add(libm::pow(1.0 + norm2(m) as f64, s) * c * c);
    }
    libm::sqrt(acc.value())
}

/// `ϱ_[K] = Σ_{|k|<=K} 1/λ_k`.
pub fn truncated_density(spec: &TorusSpec) -> f64 {
    spec.modes().iter().map(|k| 1.0 / spec.eigenvalue(k)).collect::<crate::num::Sum>().value()
}
