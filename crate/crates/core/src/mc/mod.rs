//! Truncated Gaussian free field sampling and Monte Carlo estimates of
//! free moments and Gibbs-state expectations.
//!
//! Samples are drawn in fixed-size chunks, each from its own ChaCha8 stream
//! (`seed`, chunk index). Chunk partial sums are merged in chunk order.

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::expansion::{Observable, Representation};
use crate::potentials::PotentialSpec;
use crate::spectral::{self, Mode, ModeBall, TorusSpec};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Samples per substream.
pub const CHUNK: usize = 1000;

/// Independent stream `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

/// One draw of the mode amplitudes `ω_k`, in `spec.modes()` order.
#[derive(Clone, Debug, PartialEq)]
pub struct GffSample {
    pub spec: TorusSpec,
    pub omega: Vec<Complex64>,
}

impl GffSample {
    /// `φ̂(k) = ω_k / √λ_k`.
    pub fn phi_hat(&self) -> Vec<Complex64> {
        self.spec.modes().iter().zip(&self.omega).map(|(k, w)| w / libm::sqrt(self.spec.eigenvalue(k))).collect()
    }
}

/// Standard complex Gaussians: independent parts of variance `1/2`.
pub fn sample_gff<R: RngCore + ?Sized>(spec: &TorusSpec, rng: &mut R) -> GffSample {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let n = spec.modes().len();
    let mut omega = Vec::with_capacity(n);
    for _ in 0..n {
        let re: f64 = StandardNormal.sample(&mut *rng);
        let im: f64 = StandardNormal.sample(&mut *rng);
        omega.push(Complex64::new(s * re, s * im));
    }
    GffSample { spec: *spec, omega }
}

/// `W = ½ Σ_p ŵ(p) |ĥ(p)|²` with `ĥ` the Fourier transform of `|φ|²`, minus
/// `ϱ_[K]` at `p = 0` when Wick ordered.
#[derive(Clone, Debug)]
pub struct Interaction {
    ball: ModeBall,
    support: Vec<(Mode, f64)>,
    subtract: f64,
}

impl Interaction {
    pub fn new(spec: &TorusSpec, w: &PotentialSpec, wick_ordered: bool) -> Result<Self> {
        if w.spec != *spec {
            return Err(Error::CutoffMismatch);
        }
        if let Some((k, c)) = w.coeffs.iter().find(|(_, c)| *c < 0.0) {
            return Err(Error::param("w", format!("negative Fourier coefficient {c} at {k:?}")));
        }
        let r2 = 4 * (spec.cutoff as i64) * (spec.cutoff as i64);
        let support = w.coeffs.iter().filter(|(k, c)| *c != 0.0 && spectral::norm2(k) <= r2).map(|(k, c)| (*k, c)).collect();
        let subtract = if wick_ordered { spectral::truncated_density(spec) } else { 0.0 };
        Ok(Self { ball: spec.ball(), support, subtract })
    }

    /// Wick ordered exactly when `d >= 2`.
    pub fn for_dim(spec: &TorusSpec, w: &PotentialSpec) -> Result<Self> {
        Self::new(spec, w, spec.d >= 2)
    }

    pub fn eval(&self, phi: &[Complex64]) -> f64 {
        let modes = self.ball.modes();
        let mut s = 0.0;
        for (p, c) in &self.support {
            let mut h = Complex64::new(0.0, 0.0);
            for (k, a) in modes.iter().zip(phi) {
                if let Some(j) = self.ball.index(&spectral::add(k, p)) {
                    h += a.conj() * phi[j];
                }
            }
            if *p == [0, 0, 0] {
                h -= self.subtract;
            }
            s += c * h.norm_sqr();
        }
        0.5 * s
    }
}

/// Wick-ordered interaction of one sample.
pub fn wick_interaction(sample: &GffSample, w: &PotentialSpec, spec: &TorusSpec) -> Result<f64> {
    Ok(Interaction::new(spec, w, true)?.eval(&sample.phi_hat()))
}

/// Un-ordered one-dimensional interaction.
pub fn interaction_1d(sample: &GffSample, w: &PotentialSpec) -> Result<f64> {
    if sample.spec.d != 1 {
        return Err(Error::param("d", "interaction_1d needs d = 1"));
    }
    Ok(Interaction::new(&sample.spec, w, false)?.eval(&sample.phi_hat()))
}

/// `Θ(ξ)` as a complex number.
pub fn theta_complex(phi: &[Complex64], ball: &ModeBall, xi: &Observable) -> Complex64 {
    let form = |a: &crate::expansion::SparseMatrix| -> Complex64 {
        a.iter()
            .map(|((k, l), v)| match (ball.index(k), ball.index(l)) {
                (Some(i), Some(j)) => v * phi[i].conj() * phi[j],
                _ => Complex64::new(0.0, 0.0),
            })
            .sum()
    };
    match xi.representation() {
        Representation::Empty => Complex64::new(1.0, 0.0),
        Representation::Rank1(a) => form(a),
        Representation::Rank2(t) => t.iter().map(|(c, a, b)| form(a) * form(b) * *c).sum(),
        Representation::Identity { r } => {
            let mass: f64 = phi.iter().map(|a| a.norm_sqr()).sum();
            Complex64::new(libm::pow(mass, *r as f64), 0.0)
        }
    }
}

/// `Θ(ξ)` for one sample; real for self-adjoint `ξ`.
pub fn theta_observable(sample: &GffSample, xi: &Observable) -> Result<f64> {
    xi.check(&sample.spec)?;
    let z = theta_complex(&sample.phi_hat(), &sample.spec.ball(), xi);
    if libm::fabs(z.im) > 1e-10 * (1.0 + z.norm()) {
        return Err(Error::ImaginaryResidue { residual: libm::fabs(z.im) });
    }
    Ok(z.re)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    pub seed: u64,
}

impl McEstimate {
    /// `|mean - x| <= k σ`.
    pub fn agrees(&self, x: f64, k: f64) -> bool {
        libm::fabs(self.mean - x) <= k * self.stderr
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n: usize,
    pub seed: u64,
}

fn chunks(n: usize) -> usize {
    n.div_ceil(CHUNK)
}

fn chunk_len(n: usize, c: usize) -> usize {
    CHUNK.min(n - c * CHUNK)
}

/// Running (count, mean, M2) merged in order (Chan et al.).
#[derive(Clone, Copy, Debug, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(&mut self, o: Moments) {
        if o.n == 0.0 {
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n / n;
        self.m2 += o.m2 + d * d * self.n * o.n / n;
        self.n = n;
    }

    fn estimate(&self, seed: u64) -> McEstimate {
        let var = if self.n > 1.0 { self.m2 / (self.n - 1.0) } else { f64::NAN };
        McEstimate { mean: self.mean, stderr: libm::sqrt(var / self.n), n: self.n as usize, seed }
    }
}

/// `E[Θ(ξ) W^m]` for every `ξ` in `xis` and `m <= m_max`, from one shared
/// set of samples. Result is indexed `[xi][m]`.
pub fn mc_moments(
    spec: &TorusSpec,
    w: &PotentialSpec,
    xis: &[Observable],
    m_max: u32,
    cfg: McConfig,
    exec: &dyn Executor,
) -> Result<Vec<Vec<McEstimate>>> {
    if m_max > 4 {
        return Err(Error::param("m", format!("moments are supported up to m = 4, got {m_max}")));
    }
    if cfg.n < 2 {
        return Err(Error::param("n", "need at least two samples"));
    }
    for xi in xis {
        xi.check(spec)?;
    }
    let inter = Interaction::for_dim(spec, w)?;
    let ball = spec.ball();
    let nm = m_max as usize + 1;
    let parts = exec.map_vec(chunks(cfg.n), &|c| {
        let mut rng = stream(cfg.seed, c as u64);
        let mut acc = vec![Moments::default(); xis.len() * nm];
        for _ in 0..chunk_len(cfg.n, c) {
            let phi = sample_gff(spec, &mut rng).phi_hat();
            let wv = inter.eval(&phi);
            for (a, xi) in xis.iter().enumerate() {
                let th = theta_complex(&phi, &ball, xi).re;
                let mut p = th;
                for m in 0..nm {
                    acc[a * nm + m].push(p);
                    p *= wv;
                }
            }
        }
        acc.iter().flat_map(|m| [m.n, m.mean, m.m2]).collect()
    });
    let mut tot = vec![Moments::default(); xis.len() * nm];
    for part in parts {
        for (t, ch) in tot.iter_mut().zip(part.chunks_exact(3)) {
            t.merge(Moments { n: ch[0], mean: ch[1], m2: ch[2] });
        }
    }
    Ok(tot.chunks(nm).map(|row| row.iter().map(|m| m.estimate(cfg.seed)).collect()).collect())
}

/// `E[Θ(ξ) W^m]` under the free field of `w.spec`.
pub fn mc_moment(xi: &Observable, w: &PotentialSpec, m: u32, n: usize, seed: u64) -> Result<McEstimate> {
    let r = mc_moments(&w.spec, w, core::slice::from_ref(xi), m, McConfig { n, seed }, &crate::exec::Sequential)?;
    Ok(r[0][m as usize])
}

/// Ratio `E[X e^{-zW}] / E[e^{-zW}]` for each `X` produced by `obs`, with
/// delete-one-chunk jackknife errors.
/// Writes per-sample observable values into the output slice.
type SampleObservable<'a> = dyn Fn(&[Complex64], &ModeBall, &mut [f64]) + Sync + 'a;

fn ratio_estimates(
    spec: &TorusSpec,
    w: &PotentialSpec,
    z: f64,
    cfg: McConfig,
    n_obs: usize,
    obs: &SampleObservable<'_>,
    exec: &dyn Executor,
) -> Result<Vec<McEstimate>> {
    if !(0.0..=2.0).contains(&z) {
        return Err(Error::param("z", format!("{z} is outside [0, 2]")));
    }
    if cfg.n < 1000 {
        return Err(Error::param("n", format!("{} is below 1000", cfg.n)));
    }
    let inter = Interaction::for_dim(spec, w)?;
    let ball = spec.ball();
    let blocks = exec.map_vec(chunks(cfg.n), &|c| {
        let mut rng = stream(cfg.seed, c as u64);
        let mut sums = vec![0.0; n_obs + 1];
        let mut vals = vec![0.0; n_obs];
        for _ in 0..chunk_len(cfg.n, c) {
            let phi = sample_gff(spec, &mut rng).phi_hat();
            let wt = libm::exp(-z * inter.eval(&phi));
            obs(&phi, &ball, &mut vals);
            for (s, v) in sums.iter_mut().zip(&vals) {
                *s += wt * v;
            }
            sums[n_obs] += wt;
        }
        sums
    });
    let den: f64 = blocks.iter().map(|b| b[n_obs]).sum();
    if !(den > 0.0) {
        return Err(Error::Underflow);
    }
    let nb = blocks.len() as f64;
    let mut out = Vec::with_capacity(n_obs);
    for a in 0..n_obs {
        let num: f64 = blocks.iter().map(|b| b[a]).sum();
        let mean = num / den;
        let loo: Vec<f64> = blocks.iter().map(|b| (num - b[a]) / (den - b[n_obs])).collect();
        let bar = loo.iter().sum::<f64>() / nb;
        let var = (nb - 1.0) / nb * loo.iter().map(|x| (x - bar) * (x - bar)).sum::<f64>();
        out.push(McEstimate { mean, stderr: libm::sqrt(var), n: cfg.n, seed: cfg.seed });
    }
    Ok(out)
}

/// `ρ̂_z(Θ(ξ))`, the `z`-deformed Gibbs expectation.
pub fn mc_state_expectation(xi: &Observable, w: &PotentialSpec, z: f64, cfg: McConfig, exec: &dyn Executor) -> Result<McEstimate> {
    xi.check(&w.spec)?;
    let f = |phi: &[Complex64], ball: &ModeBall, out: &mut [f64]| out[0] = theta_complex(phi, ball, xi).re;
    Ok(ratio_estimates(&w.spec, w, z, cfg, 1, &f, exec)?[0])
}

/// Unnormalised `E[Θ(ξ) e^{-zW}]`, the quantity whose Taylor coefficients
/// are the `a_m`.
pub fn mc_deformed(xi: &Observable, w: &PotentialSpec, z: f64, cfg: McConfig, exec: &dyn Executor) -> Result<McEstimate> {
    xi.check(&w.spec)?;
    let inter = Interaction::for_dim(&w.spec, w)?;
    let spec = w.spec;
    let ball = spec.ball();
    let parts = exec.map_vec(chunks(cfg.n), &|c| {
        let mut rng = stream(cfg.seed, c as u64);
        let mut m = Moments::default();
        for _ in 0..chunk_len(cfg.n, c) {
            let phi = sample_gff(&spec, &mut rng).phi_hat();
            m.push(theta_complex(&phi, &ball, xi).re * libm::exp(-z * inter.eval(&phi)));
        }
        vec![m.n, m.mean, m.m2]
    });
    let mut tot = Moments::default();
    for p in parts {
        tot.merge(Moments { n: p[0], mean: p[1], m2: p[2] });
    }
    Ok(tot.estimate(cfg.seed))
}

/// One entry of the one-particle correlation `γ̂₁(k; l)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrEntry {
    pub k: Mode,
    pub l: Mode,
    pub re: McEstimate,
    pub im: McEstimate,
}

/// `γ̂₁(k; l) = ρ(conj(φ̂(k)) φ̂(l))` at coupling `z`.
pub fn mc_correlation(pairs: &[(Mode, Mode)], w: &PotentialSpec, z: f64, cfg: McConfig, exec: &dyn Executor) -> Result<Vec<CorrEntry>> {
    let ball = w.spec.ball();
    let idx: Vec<(usize, usize)> = pairs
        .iter()
        .map(|(k, l)| match (ball.index(k), ball.index(l)) {
            (Some(i), Some(j)) => Ok((i, j)),
            _ => Err(Error::CutoffMismatch),
        })
        .collect::<Result<_>>()?;
    let f = |phi: &[Complex64], _: &ModeBall, out: &mut [f64]| {
        for (a, &(i, j)) in idx.iter().enumerate() {
            let v = phi[i].conj() * phi[j];
            out[2 * a] = v.re;
            out[2 * a + 1] = v.im;
        }
    };
    let est = ratio_estimates(&w.spec, w, z, cfg, 2 * pairs.len(), &f, exec)?;
    Ok(pairs.iter().enumerate().map(|(a, (k, l))| CorrEntry { k: *k, l: *l, re: est[2 * a], im: est[2 * a + 1] }).collect())
}
