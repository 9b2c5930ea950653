use super::{loglog_slope, CheckReport, Table};
use crate::error::{Error, Result};
use crate::mc::stream;
use crate::spectral::{add, ball_modes, coeffs_from_grid, norm2, Mode, TorusSpec};
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use rand_core::RngCore;
use rand_distr::{Distribution, StandardNormal, Uniform};

/// Trigonometric polynomial given by its nonzero Fourier coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BandLimited {
    pub coeffs: BTreeMap<Mode, Complex64>,
}

impl BandLimited {
    pub fn single(k: Mode, c: Complex64) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(k, c);
        Self { coeffs }
    }

    /// `‖f‖_{H^s}² = Σ ⟨k⟩^{2s} |f̂(k)|²`.
    pub fn h_norm(&self, s: f64) -> f64 {
        let acc: crate::num::Sum = self.coeffs.iter().map(|(k, c)| libm::pow(1.0 + norm2(k) as f64, s) * c.norm_sqr()).collect();
        libm::sqrt(acc.value())
    }

    pub fn product(&self, other: &Self) -> Self {
        let mut coeffs = BTreeMap::new();
        for (k, a) in &self.coeffs {
            for (l, b) in &other.coeffs {
                *coeffs.entry(add(k, l)).or_insert(Complex64::new(0.0, 0.0)) += a * b;
            }
        }
        Self { coeffs }
    }

    /// Complex Gaussian coefficients damped by `⟨k⟩^{-γ}` on a ball of
    /// random radius in `1..=band`, with `γ` uniform in `[0, 3]`.
    pub fn random<R: RngCore + ?Sized>(d: usize, band: u32, rng: &mut R) -> Self {
        let radius = Uniform::new_inclusive(1, band.max(1)).expect("valid range").sample(&mut *rng);
        let gamma = Uniform::new(0.0, 3.0).expect("valid range").sample(&mut *rng);
        let mut coeffs = BTreeMap::new();
        for k in ball_modes(d, radius) {
            let re: f64 = StandardNormal.sample(&mut *rng);
            let im: f64 = StandardNormal.sample(&mut *rng);
            coeffs.insert(k, Complex64::new(re, im) * libm::pow(1.0 + norm2(&k) as f64, -gamma / 2.0));
        }
        Self { coeffs }
    }
}

/// `‖fg‖_{H^s} / (‖f‖_{H^{s+α}}‖g‖_{H^{1-α}} + ‖f‖_{H^{1-α}}‖g‖_{H^{s+α}})`.
pub fn product_ratio(f: &BandLimited, g: &BandLimited, s: f64, alpha: f64) -> f64 {
    let num = f.product(g).h_norm(s);
    let den = f.h_norm(s + alpha) * g.h_norm(1.0 - alpha) + f.h_norm(1.0 - alpha) * g.h_norm(s + alpha);
    num / den
}

const DIM: usize = 2;
const BAND: u32 = 4;

/// Largest product ratio over `trials` random pairs in two dimensions, and
/// over twice as many; the estimate is stable if the two maxima are within 20%.
pub fn sobolev_product_check(s: f64, alpha: f64, trials: usize, seed: u64) -> Result<CheckReport> {
    if !(s >= 0.0) || !(alpha > 0.0 && alpha < 1.0) || trials == 0 {
        return Err(Error::param("s", format!("need s >= 0, α in (0,1), trials > 0 (got {s}, {alpha}, {trials})")));
    }
    let mut rng = stream(seed, 0);
    let mut tab = Table::new("sobolev_ratios", &["trial", "ratio"]);
    let mut max_first = 0.0f64;
    let mut max_all = 0.0f64;
    for j in 0..2 * trials {
        let f = BandLimited::random(DIM, BAND, &mut rng);
        let g = BandLimited::random(DIM, BAND, &mut rng);
        let r = product_ratio(&f, &g, s, alpha);
        tab.push(&[j as f64, r]);
        if j < trials {
            max_first = max_first.max(r);
        }
        max_all = max_all.max(r);
    }
    let mut rep = CheckReport::new("sobolev_product");
    rep.input("s", s).input("alpha", alpha).input("trials", trials).input("seed", seed).input("d", DIM).input("band", BAND);
    rep.metric("max_ratio", max_first).metric("max_ratio_doubled", max_all).metric("drift", max_all / max_first - 1.0);
    rep.table(tab);
    rep.require("finite", max_all.is_finite(), format!("{max_all}"));
    rep.require("stable-under-doubling", max_all <= 1.2 * max_first, format!("{max_first} -> {max_all}"));
    Ok(rep)
}

/// For `s < 0` and `f_n = ⟨n⟩^{-s} e^{2πinx}` (so `‖f_n‖_{H^s} = 1`), the
/// ratio `‖|f_n|‖_{H^s}/‖f_n‖_{H^s}` grows like `⟨n⟩^{-s}`. `|f_n|` is
/// sampled on a grid and transformed back, not written down.
pub fn abs_counterexample(s: f64, ns: &[u32]) -> Result<CheckReport> {
    if !(s < 0.0) {
        return Err(Error::param("s", format!("{s} must be negative")));
    }
    let mut rep = CheckReport::new("abs_counterexample");
    rep.input("s", s).input("ns", format!("{ns:?}"));
    let mut tab = Table::new("abs_ratio", &["n", "bracket", "ratio"]);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &n in ns {
        let br = libm::sqrt(1.0 + (n as f64) * (n as f64));
        let amp = libm::pow(br, -s);
        let f = BandLimited::single([n as i32, 0, 0], Complex64::new(amp, 0.0));
        let pts = 4 * n as usize + 1;
        let vals: Vec<f64> = (0..pts)
            .map(|j| {
                let x = j as f64 / pts as f64;
                (Complex64::new(amp, 0.0) * Complex64::from_polar(1.0, 2.0 * PI * n as f64 * x)).norm()
            })
            .collect();
        let spec = TorusSpec::new(1, 1.0, 2 * n)?;
        let c = coeffs_from_grid(&spec, &vals, pts)?;
        let abs = BandLimited { coeffs: spec.modes().into_iter().zip(c).map(|(k, v)| (k, Complex64::new(v, 0.0))).collect() };
        let ratio = abs.h_norm(s) / f.h_norm(s);
        tab.push(&[n as f64, br, ratio]);
        xs.push(br);
        ys.push(ratio);
    }
    let slope = loglog_slope(&xs, &ys);
    rep.metric("growth_exponent", slope).metric("expected_exponent", -s);
    rep.table(tab);
    rep.require("diverges", ys.windows(2).all(|w| w[1] > w[0]), format!("{ys:?}"));
    rep.require("rate", libm::fabs(slope + s) < 0.05, format!("exponent {slope} vs {}", -s));
    Ok(rep)
}
