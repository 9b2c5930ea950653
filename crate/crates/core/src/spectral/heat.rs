//! Periodic heat kernels (theta functions) and the untruncated `Q` kernels
//! built from them. The quantum density is here as well.

use super::FOUR_PI2;
use crate::error::{Error, Result};
use crate::num::{frac, Sum};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Tail target for theta sums.
const TAIL: f64 = 1e-17;

/// `Σ_k e^{-4π² s k²} e^{2πikx}` summed on the Fourier side.
pub fn theta_fourier(s: f64, x: f64) -> f64 {
    let r = libm::ceil(libm::sqrt(-libm::log(TAIL) / (FOUR_PI2 * s))) as i64 + 1;
    let mut acc = Sum::new();
    acc.add(1.0);
    for k in 1..=r {
        let kf = k as f64;
        acc.add(2.0 * libm::exp(-FOUR_PI2 * s * kf * kf) * libm::cos(2.0 * PI * kf * x));
    }
    acc.value()
}

/// The same function as a sum of Gaussian images `(4πs)^{-1/2} Σ_n e^{-(x-n)²/4s}`.
pub fn theta_images(s: f64, x: f64) -> f64 {
    let x = frac(x);
    let r = libm::ceil(libm::sqrt(-4.0 * s * libm::log(TAIL))) as i64 + 2;
    let mut acc = Sum::new();
    for n in -r..=r {
        let y = x - n as f64;
        acc.add(libm::exp(-y * y / (4.0 * s)));
    }
    acc.value() / libm::sqrt(4.0 * PI * s)
}

/// One-dimensional periodic heat kernel at time `s`, using whichever side
/// converges faster.
pub fn theta(s: f64, x: f64) -> f64 {
    if s >= 0.05 {
        theta_fourier(s, x)
    } else {
        theta_images(s, x)
    }
}

/// `|Fourier side - image side|` of the `d`-dimensional identity for
/// `S_{τ,t}(x) = e^{-tκ/τ} Σ_k e^{-4π² t|k|²/τ} e^{2πik·x}`, each side summed
/// over the full lattice (not factorised) with tails below `1e-12`.
pub fn heat_poisson_residual(d: usize, kappa: f64, tau: f64, t: f64, x: &[f64]) -> Result<f64> {
    if !(1..=3).contains(&d) || x.len() < d {
        return Err(Error::param("d", format!("{d} with {} coordinates", x.len())));
    }
    if !(tau >= 1.0) || !(t > 0.0 && t < 1.0) {
        return Err(Error::param("t", format!("need tau >= 1 and t in (0,1), got {tau}, {t}")));
    }
    let s = t / tau;
    let damp = libm::exp(-t * kappa / tau);
    let rf = libm::ceil(libm::sqrt(-libm::log(TAIL) / (FOUR_PI2 * s))) as i32 + 1;
    let ri = libm::ceil(libm::sqrt(-4.0 * s * libm::log(TAIL))) as i32 + 2;
    let fourier = lattice_sum(d, rf, |k| {
        let k2: f64 = k.iter().map(|&c| (c * c) as f64).sum();
        let ph: f64 = k.iter().zip(x).map(|(&c, &xx)| c as f64 * xx).sum();
        libm::exp(-FOUR_PI2 * s * k2) * libm::cos(2.0 * PI * ph)
    });
    let images = lattice_sum(d, ri, |n| {
        let r2: f64 = n.iter().zip(x).map(|(&c, &xx)| (xx - c as f64) * (xx - c as f64)).sum();
        libm::exp(-r2 / (4.0 * s))
    }) / libm::pow(4.0 * PI * s, d as f64 / 2.0);
    Ok(libm::fabs(damp * fourier - damp * images))
}

fn lattice_sum(d: usize, r: i32, f: impl Fn(&[i32]) -> f64) -> f64 {
    let mut acc = Sum::new();
    let mut k = vec![-r; d];
    loop {
        acc.add(f(&k));
        let mut a = d;
        loop {
            if a == 0 {
                return acc.value();
            }
            a -= 1;
            k[a] += 1;
            if k[a] <= r {
                break;
            }
            k[a] = -r;
        }
    }
}

/// Heat time beyond which every nonzero Fourier mode is below `1e-30`.
const S_FLAT: f64 = 2.0;

/// Untruncated `Q^(1)_{τ,t}` on the tensor product of `axis` points, via
/// `Q1 = τ^{-1} Σ_{n>=1} e^{-(n+{t})κ/τ} Π_j θ((n+{t})/τ, x_j)`.
/// Values are row-major with the last axis fastest.
pub fn q1_full_grid(d: usize, kappa: f64, tau: f64, t: f64, axis: &[f64]) -> Vec<f64> {
    let ft = frac(t);
    let na = axis.len();
    let total = na.pow(d as u32);
    let mut acc: Vec<Sum> = vec![Sum::new(); total];
    let mut th = vec![0.0; na];
    let mut n = 1u64;
    loop {
        let s = (n as f64 + ft) / tau;
        if s >= S_FLAT {
            break;
        }
        let damp = libm::exp(-s * kappa);
        for (a, x) in axis.iter().enumerate() {
            th[a] = theta(s, *x);
        }
        for (i, slot) in acc.iter_mut().enumerate() {
            let mut p = damp;
            let mut rest = i;
            for _ in 0..d {
                p *= th[rest % na];
                rest /= na;
            }
            slot.add(p);
        }
        n += 1;
    }
    // Remaining terms: θ = 1 to double precision, geometric in n.
    let q = libm::exp(-kappa / tau);
    let tail = libm::exp(-(n as f64 + ft) * kappa / tau) / (1.0 - q);
    acc.iter()
        .map(|s| {
            let mut s = *s;
            s.add(tail);
            s.value() / tau
        })
        .collect()
}

/// `max_x Q^(1)_{τ,t}(x)`, attained at the origin since all coefficients are positive.
pub fn q1_full_max(d: usize, kappa: f64, tau: f64, t: f64) -> f64 {
    q1_full_grid(d, kappa, tau, t, &[0.0])[0]
}

/// `max_x Q^(2)_{τ,t}(x) = e^{-{t}κ/τ} θ({t}/τ, 0)^d`; zero at `t = 0`.
pub fn q2_full_max(d: usize, kappa: f64, tau: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let s = frac(t) / tau;
    libm::exp(-s * kappa) * libm::pow(theta(s, 0.0), d as f64)
}

/// Adaptive summation radius `R(τ)` for `ϱ_τ`.
pub fn density_radius(tau: f64, tol: f64) -> u32 {
    let r = libm::sqrt(tau * (libm::log(1.0 / tol) + libm::log(tau))) / (2.0 * PI);
    libm::ceil(r) as u32 + 2
}

/// Number of lattice points in `Z^d` with `|k|² = n`, for `n <= nmax`.
pub fn shell_counts(d: usize, nmax: usize) -> Vec<u64> {
    let mut one = vec![0u64; nmax + 1];
    let mut k = 0usize;
    while k * k <= nmax {
        one[k * k] += if k == 0 { 1 } else { 2 };
        k += 1;
    }
    let mut acc = one.clone();
    for _ in 1..d {
        let mut next = vec![0u64; nmax + 1];
        for (a, &ca) in acc.iter().enumerate() {
            if ca == 0 {
                continue;
            }
            for (b, &cb) in one.iter().enumerate().take(nmax + 1 - a) {
                next[a + b] += ca * cb;
            }
        }
        acc = next;
    }
    acc
}

/// `ϱ_τ = Σ_k 1/(τ(e^{λ_k/τ} - 1))` over `|k| <= R(τ)`.
pub fn quantum_density(d: usize, kappa: f64, tau: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::param("tol", format!("{tol} must be positive")));
    }
    if !(tau >= 1.0) || !(kappa > 0.0) || !(1..=3).contains(&d) {
        return Err(Error::param("tau", format!("need tau >= 1, kappa > 0, d in 1..=3 (got {tau}, {kappa}, {d})")));
    }
    let r = density_radius(tau, tol) as usize;
    let counts = shell_counts(d, r * r);
    let mut acc = Sum::new();
    for (n, &c) in counts.iter().enumerate().rev() {
        if c > 0 {
            let lambda = FOUR_PI2 * n as f64 + kappa;
            acc.add(c as f64 / (tau * libm::expm1(lambda / tau)));
        }
    }
    Ok(acc.value())
}
