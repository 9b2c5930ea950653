use super::{FourierKernel, Mode, TorusSpec};
use crate::error::{Error, Result};
use crate::num::gauss_legendre;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadRule {
    UniformTrapezoid,
    GaussLegendre,
}

/// Tensor grid on `[0,1)^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub rule: QuadRule,
}

impl GridSpec {
    /// `4K + 1` uniform points per axis.
    pub fn for_cutoff(cutoff: u32) -> Self {
        Self { n: 4 * cutoff as usize + 1, rule: QuadRule::UniformTrapezoid }
    }

    pub fn uniform(n: usize) -> Self {
        Self { n, rule: QuadRule::UniformTrapezoid }
    }

    pub fn check(&self, cutoff: u32) -> Result<()> {
        let needed = 2 * cutoff as usize + 1;
        if self.n < needed {
            return Err(Error::UnderResolved { points: self.n, needed });
        }
        Ok(())
    }

    /// Nodes and weights on one axis.
    pub fn axis(&self) -> (Vec<f64>, Vec<f64>) {
        match self.rule {
            QuadRule::UniformTrapezoid => {
                let h = 1.0 / self.n as f64;
                ((0..self.n).map(|j| j as f64 * h).collect(), vec![h; self.n])
            }
            QuadRule::GaussLegendre => gauss_legendre(self.n),
        }
    }
}

/// Kernel values on the tensor grid (row-major, last axis fastest) with the
/// matching quadrature weights. Fails if the imaginary residue is not tiny.
pub fn grid_values(kernel: &FourierKernel, grid: &GridSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = kernel.spec().d;
    let (x, w) = grid.axis();
    let n = x.len();
    let kmax = kernel.modes().iter().flat_map(|m| m.iter()).map(|c| c.unsigned_abs()).max().unwrap_or(0) as i32;
    let side = (2 * kmax + 1) as usize;
    // phase[j][k + kmax] = e^{2πi k x_j}
    let mut cs = vec![(0.0f64, 0.0f64); n * side];
    for (j, xj) in x.iter().enumerate() {
        for k in -kmax..=kmax {
            let (s, c) = libm::sincos(2.0 * PI * k as f64 * xj);
            cs[j * side + (k + kmax) as usize] = (c, s);
        }
    }
    let total = n.pow(d as u32);
    let mut vals = Vec::with_capacity(total);
    let mut wts = Vec::with_capacity(total);
    let scale: f64 = kernel.coeffs().iter().map(|c| libm::fabs(*c)).sum::<f64>() + 1.0;
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        let mut re = 0.0;
        let mut im = 0.0;
        for (m, c) in kernel.iter() {
            let (mut pr, mut pi) = (1.0, 0.0);
            for a in 0..d {
                let (cr, ci) = cs[idx[a] * side + (m[a] + kmax) as usize];
                let t = pr * cr - pi * ci;
                pi = pr * ci + pi * cr;
                pr = t;
            }
            re += c * pr;
            im += c * pi;
        }
        if libm::fabs(im) > 1e-10 * scale {
            return Err(Error::NotEven { residual: libm::fabs(im) });
        }
        vals.push(re);
        wts.push(idx.iter().map(|&i| w[i]).product());
        for a in (0..d).rev() {
            idx[a] += 1;
            if idx[a] < n {
                break;
            }
            idx[a] = 0;
        }
    }
    Ok((vals, wts))
}

/// `‖K‖_{L^q(Λ)}` of `x ↦ K(x)` by grid quadrature; `q = ∞` takes the grid max.
pub fn lp_norm(kernel: &FourierKernel, q: f64, grid: &GridSpec) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::param("q", format!("{q} must be >= 1")));
    }
    let kmax = kernel.modes().iter().map(|m| libm::ceil(libm::sqrt(super::norm2(m) as f64)) as u32).max().unwrap_or(0);
    grid.check(kmax)?;
    let (v, w) = grid_values(kernel, grid)?;
    Ok(lp_of_values(&v, &w, q))
}

pub(crate) fn lp_of_values(v: &[f64], w: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        return v.iter().fold(0.0f64, |a, x| a.max(libm::fabs(*x)));
    }
    let s: crate::num::Sum = v.iter().zip(w).map(|(x, w)| w * libm::pow(libm::fabs(*x), q)).collect();
    libm::pow(s.value(), 1.0 / q)
}

/// Fourier coefficients on the ball of `spec` from values on the uniform grid
/// of `n` points per axis (row-major, last axis fastest).
pub fn coeffs_from_grid(spec: &TorusSpec, values: &[f64], n: usize) -> Result<Vec<f64>> {
    let d = spec.d;
    if values.len() != n.pow(d as u32) {
        return Err(Error::param("values", "length does not match grid"));
    }
    GridSpec::uniform(n).check(spec.cutoff)?;
    let modes: Vec<Mode> = spec.modes();
    let h = 1.0 / n as f64;
    let mut out = Vec::with_capacity(modes.len());
    for m in &modes {
        let mut re = 0.0;
        let mut idx = vec![0usize; d];
        for v in values {
            let phase: f64 = (0..d).map(|a| m[a] as f64 * idx[a] as f64 * h).sum();
            re += v * libm::cos(2.0 * PI * phase);
            for a in (0..d).rev() {
                idx[a] += 1;
                if idx[a] < n {
                    break;
                }
                idx[a] = 0;
            }
        }
        out.push(re / values.len() as f64);
    }
    Ok(out)
}
