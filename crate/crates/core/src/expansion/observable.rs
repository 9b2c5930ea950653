//! Finite-rank observables in Fourier representation.

use crate::error::{Error, Result};
use crate::spectral::{Mode, TorusSpec};
use crate::wick::ObservableKind;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use num_complex::Complex64;

/// `ξ̂(k; l)` stored sparsely.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseMatrix {
    entries: BTreeMap<(Mode, Mode), Complex64>,
}

impl SparseMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, k: Mode, l: Mode, v: Complex64) {
        if v == Complex64::new(0.0, 0.0) {
            self.entries.remove(&(k, l));
        } else {
            self.entries.insert((k, l), v);
        }
    }

    /// Builder form of `insert`.
    pub fn with(mut self, k: Mode, l: Mode, v: Complex64) -> Self {
        self.insert(k, l, v);
        self
    }

    #[inline]
    pub fn get(&self, k: &Mode, l: &Mode) -> Complex64 {
        self.entries.get(&(*k, *l)).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Mode, Mode), &Complex64)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.entries.iter().all(|((k, l), v)| (self.get(l, k).conj() - v).norm() <= tol)
    }

    /// Frobenius inner product `Σ conj(a) b`.
    pub fn inner(&self, other: &SparseMatrix) -> Complex64 {
        self.entries.iter().map(|(key, a)| a.conj() * other.entries.get(key).copied().unwrap_or_default()).sum()
    }

    pub fn hs_norm(&self) -> f64 {
        libm::sqrt(self.entries.values().map(|v| v.norm_sqr()).sum())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { entries: self.entries.iter().map(|(k, v)| (*k, v * s)).collect() }
    }

    fn max_norm2(&self) -> i64 {
        self.entries.keys().map(|(k, l)| crate::spectral::norm2(k).max(crate::spectral::norm2(l))).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Representation {
    /// `r = 0`: `Θ = 1`.
    Empty,
    Rank1(SparseMatrix),
    /// `Σ_j c_j A_j ⊗ B_j` with real `c_j` and self-adjoint factors.
    Rank2(Vec<(f64, SparseMatrix, SparseMatrix)>),
    /// `Id_r`, `d = 1` only.
    Identity { r: u32 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    rep: Representation,
    hs_norm: f64,
}

const SA_TOL: f64 = 1e-12;

impl Observable {
    pub fn empty() -> Self {
        Self { rep: Representation::Empty, hs_norm: 1.0 }
    }

    pub fn rank1(m: SparseMatrix) -> Result<Self> {
        if !m.is_self_adjoint(SA_TOL) {
            return Err(Error::param("xi", "rank-1 observable is not self-adjoint"));
        }
        let hs = m.hs_norm();
        Ok(Self { rep: Representation::Rank1(m), hs_norm: hs })
    }

    pub fn rank2(terms: Vec<(f64, SparseMatrix, SparseMatrix)>) -> Result<Self> {
        if terms.is_empty() || terms.len() > 4 {
            return Err(Error::param("xi", format!("separable rank {} is not in 1..=4", terms.len())));
        }
        for (c, a, b) in &terms {
            if !c.is_finite() || !a.is_self_adjoint(SA_TOL) || !b.is_self_adjoint(SA_TOL) {
                return Err(Error::param("xi", "rank-2 factors must be self-adjoint with real weights"));
            }
        }
        let mut s = 0.0;
        for (ci, ai, bi) in &terms {
            for (cj, aj, bj) in &terms {
                s += ci * cj * (ai.inner(aj) * bi.inner(bj)).re;
            }
        }
        Ok(Self { rep: Representation::Rank2(terms), hs_norm: libm::sqrt(s.max(0.0)) })
    }

    pub fn identity(r: u32) -> Result<Self> {
        if !(1..=2).contains(&r) {
            return Err(Error::param("r", format!("identity observable needs r in {{1,2}}, got {r}")));
        }
        Ok(Self { rep: Representation::Identity { r }, hs_norm: f64::INFINITY })
    }

    /// `ξ̂` with a single unit entry at `(0; 0)`.
    pub fn unit_zero_mode() -> Self {
        Self::rank1(SparseMatrix::new().with([0; 3], [0; 3], Complex64::new(1.0, 0.0))).expect("diagonal")
    }

    /// Projection onto the normalised plane wave `e_k`.
    pub fn mode_projector(k: Mode) -> Self {
        Self::rank1(SparseMatrix::new().with(k, k, Complex64::new(1.0, 0.0))).expect("diagonal")
    }

    pub fn representation(&self) -> &Representation {
        &self.rep
    }

    pub fn rank(&self) -> u32 {
        match &self.rep {
            Representation::Empty => 0,
            Representation::Rank1(_) => 1,
            Representation::Rank2(_) => 2,
            Representation::Identity { r } => *r,
        }
    }

    pub fn kind(&self) -> ObservableKind {
        match self.rep {
            Representation::Identity { .. } => ObservableKind::Identity,
            _ => ObservableKind::Operator,
        }
    }

    pub fn hs_norm(&self) -> f64 {
        self.hs_norm
    }

    /// Member of the unit ball (`Id_r` is admitted separately in `d = 1`).
    pub fn in_unit_ball(&self) -> bool {
        self.hs_norm <= 1.0 + 1e-12
    }

    /// `ξ̂(k_1..k_r; l_1..l_r)`; `1` for the empty and identity observables.
    #[inline]
    pub fn hat(&self, k: &[Mode], l: &[Mode]) -> Complex64 {
        match &self.rep {
            Representation::Empty | Representation::Identity { .. } => Complex64::new(1.0, 0.0),
            Representation::Rank1(a) => a.get(&k[0], &l[0]),
            Representation::Rank2(t) => t.iter().map(|(c, a, b)| a.get(&k[0], &l[0]) * b.get(&k[1], &l[1]) * *c).sum(),
        }
    }

    pub fn check(&self, spec: &TorusSpec) -> Result<()> {
        if self.kind() == ObservableKind::Identity && spec.d != 1 {
            return Err(Error::param("xi", "identity observable is one-dimensional"));
        }
        let r2 = (spec.cutoff as i64) * (spec.cutoff as i64);
        let outside = match &self.rep {
            Representation::Rank1(a) => a.max_norm2() > r2,
            Representation::Rank2(t) => t.iter().any(|(_, a, b)| a.max_norm2() > r2 || b.max_norm2() > r2),
            _ => false,
        };
        if outside {
            return Err(Error::CutoffMismatch);
        }
        Ok(())
    }

    /// Fixed test battery standing in for the unit ball. Besides the empty
    /// observable and mode projectors it has a cosine projector and one
    /// complex off-diagonal Hermitian entry.
    pub fn battery(spec: &TorusSpec) -> Vec<(String, Observable)> {
        let mut out = Vec::new();
        out.push((String::from("empty"), Observable::empty()));
        out.push((String::from("proj0"), Observable::unit_zero_mode()));
        if spec.cutoff >= 1 {
            let e1: Mode = [1, 0, 0];
            let m1: Mode = [-1, 0, 0];
            out.push((String::from("proj1"), Observable::mode_projector(e1)));
            let h = Complex64::new(0.5, 0.0);
            let cos = SparseMatrix::new().with(e1, e1, h).with(e1, m1, h).with(m1, e1, h).with(m1, m1, h);
            out.push((String::from("cos1"), Observable::rank1(cos).expect("hermitian")));
            let s = core::f64::consts::FRAC_1_SQRT_2;
            let off = SparseMatrix::new()
                .with([0; 3], e1, Complex64::new(0.0, 0.5 * s))
                .with(e1, [0; 3], Complex64::new(0.0, -0.5 * s))
                .with([0; 3], [0; 3], Complex64::new(0.5, 0.0));
            out.push((String::from("mix01"), Observable::rank1(off).expect("hermitian")));
        }
        out
    }
}
