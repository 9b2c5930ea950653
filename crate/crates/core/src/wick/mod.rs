//! Wick pairings of the vertex set and their collapse to edge-coloured
//! multigraphs. Collapsed graphs split into paths, each of which carries some
//! of the interaction factors.

use crate::error::{Error, Result};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;
use serde::{Deserialize, Serialize};

/// An uncollapsed vertex `(i, ϑ, δ)`; `i = m + 1` marks the observable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Vertex {
    pub i: u32,
    pub theta: u32,
    pub delta: i8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ObservableKind {
    /// Finite-rank `ξ` (or none when `r = 0`).
    Operator,
    /// `Id_r`, one-dimensional only.
    Identity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    /// Wick-ordered: no `(i,ϑ,+1)`–`(i,ϑ,-1)` self-pairs.
    R,
    /// All `+`/`-` matchings.
    Q,
}

impl Family {
    /// The family used in dimension `d`.
    pub fn for_dim(d: usize) -> Self {
        if d == 1 {
            Family::Q
        } else {
            Family::R
        }
    }
}

/// The ordered vertex set for `(m, r)` in dimension `d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexSet {
    pub m: u32,
    pub r: u32,
    pub d: usize,
    pub kind: ObservableKind,
    pub vertices: Vec<Vertex>,
}

pub fn build_vertex_set(m: u32, r: u32, d: usize, kind: ObservableKind) -> Result<VertexSet> {
    if !(1..=3).contains(&d) {
        return Err(Error::param("d", format!("{d} is not in {{1,2,3}}")));
    }
    if kind == ObservableKind::Identity && d != 1 {
        return Err(Error::param("observable", "the identity observable is one-dimensional"));
    }
    let mut v = Vec::with_capacity((4 * m + 2 * r) as usize);
    for i in 1..=m {
        if d == 1 {
            // Lexicographic in (i, δ, ϑ) with +1 before -1.
            for delta in [1i8, -1] {
                for theta in 1..=2 {
                    v.push(Vertex { i, theta, delta });
                }
            }
        } else {
            for theta in 1..=2 {
                for delta in [1i8, -1] {
                    v.push(Vertex { i, theta, delta });
                }
            }
        }
    }
    for delta in [1i8, -1] {
        for theta in 1..=r {
            v.push(Vertex { i: m + 1, theta, delta });
        }
    }
    Ok(VertexSet { m, r, d, kind, vertices: v })
}

/// A perfect matching given as index pairs `(α, β)`, `α < β` in the
/// vertex-set order, sorted by `α`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pairing {
    pub family: Family,
    pub edges: Vec<(u16, u16)>,
}

impl Pairing {
    /// Orient every edge low-to-high and sort.
    pub fn canonicalize(&mut self) {
        for e in &mut self.edges {
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
        }
        self.edges.sort_unstable();
    }

    /// Perfect, sign-alternating and (for `R`) free of Wick self-pairs.
    pub fn is_valid(&self, vs: &VertexSet) -> bool {
        let n = vs.vertices.len();
        let mut seen = vec![false; n];
        for &(a, b) in &self.edges {
            let (a, b) = (a as usize, b as usize);
            if a >= n || b >= n || a >= b || seen[a] || seen[b] {
                return false;
            }
            seen[a] = true;
            seen[b] = true;
            let (x, y) = (vs.vertices[a], vs.vertices[b]);
            if x.delta * y.delta != -1 {
                return false;
            }
            if self.family == Family::R && x.i == y.i && x.i <= vs.m && x.theta == y.theta {
                return false;
            }
        }
        seen.iter().all(|s| *s)
    }
}

/// Every pairing of `vs` in `family`, in lexicographic order of the
/// assignment of `-` vertices to `+` vertices.
pub fn enumerate_pairings(vs: &VertexSet, family: Family) -> Result<Vec<Pairing>> {
    if family == Family::R && vs.d == 1 {
        return Err(Error::param("family", "Wick-ordered pairings use the d = 2,3 vertex order"));
    }
    let plus: Vec<usize> = (0..vs.vertices.len()).filter(|&j| vs.vertices[j].delta == 1).collect();
    let minus: Vec<usize> = (0..vs.vertices.len()).filter(|&j| vs.vertices[j].delta == -1).collect();
    let mut used = vec![false; minus.len()];
    let mut cur = Vec::with_capacity(plus.len());
    let mut out = Vec::new();
    backtrack(vs, family, &plus, &minus, &mut used, &mut cur, &mut out);
    Ok(out)
}

fn backtrack(
    vs: &VertexSet,
    family: Family,
    plus: &[usize],
    minus: &[usize],
    used: &mut [bool],
    cur: &mut Vec<(u16, u16)>,
    out: &mut Vec<Pairing>,
) {
    let k = cur.len();
    if k == plus.len() {
        let mut p = Pairing { family, edges: cur.clone() };
        p.canonicalize();
        out.push(p);
        return;
    }
    let a = plus[k];
    let va = vs.vertices[a];
    for (j, &b) in minus.iter().enumerate() {
        if used[j] {
            continue;
        }
        let vb = vs.vertices[b];
        if family == Family::R && va.i == vb.i && va.i <= vs.m && va.theta == vb.theta {
            continue;
        }
        used[j] = true;
        cur.push((a as u16, b as u16));
        backtrack(vs, family, plus, minus, used, cur, out);
        cur.pop();
        used[j] = false;
    }
}

/// `Σ_j (-1)^j C(2m,j) (2m+r-j)!`.
pub fn wick_ordered_count(m: u32, r: u32) -> i128 {
    let mut s: i128 = 0;
    for j in 0..=2 * m {
        let term = crate::num::binomial(2 * m, j) as i128 * crate::num::factorial_u64(2 * m + r - j) as i128;
        s += if j % 2 == 0 { term } else { -term };
    }
    s
}

/// A collapsed vertex. `delta` is `0` for vertices merging both signs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CVertex {
    pub i: u32,
    pub theta: u32,
    pub delta: i8,
    /// Belongs to `𝒱₁` (the observable's vertices).
    pub external: bool,
}

/// Edge `{a, b}` with `a <= b` in the inherited order and colour `σ = δ_β`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub sigma: i8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Multigraph {
    pub m: u32,
    pub r: u32,
    pub kind: ObservableKind,
    pub vertices: Vec<CVertex>,
    pub edges: Vec<Edge>,
}

/// Index of the collapsed class of uncollapsed vertex `v`.
fn class_of(v: &Vertex, m: u32, r: u32, kind: ObservableKind) -> usize {
    if v.i <= m {
        (2 * (v.i - 1) + (v.theta - 1)) as usize
    } else {
        let base = 2 * m as usize + (v.theta - 1) as usize;
        match kind {
            ObservableKind::Identity => base,
            ObservableKind::Operator => base + if v.delta == 1 { 0 } else { r as usize },
        }
    }
}

/// Collapse a pairing; `kind = Identity` merges the observable's `±` slots.
pub fn collapse(p: &Pairing, vs: &VertexSet) -> Result<Multigraph> {
    if !p.is_valid(vs) {
        return Err(Error::Degree(String::from("pairing is not a valid matching of the vertex set")));
    }
    let (m, r, kind) = (vs.m, vs.r, vs.kind);
    let mut vertices = Vec::new();
    for i in 1..=m {
        for theta in 1..=2 {
            vertices.push(CVertex { i, theta, delta: 0, external: false });
        }
    }
    match kind {
        ObservableKind::Identity => {
            for theta in 1..=r {
                vertices.push(CVertex { i: m + 1, theta, delta: 0, external: false });
            }
        }
        ObservableKind::Operator => {
            for delta in [1i8, -1] {
                for theta in 1..=r {
                    vertices.push(CVertex { i: m + 1, theta, delta, external: true });
                }
            }
        }
    }
    let mut edges = Vec::with_capacity(p.edges.len());
    for &(x, y) in &p.edges {
        let (va, vb) = (vs.vertices[x as usize], vs.vertices[y as usize]);
        let (ca, cb) = (class_of(&va, m, r, kind), class_of(&vb, m, r, kind));
        let (a, b) = if ca <= cb { (ca, cb) } else { (cb, ca) };
        edges.push(Edge { a, b, sigma: vb.delta });
    }
    let g = Multigraph { m, r, kind, vertices, edges };
    g.check_degrees(p.family)?;
    Ok(g)
}

impl Multigraph {
    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().map(|e| (e.a == v) as usize + (e.b == v) as usize).sum()
    }

    pub fn has_loop(&self) -> bool {
        self.edges.iter().any(|e| e.a == e.b)
    }

    /// Time slot of a collapsed vertex; the observable sits at time zero.
    pub fn slot(&self, v: usize) -> u32 {
        self.vertices[v].i
    }

    fn check_degrees(&self, family: Family) -> Result<()> {
        for (j, v) in self.vertices.iter().enumerate() {
            let want = if v.external { 1 } else { 2 };
            let got = self.degree(j);
            if got != want {
                return Err(Error::Degree(format!("vertex {j} ({v:?}) has degree {got}, expected {want}")));
            }
        }
        if family == Family::R && self.has_loop() {
            return Err(Error::Degree(String::from("loop in a Wick-ordered graph")));
        }
        Ok(())
    }

    /// Stable 64-bit FNV-1a hash of the sorted edge multiset and the shape.
    pub fn canonical_hash(&self) -> u64 {
        let mut e = self.edges.clone();
        e.sort_unstable();
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(self.m as u64);
        eat(self.r as u64);
        eat(matches!(self.kind, ObservableKind::Identity) as u64);
        for x in &e {
            eat(x.a as u64);
            eat(x.b as u64);
            eat(x.sigma as u64 & 0xff);
        }
        h
    }

    /// Plain-text edge list: a header, one `v` line per vertex, one `e` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# m={} r={} kind={:?}", self.m, self.r, self.kind);
        for (j, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(s, "v {j} {} {} {} {}", v.i, v.theta, v.delta, if v.external { 1 } else { 2 });
        }
        for e in &self.edges {
            let _ = writeln!(s, "e {} {} {}", e.a, e.b, e.sigma);
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum PathKind {
    Open,
    Closed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Path {
    /// Edge indices into `Multigraph::edges`, in walking order.
    pub edges: Vec<usize>,
    /// Vertices in walking order (an open path lists both endpoints).
    pub vertices: Vec<usize>,
    pub kind: PathKind,
}

impl Path {
    pub fn min_vertex(&self) -> usize {
        self.vertices.iter().copied().min().unwrap_or(usize::MAX)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathDecomposition {
    /// Sorted by minimal vertex.
    pub paths: Vec<Path>,
}

impl PathDecomposition {
    /// Index of the path containing vertex `v`.
    pub fn path_of(&self, v: usize) -> Option<usize> {
        self.paths.iter().position(|p| p.vertices.contains(&v))
    }
}

/// Split the edge multiset into connected components and walk each one.
pub fn path_decompose(g: &Multigraph) -> PathDecomposition {
    let n = g.vertices.len();
    let mut inc: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (j, e) in g.edges.iter().enumerate() {
        inc[e.a].push(j);
        if e.b != e.a {
            inc[e.b].push(j);
        }
    }
    let mut used = vec![false; g.edges.len()];
    let mut visited = vec![false; n];
    let mut paths = Vec::new();
    // Open paths first start from their lower endpoint, then closed ones.
    let starts: Vec<usize> = (0..n)
        .filter(|&v| g.vertices[v].external)
        .chain((0..n).filter(|&v| !g.vertices[v].external))
        .collect();
    for s in starts {
        if visited[s] || inc[s].is_empty() {
            continue;
        }
        let mut verts = vec![s];
        let mut es = Vec::new();
        visited[s] = true;
        let mut cur = s;
        while let Some(&e) = inc[cur].iter().find(|&&e| !used[e]) {
            used[e] = true;
            es.push(e);
            let ed = g.edges[e];
            let next = if ed.a == cur { ed.b } else { ed.a };
            if visited[next] {
                break;
            }
            visited[next] = true;
            verts.push(next);
            cur = next;
        }
        let kind = if verts.iter().any(|&v| g.vertices[v].external) { PathKind::Open } else { PathKind::Closed };
        paths.push(Path { edges: es, vertices: verts, kind });
    }
    paths.sort_by_key(|p| p.min_vertex());
    PathDecomposition { paths }
}

/// Label of an interaction vertex: carries the factor `w_τ` or `1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Label {
    W,
    One,
}

/// For each `𝒱₂` vertex `a = (i,ϑ)` (index `2(i-1)+ϑ-1`), whether it carries
/// `w_τ(y_a - y_{a*})`. The factor goes to the vertex in the lower-indexed
/// path, or to `ϑ = 1` when both share a path.
pub fn interaction_labels(g: &Multigraph, paths: &PathDecomposition) -> Vec<Label> {
    let mut out = vec![Label::One; 2 * g.m as usize];
    for i in 0..g.m as usize {
        let (a, b) = (2 * i, 2 * i + 1);
        let (pa, pb) = (paths.path_of(a).unwrap_or(usize::MAX), paths.path_of(b).unwrap_or(usize::MAX));
        if pa <= pb {
            out[a] = Label::W;
        } else {
            out[b] = Label::W;
        }
    }
    out
}

#[cfg(test)]
mod tests;
