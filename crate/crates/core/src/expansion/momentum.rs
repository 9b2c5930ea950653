//! Momentum-space evaluation of collapsed graphs.
//!
//! Every position integral turns into momentum conservation at its vertex.
//! External vertices are glued into one unconstrained ground node, so after
//! choosing a spanning forest the value is a finite sum over momenta on the
//! remaining (free) edges. Interaction lines are put in the forest first,
//! which keeps the free momenta on propagators and the summation ranges on
//! the smaller ball.

use super::observable::Observable;
use crate::num::Sum;
use crate::spectral::{Mode, ModeBall};
use crate::wick::Multigraph;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Table {
    /// Propagator; index into `Multigraph::edges`.
    Prop(usize),
    /// Interaction line of slot `i` (0-based).
    W(usize),
}

#[derive(Clone, Copy, Debug)]
struct PlanEdge {
    tail: usize,
    head: usize,
    table: Table,
}

#[derive(Clone, Debug)]
struct TreeEdge {
    edge: usize,
    /// Momentum as a combination of free momenta.
    coef: Vec<i8>,
}

#[derive(Clone, Copy, Debug)]
struct External {
    edge: usize,
    /// `+1` if the external sits at the tail of `edge`.
    orient: i8,
    /// `true` for a `δ = +1` slot.
    plus: bool,
    theta: usize,
}

/// Precomputed summation structure of one multigraph. Independent of times,
/// `τ` and the potential, so it is built once per pairing.
#[derive(Clone, Debug)]
pub struct GraphPlan {
    edges: Vec<PlanEdge>,
    free: Vec<usize>,
    /// Tree edges grouped by the last free edge they depend on; index
    /// `free.len()` collects the constant ones.
    levels: Vec<Vec<TreeEdge>>,
    externals: Vec<External>,
    r: usize,
}

/// Coefficient tables for one evaluation.
pub struct EdgeTables<'a> {
    pub prop_ball: &'a ModeBall,
    /// One table per multigraph edge, indexed by `prop_ball`.
    pub props: &'a [Vec<f64>],
    pub w_ball: &'a ModeBall,
    pub w: &'a [f64],
}

impl EdgeTables<'_> {
    #[inline]
    fn lookup(&self, t: Table, k: &Mode) -> f64 {
        match t {
            Table::Prop(e) => self.prop_ball.index(k).map_or(0.0, |i| self.props[e][i]),
            Table::W(_) => self.w_ball.index(k).map_or(0.0, |i| self.w[i]),
        }
    }

    fn support(&self, t: Table) -> Vec<(Mode, f64)> {
        let (ball, vals) = match t {
            Table::Prop(e) => (self.prop_ball, &self.props[e][..]),
            Table::W(_) => (self.w_ball, self.w),
        };
        ball.modes().iter().zip(vals).filter(|(_, v)| **v != 0.0).map(|(k, v)| (*k, *v)).collect()
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

impl GraphPlan {
    pub fn new(g: &Multigraph) -> Self {
        let n_int = g.vertices.iter().filter(|v| !v.external).count();
        let has_ground = n_int < g.vertices.len();
        let ground = n_int;
        let n_nodes = n_int + has_ground as usize;
        let node = |v: usize| if g.vertices[v].external { ground } else { v };

        let mut edges = Vec::new();
        for i in 0..g.m as usize {
            edges.push(PlanEdge { tail: 2 * i, head: 2 * i + 1, table: Table::W(i) });
        }
        let mut externals = Vec::new();
        for (j, e) in g.edges.iter().enumerate() {
            let idx = edges.len();
            edges.push(PlanEdge { tail: node(e.a), head: node(e.b), table: Table::Prop(j) });
            for (v, orient) in [(e.a, 1i8), (e.b, -1i8)] {
                let cv = g.vertices[v];
                if cv.external {
                    externals.push(External { edge: idx, orient, plus: cv.delta == 1, theta: (cv.theta - 1) as usize });
                }
            }
        }

        // Kruskal with interaction lines first.
        let mut parent: Vec<usize> = (0..n_nodes).collect();
        let mut in_tree = vec![false; edges.len()];
        for (j, e) in edges.iter().enumerate() {
            let (a, b) = (find(&mut parent, e.tail), find(&mut parent, e.head));
            if a != b {
                parent[a] = b;
                in_tree[j] = true;
            }
        }
        let free: Vec<usize> = (0..edges.len()).filter(|&j| !in_tree[j]).collect();
        let nf = free.len();

        // Root every component (ground first) and order nodes by BFS.
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n_nodes];
        for (j, e) in edges.iter().enumerate() {
            if in_tree[j] {
                adj[e.tail].push(j);
                adj[e.head].push(j);
            }
        }
        let mut parent_edge = vec![usize::MAX; n_nodes];
        let mut seen = vec![false; n_nodes];
        let mut order = Vec::with_capacity(n_nodes);
        let roots = (has_ground.then_some(ground).into_iter()).chain(0..n_int);
        for root in roots {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let start = order.len();
            order.push(root);
            let mut h = start;
            while h < order.len() {
                let v = order[h];
                h += 1;
                for &j in &adj[v] {
                    let e = edges[j];
                    let u = if e.tail == v { e.head } else { e.tail };
                    if !seen[u] {
                        seen[u] = true;
                        parent_edge[u] = j;
                        order.push(u);
                    }
                }
            }
        }

        // Momentum of each tree edge from the constraint at its child node,
        // leaves first.
        let mut coef: Vec<Option<Vec<i8>>> = vec![None; edges.len()];
        for (fi, &j) in free.iter().enumerate() {
            let mut c = vec![0i8; nf];
            c[fi] = 1;
            coef[j] = Some(c);
        }
        for &v in order.iter().rev() {
            let pe = parent_edge[v];
            if pe == usize::MAX {
                continue;
            }
            let mut acc = vec![0i32; nf];
            for (j, e) in edges.iter().enumerate() {
                if j == pe || e.tail == e.head {
                    continue;
                }
                let o = if e.tail == v { 1 } else if e.head == v { -1 } else { continue };
                let c = coef[j].as_ref().expect("child edges resolved before parent");
                for (a, x) in acc.iter_mut().zip(c) {
                    *a += o * *x as i32;
                }
            }
            let o_pe = if edges[pe].tail == v { 1 } else { -1 };
            coef[pe] = Some(acc.iter().map(|x| (-o_pe * x) as i8).collect());
        }

        let mut levels: Vec<Vec<TreeEdge>> = vec![Vec::new(); nf + 1];
        for j in 0..edges.len() {
            if !in_tree[j] {
                continue;
            }
            let c = coef[j].take().expect("every tree edge resolved");
            let last = c.iter().rposition(|x| *x != 0).unwrap_or(nf);
            levels[last].push(TreeEdge { edge: j, coef: c });
        }
        Self { edges, free, levels, externals, r: if has_ground { g.r as usize } else { 0 } }
    }

    /// Number of summed momenta.
    pub fn free_count(&self) -> usize {
        self.free.len()
    }

    /// `Σ_{momenta} Π_e ĉ_e(p_e) · ξ̂(k; l)`.
    pub fn evaluate(&self, t: &EdgeTables<'_>, xi: &Observable) -> Complex64 {
        let nf = self.free.len();
        let mut p = vec![[0i32; 3]; self.edges.len()];
        let mut konst = 1.0;
        for te in &self.levels[nf] {
            konst *= t.lookup(self.edges[te.edge].table, &[0; 3]);
        }
        if konst == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let supports: Vec<Vec<(Mode, f64)>> = self.free.iter().map(|&j| t.support(self.edges[j].table)).collect();
        let mut re = Sum::new();
        let mut im = Sum::new();
        let mut st = State { t, xi, supports: &supports, p: &mut p, re: &mut re, im: &mut im };
        self.descend(0, konst, &mut st);
        Complex64::new(re.value(), im.value())
    }

    fn descend(&self, level: usize, acc: f64, st: &mut State<'_, '_>) {
        if level == self.free.len() {
            let x = if self.r == 0 { Complex64::new(acc, 0.0) } else { self.leaf(st) * acc };
            st.re.add(x.re);
            st.im.add(x.im);
            return;
        }
        let j = self.free[level];
        for &(k, v) in st.supports[level].iter() {
            st.p[j] = k;
            let mut a = acc * v;
            for te in &self.levels[level] {
                let mut q = [0i32; 3];
                for (fi, &c) in te.coef.iter().enumerate() {
                    if c != 0 {
                        let pf = st.p[self.free[fi]];
                        for (qa, pa) in q.iter_mut().zip(pf) {
                            *qa += c as i32 * pa;
                        }
                    }
                }
                st.p[te.edge] = q;
                a *= st.t.lookup(self.edges[te.edge].table, &q);
                if a == 0.0 {
                    break;
                }
            }
            if a != 0.0 {
                self.descend(level + 1, a, st);
            }
        }
    }

    fn leaf(&self, st: &State<'_, '_>) -> Complex64 {
        let mut k = [[0i32; 3]; 2];
        let mut l = [[0i32; 3]; 2];
        for x in &self.externals {
            let pe = st.p[x.edge];
            let o = x.orient as i32;
            if x.plus {
                k[x.theta] = [-o * pe[0], -o * pe[1], -o * pe[2]];
            } else {
                l[x.theta] = [o * pe[0], o * pe[1], o * pe[2]];
            }
        }
        st.xi.hat(&k[..self.r], &l[..self.r])
    }
}

struct State<'a, 'b> {
    t: &'a EdgeTables<'a>,
    xi: &'a Observable,
    supports: &'a [Vec<(Mode, f64)>],
    p: &'b mut Vec<Mode>,
    re: &'b mut Sum,
    im: &'b mut Sum,
}
