use super::*;
use alloc::collections::BTreeSet;
use proptest::prelude::*;

fn std_set(m: u32, r: u32, d: usize) -> VertexSet {
    build_vertex_set(m, r, d, ObservableKind::Operator).unwrap()
}

/// Count matchings by running over every permutation of the `-` vertices.
fn brute_count(vs: &VertexSet, family: Family) -> usize {
    let plus: Vec<Vertex> = vs.vertices.iter().copied().filter(|v| v.delta == 1).collect();
    let minus: Vec<Vertex> = vs.vertices.iter().copied().filter(|v| v.delta == -1).collect();
    let mut perm: Vec<usize> = (0..minus.len()).collect();
    let mut count = 0;
    loop {
        let ok = family == Family::Q
            || plus
                .iter()
                .zip(&perm)
                .all(|(p, &j)| !(p.i <= vs.m && p.i == minus[j].i && p.theta == minus[j].theta));
        count += ok as usize;
        // next lexicographic permutation
        let n = perm.len();
        if n < 2 {
            return count;
        }
        let mut i = n - 1;
        while i > 0 && perm[i - 1] >= perm[i] {
            i -= 1;
        }
        if i == 0 {
            return count;
        }
        let mut j = n - 1;
        while perm[j] <= perm[i - 1] {
            j -= 1;
        }
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
}

#[test]
fn vertex_counts_and_orders() {
    assert_eq!(std_set(0, 1, 2).vertices.len(), 2);
    let v = std_set(1, 0, 2).vertices;
    let want = [(1, 1, 1), (1, 1, -1), (1, 2, 1), (1, 2, -1)];
    for (a, b) in v.iter().zip(want) {
        assert_eq!((a.i, a.theta, a.delta), b);
    }
    let v = std_set(1, 0, 1).vertices;
    let want = [(1, 1, 1), (1, 2, 1), (1, 1, -1), (1, 2, -1)];
    for (a, b) in v.iter().zip(want) {
        assert_eq!((a.i, a.theta, a.delta), b);
    }
    for m in 0..4 {
        for r in 0..3 {
            for d in 1..=3 {
                assert_eq!(std_set(m, r, d).vertices.len() as u32, 4 * m + 2 * r);
            }
        }
    }
}

#[test]
fn identity_needs_one_dimension() {
    assert!(build_vertex_set(1, 1, 2, ObservableKind::Identity).is_err());
    assert!(build_vertex_set(1, 1, 1, ObservableKind::Identity).is_ok());
}

#[test]
fn small_counts() {
    assert_eq!(enumerate_pairings(&std_set(1, 0, 2), Family::Q).unwrap().len(), 2);
    assert_eq!(enumerate_pairings(&std_set(1, 0, 2), Family::R).unwrap().len(), 1);
    assert_eq!(enumerate_pairings(&std_set(2, 0, 3), Family::R).unwrap().len(), 9);
    assert_eq!(wick_ordered_count(2, 0), 9);
    assert!(enumerate_pairings(&std_set(1, 0, 1), Family::R).is_err());
}

#[test]
fn counts_match_brute_force_and_formulas() {
    for m in 0..=3u32 {
        for r in 0..=2u32 {
            let vs = std_set(m, r, 2);
            let q = enumerate_pairings(&vs, Family::Q).unwrap();
            let rr = enumerate_pairings(&vs, Family::R).unwrap();
            assert_eq!(rr.len(), brute_count(&vs, Family::R), "R m={m} r={r}");
            assert_eq!(rr.len() as i128, wick_ordered_count(m, r));
            if m + r <= 4 {
                assert_eq!(q.len(), brute_count(&vs, Family::Q));
                assert_eq!(q.len() as u64, crate::num::factorial_u64(2 * m + r));
            }
            let uniq: BTreeSet<_> = rr.iter().map(|p| p.edges.clone()).collect();
            assert_eq!(uniq.len(), rr.len());
            assert!(rr.iter().all(|p| p.is_valid(&vs)));
        }
    }
}

#[test]
fn single_wick_pairing_is_a_two_cycle() {
    let vs = std_set(1, 0, 2);
    let p = &enumerate_pairings(&vs, Family::R).unwrap()[0];
    let g = collapse(p, &vs).unwrap();
    assert_eq!(g.vertices.len(), 2);
    assert_eq!(g.edges.len(), 2);
    assert!(g.edges.iter().all(|e| (e.a, e.b) == (0, 1)));
    let pd = path_decompose(&g);
    assert_eq!(pd.paths.len(), 1);
    assert_eq!(pd.paths[0].kind, PathKind::Closed);
    assert_eq!(pd.paths[0].edges.len(), 2);
    // (1,1,+)-(1,2,-) gets σ = -1; (1,1,-)-(1,2,+) ends on a + vertex.
    let mut s: Vec<i8> = g.edges.iter().map(|e| e.sigma).collect();
    s.sort();
    assert_eq!(s, [-1, 1]);
}

#[test]
fn external_edge_is_open() {
    let vs = std_set(0, 1, 2);
    let ps = enumerate_pairings(&vs, Family::R).unwrap();
    assert_eq!(ps.len(), 1);
    let g = collapse(&ps[0], &vs).unwrap();
    assert_eq!(g.edges, [Edge { a: 0, b: 1, sigma: -1 }]);
    let pd = path_decompose(&g);
    assert_eq!(pd.paths.len(), 1);
    assert_eq!(pd.paths[0].kind, PathKind::Open);
    assert_eq!(pd.paths[0].vertices, [0, 1]);
}

#[test]
fn identity_paths_are_closed() {
    for (m, r) in [(0, 1), (1, 1), (2, 1), (1, 2), (2, 2)] {
        let vs = build_vertex_set(m, r, 1, ObservableKind::Identity).unwrap();
        for p in enumerate_pairings(&vs, Family::Q).unwrap() {
            let g = collapse(&p, &vs).unwrap();
            assert!(path_decompose(&g).paths.iter().all(|p| p.kind == PathKind::Closed));
        }
    }
}

#[test]
fn loops_only_in_q() {
    let vs = std_set(2, 1, 2);
    for p in enumerate_pairings(&vs, Family::R).unwrap() {
        assert!(!collapse(&p, &vs).unwrap().has_loop());
    }
    let vs1 = std_set(1, 0, 1);
    let g: Vec<_> = enumerate_pairings(&vs1, Family::Q).unwrap().iter().map(|p| collapse(p, &vs1).unwrap()).collect();
    assert!(g.iter().any(|g| g.has_loop()));
    for g in &g {
        for e in g.edges.iter().filter(|e| e.a == e.b) {
            assert_eq!(e.sigma, -1);
        }
    }
}

#[test]
fn labels_follow_the_table() {
    for (m, r, d) in [(1, 0, 2), (2, 0, 2), (2, 1, 3), (3, 0, 2), (2, 1, 1), (3, 1, 1)] {
        let vs = std_set(m, r, d);
        for p in enumerate_pairings(&vs, Family::for_dim(d)).unwrap() {
            let g = collapse(&p, &vs).unwrap();
            let pd = path_decompose(&g);
            let lab = interaction_labels(&g, &pd);
            for i in 0..m as usize {
                let (a, b) = (2 * i, 2 * i + 1);
                assert!((lab[a] == Label::W) ^ (lab[b] == Label::W));
                let (pa, pb) = (pd.path_of(a).unwrap(), pd.path_of(b).unwrap());
                if pa <= pb {
                    assert_eq!(lab[a], Label::W);
                } else {
                    assert_eq!(lab[b], Label::W);
                }
            }
        }
    }
}

/// Symbolic check: collecting `w(y_a - y_{a*})` over labelled vertices gives
/// the factor set `{w(y_{i,1} - y_{i,2})}` exactly, up to evenness of `w`.
#[test]
fn label_product_reproduces_interaction() {
    for m in 1..=3u32 {
        let vs = std_set(m, 1, 2);
        for p in enumerate_pairings(&vs, Family::R).unwrap() {
            let g = collapse(&p, &vs).unwrap();
            let lab = interaction_labels(&g, &path_decompose(&g));
            let mut factors: Vec<(u32, u32, u32)> = Vec::new();
            for (a, l) in lab.iter().enumerate() {
                if *l == Label::W {
                    let v = g.vertices[a];
                    let star = 3 - v.theta;
                    let (lo, hi) = (v.theta.min(star), v.theta.max(star));
                    factors.push((v.i, lo, hi));
                }
            }
            factors.sort();
            let want: Vec<_> = (1..=m).map(|i| (i, 1, 2)).collect();
            assert_eq!(factors, want);
        }
    }
}

#[test]
fn edge_list_export() {
    let vs = std_set(0, 1, 2);
    let g = collapse(&enumerate_pairings(&vs, Family::R).unwrap()[0], &vs).unwrap();
    let s = g.to_edge_list();
    assert!(s.contains("e 0 1 -1"));
    assert_eq!(s.lines().filter(|l| l.starts_with("v ")).count(), 2);
}

#[test]
fn invalid_pairing_is_rejected() {
    let vs = std_set(1, 0, 2);
    let p = Pairing { family: Family::R, edges: vec![(0, 2), (1, 3)] };
    assert!(collapse(&p, &vs).is_err());
    let p = Pairing { family: Family::R, edges: vec![(0, 1), (2, 3)] };
    assert!(collapse(&p, &vs).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn edge_counts_and_hash_invariance(m in 0u32..=3, r in 0u32..=1, d in 1usize..=3, pick in any::<u64>(), seed in any::<u64>()) {
        let vs = std_set(m, r, d);
        let ps = enumerate_pairings(&vs, Family::for_dim(d)).unwrap();
        prop_assume!(!ps.is_empty());
        let p = &ps[(pick % ps.len() as u64) as usize];
        let g = collapse(p, &vs).unwrap();
        let pd = path_decompose(&g);
        let total: usize = pd.paths.iter().map(|p| p.edges.len()).sum();
        prop_assert_eq!(total as u32, 2 * m + r);
        let mut seen = vec![false; g.edges.len()];
        for path in &pd.paths {
            for &e in &path.edges {
                prop_assert!(!seen[e]);
                seen[e] = true;
            }
            if path.kind == PathKind::Open {
                let ends = path.vertices.iter().filter(|&&v| g.vertices[v].external).count();
                prop_assert_eq!(ends, 2);
            }
        }
        // Shuffle and flip the edges, canonicalize, re-collapse.
        let mut q = p.clone();
        let mut s = seed;
        for j in (1..q.edges.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            q.edges.swap(j, (s >> 33) as usize % (j + 1));
            if s & 1 == 1 {
                q.edges[j] = (q.edges[j].1, q.edges[j].0);
            }
        }
        q.canonicalize();
        prop_assert_eq!(&q, p);
        prop_assert_eq!(collapse(&q, &vs).unwrap().canonical_hash(), g.canonical_hash());
    }
}
