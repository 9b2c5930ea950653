use super::*;
use crate::potentials::{build_constant, build_endpoint_square, build_power_fourier, from_coefficients};
use crate::spectral::{classical_green, quantum_green, truncated_density, Mode};
use crate::wick::{collapse, enumerate_pairings, ObservableKind};
use core::f64::consts::PI;
use proptest::prelude::*;
use std::vec::Vec;

fn spec(d: usize, k: u32) -> TorusSpec {
    TorusSpec::new(d, 1.0, k).unwrap()
}

fn c64(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Brute-force position-space value of a collapsed graph on an `n^d` grid.
fn grid_value(g: &Multigraph, times: &TimeConfig, regime: Regime, w: &PotentialSpec, xi: &Observable, sp: &TorusSpec, n: usize) -> Complex64 {
    let d = sp.d;
    let pts = n.pow(d as u32);
    let coords = |idx: usize| -> [f64; 3] {
        let mut x = [0.0; 3];
        let mut r = idx;
        for j in (0..d).rev() {
            x[j] = (r % n) as f64 / n as f64;
            r /= n;
        }
        x
    };
    let diff = |a: usize, b: usize| -> usize {
        let (mut ra, mut rb, mut out, mut mul) = (a, b, 0, 1);
        for _ in 0..d {
            let c = (ra % n + n - rb % n) % n;
            out += c * mul;
            mul *= n;
            ra /= n;
            rb /= n;
        }
        out
    };
    let tabulate = |k: &FourierKernel| -> Vec<f64> { (0..pts).map(|i| k.eval(&coords(i)[..d]).unwrap()).collect() };
    let edge_vals: Vec<Vec<f64>> = (0..g.edges.len()).map(|e| tabulate(&edge_kernel(g, e, times, regime, sp).unwrap())).collect();
    let w_vals = tabulate(&w.coeffs);
    let r = xi.rank() as usize;
    let ext: Vec<(usize, bool, usize)> =
        g.vertices.iter().enumerate().filter(|(_, v)| v.external).map(|(j, v)| (j, v.delta == 1, (v.theta - 1) as usize)).collect();
    let xi_at = |xs: &[[f64; 3]], ys: &[[f64; 3]]| -> Complex64 {
        match xi.representation() {
            Representation::Rank1(a) => a
                .iter()
                .map(|((k, l), v)| {
                    let ph: f64 = (0..d).map(|j| k[j] as f64 * xs[0][j] - l[j] as f64 * ys[0][j]).sum();
                    v * Complex64::new(libm::cos(2.0 * PI * ph), libm::sin(2.0 * PI * ph))
                })
                .sum(),
            _ => c64(1.0),
        }
    };
    let nv = g.vertices.len();
    let mut pos = vec![0usize; nv];
    let mut total = Complex64::new(0.0, 0.0);
    loop {
        let mut v = 1.0;
        for (e, ed) in g.edges.iter().enumerate() {
            v *= edge_vals[e][diff(pos[ed.a], pos[ed.b])];
        }
        for i in 0..g.m as usize {
            v *= w_vals[diff(pos[2 * i], pos[2 * i + 1])];
        }
        let mut val = c64(v);
        if r > 0 && !ext.is_empty() {
            let mut xs = vec![[0.0; 3]; r];
            let mut ys = vec![[0.0; 3]; r];
            for &(j, plus, th) in &ext {
                if plus {
                    xs[th] = coords(pos[j]);
                } else {
                    ys[th] = coords(pos[j]);
                }
            }
            val *= xi_at(&xs, &ys);
        }
        total += val;
        let mut a = nv;
        loop {
            if a == 0 {
                return total / (pts as f64).powi(nv as i32);
            }
            a -= 1;
            pos[a] += 1;
            if pos[a] < pts {
                break;
            }
            pos[a] = 0;
        }
    }
}

fn sample_times(m: u32, eta: f64) -> TimeConfig {
    let times = (0..m).map(|j| eta + (1.0 - 2.0 * eta) * (0.83 - 0.31 * j as f64)).collect();
    TimeConfig::new(eta, times).unwrap()
}

#[test]
fn single_mode_covariance() {
    let sp = spec(1, 2);
    let w = build_constant(&sp, 1.0).unwrap();
    let c = coeff_classical(0, &Observable::unit_zero_mode(), &w, &sp).unwrap();
    assert!((c.value - 1.0).abs() < 1e-15);
    assert_eq!(c.pairings, 1);
    let c = coeff_classical(0, &Observable::empty(), &w, &sp).unwrap();
    assert_eq!(c.value, 1.0);
}

#[test]
fn edge_kernel_cases() {
    let sp = spec(2, 2);
    let vs = wick::build_vertex_set(1, 0, 2, ObservableKind::Operator).unwrap();
    let g = collapse(&enumerate_pairings(&vs, Family::R).unwrap()[0], &vs).unwrap();
    let tc = sample_times(1, 0.125);
    let cl = edge_kernel(&g, 0, &tc, Regime::Classical, &sp).unwrap();
    assert_eq!(cl.coeffs(), classical_green(&sp).coeffs());
    let tau = 3.0;
    let gt = quantum_green(&sp, tau).unwrap();
    for (e, ed) in g.edges.iter().enumerate() {
        let k = edge_kernel(&g, e, &tc, Regime::quantum(tau), &sp).unwrap();
        for (a, b) in k.coeffs().iter().zip(gt.coeffs()) {
            let want = if ed.sigma == 1 { b + 1.0 / tau } else { *b };
            assert!((a - want).abs() < 1e-15);
        }
    }
}

#[test]
fn quantum_edge_matches_q_kernel() {
    // Edge between slot 1 and the observable: dt = t_1.
    let sp = spec(1, 3);
    let vs = wick::build_vertex_set(1, 1, 1, ObservableKind::Operator).unwrap();
    let tc = sample_times(1, 0.0);
    let tau = 2.0;
    for p in enumerate_pairings(&vs, Family::Q).unwrap() {
        let g = collapse(&p, &vs).unwrap();
        for (e, ed) in g.edges.iter().enumerate() {
            let dt = tc.slot_time(&g, ed.a) - tc.slot_time(&g, ed.b);
            let same = g.slot(ed.a) == g.slot(ed.b);
            let mut want = crate::spectral::q_kernel(&sp, tau, ed.sigma as f64 * dt).unwrap().coeffs().to_vec();
            if same && ed.sigma == 1 {
                want.iter_mut().for_each(|c| *c += 1.0 / tau);
            }
            let got = edge_kernel(&g, e, &tc, Regime::quantum(tau), &sp).unwrap();
            for (a, b) in got.coeffs().iter().zip(&want) {
                assert!((a - b).abs() <= 1e-14 * b.abs(), "{a} {b} {}", (a - b) / b);
            }
        }
    }
}

fn oracle_cases() -> Vec<(TorusSpec, PotentialSpec, Observable, u32)> {
    let mut v = Vec::new();
    let s1 = spec(1, 2);
    let w1 = from_coefficients(&s1, FourierKernel::from_fn(s1, KernelKind::Potential, |k| 1.0 / (1.0 + (k[0] * k[0]) as f64)), 1.0).unwrap();
    for (_, xi) in Observable::battery(&s1) {
        v.push((s1, w1.clone(), xi.clone(), 1));
        v.push((s1, w1.clone(), xi, 0));
    }
    v.push((s1, w1.clone(), Observable::identity(1).unwrap(), 1));
    v.push((s1, w1, Observable::identity(2).unwrap(), 0));
    let s2 = spec(2, 1);
    let w2 = build_power_fourier(&s2, 1.5, 2.0).unwrap();
    v.push((s2, w2.clone(), Observable::empty(), 1));
    let mix = Observable::battery(&s2).pop().unwrap().1;
    v.push((s2, w2, mix, 1));
    v
}

#[test]
fn momentum_matches_position_space() {
    for (sp, w, xi, m) in oracle_cases() {
        let gs = GraphSet::new(m, &xi, sp.d).unwrap();
        let eta = default_eta(sp.d);
        let tc = sample_times(m, eta);
        let n = 2 * sp.cutoff as usize + w.radius() as usize + 2;
        for regime in [Regime::Classical, Regime::quantum(2.5)] {
            let times = if regime == Regime::Classical { TimeConfig::none() } else { tc.clone() };
            for g in &gs.graphs {
                let a = graph_value_complex(g, &times, regime, &w, &xi, &sp).unwrap();
                let b = grid_value(g, &times, regime, &w, &xi, &sp, n);
                assert!((a - b).norm() <= 1e-8 * a.norm().max(b.norm()) + 1e-14, "{a} vs {b} (m={m}, r={}, d={})", xi.rank(), sp.d);
            }
        }
    }
}

#[test]
fn wick_two_cycle_constant_potential() {
    let sp = spec(2, 2);
    let c = 0.7;
    let w = build_constant(&sp, c).unwrap();
    let gs = GraphSet::new(1, &Observable::empty(), 2).unwrap();
    assert_eq!(gs.len(), 1);
    let v = graph_value_complex(&gs.graphs[0], &TimeConfig::none(), Regime::Classical, &w, &Observable::empty(), &sp).unwrap();
    // ∫∫ c G(y1 - y2)² = c Σ_k G_k².
    let want: f64 = classical_green(&sp).coeffs().iter().map(|g| c * g * g).sum();
    assert!((v.re - want).abs() < 1e-14 * want);
    let n = 2 * 2 + 2;
    let b = grid_value(&gs.graphs[0], &TimeConfig::none(), Regime::Classical, &w, &Observable::empty(), &sp, n);
    assert!((b.re - want).abs() < 1e-10 * want);
}

#[test]
fn one_dimensional_first_coefficient_closed_form() {
    let sp = spec(1, 1);
    let c = 0.5;
    let w = build_constant(&sp, c).unwrap();
    let a = coeff_classical(1, &Observable::empty(), &w, &sp).unwrap();
    let rho = truncated_density(&sp);
    let s2: f64 = classical_green(&sp).coeffs().iter().map(|g| g * g).sum();
    let want = -(c / 2.0) * (rho * rho + s2);
    assert!((a.value - want).abs() < 1e-14);
    assert_eq!(a.pairings, 2);
}

#[test]
fn first_coefficient_is_nonpositive() {
    for (d, k) in [(1, 3), (2, 3), (3, 1)] {
        let sp = spec(d, k);
        let w = if d == 1 { build_constant(&sp, 1.3).unwrap() } else { build_power_fourier(&sp, if d == 3 { 1.3 } else { 1.5 }, if d == 3 { 3.5 } else { 2.0 }).unwrap() };
        assert!(coeff_classical(1, &Observable::empty(), &w, &sp).unwrap().value <= 0.0);
    }
}

#[test]
fn quantum_first_coefficient_closed_form() {
    // d = 2, r = 0: the integrand is time independent.
    let sp = spec(2, 2);
    let c = 0.4;
    let w = build_constant(&sp, c).unwrap();
    let tau = 5.0;
    let a = coeff_quantum(1, &Observable::empty(), tau, &w, &sp, QuadOptions::new(2)).unwrap();
    let g = quantum_green(&sp, tau).unwrap();
    let want: f64 = -0.5 * g.coeffs().iter().map(|x| c * x * (x + 1.0 / tau)).sum::<f64>();
    assert!((a.value - want).abs() < 1e-13 * want.abs());
    assert!(a.quad_error < 1e-14);
}

#[test]
fn zeroth_quantum_coefficient() {
    let sp = spec(2, 3);
    let w = build_constant(&sp, 1.0).unwrap();
    for tau in [1.0, 30.0] {
        let a = coeff_quantum(0, &Observable::unit_zero_mode(), tau, &w, &sp, QuadOptions::new(2)).unwrap();
        assert!((a.value - quantum_green(&sp, tau).unwrap().zero_mode()).abs() < 1e-15);
    }
    let id = coeff_quantum(0, &Observable::identity(1).unwrap(), 4.0, &build_constant(&spec(1, 3), 1.0).unwrap(), &spec(1, 3), QuadOptions::new(1)).unwrap();
    let want: f64 = quantum_green(&spec(1, 3), 4.0).unwrap().coeffs().iter().sum();
    assert!((id.value - want).abs() < 1e-14);
}

#[test]
fn quad_order_and_eta_are_validated() {
    let sp = spec(2, 1);
    let w = build_constant(&sp, 1.0).unwrap();
    let mut o = QuadOptions::new(2);
    o.order = 1;
    assert!(coeff_quantum(1, &Observable::empty(), 2.0, &w, &sp, o).is_err());
    let mut o = QuadOptions::new(2);
    o.eta = 0.0;
    assert!(coeff_quantum(1, &Observable::empty(), 2.0, &w, &sp, o).is_err());
    assert!(TimeConfig::new(0.1, vec![0.5, 0.6]).is_err());
    assert!(TimeConfig::new(0.1, vec![0.95]).is_err());
}

#[test]
fn simplex_volume_and_moment() {
    for m in 1..=3usize {
        let v = simplex_integral(m, 0.125, 6, &|_| Ok(c64(1.0))).unwrap();
        let want = 1.0 / (1..=m).product::<usize>() as f64;
        assert!((v.re - want).abs() < 1e-14);
    }
    // E[t_1] on the unit 2-simplex is 2/3.
    let v = simplex_integral(2, 0.0, 6, &|t| Ok(c64(t.times[0]))).unwrap();
    assert!((v.re - 1.0 / 3.0).abs() < 1e-14);
}

#[test]
fn series_partial_sums() {
    let a = [2.0, -1.0, 0.5];
    assert_eq!(series_eval(&a, 0.0, 3).unwrap(), 2.0);
    assert_eq!(series_eval(&a, 0.3, 1).unwrap(), 2.0);
    assert!((series_eval(&a, 0.5, 3).unwrap() - (2.0 - 0.5 + 0.125)).abs() < 1e-15);
    assert!(series_eval(&a, 0.5, 4).is_err());
}

#[test]
fn cutoff_mismatch_is_reported() {
    let w = build_constant(&spec(2, 2), 1.0).unwrap();
    assert_eq!(coeff_classical(1, &Observable::empty(), &w, &spec(2, 3)), Err(Error::CutoffMismatch));
    let far = Observable::mode_projector([5, 0, 0]);
    let sp = spec(2, 2);
    assert!(coeff_classical(0, &far, &w, &sp).is_err());
}

#[test]
fn quantum_tends_to_classical() {
    let sp = spec(2, 2);
    let w = build_power_fourier(&sp, 1.5, 2.0).unwrap();
    let xi = Observable::battery(&sp)[2].1.clone();
    let scan = convergence_scan(1, &xi, &[1.0, 10.0, 100.0, 1000.0], &w, &sp, QuadOptions::new(2), false, &Sequential).unwrap();
    let gaps: Vec<f64> = scan.rows.iter().map(|r| r.gap).collect();
    assert!(gaps.windows(2).all(|p| p[1] < p[0]), "{gaps:?}");
    assert!(gaps[3] < 0.05 * gaps[0]);
    let frozen = convergence_scan(1, &xi, &[10.0, 1000.0], &w, &sp, QuadOptions::new(2), true, &Sequential).unwrap();
    assert!(frozen.frozen && frozen.rows[1].gap < frozen.rows[0].gap);
}

#[test]
fn heat_and_contact_terms_vanish() {
    let sp = spec(1, 3);
    let w = build_constant(&sp, 0.5).unwrap();
    let xi = Observable::unit_zero_mode();
    let mut prev = f64::INFINITY;
    for tau in [2.0, 20.0, 200.0, 2000.0] {
        let mut full = QuadOptions::new(1);
        full.order = 10;
        let mut q1 = full;
        q1.part = KernelPart::Q1Only;
        let a = coeff_quantum(1, &xi, tau, &w, &sp, full).unwrap().value;
        let b = coeff_quantum(1, &xi, tau, &w, &sp, q1).unwrap().value;
        let diff = (a - b).abs();
        assert!(diff < prev / 4.0, "tau {tau}: {diff} vs {prev}");
        prev = diff;
    }
    // O(1/τ) decay.
    assert!(prev * 2000.0 < 3.0);
}

#[test]
fn endpoint_potential_is_summed_on_its_ball() {
    // Interaction lines reach |k| = 2K; the result must match the grid.
    let sp = spec(2, 1);
    let w = build_endpoint_square(&sp, 0.5).unwrap();
    assert_eq!(w.radius(), 2);
    let gs = GraphSet::new(1, &Observable::empty(), 2).unwrap();
    let a = graph_value_complex(&gs.graphs[0], &TimeConfig::none(), Regime::Classical, &w, &Observable::empty(), &sp).unwrap();
    let b = grid_value(&gs.graphs[0], &TimeConfig::none(), Regime::Classical, &w, &Observable::empty(), &sp, 7);
    assert!((a - b).norm() < 1e-10 * a.norm());
}

#[test]
fn rank_two_observable_is_real() {
    let sp = spec(1, 2);
    let w = build_constant(&sp, 0.3).unwrap();
    let battery = Observable::battery(&sp);
    let a = match battery[3].1.representation() {
        Representation::Rank1(a) => a.clone(),
        _ => unreachable!(),
    };
    let b = match battery[4].1.representation() {
        Representation::Rank1(b) => b.clone(),
        _ => unreachable!(),
    };
    let xi = Observable::rank2(vec![(0.5, a.clone(), b.clone()), (0.5, b, a)]).unwrap();
    assert!(xi.hs_norm() <= 1.0);
    for m in 0..=1 {
        let c = coeff_classical(m, &xi, &w, &sp).unwrap();
        assert!(c.value.is_finite());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn nonnegative_kernels_give_nonnegative_values(seed in any::<u64>(), tau in 1.0f64..50.0, m in 0u32..=2) {
        let sp = spec(1, 2);
        let mut s = seed;
        let mut next = || { s = s.wrapping_mul(6364136223846793005).wrapping_add(1); (s >> 11) as f64 / (1u64 << 53) as f64 };
        let vals: Vec<f64> = (0..=2).map(|_| next()).collect();
        let w = from_coefficients(&sp, FourierKernel::from_fn(sp, KernelKind::Potential, |k: &Mode| vals[k[0].unsigned_abs() as usize]), 1.0).unwrap();
        let mut xm = SparseMatrix::new();
        for k in -2..=2 {
            xm.insert([k, 0, 0], [k, 0, 0], c64(next()));
        }
        let xi = Observable::rank1(xm).unwrap();
        let gs = GraphSet::new(m, &xi, 1).unwrap();
        let tc = sample_times(m, 0.0);
        for g in &gs.graphs {
            let v = graph_value_complex(g, &tc, Regime::quantum(tau), &w, &xi, &sp).unwrap();
            prop_assert!(v.re >= -1e-14 && v.im.abs() < 1e-14);
        }
    }
}
