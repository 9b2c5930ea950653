use super::*;
use crate::spectral::{grid_values, GridSpec};
use proptest::prelude::*;
use std::vec::Vec;

fn t2(k: u32) -> TorusSpec {
    TorusSpec::new(2, 1.0, k).unwrap()
}

fn t1(k: u32) -> TorusSpec {
    TorusSpec::new(1, 1.0, k).unwrap()
}

#[test]
fn power_fourier_values() {
    let w = build_power_fourier(&t2(4), 1.5, 2.0).unwrap();
    assert_eq!(w.coeff(&[0, 0, 0]), 1.0);
    assert!((w.coeff(&[1, 0, 0]) - 0.629_960_524_947_436_6).abs() < 1e-15);
    assert!(w.is_positive_type());
    for (k, c) in w.coeffs.iter() {
        assert_eq!(c, w.coeff(&crate::spectral::neg(k)));
    }
}

#[test]
fn power_fourier_rejects_bad_parameters() {
    assert!(build_power_fourier(&t2(4), 2.5, 2.0).is_err());
    assert!(build_power_fourier(&t2(4), 1.0, 2.0).is_err());
    assert!(build_power_fourier(&t1(4), 1.5, 2.0).is_err());
    // d = 3 needs p > 3, hence q < p' < 1.5.
    let t3 = TorusSpec::new(3, 1.0, 2).unwrap();
    assert!(build_power_fourier(&t3, 1.4, 3.0).is_err());
    assert!(build_power_fourier(&t3, 1.3, 3.5).is_ok());
    assert!(build_power_fourier(&t3, 1.45, 3.5).is_err());
}

#[test]
fn radial_transform_matches_adaptive_quadrature() {
    // Reference values from an independent adaptive quadrature of the
    // same profile (1D cosine transform, 2D Hankel transform).
    let cases = [
        (1, 1.5, 0.0, 4.479_182_686_007_358),
        (1, 1.5, 4.0, 1.494_230_319_833_25),
        (1, 1.5, 8.0, 1.279_243_006_225_586_2),
        (1, 1.5, 16.0, 0.998_553_391_660_657_4),
        (1, 1.2, 0.0, 10.367_594_540_087_122),
        (2, 1.5, 0.0, 5.255_110_294_724_512),
        (2, 1.5, 1.0, 3.479_826_578_976_29),
        (2, 1.5, 5f64.sqrt(), 1.520_511_549_996_186_8),
        (2, 1.5, 3.0, 1.457_690_024_094_365_5),
    ];
    for (d, q, rho, want) in cases {
        let got = radial_hat(d, q, rho);
        assert!(((got - want) / want).abs() < 1e-7, "d={d} q={q} rho={rho}: {got} vs {want}");
    }
}

#[test]
fn self_convolution_is_positive_and_nonnegative_on_grid() {
    let w = build_self_convolution(&t1(8), 1.5, 1.0).unwrap();
    assert!(w.is_positive_type());
    let (v, _) = grid_values(&w.coeffs, &GridSpec::uniform(17)).unwrap();
    assert!(v.iter().all(|x| *x > 0.0));
    // Peak at the origin grows with the cutoff: the limit is unbounded.
    let big = build_self_convolution(&t1(32), 1.5, 1.0).unwrap();
    let s = |w: &PotentialSpec| w.coeffs.coeffs().iter().sum::<f64>();
    assert!(s(&big) > 1.2 * s(&w));
    assert!(build_self_convolution(&t1(8), 0.9, 1.0).is_err());
    assert!(build_self_convolution(&t1(8), 1.5, 1.6).is_err());
}

#[test]
fn endpoint_square_is_a_square() {
    let spec = t2(4);
    let eps = 0.5;
    let w = build_endpoint_square(&spec, eps).unwrap();
    assert_eq!(w.radius(), 8);
    assert!(w.is_positive_type());
    let f = FourierKernel::from_fn(spec, KernelKind::Custom, |k| libm::pow(bracket(k), -1.0 - eps));
    let g = GridSpec::uniform(17);
    let (fv, _) = grid_values(&f, &g).unwrap();
    let (wv, _) = grid_values(&w.coeffs, &g).unwrap();
    for (a, b) in fv.iter().zip(&wv) {
        assert!((a * a - b).abs() < 1e-10 * (1.0 + b.abs()));
        assert!(*b >= -1e-10);
    }
    let l = w.l.unwrap();
    for (k, c) in w.coeffs.iter() {
        assert!(c <= l * libm::pow(bracket(k), -eps) * (1.0 + 1e-12));
    }
}

#[test]
fn endpoint_decay_exponent_in_window() {
    for eps in [0.5, 1.0] {
        let w = build_endpoint_square(&t2(8), eps).unwrap();
        let e = decay_exponent(&w.coeffs, 2.0, 8.0);
        assert!(e >= -2.0 * eps - 0.3 && e <= -eps + 0.3, "eps={eps}: {e}");
    }
    // Small eps: the cutoff autocorrelation loses terms near |k| = K and
    // decays too fast; widening the support of f restores the window.
    let eps = 0.25;
    let w = build_endpoint_square(&t2(8), eps).unwrap();
    let cut = decay_exponent(&w.coeffs, 2.0, 8.0);
    assert!(cut < -2.0 * eps - 0.3, "{cut}");
    let wide = FourierKernel::new(t2(8), KernelKind::Potential, square_autocorrelation(&t2(8), eps, 32, 8)).unwrap();
    let e = decay_exponent(&wide, 2.0, 8.0);
    assert!(e >= -2.0 * eps - 0.3 && e <= -eps + 0.3, "{e}");
    assert!(build_endpoint_square(&t1(4), 0.5).is_err());
    assert!(build_endpoint_square(&t2(4), 1.5).is_err());
}

#[test]
fn clip_leaves_bounded_potential_alone() {
    let w = build_constant(&t1(4), 0.5).unwrap();
    let wt = mollify_1d(&w, 1.0, 0.9).unwrap();
    for (a, b) in w.coeffs.coeffs().iter().zip(wt.coeffs.coeffs()) {
        assert!((a - b).abs() < 1e-14);
    }
    let rep = verify_potential(&w, &wt, 2.0).unwrap();
    assert!(rep.all_pass(), "{rep:?}");
}

#[test]
fn clip_scan_converges_and_respects_cap() {
    let w = build_self_convolution(&t1(8), 1.5, 1.0).unwrap();
    for p in [1.0, 2.0] {
        let rows = mollification_scan(&w, &[1.0, 10.0, 100.0, 1000.0], p).unwrap();
        let d: Vec<f64> = rows.iter().map(|r| r.distance).collect();
        assert!(non_increasing(&d, 1e-12), "{d:?}");
        assert!(d[0] > 0.0);
        assert!(d[3] < 1e-10, "{d:?}");
        for r in &rows {
            assert!(r.report.all_pass(), "{:?}", r.report);
        }
    }
    let wt = mollify_1d(&w, 10.0, 0.5).unwrap();
    let (v, _) = grid_values(&wt.coeffs, &GridSpec::uniform(17)).unwrap();
    assert!(v.iter().all(|x| *x <= libm::pow(10.0, 0.5) + 1e-12 && *x >= -1e-12));
}

#[test]
fn clip_rejects_negative_grid_values() {
    let spec = t1(2);
    let c = FourierKernel::from_fn(spec, KernelKind::Potential, |k| if k[0] == 0 { 0.1 } else { 1.0 });
    let w = from_coefficients(&spec, c, 1.0).unwrap();
    assert!(mollify_1d(&w, 1.0, 0.5).is_err());
}

#[test]
fn multiplier_fixed_point_and_damping() {
    let w = build_power_fourier(&t2(4), 1.5, 2.0).unwrap();
    let wt = mollify_fourier(&w, 1e4, 0.9, Chi::default()).unwrap();
    assert!(wt.mollified.unwrap().scale >= 8.0);
    assert_eq!(wt.coeffs.coeffs(), w.coeffs.coeffs());
    for tau in [1.0, 10.0, 100.0] {
        let wt = mollify_fourier(&w, tau, 0.9, Chi::default()).unwrap();
        for (a, b) in w.coeffs.coeffs().iter().zip(wt.coeffs.coeffs()) {
            assert!(*b <= *a && *b >= 0.0);
        }
    }
}

#[test]
fn multiplier_sup_clause_against_grid_max() {
    let w = build_power_fourier(&t2(4), 1.5, 2.0).unwrap();
    for tau in [1.0, 10.0, 100.0, 1000.0] {
        let wt = w.mollify(tau).unwrap();
        let (v, _) = grid_values(&wt.coeffs, &GridSpec::uniform(41)).unwrap();
        let max = v.iter().copied().fold(f64::MIN, f64::max);
        assert!(max <= libm::pow(tau, 0.9) + 1e-12, "tau={tau}: {max}");
        let rep = verify_potential(&w, &wt, 2.0).unwrap();
        let c = rep.clause("sup-bound").unwrap();
        assert!(c.pass && (c.measured - max).abs() < 1e-9 * max);
    }
}

#[test]
fn multiplier_lp_constant_over_random_inputs() {
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let spec = t2(4);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let raw: Vec<f64> = (0..41).map(|_| rng.next_u32() as f64 / u32::MAX as f64).collect();
        let c = even_coeffs(spec, &raw);
        let w = from_coefficients(&spec, c, 3.0).unwrap();
        let wt = mollify_fourier(&w, 10.0, 0.9, Chi::default()).unwrap();
        let rep = verify_potential(&w, &wt, 3.0).unwrap();
        let cl = rep.clause("lp-control").unwrap();
        assert!(cl.pass, "{cl:?}");
        worst = worst.max(cl.measured / w.lp_norm(3.0).unwrap());
    }
    assert!(worst > 0.0 && worst < 10.0);
}

#[test]
fn gaussian_mollifier_clauses() {
    let w = build_endpoint_square(&t2(4), 0.5).unwrap();
    let rows = mollification_scan(&w, &[1.0, 10.0, 100.0, 1000.0], 1.0).unwrap();
    let d: Vec<f64> = rows.iter().map(|r| r.distance).collect();
    assert!(non_increasing(&d, 1e-12) && d[3] < d[0], "{d:?}");
    for r in &rows {
        assert!(r.report.all_pass(), "{:?}", r.report);
        assert_eq!(r.report.clauses.len(), 8);
    }
    let wt = mollify_endpoint(&w, 10.0, 0.9).unwrap();
    assert_eq!(wt.coeffs.zero_mode(), w.coeffs.zero_mode());
    assert!(mollify_endpoint(&build_power_fourier(&t2(4), 1.5, 2.0).unwrap(), 1.0, 0.5).is_err());
}

#[test]
fn constant_potential_passes_everything() {
    let w = build_constant(&t2(3), 0.7).unwrap();
    for tau in [1.0, 100.0] {
        let wt = w.mollify(tau).unwrap();
        assert_eq!(wt.coeffs.coeffs(), w.coeffs.coeffs());
        assert!(verify_potential(&w, &wt, 2.0).unwrap().all_pass());
    }
}

#[test]
fn corrupted_mode_fails_positive_type() {
    let w = build_power_fourier(&t2(3), 1.5, 2.0).unwrap();
    let mut wt = w.mollify(10.0).unwrap();
    let m = wt.mollified;
    let bad = wt.coeffs.map(KernelKind::Potential, |k, c| if norm2(k) == 1 { -0.1 } else { c });
    wt = from_coefficients(&w.spec, bad, 2.0).unwrap();
    wt.mollified = m;
    let rep = verify_potential(&w, &wt, 2.0).unwrap();
    assert!(!rep.clause("positive-type").unwrap().pass);
    assert!(!rep.all_pass());
}

#[test]
fn admissible_sets() {
    assert!(in_p_set(1, 1.0) && !in_p_set(2, 1.0) && in_p_set(2, 1.1));
    assert!(!in_p_set(3, 3.0) && in_p_set(3, 3.01));
    assert!(in_b_set(2, 0.9) && !in_b_set(3, 0.5) && in_b_set(3, 0.45));
    assert!(in_q_set(1, f64::INFINITY) && !in_q_set(2, f64::INFINITY));
    assert!(in_q_set(3, 2.5) && !in_q_set(3, 3.0));
}

#[test]
fn chi_profile_shape() {
    let c = Chi::default();
    assert_eq!(c.at(0.0), 1.0);
    assert_eq!(c.at(0.5), 1.0);
    assert_eq!(c.at(1.0), 0.0);
    let mut last = 1.0;
    for i in 0..=100 {
        let v = c.at(0.5 + 0.005 * i as f64);
        assert!(v <= last + 1e-15 && (0.0..=1.0).contains(&v));
        last = v;
    }
}

fn even_coeffs(spec: TorusSpec, raw: &[f64]) -> FourierKernel {
    let modes = spec.modes();
    let n = modes.len();
    FourierKernel::from_fn(spec, KernelKind::Potential, |k| {
        let i = modes.binary_search(k).unwrap();
        let j = modes.binary_search(&crate::spectral::neg(k)).unwrap();
        raw[i.min(j) % raw.len().max(1)] * if n > 0 { 1.0 } else { 0.0 }
    })
}

proptest! {
    #[test]
    fn mollifiers_preserve_sign_and_damp(raw in proptest::collection::vec(0.0f64..2.0, 41), tau in 1.0f64..1e3) {
        let spec = t2(3);
        let w = from_coefficients(&spec, even_coeffs(spec, &raw), 2.0).unwrap();
        let a = mollify_fourier(&w, tau, 0.9, Chi::default()).unwrap();
        let mut e = w.clone();
        e.variant = Variant::EndpointSquare { eps: 0.5 };
        let b = mollify_endpoint(&e, tau, 0.9).unwrap();
        for ((x, y), z) in w.coeffs.coeffs().iter().zip(a.coeffs.coeffs()).zip(b.coeffs.coeffs()) {
            prop_assert!(*y >= 0.0 && *y <= *x);
            prop_assert!(*z >= 0.0 && *z <= *x);
        }
    }

    #[test]
    fn clipping_is_pointwise_monotone(q in 1.3f64..1.95, tau in 1.0f64..50.0) {
        let w = build_self_convolution(&t1(6), q, 1.0).unwrap();
        let wt = mollify_1d(&w, tau, 0.7).unwrap();
        let g = GridSpec::uniform(13);
        let (a, _) = grid_values(&w.coeffs, &g).unwrap();
        let (b, _) = grid_values(&wt.coeffs, &g).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(*y >= -1e-10 && *y <= *x + 1e-10);
        }
    }
}
