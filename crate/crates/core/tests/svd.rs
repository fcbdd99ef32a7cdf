use std::time::Instant;

use music_lite::adders::AdderModel;
use music_lite::cordic::CordicConfig;
use music_lite::fixed::FixedFormat;
use music_lite::linalg::CMatrix;
use music_lite::svd::{
    bidiagonalize, deflation_floor, diagonalize, givens_from, phase_normalize, svd, svd_fixed,
    FixedMatrix, SvdError,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Calibrated constant `c` for the `c·N·2^-F` reconstruction and unitarity
/// bounds under the exact adder: one unit per CORDIC iteration. Measured
/// worst cases are 12 and 10 at Q2.13, 20 and 27 at Q7.24.
fn c_bound(cfg: &CordicConfig) -> f64 {
    cfg.iterations() as f64
}

fn q16() -> CordicConfig {
    CordicConfig::exact_default()
}

fn q32() -> CordicConfig {
    CordicConfig::new(
        FixedFormat::new(32, 24).unwrap(),
        None,
        AdderModel::ripple(32).unwrap(),
    )
    .unwrap()
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn oracle_sv(a: &CMatrix) -> Vec<f64> {
    let m = DMatrix::from_fn(a.rows(), a.cols(), |r, c| a.as_slice()[r * a.cols() + c]);
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// `max_i |s_i - o_i| / o_max`.
fn sv_error(s: &[f64], o: &[f64]) -> f64 {
    let top = o[0].max(f64::MIN_POSITIVE);
    s.iter()
        .zip(o)
        .map(|(a, b)| (a - b).abs() / top)
        .fold(0.0, f64::max)
}

fn oracle_agreement(cfg: &CordicConfig, tol: f64) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let a = random_matrix(&mut rng, 4, 4);
        let r = svd(cfg, &a).unwrap();
        worst = worst.max(sv_error(&r.singular_values(), &oracle_sv(&a)));
    }
    assert!(
        worst <= tol,
        "{}: worst relative error {worst:e}",
        cfg.format()
    );
    assert!(start.elapsed().as_secs_f64() <= 30.0);
}

#[test]
fn oracle_agreement_q16() {
    oracle_agreement(&q16(), 1e-2);
}

#[test]
fn oracle_agreement_q32() {
    oracle_agreement(&q32(), 1e-4);
}

#[test]
fn reconstruction_and_unitarity() {
    for cfg in [q16(), q32()] {
        let lsb = cfg.format().lsb();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for (m, n) in [(4, 4), (6, 4), (4, 6), (8, 8), (3, 3), (16, 16)] {
            let k = m.max(n) as f64;
            for _ in 0..10 {
                let a = random_matrix(&mut rng, m, n);
                let r = svd(&cfg, &a).unwrap();
                // Compare in prescaled units, where the input is unit-norm.
                let unit = (r.scale as f64).exp2();
                let recon = r.reconstruct().max_abs_diff(&a) * unit;
                assert!(
                    recon <= c_bound(&cfg) * k * lsb,
                    "{m}x{n} {}: recon {recon:e}",
                    cfg.format()
                );
                let ru = r.u.unitarity_residual();
                let rv = r.v.unitarity_residual();
                assert!(
                    ru.max(rv) <= c_bound(&cfg) * k * lsb,
                    "{m}x{n} {}: unitarity {ru:e} {rv:e}",
                    cfg.format()
                );
                assert!(r.s.windows(2).all(|w| w[0] >= w[1]) && r.s.iter().all(|&s| s >= 0.0));
                assert_eq!(r.s.len(), m.min(n));
            }
        }
    }
}

#[test]
fn ordering_holds_under_approximate_adders() {
    let f = FixedFormat::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for spec in ["acla:16:4", "loa:16:4", "trunc:16:2"] {
        let cfg = CordicConfig::new(f, None, AdderModel::from_spec(spec).unwrap()).unwrap();
        for _ in 0..5 {
            match svd(&cfg, &random_matrix(&mut rng, 4, 4)) {
                Ok(r) => {
                    assert!(r.s.windows(2).all(|w| w[0] >= w[1]), "{spec}: {:?}", r.s);
                    assert!(r.s.iter().all(|&s| s >= 0.0), "{spec}: {:?}", r.s);
                }
                Err(SvdError::NonConvergence { .. }) => {}
                Err(e) => panic!("{spec}: {e}"),
            }
        }
    }
}

#[test]
fn identity_and_zero() {
    let cfg = q16();
    let tol = 4.0 * cfg.format().lsb();
    let r = svd(&cfg, &CMatrix::identity(4)).unwrap();
    for s in r.singular_values() {
        assert!((s - 1.0).abs() <= 1e-3);
    }
    for c in 0..4 {
        assert!((r.u.as_slice()[c * 4 + c].norm() - 1.0).abs() <= 1e-3);
        assert!((r.v.as_slice()[c * 4 + c].norm() - 1.0).abs() <= 1e-3);
    }
    let z = svd(&cfg, &CMatrix::zeros(3, 3)).unwrap();
    assert!(z.singular_values().iter().all(|&s| s.abs() <= tol));
}

#[test]
fn rank_one_hermitian() {
    let cfg = q16();
    let v = [
        Complex64::new(0.3, 0.1),
        Complex64::new(-0.2, 0.4),
        Complex64::new(0.5, -0.1),
        Complex64::new(0.1, 0.2),
    ];
    let a = CMatrix::from_fn(4, 4, |i, j| v[i] * v[j].conj());
    let n2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let s = svd(&cfg, &a).unwrap().singular_values();
    assert!((s[0] - n2).abs() <= 1e-2 * n2, "{s:?}");
    for &x in &s[1..] {
        assert!(x <= 1e-2 * n2, "{s:?}");
    }
}

#[test]
fn givens_examples() {
    let cfg = q16();
    let f = cfg.format();
    let one = f.quantize(1.0);
    let b = cfg.accuracy_bound();
    assert!(givens_from(&cfg, one, 0).unwrap().rotation.is_identity());

    let g = givens_from(&cfg, one, one).unwrap();
    assert!((f.to_f64(g.theta) - std::f64::consts::FRAC_PI_4).abs() <= b);
    let (x, y) = g.rotation.apply(&cfg, one, one);
    assert!(
        (f.to_f64(x) - 2f64.sqrt()).abs() <= 2.0 * b,
        "{}",
        f.to_f64(x)
    );
    assert!(f.to_f64(y).abs() <= (2.0 - f.frac() as f64).exp2() * 2f64.sqrt() + b);

    let g = givens_from(&cfg, 0, one).unwrap();
    assert!((f.to_f64(g.theta) - std::f64::consts::FRAC_PI_2).abs() <= b);
}

#[test]
fn phase_normalize_examples() {
    let cfg = q16();
    let f = cfg.format();
    let b = cfg.accuracy_bound();
    for (re, im) in [(0.5, 0.0), (0.0, 0.5), (0.3, -0.4)] {
        let (m, phase, rot) = phase_normalize(&cfg, f.quantize(re), f.quantize(im)).unwrap();
        assert!((f.to_f64(m) - 0.5).abs() <= b, "{re},{im}: {}", f.to_f64(m));
        assert!(
            (f.to_f64(phase) - f64::atan2(im, re)).abs() <= b,
            "{re},{im}: {}",
            f.to_f64(phase)
        );
        let (x, y) = rot.apply(&cfg, f.quantize(re), f.quantize(im));
        assert!(f.to_f64(x) >= 0.0 && f.to_f64(y).abs() <= b);
    }
}

#[test]
fn bidiagonal_form_of_diagonal_input() {
    let cfg = q16();
    let a = CMatrix::from_fn(3, 3, |i, j| {
        if i == j {
            Complex64::new([0.5, 0.3, 0.1][i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let m = FixedMatrix::from_cmatrix_unscaled(&a, cfg.format());
    let b = bidiagonalize(&cfg, &m).unwrap();
    let f = cfg.format();
    for i in 0..3 {
        assert_eq!(b.d[i], f.quantize([0.5, 0.3, 0.1][i]));
    }
    assert!(b.e.iter().all(|&e| e == 0));
}

#[test]
fn ill_scaled_two_by_two_block_converges() {
    // A shifted sweep on this block cycles with period two.
    let cfg = q16();
    let f = cfg.format();
    let mut u = FixedMatrix::identity(2, f);
    let mut v = FixedMatrix::identity(2, f);
    let (d, e) = ([43, 6116], [165]);
    let out = diagonalize(&cfg, &d, &e, &mut u, &mut v).unwrap();
    let b = CMatrix::from_fn(2, 2, |r, c| {
        let raw = if r == c {
            d[r]
        } else if r == 0 {
            e[0]
        } else {
            0
        };
        Complex64::new(f.to_f64(raw), 0.0)
    });
    let mut o = oracle_sv(&b);
    let mut s: Vec<f64> = out.s.iter().map(|&x| f.to_f64(x).abs()).collect();
    s.sort_by(|x, y| y.total_cmp(x));
    o.truncate(2);
    let tol = 4.0 * deflation_floor(&cfg) as f64 * f.lsb();
    assert!(
        s.iter().zip(&o).all(|(a, b)| (a - b).abs() <= tol),
        "{s:?} vs {o:?}"
    );
    assert!(u.to_cmatrix().unitarity_residual() <= c_bound(&cfg) * 2.0 * f.lsb());
}

#[test]
fn runtime_budget() {
    let start = Instant::now();
    let cfg = q16();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        svd(&cfg, &random_matrix(&mut rng, 4, 4)).unwrap();
    }
    assert!(start.elapsed().as_secs_f64() <= 30.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scale_equivariance(seed in any::<u64>(), e in -6i32..6) {
        let cfg = q16();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, 4, 4);
        let b = a.scale((e as f64).exp2());
        let ra = svd(&cfg, &a).unwrap();
        let rb = svd(&cfg, &b).unwrap();
        prop_assert_eq!(&ra.s, &rb.s);
        prop_assert_eq!(ra.scale - e, rb.scale);
        prop_assert_eq!(ra.u.as_slice(), rb.u.as_slice());
        prop_assert_eq!(ra.v.as_slice(), rb.v.as_slice());
        let fa = FixedMatrix::from_cmatrix(&a, cfg.format());
        let fb = FixedMatrix::from_cmatrix(&b, cfg.format());
        prop_assert_eq!(svd_fixed(&cfg, &fa).unwrap().s, svd_fixed(&cfg, &fb).unwrap().s);
    }
}
