use std::f64::consts::PI;

use music_lite::cordic::CordicConfig;
use music_lite::linalg::{dot_h, CMatrix};
use music_lite::music::{
    covariance, noise_subspace, peak_search, pseudospectrum, steering, MusicConfig,
};
use music_lite::ofdm::{
    build_frame, channel, reciprocal_filter, run_pipeline, OfdmConfig, RadarScene, RngSpec,
};
use music_lite::SPEED_OF_LIGHT;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DF: f64 = 960e3;

fn grid_step() -> f64 {
    MusicConfig::default().grid_step(DF)
}

/// Orthonormal basis of the complement of `a` by Gram-Schmidt on the
/// standard basis.
fn complement(a: &[Complex64]) -> CMatrix {
    let n = a.len();
    let norm = dot_h(a, a).re.sqrt();
    let mut basis: Vec<Vec<Complex64>> = vec![a.iter().map(|z| z / norm).collect()];
    for k in 0..n {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[k] = Complex64::new(1.0, 0.0);
        for _ in 0..2 {
            for b in &basis {
                let p = dot_h(b, &v);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= p * bi;
                }
            }
        }
        let len = dot_h(&v, &v).re.sqrt();
        if len > 1e-6 {
            basis.push(v.iter().map(|z| z / len).collect());
        }
    }
    assert_eq!(basis.len(), n);
    CMatrix::from_fn(n, n - 1, |r, c| basis[c + 1][r])
}

fn brute_force_peaks(p: &[f64], k: usize) -> (Vec<usize>, bool) {
    let n = p.len();
    let mut cands = Vec::new();
    for i in 0..n {
        if i > 0 && p[i - 1] == p[i] {
            continue;
        }
        let mut j = i;
        while j + 1 < n && p[j + 1] == p[i] {
            j += 1;
        }
        let lower_left = i == 0 || p[i - 1] < p[i];
        let lower_right = j == n - 1 || p[j + 1] < p[i];
        if lower_left && lower_right && !(i == 0 && j == n - 1) {
            cands.push(i);
        }
    }
    let mut sorted = Vec::new();
    while let Some(best) = cands
        .iter()
        .copied()
        .filter(|c| !sorted.contains(c))
        .reduce(|a, b| if p[b] > p[a] { b } else { a })
    {
        sorted.push(best);
    }
    let short = sorted.len() < k;
    sorted.truncate(k);
    (sorted, short)
}

#[test]
fn grid_step_pins_reference_value() {
    let step = grid_step();
    assert!((step - 0.031228).abs() < 1e-6, "{step}");
    assert!((MusicConfig::default().range_max(DF) - 156.1419).abs() < 1e-4);
}

#[test]
fn orthogonal_noise_subspace_peaks_at_nearest_grid_point() {
    let step = grid_step();
    for r0 in [10.0, 33.3, 50.0, 120.7] {
        let a = steering(r0, 32, DF).unwrap();
        let spec = pseudospectrum(&complement(&a), DF, &MusicConfig::default()).unwrap();
        let nearest = (r0 / step).round() as usize;
        assert_eq!(spec.peak_indices[0], nearest, "r0 {r0}");
        assert!((spec.peaks[0] - r0).abs() <= step / 2.0);
    }
}

#[test]
fn identity_covariance_gives_flat_spectrum() {
    let e_n = noise_subspace(&CMatrix::identity(16), 1, &CordicConfig::exact_default()).unwrap();
    let spec = pseudospectrum(&e_n, DF, &MusicConfig::default()).unwrap();
    let (lo, hi) = spec
        .p_mu
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), &p| (l.min(p), h.max(p)));
    assert!(lo > 0.0 && hi.is_finite());
    // Fixed-point U is unitary to about N·I LSB, far above the float 1e-9.
    assert!((hi - lo) / hi < 0.05, "{lo} {hi}");
}

#[test]
fn float_identity_spectrum_is_flat() {
    let e_n = CMatrix::identity(16).columns(1..16);
    let cfg = MusicConfig {
        n_targets: 1,
        ..MusicConfig::default()
    };
    let spec = pseudospectrum(&e_n, DF, &cfg).unwrap();
    // Only the first column is missing, so `a^H E E^H a = N - 1` everywhere.
    for &p in &spec.p_mu {
        assert!((p * 15.0 - 1.0).abs() < 1e-9, "{p}");
    }
}

#[test]
fn two_injected_peaks_recovered() {
    let mut p = vec![1.0; 400];
    for (c, h) in [(90usize, 50.0), (300, 80.0)] {
        for d in 0..10usize {
            let v = h / (1.0 + d as f64);
            p[c + d] = f64::max(p[c + d], v);
            p[c - d] = f64::max(p[c - d], v);
        }
    }
    let (idx, short) = peak_search(&p, 2);
    assert_eq!(idx, vec![300, 90]);
    assert!(!short);
}

#[test]
fn monotone_spectrum_endpoint_is_candidate() {
    let p: Vec<f64> = (0..50).map(|i| i as f64).collect();
    assert_eq!(peak_search(&p, 1), (vec![49], false));
    let rev: Vec<f64> = p.iter().rev().copied().collect();
    assert_eq!(peak_search(&rev, 2), (vec![0], true));
    assert_eq!(peak_search(&[3.0; 20], 1), (vec![], true));
}

proptest! {
    #[test]
    fn peak_search_matches_brute_force(
        p in prop::collection::vec(0u8..6, 1..60),
        k in 1usize..5,
    ) {
        let p: Vec<f64> = p.into_iter().map(f64::from).collect();
        prop_assert_eq!(peak_search(&p, k), brute_force_peaks(&p, k));
    }

    #[test]
    fn covariance_is_hermitian_psd(seed in any::<u64>(), fb in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = CMatrix::from_fn(8, 5, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let r = covariance(&d, fb);
        for i in 0..8 {
            for k in 0..8 {
                prop_assert_eq!(r[(i, k)], r[(k, i)].conj());
            }
        }
        let m = DMatrix::from_fn(8, 8, |i, k| r[(i, k)]);
        let eig = m.symmetric_eigenvalues();
        let trace = r.trace().re;
        prop_assert!(eig.iter().all(|&e| e >= -1e-9 * trace), "{eig:?}");
    }

}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rescaled_covariance_keeps_peak_index(seed in 0u64..1000, scale in 1e-3f64..1e3) {
        let cfg = OfdmConfig::default();
        let scene = RadarScene::default();
        let mut rng = RngSpec::new(seed, 0).rng();
        let x = build_frame(&cfg, &mut rng);
        let y = channel(&x, &scene, &cfg, &mut rng);
        let r = covariance(&reciprocal_filter(&y, &x).unwrap(), false);
        let cordic = CordicConfig::exact_default();
        let music = MusicConfig::default();
        let base = pseudospectrum(&noise_subspace(&r, 1, &cordic).unwrap(), DF, &music).unwrap();
        let scaled = noise_subspace(&r.scale(scale), 1, &cordic).unwrap();
        let scaled = pseudospectrum(&scaled, DF, &music).unwrap();
        prop_assert_eq!(base.peak_indices, scaled.peak_indices);
    }
}

fn noiseless(range: f64) -> f64 {
    let scene = RadarScene {
        target_range_m: range,
        snr_db: None,
        ..RadarScene::default()
    };
    let res = run_pipeline(
        &OfdmConfig::default(),
        &scene,
        &MusicConfig::default(),
        &CordicConfig::exact_default(),
        RngSpec::new(11, 0),
        false,
    )
    .unwrap();
    assert!(res.converged);
    res.estimated_range_m
}

#[test]
fn noiseless_on_grid_target_is_exact() {
    let step = grid_step();
    for g in [64usize, 500, 1601, 2222, 3100, 4800] {
        let r = g as f64 * step;
        assert_eq!(noiseless(r), r, "grid point {g}");
    }
}

#[test]
fn noiseless_reference_target_hits_nearest_grid_point() {
    let est = noiseless(50.0);
    assert!((est - 50.0).abs() <= 0.0156, "{est}");
    assert_eq!(est, (50.0 / grid_step()).round() * grid_step());
}

#[test]
fn noiseless_channel_phase_ramp() {
    let cfg = OfdmConfig::default();
    let scene = RadarScene {
        snr_db: None,
        ..RadarScene::default()
    };
    let mut rng = RngSpec::new(5, 0).rng();
    let x = build_frame(&cfg, &mut rng);
    let d = reciprocal_filter(&channel(&x, &scene, &cfg, &mut rng), &x).unwrap();
    let tau = 2.0 * 50.0 / SPEED_OF_LIGHT;
    let slope = -2.0 * PI * DF * tau;
    for m in 0..cfg.n_symbols {
        let mut unwrapped = d[(0, m)].arg();
        for n in 1..cfg.n_subcarriers {
            let mut step = d[(n, m)].arg() - d[(n - 1, m)].arg();
            step -= 2.0 * PI * (step / (2.0 * PI)).round();
            unwrapped += step;
            let want = d[(0, m)].arg() + slope * n as f64;
            assert!((unwrapped - want).abs() < 1e-9, "n {n} m {m}");
            assert!((d[(n, m)].norm() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn reciprocal_filter_keeps_noise_variance() {
    let cfg = OfdmConfig {
        n_subcarriers: 64,
        n_symbols: 256,
        ..OfdmConfig::default()
    };
    let noisy = RadarScene {
        snr_db: Some(3.0),
        ..RadarScene::default()
    };
    let clean = RadarScene {
        snr_db: None,
        ..noisy.clone()
    };
    let mut rng = RngSpec::new(9, 0).rng();
    let x = build_frame(&cfg, &mut rng);
    let y = channel(&x, &noisy, &cfg, &mut rng);
    let y0 = channel(&x, &clean, &cfg, &mut rng);
    let d = reciprocal_filter(&y, &x).unwrap();
    let d0 = reciprocal_filter(&y0, &x).unwrap();
    let count = (cfg.n_subcarriers * cfg.n_symbols) as f64;
    let power = |a: &CMatrix, b: &CMatrix| {
        a.as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(u, v)| (u - v).norm_sqr())
            .sum::<f64>()
            / count
    };
    let (vy, vd) = (power(&y, &y0), power(&d, &d0));
    assert!((vy - vd).abs() < 1e-9 * vy);
    assert!((vd / noisy.noise_variance() - 1.0).abs() < 0.05, "{vd}");
}

#[test]
fn pipeline_is_deterministic_and_flags_cp() {
    let run = || {
        run_pipeline(
            &OfdmConfig::default(),
            &RadarScene::default(),
            &MusicConfig::default(),
            &CordicConfig::exact_default(),
            RngSpec::new(77, 3),
            true,
        )
        .unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.estimated_range_m.to_bits(), b.estimated_range_m.to_bits());
    assert_eq!(a.spectrum, b.spectrum);
    assert!(a.cp_warning);
    let spec = a.spectrum.unwrap();
    assert!(spec.p_mu.iter().all(|p| p.is_finite() && *p > 0.0));
    assert_eq!(spec.grid.len(), 5000);
}
