mod common;

use esqpt::model::{build_matrix, coefficients};
use esqpt::propagate::{overlap_trace, KrylovOptions};
use esqpt::spectra::{
    self, decoherence_factor, decoherence_factor_with, eigensystem, find_revival, purity, r_max,
    reduced_density_matrix, DecoherenceSignal, Method, Propagation, QubitState, QuenchSpectrum,
    RevivalOptions,
};
use esqpt::{linalg, meanfield, Complex64, Error, Execution, ModelParams};
use proptest::prelude::*;

fn params(alpha: f64, omega: f64, lambda: f64, n: usize) -> ModelParams {
    ModelParams::new(alpha, omega, lambda, n).unwrap()
}

fn grid(t_max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
}

#[test]
fn harmonic_spectrum() {
    let s = eigensystem(&build_matrix(&params(1.0, 0.0, 0.0, 4)), true).unwrap();
    for (k, e) in s.eigenvalues.iter().enumerate() {
        assert!((e - k as f64).abs() < 1e-12);
    }
    let g = &s.ground_vector;
    assert!((g[0].abs() - 1.0).abs() < 1e-12);
}

#[test]
fn two_state_spectrum() {
    let s = eigensystem(&build_matrix(&params(0.5, 0.0, 0.0, 1)), false).unwrap();
    assert!(s.eigenvalues[0].abs() < 1e-15);
    assert!((s.eigenvalues[1] - 0.5).abs() < 1e-15);
}

#[test]
fn ground_energy_approaches_mean_field() {
    let n = 1000;
    let s = eigensystem(&build_matrix(&params(0.5, 0.0, 0.0, n)), false).unwrap();
    let mf = meanfield::minimize_surface(0.5, 0.0)
        .global
        .energy_per_boson;
    assert!((mf + 0.28125).abs() < 1e-12);
    let per_boson = s.ground_energy() / n as f64;
    assert!(
        (per_boson - mf).abs() < 2.0 / n as f64,
        "{per_boson} vs {mf}"
    );
    let norm: f64 = s.ground_vector.iter().map(|x| x * x).sum();
    assert!((norm - 1.0).abs() < 1e-10);
}

#[test]
fn eigenvectors_diagonalize() {
    let h = build_matrix(&params(0.3, 0.8, 0.5, 60));
    let s = eigensystem(&h, true).unwrap();
    let d = h.dimension();
    let scale = h.norm_bound();
    for k in [0, 1, 17, d - 1] {
        let v = s.eigenvector(k).unwrap();
        let mut hv = vec![0.0; d];
        h.apply(&v, &mut hv);
        let res = hv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - s.eigenvalues[k] * b).abs())
            .fold(0.0, f64::max);
        assert!(res < 1e-10 * scale, "k = {k}: residual {res}");
    }
}

#[test]
fn weights_are_normalized() {
    for &(a, w, l, n) in &[
        (0.5, 0.0, 0.75, 1000),
        (0.5, std::f64::consts::FRAC_1_SQRT_2, 1.17, 800),
        (0.0, 0.0, 2.0, 400),
    ] {
        let p = params(a, w, l, n);
        let h0 = build_matrix(&p.uncoupled());
        let (_, g) = linalg::lowest_eigenpair(&h0).unwrap();
        let (_, weights) = linalg::spectral_weights(&build_matrix(&p), &g).unwrap();
        let total: f64 = weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-8);
        assert!(weights.iter().all(|&x| x >= 0.0));
        let q = QuenchSpectrum::exact(&p).unwrap();
        assert!((q.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn zero_coupling_keeps_coherence() {
    let sig = decoherence_factor(&params(0.4, 0.3, 0.0, 50), &grid(20.0, 200)).unwrap();
    for v in &sig.values {
        assert!((v.norm() - 1.0).abs() < 1e-10);
    }
    assert!(matches!(r_max(&sig), Err(Error::HorizonTooShort(_))));
}

#[test]
fn starts_at_one() {
    let sig = decoherence_factor(&params(0.5, 0.7, 1.3, 80), &[0.0, 0.5]).unwrap();
    assert!((sig.values[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
}

#[test]
fn three_level_trace_matches_dense_exponential() {
    let times = grid(10.0, 401);
    let sig = decoherence_factor(&params(0.0, 0.0, 2.0, 2), &times).unwrap();
    let oracle = common::dense_overlap(0.0, 0.0, 2.0, 2, &times);
    for (a, b) in sig.values.iter().zip(&oracle) {
        assert!((a.norm() - b.norm()).abs() < 1e-9);
    }
}

/// First local maximum after the first interior local minimum, read off
/// a sampled trace.
fn direct_peak(abs: &[f64]) -> f64 {
    let min = (1..abs.len() - 1)
        .find(|&i| abs[i] <= abs[i - 1] && abs[i] < abs[i + 1])
        .unwrap();
    let peak = (min + 1..abs.len() - 1)
        .find(|&i| abs[i] > abs[i - 1] && abs[i] >= abs[i + 1])
        .unwrap();
    abs[peak]
}

#[test]
fn three_level_rmax_matches_dense_oracle() {
    let times = grid(12.0, 12001);
    let oracle: Vec<f64> = common::dense_overlap(0.0, 0.0, 2.0, 2, &times)
        .iter()
        .map(|z| z.norm())
        .collect();
    let want = direct_peak(&oracle);
    let p = params(0.0, 0.0, 2.0, 2);
    let sig = decoherence_factor(&p, &times).unwrap();
    let got = r_max(&sig).unwrap();
    assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    let refined = find_revival(
        &QuenchSpectrum::exact(&p).unwrap(),
        &RevivalOptions::default(),
        Execution::Sequential,
    )
    .unwrap();
    assert!(refined.value >= want - 1e-9 && refined.value - want < 1e-5);
}

#[test]
fn time_reversal_conjugates() {
    let q = QuenchSpectrum::exact(&params(0.5, 0.7, 1.1, 300)).unwrap();
    for i in 0..50 {
        let t = 0.37 * i as f64;
        let d = q.amplitude(-t) - q.amplitude(t).conj();
        assert!(d.norm() < 1e-12);
    }
}

#[test]
fn krylov_agrees_with_spectral_sum() {
    for &(a, w, l) in &[(0.5, 0.0, 0.3), (0.5, 0.5f64.sqrt(), 1.17)] {
        let p = params(a, w, l, 1000);
        let q = QuenchSpectrum::exact(&p).unwrap();
        let period = std::f64::consts::TAU / q.mean_spacing().unwrap();
        let times = grid(2.0 * period, 400);
        let spectral =
            decoherence_factor_with(&p, &times, Propagation::Spectral, Execution::available())
                .unwrap();
        let krylov =
            decoherence_factor_with(&p, &times, Propagation::Krylov, Execution::available())
                .unwrap();
        let worst = spectral
            .values
            .iter()
            .zip(&krylov.values)
            .map(|(a, b)| (a.norm() - b.norm()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "{p}: {worst}");
    }
}

#[test]
fn krylov_rejects_bad_input() {
    let h = build_matrix(&params(0.5, 0.0, 0.3, 10));
    assert!(overlap_trace(&h, &[1.0; 3], &[0.0], &KrylovOptions::default()).is_err());
    let psi = vec![0.0; 11];
    assert!(overlap_trace(&h, &psi, &[1.0, 0.5], &KrylovOptions::default()).is_err());
}

#[test]
fn nonmonotone_grid_rejected() {
    let p = params(0.5, 0.0, 0.3, 10);
    assert!(decoherence_factor(&p, &[0.0, 2.0, 1.0])
        .unwrap_err()
        .is_invalid_spec());
    assert!(decoherence_factor(&p, &[-1.0, 0.0])
        .unwrap_err()
        .is_invalid_spec());
    assert!(decoherence_factor(&p, &[]).unwrap_err().is_invalid_spec());
}

#[test]
fn revivals_suppressed_near_critical_coupling() {
    let opts = RevivalOptions::default();
    let exec = Execution::available();
    let far = find_revival(
        &QuenchSpectrum::exact(&params(0.5, 0.0, 0.3, 1000)).unwrap(),
        &opts,
        exec,
    )
    .unwrap();
    let near = find_revival(
        &QuenchSpectrum::exact(&params(0.5, 0.0, 0.75, 1000)).unwrap(),
        &opts,
        exec,
    )
    .unwrap();
    assert!(far.value > 0.9, "{far:?}");
    assert!(near.value < 0.5 * far.value, "{near:?}");
}

#[test]
fn rmax_far_from_criticality_is_size_independent() {
    let opts = RevivalOptions::default();
    let exec = Execution::available();
    let a = find_revival(
        &QuenchSpectrum::exact(&params(0.4, 0.0, 0.3, 600)).unwrap(),
        &opts,
        exec,
    )
    .unwrap();
    let b = find_revival(
        &QuenchSpectrum::exact(&params(0.4, 0.0, 0.3, 2500)).unwrap(),
        &opts,
        exec,
    )
    .unwrap();
    assert!(a.value > 0.9 && b.value > 0.9);
    assert!(
        (a.value - b.value).abs() < 1e-2,
        "{} vs {}",
        a.value,
        b.value
    );
}

#[test]
fn density_matrix_examples() {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let q = QubitState::new(one, zero).unwrap();
    let rho = reduced_density_matrix(&q, Complex64::new(0.3, 0.2)).unwrap();
    assert_eq!(rho[0][0], one);
    assert_eq!(rho[1][1], zero);
    assert_eq!(rho[0][1], zero);

    let h = Complex64::new(0.5f64.sqrt(), 0.0);
    let q = QubitState::new(h, h).unwrap();
    let pure = reduced_density_matrix(&q, one).unwrap();
    assert!((purity(&pure) - 1.0).abs() < 1e-15);
    let mixed = reduced_density_matrix(&q, zero).unwrap();
    assert!((mixed[0][0].re - 0.5).abs() < 1e-15 && mixed[0][1].norm() < 1e-15);
    assert!((purity(&mixed) - 0.5).abs() < 1e-15);

    assert!(reduced_density_matrix(&q, Complex64::new(1.1, 0.0)).is_err());
    assert!(QubitState::new(one, one).is_err());
}

#[test]
fn signal_round_trips() {
    let p = params(0.5, 0.25, 0.9, 40);
    let sig = decoherence_factor(&p, &grid(7.0, 64)).unwrap();
    let back = DecoherenceSignal::from_csv(&sig.to_csv()).unwrap();
    assert_eq!(back, sig);
    let back = DecoherenceSignal::from_json(&sig.to_json().unwrap()).unwrap();
    assert_eq!(back, sig);
    assert!(sig.to_csv().starts_with("# esqpt-signal v1 method=exact"));

    let bumped = sig.to_csv().replacen("v1", "v9", 1);
    assert!(DecoherenceSignal::from_csv(&bumped).is_err());
    for m in ["exact", "tda", "tda2"] {
        assert_eq!(m.parse::<Method>().unwrap().to_string(), m);
    }
    assert!("rpa".parse::<Method>().is_err());
}

#[test]
fn execution_modes_agree_bitwise() {
    let q = QuenchSpectrum::exact(&params(0.5, 0.7, 1.2, 500)).unwrap();
    let times = grid(50.0, 3000);
    let a = q.amplitudes(&times, Execution::Sequential);
    let b = q.amplitudes(&times, Execution::Parallel);
    assert_eq!(a, b);
}

#[test]
fn sampled_rmax_needs_revival_in_window() {
    let p = params(0.5, 0.0, 0.3, 200);
    let sig = decoherence_factor(&p, &grid(0.05, 20)).unwrap();
    assert!(matches!(
        spectra::r_max(&sig),
        Err(Error::HorizonTooShort(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eigenvalues_match_dense_solver(
        alpha in 0.0f64..=1.0,
        omega in 0.0f64..2.0,
        lambda in 0.0f64..3.0,
        n in 1usize..40,
    ) {
        let p = params(alpha, omega, lambda, n);
        let h = build_matrix(&p);
        let ours = eigensystem(&h, false).unwrap().eigenvalues;
        let dense = nalgebra::DMatrix::from_row_slice(n + 1, n + 1, &h.to_dense());
        let want = common::sorted_eigenvalues(&dense);
        let scale = h.norm_bound().max(1.0);
        for (a, b) in ours.iter().zip(&want) {
            prop_assert!((a - b).abs() < 1e-11 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn spectral_sum_matches_dense_propagation(
        alpha in 0.0f64..=1.0,
        omega in 0.0f64..2.0,
        lambda in 0.0f64..3.0,
        n in 1usize..=10,
    ) {
        let times = grid(10.0, 41);
        let sig = decoherence_factor(&params(alpha, omega, lambda, n), &times).unwrap();
        let oracle = common::dense_overlap(alpha, omega, lambda, n, &times);
        let delta = coefficients(&params(alpha, omega, lambda, n)).delta;
        for ((t, a), b) in times.iter().zip(&sig.values).zip(&oracle) {
            prop_assert!((a.norm() - b.norm()).abs() < 1e-9, "t = {t}: {a} vs {b}");
            // the dense matrix carries the constant shift
            let shifted = a * Complex64::from_polar(1.0, -delta * t);
            prop_assert!((shifted - b).norm() < 1e-9, "t = {t}: {shifted} vs {b}");
        }
    }

    #[test]
    fn modulus_never_exceeds_one(
        alpha in 0.0f64..=1.0,
        omega in 0.0f64..2.0,
        lambda in 0.0f64..5.0,
        n in 1usize..300,
        t_max in 0.1f64..500.0,
    ) {
        let sig = decoherence_factor(&params(alpha, omega, lambda, n), &grid(t_max, 97)).unwrap();
        prop_assert!(sig.values.iter().all(|v| v.norm() <= 1.0 + 1e-8));
    }
}
