use esqpt::dos::*;
use esqpt::meanfield;
use esqpt::{Execution, ModelParams};
use std::f64::consts::FRAC_1_SQRT_2;

fn params(alpha: f64, omega: f64, n: usize) -> ModelParams {
    ModelParams::new(alpha, omega, 0.0, n).unwrap()
}

/// Exact (staircase) and semiclassical densities on the bins of the exact
/// spectrum.
fn pair(p: &ModelParams, bins: usize) -> (DensityOfStates, DensityOfStates, DensityOfStates) {
    let levels = exact_levels(p).unwrap();
    let edges = uniform_edges(levels[0], levels[levels.len() - 1], bins).unwrap();
    let hist = density_from_levels(&levels, &edges, DosEstimator::Histogram).unwrap();
    let stair = density_from_levels(&levels, &edges, DosEstimator::Staircase).unwrap();
    let semi = dos_semiclassical_on(p, &edges, DEFAULT_GRID, Execution::available()).unwrap();
    (hist, stair, semi.dos)
}

#[test]
fn harmonic_density_is_flat() {
    let p = params(1.0, 0.0, 1000);
    let d = dos_exact(&p, 100).unwrap();
    assert_eq!(d.total_count, 1001.0);
    assert!((d.integral() - 1001.0).abs() < 1e-9);
    let mean = d.integral() / 1000.0;
    // ten levels per bin, plus the last edge
    assert!(d
        .density
        .iter()
        .all(|&r| (r - mean).abs() <= 0.02 * mean + 1.0 / 10.0));
    let s = detect_singularities(&d);
    assert!(s.cusp.is_none() && s.jump.is_none(), "{s:?}");

    let (_, stair, semi) = pair(&p, 100);
    let cmp = compare_densities(&semi, &stair, &[], 1).unwrap();
    assert!(
        cmp.max_relative_difference < 0.02,
        "{}",
        cmp.max_relative_difference
    );
    assert!(detect_singularities(&semi).cusp.is_none());

    let own = dos_semiclassical(&p, 100).unwrap();
    assert!(own.sparse_bins.is_empty());
    assert!((own.dos.integral() - 1001.0).abs() < 5.0);
}

#[test]
fn both_estimators_normalized() {
    for p in [
        params(0.5, 0.0, 1000),
        params(0.5, FRAC_1_SQRT_2, 1000),
        params(0.2, 1.3, 400),
    ] {
        let (hist, stair, semi) = pair(&p, 200);
        let n = (p.n_bosons() + 1) as f64;
        for d in [&hist, &stair, &semi] {
            assert!(d.density.iter().all(|&r| r >= 0.0));
            assert!(
                (d.integral() - n).abs() < 0.005 * n,
                "{p}: {}",
                d.integral()
            );
        }
    }
}

#[test]
fn cusp_at_zero_without_jump() {
    let p = params(0.5, 0.0, 1000);
    let (_, stair, semi) = pair(&p, DEFAULT_BINS);
    for (name, d) in [("stair", &stair), ("semi", &semi)] {
        let s = detect_singularities(d);
        let cusp = s.cusp.unwrap_or_else(|| panic!("{name}: no cusp"));
        let zero = d.bin_of(0.0).unwrap();
        assert!(cusp.bin.abs_diff(zero) <= 1, "cusp at {}", cusp.energy);
        assert!(s.jump.is_none(), "{:?}", s.jump);
    }
}

#[test]
fn cusp_and_jump_with_omega() {
    let w = FRAC_1_SQRT_2;
    let p = params(0.5, w, 1000);
    let ec1 = meanfield::first_order_critical_energy(0.5, w)
        .unwrap()
        .energy_per_boson;
    let (_, stair, semi) = pair(&p, DEFAULT_BINS);
    for d in [&stair, &semi] {
        let s = detect_singularities(d);
        let cusp = s.cusp.expect("cusp");
        assert!(cusp.bin.abs_diff(d.bin_of(0.0).unwrap()) <= 1);
        let jump = s.jump.expect("jump");
        let e = jump.energy / 1000.0;
        assert!((-0.13..=-0.11).contains(&e), "jump at {e}");
        assert!(
            (e - ec1).abs() < 2.0 * d.widths()[0] / 1000.0 + 1e-3,
            "{e} vs {ec1}"
        );
    }
}

#[test]
fn jump_present_only_with_omega() {
    for w in [0.5, FRAC_1_SQRT_2, 1.0] {
        let (_, stair, semi) = pair(&params(0.5, w, 1000), DEFAULT_BINS);
        assert!(detect_singularities(&stair).jump.is_some(), "omega = {w}");
        assert!(detect_singularities(&semi).jump.is_some(), "omega = {w}");
    }
    let (_, stair, semi) = pair(&params(0.5, 0.0, 1000), DEFAULT_BINS);
    assert!(detect_singularities(&stair).jump.is_none());
    assert!(detect_singularities(&semi).jump.is_none());
}

#[test]
fn exact_and_semiclassical_agree_away_from_singularities() {
    for w in [0.0, FRAC_1_SQRT_2] {
        let (_, stair, semi) = pair(&params(0.5, w, 1000), DEFAULT_BINS);
        let s = detect_singularities(&stair);
        let singular: Vec<f64> = [s.cusp, s.jump]
            .iter()
            .flatten()
            .map(|x| x.energy)
            .collect();
        let cmp = compare_densities(&stair, &semi, &singular, 3).unwrap();
        assert!(cmp.compared_bins > DEFAULT_BINS / 2);
        assert!(
            cmp.max_relative_difference < 0.05,
            "omega = {w}: {}",
            cmp.max_relative_difference
        );
    }
}

#[test]
fn sampling_is_deterministic() {
    let p = params(0.5, FRAC_1_SQRT_2, 300);
    let edges = uniform_edges(-50.0, 80.0, 64).unwrap();
    let a = dos_semiclassical_on(&p, &edges, 256, Execution::Sequential).unwrap();
    let b = dos_semiclassical_on(&p, &edges, 256, Execution::Parallel).unwrap();
    assert_eq!(a, b);
}

#[test]
fn coarse_grid_reports_sparse_bins() {
    let p = params(0.5, 0.0, 1000);
    let edges = uniform_edges(-300.0, 500.0, 400).unwrap();
    let s = dos_semiclassical_on(&p, &edges, 16, Execution::Sequential).unwrap();
    assert!(!s.sparse_bins.is_empty());
}

#[test]
fn bad_bins_rejected() {
    assert!(uniform_edges(1.0, 0.0, 10).is_err());
    assert!(uniform_edges(0.0, 1.0, 0).is_err());
    assert!(density_from_levels(&[0.0], &[1.0, 0.0], DosEstimator::Histogram).is_err());
}
