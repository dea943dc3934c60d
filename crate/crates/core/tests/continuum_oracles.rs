mod common;

use common::{breaks, simpson_pieces};
use hk_core::continuum::{
    bvp_self_convergence, check_concentration_identity, check_velocity_consistency, smoothed_fields,
};
use hk_core::harness::preset;
use hk_core::{
    check_integrals, field_H, field_g, field_h, simulate, FieldTable, Grid, KernelParams, ParticleEnsemble,
    SimulationConfig, Snapshots,
};

fn trio() -> ParticleEnsemble {
    ParticleEnsemble::new(vec![-0.8, 0.1, 0.6], vec![0.3, 0.45, 0.25]).unwrap()
}

fn normal(u: f64, sigma: f64) -> f64 {
    (-0.5 * (u / sigma).powi(2)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

#[test]
fn smoothed_fields_match_convolution_quadrature() {
    let p = KernelParams::with_nu(0.3).unwrap();
    let sigma = 0.1;
    let ens = trio();
    for x in [-1.5, -0.8, -0.2, 0.1, 0.35, 1.4] {
        let b = breaks(x - 12.0 * sigma, ens.positions(), x + 12.0 * sigma);
        let conv = |field: &dyn Fn(f64) -> f64| simpson_pieces(|y| field(y) * normal(x - y, sigma), &b, 4000);
        let s = smoothed_fields(&ens, x, sigma, &p);
        assert!((s.g - conv(&|y| field_g(&ens, y, &p))).abs() < 1e-11, "g at {x}");
        assert!((s.h - conv(&|y| field_h(&ens, y, &p))).abs() < 1e-11, "h at {x}");
        assert!((s.big_h - conv(&|y| field_H(&ens, y, &p))).abs() < 1e-11, "H at {x}");
    }
}

#[test]
fn grid_fields_converge_to_smoothed_closed_forms() {
    let p = KernelParams::default();
    let sigma = 0.1;
    let ens = trio();
    let errs: Vec<[f64; 3]> = [480usize, 960, 1920]
        .iter()
        .map(|&n| {
            let grid = Grid::new(-12.0, 12.0, n).unwrap();
            let num = FieldTable::from_ensemble(&ens, grid, sigma, &p).unwrap();
            let exact = FieldTable::smoothed_exact(&ens, grid, sigma, &p).unwrap();
            let e = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            [e(&num.g, &exact.g), e(&num.h, &exact.h), e(&num.big_h, &exact.big_h)]
        })
        .collect();
    for k in 0..3 {
        for w in errs.windows(2) {
            let order = (w[0][k] / w[1][k]).log2();
            assert!(order >= 1.9, "field {k}: {errs:?}");
        }
    }
}

#[test]
fn self_convergence_order_from_coarse_grid() {
    let p = KernelParams::default();
    let ens = trio();
    let grid = Grid::with_spacing(-6.0, 6.0, 0.1).unwrap();
    let o = bvp_self_convergence(&grid, |x| hk_core::particles::mollify_at(&ens, 0.2, x), &p).unwrap();
    assert!(o.g >= 1.9 && o.h >= 1.9 && o.big_h >= 1.9, "{o:?}");
    assert!(o.max_residual < 1e-12);
}

#[test]
fn integrals_within_stated_budget() {
    let p = KernelParams::default();
    let ens = trio();
    for n in [400usize, 800, 1600] {
        let c = check_integrals(&ens, &Grid::new(-12.0, 12.0, n).unwrap(), 0.1, &p).unwrap();
        assert!(c.passes(), "{c:?}");
        assert!((c.int_g - c.target_g).abs() < 1e-8 && c.int_h.abs() < 1e-8, "{c:?}");
    }
    let tight = check_integrals(&ens, &Grid::new(-2.0, 2.0, 400).unwrap(), 0.1, &p).unwrap();
    assert!(
        tight.passes() && (tight.int_g - tight.target_g).abs() > 1e-3,
        "{tight:?}"
    );
}

#[test]
fn doubling_domain_changes_little() {
    let p = KernelParams::with_nu(0.2).unwrap();
    let ens = trio();
    let a = FieldTable::from_ensemble(&ens, Grid::with_spacing(-8.0, 8.0, 0.01).unwrap(), 0.1, &p).unwrap();
    let b = FieldTable::from_ensemble(&ens, Grid::with_spacing(-16.0, 16.0, 0.01).unwrap(), 0.1, &p).unwrap();
    let off = 800;
    for j in 0..a.g.len() {
        assert!((a.g[j] - b.g[j + off]).abs() < 1e-8);
        assert!((a.h[j] - b.h[j + off]).abs() < 1e-8);
        assert!((a.big_h[j] - b.big_h[j + off]).abs() < 1e-8);
    }
}

#[test]
fn velocity_paths_agree() {
    let p = KernelParams::with_nu(0.2).unwrap();
    let ens = preset("three_bump").unwrap().ensemble().unwrap();
    let coarse = check_velocity_consistency(&ens, &p, &Grid::with_spacing(-5.0, 5.0, 0.01).unwrap(), 0.1).unwrap();
    let fine = check_velocity_consistency(&ens, &p, &Grid::with_spacing(-5.0, 5.0, 0.005).unwrap(), 0.1).unwrap();
    assert!(
        coarse.path_a_passes() && fine.path_a_passes(),
        "{}",
        coarse.path_a_max_rel
    );
    let order = (coarse.path_b_vs_smoothed / fine.path_b_vs_smoothed).log2();
    assert!(order >= 1.9, "{coarse:?} {fine:?}");
    assert!(fine.path_b_vs_particles < 0.05);
}

#[test]
fn concentration_identity_converges_under_dt_halving() {
    let p = KernelParams::default();
    let pair = ParticleEnsemble::new(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
    let mismatch: Vec<f64> = [0.02, 0.01, 0.005]
        .iter()
        .map(|&dt| {
            let cfg = SimulationConfig {
                kernel: p,
                dt,
                t_end: 1.0,
                snapshots: Snapshots::Every(1),
                ..Default::default()
            };
            let r = check_concentration_identity(&simulate(&pair, &cfg).unwrap(), &p).unwrap();
            assert!(r.nondecreasing && r.min_relative_increment > 0.0);
            r.max_abs_mismatch
        })
        .collect();
    for w in mismatch.windows(2) {
        assert!((w[0] / w[1]).log2() >= 1.9, "{mismatch:?}");
    }
}

#[test]
fn concentration_identity_at_consensus_is_trivial() {
    let p = KernelParams::default();
    let cfg = SimulationConfig {
        kernel: p,
        dt: 0.1,
        t_end: 0.5,
        ..Default::default()
    };
    let r = check_concentration_identity(&simulate(&ParticleEnsemble::single(0.2), &cfg).unwrap(), &p).unwrap();
    assert_eq!(r.max_abs_mismatch, 0.0);
    assert!(r.production.iter().all(|v| *v == 0.0));
}
