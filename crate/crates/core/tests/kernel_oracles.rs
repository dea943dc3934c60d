mod common;

use approx::assert_relative_eq;
use common::{breaks, simpson_pieces};
use hk_core::kernel::concentration_fast;
use hk_core::{concentration, eta, field_H, field_g, field_h, KernelParams, ParticleEnsemble};

fn sample() -> ParticleEnsemble {
    ParticleEnsemble::new(vec![-1.3, -0.2, 0.05, 0.9, 2.4], vec![0.1, 0.3, 0.25, 0.2, 0.15]).unwrap()
}

#[test]
fn eta_matches_exponential() {
    let p = KernelParams::default();
    assert_eq!(eta(0.0, &p).unwrap(), 1.0);
    assert_relative_eq!(eta(2.0, &p).unwrap(), 0.01831563888873418, max_relative = 1e-15);
    assert!(eta(-1e-3, &p).is_err());
}

#[test]
fn g_integrates_to_two_nu_times_mass() {
    for nu in [0.1, 0.5, 2.0] {
        let p = KernelParams::with_nu(nu).unwrap();
        let ens = sample();
        let b = breaks(-1.3 - 60.0 * nu, ens.positions(), 2.4 + 60.0 * nu);
        let int_g = simpson_pieces(|x| field_g(&ens, x, &p), &b, 4000);
        let int_h = simpson_pieces(|x| field_h(&ens, x, &p), &b, 4000);
        assert_relative_eq!(int_g, 2.0 * nu, max_relative = 1e-9);
        assert!(int_h.abs() < 1e-9 * nu, "int h = {int_h}");
    }
}

#[test]
fn single_atom_fields() {
    let p = KernelParams::default();
    let ens = ParticleEnsemble::single(0.0);
    assert_eq!(field_g(&ens, 0.0, &p), 1.0);
    assert_relative_eq!(field_g(&ens, 1.0, &p), 0.1353352832366127, max_relative = 1e-15);
    assert_relative_eq!(field_h(&ens, 1.0, &p), 0.1353352832366127, max_relative = 1e-15);
    assert_relative_eq!(field_H(&ens, 0.0, &p), -0.25, max_relative = 1e-15);
}

#[test]
fn big_h_is_running_integral_of_h() {
    let p = KernelParams::with_nu(0.4).unwrap();
    let ens = sample();
    let lo = -1.3 - 40.0 * p.nu;
    for x in [-2.0, -0.7, 0.0, 0.05, 1.1, 3.0] {
        let b = breaks(
            lo,
            &ens.positions().iter().cloned().filter(|&q| q < x).collect::<Vec<_>>(),
            x,
        );
        let oracle = simpson_pieces(|y| field_h(&ens, y, &p), &b, 4000);
        assert!((field_H(&ens, x, &p) - oracle).abs() < 1e-11, "x={x}");
        assert!(field_H(&ens, x, &p) < 0.0);
    }
}

#[test]
fn big_h_derivative_is_h() {
    let p = KernelParams::default();
    let ens = sample();
    let d = 1e-4;
    for x in [-2.1, -0.5, 0.5, 1.7] {
        let fd = (field_H(&ens, x + d, &p) - field_H(&ens, x - d, &p)) / (2.0 * d);
        assert!((fd - field_h(&ens, x, &p)).abs() < 1e-7);
    }
}

#[test]
fn concentration_is_l2_norm_of_g() {
    for nu in [0.2, 0.5, 1.5] {
        let p = KernelParams::with_nu(nu).unwrap();
        let ens = sample();
        let b = breaks(-1.3 - 40.0 * nu, ens.positions(), 2.4 + 40.0 * nu);
        let oracle = simpson_pieces(|x| field_g(&ens, x, &p).powi(2), &b, 40000);
        assert_relative_eq!(concentration(&ens, &p), oracle, max_relative = 1e-10);
        assert_relative_eq!(concentration_fast(&ens, &p), oracle, max_relative = 1e-10);
    }
}

#[test]
fn concentration_of_pair() {
    let p = KernelParams::default();
    let ens = ParticleEnsemble::new(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
    assert_relative_eq!(concentration(&ens, &p), 0.2728945486109177, max_relative = 1e-15);
}
