mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use vbma::theta::{curvature_density, weitzenbock_residual, SectionSamples, ThetaSection};
use vbma::{curvature_increment, integrate, make_grid, poisson_solve, Density11, GeometryError};

use common::{rng, smooth_field};

fn tau_strategy() -> impl Strategy<Value = Complex64> {
    (-0.5..0.5f64, 0.6..1.8f64).prop_map(|(re, im)| Complex64::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn poisson_round_trip(tau in tau_strategy(), seed in any::<u64>()) {
        let grid = make_grid(tau, 32).unwrap();
        let psi = smooth_field(&grid, &mut rng(seed), 1.0);
        let psi = psi.map(|x| x - psi.mean());
        let rho = curvature_increment(&psi);
        let back = poisson_solve(&rho).unwrap();
        let scale = psi.sup_norm().max(1.0);
        prop_assert!(back.zip_map(&psi, |a, b| a - b).sup_norm() < 1e-10 * scale);
        prop_assert!(back.mean().abs() < 1e-14);
    }

    #[test]
    fn curvature_increments_have_zero_integral(tau in tau_strategy(), seed in any::<u64>()) {
        let grid = make_grid(tau, 32).unwrap();
        let psi = smooth_field(&grid, &mut rng(seed), 2.0);
        prop_assert!(integrate(&curvature_increment(&psi)).abs() < 1e-12);
        prop_assert!((integrate(&curvature_density(&psi)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn poisson_rejects_nonzero_mean(tau in tau_strategy(), c in 0.01..5.0f64) {
        let grid = make_grid(tau, 16).unwrap();
        let rho = Density11::constant(&grid, c);
        let rejected = matches!(poisson_solve(&rho), Err(GeometryError::NonZeroMean { .. }));
        prop_assert!(rejected);
    }
}

#[test]
fn weitzenbock_identity_at_n64() {
    let tau = Complex64::i();
    let grid = make_grid(tau, 64).unwrap();
    let section = ThetaSection::new(tau, 12).unwrap();
    let samples = SectionSamples::new(&grid, &section).unwrap();
    let mut r = rng(10);
    for _ in 0..10 {
        let psi = smooth_field(&grid, &mut r, 0.3);
        let res = weitzenbock_residual(&samples, &psi).sup_norm();
        assert!(res < 1e-8, "Weitzenbock residual {res}");
    }
}

#[test]
fn weitzenbock_identity_on_skewed_lattice() {
    let tau = Complex64::new(0.3, 1.2);
    let grid = make_grid(tau, 64).unwrap();
    let section = ThetaSection::new(tau, 12).unwrap();
    let samples = SectionSamples::new(&grid, &section).unwrap();
    let psi = smooth_field(&grid, &mut rng(3), 0.3);
    assert!(weitzenbock_residual(&samples, &psi).sup_norm() < 1e-8);
}

#[test]
fn section_norm_peaks_at_configured_value() {
    let tau = Complex64::i();
    let grid = make_grid(tau, 64).unwrap();
    let samples = SectionSamples::new(&grid, &ThetaSection::new(tau, 12).unwrap()).unwrap();
    let max = samples.base_norm_sq().max();
    assert!(max <= 0.49 + 1e-12 && max > 0.45, "{max}");
}
