use num_complex::Complex64;
use proptest::prelude::*;
use vortexlink::fieldgrid::{angular_spectrum_propagate, numerical_overlap, sample_plane};
use vortexlink::modes::{hopf_link_superposition, modal_inner_product};
use vortexlink::{BeamGeometry, GridSpec, LGIndex, ModeSuperposition};

fn beam() -> BeamGeometry {
    BeamGeometry::default()
}

fn arb_superposition() -> impl Strategy<Value = ModeSuperposition> {
    prop::collection::btree_map((-3i32..=3, 0u32..=3), (-1.0f64..1.0, -1.0f64..1.0), 1..5)
        .prop_filter_map("nonzero", |m| {
            let terms = m
                .into_iter()
                .map(|((ell, p), (re, im))| (LGIndex::new(ell, p), Complex64::new(re, im)))
                .collect();
            ModeSuperposition::normalized(terms, beam()).ok()
        })
}

#[test]
fn quadrature_matches_analytic_normalization() {
    let grid = GridSpec::default_for(&beam());
    let g = sample_plane(
        &ModeSuperposition::single(LGIndex::new(0, 0), beam()),
        0.0,
        &grid,
    );
    assert!((g.power() - 1.0).abs() < 1e-4);
    let self_overlap = numerical_overlap(&g, &g).unwrap();
    assert!((self_overlap - 1.0).norm() < 1e-4);
    let a = sample_plane(
        &ModeSuperposition::single(LGIndex::new(0, 1), beam()),
        0.0,
        &grid,
    );
    let b = sample_plane(
        &ModeSuperposition::single(LGIndex::new(0, 2), beam()),
        0.0,
        &grid,
    );
    assert!(numerical_overlap(&a, &b).unwrap().norm() < 1e-4);
}

#[test]
fn conjugated_superposition_samples_conjugate_field() {
    let grid = GridSpec::new(64, 64, 4e-3).unwrap();
    let link = hopf_link_superposition(0.4, beam());
    let a = sample_plane(&link, 0.0, &grid);
    let b = sample_plane(&link.conjugate(), 0.0, &grid);
    for (u, v) in a.values().iter().zip(b.values()) {
        assert_eq!(*u, v.conj());
    }
}

fn propagation_error(sup: &ModeSuperposition, grid: &GridSpec, dz: f64) -> f64 {
    let start = sample_plane(sup, 0.0, grid);
    let moved = angular_spectrum_propagate(&start, dz);
    moved
        .relative_l2_error(&sample_plane(sup, dz, grid))
        .unwrap()
}

#[test]
fn gaussian_propagation_matches_analytic() {
    let b = beam();
    let grid = GridSpec::default_for(&b);
    let g = ModeSuperposition::single(LGIndex::new(0, 0), b);
    for frac in [-1.0, -0.5, 0.5, 1.0] {
        let err = propagation_error(&g, &grid, frac * b.rayleigh_range());
        assert!(err < 1e-3, "dz = {frac} zR: {err}");
    }
}

#[test]
fn link_propagation_matches_analytic_on_wider_grid() {
    let b = beam();
    // The p = 2 content of the link leaves visible energy at 4 w0; a 6 w0 window removes
    // the periodic wrap-around of the FFT propagator.
    let grid = GridSpec::new(256, 256, 6.0 * b.waist()).unwrap();
    let link = hopf_link_superposition(0.0, b);
    for frac in [-1.0, -0.5, 0.25, 1.0] {
        let err = propagation_error(&link, &grid, frac * b.rayleigh_range());
        assert!(err < 1e-3, "dz = {frac} zR: {err}");
    }
}

#[test]
fn propagation_conserves_energy_and_reverses() {
    let b = beam();
    let grid = GridSpec::default_for(&b);
    let link = sample_plane(&hopf_link_superposition(0.0, b), 0.0, &grid);
    let dz = 0.7 * b.rayleigh_range();
    let forward = angular_spectrum_propagate(&link, dz);
    assert!((forward.power() - link.power()).abs() < 1e-9);
    let back = angular_spectrum_propagate(&forward, -dz);
    assert!(back.relative_l2_error(&link).unwrap() < 1e-9);
    assert_eq!(back.z(), link.z());
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 24,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn quadrature_agrees_with_modal_algebra(a in arb_superposition(), b in arb_superposition(), z in -0.5f64..0.5) {
        let grid = GridSpec::default_for(&beam());
        let z = z * beam().rayleigh_range();
        let numeric = numerical_overlap(&sample_plane(&a, z, &grid), &sample_plane(&b, z, &grid)).unwrap();
        let modal = modal_inner_product(&a, &b).unwrap();
        prop_assert!((numeric - modal).norm() < 1e-4, "{numeric} vs {modal}");
    }
}
