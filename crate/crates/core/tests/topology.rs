use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use num_complex::Complex64;
use vortexlink::fieldgrid::sample_plane;
use vortexlink::modes::hopf_link_superposition;
use vortexlink::topology::{
    perturbation_robustness, plane_vortex_points, trace_vortex_lines, Volume, VortexPoint,
};
use vortexlink::{BeamGeometry, GridSpec, LGIndex, ModeSuperposition};

fn beam() -> BeamGeometry {
    BeamGeometry::default()
}

/// Net winding of `sup` around a circle of radius `r` in the plane `z`.
fn winding(sup: &ModeSuperposition, r: f64, z: f64, n: usize) -> i32 {
    let phase = |k: usize| {
        let t = TAU * k as f64 / n as f64;
        sup.amplitude(r * t.cos(), r * t.sin(), z).arg()
    };
    let total: f64 = (0..n)
        .map(|k| {
            let d = phase(k + 1) - phase(k);
            d - TAU * (d / TAU).round()
        })
        .sum();
    (total / TAU).round() as i32
}

fn charge_within(points: &[VortexPoint], r: f64) -> i32 {
    points
        .iter()
        .filter(|p| p.position[0].hypot(p.position[1]) < r)
        .map(|p| p.charge)
        .sum()
}

#[test]
fn hopf_link_traces_to_two_linked_loops() {
    let b = beam();
    let report =
        trace_vortex_lines(&hopf_link_superposition(0.0, b), &Volume::default_for(&b)).unwrap();
    assert_eq!(report.n_closed, 2);
    assert_eq!(report.n_open, 0);
    assert_eq!(report.linking_magnitudes(), vec![1]);
    let m = &report.linking_matrix;
    assert_eq!(m[0][0], 0);
    assert_eq!(m[0][1], m[1][0]);
    for line in report.closed_loops() {
        assert!(!line.exits_volume);
        assert_eq!(line.points.first(), line.points.last());
    }
}

#[test]
fn double_charge_axis_matches_winding_oracle() {
    let b = beam();
    let sup = ModeSuperposition::single(LGIndex::new(-2, 0), b);
    let grid = GridSpec::default_for(&b);
    let points = plane_vortex_points(&sample_plane(&sup, 0.0, &grid));
    let oracle = winding(&sup, b.waist() / 4.0, 0.0, 16);
    assert_eq!(oracle, -2);
    assert_eq!(
        charge_within(&points, 2.0 * grid.dx() * 2f64.sqrt()),
        oracle
    );
}

#[test]
fn off_axis_zero_of_two_mode_sum() {
    let b = beam();
    let c = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let sup =
        ModeSuperposition::new(vec![(LGIndex::new(0, 0), c), (LGIndex::new(1, 0), c)], b).unwrap();
    let grid = GridSpec::default_for(&b);
    let points = plane_vortex_points(&sample_plane(&sup, 0.0, &grid));
    assert_eq!(points.len(), 1);
    let expected = [-b.waist() * FRAC_1_SQRT_2, 0.0];
    let p = points[0].position;
    assert!((p[0] - expected[0]).abs() <= grid.dx());
    assert!((p[1] - expected[1]).abs() <= grid.dy());
    assert_eq!(points[0].charge, 1);
    assert!((p[1].atan2(p[0]).abs() - PI).abs() < 0.05);
}

#[test]
fn plane_charge_matches_boundary_winding() {
    let b = beam();
    let link = hopf_link_superposition(0.0, b);
    let grid = GridSpec::default_for(&b);
    let zr = b.rayleigh_range();
    for frac in [-0.8, -0.4, 0.0, 0.3, 0.6, 1.0] {
        let z = frac * zr;
        let points = plane_vortex_points(&sample_plane(&link, z, &grid));
        for radius in [1.5, 2.5] {
            let r = radius * b.radius_at(z);
            assert_eq!(
                charge_within(&points, r),
                winding(&link, r, z, 720),
                "z = {frac} zR, r = {radius} w(z)"
            );
        }
    }
}

#[test]
fn large_perturbations_reconnect_lines() {
    let b = beam();
    let link = hopf_link_superposition(0.0, b);
    let volume = Volume::default_for(&b);
    assert_eq!(
        perturbation_robustness(&link, &volume, 0.0, 2, 3).unwrap(),
        1.0
    );
    let fraction = perturbation_robustness(&link, &volume, 0.5, 50, 2024).unwrap();
    assert!(fraction < 1.0);
}
