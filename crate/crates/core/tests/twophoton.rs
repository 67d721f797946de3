use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

use num_complex::Complex64;
use proptest::prelude::*;
use vortexlink::modes::{hopf_alpha, hopf_link_superposition, HOPF_BETA};
use vortexlink::twophoton::{
    chsh_scan, coincidence_curves, coincidence_probability, contrast_map, link_correlation,
    linspace, predicted_coincidence_curve, quantum_contrast, simulate_counts, ChshSettings,
    CountingSetup, Estimator, LinkAnalyzer, LinkQubitState, TwoPhotonState,
};
use vortexlink::{BeamGeometry, LGIndex, ModeSuperposition};

fn beam() -> BeamGeometry {
    BeamGeometry::default()
}

fn normalized_measured() -> (f64, f64) {
    let q = LinkQubitState::measured();
    (q.c0().re, q.c2().re)
}

#[test]
fn link_analyzers_on_the_measured_state() {
    let b = beam();
    let state = LinkQubitState::measured().embed(b);
    let s = hopf_link_superposition(0.0, b);
    let p = coincidence_probability(&state, &s, &s.conjugate());
    assert!((p - 0.521).abs() < 0.01, "{p}");
}

#[test]
fn bandwidth_state_is_schmidt_paired() {
    let state = TwoPhotonState::bandwidth_model(0.8, 20).unwrap();
    assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
    let c00 = state.amplitude(LGIndex::new(0, 0), LGIndex::new(0, 0));
    let c20 = state.amplitude(LGIndex::new(2, 0), LGIndex::new(-2, 0));
    assert!((c20 / c00 - Complex64::new(0.8, 0.0)).norm() < 1e-12);
    assert!(state.pairs().all(|(s, i, _)| i == s.mirrored()));
}

#[test]
fn embedded_state_reproduces_closed_form() {
    let b = beam();
    let (c0, c2) = normalized_measured();
    let state = LinkQubitState::measured().embed(b);
    for ts in linspace(0.0, PI, 9) {
        for ti in linspace(0.0, PI, 13) {
            let s = hopf_link_superposition(ts, b);
            let i = hopf_link_superposition(ti, b).conjugate();
            let p = coincidence_probability(&state, &s, &i);
            let curve = predicted_coincidence_curve(c0, c2, hopf_alpha(), HOPF_BETA, ts, ti);
            assert!((p - curve.value).abs() < 1e-10);
        }
    }
    let curves = coincidence_curves(&state, b, &[0.0, FRAC_PI_4], 5);
    assert_eq!(curves.len(), 10);
    assert_eq!(curves[4].1, PI);
}

#[test]
fn contrast_map_structure() {
    let b = beam();
    let state = LinkQubitState::measured().embed(b);
    let s = hopf_link_superposition(0.0, b);
    let i = s.conjugate();
    let zr = b.rayleigh_range();
    let dz = linspace(-zr, zr, 21);
    let dtheta = linspace(-PI, PI, 33);
    let map = contrast_map(&state, &s, &i, &dz, &dtheta).unwrap();
    let (a, c, _) = map.argmax();
    assert_eq!(dz[a], 0.0);
    assert_eq!(dtheta[c], 0.0);
    for row in &map.values {
        for k in 0..16 {
            assert!((row[k] - row[k + 16]).abs() < 1e-12);
        }
    }
    let (c0, c2) = normalized_measured();
    let quarter = contrast_map(&state, &s, &i, &[0.0], &[FRAC_PI_4])
        .unwrap()
        .values[0][0];
    let curve = predicted_coincidence_curve(c0, c2, hopf_alpha(), HOPF_BETA, FRAC_PI_4, 0.0);
    assert!((quarter - (curve.zero_oam + curve.twisted)).abs() < 1e-6);
}

/// Correlation on a Bloch sphere: analyzers at polar angle `t`, state with transverse
/// correlation `2 c0 c2`.
fn bloch_correlation(c0: f64, c2: f64, alpha: f64, beta: f64, ts: f64, ti: f64) -> f64 {
    let cos_t = (alpha * alpha - beta * beta) / (alpha * alpha + beta * beta);
    let sin2_t = 1.0 - cos_t * cos_t;
    cos_t * cos_t + sin2_t * 2.0 * c0 * c2 * (2.0 * (ts - ti)).cos()
}

#[test]
fn projective_correlation_matches_bloch_picture() {
    let (c0, c2) = normalized_measured();
    let q = LinkQubitState::measured();
    let analyzer = LinkAnalyzer::hopf();
    for ts in linspace(0.0, PI, 7) {
        for ti in linspace(0.0, PI, 7) {
            let e = link_correlation(&q, &analyzer, ts, ti);
            let oracle = bloch_correlation(c0, c2, analyzer.alpha, analyzer.beta, ts, ti);
            assert!((e - oracle).abs() < 1e-12);
        }
    }
}

fn grid_max_s(q: &LinkQubitState, analyzer: &LinkAnalyzer, n: usize) -> (f64, [usize; 4]) {
    let angles = linspace(0.0, PI, n + 1)[..n].to_vec();
    let e: Vec<Vec<f64>> = angles
        .iter()
        .map(|&ts| {
            angles
                .iter()
                .map(|&ti| link_correlation(q, analyzer, ts, ti))
                .collect()
        })
        .collect();
    let mut best = (f64::NEG_INFINITY, [0; 4]);
    for a in 0..n {
        for a2 in 0..n {
            for b1 in 0..n {
                for b2 in 0..n {
                    let s = e[a][b1] - e[a][b2] + e[a2][b1] + e[a2][b2];
                    if s > best.0 {
                        best = (s, [a, a2, b1, b2]);
                    }
                }
            }
        }
    }
    best
}

#[test]
fn measured_state_violates_chsh() {
    let q = LinkQubitState::measured();
    let analyzer = LinkAnalyzer::hopf();
    let (c0, c2) = normalized_measured();
    let (best, _) = grid_max_s(&q, &analyzer, 32);
    let cos_t = (analyzer.alpha.powi(2) - analyzer.beta.powi(2))
        / (analyzer.alpha.powi(2) + analyzer.beta.powi(2));
    let closed_form = 2.0 * cos_t * cos_t + 2.0 * SQRT_2 * (1.0 - cos_t * cos_t) * 2.0 * c0 * c2;
    assert!((best - closed_form).abs() < 1e-9, "{best} vs {closed_form}");
    let scan = chsh_scan(
        &q,
        &analyzer,
        Estimator::ProjectiveChsh,
        ChshSettings::standard(),
    )
    .unwrap();
    assert!((scan.s - best).abs() < 1e-9);
    assert!(scan.s > 2.0);
}

#[test]
fn visibility_estimator_on_measured_state() {
    let scan = chsh_scan(
        &LinkQubitState::measured(),
        &LinkAnalyzer::hopf(),
        Estimator::Visibility2Sqrt2,
        ChshSettings::standard(),
    )
    .unwrap();
    assert!(
        (scan.visibility - 0.762).abs() < 0.002,
        "{}",
        scan.visibility
    );
    assert!((scan.s - 2.0 * SQRT_2 * scan.visibility).abs() < 1e-12);
    assert!((scan.s - 2.155).abs() < 0.01);
}

#[test]
fn product_states_respect_the_classical_bound() {
    for analyzer in [
        LinkAnalyzer::hopf(),
        LinkAnalyzer::equatorial(),
        LinkAnalyzer {
            alpha: 0.3,
            beta: 0.9,
        },
        LinkAnalyzer {
            alpha: 1.0,
            beta: 0.0,
        },
    ] {
        for q in [
            LinkQubitState::real(1.0, 0.0).unwrap(),
            LinkQubitState::real(0.0, 1.0).unwrap(),
        ] {
            let (best, _) = grid_max_s(&q, &analyzer, 24);
            assert!(best <= 2.0 + 1e-9, "{best}");
        }
    }
}

fn unit(sup: &ModeSuperposition) -> ModeSuperposition {
    ModeSuperposition::normalized(sup.terms().to_vec(), *sup.beam()).unwrap()
}

#[test]
fn simulated_contrast_converges() {
    let b = beam();
    let state = LinkQubitState::measured().embed(b);
    let probabilities: Vec<f64> = linspace(0.0, FRAC_PI_2, 5)
        .into_iter()
        .map(|ti| {
            let s = unit(&hopf_link_superposition(0.0, b));
            let i = unit(&hopf_link_superposition(ti, b).conjugate());
            coincidence_probability(&state, &s, &i)
        })
        .collect();
    let setup = CountingSetup::typical(0.1, 2e5);
    let records = simulate_counts(&probabilities, &setup, 42).unwrap();
    for r in &records {
        let qc = r.quantum_contrast.unwrap();
        assert!((qc - r.expected_quantum_contrast).abs() < 3.0 * r.quantum_contrast_std_error);
    }

    let dark = CountingSetup::typical(0.0, 2e5);
    for r in simulate_counts(&probabilities, &dark, 7).unwrap() {
        assert!((r.expected_quantum_contrast - 1.0).abs() < 1e-12);
        assert!((r.quantum_contrast.unwrap() - 1.0).abs() < 3.0 * r.quantum_contrast_std_error);
    }
    assert_eq!(quantum_contrast(0.0, 200.0, 200.0, 10e-9).unwrap(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn tsirelson_bound_holds(
        c0 in (-1.0f64..1.0, -1.0f64..1.0),
        c2 in (-1.0f64..1.0, -1.0f64..1.0),
        alpha in 0.01f64..1.0,
        beta in 0.01f64..1.0,
        angles in (0.0f64..PI, 0.0f64..PI, 0.0f64..PI, 0.0f64..PI),
    ) {
        let q = LinkQubitState::new(Complex64::new(c0.0, c0.1), Complex64::new(c2.0, c2.1));
        prop_assume!(q.is_ok());
        let settings = ChshSettings {
            theta_s: angles.0,
            theta_s_prime: angles.1,
            theta_i: angles.2,
            theta_i_prime: angles.3,
        };
        if let Ok(scan) = chsh_scan(&q.unwrap(), &LinkAnalyzer { alpha, beta }, Estimator::ProjectiveChsh, settings) {
            prop_assert!(scan.s <= 2.0 * SQRT_2 + 1e-9);
            prop_assert!(scan.s >= -2.0 * SQRT_2 - 1e-9);
        }
    }

    #[test]
    fn fringe_amplitude_tracks_the_phase_difference(
        c0 in 0.05f64..1.0,
        c2 in 0.05f64..1.0,
        alpha in 0.05f64..1.0,
        beta in 0.05f64..1.0,
        ts in 0.0f64..PI,
        shift in 0.0f64..PI,
    ) {
        let a = predicted_coincidence_curve(c0, c2, alpha, beta, ts, ts - shift);
        let b = predicted_coincidence_curve(c0, c2, alpha, beta, ts + 0.4, ts + 0.4 - shift);
        prop_assert!((a.value - b.value).abs() < 1e-12);
        prop_assert!(a.fringe > 0.0);
    }
}
