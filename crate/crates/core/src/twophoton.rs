//! Down-converted photon pairs: coincidence predictions, quantum contrast,
//! CHSH scans and Monte Carlo counting.
//!
//! A two-photon state is a table of amplitudes `A[(s, i)]` over pairs of LG indices
//! for the signal and idler photons. The probability of a joint detection with the
//! signal projected on `|a>` and the idler on `|b>` is
//! `|Σ A[(s, i)] conj(a_s) conj(b_i)|²`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI, SQRT_2};
use std::io::Write;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export::sig9;
use crate::modes::{
    apply_displacement, hopf_alpha, hopf_link_superposition, p_hopf_state, BeamGeometry, LGIndex,
    ModeSuperposition, HOPF_BETA, NORM_TOLERANCE,
};

/// Largest deviation of `Σ|A|²` from one after construction.
pub const STATE_NORM_TOLERANCE: f64 = 1e-6;

/// Normalized pair-amplitude table.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhotonState {
    amplitudes: BTreeMap<(LGIndex, LGIndex), Complex64>,
}

impl TwoPhotonState {
    /// General state from `(signal, idler, amplitude)` triples, rescaled to unit norm.
    pub fn from_pairs(
        pairs: impl IntoIterator<Item = (LGIndex, LGIndex, Complex64)>,
    ) -> Result<Self> {
        let mut amplitudes = BTreeMap::new();
        for (s, i, c) in pairs {
            if amplitudes.insert((s, i), c).is_some() {
                return Err(Error::InvalidState(format!("duplicate pair {s}{i}")));
            }
        }
        let norm: f64 = amplitudes
            .values()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidState("state has zero norm".into()));
        }
        for c in amplitudes.values_mut() {
            *c /= norm;
        }
        Ok(Self { amplitudes })
    }

    /// Schmidt form `Σ c_{l,p} |l,p>|-l,p>`, keyed by the signal index.
    pub fn schmidt(entries: impl IntoIterator<Item = (LGIndex, Complex64)>) -> Result<Self> {
        Self::from_pairs(entries.into_iter().map(|(k, c)| (k, k.mirrored(), c)))
    }

    /// `c_{l,p} ∝ gamma^{(|l| + 2p)/2}` for every mode with `|l| + 2p <= max_order`.
    pub fn bandwidth_model(gamma: f64, max_order: u32) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidState(format!(
                "bandwidth parameter {gamma} must be positive"
            )));
        }
        let max = max_order as i32;
        let entries = (-max..=max).flat_map(|ell| {
            let remaining = (max_order - ell.unsigned_abs()) / 2;
            (0..=remaining).map(move |p| {
                let index = LGIndex::new(ell, p);
                let weight = gamma.powf(index.mode_order() as f64 / 2.0);
                (index, Complex64::new(weight, 0.0))
            })
        });
        Self::schmidt(entries)
    }

    pub fn amplitude(&self, signal: LGIndex, idler: LGIndex) -> Complex64 {
        self.amplitudes
            .get(&(signal, idler))
            .copied()
            .unwrap_or_default()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (LGIndex, LGIndex, Complex64)> + '_ {
        self.amplitudes.iter().map(|(&(s, i), &c)| (s, i, c))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|c| c.norm_sqr()).sum()
    }
}

/// Two-dimensional link subspace `c0 |0,p_Hopf>|0,p_Hopf> + c2 |2,0>|-2,0>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkQubitState {
    c0: Complex64,
    c2: Complex64,
    raw_c0: Complex64,
    raw_c2: Complex64,
}

impl LinkQubitState {
    /// Normalizes `(c0, c2)`; the values as given are retained.
    pub fn new(c0: Complex64, c2: Complex64) -> Result<Self> {
        let norm = (c0.norm_sqr() + c2.norm_sqr()).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidState("link qubit has zero norm".into()));
        }
        Ok(Self {
            c0: c0 / norm,
            c2: c2 / norm,
            raw_c0: c0,
            raw_c2: c2,
        })
    }

    pub fn real(c0: f64, c2: f64) -> Result<Self> {
        Self::new(Complex64::new(c0, 0.0), Complex64::new(c2, 0.0))
    }

    /// Measured modal weights 0.76 and 0.64.
    pub fn measured() -> Self {
        Self::real(0.76, 0.64).expect("nonzero")
    }

    pub fn c0(&self) -> Complex64 {
        self.c0
    }

    pub fn c2(&self) -> Complex64 {
        self.c2
    }

    /// Coefficients as supplied, before normalization.
    pub fn raw(&self) -> (Complex64, Complex64) {
        (self.raw_c0, self.raw_c2)
    }

    /// Expands `|0,p_Hopf>|0,p_Hopf>` in the LG pair basis.
    pub fn embed(&self, beam: BeamGeometry) -> TwoPhotonState {
        let hopf = p_hopf_state(beam);
        let mut pairs = Vec::new();
        for &(s, hs) in hopf.terms() {
            for &(i, hi) in hopf.terms() {
                pairs.push((s, i, self.c0 * hs * hi));
            }
        }
        pairs.push((LGIndex::new(2, 0), LGIndex::new(-2, 0), self.c2));
        TwoPhotonState::from_pairs(pairs).expect("normalized qubit embeds with unit norm")
    }

    /// Projects a full state onto the link subspace and renormalizes.
    pub fn from_two_photon(state: &TwoPhotonState, beam: BeamGeometry) -> Result<Self> {
        let hopf = p_hopf_state(beam);
        let mut c0 = Complex64::new(0.0, 0.0);
        for &(s, hs) in hopf.terms() {
            for &(i, hi) in hopf.terms() {
                c0 += hs.conj() * hi.conj() * state.amplitude(s, i);
            }
        }
        let c2 = state.amplitude(LGIndex::new(2, 0), LGIndex::new(-2, 0));
        Self::new(c0, c2)
    }
}

/// Which photon an analyzer acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Signal,
    Idler,
}

/// Mode projected onto by one detector arm.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzerSetting {
    arm: Arm,
    state: ModeSuperposition,
}

impl AnalyzerSetting {
    pub fn new(arm: Arm, state: ModeSuperposition) -> Result<Self> {
        let norm = state.norm_sqr().sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized {
                norm,
                tolerance: NORM_TOLERANCE,
            });
        }
        Ok(Self { arm, state })
    }

    /// Link at `theta` for the signal, its conjugate for the idler, displaced by
    /// `(dz, dtheta)`.
    pub fn link(arm: Arm, theta: f64, dz: f64, dtheta: f64, beam: BeamGeometry) -> Self {
        let link = hopf_link_superposition(theta, beam);
        let link = match arm {
            Arm::Signal => link,
            Arm::Idler => link.conjugate(),
        };
        Self::new(arm, apply_displacement(&link, dz, dtheta)).expect("link is normalized")
    }

    pub fn arm(&self) -> Arm {
        self.arm
    }

    pub fn state(&self) -> &ModeSuperposition {
        &self.state
    }
}

/// Coincidence probability for a signal and an idler analyzer.
pub fn analyzer_coincidence(
    state: &TwoPhotonState,
    signal: &AnalyzerSetting,
    idler: &AnalyzerSetting,
) -> Result<f64> {
    if signal.arm != Arm::Signal || idler.arm != Arm::Idler {
        return Err(Error::InvalidState(
            "analyzers must be (signal, idler)".into(),
        ));
    }
    Ok(coincidence_probability(state, &signal.state, &idler.state))
}

/// `|<meas_s|<meas_i|state>|²`.
pub fn coincidence_probability(
    state: &TwoPhotonState,
    meas_s: &ModeSuperposition,
    meas_i: &ModeSuperposition,
) -> f64 {
    let amp: Complex64 = state
        .pairs()
        .map(|(s, i, c)| c * meas_s.coefficient(s).conj() * meas_i.coefficient(i).conj())
        .sum();
    amp.norm_sqr()
}

/// Closed-form coincidence curve for link analyzers at `theta_s`, `theta_i`:
/// `c0² α⁴ + c2² β⁴ + 2 c0 c2 α² β² cos(2(θs - θi))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceCurve {
    pub zero_oam: f64,
    pub twisted: f64,
    pub fringe: f64,
    pub value: f64,
}

impl CoincidenceCurve {
    /// Fringe visibility `(max - min) / (max + min)`.
    pub fn visibility(&self) -> f64 {
        self.fringe / (self.zero_oam + self.twisted)
    }
}

pub fn predicted_coincidence_curve(
    c0: f64,
    c2: f64,
    alpha: f64,
    beta: f64,
    theta_s: f64,
    theta_i: f64,
) -> CoincidenceCurve {
    let (a2, b2) = (alpha * alpha, beta * beta);
    let zero_oam = c0 * c0 * a2 * a2;
    let twisted = c2 * c2 * b2 * b2;
    let fringe = 2.0 * c0 * c2 * a2 * b2;
    CoincidenceCurve {
        zero_oam,
        twisted,
        fringe,
        value: zero_oam + twisted + fringe * (2.0 * (theta_s - theta_i)).cos(),
    }
}

/// `QC = C / (S_s S_i Δt)`.
pub fn quantum_contrast(
    coincidence_rate: f64,
    singles_s: f64,
    singles_i: f64,
    gate: f64,
) -> Result<f64> {
    if !(singles_s > 0.0 && singles_i > 0.0) {
        return Err(Error::InvalidRate(format!(
            "singles rates must be positive (got {singles_s}, {singles_i})"
        )));
    }
    if gate.is_nan() || gate <= 0.0 {
        return Err(Error::InvalidRate(format!("gate {gate} must be positive")));
    }
    if coincidence_rate.is_nan() || coincidence_rate < 0.0 {
        return Err(Error::InvalidRate(format!(
            "coincidence rate {coincidence_rate} is negative"
        )));
    }
    Ok(coincidence_rate / (singles_s * singles_i * gate))
}

/// Coincidence probability for every `(signal, idler)` pair drawn from `modes`.
/// Rows index the signal mode, columns the idler mode.
pub fn correlation_matrix(
    state: &TwoPhotonState,
    modes: &[LGIndex],
    beam: BeamGeometry,
) -> Result<Vec<Vec<f64>>> {
    for (k, m) in modes.iter().enumerate() {
        if modes[..k].contains(m) {
            return Err(Error::InvalidState(format!("mode {m} listed twice")));
        }
    }
    let single: Vec<_> = modes
        .iter()
        .map(|&m| ModeSuperposition::single(m, beam))
        .collect();
    Ok(single
        .iter()
        .map(|s| {
            single
                .iter()
                .map(|i| coincidence_probability(state, s, i))
                .collect()
        })
        .collect())
}

/// Coincidence landscape over axial and rotational displacements of the idler analyzer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastMap {
    pub dz: Vec<f64>,
    pub dtheta: Vec<f64>,
    /// `values[a][b]` belongs to `(dz[a], dtheta[b])`.
    pub values: Vec<Vec<f64>>,
}

impl ContrastMap {
    /// Converts probabilities to quantum contrast for a pair rate, singles rates and gate.
    pub fn to_quantum_contrast(
        &self,
        pair_rate: f64,
        singles_s: f64,
        singles_i: f64,
        gate: f64,
    ) -> Result<Self> {
        let accidental = singles_s * singles_i * gate;
        let values = self
            .values
            .iter()
            .map(|row| {
                row.iter()
                    .map(|p| {
                        quantum_contrast(pair_rate * p + accidental, singles_s, singles_i, gate)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            values,
            ..self.clone()
        })
    }

    /// Position and value of the largest entry. Entries equal to within 1e-12 of the
    /// maximum resolve to the one nearest `(0, 0)` in grid-relative units.
    pub fn argmax(&self) -> (usize, usize, f64) {
        let span = |v: &[f64]| {
            let s = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if s > 0.0 {
                s
            } else {
                1.0
            }
        };
        let (sz, st) = (span(&self.dz), span(&self.dtheta));
        let distance = |a: usize, b: usize| (self.dz[a] / sz).hypot(self.dtheta[b] / st);
        let mut best = (0, 0, f64::NEG_INFINITY);
        for (a, row) in self.values.iter().enumerate() {
            for (b, &v) in row.iter().enumerate() {
                let tie = (v - best.2).abs() <= 1e-12 && distance(a, b) < distance(best.0, best.1);
                if v > best.2 + 1e-12 || tie {
                    best = (a, b, v);
                }
            }
        }
        best
    }

    /// CSV with header `dz_m,dtheta_rad,contrast`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "dz_m,dtheta_rad,contrast")?;
        for (a, row) in self.values.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                writeln!(
                    out,
                    "{},{},{}",
                    sig9(self.dz[a]),
                    sig9(self.dtheta[b]),
                    sig9(*v)
                )?;
            }
        }
        out.flush()
    }
}

/// `n` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|k| start + (stop - start) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Coincidence probability with the idler analyzer displaced by every `(dz, dtheta)`.
pub fn contrast_map(
    state: &TwoPhotonState,
    meas_s: &ModeSuperposition,
    meas_i: &ModeSuperposition,
    dz: &[f64],
    dtheta: &[f64],
) -> Result<ContrastMap> {
    if dz.iter().chain(dtheta).any(|v| !v.is_finite()) {
        return Err(Error::InvalidRate(
            "displacement ranges must be finite".into(),
        ));
    }
    let values = dz
        .iter()
        .map(|&z| {
            dtheta
                .iter()
                .map(|&t| coincidence_probability(state, meas_s, &apply_displacement(meas_i, z, t)))
                .collect()
        })
        .collect();
    Ok(ContrastMap {
        dz: dz.to_vec(),
        dtheta: dtheta.to_vec(),
        values,
    })
}

/// How the Bell parameter is obtained from the link scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Correlations from projective measurements on the link qubit and their
    /// algebraic complements.
    ProjectiveChsh,
    /// `S = 2√2 V` from the fitted fringe visibility of the idler scan.
    #[serde(rename = "visibility_2sqrt2")]
    Visibility2Sqrt2,
}

impl Estimator {
    pub fn name(&self) -> &'static str {
        match self {
            Self::ProjectiveChsh => "projective_chsh",
            Self::Visibility2Sqrt2 => "visibility_2sqrt2",
        }
    }
}

/// Hologram orientations `(θs, θs′)` for the signal and `(θi, θi′)` for the idler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshSettings {
    pub theta_s: f64,
    pub theta_s_prime: f64,
    pub theta_i: f64,
    pub theta_i_prime: f64,
}

impl ChshSettings {
    /// `(0, π/4; π/8, 3π/8)`, optimal for a maximally entangled link qubit.
    pub fn standard() -> Self {
        Self {
            theta_s: 0.0,
            theta_s_prime: FRAC_PI_4,
            theta_i: FRAC_PI_8,
            theta_i_prime: 3.0 * FRAC_PI_8,
        }
    }

    fn validate(&self) -> Result<()> {
        let same = |a: f64, b: f64| {
            let d = (a - b).rem_euclid(PI);
            d.min(PI - d) < 1e-12
        };
        if [
            self.theta_s,
            self.theta_s_prime,
            self.theta_i,
            self.theta_i_prime,
        ]
        .iter()
        .any(|v| !v.is_finite())
        {
            return Err(Error::DegenerateSettings("non-finite angle".into()));
        }
        if same(self.theta_s, self.theta_s_prime) {
            return Err(Error::DegenerateSettings(
                "signal settings coincide modulo π".into(),
            ));
        }
        if same(self.theta_i, self.theta_i_prime) {
            return Err(Error::DegenerateSettings(
                "idler settings coincide modulo π".into(),
            ));
        }
        Ok(())
    }
}

/// Relative weights `(α, β)` of `|0,p_Hopf>` and `|2,0>` in the analyzer links.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkAnalyzer {
    pub alpha: f64,
    pub beta: f64,
}

impl LinkAnalyzer {
    /// Weights of the Hopf link, `α ≈ 0.8035`, `β = 0.596`.
    pub fn hopf() -> Self {
        Self {
            alpha: hopf_alpha(),
            beta: HOPF_BETA,
        }
    }

    /// Equal weights: analyzers on the equator of the link Bloch sphere.
    pub fn equatorial() -> Self {
        Self {
            alpha: 1.0 / SQRT_2,
            beta: 1.0 / SQRT_2,
        }
    }

    fn norm(&self) -> f64 {
        (self.alpha * self.alpha + self.beta * self.beta).sqrt()
    }

    /// Unit signal vector `(α, -β e^{2iθ})` and its complement `(β, α e^{2iθ})`.
    fn signal(&self, theta: f64) -> [[Complex64; 2]; 2] {
        let n = self.norm();
        let ph = Complex64::from_polar(1.0, 2.0 * theta);
        [
            [Complex64::new(self.alpha / n, 0.0), -ph * (self.beta / n)],
            [Complex64::new(self.beta / n, 0.0), ph * (self.alpha / n)],
        ]
    }

    /// The idler measures the conjugate link: `(α, -β e^{-2iθ})` and complement.
    fn idler(&self, theta: f64) -> [[Complex64; 2]; 2] {
        let [[a0, a1], [b0, b1]] = self.signal(theta);
        [[a0, a1.conj()], [b0, b1.conj()]]
    }
}

/// Outcome of a CHSH evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellScan {
    pub estimator: Estimator,
    pub settings: ChshSettings,
    /// `E(θs,θi)`, `E(θs,θi′)`, `E(θs′,θi)`, `E(θs′,θi′)`.
    pub e_values: [f64; 4],
    /// `E(a,b) - E(a,b′) + E(a′,b) + E(a′,b′)`.
    pub s: f64,
    pub visibility: f64,
    pub reference: BellReference,
}

/// Reference values kept alongside every scan for comparison. Only the predicted
/// visibility is matched by the model; the other three are not reproduced by either
/// estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellReference {
    pub predicted_visibility: f64,
    pub predicted_s: f64,
    pub measured_visibility: f64,
    pub measured_s: f64,
}

impl Default for BellReference {
    fn default() -> Self {
        Self {
            predicted_visibility: 0.76,
            predicted_s: 2.55,
            measured_visibility: 0.85,
            measured_s: 2.44,
        }
    }
}

impl BellScan {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn qubit_amplitude(state: &LinkQubitState, s: &[Complex64; 2], i: &[Complex64; 2]) -> Complex64 {
    s[0].conj() * i[0].conj() * state.c0 + s[1].conj() * i[1].conj() * state.c2
}

/// Correlation `E` of the link-qubit measurement at `(theta_s, theta_i)`.
pub fn link_correlation(
    state: &LinkQubitState,
    analyzer: &LinkAnalyzer,
    theta_s: f64,
    theta_i: f64,
) -> f64 {
    let s = analyzer.signal(theta_s);
    let i = analyzer.idler(theta_i);
    let p = |a: usize, b: usize| qubit_amplitude(state, &s[a], &i[b]).norm_sqr();
    let (pp, pm, mp, mm) = (p(0, 0), p(0, 1), p(1, 0), p(1, 1));
    (pp - pm - mp + mm) / (pp + pm + mp + mm)
}

/// Probability of detecting both photons in the (unnormalized) analyzer links at
/// `theta_s` and `theta_i`.
pub fn link_coincidence(
    state: &LinkQubitState,
    analyzer: &LinkAnalyzer,
    theta_s: f64,
    theta_i: f64,
) -> f64 {
    let (a, b) = (analyzer.alpha, analyzer.beta);
    let s = [
        Complex64::new(a, 0.0),
        -Complex64::from_polar(b, 2.0 * theta_s),
    ];
    let i = [
        Complex64::new(a, 0.0),
        -Complex64::from_polar(b, -2.0 * theta_i),
    ];
    qubit_amplitude(state, &s, &i).norm_sqr()
}

/// Visibility `|B| / A` of a least-squares fit `A + B cos(2θ + φ)` to `n` uniform
/// samples of the idler scan over `[0, π)`.
pub fn fitted_visibility(samples: &[(f64, f64)]) -> f64 {
    let n = samples.len() as f64;
    let (mut a, mut c, mut s) = (0.0, 0.0, 0.0);
    for &(theta, v) in samples {
        a += v;
        c += v * (2.0 * theta).cos();
        s += v * (2.0 * theta).sin();
    }
    let (a, c, s) = (a / n, 2.0 * c / n, 2.0 * s / n);
    if a <= 0.0 {
        return 0.0;
    }
    ((c * c + s * s).sqrt() / a).min(1.0)
}

const VISIBILITY_SAMPLES: usize = 72;

/// Evaluates the Bell parameter of `state` under `estimator`.
pub fn chsh_scan(
    state: &LinkQubitState,
    analyzer: &LinkAnalyzer,
    estimator: Estimator,
    settings: ChshSettings,
) -> Result<BellScan> {
    settings.validate()?;
    let scan: Vec<(f64, f64)> = (0..VISIBILITY_SAMPLES)
        .map(|k| {
            let theta_i = PI * k as f64 / VISIBILITY_SAMPLES as f64;
            (
                theta_i,
                link_coincidence(state, analyzer, settings.theta_s, theta_i),
            )
        })
        .collect();
    let visibility = fitted_visibility(&scan);

    let pairs = [
        (settings.theta_s, settings.theta_i),
        (settings.theta_s, settings.theta_i_prime),
        (settings.theta_s_prime, settings.theta_i),
        (settings.theta_s_prime, settings.theta_i_prime),
    ];
    let (e_values, s) = match estimator {
        Estimator::ProjectiveChsh => {
            let e = pairs.map(|(ts, ti)| link_correlation(state, analyzer, ts, ti));
            (e, e[0] - e[1] + e[2] + e[3])
        }
        Estimator::Visibility2Sqrt2 => {
            let e = pairs.map(|(ts, ti)| visibility * (2.0 * (ts - ti)).cos());
            (e, 2.0 * SQRT_2 * visibility)
        }
    };
    Ok(BellScan {
        estimator,
        settings,
        e_values,
        s,
        visibility,
        reference: BellReference::default(),
    })
}

/// Coincidence curves `(θs, θi, P)` for each signal orientation as the idler
/// orientation sweeps `[0, π]` in `n_idler` steps, using full LG analyzers.
pub fn coincidence_curves(
    state: &TwoPhotonState,
    beam: BeamGeometry,
    signal_angles: &[f64],
    n_idler: usize,
) -> Vec<(f64, f64, f64)> {
    let idler_angles = linspace(0.0, PI, n_idler);
    let mut out = Vec::with_capacity(signal_angles.len() * idler_angles.len());
    for &ts in signal_angles {
        let meas_s = hopf_link_superposition(ts, beam);
        for &ti in &idler_angles {
            let meas_i = hopf_link_superposition(ti, beam).conjugate();
            out.push((ts, ti, coincidence_probability(state, &meas_s, &meas_i)));
        }
    }
    out
}

/// Rescales `values` so they sum to one (left unchanged when the sum is zero).
pub fn normalize_unit_sum(values: &[f64]) -> Vec<f64> {
    let total: f64 = values.iter().sum();
    if total > 0.0 {
        values.iter().map(|v| v / total).collect()
    } else {
        values.to_vec()
    }
}

/// Rates and gate for simulated counting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountingSetup {
    /// Pair rate converted to coincidences through the setting probability.
    pub pair_rate: f64,
    pub singles_s: f64,
    pub singles_i: f64,
    pub gate: f64,
    pub integration: f64,
}

impl CountingSetup {
    /// Singles of 200 s⁻¹ per arm and a 10 ns gate.
    pub fn typical(pair_rate: f64, integration: f64) -> Self {
        Self {
            pair_rate,
            singles_s: 200.0,
            singles_i: 200.0,
            gate: 10e-9,
            integration,
        }
    }

    pub fn accidental_rate(&self) -> f64 {
        self.singles_s * self.singles_i * self.gate
    }

    fn validate(&self) -> Result<()> {
        let all = [self.pair_rate, self.singles_s, self.singles_i];
        if all.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::InvalidRate(
                "rates must be finite and non-negative".into(),
            ));
        }
        if !(self.gate > 0.0 && self.integration > 0.0) {
            return Err(Error::InvalidRate(
                "gate and integration time must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceRecord {
    pub probability: f64,
    pub coincidences: u64,
    pub singles_s_counts: u64,
    pub singles_i_counts: u64,
    /// Measured coincidence rate `C` in s⁻¹.
    pub coincidence_rate: f64,
    pub singles_s: f64,
    pub singles_i: f64,
    pub gate: f64,
    pub integration: f64,
    /// `C / (S_s S_i Δt)` from the simulated rates; absent when a singles count is zero.
    pub quantum_contrast: Option<f64>,
    /// Analytic QC from the expected rates.
    pub expected_quantum_contrast: f64,
    /// Poisson standard error of the QC estimate, from the expected counts.
    pub quantum_contrast_std_error: f64,
}

fn poisson_draw<R: rand::Rng>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean)
        .expect("positive finite mean")
        .sample(rng) as u64
}

/// Simulates coincidences (signal pairs plus accidentals) and singles for every
/// setting probability. Identical seeds give identical records.
pub fn simulate_counts(
    probabilities: &[f64],
    setup: &CountingSetup,
    seed: u64,
) -> Result<Vec<CoincidenceRecord>> {
    setup.validate()?;
    if probabilities.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::InvalidRate(
            "setting probabilities must lie in [0, 1]".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = setup.integration;
    probabilities
        .iter()
        .map(|&p| {
            let expected_rate = setup.pair_rate * p + setup.accidental_rate();
            let coincidences = poisson_draw(expected_rate * t, &mut rng);
            let ns = poisson_draw(setup.singles_s * t, &mut rng);
            let ni = poisson_draw(setup.singles_i * t, &mut rng);
            let rate = coincidences as f64 / t;
            let (rs, ri) = (ns as f64 / t, ni as f64 / t);
            let measured = quantum_contrast(rate, rs, ri, setup.gate).ok();
            let expected =
                quantum_contrast(expected_rate, setup.singles_s, setup.singles_i, setup.gate)
                    .unwrap_or(f64::NAN);
            let rel = (1.0 / (expected_rate * t)
                + 1.0 / (setup.singles_s * t)
                + 1.0 / (setup.singles_i * t))
                .sqrt();
            Ok(CoincidenceRecord {
                probability: p,
                coincidences,
                singles_s_counts: ns,
                singles_i_counts: ni,
                coincidence_rate: rate,
                singles_s: rs,
                singles_i: ri,
                gate: setup.gate,
                integration: t,
                quantum_contrast: measured,
                expected_quantum_contrast: expected,
                quantum_contrast_std_error: expected * rel,
            })
        })
        .collect()
}
