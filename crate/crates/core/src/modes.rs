//! Laguerre-Gaussian modes and their superpositions.
//!
//! Amplitudes use the paraxial form normalized to unit power,
//!
//! ```text
//! LG_{p,l}(r, φ, z) = C_{p,l} / w(z) · (√2 r / w)^{|l|} · L_p^{|l|}(2r²/w²) · exp(-r²/w²)
//!                     · exp(i l φ) · exp(-i k r² z / (2 (z² + z_R²))) · exp(+i (|l| + 2p + 1) atan(z / z_R))
//! ```
//!
//! with `C_{p,l} = sqrt(2 p! / (π (p + |l|)!))`. The plane-wave factor `exp(ikz)` is
//! common to every mode and is dropped. The curvature term is written without `1/R(z)`
//! so it stays finite at the waist.

use std::collections::HashSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest accepted deviation of `Σ|c|²` from one.
///
/// The link coefficients are given to three decimals and their squares sum to 1.0008,
/// so the tolerance is loose enough to accept them verbatim.
pub const NORM_TOLERANCE: f64 = 1e-3;

/// Azimuthal index `ell` and radial index `p` of a Laguerre-Gaussian mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LGIndex {
    pub ell: i32,
    pub p: u32,
}

impl LGIndex {
    pub const fn new(ell: i32, p: u32) -> Self {
        Self { ell, p }
    }

    /// `|ell| + 2p`, the order that sets the Gouy phase.
    pub fn mode_order(&self) -> u32 {
        self.ell.unsigned_abs() + 2 * self.p
    }

    /// Same radial index, opposite azimuthal index.
    pub fn mirrored(&self) -> Self {
        Self::new(-self.ell, self.p)
    }
}

impl std::fmt::Display for LGIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "|{},{}>", self.ell, self.p)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct BeamDoc {
    wavelength_m: f64,
    waist_m: f64,
}

/// Wavelength and waist of the mode family. The Rayleigh range is always derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BeamDoc", into = "BeamDoc")]
pub struct BeamGeometry {
    wavelength: f64,
    waist: f64,
}

impl BeamGeometry {
    pub fn new(wavelength: f64, waist: f64) -> Result<Self> {
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::InvalidBeam(format!(
                "wavelength {wavelength} must be positive"
            )));
        }
        if !(waist.is_finite() && waist > 0.0) {
            return Err(Error::InvalidBeam(format!(
                "waist {waist} must be positive"
            )));
        }
        Ok(Self { wavelength, waist })
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn waist(&self) -> f64 {
        self.waist
    }

    /// `π w0² / λ`.
    pub fn rayleigh_range(&self) -> f64 {
        PI * self.waist * self.waist / self.wavelength
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Beam radius `w(z)`.
    pub fn radius_at(&self, z: f64) -> f64 {
        let zr = self.rayleigh_range();
        self.waist * (1.0 + (z / zr).powi(2)).sqrt()
    }
}

/// 710 nm down-converted light with a 1 mm waist.
impl Default for BeamGeometry {
    fn default() -> Self {
        Self {
            wavelength: 710e-9,
            waist: 1e-3,
        }
    }
}

impl TryFrom<BeamDoc> for BeamGeometry {
    type Error = Error;

    fn try_from(doc: BeamDoc) -> Result<Self> {
        Self::new(doc.wavelength_m, doc.waist_m)
    }
}

impl From<BeamGeometry> for BeamDoc {
    fn from(beam: BeamGeometry) -> Self {
        Self {
            wavelength_m: beam.wavelength,
            waist_m: beam.waist,
        }
    }
}

/// Generalized Laguerre polynomial `L_n^alpha(x)` by the three-term recurrence.
pub fn generalized_laguerre(n: u32, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

fn normalization(index: LGIndex) -> f64 {
    let l = index.ell.unsigned_abs();
    // p! / (p + |l|)!
    let ratio: f64 = (index.p + 1..=index.p + l)
        .map(|j| 1.0 / j as f64)
        .product();
    (2.0 * ratio / PI).sqrt()
}

/// Gouy phase `(|ell| + 2p + 1) atan(z / z_R)`.
pub fn gouy_phase(index: LGIndex, beam: &BeamGeometry, z: f64) -> f64 {
    (index.mode_order() + 1) as f64 * (z / beam.rayleigh_range()).atan()
}

/// Normalized LG amplitude at `(x, y, z)`.
pub fn lg_amplitude(index: LGIndex, beam: &BeamGeometry, x: f64, y: f64, z: f64) -> Complex64 {
    PlaneEvaluator::new(&[(index, Complex64::new(1.0, 0.0))], beam, z).eval(x, y)
}

struct PlaneTerm {
    abs_ell: u32,
    sign_ell: f64,
    p: u32,
    prefactor: Complex64,
}

/// Superposition amplitude restricted to one transverse plane, with all
/// z-dependent factors hoisted out of the per-point loop.
pub(crate) struct PlaneEvaluator {
    terms: Vec<PlaneTerm>,
    inv_w2: f64,
    sqrt2_over_w: f64,
    curvature: f64,
}

impl PlaneEvaluator {
    pub(crate) fn new(terms: &[(LGIndex, Complex64)], beam: &BeamGeometry, z: f64) -> Self {
        let w = beam.radius_at(z);
        let zr = beam.rayleigh_range();
        let curvature = beam.wavenumber() * z / (2.0 * (z * z + zr * zr));
        let terms = terms
            .iter()
            .map(|&(index, c)| {
                let gouy = Complex64::from_polar(1.0, gouy_phase(index, beam, z));
                PlaneTerm {
                    abs_ell: index.ell.unsigned_abs(),
                    sign_ell: if index.ell < 0 { -1.0 } else { 1.0 },
                    p: index.p,
                    prefactor: c * gouy * (normalization(index) / w),
                }
            })
            .collect();
        Self {
            terms,
            inv_w2: 1.0 / (w * w),
            sqrt2_over_w: 2f64.sqrt() / w,
            curvature,
        }
    }

    pub(crate) fn eval(&self, x: f64, y: f64) -> Complex64 {
        let r2 = x * x + y * y;
        let envelope = Complex64::new(-r2 * self.inv_w2, -self.curvature * r2).exp();
        let arg = 2.0 * r2 * self.inv_w2;
        let mut sum = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            // (√2 r/w)^{|l|} e^{i l φ} = ((x ± i y) √2/w)^{|l|}, finite on the axis.
            let base = Complex64::new(x * self.sqrt2_over_w, t.sign_ell * y * self.sqrt2_over_w);
            let mut angular = Complex64::new(1.0, 0.0);
            for _ in 0..t.abs_ell {
                angular *= base;
            }
            let radial = generalized_laguerre(t.p, t.abs_ell as f64, arg);
            sum += t.prefactor * angular * radial;
        }
        sum * envelope
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TermDoc {
    ell: i32,
    p: u32,
    re: f64,
    im: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SuperpositionDoc {
    beam: BeamGeometry,
    terms: Vec<TermDoc>,
}

/// A finite superposition of LG modes sharing one beam geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SuperpositionDoc", into = "SuperpositionDoc")]
pub struct ModeSuperposition {
    terms: Vec<(LGIndex, Complex64)>,
    beam: BeamGeometry,
}

impl ModeSuperposition {
    /// Checks for duplicate indices and that the norm is within [`NORM_TOLERANCE`] of one.
    pub fn new(terms: Vec<(LGIndex, Complex64)>, beam: BeamGeometry) -> Result<Self> {
        let sup = Self::unchecked(terms, beam)?;
        let norm = sup.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE || !norm.is_finite() {
            return Err(Error::NotNormalized {
                norm,
                tolerance: NORM_TOLERANCE,
            });
        }
        Ok(sup)
    }

    /// Rescales the coefficients to unit norm.
    pub fn normalized(terms: Vec<(LGIndex, Complex64)>, beam: BeamGeometry) -> Result<Self> {
        let mut sup = Self::unchecked(terms, beam)?;
        let norm = sup.norm_sqr().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized {
                norm: norm * norm,
                tolerance: NORM_TOLERANCE,
            });
        }
        for (_, c) in &mut sup.terms {
            *c /= norm;
        }
        Ok(sup)
    }

    fn unchecked(terms: Vec<(LGIndex, Complex64)>, beam: BeamGeometry) -> Result<Self> {
        let mut seen = HashSet::with_capacity(terms.len());
        for (index, _) in &terms {
            if !seen.insert(*index) {
                return Err(Error::DuplicateMode {
                    ell: index.ell,
                    p: index.p,
                });
            }
        }
        Ok(Self { terms, beam })
    }

    /// A single unit-amplitude mode.
    pub fn single(index: LGIndex, beam: BeamGeometry) -> Self {
        Self {
            terms: vec![(index, Complex64::new(1.0, 0.0))],
            beam,
        }
    }

    pub fn terms(&self) -> &[(LGIndex, Complex64)] {
        &self.terms
    }

    pub fn beam(&self) -> &BeamGeometry {
        &self.beam
    }

    /// Coefficient of `index`, zero when absent.
    pub fn coefficient(&self, index: LGIndex) -> Complex64 {
        self.terms
            .iter()
            .find(|(i, _)| *i == index)
            .map(|&(_, c)| c)
            .unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.norm_sqr()).sum()
    }

    /// Field amplitude at `(x, y, z)`.
    pub fn amplitude(&self, x: f64, y: f64, z: f64) -> Complex64 {
        self.plane(z).eval(x, y)
    }

    pub(crate) fn plane(&self, z: f64) -> PlaneEvaluator {
        PlaneEvaluator::new(&self.terms, &self.beam, z)
    }

    /// Complex conjugate of the waist-plane field: `ell -> -ell`, `c -> conj(c)`.
    pub fn conjugate(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|&(i, c)| (i.mirrored(), c.conj()))
                .collect(),
            beam: self.beam,
        }
    }

    /// Same coefficients with every azimuthal index negated.
    pub fn mirrored(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|&(i, c)| (i.mirrored(), c)).collect(),
            beam: self.beam,
        }
    }

    /// Coefficients rescaled by `factor` (used for the rounding-tolerant analyzers).
    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            terms: self.terms.iter().map(|&(i, c)| (i, c * factor)).collect(),
            beam: self.beam,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl TryFrom<SuperpositionDoc> for ModeSuperposition {
    type Error = Error;

    fn try_from(doc: SuperpositionDoc) -> Result<Self> {
        let terms = doc
            .terms
            .into_iter()
            .map(|t| (LGIndex::new(t.ell, t.p), Complex64::new(t.re, t.im)))
            .collect();
        Self::new(terms, doc.beam)
    }
}

impl From<ModeSuperposition> for SuperpositionDoc {
    fn from(sup: ModeSuperposition) -> Self {
        Self {
            beam: sup.beam,
            terms: sup
                .terms
                .into_iter()
                .map(|(i, c)| TermDoc {
                    ell: i.ell,
                    p: i.p,
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }
}

/// Real coefficients of the ell = 0 part of the link: `|0,0>, |0,1>, |0,2>`.
pub const HOPF_ZERO_OAM_COEFFICIENTS: [f64; 3] = [0.264, -0.628, 0.426];

/// Magnitude of the `|2,0>` coefficient of the link; this is also `beta`.
pub const HOPF_BETA: f64 = 0.596;

/// `alpha = sqrt(0.264² + 0.628² + 0.426²)`, the weight of `|0,p_Hopf>` in the link.
pub fn hopf_alpha() -> f64 {
    HOPF_ZERO_OAM_COEFFICIENTS
        .iter()
        .map(|c| c * c)
        .sum::<f64>()
        .sqrt()
}

/// The Hopf-link superposition
/// `0.264|0,0> - 0.628|0,1> + 0.426|0,2> - 0.596 e^{2iθ}|2,0>`.
pub fn hopf_link_superposition(theta: f64, beam: BeamGeometry) -> ModeSuperposition {
    let [c00, c01, c02] = HOPF_ZERO_OAM_COEFFICIENTS;
    let terms = vec![
        (LGIndex::new(0, 0), Complex64::new(c00, 0.0)),
        (LGIndex::new(0, 1), Complex64::new(c01, 0.0)),
        (LGIndex::new(0, 2), Complex64::new(c02, 0.0)),
        (
            LGIndex::new(2, 0),
            -HOPF_BETA * Complex64::from_polar(1.0, 2.0 * theta),
        ),
    ];
    ModeSuperposition::new(terms, beam).expect("printed link coefficients are within tolerance")
}

/// `|0,p_Hopf>`: the zero-OAM part of the link divided by `alpha`.
pub fn p_hopf_state(beam: BeamGeometry) -> ModeSuperposition {
    let alpha = hopf_alpha();
    let terms = HOPF_ZERO_OAM_COEFFICIENTS
        .iter()
        .enumerate()
        .map(|(p, &c)| (LGIndex::new(0, p as u32), Complex64::new(c / alpha, 0.0)))
        .collect();
    ModeSuperposition::new(terms, beam).expect("unit norm by construction")
}

/// Shifts each term by `exp(i Δφ_k)` with
/// `Δφ_k = (|ell_k| + 2 p_k + 1) atan(dz / z_R) + ell_k dtheta`.
pub fn apply_displacement(sup: &ModeSuperposition, dz: f64, dtheta: f64) -> ModeSuperposition {
    let terms = sup
        .terms
        .iter()
        .map(|&(index, c)| {
            let phase = gouy_phase(index, &sup.beam, dz) + index.ell as f64 * dtheta;
            (index, c * Complex64::from_polar(1.0, phase))
        })
        .collect();
    ModeSuperposition {
        terms,
        beam: sup.beam,
    }
}

/// `<a|b> = Σ conj(a_k) b_k` using orthonormality of the LG basis.
pub fn modal_inner_product(a: &ModeSuperposition, b: &ModeSuperposition) -> Result<Complex64> {
    if a.beam != b.beam {
        return Err(Error::BeamMismatch);
    }
    Ok(a.terms
        .iter()
        .map(|&(index, c)| c.conj() * b.coefficient(index))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn beam() -> BeamGeometry {
        BeamGeometry::default()
    }

    #[test]
    fn rayleigh_range_of_default_beam() {
        let zr = beam().rayleigh_range();
        assert_abs_diff_eq!(zr, PI * 1e-6 / 710e-9, epsilon = 1e-12);
        assert!((zr - 4.42).abs() < 0.01);
    }

    #[test]
    fn rejects_bad_beams() {
        assert!(BeamGeometry::new(0.0, 1e-3).is_err());
        assert!(BeamGeometry::new(710e-9, -1.0).is_err());
        assert!(BeamGeometry::new(f64::NAN, 1e-3).is_err());
    }

    #[test]
    fn laguerre_low_orders() {
        let x = 0.7;
        assert_abs_diff_eq!(generalized_laguerre(1, 2.0, x), 3.0 - x, epsilon = 1e-15);
        // L_2^0(x) = (x² - 4x + 2)/2
        assert_abs_diff_eq!(
            generalized_laguerre(2, 0.0, x),
            (x * x - 4.0 * x + 2.0) / 2.0,
            epsilon = 1e-15
        );
        // L_3^3(x) = 20 - 15x + 3x² - x³/6
        assert_abs_diff_eq!(
            generalized_laguerre(3, 3.0, x),
            20.0 - 15.0 * x + 3.0 * x * x - x.powi(3) / 6.0,
            epsilon = 1e-13
        );
    }

    #[test]
    fn axial_vortex_is_zero() {
        for z in [-3.0, 0.0, 1.5] {
            let v = lg_amplitude(LGIndex::new(1, 0), &beam(), 0.0, 0.0, z);
            assert_eq!(v, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn gaussian_peak_value() {
        let b = beam();
        let v = lg_amplitude(LGIndex::new(0, 0), &b, 0.0, 0.0, 0.0);
        assert_abs_diff_eq!(v.re, (2.0 / PI).sqrt() / b.waist(), epsilon = 1e-9);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn ell_two_azimuthal_phase() {
        let r = 0.3e-3;
        let (x, y) = (r * FRAC_PI_4.cos(), r * FRAC_PI_4.sin());
        let v = lg_amplitude(LGIndex::new(2, 0), &beam(), x, y, 0.0);
        assert_abs_diff_eq!(v.arg(), FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn gouy_phase_values() {
        let b = beam();
        let zr = b.rayleigh_range();
        assert_abs_diff_eq!(
            gouy_phase(LGIndex::new(0, 0), &b, zr),
            FRAC_PI_4,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            gouy_phase(LGIndex::new(0, 1), &b, zr),
            3.0 * FRAC_PI_4,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            gouy_phase(LGIndex::new(2, 0), &b, 1e12 * zr),
            1.5 * PI,
            epsilon = 1e-9
        );
    }

    #[test]
    fn link_coefficients() {
        let link = hopf_link_superposition(0.0, beam());
        let expected = [0.264, -0.628, 0.426, -0.596];
        for ((_, c), e) in link.terms().iter().zip(expected) {
            assert_abs_diff_eq!(c.re, e, epsilon = 1e-15);
            assert_abs_diff_eq!(c.im, 0.0, epsilon = 1e-15);
        }
        let rotated = hopf_link_superposition(FRAC_PI_2, beam());
        let c20 = rotated.coefficient(LGIndex::new(2, 0));
        assert_abs_diff_eq!(c20.re, 0.596, epsilon = 1e-15);
        assert_abs_diff_eq!(c20.im, 0.0, epsilon = 1e-15);
        // 0.264² + 0.628² + 0.426² + 0.596²
        assert_abs_diff_eq!(link.norm_sqr(), 1.000_772, epsilon = 1e-12);
    }

    #[test]
    fn p_hopf_coefficients_and_alpha() {
        let alpha = hopf_alpha();
        assert_abs_diff_eq!(alpha, 0.645_556_f64.sqrt(), epsilon = 1e-12);
        assert!((alpha - 0.803).abs() < 1e-3);
        let state = p_hopf_state(beam());
        let expected = [0.329, -0.782, 0.530];
        for ((_, c), e) in state.terms().iter().zip(expected) {
            assert!((c.re - e).abs() < 2e-3, "{} vs {e}", c.re);
        }
        let ip = modal_inner_product(
            &state,
            &ModeSuperposition::single(LGIndex::new(2, 0), beam()),
        )
        .unwrap();
        assert_eq!(ip, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn displacement_examples() {
        let b = beam();
        let link = hopf_link_superposition(0.0, b);
        assert_eq!(apply_displacement(&link, 0.0, 0.0), link);

        let turned = apply_displacement(&link, 0.0, PI);
        for ((_, a), (_, c)) in link.terms().iter().zip(turned.terms()) {
            assert_abs_diff_eq!((a - c).norm(), 0.0, epsilon = 1e-15);
        }

        let shifted = apply_displacement(&link, b.rayleigh_range(), 0.0);
        let gained = [FRAC_PI_4, 3.0 * FRAC_PI_4, 5.0 * FRAC_PI_4, 3.0 * FRAC_PI_4];
        for (((_, a), (_, c)), g) in link.terms().iter().zip(shifted.terms()).zip(gained) {
            let ratio = c / a;
            assert_abs_diff_eq!(ratio.norm(), 1.0, epsilon = 1e-15);
            let diff = (ratio.arg() - g).rem_euclid(2.0 * PI);
            assert!(diff < 1e-12 || 2.0 * PI - diff < 1e-12);
        }
    }

    #[test]
    fn inner_product_examples() {
        let b = beam();
        let l0 = hopf_link_superposition(0.0, b);
        let l90 = hopf_link_superposition(FRAC_PI_2, b);
        assert_abs_diff_eq!(
            modal_inner_product(&l0, &l0).unwrap().re,
            1.000_772,
            epsilon = 1e-12
        );
        let ip = modal_inner_product(&l0, &l90).unwrap();
        // alpha² - beta² = 0.645556 - 0.355216
        assert_abs_diff_eq!(ip.re, 0.290_34, epsilon = 1e-12);
        assert_abs_diff_eq!(ip.im, 0.0, epsilon = 1e-15);
        let a = ModeSuperposition::single(LGIndex::new(0, 1), b);
        let c = ModeSuperposition::single(LGIndex::new(2, 0), b);
        assert_eq!(
            modal_inner_product(&a, &c).unwrap(),
            Complex64::new(0.0, 0.0)
        );
    }

    #[test]
    fn inner_product_rejects_mismatched_beams() {
        let other = BeamGeometry::new(800e-9, 1e-3).unwrap();
        let a = ModeSuperposition::single(LGIndex::new(0, 0), beam());
        let b = ModeSuperposition::single(LGIndex::new(0, 0), other);
        assert!(matches!(
            modal_inner_product(&a, &b),
            Err(Error::BeamMismatch)
        ));
    }

    #[test]
    fn construction_errors() {
        let one = Complex64::new(1.0, 0.0);
        let dup = vec![
            (LGIndex::new(0, 0), one * 0.5),
            (LGIndex::new(0, 0), one * 0.5),
        ];
        assert!(matches!(
            ModeSuperposition::new(dup, beam()),
            Err(Error::DuplicateMode { .. })
        ));
        let off = vec![(LGIndex::new(0, 0), one * 0.9)];
        assert!(matches!(
            ModeSuperposition::new(off, beam()),
            Err(Error::NotNormalized { .. })
        ));
        let zero = vec![(LGIndex::new(0, 0), Complex64::new(0.0, 0.0))];
        assert!(ModeSuperposition::normalized(zero, beam()).is_err());
    }

    #[test]
    fn json_document_shape() {
        let link = hopf_link_superposition(0.3, beam());
        let json = link.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["beam"]["wavelength_m"], 710e-9);
        assert_eq!(v["beam"]["waist_m"], 1e-3);
        assert_eq!(v["terms"][3]["ell"], 2);
        assert_eq!(v["terms"][3]["p"], 0);
        assert!(v["terms"][3]["im"].is_number());
        assert_eq!(ModeSuperposition::from_json(&json).unwrap(), link);

        let bad = r#"{"beam":{"wavelength_m":7e-7,"waist_m":1e-3},"terms":[{"ell":0,"p":0,"re":2.0,"im":0.0}]}"#;
        assert!(ModeSuperposition::from_json(bad).is_err());
    }

    fn arb_superposition() -> impl Strategy<Value = ModeSuperposition> {
        prop::collection::btree_map((-3i32..=3, 0u32..=3), (-1.0f64..1.0, -1.0f64..1.0), 1..8)
            .prop_filter_map("nonzero", |m| {
                let terms = m
                    .into_iter()
                    .map(|((l, p), (re, im))| (LGIndex::new(l, p), Complex64::new(re, im)))
                    .collect();
                ModeSuperposition::normalized(terms, BeamGeometry::default()).ok()
            })
    }

    proptest! {
        #[test]
        fn displacement_preserves_norm(
            sup in arb_superposition(),
            dz in -20.0f64..20.0,
            dtheta in -7.0f64..7.0,
        ) {
            let moved = apply_displacement(&sup, dz, dtheta);
            prop_assert!((moved.norm_sqr() - sup.norm_sqr()).abs() < 1e-14);
        }

        #[test]
        fn inner_product_is_conjugate_symmetric(a in arb_superposition(), b in arb_superposition()) {
            let ab = modal_inner_product(&a, &b).unwrap();
            let ba = modal_inner_product(&b, &a).unwrap();
            prop_assert!((ab - ba.conj()).norm() < 1e-15);
            let aa = modal_inner_product(&a, &a).unwrap();
            prop_assert!((aa.re - a.norm_sqr()).abs() < 1e-15 && aa.im == 0.0);
        }

        #[test]
        fn waist_plane_conjugation_symmetry(
            ell in -4i32..=4,
            p in 0u32..=3,
            x in -3e-3f64..3e-3,
            y in -3e-3f64..3e-3,
        ) {
            let b = BeamGeometry::default();
            let plus = lg_amplitude(LGIndex::new(ell, p), &b, x, y, 0.0);
            let minus = lg_amplitude(LGIndex::new(-ell, p), &b, x, y, 0.0);
            prop_assert_eq!(minus, plus.conj());
        }

        #[test]
        fn gouy_phase_is_odd_and_monotone(ell in -4i32..=4, p in 0u32..=3, z in 0.0f64..50.0, dz in 1e-3f64..5.0) {
            let b = BeamGeometry::default();
            let i = LGIndex::new(ell, p);
            prop_assert_eq!(gouy_phase(i, &b, -z), -gouy_phase(i, &b, z));
            prop_assert!(gouy_phase(i, &b, z + dz) > gouy_phase(i, &b, z));
        }

        #[test]
        fn axial_phase_advance_matches_gouy(p in 0u32..=3, z in -8.0f64..8.0) {
            // Near the axis, after removing curvature, the phase advance is the Gouy phase.
            let b = BeamGeometry::default();
            let i = LGIndex::new(0, p);
            let r0 = 0.1 * b.waist();
            let zr = b.rayleigh_range();
            let curvature = -b.wavenumber() * r0 * r0 * z / (2.0 * (z * z + zr * zr));
            let u0 = lg_amplitude(i, &b, r0, 0.0, 0.0);
            let uz = lg_amplitude(i, &b, r0, 0.0, z);
            let advance = (uz / u0 * Complex64::from_polar(1.0, -curvature)).arg();
            let expected = gouy_phase(i, &b, z);
            let diff = (advance - expected).rem_euclid(2.0 * PI);
            prop_assert!(diff.min(2.0 * PI - diff) < 1e-9);
        }
    }
}
