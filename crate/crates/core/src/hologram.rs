//! Off-axis phase-only holograms and their simulated first-order reconstruction.
//!
//! The phase written to the modulator is
//!
//! ```text
//! Φ_holo(x, y) = [Φ_link(x, y) + Φ_grating(x)]_{mod 2π} × depth(I_link(x, y))
//! ```
//!
//! where `I_link` is the max-normalized intensity of the target at the waist and the
//! grating is a linear ramp along +x. Two depth profiles are available, see [`Encoding`].

use std::f64::consts::{PI, TAU};
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export::{phase_to_u16, sig9, write_pgm16};
use crate::fieldgrid::{fft2, sample_plane, GridSpec, SampledField};
use crate::modes::{BeamGeometry, ModeSuperposition};

/// Fewest carrier fringes for which the first order can be windowed off the zero order.
pub const MIN_GRATING_CYCLES: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    /// Depth factor `sinc²(1 - π I)`, evaluated literally.
    AsPrinted,
    /// Depth `M(I) = 1 + arcsinc(√I) / π`, which makes the first-order amplitude
    /// proportional to `√I`.
    NormalizedBlaze,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HologramSpec {
    /// Carrier fringes across the full aperture, along x.
    pub grating_cycles: f64,
    pub grid: GridSpec,
    pub encoding: Encoding,
}

impl HologramSpec {
    /// 32 fringes, normalized blaze, on the default field grid.
    pub fn default_for(beam: &BeamGeometry) -> Self {
        Self {
            grating_cycles: 32.0,
            grid: GridSpec::default_for(beam),
            encoding: Encoding::NormalizedBlaze,
        }
    }

    /// Linear grating phase at `x`, zero at the left edge of the aperture.
    pub fn grating_phase(&self, x: f64) -> f64 {
        let h = self.grid.half_extent();
        TAU * self.grating_cycles * (x + h) / (2.0 * h)
    }
}

/// Hologram phase on a grid, every value in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMap {
    grid: GridSpec,
    values: Vec<f64>,
    source_waist: f64,
    wavelength: f64,
}

impl PhaseMap {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Row-major with rows along y, like [`SampledField`].
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Waist of the encoded superposition.
    pub fn source_waist(&self) -> f64 {
        self.source_waist
    }

    /// 16-bit graymap, 0 ↔ 0 rad and 65535 ↔ 2π(1 - 1/65536) rad. The top row is the largest y.
    pub fn write_pgm<W: Write>(&self, out: W) -> std::io::Result<()> {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let pixels: Vec<u16> = (0..ny)
            .rev()
            .flat_map(|iy| (0..nx).map(move |ix| iy * nx + ix))
            .map(|i| phase_to_u16(self.values[i]))
            .collect();
        write_pgm16(out, nx, ny, &pixels)
    }

    /// CSV with header `x_m,y_m,phase_rad`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x_m,y_m,phase_rad")?;
        for iy in 0..self.grid.ny() {
            let y = sig9(self.grid.y(iy));
            for ix in 0..self.grid.nx() {
                let v = self.values[iy * self.grid.nx() + ix];
                writeln!(out, "{},{},{}", sig9(self.grid.x(ix)), y, sig9(v))?;
            }
        }
        out.flush()
    }
}

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Inverse of `sinc` on `[-π, 0]`: returns `x` with `sinc(x) = v` for `v` in `[0, 1]`.
pub fn arcsinc(v: f64) -> f64 {
    let v = v.clamp(0.0, 1.0);
    if v == 1.0 {
        return 0.0;
    }
    // sinc is increasing on [-π, 0]; bisect.
    let (mut lo, mut hi) = (-PI, 0.0);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if sinc(mid) < v {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Depth modulation for a normalized intensity.
pub fn depth_factor(encoding: Encoding, intensity: f64) -> f64 {
    match encoding {
        Encoding::AsPrinted => sinc(1.0 - PI * intensity).powi(2),
        Encoding::NormalizedBlaze => 1.0 + arcsinc(intensity.max(0.0).sqrt()) / PI,
    }
}

fn wrap_phase(phase: f64) -> f64 {
    let r = phase.rem_euclid(TAU);
    // rem_euclid can round tiny negatives up to exactly 2π.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Encodes a sampled waist-plane field. Intensity is max-normalized over the aperture.
pub fn encode_field(field: &SampledField, spec: &HologramSpec, source_waist: f64) -> PhaseMap {
    let grid = spec.grid;
    assert_eq!(
        field.grid(),
        &grid,
        "field must be sampled on the hologram grid"
    );
    let peak = field
        .values()
        .iter()
        .map(|v| v.norm_sqr())
        .fold(0.0, f64::max);
    let inv_peak = if peak > 0.0 { 1.0 / peak } else { 0.0 };
    let values = field
        .values()
        .par_iter()
        .enumerate()
        .map(|(i, v)| {
            let x = grid.x(i % grid.nx());
            let intensity = v.norm_sqr() * inv_peak;
            let wrapped = wrap_phase(v.arg() + spec.grating_phase(x));
            let depth = depth_factor(spec.encoding, intensity);
            match spec.encoding {
                Encoding::AsPrinted => wrap_phase(wrapped * depth),
                // Centring the sawtooth keeps the first-order phase independent of depth.
                Encoding::NormalizedBlaze => wrap_phase(depth * (wrapped - PI)),
            }
        })
        .collect();
    PhaseMap {
        grid,
        values,
        source_waist,
        wavelength: field.wavelength(),
    }
}

/// Hologram measuring (or generating) `sup`, built from its waist-plane cross-section.
pub fn synthesize_hologram(sup: &ModeSuperposition, spec: &HologramSpec) -> PhaseMap {
    let field = sample_plane(sup, 0.0, &spec.grid);
    encode_field(&field, spec, sup.beam().waist())
}

/// Field diffracted into the +1 order when a Gaussian probe of waist `probe_waist`
/// illuminates the hologram.
///
/// The spectrum is windowed by a square of side `grating_cycles / 2` bins centred on
/// the carrier, transformed back and demodulated by the conjugate carrier.
pub fn first_order_field(
    map: &PhaseMap,
    spec: &HologramSpec,
    probe_waist: f64,
) -> Result<SampledField> {
    if spec.grating_cycles.is_nan() || spec.grating_cycles < MIN_GRATING_CYCLES {
        return Err(Error::GratingTooCoarse {
            cycles: spec.grating_cycles,
        });
    }
    if probe_waist.is_nan() || probe_waist < 2.0 * map.source_waist {
        return Err(Error::ProbeTooSmall {
            probe: probe_waist,
            target: map.source_waist,
        });
    }
    if map.grid != spec.grid {
        return Err(Error::GridMismatch);
    }
    let grid = spec.grid;
    let (nx, ny) = (grid.nx(), grid.ny());
    let inv_w2 = 1.0 / (probe_waist * probe_waist);

    let mut values: Vec<Complex64> = map
        .values
        .par_iter()
        .enumerate()
        .map(|(i, &phase)| {
            let (x, y) = (grid.x(i % nx), grid.y(i / nx));
            Complex64::from_polar((-(x * x + y * y) * inv_w2).exp(), phase)
        })
        .collect();

    fft2(&mut values, nx, ny, FftDirection::Forward);
    let half_width = spec.grating_cycles / 4.0;
    let signed = |i: usize, n: usize| {
        if i < n.div_ceil(2) {
            i as f64
        } else {
            i as f64 - n as f64
        }
    };
    let norm = 1.0 / (nx * ny) as f64;
    values.par_chunks_mut(nx).enumerate().for_each(|(iy, row)| {
        let fy = signed(iy, ny);
        for (ix, v) in row.iter_mut().enumerate() {
            let fx = signed(ix, nx);
            if (fx - spec.grating_cycles).abs() <= half_width && fy.abs() <= half_width {
                *v *= norm;
            } else {
                *v = Complex64::new(0.0, 0.0);
            }
        }
    });
    fft2(&mut values, nx, ny, FftDirection::Inverse);

    values.par_chunks_mut(nx).for_each(|row| {
        for (ix, v) in row.iter_mut().enumerate() {
            *v *= Complex64::from_polar(1.0, -spec.grating_phase(grid.x(ix)));
        }
    });
    SampledField::new(grid, 0.0, map.wavelength, values)
}

/// `|<a|b>| / (‖a‖ ‖b‖)` on a shared grid.
pub fn normalized_overlap(a: &SampledField, b: &SampledField) -> Result<f64> {
    let ab = crate::fieldgrid::numerical_overlap(a, b)?;
    Ok(ab.norm() / (a.power() * b.power()).sqrt())
}
