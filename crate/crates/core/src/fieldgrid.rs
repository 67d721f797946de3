//! Transverse sampling grids, quadrature overlaps and angular-spectrum propagation.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export::{phase_to_u16, sig9, write_pgm16};
use crate::modes::{BeamGeometry, ModeSuperposition};

/// Uniform grid spanning `[-half_extent, half_extent]` in x and y.
///
/// Sample `(ix, iy)` sits at `-half_extent + (ix + offset[0]) * dx`, and likewise in y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    nx: usize,
    ny: usize,
    half_extent: f64,
    offset: [f64; 2],
}

impl GridSpec {
    pub const MIN_SAMPLES: usize = 16;

    /// Cell-centred grid (offset `(0.5, 0.5)`).
    pub fn new(nx: usize, ny: usize, half_extent: f64) -> Result<Self> {
        Self::with_offset(nx, ny, half_extent, [0.5, 0.5])
    }

    pub fn with_offset(nx: usize, ny: usize, half_extent: f64, offset: [f64; 2]) -> Result<Self> {
        if nx < Self::MIN_SAMPLES || ny < Self::MIN_SAMPLES {
            return Err(Error::InvalidGrid(format!(
                "{nx}x{ny} samples; at least {} per axis required",
                Self::MIN_SAMPLES
            )));
        }
        if !(half_extent.is_finite() && half_extent > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half extent {half_extent} must be positive"
            )));
        }
        if offset.iter().any(|o| !(0.0..1.0).contains(o)) {
            return Err(Error::InvalidGrid(format!(
                "offset {offset:?} must lie in [0, 1)"
            )));
        }
        Ok(Self {
            nx,
            ny,
            half_extent,
            offset,
        })
    }

    /// 256 x 256 samples over four waists either side of the axis.
    pub fn default_for(beam: &BeamGeometry) -> Self {
        Self::new(256, 256, 4.0 * beam.waist()).expect("default grid is valid")
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    pub fn offset(&self) -> [f64; 2] {
        self.offset
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_extent / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        2.0 * self.half_extent / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn x(&self, ix: usize) -> f64 {
        -self.half_extent + (ix as f64 + self.offset[0]) * self.dx()
    }

    pub fn y(&self, iy: usize) -> f64 {
        -self.half_extent + (iy as f64 + self.offset[1]) * self.dy()
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Complex field on a [`GridSpec`] at a fixed `z`, stored row-major with rows along y:
/// sample `(ix, iy)` lives at `values[iy * nx + ix]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    grid: GridSpec,
    z: f64,
    wavelength: f64,
    values: Vec<Complex64>,
}

impl SampledField {
    pub fn new(grid: GridSpec, z: f64, wavelength: f64, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a {}x{} grid",
                values.len(),
                grid.nx,
                grid.ny
            )));
        }
        if values
            .iter()
            .any(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::InvalidGrid("non-finite sample".into()));
        }
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::InvalidBeam(format!(
                "wavelength {wavelength} must be positive"
            )));
        }
        Ok(Self {
            grid,
            z,
            wavelength,
            values,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn at(&self, ix: usize, iy: usize) -> Complex64 {
        self.values[iy * self.grid.nx + ix]
    }

    /// `Σ|v|² dx dy`.
    pub fn power(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_area()
    }

    pub fn max_amplitude(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Relative L2 distance `‖self - other‖ / ‖other‖`.
    pub fn relative_l2_error(&self, reference: &SampledField) -> Result<f64> {
        if self.grid != reference.grid {
            return Err(Error::GridMismatch);
        }
        let (num, den) = self
            .values
            .iter()
            .zip(&reference.values)
            .fold((0.0, 0.0), |(n, d), (a, b)| {
                (n + (a - b).norm_sqr(), d + b.norm_sqr())
            });
        Ok((num / den).sqrt())
    }

    /// CSV with header `x_m,y_m,re,im`, y-major row order.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x_m,y_m,re,im")?;
        for iy in 0..self.grid.ny {
            let y = sig9(self.grid.y(iy));
            for ix in 0..self.grid.nx {
                let v = self.at(ix, iy);
                writeln!(
                    out,
                    "{},{},{},{}",
                    sig9(self.grid.x(ix)),
                    y,
                    sig9(v.re),
                    sig9(v.im)
                )?;
            }
        }
        out.flush()
    }

    /// 16-bit graymap of `|v| / max|v|`. The top image row is the largest y.
    pub fn write_amplitude_pgm<W: Write>(&self, out: W) -> std::io::Result<()> {
        let max = self.max_amplitude();
        let scale = if max > 0.0 { 65535.0 / max } else { 0.0 };
        let pixels = self.image_rows(|v| (v.norm() * scale).round().clamp(0.0, 65535.0) as u16);
        write_pgm16(out, self.grid.nx, self.grid.ny, &pixels)
    }

    /// 16-bit graymap of the phase, `[0, 2π)` mapped linearly to `[0, 65535]`.
    pub fn write_phase_pgm<W: Write>(&self, out: W) -> std::io::Result<()> {
        let pixels = self.image_rows(|v| phase_to_u16(v.arg()));
        write_pgm16(out, self.grid.nx, self.grid.ny, &pixels)
    }

    fn image_rows(&self, f: impl Fn(Complex64) -> u16) -> Vec<u16> {
        (0..self.grid.ny)
            .rev()
            .flat_map(|iy| (0..self.grid.nx).map(move |ix| (ix, iy)))
            .map(|(ix, iy)| f(self.at(ix, iy)))
            .collect()
    }
}

/// Evaluates `sup` at every sample of `grid` in the plane `z`.
pub fn sample_plane(sup: &ModeSuperposition, z: f64, grid: &GridSpec) -> SampledField {
    let plane = sup.plane(z);
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    values
        .par_chunks_mut(grid.nx)
        .enumerate()
        .for_each(|(iy, row)| {
            let y = grid.y(iy);
            for (ix, v) in row.iter_mut().enumerate() {
                *v = plane.eval(grid.x(ix), y);
            }
        });
    SampledField {
        grid: *grid,
        z,
        wavelength: sup.beam().wavelength(),
        values,
    }
}

/// Midpoint-rule approximation of `∬ conj(a) b dx dy`.
pub fn numerical_overlap(a: &SampledField, b: &SampledField) -> Result<Complex64> {
    if a.grid != b.grid || a.z != b.z {
        return Err(Error::GridMismatch);
    }
    let sum: Complex64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(u, v)| u.conj() * v)
        .sum();
    Ok(sum * a.grid.cell_area())
}

/// Angular frequencies `2π · fftfreq(n, d)`.
pub(crate) fn angular_frequencies(n: usize, spacing: f64) -> Vec<f64> {
    let span = n as f64 * spacing;
    (0..n)
        .map(|i| {
            let k = if i < n.div_ceil(2) {
                i as f64
            } else {
                i as f64 - n as f64
            };
            2.0 * std::f64::consts::PI * k / span
        })
        .collect()
}

/// In-place unnormalized 2D FFT of a row-major `nx` x `ny` array.
pub(crate) fn fft2(values: &mut [Complex64], nx: usize, ny: usize, direction: FftDirection) {
    let mut planner = FftPlanner::<f64>::new();
    let row_fft = planner.plan_fft(nx, direction);
    let col_fft = planner.plan_fft(ny, direction);

    values
        .par_chunks_mut(nx)
        .for_each(|row| row_fft.process(row));

    let mut transposed = vec![Complex64::new(0.0, 0.0); nx * ny];
    transposed
        .par_chunks_mut(ny)
        .enumerate()
        .for_each(|(ix, col)| {
            for (iy, v) in col.iter_mut().enumerate() {
                *v = values[iy * nx + ix];
            }
            col_fft.process(col);
        });
    values.par_chunks_mut(nx).enumerate().for_each(|(iy, row)| {
        for (ix, v) in row.iter_mut().enumerate() {
            *v = transposed[ix * ny + iy];
        }
    });
}

/// Propagates a sampled field by `dz` with the paraxial transfer function
/// `exp(+i (kx² + ky²) dz / (2k))`.
///
/// The sign pairs with the `exp(-i k r² z / ...)`, `exp(+i Gouy)` mode convention of
/// [`crate::modes`], so propagated and analytically sampled fields agree without a
/// global phase correction. Boundaries are periodic; the caller must keep the field
/// well inside the window.
pub fn angular_spectrum_propagate(f: &SampledField, dz: f64) -> SampledField {
    let (nx, ny) = (f.grid.nx, f.grid.ny);
    let kx = angular_frequencies(nx, f.grid.dx());
    let ky = angular_frequencies(ny, f.grid.dy());
    let k = 2.0 * std::f64::consts::PI / f.wavelength;
    let norm = 1.0 / (nx * ny) as f64;

    let mut values = f.values.clone();
    fft2(&mut values, nx, ny, FftDirection::Forward);
    values.par_chunks_mut(nx).enumerate().for_each(|(iy, row)| {
        for (ix, v) in row.iter_mut().enumerate() {
            let phase = (kx[ix] * kx[ix] + ky[iy] * ky[iy]) * dz / (2.0 * k);
            *v *= Complex64::from_polar(norm, phase);
        }
    });
    fft2(&mut values, nx, ny, FftDirection::Inverse);

    SampledField {
        grid: f.grid,
        z: f.z + dz,
        wavelength: f.wavelength,
        values,
    }
}
