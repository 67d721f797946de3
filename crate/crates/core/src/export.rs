//! Shared text and image writers.

use std::io::Write;

/// Formats a float with 9 significant digits in scientific notation.
pub fn sig9(v: f64) -> String {
    format!("{v:.8e}")
}

/// Writes a binary 16-bit portable graymap (`P5`, maxval 65535, big-endian samples).
///
/// `pixels` is row-major with `width` samples per row.
pub fn write_pgm16<W: Write>(
    mut out: W,
    width: usize,
    height: usize,
    pixels: &[u16],
) -> std::io::Result<()> {
    assert_eq!(pixels.len(), width * height, "pixel buffer size mismatch");
    write!(out, "P5\n{width} {height}\n65535\n")?;
    let mut buf = Vec::with_capacity(pixels.len() * 2);
    for &p in pixels {
        buf.extend_from_slice(&p.to_be_bytes());
    }
    out.write_all(&buf)?;
    out.flush()
}

/// Maps `[0, 2π)` linearly onto `0..=65535`.
pub(crate) fn phase_to_u16(phase: f64) -> u16 {
    let scaled =
        (phase.rem_euclid(std::f64::consts::TAU) / std::f64::consts::TAU * 65536.0).floor();
    scaled.clamp(0.0, 65535.0) as u16
}
