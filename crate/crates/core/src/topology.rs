//! Phase singularities: plane detection, 3D vortex-line tracing and linking numbers.
//!
//! Windings are computed from edge phase differences wrapped to `(-π, π]`. Each edge
//! is wrapped once in its canonical (increasing-index) direction and negated when a
//! plaquette traverses it backwards, so the charges of neighbouring plaquettes always
//! telescope to the winding around their union. This keeps charge conservation exact
//! even when a difference lands on `±π`, which happens for symmetric higher-charge
//! axial vortices on a centred grid.

use std::collections::{HashMap, HashSet};
use std::f64::consts::{PI, TAU};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export::sig9;
use crate::fieldgrid::{sample_plane, GridSpec, SampledField};
use crate::modes::{BeamGeometry, ModeSuperposition};

/// Samples below this fraction of the peak amplitude carry no usable phase.
pub const AMPLITUDE_FLOOR: f64 = 1e-9;

/// Largest tolerated distance between a Gauss sum and the nearest integer.
pub const LINKING_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaceOrientation {
    /// Normal along +z.
    Xy,
    /// Normal along +x.
    Yz,
    /// Normal along +y.
    Zx,
}

/// A charged plaquette, located at its centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VortexPoint {
    pub position: [f64; 3],
    pub charge: i32,
    pub face: FaceOrientation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexLine {
    pub points: Vec<[f64; 3]>,
    pub closed: bool,
    pub exits_volume: bool,
}

impl VortexLine {
    /// Closed loop through `points`; the first point is repeated at the end.
    pub fn closed_loop(mut points: Vec<[f64; 3]>) -> Self {
        if let Some(&first) = points.first() {
            if points.last() != Some(&first) {
                points.push(first);
            }
        }
        Self {
            points,
            closed: true,
            exits_volume: false,
        }
    }

    /// CSV with header `x_m,y_m,z_m`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x_m,y_m,z_m")?;
        for p in &self.points {
            writeln!(out, "{},{},{}", sig9(p[0]), sig9(p[1]), sig9(p[2]))?;
        }
        out.flush()
    }
}

/// Sampling volume for 3D tracing: a transverse grid repeated over `nz` planes
/// from `z_min` to `z_max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Volume {
    pub grid: GridSpec,
    pub z_min: f64,
    pub z_max: f64,
    pub nz: usize,
}

impl Volume {
    pub const MIN_PLANES: usize = 16;

    pub fn new(grid: GridSpec, z_min: f64, z_max: f64, nz: usize) -> Result<Self> {
        if nz < Self::MIN_PLANES {
            return Err(Error::InvalidVolume(format!(
                "{nz} planes; at least {} required",
                Self::MIN_PLANES
            )));
        }
        if !(z_min.is_finite() && z_max.is_finite() && z_max > z_min) {
            return Err(Error::InvalidVolume(format!(
                "empty z range [{z_min}, {z_max}]"
            )));
        }
        Ok(Self {
            grid,
            z_min,
            z_max,
            nz,
        })
    }

    /// 192 x 192 x 129 samples over three waists transversely and one Rayleigh
    /// range either side of the waist.
    pub fn default_for(beam: &BeamGeometry) -> Self {
        let zr = beam.rayleigh_range();
        let grid = GridSpec::new(192, 192, 3.0 * beam.waist()).expect("valid default grid");
        Self::new(grid, -zr, zr, 129).expect("valid default volume")
    }

    pub fn dz(&self) -> f64 {
        (self.z_max - self.z_min) / (self.nz - 1) as f64
    }

    pub fn z(&self, iz: usize) -> f64 {
        self.z_min + iz as f64 * self.dz()
    }
}

/// Traced vortex lines and pairwise linking numbers of the closed ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyReport {
    pub lines: Vec<VortexLine>,
    /// Symmetric, zero diagonal; indexed by closed loops in the order they appear in `lines`.
    pub linking_matrix: Vec<Vec<i64>>,
    pub n_closed: usize,
    pub n_open: usize,
    pub volume: Volume,
}

impl TopologyReport {
    pub fn closed_loops(&self) -> impl Iterator<Item = &VortexLine> {
        self.lines.iter().filter(|l| l.closed)
    }

    /// Sorted `|linking|` over distinct closed-loop pairs.
    pub fn linking_magnitudes(&self) -> Vec<i64> {
        let n = self.linking_matrix.len();
        let mut out: Vec<i64> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| self.linking_matrix[i][j].abs())
            .collect();
        out.sort_unstable();
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Wraps a phase difference to `(-π, π]`.
fn wrap(d: f64) -> f64 {
    let r = d.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

fn edge(from: f64, to: f64) -> f64 {
    wrap(to - from)
}

/// Charge of a plaquette whose canonical edge differences are
/// `a` (along u at v0), `b` (along v at u1), `c` (along u at v1), `d` (along v at u0).
fn plaquette_charge(a: f64, b: f64, c: f64, d: f64) -> i32 {
    let total = a + b - c - d;
    if total.is_nan() {
        return 0;
    }
    (total / TAU).round() as i32
}

/// Phase map with dead samples set to NaN.
fn live_phases(values: &[num_complex::Complex64], floor: f64) -> Vec<f64> {
    values
        .iter()
        .map(|v| if v.norm() < floor { f64::NAN } else { v.arg() })
        .collect()
}

/// One point per plaquette with winding exactly ±1, at the plaquette centre.
pub fn plane_vortex_points(f: &SampledField) -> Vec<VortexPoint> {
    let grid = f.grid();
    let (nx, ny) = (grid.nx(), grid.ny());
    let phases = live_phases(f.values(), AMPLITUDE_FLOOR * f.max_amplitude());
    let at = |ix: usize, iy: usize| phases[iy * nx + ix];
    let mut points = Vec::new();
    for iy in 0..ny - 1 {
        for ix in 0..nx - 1 {
            let q = plaquette_charge(
                edge(at(ix, iy), at(ix + 1, iy)),
                edge(at(ix + 1, iy), at(ix + 1, iy + 1)),
                edge(at(ix, iy + 1), at(ix + 1, iy + 1)),
                edge(at(ix, iy), at(ix, iy + 1)),
            );
            if q.abs() == 1 {
                points.push(VortexPoint {
                    position: [
                        grid.x(ix) + 0.5 * grid.dx(),
                        grid.y(iy) + 0.5 * grid.dy(),
                        f.z(),
                    ],
                    charge: q,
                    face: FaceOrientation::Xy,
                });
            }
        }
    }
    points
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Face {
    orient: FaceOrientation,
    ix: usize,
    iy: usize,
    iz: usize,
}

type Voxel = (usize, usize, usize);

struct PhaseVolume {
    nx: usize,
    ny: usize,
    nz: usize,
    phases: Vec<f64>,
}

impl PhaseVolume {
    fn sample(sup: &ModeSuperposition, volume: &Volume) -> Self {
        let planes: Vec<Vec<num_complex::Complex64>> = (0..volume.nz)
            .into_par_iter()
            .map(|iz| sample_plane(sup, volume.z(iz), &volume.grid).into_values())
            .collect();
        let peak = planes
            .par_iter()
            .map(|p| p.iter().map(|v| v.norm()).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max);
        let floor = AMPLITUDE_FLOOR * peak;
        let phases = planes
            .into_par_iter()
            .flat_map_iter(|p| live_phases(&p, floor))
            .collect();
        Self {
            nx: volume.grid.nx(),
            ny: volume.grid.ny(),
            nz: volume.nz,
            phases,
        }
    }

    fn at(&self, ix: usize, iy: usize, iz: usize) -> f64 {
        self.phases[(iz * self.ny + iy) * self.nx + ix]
    }

    fn ex(&self, ix: usize, iy: usize, iz: usize) -> f64 {
        edge(self.at(ix, iy, iz), self.at(ix + 1, iy, iz))
    }

    fn ey(&self, ix: usize, iy: usize, iz: usize) -> f64 {
        edge(self.at(ix, iy, iz), self.at(ix, iy + 1, iz))
    }

    fn ez(&self, ix: usize, iy: usize, iz: usize) -> f64 {
        edge(self.at(ix, iy, iz), self.at(ix, iy, iz + 1))
    }

    fn charge(&self, f: Face) -> i32 {
        let Face { ix, iy, iz, .. } = f;
        match f.orient {
            FaceOrientation::Xy => plaquette_charge(
                self.ex(ix, iy, iz),
                self.ey(ix + 1, iy, iz),
                self.ex(ix, iy + 1, iz),
                self.ey(ix, iy, iz),
            ),
            FaceOrientation::Yz => plaquette_charge(
                self.ey(ix, iy, iz),
                self.ez(ix, iy + 1, iz),
                self.ey(ix, iy, iz + 1),
                self.ez(ix, iy, iz),
            ),
            FaceOrientation::Zx => plaquette_charge(
                self.ez(ix, iy, iz),
                self.ex(ix, iy, iz + 1),
                self.ez(ix + 1, iy, iz),
                self.ex(ix, iy, iz),
            ),
        }
    }

    /// Every face with nonzero winding.
    fn charged_faces(&self) -> Vec<(Face, i32)> {
        let (nx, ny, nz) = (self.nx, self.ny, self.nz);
        (0..nz)
            .into_par_iter()
            .flat_map_iter(|iz| {
                let mut found = Vec::new();
                let mut probe = |f: Face| {
                    let q = self.charge(f);
                    if q != 0 {
                        found.push((f, q));
                    }
                };
                for iy in 0..ny {
                    for ix in 0..nx {
                        if ix + 1 < nx && iy + 1 < ny {
                            probe(Face {
                                orient: FaceOrientation::Xy,
                                ix,
                                iy,
                                iz,
                            });
                        }
                        if iz + 1 < nz && iy + 1 < ny {
                            probe(Face {
                                orient: FaceOrientation::Yz,
                                ix,
                                iy,
                                iz,
                            });
                        }
                        if iz + 1 < nz && ix + 1 < nx {
                            probe(Face {
                                orient: FaceOrientation::Zx,
                                ix,
                                iy,
                                iz,
                            });
                        }
                    }
                }
                found
            })
            .collect()
    }

    /// Voxels on the `+normal` and `-normal` sides of a face, when inside the volume.
    fn neighbours(&self, f: Face) -> (Option<Voxel>, Option<Voxel>) {
        let Face { ix, iy, iz, .. } = f;
        match f.orient {
            FaceOrientation::Xy => (
                (iz + 1 < self.nz).then_some((ix, iy, iz)),
                (iz >= 1).then(|| (ix, iy, iz - 1)),
            ),
            FaceOrientation::Yz => (
                (ix + 1 < self.nx).then_some((ix, iy, iz)),
                (ix >= 1).then(|| (ix - 1, iy, iz)),
            ),
            FaceOrientation::Zx => (
                (iy + 1 < self.ny).then_some((ix, iy, iz)),
                (iy >= 1).then(|| (ix, iy - 1, iz)),
            ),
        }
    }
}

fn face_centre(volume: &Volume, f: Face) -> [f64; 3] {
    let g = &volume.grid;
    let (x, y, z) = (g.x(f.ix), g.y(f.iy), volume.z(f.iz));
    let (hx, hy, hz) = (0.5 * g.dx(), 0.5 * g.dy(), 0.5 * volume.dz());
    match f.orient {
        FaceOrientation::Xy => [x + hx, y + hy, z],
        FaceOrientation::Yz => [x, y + hy, z + hz],
        FaceOrientation::Zx => [x + hx, y, z + hz],
    }
}

/// Traces all vortex lines of `sup` through `volume` and links the closed ones.
///
/// Lines run from face centre to face centre through voxels that carry exactly one
/// incoming and one outgoing charged face. Any other configuration is reported as a
/// [`Error::Refinement`] naming the offending voxel.
pub fn trace_vortex_lines(sup: &ModeSuperposition, volume: &Volume) -> Result<TopologyReport> {
    let field = PhaseVolume::sample(sup, volume);
    let charged = field.charged_faces();

    // Faces seen from each voxel: +1 for outflow, -1 for inflow.
    let mut voxels: HashMap<Voxel, Vec<(Face, i32)>> = HashMap::new();
    for &(face, q) in &charged {
        let (plus, minus) = field.neighbours(face);
        if q.abs() != 1 {
            let (ix, iy, iz) = plus.or(minus).expect("face borders at least one voxel");
            return Err(Error::Refinement {
                ix,
                iy,
                iz,
                charged_faces: 1,
            });
        }
        if let Some(v) = plus {
            voxels.entry(v).or_default().push((face, -q));
        }
        if let Some(v) = minus {
            voxels.entry(v).or_default().push((face, q));
        }
    }

    let mut exit_face: HashMap<Voxel, Face> = HashMap::with_capacity(voxels.len());
    let mut sorted: Vec<_> = voxels.into_iter().collect();
    sorted.sort_unstable_by_key(|(v, _)| (v.2, v.1, v.0));
    for ((ix, iy, iz), faces) in sorted {
        let outflow: Vec<_> = faces.iter().filter(|(_, s)| *s > 0).collect();
        if faces.len() != 2 || outflow.len() != 1 {
            return Err(Error::Refinement {
                ix,
                iy,
                iz,
                charged_faces: faces.len(),
            });
        }
        exit_face.insert((ix, iy, iz), outflow[0].0);
    }

    let charge_of: HashMap<Face, i32> = charged.iter().copied().collect();
    let downstream = |f: Face| {
        let (plus, minus) = field.neighbours(f);
        if charge_of[&f] > 0 {
            plus
        } else {
            minus
        }
    };
    let upstream = |f: Face| {
        let (plus, minus) = field.neighbours(f);
        if charge_of[&f] > 0 {
            minus
        } else {
            plus
        }
    };

    let mut order: Vec<Face> = charged.iter().map(|&(f, _)| f).collect();
    order.sort_unstable_by_key(|f| (f.iz, f.iy, f.ix, f.orient as u8));

    let mut visited: HashSet<Face> = HashSet::with_capacity(order.len());
    let mut lines = Vec::new();

    // Open lines enter through a boundary face.
    for &start in order.iter().filter(|&&f| upstream(f).is_none()) {
        let mut points = Vec::new();
        let mut face = start;
        loop {
            visited.insert(face);
            points.push(face_centre(volume, face));
            match downstream(face) {
                Some(v) => face = exit_face[&v],
                None => break,
            }
        }
        lines.push(VortexLine {
            points,
            closed: false,
            exits_volume: true,
        });
    }

    for &start in &order {
        if visited.contains(&start) {
            continue;
        }
        let mut points = Vec::new();
        let mut face = start;
        loop {
            visited.insert(face);
            points.push(face_centre(volume, face));
            let v = downstream(face).expect("boundary faces were consumed by open lines");
            face = exit_face[&v];
            if face == start {
                break;
            }
        }
        lines.push(VortexLine::closed_loop(points));
    }

    let closed: Vec<&VortexLine> = lines.iter().filter(|l| l.closed).collect();
    let n = closed.len();
    let mut linking_matrix = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let lk = linking_number(closed[i], closed[j])?;
            linking_matrix[i][j] = lk;
            linking_matrix[j][i] = lk;
        }
    }
    let n_open = lines.len() - n;
    Ok(TopologyReport {
        lines,
        linking_matrix,
        n_closed: n,
        n_open,
        volume: *volume,
    })
}

fn segments(line: &VortexLine, scale: [f64; 3]) -> Vec<([f64; 3], [f64; 3])> {
    line.points
        .windows(2)
        .map(|w| {
            let a = [w[0][0] * scale[0], w[0][1] * scale[1], w[0][2] * scale[2]];
            let b = [w[1][0] * scale[0], w[1][1] * scale[1], w[1][2] * scale[2]];
            let mid = [
                0.5 * (a[0] + b[0]),
                0.5 * (a[1] + b[1]),
                0.5 * (a[2] + b[2]),
            ];
            let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
            (mid, d)
        })
        .collect()
}

/// Midpoint Gauss double sum `(1/4π) ΣΣ (m_a - m_b)·(d_a × d_b) / |m_a - m_b|³`.
///
/// Coordinates are first rescaled per axis to the joint bounding box. The linking
/// number is invariant under that map, and it keeps the sum well conditioned when the
/// axial and transverse length scales differ by orders of magnitude.
pub fn gauss_linking_sum(a: &VortexLine, b: &VortexLine) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in a.points.iter().chain(&b.points) {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let scale = [0, 1, 2].map(|k| {
        let span = hi[k] - lo[k];
        if span > 0.0 {
            1.0 / span
        } else {
            1.0
        }
    });
    let sa = segments(a, scale);
    let sb = segments(b, scale);
    let total: f64 = sa
        .par_iter()
        .map(|(ma, da)| {
            sb.iter()
                .map(|(mb, db)| {
                    let r = [ma[0] - mb[0], ma[1] - mb[1], ma[2] - mb[2]];
                    let cross = [
                        da[1] * db[2] - da[2] * db[1],
                        da[2] * db[0] - da[0] * db[2],
                        da[0] * db[1] - da[1] * db[0],
                    ];
                    let dist = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
                    (r[0] * cross[0] + r[1] * cross[1] + r[2] * cross[2]) / dist.powi(3)
                })
                .sum::<f64>()
        })
        .sum();
    total / (4.0 * PI)
}

/// Gauss linking number of two closed lines, rounded to the nearest integer.
pub fn linking_number(a: &VortexLine, b: &VortexLine) -> Result<i64> {
    if !a.closed || !b.closed {
        return Err(Error::OpenLine);
    }
    let raw = gauss_linking_sum(a, b);
    let rounded = raw.round();
    if (raw - rounded).abs() >= LINKING_TOLERANCE {
        return Err(Error::LinkingAccuracy { raw });
    }
    Ok(rounded as i64)
}

/// Topological signature compared across perturbation trials.
fn signature(report: &TopologyReport) -> (usize, Vec<i64>) {
    (report.n_closed, report.linking_magnitudes())
}

/// Multiplies every coefficient by `(1 + δ) e^{iη}` with `δ, η` uniform in
/// `[-epsilon, epsilon]`, then rescales to unit norm.
pub fn perturb_coefficients<R: Rng>(
    sup: &ModeSuperposition,
    epsilon: f64,
    rng: &mut R,
) -> Result<ModeSuperposition> {
    let terms = sup
        .terms()
        .iter()
        .map(|&(index, c)| {
            let delta = rng.random_range(-epsilon..=epsilon);
            let eta = rng.random_range(-epsilon..=epsilon);
            (
                index,
                c * num_complex::Complex64::from_polar(1.0 + delta, eta),
            )
        })
        .collect();
    ModeSuperposition::normalized(terms, *sup.beam())
}

/// Fraction of `n_trials` random coefficient perturbations of size `epsilon` that keep
/// the number of closed loops and the multiset of `|linking|` values.
///
/// Trials whose trace fails (for example with a refinement error) count as changed.
pub fn perturbation_robustness(
    sup: &ModeSuperposition,
    volume: &Volume,
    epsilon: f64,
    n_trials: usize,
    seed: u64,
) -> Result<f64> {
    if n_trials == 0 {
        return Err(Error::InvalidVolume(
            "at least one trial is required".into(),
        ));
    }
    let reference = signature(&trace_vortex_lines(sup, volume)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut preserved = 0usize;
    for _ in 0..n_trials {
        let trial = perturb_coefficients(sup, epsilon, &mut rng)?;
        if let Ok(report) = trace_vortex_lines(&trial, volume) {
            if signature(&report) == reference {
                preserved += 1;
            }
        }
    }
    Ok(preserved as f64 / n_trials as f64)
}
