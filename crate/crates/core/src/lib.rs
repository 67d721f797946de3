//! Simulation and analysis of linked optical vortex loops.
//!
//! The crate covers the whole chain from mode algebra to photon counting:
//!
//! * [`modes`]: Laguerre-Gaussian modes, superpositions, Gouy and rotation phases.
//! * [`fieldgrid`]: sampling onto transverse grids, quadrature overlaps and
//!   angular-spectrum propagation.
//! * [`topology`]: phase-singularity detection, 3D vortex-line tracing and
//!   Gauss linking numbers.
//! * [`hologram`]: off-axis phase-only holograms and their first-order
//!   reconstruction.
//! * [`twophoton`]: down-converted two-photon states, coincidence predictions,
//!   quantum contrast, CHSH scans and Monte Carlo counting.

pub mod error;
pub mod export;
pub mod fieldgrid;
pub mod hologram;
pub mod modes;
pub mod topology;
pub mod twophoton;

pub use error::{Error, Result};
pub use fieldgrid::{GridSpec, SampledField};
pub use modes::{BeamGeometry, LGIndex, ModeSuperposition};
