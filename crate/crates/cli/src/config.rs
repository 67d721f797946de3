use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use vortexlink::topology::Volume;
use vortexlink::twophoton::{CountingSetup, LinkQubitState, TwoPhotonState};
use vortexlink::{BeamGeometry, GridSpec};

/// Everything a run needs besides the subcommand flags. Every field has a default, so
/// `{}` is a valid configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub beam: BeamConfig,
    pub grid: GridConfig,
    pub volume: VolumeConfig,
    pub state: StateConfig,
    pub rates: RateConfig,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            beam: BeamConfig::default(),
            grid: GridConfig::default(),
            volume: VolumeConfig::default(),
            state: StateConfig::default(),
            rates: RateConfig::default(),
            out_dir: PathBuf::from("out"),
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BeamConfig {
    pub wavelength_m: f64,
    pub waist_m: f64,
}

impl Default for BeamConfig {
    fn default() -> Self {
        Self {
            wavelength_m: 710e-9,
            waist_m: 1e-3,
        }
    }
}

/// Transverse grid; the extent is in units of the beam waist.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub samples: usize,
    pub half_extent_waists: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            samples: 256,
            half_extent_waists: 4.0,
        }
    }
}

/// Tracing volume: transverse extent in waists, axial extent `±z_extent_rayleigh · z_R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VolumeConfig {
    pub samples: usize,
    pub half_extent_waists: f64,
    pub z_extent_rayleigh: f64,
    pub planes: usize,
}

impl Default for VolumeConfig {
    fn default() -> Self {
        Self {
            samples: 192,
            half_extent_waists: 3.0,
            z_extent_rayleigh: 1.0,
            planes: 129,
        }
    }
}

/// Two-photon state: link-subspace weights and the bandwidth model for the full basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StateConfig {
    pub c0: f64,
    pub c2: f64,
    pub gamma: f64,
    pub max_order: u32,
}

impl Default for StateConfig {
    fn default() -> Self {
        Self {
            c0: 0.76,
            c2: 0.64,
            gamma: 0.8,
            max_order: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateConfig {
    pub pair_rate: f64,
    pub singles_s: f64,
    pub singles_i: f64,
    pub gate_s: f64,
    pub integration_s: f64,
}

impl Default for RateConfig {
    fn default() -> Self {
        Self {
            pair_rate: 0.1,
            singles_s: 200.0,
            singles_i: 200.0,
            gate_s: 10e-9,
            integration_s: 1e4,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("malformed config {}", path.display()))
    }

    pub fn beam(&self) -> Result<BeamGeometry> {
        Ok(BeamGeometry::new(
            self.beam.wavelength_m,
            self.beam.waist_m,
        )?)
    }

    pub fn grid(&self) -> Result<GridSpec> {
        let beam = self.beam()?;
        let g = self.grid;
        Ok(GridSpec::new(
            g.samples,
            g.samples,
            g.half_extent_waists * beam.waist(),
        )?)
    }

    pub fn volume(&self) -> Result<Volume> {
        let beam = self.beam()?;
        let v = self.volume;
        let grid = GridSpec::new(v.samples, v.samples, v.half_extent_waists * beam.waist())?;
        let z = v.z_extent_rayleigh * beam.rayleigh_range();
        Ok(Volume::new(grid, -z, z, v.planes)?)
    }

    pub fn link_state(&self) -> Result<LinkQubitState> {
        Ok(LinkQubitState::real(self.state.c0, self.state.c2)?)
    }

    pub fn bandwidth_state(&self) -> Result<TwoPhotonState> {
        Ok(TwoPhotonState::bandwidth_model(
            self.state.gamma,
            self.state.max_order,
        )?)
    }

    pub fn counting(&self) -> CountingSetup {
        let r = self.rates;
        CountingSetup {
            pair_rate: r.pair_rate,
            singles_s: r.singles_s,
            singles_i: r.singles_i,
            gate: r.gate_s,
            integration: r.integration_s,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let c: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, RunConfig::default());
        let partial: RunConfig = serde_json::from_str(r#"{"grid": {"samples": 64}}"#).unwrap();
        assert_eq!(partial.grid.samples, 64);
        assert_eq!(partial.grid.half_extent_waists, 4.0);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"grid": {"size": 64}}"#).is_err());
    }

    #[test]
    fn defaults_build_valid_geometry() {
        let c = RunConfig::default();
        assert_eq!(c.grid().unwrap().nx(), 256);
        let v = c.volume().unwrap();
        assert_eq!(v.nz, 129);
        assert!((v.z_max - c.beam().unwrap().rayleigh_range()).abs() < 1e-12);
    }
}
