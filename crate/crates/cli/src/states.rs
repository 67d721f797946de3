use std::path::Path;

use anyhow::{bail, Context, Result};
use vortexlink::modes::{hopf_link_superposition, p_hopf_state};
use vortexlink::{BeamGeometry, LGIndex, ModeSuperposition};

/// Resolves `hopf-link`, `p-hopf` or `lg:<ell>,<p>`.
pub fn named_state(name: &str, theta: f64, beam: BeamGeometry) -> Result<ModeSuperposition> {
    match name {
        "hopf-link" => Ok(hopf_link_superposition(theta, beam)),
        "p-hopf" => Ok(p_hopf_state(beam)),
        other => {
            let Some(spec) = other.strip_prefix("lg:") else {
                bail!("unknown state `{other}` (expected hopf-link, p-hopf or lg:<ell>,<p>)");
            };
            let (ell, p) = spec
                .split_once(',')
                .with_context(|| format!("state `{other}` must look like lg:<ell>,<p>"))?;
            let ell: i32 = ell
                .trim()
                .parse()
                .with_context(|| format!("bad ell in `{other}`"))?;
            let p: u32 = p
                .trim()
                .parse()
                .with_context(|| format!("bad p in `{other}`"))?;
            Ok(ModeSuperposition::single(LGIndex::new(ell, p), beam))
        }
    }
}

/// Reads a superposition document from `path`.
pub fn state_file(path: &Path) -> Result<ModeSuperposition> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read state file {}", path.display()))?;
    ModeSuperposition::from_json(&text)
        .with_context(|| format!("invalid state file {}", path.display()))
}
