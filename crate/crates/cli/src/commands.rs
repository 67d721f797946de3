use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{ensure, Context, Result};
use serde::Serialize;
use vortexlink::export::sig9;
use vortexlink::fieldgrid::sample_plane;
use vortexlink::hologram::{
    first_order_field, normalized_overlap, synthesize_hologram, Encoding, HologramSpec,
};
use vortexlink::modes::hopf_link_superposition;
use vortexlink::topology::{plane_vortex_points, trace_vortex_lines};
use vortexlink::twophoton::{
    self, chsh_scan, coincidence_curves, coincidence_probability, correlation_matrix, linspace,
    normalize_unit_sum, simulate_counts, ChshSettings, Estimator, LinkAnalyzer,
};
use vortexlink::{LGIndex, ModeSuperposition};

use crate::config::RunConfig;
use crate::states::{named_state, state_file};
use crate::{EncodingArg, EstimatorArg, SourceArg, StateArgs};

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    let mut out = create(dir, name)?;
    out.write_all(text.as_bytes())?;
    if !text.ends_with('\n') {
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

fn anchor(text: &str) {
    println!("reproduces: {text}");
}

fn superposition(cfg: &RunConfig, args: &StateArgs) -> Result<ModeSuperposition> {
    match &args.state_file {
        Some(path) => state_file(path),
        None => named_state(&args.state, args.theta, cfg.beam()?),
    }
}

pub fn trace(cfg: &RunConfig, args: &StateArgs) -> Result<()> {
    anchor("a pair of linked vortex loops traced from the Hopf-link superposition");
    let sup = superposition(cfg, args)?;
    let report = trace_vortex_lines(&sup, &cfg.volume()?)?;
    write_text(&cfg.out_dir, "topology.json", &report.to_json()?)?;
    for (k, line) in report.lines.iter().enumerate() {
        line.write_csv(create(&cfg.out_dir, &format!("line_{k}.csv"))?)?;
    }
    println!(
        "closed loops: {}, open lines: {}, |linking|: {:?}",
        report.n_closed,
        report.n_open,
        report.linking_magnitudes()
    );
    Ok(())
}

#[derive(Serialize)]
struct HologramReport {
    encoding: Encoding,
    grating_cycles: f64,
    probe_waist_m: f64,
    fidelity: f64,
    analytic_vortices: usize,
    reconstructed_vortices: usize,
    vortex_radius_m: f64,
}

pub fn holo(
    cfg: &RunConfig,
    args: &StateArgs,
    encoding: EncodingArg,
    cycles: f64,
    probe_waists: f64,
) -> Result<()> {
    anchor("the off-axis phase hologram that measures a link state, checked by first-order reconstruction");
    let sup = superposition(cfg, args)?;
    let spec = HologramSpec {
        grating_cycles: cycles,
        grid: cfg.grid()?,
        encoding: match encoding {
            EncodingArg::NormalizedBlaze => Encoding::NormalizedBlaze,
            EncodingArg::AsPrinted => Encoding::AsPrinted,
        },
    };
    let waist = sup.beam().waist();
    let map = synthesize_hologram(&sup, &spec);
    let recovered = first_order_field(&map, &spec, probe_waists * waist)?;
    let target = sample_plane(&sup, 0.0, &spec.grid);
    let fidelity = normalized_overlap(&recovered, &target)?;

    let radius = 2.0 * waist;
    let count = |f| {
        plane_vortex_points(f)
            .iter()
            .filter(|p| p.position[0].hypot(p.position[1]) < radius)
            .count()
    };
    let report = HologramReport {
        encoding: spec.encoding,
        grating_cycles: cycles,
        probe_waist_m: probe_waists * waist,
        fidelity,
        analytic_vortices: count(&target),
        reconstructed_vortices: count(&recovered),
        vortex_radius_m: radius,
    };
    map.write_pgm(create(&cfg.out_dir, "hologram.pgm")?)?;
    map.write_csv(create(&cfg.out_dir, "hologram.csv")?)?;
    recovered.write_amplitude_pgm(create(&cfg.out_dir, "reconstruction_amplitude.pgm")?)?;
    recovered.write_phase_pgm(create(&cfg.out_dir, "reconstruction_phase.pgm")?)?;
    write_text(
        &cfg.out_dir,
        "hologram_report.json",
        &serde_json::to_string_pretty(&report)?,
    )?;
    println!(
        "fidelity: {}, vortices within 2 w0: {} analytic, {} reconstructed",
        sig9(fidelity),
        report.analytic_vortices,
        report.reconstructed_vortices
    );
    Ok(())
}

pub fn contrast_map(
    cfg: &RunConfig,
    dz_steps: usize,
    dz_range: f64,
    dtheta_steps: usize,
) -> Result<()> {
    anchor(
        "coincidence contrast under axial and rotational displacement of the idler link analyzer",
    );
    ensure!(
        dz_steps > 0 && dtheta_steps > 0,
        "step counts must be positive"
    );
    let beam = cfg.beam()?;
    let state = cfg.link_state()?.embed(beam);
    let signal = hopf_link_superposition(0.0, beam);
    let idler = signal.conjugate();
    let zr = beam.rayleigh_range();
    let dz = linspace(-dz_range * zr, dz_range * zr, dz_steps);
    let dtheta = linspace(-PI, PI, dtheta_steps);
    let map = twophoton::contrast_map(&state, &signal, &idler, &dz, &dtheta)?;
    let r = cfg.rates;
    let qc = map.to_quantum_contrast(r.pair_rate, r.singles_s, r.singles_i, r.gate_s)?;
    map.write_csv(create(&cfg.out_dir, "contrast_map.csv")?)?;
    qc.write_csv(create(&cfg.out_dir, "contrast_map_qc.csv")?)?;
    let (a, b, peak) = map.argmax();
    println!(
        "peak probability {} at dz = {} m, dtheta = {} rad; peak QC {}",
        sig9(peak),
        sig9(dz[a]),
        sig9(dtheta[b]),
        sig9(qc.values[a][b])
    );
    Ok(())
}

pub fn bell(cfg: &RunConfig, estimator: EstimatorArg, idler_steps: usize) -> Result<()> {
    anchor("coincidence fringes between rotated link analyzers and the CHSH parameter");
    ensure!(
        idler_steps >= 2,
        "at least two idler orientations are required"
    );
    let beam = cfg.beam()?;
    let qubit = cfg.link_state()?;
    let settings = ChshSettings::standard();
    let estimator = match estimator {
        EstimatorArg::Projective => Estimator::ProjectiveChsh,
        EstimatorArg::Visibility => Estimator::Visibility2Sqrt2,
    };
    let scan = chsh_scan(&qubit, &LinkAnalyzer::hopf(), estimator, settings)?;

    let signal_angles = [
        settings.theta_s,
        settings.theta_s_prime,
        settings.theta_s + PI / 2.0,
        settings.theta_s_prime + PI / 2.0,
    ];
    let curves = coincidence_curves(&qubit.embed(beam), beam, &signal_angles, idler_steps);
    let mut raw = create(&cfg.out_dir, "bell.csv")?;
    writeln!(raw, "theta_s_rad,theta_i_rad,coincidence")?;
    for (ts, ti, p) in &curves {
        writeln!(raw, "{},{},{}", sig9(*ts), sig9(*ti), sig9(*p))?;
    }
    raw.flush()?;

    // For each idler orientation the four signal orientations are rescaled to sum to one.
    let mut normalized = create(&cfg.out_dir, "bell_normalized.csv")?;
    writeln!(normalized, "theta_s_rad,theta_i_rad,coincidence")?;
    for k in 0..idler_steps {
        let column: Vec<_> = (0..signal_angles.len())
            .map(|s| curves[s * idler_steps + k])
            .collect();
        let unit = normalize_unit_sum(&column.iter().map(|c| c.2).collect::<Vec<_>>());
        for ((ts, ti, _), p) in column.iter().zip(unit) {
            writeln!(normalized, "{},{},{}", sig9(*ts), sig9(*ti), sig9(p))?;
        }
    }
    normalized.flush()?;

    write_text(&cfg.out_dir, "bell.json", &scan.to_json()?)?;
    println!(
        "estimator {}: S = {}, visibility = {}",
        estimator.name(),
        sig9(scan.s),
        sig9(scan.visibility)
    );
    Ok(())
}

pub fn corr_matrix(cfg: &RunConfig, source: SourceArg, max_ell: u32, max_p: u32) -> Result<()> {
    anchor("the modal correlation matrix of down-converted photon pairs");
    let beam = cfg.beam()?;
    let state = match source {
        SourceArg::Bandwidth => cfg.bandwidth_state()?,
        SourceArg::Link => cfg.link_state()?.embed(beam),
    };
    let max_ell = max_ell as i32;
    let modes: Vec<LGIndex> = (-max_ell..=max_ell)
        .flat_map(|ell| (0..=max_p).map(move |p| LGIndex::new(ell, p)))
        .collect();
    let matrix = correlation_matrix(&state, &modes, beam)?;
    let mut out = create(&cfg.out_dir, "corr_matrix.csv")?;
    writeln!(out, "signal_ell,signal_p,idler_ell,idler_p,probability")?;
    for (s, row) in modes.iter().zip(&matrix) {
        for (i, p) in modes.iter().zip(row) {
            writeln!(out, "{},{},{},{},{}", s.ell, s.p, i.ell, i.p, sig9(*p))?;
        }
    }
    out.flush()?;
    let total: f64 = matrix.iter().flatten().sum();
    println!(
        "{} modes, captured probability {}",
        modes.len(),
        sig9(total)
    );
    Ok(())
}

#[derive(Serialize)]
struct CountsDocument {
    seed: u64,
    settings: Vec<[f64; 2]>,
    records: Vec<twophoton::CoincidenceRecord>,
}

pub fn counts(cfg: &RunConfig, integration: Option<f64>) -> Result<()> {
    anchor("quantum contrast from simulated photon counting with accidental coincidences");
    let beam = cfg.beam()?;
    let state = cfg.link_state()?.embed(beam);
    let mut setup = cfg.counting();
    if let Some(t) = integration {
        setup.integration = t;
    }
    let c = ChshSettings::standard();
    let settings = vec![
        [c.theta_s, c.theta_i],
        [c.theta_s, c.theta_i_prime],
        [c.theta_s_prime, c.theta_i],
        [c.theta_s_prime, c.theta_i_prime],
    ];
    let unit = |m: ModeSuperposition| ModeSuperposition::normalized(m.terms().to_vec(), beam);
    let probabilities = settings
        .iter()
        .map(|&[ts, ti]| {
            let s = unit(hopf_link_superposition(ts, beam))?;
            let i = unit(hopf_link_superposition(ti, beam).conjugate())?;
            Ok(coincidence_probability(&state, &s, &i))
        })
        .collect::<Result<Vec<_>>>()?;
    let records = simulate_counts(&probabilities, &setup, cfg.seed)?;

    let mut out = create(&cfg.out_dir, "counts.csv")?;
    writeln!(
        out,
        "theta_s_rad,theta_i_rad,probability,coincidences,singles_s_counts,singles_i_counts,\
         quantum_contrast,expected_quantum_contrast,quantum_contrast_std_error"
    )?;
    for (&[ts, ti], r) in settings.iter().zip(&records) {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            sig9(ts),
            sig9(ti),
            sig9(r.probability),
            r.coincidences,
            r.singles_s_counts,
            r.singles_i_counts,
            r.quantum_contrast.map(sig9).unwrap_or_else(|| "nan".into()),
            sig9(r.expected_quantum_contrast),
            sig9(r.quantum_contrast_std_error)
        )?;
    }
    out.flush()?;
    let doc = CountsDocument {
        seed: cfg.seed,
        settings,
        records,
    };
    write_text(
        &cfg.out_dir,
        "counts.json",
        &serde_json::to_string_pretty(&doc)?,
    )?;
    for r in &doc.records {
        println!(
            "QC {} (expected {} +/- {})",
            r.quantum_contrast
                .map(sig9)
                .unwrap_or_else(|| "undefined".into()),
            sig9(r.expected_quantum_contrast),
            sig9(r.quantum_contrast_std_error)
        );
    }
    Ok(())
}
