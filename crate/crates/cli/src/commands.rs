use std::io::Write;
use std::path::{Path, PathBuf};

use metaline::circuit::{sweep, SweepOutcome};
use metaline::dispersion::{consistency_report, dispersion_curve, ConsistencyReport};
use metaline::export::{
    write_dispersion_csv, write_group_delay_csv, write_metrics_csv, write_sweep_csv,
};
use metaline::metrics::{compare_sweeps, compute_metrics, metrics_table, FilterMetrics, SweepComparison};
use metaline::sweep::group_delay;
use metaline::synthesis::{synthesize, SynthesisResult};
use metaline::touchstone::{read_s2p, write_s2p, Touchstone};
use metaline::{FrequencyGrid, Topology};
use serde::Serialize;

use crate::config::{RunConfig, SynthesisSettings};
use crate::error::CliError;

/// Command-line overrides applied on top of a loaded config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub points: Option<usize>,
    pub start_hz: Option<f64>,
    pub stop_hz: Option<f64>,
    pub stages: Option<usize>,
    pub z0_ohm: Option<f64>,
    pub swap_inductors: bool,
    pub topology: Option<Topology>,
    pub seed: Option<u64>,
}

impl Overrides {
    fn touches_grid(&self) -> bool {
        self.points.is_some() || self.start_hz.is_some() || self.stop_hz.is_some()
    }

    fn grid(&self, g: &FrequencyGrid) -> Result<FrequencyGrid, CliError> {
        FrequencyGrid::new(
            self.start_hz.unwrap_or(g.start_hz),
            self.stop_hz.unwrap_or(g.stop_hz),
            self.points.unwrap_or(g.points),
            g.spacing,
        )
        .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn apply(&self, mut cfg: RunConfig) -> Result<RunConfig, CliError> {
        if let Some(out) = &self.out {
            cfg.output.dir = out.clone();
        }
        if self.touches_grid() {
            cfg.grid = self.grid(&cfg.grid)?;
            let synth_grid = cfg.synthesis_config()?.grid;
            let s = cfg.synthesis.get_or_insert_with(SynthesisSettings::default);
            s.grid = Some(self.grid(&synth_grid)?);
        }
        if let Some(n) = self.stages {
            cfg.stages = n;
            cfg.synthesis.get_or_insert_with(SynthesisSettings::default).stages = Some(n);
        }
        if let Some(z0) = self.z0_ohm {
            cfg.z0_ohm = z0;
        }
        if self.swap_inductors {
            cfg.cell.swap_inductors = true;
        }
        if let Some(t) = self.topology {
            cfg.cell.topology = t;
        }
        if let Some(seed) = self.seed {
            cfg.synthesis.get_or_insert_with(SynthesisSettings::default).seed = Some(seed);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| CliError::Data(e.to_string()))?;
    Ok(())
}

fn output_path(cfg: &RunConfig, suffix: &str) -> PathBuf {
    cfg.output.dir.join(format!("{}{suffix}", cfg.output.stem))
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable");
    s.push('\n');
    s.into_bytes()
}

fn csv_bytes(
    f: impl FnOnce(&mut Vec<u8>) -> metaline::Result<()>,
) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

/// Frequency with a unit suited to its size.
pub fn fmt_hz(f: f64) -> String {
    if f >= 1e9 {
        format!("{:.4} GHz", f / 1e9)
    } else if f >= 1e6 {
        format!("{:.3} MHz", f / 1e6)
    } else {
        format!("{:.3} kHz", f / 1e3)
    }
}

fn describe_run(cfg: &RunConfig, stages: usize, grid: &FrequencyGrid) -> String {
    format!(
        "{}, {} topology, {} stage(s), z0 {} ohm, {} to {} in {} points",
        cfg.cell.interpretation(),
        match cfg.cell.topology {
            Topology::SymmetricT => "symmetric T",
            Topology::LSection => "L-section",
        },
        stages,
        cfg.z0_ohm,
        fmt_hz(grid.start_hz),
        fmt_hz(grid.stop_hz),
        grid.points
    )
}

#[derive(Debug)]
pub struct Report {
    /// Human summary for standard output.
    pub text: String,
    pub files: Vec<PathBuf>,
    /// Printed to standard error; do not change the exit code.
    pub warnings: Vec<String>,
}

#[derive(Debug)]
pub struct SimulateOutput {
    pub outcome: SweepOutcome,
    pub metrics: metaline::Result<FilterMetrics>,
    pub report: Report,
}

pub fn simulate(cfg: &RunConfig) -> Result<SimulateOutput, CliError> {
    let outcome = sweep(&cfg.cell, &cfg.grid, cfg.stages, cfg.z0_ohm)?;
    let table = &outcome.table;
    let header = format!("metaline sweep: {}", describe_run(cfg, cfg.stages, &cfg.grid));
    let mut files = Vec::new();

    let s2p = output_path(cfg, ".s2p");
    write_atomic(
        &s2p,
        write_s2p(table, cfg.output.touchstone_format, cfg.output.frequency_unit, &[&header])
            .as_bytes(),
    )?;
    files.push(s2p);
    let csv = output_path(cfg, "_sweep.csv");
    write_atomic(&csv, &csv_bytes(|b| write_sweep_csv(table, b))?)?;
    files.push(csv);
    if table.len() >= 3 {
        let gd = group_delay(table)?;
        let path = output_path(cfg, "_group_delay.csv");
        write_atomic(&path, &csv_bytes(|b| write_group_delay_csv(&gd, b))?)?;
        files.push(path);
    }

    let metrics = compute_metrics(table);
    let mut text = format!("{header}\n");
    let mut warnings = Vec::new();
    if !outcome.gaps.is_empty() {
        warnings.push(format!(
            "{} singular frequencies skipped (first at {})",
            outcome.gaps.len(),
            fmt_hz(outcome.gaps[0].frequency_hz)
        ));
    }
    if let Ok(m) = &metrics {
        text.push_str(&metrics_table(&[("simulated", m)]));
        text.push_str(&format!(
            "3-dB edges {} / {}, peak at {}",
            fmt_hz(m.f_cl_hz),
            fmt_hz(m.f_cu_hz),
            fmt_hz(m.peak_frequency_hz)
        ));
        if let Some(gd) = m.group_delay_s_at_f0 {
            text.push_str(&format!(", group delay at f0 {:.3} ns", gd * 1e9));
        }
        text.push('\n');
        let path = output_path(cfg, "_metrics.json");
        write_atomic(&path, &json(m))?;
        files.push(path);
    }
    Ok(SimulateOutput {
        outcome,
        metrics,
        report: Report {
            text,
            files,
            warnings,
        },
    })
}

pub fn render_consistency(r: &ConsistencyReport) -> String {
    let num = |v: Option<f64>| v.map_or_else(|| "-".to_string(), fmt_hz);
    let dev = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |d| format!("{:.2}%", 100.0 * d));
    let rows = [
        ("lower cutoff f_cl", r.closed_form.f_cl_hz, r.numeric.f_cl_hz, r.deviations.f_cl),
        ("upper cutoff f_cu", r.closed_form.f_cu_hz, r.numeric.f_cu_hz, r.deviations.f_cu),
        ("transmission zero f_z", r.closed_form.f_z_hz, r.numeric.f_z_hz, r.deviations.f_z),
    ];
    let mut out = format!("Consistency report ({})\n", r.interpretation);
    out.push_str(&format!(
        "  {:<24}{:>14}{:>16}{:>11}\n",
        "", "closed form", "numeric", "deviation"
    ));
    for (name, closed, numeric, d) in rows {
        out.push_str(&format!(
            "  {:<24}{:>14}{:>16}{:>11}\n",
            name,
            fmt_hz(closed),
            num(numeric),
            dev(d)
        ));
    }
    out.push_str(&format!(
        "  {:<24}{:>14}\n",
        "pass-band center",
        fmt_hz(r.closed_form.center_hz)
    ));
    out.push_str(&format!(
        "Numeric pass-bands between {} and {}:\n",
        fmt_hz(r.numeric.scan_start_hz),
        fmt_hz(r.numeric.scan_stop_hz)
    ));
    if r.numeric.bands.is_empty() {
        out.push_str("  none\n");
    }
    for b in &r.numeric.bands {
        out.push_str(&format!("  {} to {}\n", fmt_hz(b.f_cl_hz), fmt_hz(b.f_cu_hz)));
    }
    out.push_str(&format!(
        "C/(4 C_L) = {:.3}: sharpness condition {}\n",
        r.c_over_4c_l,
        if r.sharpness_condition { "met" } else { "not met" }
    ));
    if let (Some(reference), Some(ratio)) = (r.reference_center_hz, r.center_ratio) {
        out.push_str(&format!(
            "Reference center {}: closed-form center is {:.3}x{}\n",
            fmt_hz(reference),
            ratio,
            if r.center_mismatch { " (MISMATCH)" } else { "" }
        ));
    }
    if !r.notes.is_empty() {
        out.push_str("Notes:\n");
        for n in &r.notes {
            out.push_str(&format!("  - {n}\n"));
        }
    }
    out
}

#[derive(Debug)]
pub struct DispersionOutput {
    pub consistency: ConsistencyReport,
    pub report: Report,
}

pub fn dispersion(cfg: &RunConfig) -> Result<DispersionOutput, CliError> {
    let curve = dispersion_curve(&cfg.cell, &cfg.grid)?;
    let consistency = consistency_report(&cfg.cell, cfg.reference_center_hz)?;
    let text = render_consistency(&consistency);
    let mut files = Vec::new();

    let csv = output_path(cfg, "_dispersion.csv");
    write_atomic(&csv, &csv_bytes(|b| write_dispersion_csv(&curve.points, b))?)?;
    files.push(csv);
    let js = output_path(cfg, "_consistency.json");
    write_atomic(&js, &json(&consistency))?;
    files.push(js);
    let txt = output_path(cfg, "_consistency.txt");
    write_atomic(&txt, text.as_bytes())?;
    files.push(txt);

    let mut warnings = Vec::new();
    if !curve.gaps.is_empty() {
        warnings.push(format!(
            "{} singular frequencies skipped in the dispersion curve",
            curve.gaps.len()
        ));
    }
    Ok(DispersionOutput {
        consistency,
        report: Report {
            text,
            files,
            warnings,
        },
    })
}

#[derive(Debug)]
pub struct MetricsOutput {
    pub metrics: FilterMetrics,
    pub report: Report,
}

fn load_touchstone(path: &Path) -> Result<Touchstone, CliError> {
    read_s2p(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn file_label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn metrics(input: &Path, cfg: &RunConfig) -> Result<MetricsOutput, CliError> {
    let ts = load_touchstone(input)?;
    let m = compute_metrics(&ts.table)?;
    let label = file_label(input);
    let text = metrics_table(&[(&label, &m)]);
    let mut files = Vec::new();
    let js = output_path(cfg, "_metrics.json");
    write_atomic(&js, &json(&m))?;
    files.push(js);
    let csv = output_path(cfg, "_metrics.csv");
    write_atomic(&csv, &csv_bytes(|b| write_metrics_csv(&[(&label, &m)], b))?)?;
    files.push(csv);
    Ok(MetricsOutput {
        metrics: m,
        report: Report {
            text,
            files,
            warnings: ts.warnings,
        },
    })
}

#[derive(Debug)]
pub struct SynthOutput {
    pub result: SynthesisResult,
    /// Exact bytes of the result JSON file.
    pub result_json: Vec<u8>,
    pub report: Report,
}

pub fn synth(cfg: &RunConfig) -> Result<SynthOutput, CliError> {
    let scfg = cfg.synthesis_config()?;
    let result = synthesize(&scfg)?;
    let mut optimized = cfg.clone();
    optimized.cell = result.params;

    let mut text = format!(
        "metaline synth: {}\n",
        describe_run(cfg, scfg.stages, &scfg.grid)
    );
    text.push_str(&format!(
        "cost {:.6} after {} restart(s), best from restart {} ({} evaluations, seed {})\n",
        result.cost,
        result.restarts.len(),
        result.best_restart,
        result.evaluations,
        result.seed
    ));
    for (name, v) in result.params.named_values() {
        let shown = if name.ends_with("farad") {
            format!("{:.4} pF", v * 1e12)
        } else {
            format!("{:.4} nH", v * 1e9)
        };
        text.push_str(&format!("  {name:<10} {shown}\n"));
    }
    if let Some(m) = &result.metrics {
        text.push_str(&metrics_table(&[("synthesized", m)]));
    }
    let mut warnings = Vec::new();
    if result.converged {
        text.push_str("all mask requirements met\n");
    } else {
        warnings.push(format!(
            "mask not met ({} violation(s)); best design written anyway",
            result.violations.len()
        ));
        for v in &result.violations {
            text.push_str(&format!(
                "  violation: {} at {}: required {:.3}, achieved {:.3} ({:?})\n",
                v.requirement,
                fmt_hz(v.frequency_hz),
                v.required,
                v.achieved,
                v.unit
            ));
        }
    }

    let result_json = json(&result);
    let mut files = Vec::new();
    let rp = output_path(cfg, "_synthesis.json");
    write_atomic(&rp, &result_json)?;
    files.push(rp);
    let op = output_path(cfg, "_optimized.json");
    let mut cfg_text = optimized.to_json();
    cfg_text.push('\n');
    write_atomic(&op, cfg_text.as_bytes())?;
    files.push(op);

    Ok(SynthOutput {
        result,
        result_json,
        report: Report {
            text,
            files,
            warnings,
        },
    })
}

#[derive(Debug)]
pub struct CompareOutput {
    pub comparison: SweepComparison,
    pub report: Report,
}

pub fn compare(a: &Path, b: &Path, cfg: &RunConfig) -> Result<CompareOutput, CliError> {
    let ta = load_touchstone(a)?;
    let tb = load_touchstone(b)?;
    let c = compare_sweeps(&ta.table, &tb.table)?;
    let (la, lb) = (file_label(a), file_label(b));
    let mut text = format!(
        "compared {} points over {} to {}\n",
        c.points.len(),
        fmt_hz(c.overlap_hz[0]),
        fmt_hz(c.overlap_hz[1])
    );
    text.push_str(&format!(
        "max |delta s21| {:.6} dB, max |delta s11| {:.6} dB\n",
        c.max_abs_delta_s21_db, c.max_abs_delta_s11_db
    ));
    let rows: Vec<(&str, &FilterMetrics)> = [(la.as_str(), &c.metrics_a), (lb.as_str(), &c.metrics_b)]
        .into_iter()
        .filter_map(|(l, m)| m.as_ref().map(|m| (l, m)))
        .collect();
    if !rows.is_empty() {
        text.push_str(&metrics_table(&rows));
    }
    if let Some(d) = &c.metric_deltas {
        text.push_str(&format!(
            "delta (b - a): f0 {:+.3} MHz, bw {:+.3} MHz, il {:+.3} dB, rl {:+.3} dB\n",
            d.f0_hz / 1e6,
            d.bw3db_hz / 1e6,
            d.il_db,
            d.rl_db_at_f0
        ));
    }
    let mut warnings: Vec<String> = ta.warnings.into_iter().chain(tb.warnings).collect();
    warnings.extend(c.notes.iter().cloned());
    let path = output_path(cfg, "_compare.json");
    write_atomic(&path, &json(&c))?;
    Ok(CompareOutput {
        comparison: c,
        report: Report {
            text,
            files: vec![path],
            warnings,
        },
    })
}
