//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::time::Instant;

use metaline::circuit::{s_parameters, sweep_frequencies, unit_cell_abcd};
use metaline::dispersion::{consistency_report, transmission_zero_closed, transmission_zero_numeric};
use metaline::metrics::{compute_metrics, SpecMask};
use metaline::optim::Lcg64;
use metaline::sweep::group_delay;
use metaline::synthesis::synthesize;
use metaline::touchstone::{parse_s2p, read_s2p, write_s2p, DataFormat, FrequencyUnit};
use metaline::{Abcd, Error, FrequencyGrid, SParameterPoint, SweepTable, Topology, UnitCellParams};
use metaline_cli::config::RunConfig;
use num_complex::Complex64;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn workspace(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn random_cell(rng: &mut Lcg64) -> UnitCellParams {
    let mut log_uniform = |lo: f64, hi: f64| (lo.ln() + rng.next_f64() * (hi / lo).ln()).exp();
    let values = [
        log_uniform(0.1e-12, 10e-12),
        log_uniform(0.1e-9, 30e-9),
        log_uniform(0.1e-12, 30e-12),
        log_uniform(0.1e-12, 30e-12),
        log_uniform(0.1e-9, 30e-9),
    ];
    let bits = rng.next_u64();
    UnitCellParams {
        include_series_inductor: bits & 1 == 0,
        topology: if bits & 2 == 0 { Topology::SymmetricT } else { Topology::LSection },
        swap_inductors: bits & 4 == 0,
        ..UnitCellParams::default()
    }
    .with_values(values)
}

fn network_algebra() -> Outcome {
    let start = Instant::now();
    let mut rng = Lcg64::new(2024);
    let freqs: Vec<f64> = (0..41).map(|i| 0.1e9 * 1.08f64.powi(i)).collect();
    let (mut recip, mut unit, mut trip) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let p = random_cell(&mut rng);
        let out = sweep_frequencies(&p, &freqs, 1, 50.0).map_err(|e| e.to_string())?;
        for s in out.table.points() {
            recip = recip.max((s.s21 - s.s12).norm());
            unit = unit.max((s.s11.norm_sqr() + s.s21.norm_sqr() - 1.0).abs());
            let m = unit_cell_abcd(&p, s.frequency_hz).map_err(|e| e.to_string())?;
            let back = Abcd::from_s(&m.to_s(s.frequency_hz, 50.0).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            trip = trip.max(back.relative_diff(&m));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(recip < 1e-12, format!("reciprocity {recip:e}"))?;
    check(unit < 1e-9, format!("unitarity {unit:e}"))?;
    check(trip < 1e-10, format!("round trip {trip:e}"))?;
    check(secs < 10.0, format!("runtime {secs:.2} s"))?;
    Ok(format!(
        "1000 cells: |s21-s12| {recip:.1e}, unitarity {unit:.1e}, round trip {trip:.1e}, {secs:.2} s"
    ))
}

fn transmission_zero() -> Outcome {
    let mut parts = Vec::new();
    for p in [UnitCellParams::default(), UnitCellParams::swapped()] {
        let closed = transmission_zero_closed(&p);
        let numeric =
            transmission_zero_numeric(&p, closed / 2.0, closed * 2.0).map_err(|e| e.to_string())?;
        let s21 = s_parameters(&p, numeric, 1, 50.0).map_err(|e| e.to_string())?.s21.norm();
        let d = rel(numeric, closed);
        check(d < 1e-6, format!("{}: zero deviation {d:e}", p.interpretation()))?;
        check(s21 < 1e-4, format!("{}: |s21| {s21:e}", p.interpretation()))?;
        parts.push(format!("{} {:.3} MHz (dev {d:.1e}, |s21| {s21:.1e})", p.interpretation(), numeric / 1e6));
    }
    Ok(parts.join("; "))
}

fn swapped_band() -> Outcome {
    let r = consistency_report(&UnitCellParams::swapped(), Some(730e6)).map_err(|e| e.to_string())?;
    let lo = r.numeric.f_cl_hz.ok_or("no numeric band")?;
    let hi = r.numeric.f_cu_hz.ok_or("no numeric band")?;
    let (dl, du) = (rel(lo, r.closed_form.f_cl_hz), rel(hi, r.closed_form.f_cu_hz));
    check(dl < 0.01 && du < 0.01, format!("edges vs closed forms {dl:.3e}, {du:.3e}"))?;
    let center = 0.5 * (lo + hi);
    check(rel(center, 730e6) < 0.05, format!("center {:.1} MHz", center / 1e6))?;
    check(
        rel(lo, 700e6) < 0.02 && rel(hi, 760e6) < 0.02,
        format!("edges {:.1}/{:.1} MHz vs 700/760", lo / 1e6, hi / 1e6),
    )?;
    Ok(format!(
        "numeric {:.1}-{:.1} MHz, closed {:.1}-{:.1} MHz, center {:.1} MHz",
        lo / 1e6,
        hi / 1e6,
        r.closed_form.f_cl_hz / 1e6,
        r.closed_form.f_cu_hz / 1e6,
        center / 1e6
    ))
}

fn as_labeled_mismatch() -> Outcome {
    let r = consistency_report(&UnitCellParams::default(), Some(730e6)).map_err(|e| e.to_string())?;
    let c = r.closed_form;
    check(rel(c.f_cl_hz, 2.73e9) < 0.01, format!("f_cl {:.4} GHz", c.f_cl_hz / 1e9))?;
    check(rel(c.f_cu_hz, 2.97e9) < 0.01, format!("f_cu {:.4} GHz", c.f_cu_hz / 1e9))?;
    let ratio = r.center_ratio.ok_or("no center ratio")?;
    check(r.center_mismatch && ratio > 3.0, format!("mismatch {} ratio {ratio:.2}", r.center_mismatch))?;
    Ok(format!(
        "closed {:.3}-{:.3} GHz, center {:.2}x the 730 MHz reference, flagged",
        c.f_cl_hz / 1e9,
        c.f_cu_hz / 1e9,
        ratio
    ))
}

fn metrics_fidelity() -> Outcome {
    let ts = read_s2p(workspace("crates/cli/tests/fixtures/edges_700_760.s2p")).map_err(|e| e.to_string())?;
    check(ts.table.len() >= 2001, "grid too coarse")?;
    let m = compute_metrics(&ts.table).map_err(|e| e.to_string())?;
    check(rel(m.f0_hz, 730e6) < 1e-9, format!("f0 {}", m.f0_hz))?;
    check(rel(m.bw3db_hz, 60e6) < 1e-9, format!("bw {}", m.bw3db_hz))?;
    check(rel(m.fbw_percent, 600.0 / 73.0) < 1e-9, format!("fbw {}", m.fbw_percent))?;
    let cells = m.table_cells();
    check(
        cells[0] == "0.73" && cells[1] == "60" && cells[2] == "8.2",
        format!("table cells {:?}", &cells[..3]),
    )?;
    Ok(format!(
        "f0 {:.6} MHz, bw {:.6} MHz, fbw {:.4}% -> {} / {} / {}",
        m.f0_hz / 1e6,
        m.bw3db_hz / 1e6,
        m.fbw_percent,
        cells[0],
        cells[1],
        cells[2]
    ))
}

fn synthesis_regression() -> Outcome {
    let cfg = RunConfig::load(&workspace("configs/synth.json")).map_err(|e| e.to_string())?;
    let sc = cfg.synthesis_config().map_err(|e| e.to_string())?;
    check(sc.mask == SpecMask::wpt_730mhz(), "configs/synth.json does not carry the 730 MHz mask")?;
    let start = Instant::now();
    let a = synthesize(&sc).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let b = synthesize(&sc).map_err(|e| e.to_string())?;
    check(a.converged, format!("not converged, cost {}", a.cost))?;
    check(a.violations.is_empty(), format!("{} violations", a.violations.len()))?;
    check(secs < 60.0, format!("runtime {secs:.2} s"))?;
    let (ja, jb) = (serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    check(ja == jb, "two runs with the same seed differ")?;
    let m = a.metrics.as_ref().ok_or("no metrics")?;
    Ok(format!(
        "converged at restart {}, f0 {:.1} MHz, bw {:.1} MHz, {secs:.2} s, repeatable",
        a.best_restart,
        m.f0_hz / 1e6,
        m.bw3db_hz / 1e6
    ))
}

fn touchstone_round_trip() -> Outcome {
    let grid = FrequencyGrid::linear(0.3e9, 1.2e9, 401).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for p in [UnitCellParams::default(), UnitCellParams::swapped()] {
        let table = metaline::circuit::sweep(&p, &grid, 2, 50.0).map_err(|e| e.to_string())?.table;
        for format in [DataFormat::Ri, DataFormat::Ma, DataFormat::Db] {
            for unit in [FrequencyUnit::Hz, FrequencyUnit::Mhz, FrequencyUnit::Ghz] {
                let text = write_s2p(&table, format, unit, &[]);
                let back = parse_s2p(&text).map_err(|e| e.to_string())?.table;
                check(back.len() == table.len(), "point count changed")?;
                for (x, y) in table.points().iter().zip(back.points()) {
                    check(x.frequency_hz == y.frequency_hz, "frequency changed")?;
                    for (u, v) in [(x.s11, y.s11), (x.s21, y.s21), (x.s12, y.s12), (x.s22, y.s22)] {
                        let scale = u.norm().max(1e-300);
                        worst = worst.max((u - v).norm() / scale);
                    }
                }
            }
        }
    }
    check(worst < 1e-6, format!("round trip error {worst:e}"))?;

    let fixture = |name: &str| workspace("crates/core/tests/fixtures").join(name);
    let expect = |name: &str, want: &dyn Fn(&Error) -> bool| -> Result<(), String> {
        match read_s2p(fixture(name)) {
            Err(e) if want(&e) => Ok(()),
            Err(e) => Err(format!("{name}: unexpected error {e}")),
            Ok(_) => Err(format!("{name}: parsed without error")),
        }
    };
    expect("wrong_count.s2p", &|e| matches!(e, Error::Parse { line: 3, .. }))?;
    expect("bad_number.s2p", &|e| matches!(e, Error::Parse { line: 3, .. }))?;
    expect("duplicate_option.s2p", &|e| matches!(e, Error::Parse { line: 3, .. }))?;
    expect("version2.s2p", &|e| matches!(e, Error::Unsupported(m) if m.contains("line 1")))?;
    expect("y_params.s2p", &|e| matches!(e, Error::Unsupported(m) if m.contains("line 2")))?;
    Ok(format!("RI/MA/DB x Hz/MHz/GHz on 401 points, worst {worst:.1e}; 5 malformed fixtures rejected with line numbers"))
}

fn delay_table(freqs: &[f64], s21: impl Fn(f64) -> Complex64) -> SweepTable {
    let points = freqs
        .iter()
        .map(|&f| SParameterPoint {
            frequency_hz: f,
            z0_ohm: 50.0,
            s11: Complex64::new(0.0, 0.0),
            s21: s21(f),
            s12: s21(f),
            s22: Complex64::new(0.0, 0.0),
        })
        .collect();
    SweepTable::new(50.0, points).unwrap()
}

fn group_delay_check() -> Outcome {
    let t = 1.3e-9;
    let grid = FrequencyGrid::linear(0.5e9, 1.5e9, 401).map_err(|e| e.to_string())?;
    let gd = group_delay(&delay_table(&grid.frequencies(), |f| {
        Complex64::from_polar(1.0, -TAU * f * t)
    }))
    .map_err(|e| e.to_string())?;
    let worst = gd.iter().map(|g| rel(g.delay_s, t)).fold(0.0, f64::max);
    check(worst < 1e-3, format!("pure delay error {worst:e}"))?;

    // Series inductor between matched ports: the phase is nonlinear, so the
    // central difference carries an O(h^2) error.
    let (l, z0, f0) = (20e-9, 50.0, 600e6);
    let k = TAU * f0 * l / (2.0 * z0);
    let exact = (l / (2.0 * z0)) / (1.0 + k * k);
    let error_at = |h: f64| {
        let table = delay_table(&[f0 - h, f0, f0 + h], |f| {
            Complex64::new(1.0, 0.0) / Complex64::new(1.0, TAU * f * l / (2.0 * z0))
        });
        (group_delay(&table).unwrap()[1].delay_s - exact).abs()
    };
    let ratio = error_at(40e6) / error_at(20e6);
    check((ratio - 4.0).abs() < 0.1, format!("refinement ratio {ratio:.3}"))?;
    Ok(format!("exp(-jwT) worst error {worst:.1e}; halving the step cuts the error by {ratio:.3}"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("network algebra", network_algebra),
        ("transmission zero", transmission_zero),
        ("swapped band placement", swapped_band),
        ("as-labeled mismatch", as_labeled_mismatch),
        ("metrics fidelity", metrics_fidelity),
        ("synthesis regression", synthesis_regression),
        ("touchstone round trip", touchstone_round_trip),
        ("group delay", group_delay_check),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1)
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
