//! CSV output for sweeps, dispersion curves, group delay and metrics.

use std::io::Write;

use serde::Serialize;

use crate::dispersion::DispersionPoint;
use crate::error::Result;
use crate::metrics::FilterMetrics;
use crate::sweep::{db20, GroupDelayPoint, SweepTable};

#[derive(Serialize)]
struct SweepRow {
    frequency_hz: f64,
    s11_re: f64,
    s11_im: f64,
    s21_re: f64,
    s21_im: f64,
    s12_re: f64,
    s12_im: f64,
    s22_re: f64,
    s22_im: f64,
    s11_db: f64,
    s21_db: f64,
}

pub fn write_sweep_csv<W: Write>(table: &SweepTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in table.points() {
        w.serialize(SweepRow {
            frequency_hz: p.frequency_hz,
            s11_re: p.s11.re,
            s11_im: p.s11.im,
            s21_re: p.s21.re,
            s21_im: p.s21.im,
            s12_re: p.s12.re,
            s12_im: p.s12.im,
            s22_re: p.s22.re,
            s22_im: p.s22.im,
            s11_db: db20(p.s11),
            s21_db: db20(p.s21),
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct DispersionRow {
    frequency_hz: f64,
    re_g: f64,
    beta_l_rad: f64,
    alpha_l_neper: f64,
    regime: &'static str,
}

pub fn write_dispersion_csv<W: Write>(points: &[DispersionPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(DispersionRow {
            frequency_hz: p.frequency_hz,
            re_g: p.g.re,
            beta_l_rad: p.beta_l_rad,
            alpha_l_neper: p.alpha_l_neper,
            regime: p.regime.as_str(),
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_group_delay_csv<W: Write>(points: &[GroupDelayPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct MetricsRow<'a> {
    label: &'a str,
    f0_hz: f64,
    bw3db_hz: f64,
    fbw_percent: f64,
    il_db: f64,
    rl_db_at_f0: f64,
    f_cl_hz: f64,
    f_cu_hz: f64,
    att_db_at_08fcl: Option<f64>,
    att_db_at_12fcu: Option<f64>,
    group_delay_s_at_f0: Option<f64>,
}

/// One row per labelled metrics set; missing values are empty cells.
pub fn write_metrics_csv<W: Write>(rows: &[(&str, &FilterMetrics)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (label, m) in rows {
        w.serialize(MetricsRow {
            label,
            f0_hz: m.f0_hz,
            bw3db_hz: m.bw3db_hz,
            fbw_percent: m.fbw_percent,
            il_db: m.il_db,
            rl_db_at_f0: m.rl_db_at_f0,
            f_cl_hz: m.f_cl_hz,
            f_cu_hz: m.f_cu_hz,
            att_db_at_08fcl: m.att_db_at_08fcl,
            att_db_at_12fcu: m.att_db_at_12fcu,
            group_delay_s_at_f0: m.group_delay_s_at_f0,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{sweep, UnitCellParams};
    use crate::dispersion::dispersion_curve;
    use crate::grid::FrequencyGrid;

    #[test]
    fn sweep_columns_and_rows() {
        let grid = FrequencyGrid::linear(0.5e9, 1.0e9, 5).unwrap();
        let t = sweep(&UnitCellParams::swapped(), &grid, 1, 50.0).unwrap().table;
        let mut buf = Vec::new();
        write_sweep_csv(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "frequency_hz,s11_re,s11_im,s21_re,s21_im,s12_re,s12_im,s22_re,s22_im,s11_db,s21_db"
        );
        assert_eq!(lines.count(), 5);
    }

    #[test]
    fn dispersion_columns() {
        let grid = FrequencyGrid::linear(0.5e9, 1.0e9, 3).unwrap();
        let c = dispersion_curve(&UnitCellParams::swapped(), &grid).unwrap();
        let mut buf = Vec::new();
        write_dispersion_csv(&c.points, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("frequency_hz,re_g,beta_l_rad,alpha_l_neper,regime\n"));
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn group_delay_columns() {
        let mut buf = Vec::new();
        write_group_delay_csv(
            &[GroupDelayPoint {
                frequency_hz: 1.0,
                delay_s: 2.0,
            }],
            &mut buf,
        )
        .unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "frequency_hz,delay_s\n1.0,2.0\n");
    }
}
