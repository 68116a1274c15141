//! Band-pass figures of merit, requirement masks and sweep comparison.

use serde::{Deserialize, Serialize};

use crate::error::{BandSide, Error, Result};
use crate::sweep::{db20, group_delay, SweepTable};

/// Figures of merit of a single pass-band.
///
/// Edges are the (peak − 3 dB) crossings of |s21| walking outward from the
/// transmission peak, linearly interpolated in dB. Loss and attenuation values
/// are positive dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterMetrics {
    pub f0_hz: f64,
    pub bw3db_hz: f64,
    pub fbw_percent: f64,
    pub il_db: f64,
    pub rl_db_at_f0: f64,
    pub f_cl_hz: f64,
    pub f_cu_hz: f64,
    pub peak_frequency_hz: f64,
    /// `None` when 0.8·f_cl falls outside the sweep.
    pub att_db_at_08fcl: Option<f64>,
    /// `None` when 1.2·f_cu falls outside the sweep.
    pub att_db_at_12fcu: Option<f64>,
    /// `None` for sweeps shorter than three points.
    pub group_delay_s_at_f0: Option<f64>,
}

/// Linear interpolation of `ys` over increasing `xs`; `None` outside the range.
fn interp(xs: &[f64], ys: &[f64], x: f64) -> Option<f64> {
    let (first, last) = (*xs.first()?, *xs.last()?);
    if !(x >= first && x <= last) {
        return None;
    }
    let i = xs.partition_point(|&v| v < x);
    if xs[i] == x || i == 0 {
        return Some(ys[i]);
    }
    let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    Some(ys[i - 1] + t * (ys[i] - ys[i - 1]))
}

/// Frequency where the straight line through (f_a, d_a), (f_b, d_b) hits `level`.
fn crossing(f_a: f64, d_a: f64, f_b: f64, d_b: f64, level: f64) -> f64 {
    f_a + (level - d_a) * (f_b - f_a) / (d_b - d_a)
}

pub fn compute_metrics(sweep: &SweepTable) -> Result<FilterMetrics> {
    if sweep.is_empty() {
        return Err(Error::EmptySweep);
    }
    let f = sweep.frequencies();
    let db = sweep.s21_db();
    let n = f.len();

    let mut peak = 0;
    for (i, &v) in db.iter().enumerate() {
        if v > db[peak] {
            peak = i;
        }
    }
    let threshold = db[peak] - 3.0;

    let mut lo = peak;
    while lo > 0 && db[lo] >= threshold {
        lo -= 1;
    }
    if db[lo] >= threshold {
        return Err(Error::BandNotBracketed {
            side: BandSide::Lower,
        });
    }
    let mut hi = peak;
    while hi < n - 1 && db[hi] >= threshold {
        hi += 1;
    }
    if db[hi] >= threshold {
        return Err(Error::BandNotBracketed {
            side: BandSide::Upper,
        });
    }

    let f_cl_hz = crossing(f[lo], db[lo], f[lo + 1], db[lo + 1], threshold);
    let f_cu_hz = crossing(f[hi - 1], db[hi - 1], f[hi], db[hi], threshold);
    let f0_hz = 0.5 * (f_cl_hz + f_cu_hz);
    let bw3db_hz = f_cu_hz - f_cl_hz;

    let nearest = sweep.nearest_index(f0_hz).unwrap_or(peak);
    let rl_db_at_f0 = -db20(sweep.points()[nearest].s11);

    let attenuation = |x: f64| interp(&f, &db, x).map(|v| -v);
    let group_delay_s_at_f0 = if n >= 3 {
        let gd = group_delay(sweep)?;
        let delays: Vec<f64> = gd.iter().map(|p| p.delay_s).collect();
        interp(&f, &delays, f0_hz)
    } else {
        None
    };

    Ok(FilterMetrics {
        f0_hz,
        bw3db_hz,
        fbw_percent: 100.0 * bw3db_hz / f0_hz,
        il_db: -db[peak],
        rl_db_at_f0,
        f_cl_hz,
        f_cu_hz,
        peak_frequency_hz: f[peak],
        att_db_at_08fcl: attenuation(0.8 * f_cl_hz),
        att_db_at_12fcu: attenuation(1.2 * f_cu_hz),
        group_delay_s_at_f0,
    })
}

const TABLE_HEADER: [&str; 8] = [
    "",
    "f0 (GHz)",
    "3-dB BW (MHz)",
    "FBW (%)",
    "IL (dB)",
    "RL @ f0 (dB)",
    "Att @ 0.8 f_cl (dB)",
    "Att @ 1.2 f_cu (dB)",
];

fn optional(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.1}"))
}

impl FilterMetrics {
    /// Values rounded the way a comparison table prints them.
    pub fn table_cells(&self) -> [String; 7] {
        [
            format!("{:.2}", self.f0_hz / 1e9),
            format!("{:.0}", self.bw3db_hz / 1e6),
            format!("{:.1}", self.fbw_percent),
            format!("{:.1}", self.il_db),
            format!("{:.0}", self.rl_db_at_f0),
            optional(self.att_db_at_08fcl),
            optional(self.att_db_at_12fcu),
        ]
    }
}

/// Aligned text table, one row per labelled metrics set.
pub fn metrics_table(rows: &[(&str, &FilterMetrics)]) -> String {
    let mut cells: Vec<Vec<String>> = vec![TABLE_HEADER.iter().map(|s| s.to_string()).collect()];
    for (label, m) in rows {
        let mut row = vec![label.to_string()];
        row.extend(m.table_cells());
        cells.push(row);
    }
    let widths: Vec<usize> = (0..TABLE_HEADER.len())
        .map(|c| cells.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &cells {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (s, w))| {
                if c == 0 {
                    format!("{s:<w$}")
                } else {
                    format!("{s:>w$}")
                }
            })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Where a stop-band requirement applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MaskFrequency {
    Absolute { hz: f64 },
    /// `factor` times the measured lower 3-dB edge.
    LowerEdge { factor: f64 },
    /// `factor` times the measured upper 3-dB edge.
    UpperEdge { factor: f64 },
}

impl MaskFrequency {
    pub fn resolve(&self, m: &FilterMetrics) -> f64 {
        match *self {
            MaskFrequency::Absolute { hz } => hz,
            MaskFrequency::LowerEdge { factor } => factor * m.f_cl_hz,
            MaskFrequency::UpperEdge { factor } => factor * m.f_cu_hz,
        }
    }

    fn label(&self) -> String {
        match *self {
            MaskFrequency::Absolute { hz } => format!("{:.4} GHz", hz / 1e9),
            MaskFrequency::LowerEdge { factor } => format!("{factor}*f_cl"),
            MaskFrequency::UpperEdge { factor } => format!("{factor}*f_cu"),
        }
    }

    fn value(&self) -> f64 {
        match *self {
            MaskFrequency::Absolute { hz } => hz,
            MaskFrequency::LowerEdge { factor } | MaskFrequency::UpperEdge { factor } => factor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopbandRequirement {
    pub at: MaskFrequency,
    pub min_attenuation_db: f64,
}

/// A target frequency with a symmetric tolerance in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Target {
    pub value_hz: f64,
    pub tolerance_percent: f64,
}

fn default_shaping_weight() -> f64 {
    100.0
}

/// Pass-band and stop-band requirements for a filter response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecMask {
    /// Interval in which the insertion-loss requirement is checked.
    pub passband_hz: [f64; 2],
    #[serde(default)]
    pub max_il_db: Option<f64>,
    #[serde(default)]
    pub min_rl_db: Option<f64>,
    #[serde(default)]
    pub stopband: Vec<StopbandRequirement>,
    #[serde(default)]
    pub center: Option<Target>,
    #[serde(default)]
    pub bandwidth: Option<Target>,
    /// Cost weight of the center and bandwidth terms (squared percent excess).
    #[serde(default = "default_shaping_weight")]
    pub shaping_weight: f64,
}

impl SpecMask {
    /// 700-760 MHz band: IL ≤ 0.4 dB, RL ≥ 26 dB, ≥ 52 dB at 0.8·f_cl,
    /// ≥ 20 dB at 1.2·f_cu, center 730 MHz ± 1%, 3-dB bandwidth 60 MHz ± 10%.
    pub fn wpt_730mhz() -> Self {
        Self {
            passband_hz: [700e6, 760e6],
            max_il_db: Some(0.4),
            min_rl_db: Some(26.0),
            stopband: vec![
                StopbandRequirement {
                    at: MaskFrequency::LowerEdge { factor: 0.8 },
                    min_attenuation_db: 52.0,
                },
                StopbandRequirement {
                    at: MaskFrequency::UpperEdge { factor: 1.2 },
                    min_attenuation_db: 20.0,
                },
            ],
            center: Some(Target {
                value_hz: 730e6,
                tolerance_percent: 1.0,
            }),
            bandwidth: Some(Target {
                value_hz: 60e6,
                tolerance_percent: 10.0,
            }),
            shaping_weight: default_shaping_weight(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let [f1, f2] = self.passband_hz;
        if !(f1 > 0.0 && f2 > f1 && f2.is_finite()) {
            return Err(Error::InvalidMask(format!(
                "pass-band interval must satisfy 0 < f1 < f2, got [{f1}, {f2}]"
            )));
        }
        let positive = |what: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidMask(format!("{what} must be positive, got {v}")))
            }
        };
        let non_negative = |what: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidMask(format!("{what} must be non-negative, got {v}")))
            }
        };
        if let Some(v) = self.max_il_db {
            non_negative("max_il_db", v)?;
        }
        if let Some(v) = self.min_rl_db {
            non_negative("min_rl_db", v)?;
        }
        for s in &self.stopband {
            positive("stop-band frequency", s.at.value())?;
            non_negative("min_attenuation_db", s.min_attenuation_db)?;
        }
        for (what, t) in [("center", self.center), ("bandwidth", self.bandwidth)] {
            if let Some(t) = t {
                positive(&format!("{what} value_hz"), t.value_hz)?;
                positive(&format!("{what} tolerance_percent"), t.tolerance_percent)?;
            }
        }
        if !(self.shaping_weight >= 0.0 && self.shaping_weight.is_finite()) {
            return Err(Error::InvalidMask(format!(
                "shaping_weight must be non-negative, got {}",
                self.shaping_weight
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Db,
    Percent,
}

/// One unmet requirement. `shortfall` is how far the achieved value misses the
/// required one, in `unit`, and is always positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskViolation {
    pub requirement: String,
    pub frequency_hz: f64,
    pub required: f64,
    pub achieved: f64,
    pub shortfall: f64,
    pub unit: Unit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaskEvaluation {
    pub violations: Vec<MaskViolation>,
    /// Σ shortfall² over dB requirements plus shaping_weight · Σ shortfall²
    /// over the percent targets.
    pub cost: f64,
    pub metrics: FilterMetrics,
}

fn covered(sweep: &SweepTable, what: &str, f: f64) -> Result<()> {
    let (start_hz, stop_hz) = sweep.range().ok_or(Error::EmptySweep)?;
    if f >= start_hz && f <= stop_hz {
        Ok(())
    } else {
        Err(Error::Coverage {
            what: what.to_string(),
            frequency_hz: f,
            start_hz,
            stop_hz,
        })
    }
}

/// Checks `sweep` against `mask`. The violation list is empty exactly when the
/// cost is zero.
pub fn evaluate_mask(sweep: &SweepTable, mask: &SpecMask) -> Result<MaskEvaluation> {
    mask.validate()?;
    let metrics = compute_metrics(sweep)?;
    let f = sweep.frequencies();
    let db = sweep.s21_db();
    let mut violations = Vec::new();
    let mut cost = 0.0;

    let mut push = |requirement: String, frequency_hz, required, achieved, shortfall: f64, unit| {
        if shortfall > 0.0 {
            cost += match unit {
                Unit::Db => shortfall * shortfall,
                Unit::Percent => mask.shaping_weight * shortfall * shortfall,
            };
            violations.push(MaskViolation {
                requirement,
                frequency_hz,
                required,
                achieved,
                shortfall,
                unit,
            });
        }
    };

    let [f1, f2] = mask.passband_hz;
    if let Some(max_il) = mask.max_il_db {
        covered(sweep, "pass-band start", f1)?;
        covered(sweep, "pass-band end", f2)?;
        // Best transmission anywhere in [f1, f2], including the interpolated ends.
        let mut best = (f1, interp(&f, &db, f1).unwrap_or(f64::NEG_INFINITY));
        for (&fi, &di) in f.iter().zip(&db) {
            if fi > f1 && fi <= f2 && di > best.1 {
                best = (fi, di);
            }
        }
        if let Some(d2) = interp(&f, &db, f2) {
            if d2 > best.1 {
                best = (f2, d2);
            }
        }
        let achieved = -best.1;
        push(
            "insertion loss".into(),
            best.0,
            max_il,
            achieved,
            (achieved - max_il).max(0.0),
            Unit::Db,
        );
    }
    if let Some(min_rl) = mask.min_rl_db {
        let achieved = metrics.rl_db_at_f0;
        push(
            "return loss at f0".into(),
            metrics.f0_hz,
            min_rl,
            achieved,
            (min_rl - achieved).max(0.0),
            Unit::Db,
        );
    }
    for s in &mask.stopband {
        let at = s.at.resolve(&metrics);
        let what = format!("stop-band attenuation at {}", s.at.label());
        covered(sweep, &what, at)?;
        let achieved = -interp(&f, &db, at).expect("covered");
        push(
            what,
            at,
            s.min_attenuation_db,
            achieved,
            (s.min_attenuation_db - achieved).max(0.0),
            Unit::Db,
        );
    }
    let targets = [
        ("center frequency", mask.center, metrics.f0_hz),
        ("3-dB bandwidth", mask.bandwidth, metrics.bw3db_hz),
    ];
    for (name, target, value) in targets {
        if let Some(t) = target {
            let achieved = 100.0 * (value / t.value_hz - 1.0).abs();
            push(
                format!("{name} within {}% of {:.4} MHz", t.tolerance_percent, t.value_hz / 1e6),
                metrics.f0_hz,
                t.tolerance_percent,
                achieved,
                (achieved - t.tolerance_percent).max(0.0),
                Unit::Percent,
            );
        }
    }

    Ok(MaskEvaluation {
        violations,
        cost,
        metrics,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonPoint {
    pub frequency_hz: f64,
    pub s21_db_a: f64,
    pub s21_db_b: f64,
    /// b − a.
    pub delta_s21_db: f64,
    pub delta_s11_db: f64,
}

/// Metric differences, b − a.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricDeltas {
    pub f0_hz: f64,
    pub bw3db_hz: f64,
    pub fbw_percent: f64,
    pub il_db: f64,
    pub rl_db_at_f0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepComparison {
    pub overlap_hz: [f64; 2],
    pub points: Vec<ComparisonPoint>,
    pub max_abs_delta_s21_db: f64,
    pub max_abs_delta_s11_db: f64,
    pub metrics_a: Option<FilterMetrics>,
    pub metrics_b: Option<FilterMetrics>,
    pub metric_deltas: Option<MetricDeltas>,
    pub notes: Vec<String>,
}

/// Resamples `b` onto the samples of `a` inside the common range and reports
/// dB differences. Metrics are taken from each table as given.
pub fn compare_sweeps(a: &SweepTable, b: &SweepTable) -> Result<SweepComparison> {
    let (a_lo, a_hi) = a.range().ok_or(Error::EmptySweep)?;
    let (b_lo, b_hi) = b.range().ok_or(Error::EmptySweep)?;
    let lo = a_lo.max(b_lo);
    let hi = a_hi.min(b_hi);
    if lo > hi {
        return Err(Error::NoOverlap);
    }
    let points: Vec<ComparisonPoint> = a
        .points()
        .iter()
        .filter(|p| p.frequency_hz >= lo && p.frequency_hz <= hi)
        .filter_map(|pa| {
            let pb = b.interpolate(pa.frequency_hz)?;
            let (s21_a, s21_b) = (db20(pa.s21), db20(pb.s21));
            Some(ComparisonPoint {
                frequency_hz: pa.frequency_hz,
                s21_db_a: s21_a,
                s21_db_b: s21_b,
                delta_s21_db: s21_b - s21_a,
                delta_s11_db: db20(pb.s11) - db20(pa.s11),
            })
        })
        .collect();
    if points.is_empty() {
        return Err(Error::NoOverlap);
    }
    let max_abs = |sel: fn(&ComparisonPoint) -> f64| {
        points
            .iter()
            .map(|p| sel(p).abs())
            .filter(|v| v.is_finite())
            .fold(0.0, f64::max)
    };
    let max_abs_delta_s21_db = max_abs(|p| p.delta_s21_db);
    let max_abs_delta_s11_db = max_abs(|p| p.delta_s11_db);

    let mut notes = Vec::new();
    let mut metrics_of = |t: &SweepTable, name: &str| match compute_metrics(t) {
        Ok(m) => Some(m),
        Err(e) => {
            notes.push(format!("no metrics for {name}: {e}"));
            None
        }
    };
    let metrics_a = metrics_of(a, "a");
    let metrics_b = metrics_of(b, "b");
    let metric_deltas = match (metrics_a, metrics_b) {
        (Some(ma), Some(mb)) => Some(MetricDeltas {
            f0_hz: mb.f0_hz - ma.f0_hz,
            bw3db_hz: mb.bw3db_hz - ma.bw3db_hz,
            fbw_percent: mb.fbw_percent - ma.fbw_percent,
            il_db: mb.il_db - ma.il_db,
            rl_db_at_f0: mb.rl_db_at_f0 - ma.rl_db_at_f0,
        }),
        _ => None,
    };
    Ok(SweepComparison {
        overlap_hz: [lo, hi],
        points,
        max_abs_delta_s21_db,
        max_abs_delta_s11_db,
        metrics_a,
        metrics_b,
        metric_deltas,
        notes,
    })
}
