//! Bloch analysis of the periodic cell.
//!
//! For a reciprocal symmetric cell, cos(βl) = 1 + ZY/2. The cell propagates
//! where |1 + ZY/2| ≤ 1 and is evanescent elsewhere.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{self, UnitCellParams};
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::roots::bisect;

/// |1 − |Re g|| at or below this counts as a band edge.
pub const EDGE_TOLERANCE: f64 = 1e-9;
/// Relative bracket width at which edge and zero bisection stops.
pub const BISECTION_REL_TOL: f64 = 1e-9;
/// Closed-form/numeric deviations above this get a note in the report.
pub const DEVIATION_NOTE_THRESHOLD: f64 = 0.05;
/// Points in the automatic scan used by [`consistency_report`].
pub const REPORT_SCAN_POINTS: usize = 20_001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Passband,
    Stopband,
    Edge,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Passband => "passband",
            Regime::Stopband => "stopband",
            Regime::Edge => "edge",
        }
    }
}

/// One classified frequency. In a stop-band `beta_l_rad` is 0 or π (the
/// phase the evanescent wave locks to); in a pass-band `alpha_l_neper` is 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionPoint {
    pub frequency_hz: f64,
    pub g: Complex64,
    pub beta_l_rad: f64,
    pub alpha_l_neper: f64,
    pub regime: Regime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeMethod {
    Numeric,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandEdges {
    pub f_cl_hz: f64,
    pub f_cu_hz: f64,
    pub method: EdgeMethod,
}

impl BandEdges {
    pub fn center_hz(&self) -> f64 {
        0.5 * (self.f_cl_hz + self.f_cu_hz)
    }

    fn overlap(&self, other: &BandEdges) -> f64 {
        (self.f_cu_hz.min(other.f_cu_hz) - self.f_cl_hz.max(other.f_cl_hz)).max(0.0)
    }
}

/// Pass-bands found by a scan, plus warnings about edges that could not be paired.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandScan {
    pub bands: Vec<BandEdges>,
    pub warnings: Vec<String>,
}

/// g = 1 + Z·Y/2.
pub fn bloch_g(p: &UnitCellParams, f: f64) -> Result<Complex64> {
    let im = circuit::immittances(p, f)?;
    let g = 1.0 + im.z_series * im.y_shunt / 2.0;
    if !g.is_finite() {
        return Err(Error::SingularPoint { frequency_hz: f });
    }
    Ok(g)
}

pub fn classify_g(frequency_hz: f64, g: Complex64) -> DispersionPoint {
    let re = g.re;
    let (regime, beta_l_rad, alpha_l_neper) = if (1.0 - re.abs()).abs() <= EDGE_TOLERANCE {
        (Regime::Edge, re.clamp(-1.0, 1.0).acos(), 0.0)
    } else if re.abs() < 1.0 {
        (Regime::Passband, re.acos(), 0.0)
    } else if re > 1.0 {
        (Regime::Stopband, 0.0, re.acosh())
    } else {
        (Regime::Stopband, PI, (-re).acosh())
    };
    DispersionPoint {
        frequency_hz,
        g,
        beta_l_rad,
        alpha_l_neper,
        regime,
    }
}

pub fn classify(p: &UnitCellParams, f: f64) -> Result<DispersionPoint> {
    Ok(classify_g(f, bloch_g(p, f)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispersionCurve {
    pub points: Vec<DispersionPoint>,
    /// Frequencies skipped because the cell is singular there.
    pub gaps: Vec<f64>,
}

pub fn dispersion_curve(p: &UnitCellParams, grid: &FrequencyGrid) -> Result<DispersionCurve> {
    p.validate()?;
    let mut points = Vec::with_capacity(grid.points);
    let mut gaps = Vec::new();
    for f in grid.frequencies() {
        match classify(p, f) {
            Ok(pt) => points.push(pt),
            Err(Error::SingularPoint { .. }) => gaps.push(f),
            Err(e) => return Err(e),
        }
    }
    Ok(DispersionCurve { points, gaps })
}

/// Scans `search` for pass-bands and refines both edges of each by bisection on
/// Re(g) ∓ 1.
///
/// The scan must be fine enough that Re(g) is monotone between neighbouring
/// samples near an edge; a thousand or more points over the range is usually
/// enough. A pass-band running into either end of the scan has only one edge;
/// it is dropped and reported in [`BandScan::warnings`].
pub fn find_band_edges(p: &UnitCellParams, search: &FrequencyGrid) -> Result<BandScan> {
    find_band_edges_in(p, &search.frequencies(), BISECTION_REL_TOL)
}

/// As [`find_band_edges`] on explicit increasing frequencies and tolerance.
pub fn find_band_edges_in(p: &UnitCellParams, freqs: &[f64], rel_tol: f64) -> Result<BandScan> {
    p.validate()?;
    let re: Vec<Option<f64>> = freqs
        .iter()
        .map(|&f| match bloch_g(p, f) {
            Ok(g) => Ok(Some(g.re)),
            Err(Error::SingularPoint { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let passing = |i: usize| matches!(re[i], Some(v) if v.abs() < 1.0);

    let refine = |inside: usize, outside: usize| -> Option<f64> {
        let level = re[outside]?.signum();
        bisect(
            |f| bloch_g(p, f).map(|g| g.re - level).unwrap_or(f64::NAN),
            freqs[inside],
            freqs[outside],
            rel_tol,
        )
        .ok()
    };

    let mut bands = Vec::new();
    let mut warnings = Vec::new();
    let n = freqs.len();
    let mut i = 0;
    while i < n {
        if !passing(i) {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < n && passing(i + 1) {
            i += 1;
        }
        let end = i;
        i += 1;

        let lower = if start == 0 {
            warnings.push(format!(
                "pass-band already open at scan start {:.6e} Hz; lower edge not bracketed, band dropped",
                freqs[0]
            ));
            None
        } else {
            let e = refine(start, start - 1);
            if e.is_none() {
                warnings.push(format!(
                    "lower edge near {:.6e} Hz could not be refined; band dropped",
                    freqs[start]
                ));
            }
            e
        };
        let upper = if end == n - 1 {
            warnings.push(format!(
                "pass-band still open at scan end {:.6e} Hz; upper edge not bracketed, band dropped",
                freqs[n - 1]
            ));
            None
        } else {
            let e = refine(end, end + 1);
            if e.is_none() {
                warnings.push(format!(
                    "upper edge near {:.6e} Hz could not be refined; band dropped",
                    freqs[end]
                ));
            }
            e
        };
        if let (Some(f_cl_hz), Some(f_cu_hz)) = (lower, upper) {
            bands.push(BandEdges {
                f_cl_hz,
                f_cu_hz,
                method: EdgeMethod::Numeric,
            });
        }
    }
    Ok(BandScan { bands, warnings })
}

/// Series combination of the line capacitance and a quarter of the series
/// capacitance, C·4C_L/(C + 4C_L).
pub fn effective_capacitance(p: &UnitCellParams) -> f64 {
    1.0 / (1.0 / p.c_farad + 1.0 / (4.0 * p.c_l_farad))
}

/// Closed-form cutoffs with the series inductance neglected:
/// f_cu at the tank resonance, f_cl where the tank sees C_R plus the
/// effective capacitance.
pub fn closed_form_cutoffs(p: &UnitCellParams) -> BandEdges {
    let l = p.tank_inductance();
    BandEdges {
        f_cl_hz: 1.0 / (TAU * (l * (p.c_r_farad + effective_capacitance(p))).sqrt()),
        f_cu_hz: 1.0 / (TAU * (p.c_r_farad * l).sqrt()),
        method: EdgeMethod::ClosedForm,
    }
}

/// Series resonance of the shunt branch: L_tank against C + C_R.
pub fn transmission_zero_closed(p: &UnitCellParams) -> f64 {
    1.0 / (TAU * (p.tank_inductance() * (p.c_farad + p.c_r_farad)).sqrt())
}

/// Locates the shunt-branch short on `[lo_hz, hi_hz]` by bisection.
///
/// The branch impedance 1/(jωC) + 1/(jB_t) vanishes where B_t + ωC = 0; that
/// sum is bisected instead of the impedance itself, which has a pole at the
/// tank resonance.
pub fn transmission_zero_numeric(p: &UnitCellParams, lo_hz: f64, hi_hz: f64) -> Result<f64> {
    p.validate()?;
    if !(lo_hz > 0.0 && hi_hz > lo_hz) {
        return Err(Error::Domain(format!(
            "invalid search range [{lo_hz}, {hi_hz}]"
        )));
    }
    let l = p.tank_inductance();
    let residual =
        |f: f64| TAU * f * (p.c_r_farad + p.c_farad) - 1.0 / (TAU * f * l);
    bisect(residual, lo_hz, hi_hz, BISECTION_REL_TOL).map_err(|_| {
        Error::NotFound(format!(
            "no shunt-branch resonance between {lo_hz} Hz and {hi_hz} Hz"
        ))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormValues {
    pub f_cl_hz: f64,
    pub f_cu_hz: f64,
    pub f_z_hz: f64,
    pub center_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericValues {
    pub f_cl_hz: Option<f64>,
    pub f_cu_hz: Option<f64>,
    pub f_z_hz: Option<f64>,
    /// Every pass-band found by the scan.
    pub bands: Vec<BandEdges>,
    pub scan_start_hz: f64,
    pub scan_stop_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deviations {
    pub f_cl: Option<f64>,
    pub f_cu: Option<f64>,
    pub f_z: Option<f64>,
}

/// Closed forms set against the numeric Bloch analysis of the same cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub interpretation: String,
    pub closed_form: ClosedFormValues,
    pub numeric: NumericValues,
    /// |closed − numeric| / numeric.
    pub deviations: Deviations,
    /// C ≤ 4·C_L: the transmission zero sits close below the lower cutoff.
    pub sharpness_condition: bool,
    pub c_over_4c_l: f64,
    /// (f_cl − f_z)/f_cl from the closed forms.
    pub zero_to_cutoff_gap: f64,
    pub reference_center_hz: Option<f64>,
    /// Closed-form center over the reference center.
    pub center_ratio: Option<f64>,
    pub center_mismatch: bool,
    pub notes: Vec<String>,
}

fn deviation(closed: f64, numeric: Option<f64>) -> Option<f64> {
    numeric.map(|n| (closed - n).abs() / n)
}

/// Cross-checks the closed forms against the numeric edges and zero.
///
/// The numeric scan runs logarithmically from a fifth of the lowest closed-form
/// frequency to three times f_cu. The numeric band reported against the closed
/// forms is the one overlapping them most (or, failing any overlap, the one with
/// the nearest center). `reference_center_hz` is an expected pass-band center,
/// e.g. a measured one; a closed-form center more than 5% away from it is flagged.
pub fn consistency_report(
    p: &UnitCellParams,
    reference_center_hz: Option<f64>,
) -> Result<ConsistencyReport> {
    p.validate()?;
    let closed = closed_form_cutoffs(p);
    let f_z = transmission_zero_closed(p);
    let closed_form = ClosedFormValues {
        f_cl_hz: closed.f_cl_hz,
        f_cu_hz: closed.f_cu_hz,
        f_z_hz: f_z,
        center_hz: closed.center_hz(),
    };

    let scan_start_hz = 0.2 * f_z.min(closed.f_cl_hz);
    let scan_stop_hz = 3.0 * closed.f_cu_hz;
    let grid = FrequencyGrid::logarithmic(scan_start_hz, scan_stop_hz, REPORT_SCAN_POINTS)?;
    let scan = find_band_edges(p, &grid)?;

    let matched = scan
        .bands
        .iter()
        .max_by(|a, b| a.overlap(&closed).total_cmp(&b.overlap(&closed)))
        .filter(|b| b.overlap(&closed) > 0.0)
        .or_else(|| {
            scan.bands.iter().min_by(|a, b| {
                let da = (a.center_hz() - closed.center_hz()).abs();
                let db = (b.center_hz() - closed.center_hz()).abs();
                da.total_cmp(&db)
            })
        })
        .copied();
    let numeric_f_z = transmission_zero_numeric(p, scan_start_hz, scan_stop_hz).ok();

    let numeric = NumericValues {
        f_cl_hz: matched.map(|b| b.f_cl_hz),
        f_cu_hz: matched.map(|b| b.f_cu_hz),
        f_z_hz: numeric_f_z,
        bands: scan.bands.clone(),
        scan_start_hz,
        scan_stop_hz,
    };
    let deviations = Deviations {
        f_cl: deviation(closed.f_cl_hz, numeric.f_cl_hz),
        f_cu: deviation(closed.f_cu_hz, numeric.f_cu_hz),
        f_z: deviation(f_z, numeric.f_z_hz),
    };

    let c_over_4c_l = p.c_farad / (4.0 * p.c_l_farad);
    let sharpness_condition = p.c_farad <= 4.0 * p.c_l_farad;
    let mut notes = Vec::new();

    if matched.is_none() {
        notes.push(format!(
            "no complete pass-band found between {scan_start_hz:.4e} Hz and {scan_stop_hz:.4e} Hz"
        ));
    }
    let worst = [deviations.f_cl, deviations.f_cu]
        .into_iter()
        .flatten()
        .fold(0.0, f64::max);
    if worst > DEVIATION_NOTE_THRESHOLD {
        notes.push(format!(
            "numeric Bloch edges deviate from the closed forms by up to {:.1}%; the closed forms neglect the series inductance ({:.3} nH here)",
            100.0 * worst,
            1e9 * p.series_inductance()
        ));
    }
    if sharpness_condition {
        notes.push(format!(
            "C = {:.3} pF <= 4*C_L = {:.3} pF: f_z and f_cl are very close, giving a sharp lower cutoff",
            1e12 * p.c_farad,
            4e12 * p.c_l_farad
        ));
    } else {
        notes.push(format!(
            "C = {:.3} pF > 4*C_L = {:.3} pF: the condition for f_z and f_cl to be very close is not met",
            1e12 * p.c_farad,
            4e12 * p.c_l_farad
        ));
    }

    let center_ratio = reference_center_hz.map(|r| closed.center_hz() / r);
    let center_mismatch = center_ratio
        .map(|r| (r - 1.0).abs() > DEVIATION_NOTE_THRESHOLD)
        .unwrap_or(false);
    if let (Some(r), Some(reference)) = (center_ratio, reference_center_hz) {
        if center_mismatch {
            notes.push(format!(
                "closed-form pass-band center {:.4} GHz is {:.2}x the reference center {:.4} GHz",
                closed.center_hz() / 1e9,
                r,
                reference / 1e9
            ));
        }
    }
    notes.extend(scan.warnings);

    Ok(ConsistencyReport {
        interpretation: p.interpretation().to_string(),
        closed_form,
        numeric,
        deviations,
        sharpness_condition,
        c_over_4c_l,
        zero_to_cutoff_gap: (closed.f_cl_hz - f_z) / closed.f_cl_hz,
        reference_center_hz,
        center_ratio,
        center_mismatch,
        notes,
    })
}
