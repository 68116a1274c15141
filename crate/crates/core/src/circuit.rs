//! Lumped unit cell of the CSR-loaded band-pass line.
//!
//! The series branch is the interdigital capacitor `C_L` with an optional line
//! inductance `L_R`. The shunt branch is the line capacitance `C` in series with
//! the resonator tank (`C_R` in parallel with `L_L`). All elements are lossless.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::sweep::{SParameterPoint, SweepTable};
use crate::twoport::Abcd;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    /// Series Z/2, shunt Y, series Z/2.
    #[default]
    SymmetricT,
    /// Series Z, then shunt Y.
    LSection,
}

/// Element values of one cell, as labeled in the reference design.
///
/// With `swap_inductors` set, `l_r_henry` is used as the tank inductance and
/// `l_l_henry` as the series line inductance. Use [`UnitCellParams::series_inductance`]
/// and [`UnitCellParams::tank_inductance`] rather than reading the fields directly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitCellParams {
    pub c_l_farad: f64,
    pub l_r_henry: f64,
    pub c_farad: f64,
    pub c_r_farad: f64,
    pub l_l_henry: f64,
    #[serde(default = "default_true")]
    pub include_series_inductor: bool,
    #[serde(default)]
    pub topology: Topology,
    #[serde(default)]
    pub swap_inductors: bool,
}

fn default_true() -> bool {
    true
}

impl Default for UnitCellParams {
    /// The 730 MHz reference design: C_R = 4.1 pF, L_L = 0.7 nH, L_R = 10.3 nH,
    /// C_L = 0.3 pF, C = 2.1 pF, read as labeled.
    fn default() -> Self {
        Self {
            c_l_farad: 0.3e-12,
            l_r_henry: 10.3e-9,
            c_farad: 2.1e-12,
            c_r_farad: 4.1e-12,
            l_l_henry: 0.7e-9,
            include_series_inductor: true,
            topology: Topology::SymmetricT,
            swap_inductors: false,
        }
    }
}

/// Series impedance and shunt admittance of the cell at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Immittances {
    pub frequency_hz: f64,
    pub z_series: Complex64,
    pub y_shunt: Complex64,
}

impl UnitCellParams {
    /// Reference design with the two inductances exchanged.
    pub fn swapped() -> Self {
        Self {
            swap_inductors: true,
            ..Self::default()
        }
    }

    pub fn with_topology(self, topology: Topology) -> Self {
        Self { topology, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.named_values() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidElement(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// The five element values in field order with their field names.
    pub fn named_values(&self) -> [(&'static str, f64); 5] {
        [
            ("c_l_farad", self.c_l_farad),
            ("l_r_henry", self.l_r_henry),
            ("c_farad", self.c_farad),
            ("c_r_farad", self.c_r_farad),
            ("l_l_henry", self.l_l_henry),
        ]
    }

    pub fn values(&self) -> [f64; 5] {
        self.named_values().map(|(_, v)| v)
    }

    /// Copy with the five element values replaced (field order as [`Self::values`]).
    pub fn with_values(&self, v: [f64; 5]) -> Self {
        Self {
            c_l_farad: v[0],
            l_r_henry: v[1],
            c_farad: v[2],
            c_r_farad: v[3],
            l_l_henry: v[4],
            ..*self
        }
    }

    /// Inductance in the series branch under the active interpretation.
    pub fn series_inductance(&self) -> f64 {
        if self.swap_inductors {
            self.l_l_henry
        } else {
            self.l_r_henry
        }
    }

    /// Inductance of the resonator tank under the active interpretation.
    pub fn tank_inductance(&self) -> f64 {
        if self.swap_inductors {
            self.l_r_henry
        } else {
            self.l_l_henry
        }
    }

    /// Resonance of the parallel tank, where the shunt branch opens.
    pub fn tank_resonance_hz(&self) -> f64 {
        1.0 / (TAU * (self.tank_inductance() * self.c_r_farad).sqrt())
    }

    /// Resonance of the series branch (infinite when the inductor is excluded).
    pub fn series_resonance_hz(&self) -> f64 {
        if !self.include_series_inductor {
            return f64::INFINITY;
        }
        1.0 / (TAU * (self.series_inductance() * self.c_l_farad).sqrt())
    }

    /// Net susceptance of the tank, ωC_R − 1/(ωL).
    fn tank_susceptance(&self, omega: f64) -> f64 {
        omega * self.c_r_farad - 1.0 / (omega * self.tank_inductance())
    }

    pub fn interpretation(&self) -> &'static str {
        if self.swap_inductors {
            "swapped inductors"
        } else {
            "as labeled"
        }
    }
}

fn check_frequency(f: f64) -> Result<f64> {
    if f > 0.0 && f.is_finite() {
        Ok(TAU * f)
    } else {
        Err(Error::Domain(format!(
            "frequency must be positive and finite, got {f}"
        )))
    }
}

/// Z(f) = jωL_R + 1/(jωC_L), or just the capacitor when the inductor is excluded.
///
/// Exactly zero within one ULP of the series resonance.
pub fn series_impedance(p: &UnitCellParams, f: f64) -> Result<Complex64> {
    let w = check_frequency(f)?;
    let fs = p.series_resonance_hz();
    if fs.is_finite() && (f - fs).abs() <= ulp(fs) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let capacitive = -1.0 / (w * p.c_l_farad);
    let reactance = if p.include_series_inductor {
        w * p.series_inductance() + capacitive
    } else {
        capacitive
    };
    Ok(Complex64::new(0.0, reactance))
}

/// Impedance of the shunt branch: 1/(jωC) in series with the tank.
///
/// Infinite at the tank resonance.
pub fn shunt_branch_impedance(p: &UnitCellParams, f: f64) -> Result<Complex64> {
    let w = check_frequency(f)?;
    let bt = p.tank_susceptance(w);
    Ok(Complex64::new(0.0, -1.0 / (w * p.c_farad) - 1.0 / bt))
}

/// Y(f) = [1/(jωC) + (jωC_R + 1/(jωL))⁻¹]⁻¹.
///
/// Exactly zero within one ULP of the tank resonance. Fails with
/// [`Error::SingularPoint`] where the branch is an exact short.
pub fn shunt_admittance(p: &UnitCellParams, f: f64) -> Result<Complex64> {
    let w = check_frequency(f)?;
    let ft = p.tank_resonance_hz();
    if (f - ft).abs() <= ulp(ft) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    // Y = jωC·jB_t / (jB_t + jωC) keeps the tank resonance finite.
    let bc = w * p.c_farad;
    let bt = p.tank_susceptance(w);
    let den = bt + bc;
    if den == 0.0 {
        return Err(Error::SingularPoint { frequency_hz: f });
    }
    let y = Complex64::new(0.0, bc * bt / den);
    if !y.is_finite() {
        return Err(Error::SingularPoint { frequency_hz: f });
    }
    Ok(y)
}

fn ulp(x: f64) -> f64 {
    let bits = x.abs().to_bits();
    f64::from_bits(bits + 1) - x.abs()
}

pub fn immittances(p: &UnitCellParams, f: f64) -> Result<Immittances> {
    Ok(Immittances {
        frequency_hz: f,
        z_series: series_impedance(p, f)?,
        y_shunt: shunt_admittance(p, f)?,
    })
}

pub fn unit_cell_abcd(p: &UnitCellParams, f: f64) -> Result<Abcd> {
    let im = immittances(p, f)?;
    let shunt = Abcd::shunt(im.y_shunt)?;
    Ok(match p.topology {
        Topology::SymmetricT => {
            let half = Abcd::series(im.z_series / 2.0)?;
            half.then(&shunt).then(&half)
        }
        Topology::LSection => Abcd::series(im.z_series)?.then(&shunt),
    })
}

/// `stages` identical cells in cascade.
pub fn n_cell_abcd(p: &UnitCellParams, f: f64, stages: usize) -> Result<Abcd> {
    if stages < 1 {
        return Err(Error::Domain("stage count must be at least 1".into()));
    }
    let cell = unit_cell_abcd(p, f)?;
    Ok((1..stages).fold(cell, |acc, _| acc.then(&cell)))
}

/// A frequency the sweep could not evaluate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepGap {
    pub frequency_hz: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutcome {
    pub table: SweepTable,
    pub gaps: Vec<SweepGap>,
}

/// S-parameters of `stages` cascaded cells on `grid`.
///
/// The cell is built from series and shunt elements only, so it is converted
/// with [`Abcd::to_s_reciprocal`].
pub fn sweep(
    p: &UnitCellParams,
    grid: &FrequencyGrid,
    stages: usize,
    z0_ohm: f64,
) -> Result<SweepOutcome> {
    sweep_frequencies(p, &grid.frequencies(), stages, z0_ohm)
}

/// As [`sweep`] on explicit, strictly increasing frequencies.
///
/// Frequencies where the circuit or the conversion is singular are skipped
/// and listed in [`SweepOutcome::gaps`].
pub fn sweep_frequencies(
    p: &UnitCellParams,
    freqs: &[f64],
    stages: usize,
    z0_ohm: f64,
) -> Result<SweepOutcome> {
    p.validate()?;
    if stages < 1 {
        return Err(Error::Domain("stage count must be at least 1".into()));
    }
    let mut points = Vec::with_capacity(freqs.len());
    let mut gaps = Vec::new();
    for &f in freqs {
        match n_cell_abcd(p, f, stages).and_then(|m| m.to_s_reciprocal(f, z0_ohm)) {
            Ok(pt) => points.push(pt),
            Err(e @ (Error::SingularPoint { .. } | Error::SingularConversion { .. })) => {
                gaps.push(SweepGap {
                    frequency_hz: f,
                    reason: e.to_string(),
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(SweepOutcome {
        table: SweepTable::new(z0_ohm, points)?,
        gaps,
    })
}

/// Convenience for a single evaluated point.
pub fn s_parameters(
    p: &UnitCellParams,
    f: f64,
    stages: usize,
    z0_ohm: f64,
) -> Result<SParameterPoint> {
    n_cell_abcd(p, f, stages)?.to_s_reciprocal(f, z0_ohm)
}
