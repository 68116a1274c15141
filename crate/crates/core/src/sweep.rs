//! Frequency-ordered S-parameter tables and quantities derived from them.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 20·log10|x|.
pub fn db20(x: Complex64) -> f64 {
    20.0 * x.norm().log10()
}

/// Two-port S-parameters at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SParameterPoint {
    pub frequency_hz: f64,
    pub z0_ohm: f64,
    pub s11: Complex64,
    pub s21: Complex64,
    pub s12: Complex64,
    pub s22: Complex64,
}

impl SParameterPoint {
    /// Linear interpolation of real and imaginary parts between `self` and `next`.
    pub fn lerp(&self, next: &SParameterPoint, frequency_hz: f64) -> SParameterPoint {
        let t = (frequency_hz - self.frequency_hz) / (next.frequency_hz - self.frequency_hz);
        let mix = |a: Complex64, b: Complex64| a + (b - a) * t;
        SParameterPoint {
            frequency_hz,
            z0_ohm: self.z0_ohm,
            s11: mix(self.s11, next.s11),
            s21: mix(self.s21, next.s21),
            s12: mix(self.s12, next.s12),
            s22: mix(self.s22, next.s22),
        }
    }
}

/// S-parameter points sharing one reference impedance, strictly increasing in frequency.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    z0_ohm: f64,
    points: Vec<SParameterPoint>,
}

impl SweepTable {
    pub fn new(z0_ohm: f64, points: Vec<SParameterPoint>) -> Result<Self> {
        if !(z0_ohm > 0.0 && z0_ohm.is_finite()) {
            return Err(Error::InvalidSweep(format!(
                "reference impedance must be positive, got {z0_ohm}"
            )));
        }
        for (i, p) in points.iter().enumerate() {
            if p.z0_ohm != z0_ohm {
                return Err(Error::InvalidSweep(format!(
                    "point {i} has z0 {} ohm, table has {z0_ohm} ohm",
                    p.z0_ohm
                )));
            }
            if !(p.frequency_hz > 0.0 && p.frequency_hz.is_finite()) {
                return Err(Error::InvalidSweep(format!(
                    "point {i} has non-positive frequency {}",
                    p.frequency_hz
                )));
            }
        }
        if let Some(w) = points
            .windows(2)
            .find(|w| w[1].frequency_hz <= w[0].frequency_hz)
        {
            return Err(Error::InvalidSweep(format!(
                "frequencies must be strictly increasing ({} Hz followed by {} Hz)",
                w[0].frequency_hz, w[1].frequency_hz
            )));
        }
        Ok(Self { z0_ohm, points })
    }

    pub fn z0_ohm(&self) -> f64 {
        self.z0_ohm
    }

    pub fn points(&self) -> &[SParameterPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.frequency_hz).collect()
    }

    pub fn s21_db(&self) -> Vec<f64> {
        self.points.iter().map(|p| db20(p.s21)).collect()
    }

    pub fn s11_db(&self) -> Vec<f64> {
        self.points.iter().map(|p| db20(p.s11)).collect()
    }

    /// First and last frequency.
    pub fn range(&self) -> Option<(f64, f64)> {
        Some((self.points.first()?.frequency_hz, self.points.last()?.frequency_hz))
    }

    /// Point at `frequency_hz`, linearly interpolated in real/imaginary parts.
    /// `None` outside the table's range.
    pub fn interpolate(&self, frequency_hz: f64) -> Option<SParameterPoint> {
        let (lo, hi) = self.range()?;
        if !(frequency_hz >= lo && frequency_hz <= hi) {
            return None;
        }
        let i = self
            .points
            .partition_point(|p| p.frequency_hz < frequency_hz);
        let p = &self.points[i];
        if p.frequency_hz == frequency_hz || i == 0 {
            return Some(SParameterPoint {
                frequency_hz,
                ..*p
            });
        }
        Some(self.points[i - 1].lerp(p, frequency_hz))
    }

    /// Index of the sample nearest `frequency_hz` (lower index on ties).
    pub fn nearest_index(&self, frequency_hz: f64) -> Option<usize> {
        if self.points.is_empty() {
            return None;
        }
        let i = self
            .points
            .partition_point(|p| p.frequency_hz < frequency_hz);
        if i == 0 {
            return Some(0);
        }
        if i == self.points.len() {
            return Some(i - 1);
        }
        let below = frequency_hz - self.points[i - 1].frequency_hz;
        let above = self.points[i].frequency_hz - frequency_hz;
        Some(if above < below { i } else { i - 1 })
    }
}

/// Removes 2π jumps: any step larger than π in magnitude between neighbours is
/// wrapped back by a multiple of 2π.
pub fn unwrap_phase(phase: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phase.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for &p in phase {
        if let Some(q) = prev {
            let step = p - q;
            if step.abs() > PI {
                offset -= TAU * (step / TAU).round();
            }
        }
        prev = Some(p);
        out.push(p + offset);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupDelayPoint {
    pub frequency_hz: f64,
    pub delay_s: f64,
}

/// Group delay −dφ/dω of the unwrapped s21 phase.
///
/// Central differences inside the grid, one-sided differences at the ends.
/// The grid must be fine enough that the true phase moves by less than π per step.
pub fn group_delay(sweep: &SweepTable) -> Result<Vec<GroupDelayPoint>> {
    let n = sweep.len();
    if n < 3 {
        return Err(Error::InsufficientGrid { needed: 3, got: n });
    }
    let omega: Vec<f64> = sweep.points.iter().map(|p| TAU * p.frequency_hz).collect();
    let raw: Vec<f64> = sweep.points.iter().map(|p| p.s21.arg()).collect();
    let phase = unwrap_phase(&raw);

    let slope = |i: usize, j: usize| -(phase[j] - phase[i]) / (omega[j] - omega[i]);
    Ok((0..n)
        .map(|k| {
            let delay_s = if k == 0 {
                slope(0, 1)
            } else if k == n - 1 {
                slope(n - 2, n - 1)
            } else {
                slope(k - 1, k + 1)
            };
            GroupDelayPoint {
                frequency_hz: sweep.points[k].frequency_hz,
                delay_s,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(freqs: &[f64], s21: impl Fn(f64) -> Complex64) -> SweepTable {
        let pts = freqs
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
        SweepTable::new(50.0, pts).unwrap()
    }

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn table_invariants() {
        let p = |f: f64, z0: f64| SParameterPoint {
            frequency_hz: f,
            z0_ohm: z0,
            s11: Complex64::default(),
            s21: Complex64::default(),
            s12: Complex64::default(),
            s22: Complex64::default(),
        };
        assert!(SweepTable::new(50.0, vec![p(1.0, 50.0), p(1.0, 50.0)]).is_err());
        assert!(SweepTable::new(50.0, vec![p(2.0, 50.0), p(1.0, 50.0)]).is_err());
        assert!(SweepTable::new(50.0, vec![p(1.0, 50.0), p(2.0, 75.0)]).is_err());
        assert!(SweepTable::new(50.0, vec![p(1.0, 50.0), p(2.0, 50.0)]).is_ok());
    }

    #[test]
    fn unwrap_removes_jumps() {
        let wrapped: Vec<f64> = (0..50)
            .map(|i| {
                let x = -0.4 * i as f64;
                (x + PI).rem_euclid(TAU) - PI
            })
            .collect();
        let un = unwrap_phase(&wrapped);
        for (i, v) in un.iter().enumerate() {
            assert!((v - (-0.4 * i as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn ideal_delay_line() {
        let t = 1e-9;
        let f = linspace(1e9, 2e9, 201);
        let sweep = table(&f, |f| Complex64::from_polar(1.0, -TAU * f * t));
        let gd = group_delay(&sweep).unwrap();
        for p in &gd[1..gd.len() - 1] {
            assert!((p.delay_s - t).abs() / t < 1e-3, "{}", p.delay_s);
        }
    }

    #[test]
    fn constant_transmission_has_no_delay() {
        let f = linspace(1e6, 2e6, 11);
        let gd = group_delay(&table(&f, |_| Complex64::new(1.0, 0.0))).unwrap();
        assert!(gd.iter().all(|p| p.delay_s == 0.0));
    }

    #[test]
    fn too_few_points() {
        let f = linspace(1e6, 2e6, 2);
        assert_eq!(
            group_delay(&table(&f, |_| Complex64::new(1.0, 0.0))),
            Err(Error::InsufficientGrid { needed: 3, got: 2 })
        );
    }

    #[test]
    fn interpolation_and_nearest() {
        let f = [1.0, 2.0, 4.0];
        let t = table(&f, |f| Complex64::new(f, -f));
        let p = t.interpolate(3.0).unwrap();
        assert!((p.s21 - Complex64::new(3.0, -3.0)).norm() < 1e-15);
        assert_eq!(t.interpolate(1.0).unwrap().s21, Complex64::new(1.0, -1.0));
        assert!(t.interpolate(0.5).is_none());
        assert!(t.interpolate(4.5).is_none());
        assert_eq!(t.nearest_index(2.9), Some(1));
        assert_eq!(t.nearest_index(3.1), Some(2));
        assert_eq!(t.nearest_index(0.0), Some(0));
        assert_eq!(t.nearest_index(9.0), Some(2));
    }
}
