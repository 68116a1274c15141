use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Logarithmic,
}

/// Strictly increasing set of sample frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", deny_unknown_fields)]
pub struct FrequencyGrid {
    pub start_hz: f64,
    pub stop_hz: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    start_hz: f64,
    stop_hz: f64,
    points: usize,
    #[serde(default)]
    spacing: Spacing,
}

impl TryFrom<RawGrid> for FrequencyGrid {
    type Error = Error;

    fn try_from(r: RawGrid) -> Result<Self> {
        FrequencyGrid::new(r.start_hz, r.stop_hz, r.points, r.spacing)
    }
}

impl FrequencyGrid {
    pub fn new(start_hz: f64, stop_hz: f64, points: usize, spacing: Spacing) -> Result<Self> {
        if !(start_hz > 0.0 && start_hz.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "start_hz must be positive and finite, got {start_hz}"
            )));
        }
        if !(stop_hz.is_finite() && stop_hz > start_hz) {
            return Err(Error::InvalidGrid(format!(
                "stop_hz ({stop_hz}) must be finite and greater than start_hz ({start_hz})"
            )));
        }
        if points < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {points}"
            )));
        }
        let grid = Self {
            start_hz,
            stop_hz,
            points,
            spacing,
        };
        let f = grid.frequencies();
        if f.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(
                "too many points for the range: frequencies are not strictly increasing".into(),
            ));
        }
        Ok(grid)
    }

    pub fn linear(start_hz: f64, stop_hz: f64, points: usize) -> Result<Self> {
        Self::new(start_hz, stop_hz, points, Spacing::Linear)
    }

    pub fn logarithmic(start_hz: f64, stop_hz: f64, points: usize) -> Result<Self> {
        Self::new(start_hz, stop_hz, points, Spacing::Logarithmic)
    }

    /// Sample frequencies; the end points are exactly `start_hz` and `stop_hz`.
    pub fn frequencies(&self) -> Vec<f64> {
        let last = self.points - 1;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    return self.start_hz;
                }
                if i == last {
                    return self.stop_hz;
                }
                let t = i as f64 / last as f64;
                match self.spacing {
                    Spacing::Linear => self.start_hz + t * (self.stop_hz - self.start_hz),
                    Spacing::Logarithmic => {
                        self.start_hz * (self.stop_hz / self.start_hz).powf(t)
                    }
                }
            })
            .collect()
    }
}
