//! Two-port chain (ABCD) matrices and conversion to and from S-parameters.

use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sweep::SParameterPoint;

/// Below this magnitude the S-parameter denominator is treated as zero.
pub const SINGULAR_DENOMINATOR: f64 = 1e-30;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Chain matrix `[[a, b], [c, d]]` of a two-port segment.
///
/// `b` is in ohms, `c` in siemens, `a` and `d` are dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Abcd {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Abcd {
    pub const IDENTITY: Abcd = Abcd {
        a: ONE,
        b: ZERO,
        c: ZERO,
        d: ONE,
    };

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self { a, b, c, d }
    }

    /// Series impedance `z` (ohms) between the two ports.
    pub fn series(z: Complex64) -> Result<Self> {
        if !z.is_finite() {
            return Err(Error::InvalidElement(format!(
                "series impedance must be finite, got {z}"
            )));
        }
        Ok(Self::new(ONE, z, ZERO, ONE))
    }

    /// Shunt admittance `y` (siemens) to ground.
    pub fn shunt(y: Complex64) -> Result<Self> {
        if !y.is_finite() {
            return Err(Error::InvalidElement(format!(
                "shunt admittance must be finite, got {y}"
            )));
        }
        Ok(Self::new(ONE, ZERO, y, ONE))
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Abcd) -> Abcd {
        Abcd {
            a: self.a * next.a + self.b * next.c,
            b: self.a * next.b + self.b * next.d,
            c: self.c * next.a + self.d * next.c,
            d: self.c * next.b + self.d * next.d,
        }
    }

    /// Largest element magnitude.
    pub fn max_norm(&self) -> f64 {
        [self.a, self.b, self.c, self.d]
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// Largest element-wise difference magnitude.
    pub fn max_abs_diff(&self, other: &Abcd) -> f64 {
        [
            self.a - other.a,
            self.b - other.b,
            self.c - other.c,
            self.d - other.d,
        ]
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
    }

    /// Element-wise difference relative to the larger of the two matrix norms.
    pub fn relative_diff(&self, other: &Abcd) -> f64 {
        let scale = self.max_norm().max(other.max_norm());
        if scale == 0.0 {
            return 0.0;
        }
        self.max_abs_diff(other) / scale
    }

    /// Converts to S-parameters referenced to a real impedance `z0_ohm`.
    ///
    /// `frequency_hz` only labels the returned point and any error.
    pub fn to_s(&self, frequency_hz: f64, z0_ohm: f64) -> Result<SParameterPoint> {
        self.convert(frequency_hz, z0_ohm, self.determinant())
    }

    /// As [`Abcd::to_s`] for a network known to be reciprocal (det = 1), so
    /// that s12 = s21 exactly.
    ///
    /// Products of large chain matrices lose the unit determinant to rounding
    /// (the error grows like ε·|a·d|), which would otherwise show up as a
    /// spurious s12 − s21.
    pub fn to_s_reciprocal(&self, frequency_hz: f64, z0_ohm: f64) -> Result<SParameterPoint> {
        self.convert(frequency_hz, z0_ohm, ONE)
    }

    fn convert(&self, frequency_hz: f64, z0_ohm: f64, det: Complex64) -> Result<SParameterPoint> {
        if !(z0_ohm > 0.0 && z0_ohm.is_finite()) {
            return Err(Error::Domain(format!(
                "reference impedance must be positive, got {z0_ohm}"
            )));
        }
        let b_n = self.b / z0_ohm;
        let c_n = self.c * z0_ohm;
        let den = self.a + b_n + c_n + self.d;
        if !(den.norm() >= SINGULAR_DENOMINATOR) {
            return Err(Error::SingularConversion { frequency_hz });
        }
        Ok(SParameterPoint {
            frequency_hz,
            z0_ohm,
            s11: (self.a + b_n - c_n - self.d) / den,
            s21: 2.0 / den,
            s12: 2.0 * det / den,
            s22: (-self.a + b_n - c_n + self.d) / den,
        })
    }

    /// Inverse of [`Abcd::to_s`] at the point's own reference impedance.
    pub fn from_s(p: &SParameterPoint) -> Result<Self> {
        if p.s21 == ZERO {
            return Err(Error::NonTransmissive {
                frequency_hz: p.frequency_hz,
            });
        }
        let z0 = p.z0_ohm;
        let den = 2.0 * p.s21;
        let cross = p.s12 * p.s21;
        Ok(Abcd {
            a: ((ONE + p.s11) * (ONE - p.s22) + cross) / den,
            b: z0 * ((ONE + p.s11) * (ONE + p.s22) - cross) / den,
            c: ((ONE - p.s11) * (ONE - p.s22) - cross) / (den * z0),
            d: ((ONE - p.s11) * (ONE + p.s22) + cross) / den,
        })
    }
}

impl Mul for Abcd {
    type Output = Abcd;

    fn mul(self, rhs: Abcd) -> Abcd {
        self.then(&rhs)
    }
}

/// Left-to-right product of `blocks`.
pub fn cascade(blocks: &[Abcd]) -> Result<Abcd> {
    let (first, rest) = blocks.split_first().ok_or(Error::EmptyCascade)?;
    Ok(rest.iter().fold(*first, |acc, m| acc.then(m)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn j(x: f64) -> Complex64 {
        Complex64::new(0.0, x)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn zero_elements_are_through() {
        assert_eq!(Abcd::series(ZERO).unwrap(), Abcd::IDENTITY);
        assert_eq!(Abcd::shunt(ZERO).unwrap(), Abcd::IDENTITY);
    }

    #[test]
    fn element_definitions() {
        let s = Abcd::series(j(50.0)).unwrap();
        assert_eq!((s.a, s.b, s.c, s.d), (ONE, j(50.0), ZERO, ONE));
        assert_eq!(s.determinant(), ONE);
        let p = Abcd::shunt(j(0.02)).unwrap();
        assert_eq!((p.a, p.b, p.c, p.d), (ONE, ZERO, j(0.02), ONE));
    }

    #[test]
    fn non_finite_elements_rejected() {
        assert!(matches!(
            Abcd::series(Complex64::new(f64::NAN, 0.0)),
            Err(Error::InvalidElement(_))
        ));
        assert!(matches!(
            Abcd::shunt(Complex64::new(0.0, f64::INFINITY)),
            Err(Error::InvalidElement(_))
        ));
    }

    #[test]
    fn series_then_shunt_by_hand() {
        // [[1, j50],[0, 1]] x [[1, 0],[j0.02, 1]] = [[1 + j50*j0.02, j50],[j0.02, 1]]
        let m = cascade(&[
            Abcd::series(j(50.0)).unwrap(),
            Abcd::shunt(j(0.02)).unwrap(),
        ])
        .unwrap();
        assert!(close(m.a, ZERO, 1e-15));
        assert!(close(m.b, j(50.0), 1e-15));
        assert!(close(m.c, j(0.02), 1e-15));
        assert!(close(m.d, ONE, 1e-15));
        assert!(close(m.determinant(), ONE, 1e-15));
    }

    #[test]
    fn parallel_shunts_add() {
        let y1 = Complex64::new(0.01, 0.03);
        let y2 = Complex64::new(-0.002, 0.5);
        let m = Abcd::shunt(y1).unwrap() * Abcd::shunt(y2).unwrap();
        assert_eq!(m, Abcd::shunt(y1 + y2).unwrap());
    }

    #[test]
    fn cascade_identities() {
        assert_eq!(cascade(&[]), Err(Error::EmptyCascade));
        assert_eq!(cascade(&[Abcd::IDENTITY]).unwrap(), Abcd::IDENTITY);
        let m = Abcd::new(
            Complex64::new(0.3, 1.0),
            Complex64::new(2.0, -7.0),
            Complex64::new(0.01, 0.0),
            Complex64::new(-1.0, 0.5),
        );
        assert_eq!(cascade(&[m, Abcd::IDENTITY]).unwrap(), m);
    }

    #[test]
    fn matched_through_and_series_resistor() {
        let p = Abcd::IDENTITY.to_s(1e9, 50.0).unwrap();
        assert_eq!(p.s11, ZERO);
        assert_eq!(p.s21, ONE);

        // den = 1 + 1 + 0 + 1 = 3
        let p = Abcd::series(Complex64::new(50.0, 0.0))
            .unwrap()
            .to_s(1e9, 50.0)
            .unwrap();
        assert!(close(p.s11, Complex64::new(1.0 / 3.0, 0.0), 1e-15));
        assert!(close(p.s21, Complex64::new(2.0 / 3.0, 0.0), 1e-15));
        assert_eq!(p.s21, p.s12);
    }

    #[test]
    fn singular_conversion_reports_frequency() {
        // a + b/z0 + c z0 + d = 1 + 0 + 0 - 1 = 0
        let m = Abcd::new(ONE, ZERO, ZERO, -ONE);
        assert_eq!(
            m.to_s(123.0, 50.0),
            Err(Error::SingularConversion { frequency_hz: 123.0 })
        );
    }

    #[test]
    fn s_to_abcd_identity_and_errors() {
        let p = SParameterPoint {
            frequency_hz: 1.0,
            z0_ohm: 50.0,
            s11: ZERO,
            s21: ONE,
            s12: ONE,
            s22: ZERO,
        };
        assert_eq!(Abcd::from_s(&p).unwrap(), Abcd::IDENTITY);
        let blocked = SParameterPoint { s21: ZERO, ..p };
        assert_eq!(
            Abcd::from_s(&blocked),
            Err(Error::NonTransmissive { frequency_hz: 1.0 })
        );
    }

    #[test]
    fn round_trip_series_reactance() {
        let m = Abcd::series(j(50.0)).unwrap();
        let back = Abcd::from_s(&m.to_s(1e9, 50.0).unwrap()).unwrap();
        assert!(m.relative_diff(&back) < 1e-10);
    }

    #[test]
    fn reciprocal_conversion_forces_equal_transmission() {
        let m = Abcd::series(j(-406.41)).unwrap() * Abcd::shunt(j(67.65)).unwrap();
        let s = m.to_s_reciprocal(1e9, 50.0).unwrap();
        assert_eq!(s.s12, s.s21);
        let t = m.to_s(1e9, 50.0).unwrap();
        assert_eq!((t.s11, t.s21, t.s22), (s.s11, s.s21, s.s22));
    }
}
