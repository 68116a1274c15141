//! Version-1 Touchstone `.s2p` reading and writing.
//!
//! Frequencies are written as the shortest decimal of the value in Hz with the
//! exponent shifted into the file's unit, and read back by shifting the
//! exponent the other way before parsing. Frequencies therefore survive a
//! round trip bit for bit.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sweep::{SParameterPoint, SweepTable};

/// Smallest magnitude written in dB form, so a zero becomes −400 dB.
pub const DB_MAGNITUDE_FLOOR: f64 = 1e-20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrequencyUnit {
    Hz,
    Khz,
    Mhz,
    #[default]
    Ghz,
}

impl FrequencyUnit {
    /// Power of ten from the unit to Hz.
    pub fn exponent(self) -> i32 {
        match self {
            FrequencyUnit::Hz => 0,
            FrequencyUnit::Khz => 3,
            FrequencyUnit::Mhz => 6,
            FrequencyUnit::Ghz => 9,
        }
    }

    fn token(self) -> &'static str {
        match self {
            FrequencyUnit::Hz => "HZ",
            FrequencyUnit::Khz => "KHZ",
            FrequencyUnit::Mhz => "MHZ",
            FrequencyUnit::Ghz => "GHZ",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    /// Real and imaginary parts.
    Ri,
    /// Linear magnitude and angle in degrees.
    #[default]
    Ma,
    /// Magnitude in dB and angle in degrees.
    Db,
}

impl DataFormat {
    fn token(self) -> &'static str {
        match self {
            DataFormat::Ri => "RI",
            DataFormat::Ma => "MA",
            DataFormat::Db => "DB",
        }
    }
}

impl fmt::Display for DataFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for DataFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "RI" => Ok(DataFormat::Ri),
            "MA" => Ok(DataFormat::Ma),
            "DB" => Ok(DataFormat::Db),
            _ => Err(Error::Unsupported(format!("data format {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionLine {
    pub unit: FrequencyUnit,
    pub format: DataFormat,
    pub z0_ohm: f64,
}

impl Default for OptionLine {
    fn default() -> Self {
        Self {
            unit: FrequencyUnit::Ghz,
            format: DataFormat::Ma,
            z0_ohm: 50.0,
        }
    }
}

impl fmt::Display for OptionLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "# {} S {} R {}",
            self.unit.token(),
            self.format.token(),
            self.z0_ohm
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Touchstone {
    pub options: OptionLine,
    pub table: SweepTable,
    /// Comment lines with the leading `!` removed.
    pub comments: Vec<String>,
    pub warnings: Vec<String>,
}

/// Parses a decimal token after multiplying it by 10^`shift`, done on the
/// exponent text so no rounding is introduced.
fn parse_scaled(token: &str, shift: i32) -> Option<f64> {
    let (mantissa, exp) = match token.find(['e', 'E']) {
        Some(i) => (&token[..i], token[i + 1..].parse::<i32>().ok()?),
        None => (token, 0),
    };
    mantissa.parse::<f64>().ok()?;
    format!("{mantissa}e{}", exp + shift).parse().ok()
}

/// Shortest round-trip decimal of `value`, with its exponent lowered by `shift`.
fn format_scaled(value: f64, shift: i32) -> String {
    let text = format!("{value:e}");
    let (mantissa, exp) = text.split_once('e').expect("`{:e}` always has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    format!("{mantissa}e{}", exp - shift)
}

fn parse_option_line(body: &str, line: usize) -> Result<OptionLine> {
    let mut opts = OptionLine::default();
    let mut tokens = body.split_whitespace();
    while let Some(tok) = tokens.next() {
        match tok.to_ascii_uppercase().as_str() {
            "HZ" => opts.unit = FrequencyUnit::Hz,
            "KHZ" => opts.unit = FrequencyUnit::Khz,
            "MHZ" => opts.unit = FrequencyUnit::Mhz,
            "GHZ" => opts.unit = FrequencyUnit::Ghz,
            "S" => {}
            "Y" | "Z" | "H" | "G" => {
                return Err(Error::Unsupported(format!(
                    "line {line}: parameter type {tok}, only S-parameters are read"
                )))
            }
            "RI" => opts.format = DataFormat::Ri,
            "MA" => opts.format = DataFormat::Ma,
            "DB" => opts.format = DataFormat::Db,
            "R" => {
                let value = tokens.next().ok_or_else(|| Error::Parse {
                    line,
                    message: "R without a reference impedance".into(),
                })?;
                opts.z0_ohm = match value.parse::<f64>() {
                    Ok(z) if z > 0.0 && z.is_finite() => z,
                    _ => {
                        return Err(Error::Parse {
                            line,
                            message: format!("invalid reference impedance {value:?}"),
                        })
                    }
                };
            }
            _ => {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown option {tok:?}"),
                })
            }
        }
    }
    Ok(opts)
}

fn to_complex(format: DataFormat, x: f64, y: f64) -> Complex64 {
    match format {
        DataFormat::Ri => Complex64::new(x, y),
        DataFormat::Ma => Complex64::from_polar(x, y.to_radians()),
        DataFormat::Db => Complex64::from_polar(10f64.powf(x / 20.0), y.to_radians()),
    }
}

fn from_complex(format: DataFormat, z: Complex64) -> (f64, f64) {
    match format {
        DataFormat::Ri => (z.re, z.im),
        DataFormat::Ma => (z.norm(), z.arg() * 180.0 / PI),
        DataFormat::Db => (
            20.0 * z.norm().max(DB_MAGNITUDE_FLOOR).log10(),
            z.arg() * 180.0 / PI,
        ),
    }
}

/// Parses two-port version-1 Touchstone text. Rows are `f S11 S21 S12 S22`.
///
/// Out-of-order rows are sorted (stable) with a warning; rows at zero
/// frequency are dropped with a warning.
pub fn parse_s2p(text: &str) -> Result<Touchstone> {
    let mut options: Option<OptionLine> = None;
    let mut comments = Vec::new();
    let mut warnings = Vec::new();
    let mut rows: Vec<(usize, SParameterPoint)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let (content, comment) = match raw.find('!') {
            Some(i) => (&raw[..i], Some(&raw[i + 1..])),
            None => (raw, None),
        };
        if let Some(c) = comment {
            if content.trim().is_empty() {
                comments.push(c.trim().to_string());
            }
        }
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            return Err(Error::Unsupported(format!(
                "line {line}: keyword {} (version-2 files are not read)",
                content.split_whitespace().next().unwrap_or(content)
            )));
        }
        if let Some(body) = content.strip_prefix('#') {
            if options.is_some() {
                return Err(Error::Parse {
                    line,
                    message: "second option line".into(),
                });
            }
            if !rows.is_empty() {
                return Err(Error::Parse {
                    line,
                    message: "option line after data".into(),
                });
            }
            options = Some(parse_option_line(body, line)?);
            continue;
        }

        let opts = *options.get_or_insert_with(OptionLine::default);
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 9 {
            return Err(Error::Parse {
                line,
                message: format!("expected 9 values, found {}", fields.len()),
            });
        }
        let frequency_hz = parse_scaled(fields[0], opts.unit.exponent()).ok_or_else(|| {
            Error::Parse {
                line,
                message: format!("invalid frequency {:?}", fields[0]),
            }
        })?;
        let mut v = [0.0f64; 8];
        for (slot, tok) in v.iter_mut().zip(&fields[1..]) {
            *slot = tok.parse().map_err(|_| Error::Parse {
                line,
                message: format!("invalid number {tok:?}"),
            })?;
        }
        if !(frequency_hz.is_finite() && frequency_hz >= 0.0) || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Parse {
                line,
                message: "non-finite or negative value".into(),
            });
        }
        if frequency_hz == 0.0 {
            warnings.push(format!("line {line}: zero-frequency row skipped"));
            continue;
        }
        let s = |k: usize| to_complex(opts.format, v[2 * k], v[2 * k + 1]);
        rows.push((
            line,
            SParameterPoint {
                frequency_hz,
                z0_ohm: opts.z0_ohm,
                s11: s(0),
                s21: s(1),
                s12: s(2),
                s22: s(3),
            },
        ));
    }

    let options = options.unwrap_or_default();
    if rows.is_empty() {
        return Err(Error::EmptySweep);
    }
    if rows.windows(2).any(|w| w[1].1.frequency_hz < w[0].1.frequency_hz) {
        warnings.push("rows not in increasing frequency order; sorted".into());
        rows.sort_by(|a, b| a.1.frequency_hz.total_cmp(&b.1.frequency_hz));
    }
    if let Some(w) = rows
        .windows(2)
        .find(|w| w[1].1.frequency_hz == w[0].1.frequency_hz)
    {
        return Err(Error::Parse {
            line: w[1].0,
            message: format!("duplicate frequency {} Hz (also on line {})", w[1].1.frequency_hz, w[0].0),
        });
    }
    let table = SweepTable::new(options.z0_ohm, rows.into_iter().map(|(_, p)| p).collect())?;
    Ok(Touchstone {
        options,
        table,
        comments,
        warnings,
    })
}

pub fn read_s2p(path: impl AsRef<Path>) -> Result<Touchstone> {
    parse_s2p(&std::fs::read_to_string(path)?)
}

/// Renders `table` as version-1 Touchstone. Each `header` line becomes a comment.
pub fn write_s2p(
    table: &SweepTable,
    format: DataFormat,
    unit: FrequencyUnit,
    header: &[&str],
) -> String {
    let mut out = String::new();
    for h in header {
        out.push_str("! ");
        out.push_str(h);
        out.push('\n');
    }
    let opts = OptionLine {
        unit,
        format,
        z0_ohm: table.z0_ohm(),
    };
    out.push_str(&opts.to_string());
    out.push('\n');
    for p in table.points() {
        out.push_str(&format_scaled(p.frequency_hz, unit.exponent()));
        for s in [p.s11, p.s21, p.s12, p.s22] {
            let (x, y) = from_complex(format, s);
            let cell = match format {
                DataFormat::Ri => format!(" {x:.11e} {y:.11e}"),
                DataFormat::Ma => format!(" {x:.11e} {y:.9}"),
                DataFormat::Db => format!(" {x:.9} {y:.9}"),
            };
            out.push_str(&cell);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
! two rows
# MHz S RI R 75
100 0.1 0.2 0.9 -0.1 0.9 -0.1 0.1 0.2 ! trailing
200 0.2 0.1 0.8 -0.2 0.8 -0.2 0.2 0.1
";

    #[test]
    fn reads_ri_in_mhz() {
        let t = parse_s2p(SAMPLE).unwrap();
        assert_eq!(t.options.unit, FrequencyUnit::Mhz);
        assert_eq!(t.options.format, DataFormat::Ri);
        assert_eq!(t.table.z0_ohm(), 75.0);
        assert_eq!(t.table.frequencies(), vec![100e6, 200e6]);
        assert_eq!(t.table.points()[0].s21, Complex64::new(0.9, -0.1));
        assert_eq!(t.comments, vec!["two rows".to_string()]);
        assert!(t.warnings.is_empty());
    }

    #[test]
    fn defaults_without_option_line() {
        let t = parse_s2p("1 1 0 1 90 1 90 1 0\n").unwrap();
        assert_eq!(t.options, OptionLine::default());
        assert_eq!(t.table.frequencies(), vec![1e9]);
        assert!((t.table.points()[0].s21 - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn option_tokens_in_any_order() {
        let t = parse_s2p("# r 25 db khz s\n1 0 0 0 0 0 0 0 0\n").unwrap();
        assert_eq!(
            t.options,
            OptionLine {
                unit: FrequencyUnit::Khz,
                format: DataFormat::Db,
                z0_ohm: 25.0
            }
        );
        assert!((t.table.points()[0].s11.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn malformed_inputs() {
        let wrong_count = "# GHZ S MA R 50\n1 0 0 0 0 0 0 0\n";
        assert_eq!(
            parse_s2p(wrong_count).unwrap_err(),
            Error::Parse {
                line: 2,
                message: "expected 9 values, found 8".into()
            }
        );
        assert!(matches!(
            parse_s2p("# GHZ Y MA R 50\n"),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            parse_s2p("[Version] 2.0\n"),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            parse_s2p("# GHZ\n# MHZ\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_s2p("# GHZ S MA R\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_s2p("1 0 0 0 0 0 0 0 x\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_s2p("1 0 0 0 0 0 0 0 0\n1 0 0 0 0 0 0 0 0\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert_eq!(parse_s2p("! nothing\n"), Err(Error::EmptySweep));
    }

    #[test]
    fn out_of_order_rows_are_sorted_with_warning() {
        let t = parse_s2p("2 0 0 1 0 1 0 0 0\n1 0 0 1 0 1 0 0 0\n3 0 0 1 0 1 0 0 0\n").unwrap();
        assert_eq!(t.table.frequencies(), vec![1e9, 2e9, 3e9]);
        assert_eq!(t.warnings.len(), 1);
    }

    #[test]
    fn exponent_shifting_is_exact() {
        for f in [730e6, 0.1e9 + 0.2e9, 1.234_567_890_123e9, 3.0, 999_999_999.999_999_9] {
            for unit in [FrequencyUnit::Hz, FrequencyUnit::Khz, FrequencyUnit::Mhz, FrequencyUnit::Ghz] {
                let text = format_scaled(f, unit.exponent());
                assert_eq!(parse_scaled(&text, unit.exponent()), Some(f), "{text}");
            }
        }
        assert_eq!(format_scaled(730e6, 9), "7.3e-1");
        assert_eq!(parse_scaled("0.73", 9), Some(730e6));
        assert_eq!(parse_scaled("abc", 9), None);
    }

    #[test]
    fn written_header() {
        let t = parse_s2p(SAMPLE).unwrap();
        let text = write_s2p(&t.table, DataFormat::Db, FrequencyUnit::Ghz, &["made here"]);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("! made here"));
        assert_eq!(lines.next(), Some("# GHZ S DB R 75"));
        assert!(lines.next().unwrap().starts_with("1e-1 "));
    }

    #[test]
    fn zero_magnitude_in_db() {
        let (db, _) = from_complex(DataFormat::Db, Complex64::new(0.0, 0.0));
        assert_eq!(db, -400.0);
    }
}
