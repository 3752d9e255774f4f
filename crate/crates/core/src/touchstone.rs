//! Touchstone v1 (`.sNp`) reader and writer for S-parameters.
//!
//! Data layout per frequency point:
//! * 1 port: `f S11`
//! * 2 ports: `f S11 S21 S12 S22` on one line
//! * 3+ ports: row-major `S11 S12 … Snn`, wrapped after any complete pair;
//!   the writer starts every matrix row on a new line with at most four
//!   pairs per line.
//!
//! Port count is not recorded in v1 files and must come from the caller
//! (normally the `N` in the `.sNp` extension).

use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::network::ScatteringMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FreqUnit {
    Hz,
    KHz,
    MHz,
    #[default]
    GHz,
}

impl FreqUnit {
    pub fn multiplier(self) -> f64 {
        match self {
            FreqUnit::Hz => 1.0,
            FreqUnit::KHz => 1e3,
            FreqUnit::MHz => 1e6,
            FreqUnit::GHz => 1e9,
        }
    }
}

impl fmt::Display for FreqUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FreqUnit::Hz => "HZ",
            FreqUnit::KHz => "KHZ",
            FreqUnit::MHz => "MHZ",
            FreqUnit::GHz => "GHZ",
        })
    }
}

/// Encoding of each complex value as a pair of numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValueFormat {
    /// Real, imaginary.
    RI,
    /// Magnitude, angle in degrees.
    #[default]
    MA,
    /// Magnitude in dB, angle in degrees.
    DB,
}

impl ValueFormat {
    pub fn decode(self, a: f64, b: f64) -> C64 {
        match self {
            ValueFormat::RI => C64::new(a, b),
            ValueFormat::MA => C64::from_polar(a, b * PI / 180.0),
            ValueFormat::DB => C64::from_polar(10f64.powf(a / 20.0), b * PI / 180.0),
        }
    }

    pub fn encode(self, z: C64) -> (f64, f64) {
        match self {
            ValueFormat::RI => (z.re, z.im),
            ValueFormat::MA => (z.norm(), z.arg().to_degrees()),
            ValueFormat::DB => {
                let mag = z.norm();
                // zero has no dB value; -999 dB decodes to ~1e-50
                let db = if mag > 0.0 {
                    20.0 * mag.log10()
                } else {
                    -999.0
                };
                (db, z.arg().to_degrees())
            }
        }
    }
}

impl fmt::Display for ValueFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueFormat::RI => "RI",
            ValueFormat::MA => "MA",
            ValueFormat::DB => "DB",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TouchstonePoint {
    /// Frequency in the document's unit.
    pub frequency: f64,
    pub matrix: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TouchstoneDocument {
    pub freq_unit: FreqUnit,
    pub value_format: ValueFormat,
    pub reference_ohms: f64,
    pub port_count: usize,
    pub points: Vec<TouchstonePoint>,
    /// Comment text following each `!`, in file order.
    pub comments: Vec<String>,
}

impl TouchstoneDocument {
    pub fn new(port_count: usize) -> Self {
        Self {
            freq_unit: FreqUnit::default(),
            value_format: ValueFormat::default(),
            reference_ohms: 50.0,
            port_count,
            points: Vec::new(),
            comments: Vec::new(),
        }
    }

    /// Single-point document holding `s`, with the frequency in GHz.
    pub fn from_scattering(s: &ScatteringMatrix, value_format: ValueFormat) -> Self {
        let mut doc = Self::new(s.port_count());
        doc.value_format = value_format;
        doc.reference_ohms = s.reference_ohms();
        doc.points.push(TouchstonePoint {
            frequency: s.frequency_hz() / FreqUnit::GHz.multiplier(),
            matrix: s.matrix().clone(),
        });
        doc
    }

    pub fn frequencies_hz(&self) -> Vec<f64> {
        let mult = self.freq_unit.multiplier();
        self.points.iter().map(|p| p.frequency * mult).collect()
    }
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Touchstone {
        line,
        msg: msg.into(),
    }
}

struct OptionLine {
    unit: FreqUnit,
    format: ValueFormat,
    ohms: f64,
}

fn parse_option_line(body: &str, line: usize) -> Result<OptionLine> {
    let mut opt = OptionLine {
        unit: FreqUnit::GHz,
        format: ValueFormat::MA,
        ohms: 50.0,
    };
    let mut tokens = body.split_whitespace();
    while let Some(tok) = tokens.next() {
        match tok.to_ascii_uppercase().as_str() {
            "HZ" => opt.unit = FreqUnit::Hz,
            "KHZ" => opt.unit = FreqUnit::KHz,
            "MHZ" => opt.unit = FreqUnit::MHz,
            "GHZ" => opt.unit = FreqUnit::GHz,
            "S" => {}
            p @ ("Y" | "Z" | "H" | "G") => {
                return Err(err(
                    line,
                    format!("parameter type {p} is not supported, only S"),
                ));
            }
            "RI" => opt.format = ValueFormat::RI,
            "MA" => opt.format = ValueFormat::MA,
            "DB" => opt.format = ValueFormat::DB,
            "R" => {
                let value = tokens
                    .next()
                    .ok_or_else(|| err(line, "R without a value"))?;
                opt.ohms = f64::from_str(value)
                    .ok()
                    .filter(|r| *r > 0.0 && r.is_finite())
                    .ok_or_else(|| err(line, format!("invalid reference impedance {value:?}")))?;
            }
            other => return Err(err(line, format!("unrecognized option {other:?}"))),
        }
    }
    Ok(opt)
}

struct PendingPoint {
    start_line: usize,
    frequency: f64,
    values: Vec<f64>,
}

/// Parses a Touchstone v1 S-parameter file with `port_count` ports.
pub fn parse_touchstone(text: &str, port_count: usize) -> Result<TouchstoneDocument> {
    if port_count == 0 {
        return Err(err(0, "port count must be positive"));
    }
    if text.trim().is_empty() {
        return Err(err(0, "empty input"));
    }
    let per_point = 2 * port_count * port_count;
    let mut doc = TouchstoneDocument::new(port_count);
    let mut seen_option = false;
    let mut pending: Option<PendingPoint> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let (body, comment) = match raw.find('!') {
            Some(pos) => (&raw[..pos], Some(&raw[pos + 1..])),
            None => (raw, None),
        };
        if let Some(c) = comment {
            doc.comments.push(c.to_string());
        }
        let body = body.trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('#') {
            if !seen_option {
                let opt = parse_option_line(rest, line_no)?;
                doc.freq_unit = opt.unit;
                doc.value_format = opt.format;
                doc.reference_ohms = opt.ohms;
                seen_option = true;
            }
            continue;
        }
        if body.starts_with('[') {
            return Err(err(line_no, "Touchstone v2 keywords are not supported"));
        }

        let numbers = body
            .split_whitespace()
            .map(|tok| {
                f64::from_str(tok)
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| err(line_no, format!("non-numeric token {tok:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;

        match pending.as_mut() {
            Some(p) => {
                if numbers.len() % 2 != 0 {
                    return Err(err(
                        line_no,
                        "continuation line must hold complete value pairs",
                    ));
                }
                if p.values.len() + numbers.len() > per_point {
                    return Err(err(
                        line_no,
                        format!(
                            "point starting on line {} has more than {per_point} data values",
                            p.start_line
                        ),
                    ));
                }
                p.values.extend(numbers);
            }
            None => {
                let data = numbers.len() - 1;
                if port_count == 2 && data == 4 {
                    return Err(err(line_no, "noise parameter data is not supported"));
                }
                if port_count <= 2 && data != per_point {
                    return Err(err(
                        line_no,
                        format!(
                            "expected {per_point} data values after the frequency, found {data}"
                        ),
                    ));
                }
                if data % 2 != 0 || data > per_point {
                    return Err(err(
                        line_no,
                        format!("{data} data values do not form complete pairs of a {per_point}-value point"),
                    ));
                }
                let frequency = numbers[0];
                if let Some(last) = doc.points.last() {
                    if frequency <= last.frequency {
                        let msg = if port_count == 2 {
                            format!("frequency {frequency} is not above {} (noise data is not supported)", last.frequency)
                        } else {
                            format!("frequency {frequency} is not above {}", last.frequency)
                        };
                        return Err(err(line_no, msg));
                    }
                }
                pending = Some(PendingPoint {
                    start_line: line_no,
                    frequency,
                    values: numbers[1..].to_vec(),
                });
            }
        }

        if pending
            .as_ref()
            .is_some_and(|p| p.values.len() == per_point)
        {
            let p = pending.take().expect("checked");
            let matrix = assemble(&p.values, port_count, doc.value_format)
                .map_err(|e| err(p.start_line, e.to_string()))?;
            doc.points.push(TouchstonePoint {
                frequency: p.frequency,
                matrix,
            });
        }
    }

    if let Some(p) = pending {
        return Err(err(
            p.start_line,
            format!(
                "point has {} data values, expected a multiple of {per_point}",
                p.values.len()
            ),
        ));
    }
    Ok(doc)
}

fn assemble(values: &[f64], n: usize, format: ValueFormat) -> Result<CMatrix> {
    let pairs: Vec<C64> = values
        .chunks_exact(2)
        .map(|c| format.decode(c[0], c[1]))
        .collect();
    let mut m = CMatrix::zeros(n, n);
    if n == 2 {
        m[(0, 0)] = pairs[0];
        m[(1, 0)] = pairs[1];
        m[(0, 1)] = pairs[2];
        m[(1, 1)] = pairs[3];
    } else {
        for (k, z) in pairs.into_iter().enumerate() {
            m[(k / n, k % n)] = z;
        }
    }
    if !m
        .as_slice()
        .iter()
        .all(|z| z.re.is_finite() && z.im.is_finite())
    {
        return Err(Error::NonFinite("touchstone point"));
    }
    Ok(m)
}

const PAIRS_PER_LINE: usize = 4;

/// Serializes `doc`; values are written with the shortest representation
/// that parses back to the same `f64`.
pub fn write_touchstone(doc: &TouchstoneDocument) -> String {
    let mut out = String::new();
    for c in &doc.comments {
        let _ = writeln!(out, "!{c}");
    }
    let _ = writeln!(
        out,
        "# {} S {} R {}",
        doc.freq_unit, doc.value_format, doc.reference_ohms
    );
    let n = doc.port_count;
    let pair = |z: C64| {
        let (a, b) = doc.value_format.encode(z);
        format!("{a:e} {b:e}")
    };
    for point in &doc.points {
        let m = &point.matrix;
        let freq = format!("{}", point.frequency);
        match n {
            1 => {
                let _ = writeln!(out, "{freq} {}", pair(m[(0, 0)]));
            }
            2 => {
                let _ = writeln!(
                    out,
                    "{freq} {} {} {} {}",
                    pair(m[(0, 0)]),
                    pair(m[(1, 0)]),
                    pair(m[(0, 1)]),
                    pair(m[(1, 1)])
                );
            }
            _ => {
                for i in 0..n {
                    for (chunk_idx, chunk) in (0..n)
                        .collect::<Vec<_>>()
                        .chunks(PAIRS_PER_LINE)
                        .enumerate()
                    {
                        let body: Vec<String> = chunk.iter().map(|&j| pair(m[(i, j)])).collect();
                        if i == 0 && chunk_idx == 0 {
                            let _ = writeln!(out, "{freq} {}", body.join(" "));
                        } else {
                            let _ = writeln!(out, "{}", body.join(" "));
                        }
                    }
                }
            }
        }
    }
    out
}

/// Picks the point nearest `frequency_hz`, provided it lies within `tolerance_hz`.
pub fn to_scattering_matrix(
    doc: &TouchstoneDocument,
    frequency_hz: f64,
    tolerance_hz: f64,
) -> Result<ScatteringMatrix> {
    let freqs = doc.frequencies_hz();
    let nearest = freqs.iter().enumerate().min_by(|a, b| {
        (a.1 - frequency_hz)
            .abs()
            .total_cmp(&(b.1 - frequency_hz).abs())
    });
    match nearest {
        Some((i, f)) if (f - frequency_hz).abs() <= tolerance_hz => {
            ScatteringMatrix::new(doc.points[i].matrix.clone(), *f, doc.reference_ohms)
        }
        _ => Err(Error::FrequencyNotFound {
            frequency_hz,
            tolerance_hz,
            available: freqs
                .iter()
                .map(|f| format!("{f}"))
                .collect::<Vec<_>>()
                .join(", "),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_port_column_major_order() {
        let doc = parse_touchstone("# GHz S RI R 50\n2.4 1 0 0 1 0 1 1 0\n", 2).unwrap();
        assert_eq!(doc.points.len(), 1);
        assert_eq!(doc.points[0].frequency, 2.4);
        let m = &doc.points[0].matrix;
        assert_eq!(m[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(m[(1, 0)], C64::new(0.0, 1.0));
        assert_eq!(m[(0, 1)], C64::new(0.0, 1.0));
        assert_eq!(m[(1, 1)], C64::new(1.0, 0.0));
    }

    #[test]
    fn polar_pairs() {
        let z = ValueFormat::MA.decode(1.0, 90.0);
        assert!((z - C64::new(0.0, 1.0)).norm() <= 1e-15);
        let z = ValueFormat::DB.decode(-20.0, 180.0);
        assert!((z - C64::new(-0.1, 0.0)).norm() <= 1e-15);
    }

    #[test]
    fn defaults_apply_when_fields_omitted() {
        let doc = parse_touchstone("#\n1 0.5 90\n", 1).unwrap();
        assert_eq!(doc.freq_unit, FreqUnit::GHz);
        assert_eq!(doc.value_format, ValueFormat::MA);
        assert_eq!(doc.reference_ohms, 50.0);
        let doc = parse_touchstone("# mhz ri r 75\n100 0.5 0.5\n", 1).unwrap();
        assert_eq!(doc.freq_unit, FreqUnit::MHz);
        assert_eq!(doc.reference_ohms, 75.0);
    }

    #[test]
    fn short_two_port_line_is_rejected() {
        let e = parse_touchstone("# GHz S RI R 50\n! c\n2.4 1 0 0 1 0 1 1\n", 2).unwrap_err();
        assert!(matches!(e, Error::Touchstone { line: 3, .. }), "{e}");
    }

    #[test]
    fn errors_name_the_line() {
        let e = parse_touchstone("# GHz Q RI\n", 1).unwrap_err();
        assert!(matches!(e, Error::Touchstone { line: 1, .. }));
        let e = parse_touchstone("# GHz S RI\n1 0 x\n", 1).unwrap_err();
        assert!(matches!(e, Error::Touchstone { line: 2, .. }));
        let e = parse_touchstone("# GHz S RI\n2 0 0\n1 0 0\n", 1).unwrap_err();
        assert!(matches!(e, Error::Touchstone { line: 3, .. }));
        let e = parse_touchstone("# GHz Z RI\n1 0 0\n", 1).unwrap_err();
        assert!(e.to_string().contains("only S"));
    }

    #[test]
    fn noise_block_rejected() {
        let text = "# GHz S MA R 50\n2.4 1 0 0 0 0 0 1 0\n2.0 1.2 0.5 30 0.3\n";
        let e = parse_touchstone(text, 2).unwrap_err();
        assert!(e.to_string().contains("noise"), "{e}");
    }

    #[test]
    fn three_port_wrapping_and_truncation() {
        let text = "# GHz S RI R 50\n\
                    1.0 1 0 2 0 3 0\n\
                    4 0 5 0 ! inline\n\n\
                    6 0 7 0 8 0 9 0\n";
        let doc = parse_touchstone(text, 3).unwrap();
        let m = &doc.points[0].matrix;
        assert_eq!(m[(0, 2)], C64::new(3.0, 0.0));
        assert_eq!(m[(1, 0)], C64::new(4.0, 0.0));
        assert_eq!(m[(2, 2)], C64::new(9.0, 0.0));
        assert_eq!(doc.comments, vec![" inline".to_string()]);

        let e = parse_touchstone("# GHz S RI R 50\n1.0 1 0 2 0 3 0\n4 0\n", 3).unwrap_err();
        assert!(matches!(e, Error::Touchstone { line: 2, .. }));
        let e = parse_touchstone("# GHz S RI R 50\n1.0 1 0 2 0 3 0\n4 0 5\n", 3).unwrap_err();
        assert!(matches!(e, Error::Touchstone { line: 3, .. }));
    }

    #[test]
    fn header_only_round_trip() {
        let doc = TouchstoneDocument::new(4);
        let text = write_touchstone(&doc);
        assert_eq!(text.lines().count(), 1);
        let back = parse_touchstone(&text, 4).unwrap();
        assert!(back.points.is_empty());
    }

    #[test]
    fn twelve_port_layout() {
        let mut doc = TouchstoneDocument::new(12);
        doc.value_format = ValueFormat::RI;
        doc.points.push(TouchstonePoint {
            frequency: 2.4,
            matrix: CMatrix::identity(12),
        });
        let text = write_touchstone(&doc);
        let data: Vec<&str> = text.lines().skip(1).collect();
        // 12 rows of 12 pairs, four pairs per line
        assert_eq!(data.len(), 36);
        assert!(data[0].starts_with("2.4 "));
        assert_eq!(data[0].split_whitespace().count(), 9);
        assert!(data[1..].iter().all(|l| l.split_whitespace().count() == 8));
        let back = parse_touchstone(&text, 12).unwrap();
        assert_eq!(back.points[0].matrix, CMatrix::identity(12));
    }

    #[test]
    fn nearest_frequency_selection() {
        let mut doc = TouchstoneDocument::new(1);
        for (f, v) in [(2.3, 0.1), (2.4, 0.2), (2.5, 0.3)] {
            doc.points.push(TouchstonePoint {
                frequency: f,
                matrix: CMatrix::from_real_diag(&[v]),
            });
        }
        let s = to_scattering_matrix(&doc, 2.41e9, 50e6).unwrap();
        assert_eq!(s.matrix()[(0, 0)], C64::new(0.2, 0.0));
        assert_eq!(s.frequency_hz(), 2.4e9);
        let e = to_scattering_matrix(&doc, 3.0e9, 10e6).unwrap_err();
        assert!(matches!(e, Error::FrequencyNotFound { .. }));
        assert!(e.to_string().contains("2400000000"));
    }
}
