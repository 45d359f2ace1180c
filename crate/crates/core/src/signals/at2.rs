//! PEER AT2 text format.
//!
//! Layout: three free-text header lines, a fourth line carrying `NPTS=` and
//! `DT=` tokens, then acceleration values in g separated by arbitrary
//! whitespace. Parsing ignores the line structure of the data block.

use super::GroundMotionRecord;
use crate::error::{Error, Result};
use std::fmt::Write as _;

const VALUES_PER_LINE: usize = 5;

/// Parses AT2 content into a record labelled `id`.
pub fn parse_at2(id: &str, text: &str) -> Result<GroundMotionRecord> {
    let mut lines = text.lines();
    let mut header = Vec::with_capacity(4);
    for n in 1..=4 {
        match lines.next() {
            Some(l) => header.push(l.trim_end().to_string()),
            None => {
                return Err(Error::Parse { line: n, msg: "file ends inside the 4-line header".into() });
            }
        }
    }
    let npts_raw = header_value(&header[3], "NPTS")
        .ok_or_else(|| Error::Parse { line: 4, msg: format!("missing or garbled NPTS token in {:?}", header[3]) })?;
    let dt_raw = header_value(&header[3], "DT")
        .ok_or_else(|| Error::Parse { line: 4, msg: format!("missing or garbled DT token in {:?}", header[3]) })?;
    let npts: usize =
        npts_raw.parse().map_err(|_| Error::Parse { line: 4, msg: format!("NPTS value {npts_raw:?} is not a non-negative integer") })?;
    let dt: f64 = match dt_raw.parse() {
        Ok(v) if v > 0.0 && f64::is_finite(v) => v,
        _ => return Err(Error::Parse { line: 4, msg: format!("DT value {dt_raw:?} is not a positive number") }),
    };

    let mut accel = Vec::with_capacity(npts);
    let mut token_index = 0usize;
    for (offset, line) in lines.enumerate() {
        for tok in line.split_whitespace() {
            token_index += 1;
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line: offset + 5,
                msg: format!("non-numeric token {tok:?} at value position {token_index}"),
            })?;
            accel.push(v);
        }
    }
    if accel.len() != npts {
        return Err(Error::CountMismatch { expected: npts, found: accel.len() });
    }
    GroundMotionRecord::new(id, dt, accel, header)
}

/// Extracts the token following `KEY=` (case-insensitive, whitespace allowed
/// around `=`). Returns `None` if the key is absent or has no value.
fn header_value<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let upper = line.to_ascii_uppercase();
    let mut search = 0;
    while let Some(pos) = upper[search..].find(key) {
        let start = search + pos;
        // Reject matches that are the tail of a longer word (e.g. the DT in "WIDTH").
        let boundary = start == 0 || !upper.as_bytes()[start - 1].is_ascii_alphanumeric();
        let rest = upper[start + key.len()..].trim_start();
        if boundary && rest.starts_with('=') {
            let after_eq = &line[line.len() - rest.len() + 1..];
            let value = after_eq.trim_start();
            let end = value.find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'))).unwrap_or(value.len());
            let v = &value[..end];
            return if v.is_empty() { None } else { Some(v) };
        }
        search = start + key.len();
    }
    None
}

/// Serializes a record in AT2 layout: five values per line in scientific
/// notation with seven significant digits.
pub fn write_at2(record: &GroundMotionRecord) -> String {
    let meta = record.source_meta();
    let default_header = [
        format!("SYNTHETIC OR PROCESSED RECORD {}", record.id()),
        String::from("-"),
        String::from("ACCELERATION TIME SERIES IN UNITS OF G"),
    ];
    let mut out = String::new();
    for i in 0..3 {
        let line = meta.get(i).map(String::as_str).unwrap_or(&default_header[i]);
        out.push_str(line);
        out.push('\n');
    }
    let _ = writeln!(out, "NPTS= {}, DT= {} SEC", record.npts(), record.dt());
    for chunk in record.accel().chunks(VALUES_PER_LINE) {
        for v in chunk {
            let _ = write!(out, "{:>15}", format!("{v:.6E}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const HEADER: &str = "PEER STRONG MOTION DATABASE RECORD\nSynthetic fixture\nACCELERATION TIME SERIES IN UNITS OF G\n";

    #[test]
    fn parses_fixture() {
        let text = format!("{HEADER}NPTS= 6, DT= .01 SEC\n0 .1 .2 .1 0 -.1\n");
        let r = parse_at2("fx", &text).unwrap();
        assert_eq!(r.dt(), 0.01);
        assert_eq!(r.npts(), 6);
        assert_eq!(r.accel()[2], 0.2);
        assert_eq!(r.source_meta().len(), 4);
        assert_eq!(r.source_meta()[3], "NPTS= 6, DT= .01 SEC");
    }

    #[test]
    fn count_mismatch() {
        let text = format!("{HEADER}NPTS= 6, DT= .01 SEC\n0 .1 .2 .1 0\n");
        assert!(matches!(parse_at2("fx", &text), Err(Error::CountMismatch { expected: 6, found: 5 })));
    }

    #[test]
    fn layout_insensitive() {
        let a = parse_at2("fx", &format!("{HEADER}NPTS= 6, DT= .01 SEC\n0 .1 .2 .1 0 -.1\n")).unwrap();
        let b = parse_at2("fx", &format!("{HEADER}NPTS= 6, DT= .01 SEC\n0 .1 .2 .1 0\n-.1\n")).unwrap();
        assert_eq!(a.accel(), b.accel());
        assert_eq!(a.dt(), b.dt());
    }

    #[test]
    fn peer_style_header() {
        let text = format!("{HEADER}NPTS=  3, DT=   .0050 SEC,\n  .1E-02 -.2E-02  .3E-02\n");
        let r = parse_at2("fx", &text).unwrap();
        assert_eq!(r.dt(), 0.005);
        assert_eq!(r.accel(), &[0.001, -0.002, 0.003]);
    }

    #[test]
    fn garbled_header_names_line() {
        let text = format!("{HEADER}NPTS= six, DT= .01 SEC\n0 0\n");
        match parse_at2("fx", &text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        let text = format!("{HEADER}NPTS= 2\n0 0\n");
        assert!(matches!(parse_at2("fx", &text), Err(Error::Parse { line: 4, .. })));
    }

    #[test]
    fn bad_token_reports_position() {
        let text = format!("{HEADER}NPTS= 3, DT= .01 SEC\n0.1 0.2\nabc\n");
        match parse_at2("fx", &text) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 6);
                assert!(msg.contains("position 3"), "{msg}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn short_header() {
        assert!(matches!(parse_at2("fx", "a\nb\n"), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn written_layout() {
        let r = GroundMotionRecord::new("w", 0.02, (0..7).map(|k| k as f64 * 0.125).collect(), vec![]).unwrap();
        let text = write_at2(&r);
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 4 + 2);
        assert_eq!(lines[3], "NPTS= 7, DT= 0.02 SEC");
        assert_eq!(lines[4].split_whitespace().count(), 5);
        assert!(lines[4].contains("1.250000E-1"));
    }

    proptest! {
        // Any value with at most seven significant digits survives the
        // write/parse cycle bit-for-bit.
        #[test]
        fn round_trip_bit_exact(
            mantissas in proptest::collection::vec(-9_999_999i64..=9_999_999, 2..40),
            exps in proptest::collection::vec(-9i32..=1, 40),
            dt_ms in 1u32..50,
        ) {
            let accel: Vec<f64> = mantissas
                .iter()
                .zip(&exps)
                .map(|(m, e)| format!("{m}E{e}").parse::<f64>().unwrap())
                .collect();
            let dt = f64::from(dt_ms) / 1000.0;
            let r = GroundMotionRecord::new("p", dt, accel, vec![]).unwrap();
            let back = parse_at2("p", &write_at2(&r)).unwrap();
            prop_assert_eq!(back.dt().to_bits(), r.dt().to_bits());
            prop_assert_eq!(back.npts(), r.npts());
            for (a, b) in back.accel().iter().zip(r.accel()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
