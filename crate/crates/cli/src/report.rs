//! Line-delimited depth records and the number format shared by all outputs.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use wsd_core::depth::DepthReport;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v)
        .parse()
        .expect("formatted float parses")
}

/// Shortest text of the rounded value, for delimited tables.
pub fn fmt_num(v: f64) -> String {
    let r = round_sig(v);
    if r == 0.0 {
        // Keeps -0 from leaking into tables.
        return "0".into();
    }
    format!("{r}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportRecord {
    pub id: String,
    pub depth: f64,
    pub rank: usize,
    pub flagged: bool,
}

impl ReportRecord {
    pub fn to_line(&self) -> String {
        let rounded = ReportRecord {
            depth: round_sig(self.depth) + 0.0,
            ..self.clone()
        };
        serde_json::to_string(&rounded).expect("record serializes")
    }

    pub fn parse_line(line: &str) -> Result<Self, String> {
        let r: ReportRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
        if r.rank == 0 {
            return Err("rank starts at 1".into());
        }
        if !r.depth.is_finite() {
            return Err("depth is not finite".into());
        }
        Ok(r)
    }
}

pub fn records(ids: &[String], report: &DepthReport) -> Vec<ReportRecord> {
    ids.iter()
        .enumerate()
        .map(|(i, id)| ReportRecord {
            id: id.clone(),
            depth: report.values[i],
            rank: report.ranks[i],
            flagged: report.flags[i],
        })
        .collect()
}

pub fn write_records<W: Write>(out: &mut W, records: &[ReportRecord]) -> io::Result<()> {
    for r in records {
        writeln!(out, "{}", r.to_line())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(2.0 / 3.0), "0.666666666667");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(round_sig(123456.7890123456), 123456.789012);
    }

    #[test]
    fn line_round_trip() {
        let r = ReportRecord {
            id: "1879".into(),
            depth: 0.123456789012345,
            rank: 3,
            flagged: true,
        };
        let line = r.to_line();
        assert_eq!(
            line,
            r#"{"id":"1879","depth":0.123456789012,"rank":3,"flagged":true}"#
        );
        let back = ReportRecord::parse_line(&line).unwrap();
        assert_eq!(back.depth, 0.123456789012);
        assert_eq!(back.to_line(), line);
        assert!(
            ReportRecord::parse_line(r#"{"id":"a","depth":1,"rank":0,"flagged":false}"#).is_err()
        );
        assert!(
            ReportRecord::parse_line(r#"{"id":"a","depth":1,"rank":1,"flagged":false,"x":1}"#)
                .is_err()
        );
    }
}
