//! Column selections such as `year`, `2-13` or `lat,lon,3`.
//!
//! Numbers are 1-based positions, `a-b` is an inclusive position range and
//! anything else names a header field.

use std::fmt;

use crate::ingest::IngestError;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ColumnRef {
    /// 0-based position.
    Index(usize),
    Name(String),
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnRef::Index(i) => write!(f, "{}", i + 1),
            ColumnRef::Name(s) => f.write_str(s),
        }
    }
}

fn position(token: &str) -> Option<Result<usize, IngestError>> {
    if token.is_empty() || !token.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some(match token.parse::<usize>() {
        Ok(0) => Err(IngestError::Columns("column positions start at 1".into())),
        Ok(p) => Ok(p - 1),
        Err(_) => Err(IngestError::Columns(format!(
            "column position {token} is too large"
        ))),
    })
}

/// Parses a comma-separated column selection.
pub fn parse_column_spec(spec: &str) -> Result<Vec<ColumnRef>, IngestError> {
    let mut out = Vec::new();
    for item in spec.split(',') {
        let item = item.trim();
        if item.is_empty() {
            return Err(IngestError::Columns(format!(
                "empty item in column list {spec:?}"
            )));
        }
        if let Some((lo, hi)) = item.split_once('-') {
            if let (Some(lo), Some(hi)) = (position(lo.trim()), position(hi.trim())) {
                let (lo, hi) = (lo?, hi?);
                if lo > hi {
                    return Err(IngestError::Columns(format!("descending range {item}")));
                }
                if hi - lo >= 1 << 16 {
                    return Err(IngestError::Columns(format!("range {item} is too wide")));
                }
                out.extend((lo..=hi).map(ColumnRef::Index));
                continue;
            }
        }
        out.push(match position(item) {
            Some(p) => ColumnRef::Index(p?),
            None => ColumnRef::Name(item.to_string()),
        });
    }
    Ok(out)
}

/// Resolves references to 0-based positions against an optional header.
pub fn resolve(
    refs: &[ColumnRef],
    header: Option<&[String]>,
    width: usize,
) -> Result<Vec<usize>, IngestError> {
    refs.iter()
        .map(|r| match r {
            ColumnRef::Index(i) if *i < width => Ok(*i),
            ColumnRef::Index(i) => Err(IngestError::Columns(format!(
                "column {} out of range, the file has {width}",
                i + 1
            ))),
            ColumnRef::Name(name) => {
                let header = header.ok_or_else(|| {
                    IngestError::Columns(format!("column name {name:?} needs a header row"))
                })?;
                let mut hits = header.iter().enumerate().filter(|(_, h)| h.trim() == name);
                match (hits.next(), hits.next()) {
                    (Some((i, _)), None) => Ok(i),
                    (Some(_), Some(_)) => Err(IngestError::Columns(format!(
                        "column name {name:?} is ambiguous"
                    ))),
                    (None, _) => Err(IngestError::Columns(format!("no column named {name:?}"))),
                }
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_ranges_and_names() {
        let refs = parse_column_spec("year, 2-4,lat-long,7").unwrap();
        assert_eq!(
            refs,
            vec![
                ColumnRef::Name("year".into()),
                ColumnRef::Index(1),
                ColumnRef::Index(2),
                ColumnRef::Index(3),
                ColumnRef::Name("lat-long".into()),
                ColumnRef::Index(6),
            ]
        );
    }

    #[test]
    fn bad_specs() {
        for spec in ["", "a,,b", "0", "3-1", "1-0", "99999999999999999999999"] {
            assert!(parse_column_spec(spec).is_err(), "{spec:?}");
        }
    }

    #[test]
    fn resolution() {
        let header: Vec<String> = ["id", "x", "y", "x"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let refs = parse_column_spec("id,3").unwrap();
        assert_eq!(resolve(&refs, Some(&header), 4).unwrap(), vec![0, 2]);
        assert!(resolve(&parse_column_spec("x").unwrap(), Some(&header), 4).is_err());
        assert!(resolve(&parse_column_spec("5").unwrap(), Some(&header), 4).is_err());
        assert!(resolve(&parse_column_spec("id").unwrap(), None, 4).is_err());
    }
}
