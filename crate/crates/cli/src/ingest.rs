//! Grouped delimited files: one row per point, one group id per distribution.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, Read};
use std::path::PathBuf;

use thiserror::Error;
use wsd_core::Cloud;

use crate::columns::{parse_column_spec, resolve, ColumnRef};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },

    /// `row` is the 1-based line, `column` the 1-based field position.
    #[error("line {row}, column {column}: {message}")]
    Parse {
        row: u64,
        column: usize,
        message: String,
    },

    #[error("no rows for {0}")]
    EmptyGroup(String),

    #[error("line {row}, column {column}: value is not finite")]
    NonFiniteValue { row: u64, column: usize },

    #[error("bad column selection: {0}")]
    Columns(String),
}

/// Which fields hold what.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub group: ColumnRef,
    /// `None` takes every field except the group column.
    pub coords: Option<Vec<ColumnRef>>,
    pub delimiter: u8,
    pub has_header: bool,
}

impl Layout {
    pub fn new(group: &str, coords: Option<&str>) -> Result<Self, IngestError> {
        let mut group_refs = parse_column_spec(group)?;
        if group_refs.len() != 1 {
            return Err(IngestError::Columns(format!(
                "exactly one group column expected, {group:?} selects {}",
                group_refs.len()
            )));
        }
        let coords = coords.map(parse_column_spec).transpose()?;
        Ok(Self {
            group: group_refs.remove(0),
            coords,
            delimiter: b',',
            has_header: true,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestManifest {
    pub path: PathBuf,
    pub layout: Layout,
}

/// Distributions in order of first appearance of their ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub ids: Vec<String>,
    pub clouds: Vec<Cloud>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.clouds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clouds.is_empty()
    }
}

pub fn ingest(manifest: &IngestManifest) -> Result<Dataset, IngestError> {
    let io_error = |e: io::Error| IngestError::Io {
        path: manifest.path.display().to_string(),
        message: e.to_string(),
    };
    let file = File::open(&manifest.path).map_err(io_error)?;
    ingest_reader(file, &manifest.layout).map_err(|e| match e {
        IngestError::Io { message, .. } => IngestError::Io {
            path: manifest.path.display().to_string(),
            message,
        },
        e => e,
    })
}

pub fn ingest_bytes(data: &[u8], layout: &Layout) -> Result<Dataset, IngestError> {
    ingest_reader(data, layout)
}

fn text(field: &[u8], row: u64, column: usize) -> Result<&str, IngestError> {
    std::str::from_utf8(field)
        .map(str::trim)
        .map_err(|_| IngestError::Parse {
            row,
            column: column + 1,
            message: "invalid UTF-8".into(),
        })
}

struct Columns {
    group: usize,
    coords: Vec<usize>,
}

fn columns(
    layout: &Layout,
    header: Option<&[String]>,
    width: usize,
) -> Result<Columns, IngestError> {
    let group = resolve(std::slice::from_ref(&layout.group), header, width)?[0];
    let coords = match &layout.coords {
        Some(refs) => resolve(refs, header, width)?,
        None => (0..width).filter(|&c| c != group).collect(),
    };
    if coords.is_empty() {
        return Err(IngestError::Columns("no coordinate columns".into()));
    }
    if coords.contains(&group) {
        return Err(IngestError::Columns(format!(
            "column {} is both group and coordinate",
            group + 1
        )));
    }
    let mut seen = coords.clone();
    seen.sort_unstable();
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return Err(IngestError::Columns("coordinate columns repeat".into()));
    }
    Ok(Columns { group, coords })
}

pub fn ingest_reader<R: Read>(reader: R, layout: &Layout) -> Result<Dataset, IngestError> {
    let mut csv = csv::ReaderBuilder::new()
        .delimiter(layout.delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut record = csv::ByteRecord::new();
    let mut header: Option<Vec<String>> = None;
    let mut cols: Option<Columns> = None;
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut ids: Vec<String> = Vec::new();
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut first = true;

    loop {
        let more = csv
            .read_byte_record(&mut record)
            .map_err(|e| match e.kind() {
                csv::ErrorKind::Io(io) => IngestError::Io {
                    path: "input".into(),
                    message: io.to_string(),
                },
                _ => IngestError::Parse {
                    row: e.position().map_or(0, |p| p.line()),
                    column: 0,
                    message: e.to_string(),
                },
            })?;
        if !more {
            break;
        }
        let row = record.position().map_or(0, |p| p.line());
        if std::mem::take(&mut first) && layout.has_header {
            header = Some(
                record
                    .iter()
                    .enumerate()
                    .map(|(c, f)| text(f, row, c).map(str::to_string))
                    .collect::<Result<_, _>>()?,
            );
            continue;
        }
        if cols.is_none() {
            let width = header.as_ref().map_or(record.len(), Vec::len);
            cols = Some(columns(layout, header.as_deref(), width)?);
        }
        let c = cols.as_ref().expect("columns resolved");
        let field = |column: usize| -> Result<&str, IngestError> {
            match record.get(column) {
                Some(f) => text(f, row, column),
                None => Err(IngestError::Parse {
                    row,
                    column: column + 1,
                    message: format!("row has {} fields", record.len()),
                }),
            }
        };
        let id = field(c.group)?;
        if id.is_empty() {
            return Err(IngestError::Parse {
                row,
                column: c.group + 1,
                message: "empty group id".into(),
            });
        }
        let slot = match index.get(id) {
            Some(&k) => k,
            None => {
                index.insert(id.to_string(), ids.len());
                ids.push(id.to_string());
                points.push(Vec::new());
                ids.len() - 1
            }
        };
        for &column in &c.coords {
            let value: f64 = field(column)?.parse().map_err(|e| IngestError::Parse {
                row,
                column: column + 1,
                message: format!("{e}"),
            })?;
            if !value.is_finite() {
                return Err(IngestError::NonFiniteValue {
                    row,
                    column: column + 1,
                });
            }
            points[slot].push(value);
        }
    }

    let Some(c) = cols else {
        return Err(IngestError::EmptyGroup(
            "every group: the file has no data rows".into(),
        ));
    };
    let d = c.coords.len();
    let clouds = points
        .into_iter()
        .zip(&ids)
        .map(|(p, id)| {
            Cloud::uniform(p, d).map_err(|e| IngestError::EmptyGroup(format!("group {id:?} ({e})")))
        })
        .collect::<Result<_, _>>()?;
    Ok(Dataset { ids, clouds })
}
