//! Dataset files.
//!
//! Two formats are read:
//!
//! * UCR archive files: one curve per line, an integer class label followed
//!   by `p` values, separated by tabs, commas or runs of spaces. Curves are
//!   placed on the uniform grid `t_i = i / (p - 1)`.
//! * The internal format written by [`save_dataset`]: `#` header lines
//!   (`# grid: t_1,...,t_p`, optionally `# channels: d` and `# labels: ...`)
//!   followed by `label,v_1,...` rows. Multichannel rows hold the channels
//!   one after another.

use std::fs;
use std::io::Write;
use std::path::Path;

use fif_core::{Curve, FunctionalDataset, Label, MultiCurve, TimeGrid};

use crate::error::{Error, Result};

const GRID_HEADER: &str = "# grid:";
const CHANNELS_HEADER: &str = "# channels:";
const LABELS_HEADER: &str = "# labels:";

/// What the first column of an internal-format file means.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LabelColumn {
    /// Raw integer class ids.
    Class,
    /// `1` for anomalies, `0` for normal curves.
    Anomaly,
    /// Unlabelled; the column is written as `0` and ignored.
    None,
}

impl LabelColumn {
    fn name(self) -> &'static str {
        match self {
            LabelColumn::Class => "class",
            LabelColumn::Anomaly => "anomaly",
            LabelColumn::None => "none",
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    let text = fs::read_to_string(path).map_err(|source| Error::Read {
        path: path.into(),
        source,
    })?;
    if text.trim().is_empty() {
        return Err(Error::EmptyInput { path: path.into() });
    }
    Ok(text)
}

/// Reads a UCR file or an internal-format file, telling them apart by the
/// grid header.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<FunctionalDataset> {
    let path = path.as_ref();
    let text = read_text(path)?;
    if text.trim_start().starts_with(GRID_HEADER) {
        parse_internal(path, &text)
    } else {
        parse_ucr(path, &text)
    }
}

/// Reads a UCR archive file, keeping raw class ids.
pub fn load_ucr(path: impl AsRef<Path>) -> Result<FunctionalDataset> {
    let path = path.as_ref();
    parse_ucr(path, &read_text(path)?)
}

fn split_fields(line: &str) -> Vec<&str> {
    if line.contains('\t') {
        line.split('\t').map(str::trim).collect()
    } else if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

fn parse_class(path: &Path, row: usize, field: &str) -> Result<i64> {
    if let Ok(v) = field.parse::<i64>() {
        return Ok(v);
    }
    match field.parse::<f64>() {
        // older archive files write labels as floats, e.g. 1.0000000e+00
        Ok(v) if v.fract() == 0.0 && v.abs() < 1e15 => Ok(v as i64),
        _ => Err(Error::Parse {
            path: path.into(),
            row,
            column: 1,
            message: format!("class label {field:?} is not an integer"),
        }),
    }
}

fn parse_value(path: &Path, row: usize, column: usize, field: &str) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(Error::Parse {
            path: path.into(),
            row,
            column,
            message: format!("value {field:?} is not finite"),
        }),
        Err(_) => Err(Error::Parse {
            path: path.into(),
            row,
            column,
            message: format!("value {field:?} is not a number"),
        }),
    }
}

fn parse_ucr(path: &Path, text: &str) -> Result<FunctionalDataset> {
    let mut classes = Vec::new();
    let mut rows = Vec::new();
    let mut width = None;
    for (i, line) in text.lines().enumerate() {
        let row = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_fields(line.trim());
        let expected = *width.get_or_insert(fields.len());
        if fields.len() != expected {
            return Err(Error::Ragged {
                path: path.into(),
                row,
                expected: expected - 1,
                found: fields.len() - 1,
            });
        }
        if fields.len() < 3 {
            return Err(Error::format(
                path,
                format!("row {row}: need a label and at least 2 values"),
            ));
        }
        classes.push(parse_class(path, row, fields[0])?);
        let values = fields[1..]
            .iter()
            .enumerate()
            .map(|(j, f)| parse_value(path, row, j + 2, f))
            .collect::<Result<Vec<_>>>()?;
        rows.push(values);
    }
    let p = rows[0].len();
    let grid = TimeGrid::uniform(p)?;
    Ok(FunctionalDataset::univariate(grid, rows)?.with_classes(classes)?)
}

fn parse_internal(path: &Path, text: &str) -> Result<FunctionalDataset> {
    let mut grid = None;
    let mut channels = 1usize;
    let mut label_column = LabelColumn::Class;
    let mut body_start = 0;
    let lines: Vec<&str> = text.lines().collect();
    for (i, line) in lines.iter().enumerate() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix(GRID_HEADER) {
            let points = rest
                .split(',')
                .enumerate()
                .map(|(j, f)| parse_value(path, i + 1, j + 1, f.trim()))
                .collect::<Result<Vec<_>>>()?;
            grid = Some(TimeGrid::new(points)?);
        } else if let Some(rest) = line.strip_prefix(CHANNELS_HEADER) {
            channels = rest
                .trim()
                .parse()
                .ok()
                .filter(|&d| d >= 1)
                .ok_or_else(|| Error::format(path, format!("bad channel count {:?}", rest.trim())))?;
        } else if let Some(rest) = line.strip_prefix(LABELS_HEADER) {
            label_column = match rest.trim() {
                "class" => LabelColumn::Class,
                "anomaly" => LabelColumn::Anomaly,
                "none" => LabelColumn::None,
                other => return Err(Error::format(path, format!("unknown label kind {other:?}"))),
            };
        } else if line.starts_with('#') {
            return Err(Error::format(path, format!("unknown header line {line:?}")));
        } else {
            body_start = i;
            break;
        }
        body_start = i + 1;
    }
    let grid = grid.ok_or_else(|| Error::format(path, "missing grid header"))?;
    let p = grid.len();

    let body = lines[body_start..].join("\n");
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let mut curves = Vec::new();
    let mut first_column = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let row = body_start + k + 1;
        let record = record.map_err(|e| Error::format(path, format!("row {row}: {e}")))?;
        if record.len() != 1 + channels * p {
            return Err(Error::Ragged {
                path: path.into(),
                row,
                expected: channels * p,
                found: record.len().saturating_sub(1),
            });
        }
        first_column.push(parse_class(path, row, &record[0])?);
        let values = (1..record.len())
            .map(|j| parse_value(path, row, j + 1, &record[j]))
            .collect::<Result<Vec<_>>>()?;
        let curve = MultiCurve::new(
            values
                .chunks(p)
                .map(|c| Curve::new(c.to_vec()))
                .collect::<fif_core::Result<Vec<_>>>()?,
        )?;
        curves.push(curve);
    }
    if curves.is_empty() {
        return Err(Error::format(path, "no data rows"));
    }
    let data = FunctionalDataset::new(grid, curves)?;
    Ok(match label_column {
        LabelColumn::Class => data.with_classes(first_column)?,
        LabelColumn::Anomaly => {
            let labels = first_column
                .iter()
                .enumerate()
                .map(|(i, &v)| match v {
                    0 => Ok(Label::Normal),
                    1 => Ok(Label::Anomaly),
                    _ => Err(Error::Parse {
                        path: path.into(),
                        row: body_start + i + 1,
                        column: 1,
                        message: format!("anomaly flag must be 0 or 1, got {v}"),
                    }),
                })
                .collect::<Result<Vec<_>>>()?;
            data.with_labels(labels)?
        }
        LabelColumn::None => data,
    })
}

/// Writes `data` in the internal format. Class ids are preferred over binary
/// labels when both are present. Values use the shortest representation that
/// parses back to the same `f64`.
pub fn save_dataset(path: impl AsRef<Path>, data: &FunctionalDataset) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    write_dataset(&mut out, data).map_err(|e| Error::Internal(e.to_string()))?;
    fs::write(path, out).map_err(|source| Error::Write {
        path: path.into(),
        source,
    })
}

pub fn write_dataset<W: Write + ?Sized>(out: &mut W, data: &FunctionalDataset) -> std::io::Result<()> {
    let (column, labels): (LabelColumn, Vec<i64>) = match (data.classes(), data.labels()) {
        (Some(c), _) => (LabelColumn::Class, c.to_vec()),
        (None, Some(l)) => (
            LabelColumn::Anomaly,
            l.iter().map(|l| i64::from(l.is_anomaly())).collect(),
        ),
        (None, None) => (LabelColumn::None, vec![0; data.n()]),
    };
    let grid: Vec<String> = data.grid().points().iter().map(f64::to_string).collect();
    writeln!(out, "{GRID_HEADER} {}", grid.join(","))?;
    if data.channels() > 1 {
        writeln!(out, "{CHANNELS_HEADER} {}", data.channels())?;
    }
    writeln!(out, "{LABELS_HEADER} {}", column.name())?;
    let mut writer = csv::Writer::from_writer(out);
    for (curve, label) in data.curves().iter().zip(labels) {
        let mut record = vec![label.to_string()];
        record.extend(curve.flatten().iter().map(f64::to_string));
        writer.write_record(&record)?;
    }
    writer.flush()
}
