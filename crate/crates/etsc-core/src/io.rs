use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::dataset::{Dataset, LabeledInstance};
use crate::error::CoreError;
use crate::series::TimeSeries;

/// On-disk dataset layouts understood by the loader.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DataFormat {
    /// One instance per line: `label,v1,v2,...`. With `dims > 1` the value
    /// count must divide evenly and values are laid out variable-major
    /// (all of variable 0, then all of variable 1, ...).
    Csv { dims: usize },
    /// Text format used by the UEA/UCR archives: `@`-prefixed headers, a
    /// `@data` marker, then one instance per line with `:`-separated
    /// variables and a trailing `:label` field.
    TsText,
}

impl DataFormat {
    /// Picks a format from the file extension; `.ts` means `TsText`,
    /// anything else is treated as univariate CSV.
    pub fn from_path(path: &Path) -> DataFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("ts") => DataFormat::TsText,
            _ => DataFormat::Csv { dims: 1 },
        }
    }
}

/// Loads a dataset from disk. The dataset name is the file stem.
pub fn load_dataset(path: &Path, format: &DataFormat) -> Result<Dataset, CoreError> {
    let text = fs::read_to_string(path).map_err(|source| CoreError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("dataset")
        .to_string();
    let display = path.display().to_string();
    match format {
        DataFormat::Csv { dims } => parse_csv(&name, &display, &text, *dims),
        DataFormat::TsText => parse_ts_text(&name, &display, &text),
    }
}

fn parse_value(token: &str, path: &str, line: usize) -> Result<f64, CoreError> {
    let token = token.trim();
    if token.is_empty() || token == "?" {
        return Ok(f64::NAN);
    }
    token.parse::<f64>().map_err(|_| CoreError::Parse {
        path: path.to_string(),
        line,
        message: format!("cannot parse {token:?} as a number"),
    })
}

/// Parses CSV text with the label in the first field.
pub fn parse_csv(name: &str, path: &str, text: &str, dims: usize) -> Result<Dataset, CoreError> {
    if dims == 0 {
        return Err(CoreError::Parse {
            path: path.to_string(),
            line: 0,
            message: "dims must be at least 1".to_string(),
        });
    }
    let mut instances = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let label = fields.next().unwrap_or("").trim().to_string();
        if label.is_empty() {
            return Err(CoreError::Parse {
                path: path.to_string(),
                line: line_no,
                message: "missing label in first field".to_string(),
            });
        }
        let values = fields
            .map(|f| parse_value(f, path, line_no))
            .collect::<Result<Vec<f64>, _>>()?;
        if values.is_empty() {
            return Err(CoreError::Parse {
                path: path.to_string(),
                line: line_no,
                message: "no values after the label".to_string(),
            });
        }
        if values.len() % dims != 0 {
            return Err(CoreError::Parse {
                path: path.to_string(),
                line: line_no,
                message: format!(
                    "{} values cannot split into {dims} equal-length variables",
                    values.len()
                ),
            });
        }
        let per_var = values.len() / dims;
        let vars = values.chunks(per_var).map(<[f64]>::to_vec).collect();
        let series = TimeSeries::multivariate(vars).map_err(|e| CoreError::Parse {
            path: path.to_string(),
            line: line_no,
            message: e.to_string(),
        })?;
        instances.push(LabeledInstance::new(series, label));
    }
    Dataset::from_instances(name, instances)
}

/// Parses the UEA/UCR `.ts` text format.
pub fn parse_ts_text(name: &str, path: &str, text: &str) -> Result<Dataset, CoreError> {
    let mut in_data = false;
    let mut instances = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !in_data {
            if line.to_ascii_lowercase() == "@data" {
                in_data = true;
            } else if !line.starts_with('@') {
                return Err(CoreError::Parse {
                    path: path.to_string(),
                    line: line_no,
                    message: "expected @-header or @data before instance lines".to_string(),
                });
            }
            continue;
        }
        let mut parts: Vec<&str> = line.split(':').collect();
        if parts.len() < 2 {
            return Err(CoreError::Parse {
                path: path.to_string(),
                line: line_no,
                message: "instance line needs values and a trailing :label".to_string(),
            });
        }
        let label = parts.pop().unwrap().trim().to_string();
        if label.is_empty() {
            return Err(CoreError::Parse {
                path: path.to_string(),
                line: line_no,
                message: "empty label after the last ':'".to_string(),
            });
        }
        let vars = parts
            .iter()
            .map(|dim| {
                dim.split(',')
                    .map(|v| parse_value(v, path, line_no))
                    .collect::<Result<Vec<f64>, _>>()
            })
            .collect::<Result<Vec<Vec<f64>>, _>>()?;
        let series = TimeSeries::multivariate(vars).map_err(|e| CoreError::Parse {
            path: path.to_string(),
            line: line_no,
            message: e.to_string(),
        })?;
        instances.push(LabeledInstance::new(series, label));
    }
    if !in_data {
        return Err(CoreError::Parse {
            path: path.to_string(),
            line: 0,
            message: "no @data section found".to_string(),
        });
    }
    Dataset::from_instances(name, instances)
}

fn format_value(out: &mut String, v: f64) {
    if v.is_nan() {
        out.push('?');
    } else {
        let _ = write!(out, "{v}");
    }
}

/// Serializes a dataset as label-first CSV (variable-major values).
pub fn write_csv(path: &Path, dataset: &Dataset) -> Result<(), CoreError> {
    let mut out = String::new();
    for inst in dataset.instances() {
        out.push_str(&inst.label);
        for var in inst.series.variables() {
            for &v in var {
                out.push(',');
                format_value(&mut out, v);
            }
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| CoreError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Serializes a dataset in the UEA/UCR `.ts` text format.
pub fn write_ts_text(path: &Path, dataset: &Dataset) -> Result<(), CoreError> {
    let mut out = String::new();
    let _ = writeln!(out, "@problemName {}", dataset.name());
    let _ = writeln!(out, "@timeStamps false");
    let _ = writeln!(out, "@univariate {}", dataset.num_variables() == 1);
    let equal = dataset.equal_length();
    let _ = writeln!(out, "@equalLength {}", equal.is_some());
    if let Some(len) = equal {
        let _ = writeln!(out, "@seriesLength {len}");
    }
    let _ = writeln!(out, "@classLabel true {}", dataset.class_set().join(" "));
    out.push_str("@data\n");
    for inst in dataset.instances() {
        for var in inst.series.variables() {
            for (t, &v) in var.iter().enumerate() {
                if t > 0 {
                    out.push(',');
                }
                format_value(&mut out, v);
            }
            out.push(':');
        }
        out.push_str(&inst.label);
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| CoreError::Io {
        path: path.display().to_string(),
        source,
    })
}
