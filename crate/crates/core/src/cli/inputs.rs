use std::path::Path;

use nalgebra::DMatrix;

use super::config::Resolver;
use super::CliError;
use crate::matrix::{parse_header, BernoulliMatrix};
use crate::Error;

/// Numbers separated by commas and/or whitespace, optionally wrapped in
/// parentheses or brackets. An empty list is allowed.
pub fn parse_number_list(s: &str) -> Result<Vec<f64>, CliError> {
    let trimmed = s.trim().trim_matches(|c| matches!(c, '(' | ')' | '[' | ']'));
    trimmed
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| CliError::Config(format!("`{t}` is not a number")))
        })
        .collect()
}

/// A path to an existing file is read; anything else is parsed inline.
pub fn file_or_inline(s: &str) -> Result<String, CliError> {
    let path = Path::new(s);
    if path.is_file() {
        std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{s}: {e}")))
    } else {
        Ok(s.to_string())
    }
}

/// A real vector from a flag (`file|inline`) or a config array or string.
pub fn vector_input(r: &mut Resolver, key: &str, flag: Option<String>) -> Result<Option<Vec<f64>>, CliError> {
    let values = match (flag, r.raw(key)) {
        (Some(f), _) => Some(parse_number_list(&file_or_inline(&f)?)?),
        (None, None) => None,
        (None, Some(toml::Value::String(s))) => Some(parse_number_list(&file_or_inline(&s)?)?),
        (None, Some(toml::Value::Array(arr))) => Some(
            arr.iter()
                .map(|v| {
                    v.as_float()
                        .or_else(|| v.as_integer().map(|i| i as f64))
                        .ok_or_else(|| CliError::Config(format!("key `{key}`: {v} is not a number")))
                })
                .collect::<Result<Vec<_>, _>>()?,
        ),
        (None, Some(other)) => {
            return Err(CliError::Config(format!("key `{key}`: expected a list of numbers, found {other}")))
        }
    };
    if let Some(v) = &values {
        r.inputs.insert(key.to_string(), serde_json::json!(v));
    }
    Ok(values)
}

/// Parse a real matrix: a `rows cols` header, then one row per line, either
/// as `cols` numbers or as a single 0/1 string of length `cols`.
pub fn parse_real_matrix(text: &str) -> Result<DMatrix<f64>, CliError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let (rows, cols) = parse_header(lines.next()).map_err(CliError::Lib)?;
    let mut data = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for line in lines {
        let tokens: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).collect();
        if tokens.len() == 1 && cols > 1 && tokens[0].len() == cols && tokens[0].chars().all(|c| c == '0' || c == '1') {
            data.extend(tokens[0].chars().map(|c| if c == '1' { 1.0 } else { 0.0 }));
        } else if tokens.len() == cols {
            for t in tokens {
                data.push(t.parse::<f64>().map_err(|_| CliError::Config(format!("`{t}` is not a number")))?);
            }
        } else {
            return Err(CliError::Lib(Error::Parse(format!(
                "row {} has {} entries, expected {cols}",
                seen + 1,
                tokens.len()
            ))));
        }
        seen += 1;
    }
    if seen != rows {
        return Err(CliError::Lib(Error::Parse(format!("expected {rows} rows, found {seen}"))));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

/// A 0/1 matrix from `--matrix <file>`, config `matrix` (path) or config
/// `matrix_bits` (array of row strings).
pub fn bit_matrix_input(r: &mut Resolver, flag: Option<String>) -> Result<BernoulliMatrix, CliError> {
    let path = r.string("matrix", flag)?;
    let bits = r.array("matrix_bits")?;
    let m = match (path, bits) {
        (Some(p), _) => {
            let text = std::fs::read_to_string(&p).map_err(|e| CliError::Io(format!("{p}: {e}")))?;
            BernoulliMatrix::from_text(&text).map_err(CliError::Lib)?
        }
        (None, Some(rows)) => {
            let rows: Vec<String> = rows
                .iter()
                .map(|v| {
                    v.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| CliError::Config(format!("key `matrix_bits`: {v} is not a string")))
                })
                .collect::<Result<_, _>>()?;
            BernoulliMatrix::from_bit_strings(&rows).map_err(CliError::Lib)?
        }
        (None, None) => return Err(CliError::Config("missing required key `matrix`".into())),
    };
    r.inputs.insert("matrix".into(), serde_json::Value::from(m.to_text()));
    Ok(m)
}

/// A real matrix from `--<key> <file>`, config `<key>` (path) or config
/// `<key>_rows` (array of number arrays).
pub fn real_matrix_input(r: &mut Resolver, key: &str, flag: Option<String>) -> Result<DMatrix<f64>, CliError> {
    let rows_key = format!("{key}_rows");
    let path = r.string(key, flag)?;
    let rows = r.array(&rows_key)?;
    let m = match (path, rows) {
        (Some(p), _) => {
            let text = std::fs::read_to_string(&p).map_err(|e| CliError::Io(format!("{p}: {e}")))?;
            parse_real_matrix(&text)?
        }
        (None, Some(rows)) => {
            let parsed: Vec<Vec<f64>> = rows
                .iter()
                .map(|row| {
                    row.as_array()
                        .ok_or_else(|| CliError::Config(format!("key `{rows_key}`: rows must be arrays")))?
                        .iter()
                        .map(|v| {
                            v.as_float()
                                .or_else(|| v.as_integer().map(|i| i as f64))
                                .ok_or_else(|| CliError::Config(format!("key `{rows_key}`: {v} is not a number")))
                        })
                        .collect()
                })
                .collect::<Result<_, _>>()?;
            let cols = parsed.first().map_or(0, Vec::len);
            if cols == 0 || parsed.iter().any(|r| r.len() != cols) {
                return Err(CliError::Config(format!("key `{rows_key}`: rows must be nonempty and equal length")));
            }
            DMatrix::from_row_iterator(parsed.len(), cols, parsed.into_iter().flatten())
        }
        (None, None) => return Err(CliError::Config(format!("missing required key `{key}`"))),
    };
    let rows: Vec<Vec<f64>> = m.row_iter().map(|row| row.iter().copied().collect()).collect();
    r.inputs.insert(key.into(), serde_json::json!(rows));
    Ok(m)
}
