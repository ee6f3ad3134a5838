//! `report`: join JSONL results with the closed-form bound columns.

use std::path::{Path, PathBuf};

use num::BigRational;
use serde::Serialize;
use serde_json::Value;

use super::config::required;
use super::output::reproducibility_digest;
use super::{resolver, CliError, Common, Run};
use crate::experiments::{bound_row, BoundRow};
use crate::prob::{ratio_to_f64, Probability};
use crate::Error;

/// One line of the comparison table in CSV form.
#[derive(Debug, Clone, Serialize)]
pub struct CsvRow {
    pub n: usize,
    pub k: usize,
    pub p: String,
    pub epsilon: f64,
    pub exact_or_estimate: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub theorem_rate: f64,
    pub zero_rows_lower: f64,
    pub conjecture_rhs: f64,
    pub structured_lower: f64,
}

impl CsvRow {
    pub fn from_bounds(b: &BoundRow) -> Self {
        CsvRow {
            n: b.n,
            k: b.k,
            p: b.p.to_string(),
            epsilon: b.epsilon,
            exact_or_estimate: b.corank_exact.as_deref().and_then(parse_ratio).map(|r| ratio_to_f64(&r)),
            ci_low: None,
            ci_high: None,
            theorem_rate: b.theorem_rate,
            zero_rows_lower: b.zero_rows_lower,
            conjecture_rhs: b.conjecture_rhs,
            structured_lower: b.structured_lower,
        }
    }
}

pub fn write_csv(path: &Path, rows: &[CsvRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    for row in rows {
        w.serialize(row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

fn parse_ratio(s: &str) -> Option<BigRational> {
    s.parse::<BigRational>().ok()
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub n: usize,
    pub k: usize,
    pub p: Probability,
    pub epsilon: f64,
    /// `exact`, `mc-corank` or `mc-fixed-vector`.
    pub source: &'static str,
    pub value: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub trials: Option<u64>,
    pub theorem_rate: f64,
    pub zero_rows_lower: f64,
    pub conjecture_rhs: f64,
    pub structured_lower: f64,
    /// `value / structured_lower`, for corank rows.
    pub structured_ratio: Option<f64>,
    /// Corank rows only: `value >= zero_rows_lower`, less the interval width
    /// for estimates.
    pub zero_rows_consistent: Option<bool>,
    pub input: String,
}

impl ReportRow {
    fn csv(&self) -> CsvRow {
        CsvRow {
            n: self.n,
            k: self.k,
            p: self.p.to_string(),
            epsilon: self.epsilon,
            exact_or_estimate: Some(self.value),
            ci_low: self.ci_low,
            ci_high: self.ci_high,
            theorem_rate: self.theorem_rate,
            zero_rows_lower: self.zero_rows_lower,
            conjecture_rhs: self.conjecture_rhs,
            structured_lower: self.structured_lower,
        }
    }
}

fn field<'a>(v: &'a Value, key: &str, input: &str) -> Result<&'a Value, CliError> {
    v.get(key)
        .ok_or_else(|| CliError::Io(format!("{input}: record lacks field `{key}`")))
}

fn as_usize(v: &Value, key: &str, input: &str) -> Result<usize, CliError> {
    field(v, key, input)?
        .as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| CliError::Io(format!("{input}: field `{key}` is not a count")))
}

fn as_f64(v: &Value, key: &str, input: &str) -> Result<f64, CliError> {
    field(v, key, input)?
        .as_f64()
        .ok_or_else(|| CliError::Io(format!("{input}: field `{key}` is not a number")))
}

fn as_prob(v: &Value, input: &str) -> Result<Probability, CliError> {
    field(v, "p", input)?
        .as_str()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| CliError::Io(format!("{input}: field `p` is not a probability")))
}

fn row_base(n: usize, k: usize, p: Probability, epsilon: f64, source: &'static str, input: &str) -> Result<(BoundRow, ReportRow), CliError> {
    let b = bound_row(n, k, p, epsilon)?;
    let row = ReportRow {
        n,
        k,
        p,
        epsilon,
        source,
        value: 0.0,
        ci_low: None,
        ci_high: None,
        trials: None,
        theorem_rate: b.theorem_rate,
        zero_rows_lower: b.zero_rows_lower,
        conjecture_rhs: b.conjecture_rhs,
        structured_lower: b.structured_lower,
        structured_ratio: None,
        zero_rows_consistent: None,
        input: input.to_string(),
    };
    Ok((b, row))
}

/// Rows contributed by one JSONL record; records of other kinds give none.
pub fn rows_from_record(v: &Value, epsilon: f64, input: &str) -> Result<Vec<ReportRow>, CliError> {
    let kind = v.get("record_type").and_then(Value::as_str).unwrap_or("");
    match kind {
        "corank_distribution" => {
            let n = as_usize(v, "n", input)?;
            let p = as_prob(v, input)?;
            let probs = field(v, "probs", input)?
                .as_object()
                .ok_or_else(|| CliError::Io(format!("{input}: field `probs` is not a map")))?;
            let mut law: Vec<(usize, BigRational)> = Vec::new();
            for (c, r) in probs {
                let c: usize = c.parse().map_err(|_| CliError::Io(format!("{input}: bad corank `{c}`")))?;
                let r = r
                    .as_str()
                    .and_then(parse_ratio)
                    .ok_or_else(|| CliError::Io(format!("{input}: bad probability for corank {c}")))?;
                law.push((c, r));
            }
            (1..=n)
                .map(|k| {
                    let tail = law
                        .iter()
                        .filter(|(c, _)| *c >= k)
                        .fold(BigRational::from_integer(0.into()), |acc, (_, r)| acc + r);
                    let (_, mut row) = row_base(n, k, p, epsilon, "exact", input)?;
                    row.value = ratio_to_f64(&tail);
                    row.structured_ratio = Some(row.value / row.structured_lower);
                    let ok = row.value >= row.zero_rows_lower * (1.0 - 1e-12);
                    if !ok {
                        return Err(CliError::Lib(Error::Invariant(format!(
                            "exact P[corank >= {k}] = {} is below the zero-row bound {} (n = {n})",
                            row.value, row.zero_rows_lower
                        ))));
                    }
                    row.zero_rows_consistent = Some(ok);
                    Ok(row)
                })
                .collect()
        }
        "estimate" => {
            let event = v.get("event").and_then(Value::as_str).unwrap_or("");
            let source = match event {
                "corank" => "mc-corank",
                "fixed_vector" => "mc-fixed-vector",
                _ => return Ok(Vec::new()),
            };
            let n = as_usize(v, "n", input)?;
            let k = as_usize(v, "k", input)?;
            let p = as_prob(v, input)?;
            let (_, mut row) = row_base(n, k, p, epsilon, source, input)?;
            row.value = as_f64(v, "estimate", input)?;
            let (lo, hi) = (as_f64(v, "ci_low", input)?, as_f64(v, "ci_high", input)?);
            row.ci_low = Some(lo);
            row.ci_high = Some(hi);
            row.trials = field(v, "trials", input)?.as_u64();
            if source == "mc-corank" {
                row.structured_ratio = Some(row.value / row.structured_lower);
                row.zero_rows_consistent = Some(row.value >= row.zero_rows_lower - (hi - lo));
            }
            Ok(vec![row])
        }
        _ => Ok(Vec::new()),
    }
}

pub(super) fn cmd_report(inputs: Vec<PathBuf>, epsilon: Option<f64>, csv: Option<PathBuf>, common: &Common) -> Result<Run, CliError> {
    let mut r = resolver(common, "report")?;
    let paths: Vec<String> = if !inputs.is_empty() {
        let _ = r.raw("inputs");
        inputs.iter().map(|p| p.display().to_string()).collect()
    } else {
        match r.raw("inputs") {
            Some(toml::Value::Array(a)) => a
                .iter()
                .map(|v| {
                    v.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| CliError::Config(format!("key `inputs`: {v} is not a path")))
                })
                .collect::<Result<_, _>>()?,
            Some(toml::Value::String(s)) => vec![s],
            Some(other) => return Err(CliError::Config(format!("key `inputs`: expected a list of paths, found {other}"))),
            None => Vec::new(),
        }
    };
    let paths = required("inputs", (!paths.is_empty()).then_some(paths))?;
    let epsilon = r.f64("epsilon", epsilon)?.unwrap_or(0.0);
    r.inputs.insert("epsilon".into(), Value::from(epsilon));
    let csv = r.string("csv", csv.map(|p| p.display().to_string()))?;

    let mut rows = Vec::new();
    let mut digests = Vec::new();
    for path in &paths {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
        let digest = reproducibility_digest(&text)?;
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let v: Value =
                serde_json::from_str(line).map_err(|e| CliError::Io(format!("{path}:{}: {e}", i + 1)))?;
            rows.extend(rows_from_record(&v, epsilon, path)?);
        }
        digests.push((path.clone(), digest));
    }
    // Content digests, not paths, determine the output.
    r.inputs.insert(
        "inputs".into(),
        Value::from(digests.iter().map(|(_, d)| d.clone()).collect::<Vec<_>>()),
    );
    let mut run = Run::new("report", &mut r, common)?.seal(r)?;
    rows.sort_by(|a, b| {
        (a.n, a.k, a.p.as_f64(), a.source)
            .partial_cmp(&(b.n, b.k, b.p.as_f64(), b.source))
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    run.summary.push(format!("{} rows from {} input(s)", rows.len(), paths.len()));
    run.summary.push(format!(
        "{:>3} {:>3} {:>5} {:>16} {:>12} {:>25} {:>12} {:>12} {:>12} {:>12}",
        "n", "k", "p", "source", "value", "95% CI", "theorem", "zero_rows", "conjecture", "structured"
    ));
    for row in &rows {
        let ci = match (row.ci_low, row.ci_high) {
            (Some(lo), Some(hi)) => format!("[{lo:.4e}, {hi:.4e}]"),
            _ => "-".into(),
        };
        run.summary.push(format!(
            "{:>3} {:>3} {:>5} {:>16} {:>12.4e} {:>25} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
            row.n,
            row.k,
            row.p.to_string(),
            row.source,
            row.value,
            ci,
            row.theorem_rate,
            row.zero_rows_lower,
            row.conjecture_rhs,
            row.structured_lower
        ));
    }
    let inconsistent: Vec<&ReportRow> = rows.iter().filter(|r| r.zero_rows_consistent == Some(false)).collect();
    if inconsistent.is_empty() {
        run.summary.push("all corank values are consistent with the zero-row lower bound".into());
    } else {
        for row in inconsistent {
            run.summary.push(format!(
                "warning: estimate {} for n = {}, k = {}, p = {} falls below the zero-row bound {} by more than the interval width",
                row.value, row.n, row.k, row.p, row.zero_rows_lower
            ));
        }
    }
    for (path, digest) in &digests {
        run.summary.push(format!("digest {digest}  {path}"));
    }
    if let Some(path) = csv {
        let table: Vec<CsvRow> = rows.iter().map(ReportRow::csv).collect();
        write_csv(Path::new(&path), &table)?;
        run.summary.push(format!("wrote {path}"));
    }
    for row in &rows {
        run.record("report_row", row)?;
    }
    Ok(run)
}
