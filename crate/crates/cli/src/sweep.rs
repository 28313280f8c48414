//! Axis sweeps: run one manifest across rate, quality factor, plane count
//! or truncation values and collect a per-point summary.

use std::path::Path;

use serde::Serialize;

use synclass_core::ldpc::CodeRate;

use crate::manifest::ExperimentManifest;
use crate::run;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Axis {
    Rate,
    Qf,
    Planes,
    Truncation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisValue {
    Rate(CodeRate),
    Number(u64),
}

impl std::fmt::Display for AxisValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AxisValue::Rate(r) => write!(f, "{}", r.label()),
            AxisValue::Number(n) => write!(f, "{n}"),
        }
    }
}

pub fn parse_values(axis: Axis, text: &str) -> Result<Vec<AxisValue>, CliError> {
    let mut values = Vec::new();
    for token in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let value = match axis {
            Axis::Rate => AxisValue::Rate(
                CodeRate::parse(token)
                    .ok_or_else(|| CliError::Config(format!("unsupported rate {token:?}")))?,
            ),
            _ => AxisValue::Number(
                token
                    .parse::<u64>()
                    .map_err(|_| CliError::Config(format!("bad {axis:?} value {token:?}")))?,
            ),
        };
        if !values.contains(&value) {
            values.push(value);
        }
    }
    if values.is_empty() {
        return Err(CliError::Config("empty axis value list".into()));
    }
    values.sort_by(|a, b| axis_sort_key(a).partial_cmp(&axis_sort_key(b)).unwrap());
    Ok(values)
}

fn axis_sort_key(value: &AxisValue) -> f64 {
    match value {
        AxisValue::Rate(r) => r.value(),
        AxisValue::Number(n) => *n as f64,
    }
}

fn apply(manifest: &ExperimentManifest, axis: Axis, value: AxisValue) -> Result<ExperimentManifest, CliError> {
    let mut point = manifest.clone();
    // Each point gets its own artifact directory.
    let base = manifest.output_dir();
    point.output.dir = Some(base.join(format!("{axis:?}-{value}").to_lowercase()));
    match (axis, value) {
        (Axis::Rate, AxisValue::Rate(rate)) => {
            let code = point.code.as_mut().ok_or_else(|| {
                CliError::Config("rate sweep needs a [code] section".into())
            })?;
            code.rate = rate;
        }
        (Axis::Qf, AxisValue::Number(qf)) => point.pipeline.qf = qf as u32,
        (Axis::Planes, AxisValue::Number(k)) => point.pipeline.planes_per_channel = k as usize,
        (Axis::Truncation, AxisValue::Number(tau)) => point.pipeline.truncation = tau as usize,
        _ => unreachable!("parse_values matches the axis"),
    }
    point.validate()?;
    Ok(point)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub axis: String,
    pub value: String,
    pub status: String,
    pub accuracy: Option<f64>,
    pub gamma: Option<f64>,
    pub effective_bpp_fraction: Option<f64>,
    pub best_epoch: Option<usize>,
    pub wall_clock_secs: Option<f64>,
    pub error: Option<String>,
}

/// Run every point; failures are recorded as rows and do not stop the
/// sweep.
pub fn run_sweep(
    manifest: &ExperimentManifest,
    cache_dir: &Path,
    axis: Axis,
    values: &[AxisValue],
    parallel: bool,
) -> Result<Vec<SweepRow>, CliError> {
    let run_point = |&value: &AxisValue| -> SweepRow {
        let outcome = apply(manifest, axis, value)
            .and_then(|point| run::train_eval(&point, cache_dir, true));
        match outcome {
            Ok(record) => SweepRow {
                axis: format!("{axis:?}").to_lowercase(),
                value: value.to_string(),
                status: "ok".into(),
                accuracy: Some(record.metrics.accuracy),
                gamma: record.metrics.gamma,
                effective_bpp_fraction: record.metrics.effective_bpp_fraction,
                best_epoch: Some(record.best_epoch),
                wall_clock_secs: Some(record.wall_clock_secs),
                error: None,
            },
            Err(e) => SweepRow {
                axis: format!("{axis:?}").to_lowercase(),
                value: value.to_string(),
                status: "error".into(),
                accuracy: None,
                gamma: None,
                effective_bpp_fraction: None,
                best_epoch: None,
                wall_clock_secs: None,
                error: Some(e.to_string()),
            },
        }
    };
    let rows = if parallel {
        use rayon::prelude::*;
        values.par_iter().map(run_point).collect()
    } else {
        values.iter().map(run_point).collect()
    };
    Ok(rows)
}

pub fn write_csv(rows: &[SweepRow], out: &Path) -> Result<(), CliError> {
    use std::io::Write;
    let file = std::fs::File::create(out)
        .map_err(|e| CliError::Data(format!("{}: {e}", out.display())))?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(
        w,
        "axis,value,status,accuracy,gamma,effective_bpp_fraction,best_epoch,wall_clock_secs,error"
    )
    .map_err(|e| CliError::Data(e.to_string()))?;
    for row in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            row.axis,
            row.value,
            row.status,
            fmt_opt(row.accuracy),
            fmt_opt(row.gamma),
            fmt_opt(row.effective_bpp_fraction),
            row.best_epoch.map(|v| v.to_string()).unwrap_or_default(),
            fmt_opt(row.wall_clock_secs),
            row.error.as_deref().unwrap_or("").replace(',', ";"),
        )
        .map_err(|e| CliError::Data(e.to_string()))?;
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v}")).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_parse_sorted_and_deduplicated() {
        let values = parse_values(Axis::Qf, "50, 10,90,10").unwrap();
        assert_eq!(
            values,
            vec![
                AxisValue::Number(10),
                AxisValue::Number(50),
                AxisValue::Number(90)
            ]
        );
        let rates = parse_values(Axis::Rate, "3/4,1/4").unwrap();
        assert_eq!(
            rates,
            vec![AxisValue::Rate(CodeRate::R1_4), AxisValue::Rate(CodeRate::R3_4)]
        );
    }

    #[test]
    fn empty_axis_is_rejected() {
        assert!(matches!(
            parse_values(Axis::Qf, " ,"),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn bad_tokens_are_rejected() {
        assert!(parse_values(Axis::Qf, "fast").is_err());
        assert!(parse_values(Axis::Rate, "2/3").is_err());
    }
}
