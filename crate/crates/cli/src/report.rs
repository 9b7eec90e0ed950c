//! CSV rendering of each command.

use tailquant::analysis::ErrorCurve;
use tailquant::{build_error_curve, compare, copula_report, expansion_ladder, CopulaParams, DistributionSpec};

use crate::spec::{Command, RunSpec};
use crate::{CliError, RunOutput};

pub const ERROR_CURVE_HEADER: [&str; 7] = ["u", "h_ref", "y_approx", "rel_err", "pred_order", "ratio", "error"];
pub const TAILDEP_HEADER: [&str; 7] = ["u", "lambda", "lambda_asym", "lambda_L", "ratio1", "ratio2", "error"];
pub const LADDER_HEADER: [&str; 2] = ["k", "max_ratio"];

/// 17 significant digits; NaN becomes an empty field.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:.16e}")
    }
}

pub fn header_line(spec: &RunSpec) -> String {
    format!("# tailquant v{} spec={}\n", env!("CARGO_PKG_VERSION"), spec.canonical())
}

struct Table {
    writer: csv::Writer<Vec<u8>>,
    rows: usize,
    failed_rows: usize,
}

impl Table {
    fn new(spec: &RunSpec, header: &[&str]) -> Result<Self, CliError> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(header_line(spec).into_bytes());
        writer.write_record(header)?;
        Ok(Table { writer, rows: 0, failed_rows: 0 })
    }

    fn row(&mut self, fields: &[String], failed: bool) -> Result<(), CliError> {
        self.writer.write_record(fields)?;
        self.rows += 1;
        self.failed_rows += usize::from(failed);
        Ok(())
    }

    fn finish(self) -> Result<RunOutput, CliError> {
        let csv = self.writer.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        Ok(RunOutput { csv, rows: self.rows, failed_rows: self.failed_rows })
    }
}

fn dist_of(spec: &RunSpec) -> Result<DistributionSpec, CliError> {
    spec.dist.ok_or_else(|| CliError::Validation(format!("{} needs --dist", spec.command.name())))
}

pub fn render(spec: &RunSpec) -> Result<RunOutput, CliError> {
    match spec.command {
        Command::Quantile | Command::ErrorCurve => {
            let curve = build_error_curve(&dist_of(spec)?, spec.side, &spec.methods[0], &spec.grid, &spec.oracle)?;
            error_curve_table(spec, &curve)
        }
        Command::Compare => {
            let curves = compare(&dist_of(spec)?, spec.side, &spec.methods, &spec.grid, &spec.oracle)?;
            compare_table(spec, &curves)
        }
        Command::Ladder => {
            let ladder = expansion_ladder(&dist_of(spec)?, spec.side, &spec.grid, &spec.oracle)?;
            let mut t = Table::new(spec, &LADDER_HEADER)?;
            for col in &ladder.columns {
                t.row(&[col.k.to_string(), fmt_num(col.max_ratio)], col.max_ratio.is_nan())?;
            }
            t.finish()
        }
        Command::TailDep => {
            let rho = spec.rho.ok_or_else(|| CliError::Validation("taildep needs --rho".into()))?;
            let report = copula_report(&CopulaParams::new(rho)?, &spec.grid, &spec.oracle)?;
            let mut t = Table::new(spec, &TAILDEP_HEADER)?;
            for r in &report.rows {
                let fields = [
                    fmt_num(r.u),
                    fmt_num(r.lambda),
                    fmt_num(r.lambda_asym),
                    fmt_num(r.lambda_l),
                    fmt_num(r.ratio1),
                    fmt_num(r.ratio2),
                    r.error.clone().unwrap_or_default(),
                ];
                t.row(&fields, r.error.is_some())?;
            }
            t.finish()
        }
    }
}

fn error_curve_table(spec: &RunSpec, curve: &ErrorCurve) -> Result<RunOutput, CliError> {
    let mut t = Table::new(spec, &ERROR_CURVE_HEADER)?;
    for r in &curve.rows {
        let fields = [
            fmt_num(r.u),
            fmt_num(r.h_ref),
            fmt_num(r.y_approx),
            fmt_num(r.rel_err),
            fmt_num(r.pred),
            fmt_num(r.ratio),
            r.error.clone().unwrap_or_default(),
        ];
        t.row(&fields, r.error.is_some())?;
    }
    t.finish()
}

/// `u,h_ref,<one column per method>,error`
fn compare_table(spec: &RunSpec, curves: &[ErrorCurve]) -> Result<RunOutput, CliError> {
    let labels: Vec<String> = spec.methods.iter().map(|m| m.label()).collect();
    let mut header = vec!["u".to_string(), "h_ref".to_string()];
    header.extend(labels.iter().cloned());
    header.push("error".to_string());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut t = Table::new(spec, &header)?;
    for (i, first) in curves[0].rows.iter().enumerate() {
        let mut fields = vec![fmt_num(first.u), fmt_num(first.h_ref)];
        let mut errors = Vec::new();
        for (label, curve) in labels.iter().zip(curves) {
            let r = &curve.rows[i];
            fields.push(fmt_num(r.y_approx));
            if let Some(e) = &r.error {
                errors.push(format!("{label}: {e}"));
            }
        }
        fields.push(errors.join("; "));
        t.row(&fields, !errors.is_empty())?;
    }
    t.finish()
}
