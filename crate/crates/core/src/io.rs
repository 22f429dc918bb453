//! Forecast files: CSV with header `judge,event,prob,truth`, or JSON lines
//! with the same field names.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::engine::AggregationReport;
use crate::error::{Error, Result};
use crate::event::parse_event;
use crate::forecast::{check_probability, Forecast};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    JsonLines,
}

impl Format {
    /// JSON lines for `.jsonl`/`.ndjson`, CSV otherwise.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext)
                if ext.eq_ignore_ascii_case("jsonl") || ext.eq_ignore_ascii_case("ndjson") =>
            {
                Format::JsonLines
            }
            _ => Format::Csv,
        }
    }
}

fn format_err(row: usize, message: impl Into<String>) -> Error {
    Error::Format {
        row,
        message: message.into(),
    }
}

fn parse_truth(s: &str, row: usize) -> Result<Option<bool>> {
    match s.trim().to_ascii_lowercase().as_str() {
        "" => Ok(None),
        "1" | "true" => Ok(Some(true)),
        "0" | "false" => Ok(Some(false)),
        other => Err(format_err(
            row,
            format!("truth must be 0, 1 or empty, got `{other}`"),
        )),
    }
}

fn make_forecast(
    judge: &str,
    event: &str,
    prob: f64,
    truth: Option<bool>,
    row: usize,
) -> Result<Forecast> {
    if judge.is_empty() {
        return Err(format_err(row, "empty judge id"));
    }
    let event = parse_event(event).map_err(|e| format_err(row, e.to_string()))?;
    check_probability(prob).map_err(|e| format_err(row, e.to_string()))?;
    Ok(Forecast {
        judge: judge.to_string(),
        event,
        p_hat: prob,
        truth,
    })
}

/// Rows are numbered by file line, the header being line 1.
pub fn read_csv(reader: impl Read) -> Result<Vec<Forecast>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| format_err(1, e.to_string()))?
        .clone();
    if headers.is_empty() {
        return Ok(Vec::new());
    }
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (Some(judge), Some(event), Some(prob)) = (col("judge"), col("event"), col("prob")) else {
        return Err(format_err(1, "header must contain judge, event and prob"));
    };
    let truth = col("truth");

    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let row = e.position().map_or(0, |p| p.line() as usize);
            format_err(row, e.to_string())
        })?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| record.get(i).unwrap_or("");
        let p_text = field(prob);
        let p: f64 = p_text
            .parse()
            .map_err(|_| format_err(row, format!("cannot parse probability `{p_text}`")))?;
        let t = match truth {
            Some(i) => parse_truth(field(i), row)?,
            None => None,
        };
        out.push(make_forecast(field(judge), field(event), p, t, row)?);
    }
    Ok(out)
}

/// Rows are numbered by line, starting at 1; blank lines are skipped.
pub fn read_jsonl(reader: impl BufRead) -> Result<Vec<Forecast>> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let row = n + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(&line).map_err(|e| format_err(row, e.to_string()))?;
        let text = |key: &str| -> Result<String> {
            match v.get(key) {
                Some(Value::String(s)) => Ok(s.clone()),
                Some(Value::Number(n)) if key == "judge" => Ok(n.to_string()),
                _ => Err(format_err(row, format!("missing string field `{key}`"))),
            }
        };
        let p = v
            .get("prob")
            .and_then(Value::as_f64)
            .ok_or_else(|| format_err(row, "missing numeric field `prob`"))?;
        let t = match v.get("truth") {
            None | Some(Value::Null) => None,
            Some(Value::Bool(b)) => Some(*b),
            Some(Value::Number(n)) if n.as_u64() == Some(0) => Some(false),
            Some(Value::Number(n)) if n.as_u64() == Some(1) => Some(true),
            Some(Value::String(s)) => parse_truth(s, row)?,
            Some(other) => return Err(format_err(row, format!("invalid truth `{other}`"))),
        };
        out.push(make_forecast(&text("judge")?, &text("event")?, p, t, row)?);
    }
    Ok(out)
}

pub fn read_forecasts(path: &Path) -> Result<Vec<Forecast>> {
    let file = File::open(path)?;
    match Format::from_path(path) {
        Format::Csv => read_csv(file),
        Format::JsonLines => read_jsonl(BufReader::new(file)),
    }
}

#[derive(Serialize)]
struct Row<'a> {
    judge: &'a str,
    event: String,
    prob: f64,
    truth: Option<bool>,
}

/// Probabilities are written in shortest round-trip form.
pub fn write_csv(writer: impl Write, forecasts: &[Forecast]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["judge", "event", "prob", "truth"])
        .map_err(csv_err)?;
    for f in forecasts {
        let truth = match f.truth {
            Some(true) => "1",
            Some(false) => "0",
            None => "",
        };
        w.write_record([
            f.judge.as_str(),
            &f.event.to_string(),
            &f.p_hat.to_string(),
            truth,
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_jsonl(mut writer: impl Write, forecasts: &[Forecast]) -> Result<()> {
    for f in forecasts {
        let row = Row {
            judge: &f.judge,
            event: f.event.to_string(),
            prob: f.p_hat,
            truth: f.truth,
        };
        serde_json::to_writer(&mut writer, &row)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_forecasts(path: &Path, forecasts: &[Forecast]) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    match Format::from_path(path) {
        Format::Csv => write_csv(file, forecasts),
        Format::JsonLines => write_jsonl(file, forecasts),
    }
}

/// One row per pooled event: `event,prob,weight,input`.
pub fn write_aggregate_csv(writer: impl Write, report: &AggregationReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["event", "prob", "weight", "input"])
        .map_err(csv_err)?;
    for (i, event) in report.events.iter().enumerate() {
        w.write_record([
            event.as_str(),
            &report.final_probs[i].to_string(),
            &report.weights[i].to_string(),
            &report.input[i].to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => format_err(0, format!("{other:?}")),
    }
}
