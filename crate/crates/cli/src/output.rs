use std::io::Write;

use adelic_lab::density::DECIMAL_DIGITS;
use adelic_lab::{QuadExtReal, Rational};
use serde_json::{json, Map, Value};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    PlotData,
}

/// A result table plus scalar summary lines.
#[derive(Debug, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub summary: Vec<(String, String)>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Table::default()
        }
    }

    /// A two-column `metric,value` table.
    pub fn metrics() -> Self {
        Table::new(&["metric", "value"])
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn metric(&mut self, name: &str, value: impl ToString) {
        self.push(vec![name.to_string(), value.to_string()]);
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }
}

pub struct Meta {
    pub command: String,
    pub seed: u64,
    pub config: Vec<(String, String)>,
}

pub fn dec(q: &Rational) -> String {
    q.to_decimal(DECIMAL_DIGITS)
}

pub fn qdec(q: &QuadExtReal) -> String {
    q.to_decimal(DECIMAL_DIGITS)
}

pub fn render(table: &Table, meta: &Meta, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    match format {
        Format::Csv => render_csv(table, meta, out),
        Format::Json => render_json(table, meta, out),
        Format::PlotData => render_plot(table, meta, out),
    }
}

fn header_lines(table: &Table, meta: &Meta, out: &mut dyn Write) -> Result<(), CliError> {
    writeln!(out, "# adelic-lab {} {}", env!("CARGO_PKG_VERSION"), meta.command)?;
    writeln!(out, "# seed={}", meta.seed)?;
    for (k, v) in &meta.config {
        writeln!(out, "# config {k}={v}")?;
    }
    for (k, v) in &table.summary {
        writeln!(out, "# {k}={v}")?;
    }
    Ok(())
}

fn render_csv(table: &Table, meta: &Meta, out: &mut dyn Write) -> Result<(), CliError> {
    header_lines(table, meta, out)?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn render_json(table: &Table, meta: &Meta, out: &mut dyn Write) -> Result<(), CliError> {
    let config: Map<String, Value> = meta
        .config
        .iter()
        .map(|(k, v)| (k.clone(), Value::String(v.clone())))
        .collect();
    let summary: Map<String, Value> = table
        .summary
        .iter()
        .map(|(k, v)| (k.clone(), Value::String(v.clone())))
        .collect();
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let obj: Map<String, Value> = table
                .columns
                .iter()
                .zip(row)
                .map(|(c, v)| (c.clone(), Value::String(v.clone())))
                .collect();
            Value::Object(obj)
        })
        .collect();
    let doc = json!({
        "meta": {
            "version": env!("CARGO_PKG_VERSION"),
            "command": meta.command,
            "seed": meta.seed,
            "config": config,
        },
        "columns": table.columns,
        "rows": rows,
        "summary": summary,
    });
    serde_json::to_writer_pretty(&mut *out, &doc)?;
    writeln!(out)?;
    Ok(())
}

/// Whitespace-separated numeric columns. Exact values are rendered as
/// decimals, booleans as 1/0.
fn render_plot(table: &Table, meta: &Meta, out: &mut dyn Write) -> Result<(), CliError> {
    header_lines(table, meta, out)?;
    writeln!(out, "# {}", table.columns.join(" "))?;
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|c| plot_cell(c)).collect();
        writeln!(out, "{}", cells.join(" "))?;
    }
    Ok(())
}

fn plot_cell(cell: &str) -> String {
    if let Ok(q) = cell.parse::<Rational>() {
        return dec(&q);
    }
    if let Ok(q) = cell.parse::<QuadExtReal>() {
        return qdec(&q);
    }
    match cell {
        "true" => "1".into(),
        "false" => "0".into(),
        "" => "NaN".into(),
        other => other.split_whitespace().collect::<Vec<_>>().join("_"),
    }
}
