//! Tabular results and their text, CSV and JSON renderings.

use serde_json::{Map, Value};

use crate::config::{Format, RunConfig};

/// First token of every header line.
pub const HEADER_PREFIX: &str = "# coeffzero v1 ";

/// Outcome class of a run, ordered from best to worst.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    /// Every requested digit is matched or converged.
    Matched,
    /// Converged, but short of the requested digits.
    BelowTarget,
    Unconverged,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Matched => 0,
            Status::BelowTarget => 2,
            Status::Unconverged => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Matched => "matched",
            Status::BelowTarget => "below-target",
            Status::Unconverged => "unconverged",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// `(key, value)` facts about the whole run.
    pub meta: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub status: Status,
}

impl Report {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            meta: Vec::new(),
            columns,
            rows: Vec::new(),
            status: Status::Matched,
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<String>) {
        self.meta.push((key.to_string(), value.into()));
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Lower the overall status to `status` if it is worse.
    pub fn degrade(&mut self, status: Status) {
        self.status = self.status.max(status);
    }

    pub fn render(&self, config: &RunConfig) -> String {
        match config.format {
            Format::Text => self.render_text(config),
            Format::Csv => self.render_csv(config),
            Format::Json => self.render_json(config),
        }
    }

    fn preamble(&self, config: &RunConfig) -> String {
        let mut out = header_line(config);
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        out.push_str(&format!("# status = {}\n", self.status.label()));
        out
    }

    fn render_text(&self, config: &RunConfig) -> String {
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.len()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: &mut dyn Iterator<Item = &str>| {
            let padded: Vec<String> = cells
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = self.preamble(config);
        out.push_str(&line(&mut self.columns.iter().copied()));
        for row in &self.rows {
            out.push_str(&line(&mut row.iter().map(String::as_str)));
        }
        out
    }

    fn render_csv(&self, config: &RunConfig) -> String {
        let mut out = self.preamble(config);
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Every number is a JSON string so no consumer rounds it to a double.
    fn render_json(&self, config: &RunConfig) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), Value::String(v.clone())))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let meta: Map<String, Value> = self
            .meta
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        let doc = serde_json::json!({
            "coeffzero": "v1",
            "config": config,
            "status": self.status.label(),
            "meta": meta,
            "rows": rows,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
        text.push('\n');
        text
    }
}

pub fn header_line(config: &RunConfig) -> String {
    let json = serde_json::to_string(config).expect("config serializes");
    format!("{HEADER_PREFIX}{json}\n")
}

/// Recover the configuration from a previous run's output (any format).
pub fn config_from_output(text: &str) -> Option<RunConfig> {
    if let Some(rest) = text
        .lines()
        .next()
        .and_then(|l| l.strip_prefix(HEADER_PREFIX))
    {
        return serde_json::from_str(rest).ok();
    }
    let doc: Value = serde_json::from_str(text).ok()?;
    serde_json::from_value(doc.get("config")?.clone()).ok()
}
