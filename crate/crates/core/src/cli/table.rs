//! Column tables and their CSV / JSON encodings.

use serde_json::{json, Map, Value};

use super::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }

    fn csv(&self) -> String {
        match self {
            // Display is the shortest representation that parses back exactly.
            Cell::Num(x) => format!("{x}"),
            Cell::Text(s) if s.contains([',', '"', '\n']) => {
                format!("\"{}\"", s.replace('"', "\"\""))
            }
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => json!(x),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Num(x as f64)
    }
}

/// A diagnostic table with provenance.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub command: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Resolved configuration as `(key, value)` lines.
    pub config: Vec<(String, String)>,
    pub warnings: Vec<String>,
    /// Extra JSON members (not part of the CSV body).
    pub extra: Map<String, Value>,
}

impl Table {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        Self {
            command: command.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Numeric column by name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        self.rows.iter().map(|r| r[k].as_f64()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# command = {}\n", self.command);
        for (k, v) in &self.config {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        for w in &self.warnings {
            out.push_str(&format!("# warning: {w}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut config = Map::new();
        for (k, v) in &self.config {
            let slot = config
                .entry(k.clone())
                .or_insert_with(|| Value::Array(Vec::new()));
            if let Value::Array(a) = slot {
                a.push(json!(v));
            }
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .cloned()
                    .zip(r.iter().map(Cell::json))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("command".into(), json!(self.command));
        doc.insert("config".into(), Value::Object(config));
        doc.insert("warnings".into(), json!(self.warnings));
        doc.insert("columns".into(), json!(self.columns));
        doc.insert("rows".into(), Value::Array(rows));
        for (k, v) in &self.extra {
            doc.insert(k.clone(), v.clone());
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("tables serialize");
        s.push('\n');
        s
    }

    /// Reads a table written by [`Table::to_csv`]. Comment lines become the
    /// config (warnings are kept separately); cells that parse as numbers
    /// become [`Cell::Num`].
    pub fn parse_csv(text: &str) -> Result<Self, CliError> {
        let mut t = Table::default();
        let mut header = None;
        for line in text.lines() {
            if let Some(c) = line.strip_prefix('#') {
                let c = c.trim();
                if let Some(w) = c.strip_prefix("warning: ") {
                    t.warnings.push(w.to_string());
                } else if let Some((k, v)) = c.split_once(" = ") {
                    if k == "command" {
                        t.command = v.to_string();
                    } else {
                        t.config.push((k.to_string(), v.to_string()));
                    }
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let fields = split_csv_line(line);
            match header {
                None => {
                    t.columns = fields;
                    header = Some(t.columns.len());
                }
                Some(n) => {
                    if fields.len() != n {
                        return Err(CliError::Config(format!(
                            "row has {} cells, header has {n}",
                            fields.len()
                        )));
                    }
                    t.rows.push(
                        fields
                            .into_iter()
                            .map(|f| f.parse::<f64>().map(Cell::Num).unwrap_or(Cell::Text(f)))
                            .collect(),
                    );
                }
            }
        }
        if header.is_none() {
            return Err(CliError::Config("missing header row".into()));
        }
        Ok(t)
    }
}

fn split_csv_line(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match (c, quoted) {
            ('"', true) if chars.peek() == Some(&'"') => {
                cur.push('"');
                chars.next();
            }
            ('"', _) => quoted = !quoted,
            (',', false) => out.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    out.push(cur);
    out
}
