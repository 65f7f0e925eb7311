//! CSV reports: a `#` preamble with version, command and config hash, a
//! header row, then one row per check with a trailing `pass` column.

use std::io::{self, Write};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Floats with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone)]
pub struct Report {
    command: String,
    config_json: String,
    columns: Vec<String>,
    rows: Vec<(Vec<String>, bool)>,
}

impl Report {
    pub fn new(command: &str, config: &impl Serialize, columns: &[&str]) -> Self {
        Self {
            command: command.to_string(),
            config_json: serde_json::to_string(config).expect("configs serialize"),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Adds a row; `cells` excludes the `pass` column.
    pub fn row(&mut self, cells: Vec<String>, pass: bool) {
        assert_eq!(cells.len(), self.columns.len(), "row width matches header");
        self.rows.push((cells, pass));
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|(_, p)| *p)
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    /// First cell of every failing row.
    pub fn failures(&self) -> Vec<String> {
        self.rows
            .iter()
            .filter(|(_, p)| !p)
            .map(|(cells, _)| cells.join(" "))
            .collect()
    }

    /// Cell `column` of every row, in order.
    pub fn column(&self, column: &str) -> Vec<String> {
        let idx = self.columns.iter().position(|c| c == column).expect("known column");
        self.rows.iter().map(|(cells, _)| cells[idx].clone()).collect()
    }

    pub fn config_json(&self) -> &str {
        &self.config_json
    }

    /// SHA-256 of the resolved config JSON.
    pub fn config_hash(&self) -> String {
        hex::encode(Sha256::digest(self.config_json.as_bytes()))
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# carlab {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(out, "# command {}", self.command)?;
        writeln!(out, "# config_sha256 {}", self.config_hash())?;
        writeln!(out, "# config {}", self.config_json)?;
        let mut w = csv::Writer::from_writer(out);
        let mut header = self.columns.clone();
        header.push("pass".into());
        w.write_record(&header)?;
        for (cells, pass) in &self.rows {
            let mut record = cells.clone();
            record.push(pass.to_string());
            w.write_record(&record)?;
        }
        w.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut r = Report::new("demo", &serde_json::json!({"a": 1}), &["check", "value"]);
        r.row(vec!["x".into(), num(0.1)], true);
        r.row(vec!["y, z".into(), num(2.0)], false);
        let text = r.to_csv_string();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# carlab "));
        assert_eq!(lines[3], r#"# config {"a":1}"#);
        assert_eq!(lines[4], "check,value,pass");
        assert_eq!(lines[5], "x,1.0000000000000001e-1,true");
        assert_eq!(lines[6], "\"y, z\",2.0000000000000000e0,false");
        assert!(!r.passed());
        assert_eq!(r.config_hash().len(), 64);
    }
}
