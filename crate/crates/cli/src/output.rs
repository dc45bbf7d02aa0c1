use std::io::Write;
use std::path::PathBuf;

use serde_json::Value;

use crate::{CliError, Format};

/// Twelve significant digits in scientific notation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.11e}")
}

pub struct Output {
    format: Format,
    path: Option<PathBuf>,
}

impl Output {
    pub fn new(format: Format, path: Option<PathBuf>) -> Self {
        Self { format, path }
    }

    fn render(&self, header: &[&str], rows: &[Vec<String>], record: &Value) -> String {
        match self.format {
            Format::Csv => {
                let mut s = header.join(",");
                s.push('\n');
                for row in rows {
                    s.push_str(&row.join(","));
                    s.push('\n');
                }
                s
            }
            Format::Record => {
                let mut s = serde_json::to_string_pretty(record).expect("json values serialize");
                s.push('\n');
                s
            }
        }
    }

    /// Main output: the table in csv mode, the full record otherwise.
    pub fn emit(&self, header: &[&str], rows: &[Vec<String>], record: &Value) -> Result<(), CliError> {
        let text = self.render(header, rows, record);
        match &self.path {
            Some(p) => std::fs::write(p, text)
                .map_err(|e| CliError::usage(format!("cannot write {}: {e}", p.display()))),
            None => Ok(std::io::stdout().lock().write_all(text.as_bytes())?),
        }
    }

    /// One-line structured summary next to a csv table: on stdout when the
    /// table went to a file, on stderr otherwise.
    pub fn summary(&self, summary: &Value) -> Result<(), CliError> {
        if self.format == Format::Record {
            return Ok(());
        }
        let line = format!("{summary}\n");
        if self.path.is_some() {
            std::io::stdout().lock().write_all(line.as_bytes())?;
        } else {
            std::io::stderr().lock().write_all(line.as_bytes())?;
        }
        Ok(())
    }
}
