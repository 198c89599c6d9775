use std::fs;
use std::path::Path;

use super::io::{write_csv, write_summary, FieldDump};
use crate::diagnostics::DiagnosticsRecord;
use crate::error::Result;

/// Everything a subcommand produces.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub title: String,
    /// Per-step rows for `diagnostics.csv`.
    pub series: Vec<DiagnosticsRecord>,
    /// Check records listed in `summary.txt`.
    pub checks: Vec<DiagnosticsRecord>,
    pub fields: Vec<FieldDump>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            ..Self::default()
        }
    }

    pub fn passes(&self) -> bool {
        self.checks.iter().all(|r| r.passes())
    }

    /// Lines `pass|FAIL|info <source>.<margin>` for the terminal.
    pub fn verdict_lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for r in &self.checks {
            for (k, m) in &r.margins {
                let v = match (m.asserted, m.holds()) {
                    (false, _) => "info",
                    (true, true) => "pass",
                    (true, false) => "FAIL",
                };
                out.push(format!("{v} {}.{k} (margin {:.3e})", r.source, m.value));
            }
        }
        out
    }

    /// Writes `diagnostics.csv` when there is a series, one `.ensf` file
    /// per field, and `summary.txt`. Returns whether every asserted check
    /// passed.
    pub fn write(&self, dir: &Path) -> Result<bool> {
        fs::create_dir_all(dir)?;
        if !self.series.is_empty() {
            write_csv(&dir.join("diagnostics.csv"), &self.series)?;
        }
        for f in &self.fields {
            f.write(&dir.join(format!("{}.ensf", f.kind)))?;
        }
        write_summary(&dir.join("summary.txt"), &self.title, &self.checks)
    }
}

/// Summary for a run that stopped with an error.
pub fn write_error_summary(dir: &Path, title: &str, err: &crate::Error) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(
        dir.join("summary.txt"),
        format!("# {title}\n\nerror = {err}\nexit_code = {}\nstatus = error\n", err.exit_code()),
    )?;
    Ok(())
}
