use std::collections::BTreeSet;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField, VectorField};

/// One dumped array: `nx × ny` values, row-major with `x` fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldDump {
    pub nx: usize,
    pub ny: usize,
    pub kind: String,
    pub time: f64,
    pub values: Vec<f64>,
}

impl FieldDump {
    /// The u-faces (`(n+1) × n`) and v-faces (`n × (n+1)`) of `w`.
    pub fn from_vector(w: &VectorField, name: &str, time: f64) -> [FieldDump; 2] {
        let n = w.grid().n();
        [
            FieldDump {
                nx: n + 1,
                ny: n,
                kind: format!("{name}_u"),
                time,
                values: w.u().to_vec(),
            },
            FieldDump {
                nx: n,
                ny: n + 1,
                kind: format!("{name}_v"),
                time,
                values: w.v().to_vec(),
            },
        ]
    }

    pub fn from_scalar(g: &ScalarField, kind: &str, time: f64) -> FieldDump {
        let n = g.grid().n();
        FieldDump {
            nx: n,
            ny: n,
            kind: kind.to_string(),
            time,
            values: g.values().to_vec(),
        }
    }

    pub fn to_scalar(&self) -> Result<ScalarField> {
        if self.nx != self.ny {
            return Err(Error::Format(format!("{}: not a cell field", self.kind)));
        }
        ScalarField::from_values(Grid::new(self.nx)?, self.values.clone())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(64 + 8 * self.values.len());
        writeln!(buf, "ENSF1 {} {} {} {}", self.nx, self.ny, self.kind, self.time)?;
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        fs::write(path, buf)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(fs::File::open(path)?);
        let mut header = String::new();
        r.read_line(&mut header)?;
        let bad = |m: &str| Error::Format(format!("{}: {m}", path.display()));
        let parts: Vec<&str> = header.trim_end_matches('\n').split(' ').collect();
        if parts.len() != 5 || parts[0] != "ENSF1" {
            return Err(bad("missing ENSF1 header"));
        }
        let nx: usize = parts[1].parse().map_err(|_| bad("bad nx"))?;
        let ny: usize = parts[2].parse().map_err(|_| bad("bad ny"))?;
        let time: f64 = parts[4].parse().map_err(|_| bad("bad time"))?;
        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        if body.len() != 8 * nx * ny {
            return Err(bad(&format!("expected {} payload bytes, found {}", 8 * nx * ny, body.len())));
        }
        let values = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Ok(Self {
            nx,
            ny,
            kind: parts[3].to_string(),
            time,
            values,
        })
    }
}

/// Writes `t` and the union of metric names, sorted, one row per record.
/// Missing metrics are left empty.
pub fn write_csv(path: &Path, rows: &[DiagnosticsRecord]) -> Result<()> {
    let names: BTreeSet<&str> = rows
        .iter()
        .flat_map(|r| r.metrics.keys().map(String::as_str))
        .collect();
    let mut out = String::from("t");
    for n in &names {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for r in rows {
        out.push_str(&r.time.to_string());
        for n in &names {
            out.push(',');
            if let Some(v) = r.metrics.get(*n) {
                out.push_str(&v.to_string());
            }
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Human-readable summary listing every metric and margin of `records`
/// with its verdict under the global slack.
pub fn write_summary(path: &Path, title: &str, records: &[DiagnosticsRecord]) -> Result<bool> {
    let mut out = format!("# {title}\n");
    let mut ok = true;
    for r in records {
        out.push_str(&format!("\n[{}] t = {}\n", r.source, r.time));
        for (k, v) in &r.metrics {
            if !k.starts_with("margin_") {
                out.push_str(&format!("{k} = {v:e}\n"));
            }
        }
        for (k, m) in &r.margins {
            let verdict = if !m.asserted {
                "info"
            } else if m.holds() {
                "pass"
            } else {
                ok = false;
                "FAIL"
            };
            out.push_str(&format!("margin {k} = {:e} (scale {:e}) {verdict}\n", m.value, m.scale));
        }
    }
    out.push_str(&format!("\nstatus = {}\n", if ok { "pass" } else { "fail" }));
    fs::write(path, out)?;
    Ok(ok)
}
