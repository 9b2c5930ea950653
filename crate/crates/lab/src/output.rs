use anyhow::Context;
use nls_gibbs_core::analysis::{CheckReport, Table};
use serde::Serialize;
use std::path::{Path, PathBuf};

/// Writes artifacts under one directory and remembers their relative paths.
pub struct Sink {
    root: PathBuf,
    sub: String,
    pub written: Vec<String>,
}

impl Sink {
    pub fn new(root: &Path, sub: &str) -> anyhow::Result<Self> {
        let dir = root.join(sub);
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { root: root.into(), sub: sub.into(), written: Vec::new() })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let rel = format!("{}/{name}", self.sub);
        self.written.push(rel.clone());
        self.root.join(rel)
    }

    pub fn csv<R: AsRef<[String]>>(&mut self, name: &str, header: &[&str], rows: &[R]) -> anyhow::Result<String> {
        let p = self.path(name);
        let mut w = csv::Writer::from_path(&p).with_context(|| format!("writing {}", p.display()))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r.as_ref())?;
        }
        w.flush()?;
        Ok(self.written.last().cloned().unwrap_or_default())
    }

    pub fn table(&mut self, prefix: &str, t: &Table) -> anyhow::Result<String> {
        let cols: Vec<&str> = t.columns.iter().map(String::as_str).collect();
        let rows: Vec<Vec<String>> = t.rows.iter().map(|r| r.iter().map(|v| fmt(v.0)).collect()).collect();
        self.csv(&format!("{prefix}{}.csv", t.name), &cols, &rows)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, v: &T) -> anyhow::Result<String> {
        let p = self.path(name);
        std::fs::write(&p, serde_json::to_string_pretty(v)?).with_context(|| format!("writing {}", p.display()))?;
        Ok(self.written.last().cloned().unwrap_or_default())
    }

    pub fn text(&mut self, name: &str, body: &str) -> anyhow::Result<String> {
        let p = self.path(name);
        std::fs::write(&p, body).with_context(|| format!("writing {}", p.display()))?;
        Ok(self.written.last().cloned().unwrap_or_default())
    }

    /// Tables as CSVs, then the report itself (with artifact paths) as JSON.
    /// Files are named `<stem>.<table>.csv` and `<stem>.json`.
    pub fn report(&mut self, stem: &str, r: &mut CheckReport) -> anyhow::Result<()> {
        let prefix = format!("{stem}.");
        for t in r.tables.clone() {
            let path = self.table(&prefix, &t)?;
            r.artifacts.push(path);
        }
        self.json(&format!("{stem}.json"), r)?;
        Ok(())
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_text() {
        for v in [0.1, -3.5e-17, 1e300, 2.0 / 3.0] {
            assert_eq!(fmt(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt(f64::INFINITY), "inf");
        assert_eq!(fmt(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt(f64::NAN), "nan");
    }

    #[test]
    fn report_writes_tables_then_json() {
        let dir = tempfile::tempdir().unwrap();
        let mut sink = Sink::new(dir.path(), "chk").unwrap();
        let mut r = CheckReport::new("demo");
        let mut t = Table::new("rows", &["a", "b"]);
        t.push(&[1.0, f64::INFINITY]);
        r.table(t);
        sink.report("0_demo", &mut r).unwrap();
        assert_eq!(sink.written, vec!["chk/0_demo.rows.csv", "chk/0_demo.json"]);
        let csv = std::fs::read_to_string(dir.path().join("chk/0_demo.rows.csv")).unwrap();
        assert_eq!(csv, "a,b\n1.0,inf\n");
        let back: CheckReport = serde_json::from_str(&std::fs::read_to_string(dir.path().join("chk/0_demo.json")).unwrap()).unwrap();
        assert_eq!(back.artifacts, vec!["chk/0_demo.rows.csv"]);
    }
}
