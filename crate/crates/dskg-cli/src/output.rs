//! Atomic, byte-reproducible output files: `report.json`, `series.csv`,
//! `run.log`, and the sweep table.

use dskg_core::harness::{EstimateReport, SeriesPoint};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub experiment: String,
    pub pass: bool,
    pub reports: Vec<EstimateReport>,
    /// wall-clock stamp; excluded from reproducibility comparisons
    pub timestamp: String,
}

fn atomic_write(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

pub fn write_outputs(
    dir: &str,
    report: &RunReport,
    series: &[SeriesPoint],
    log_lines: &[String],
) -> std::io::Result<PathBuf> {
    let dir = PathBuf::from(dir);
    fs::create_dir_all(&dir)?;

    let json = serde_json::to_string_pretty(report).expect("report serialization");
    atomic_write(&dir.join("report.json"), json.as_bytes())?;

    let mut csv = String::from("series,x,y\n");
    for p in series {
        csv.push_str(&format!("{},{},{}\n", p.series, fmt_f64(p.x), fmt_f64(p.y)));
    }
    atomic_write(&dir.join("series.csv"), csv.as_bytes())?;

    let mut log = String::new();
    for line in log_lines {
        log.push_str(line);
        log.push('\n');
    }
    atomic_write(&dir.join("run.log"), log.as_bytes())?;
    Ok(dir)
}

/// Shortest round-trippable float format.
pub fn fmt_f64(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v:.1}")
    } else {
        format!("{v}")
    }
}

/// One sweep table row with the fixed column set.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub p: String,
    pub q: String,
    pub s: String,
    pub eps: String,
    pub t0: f64,
    pub horizon: f64,
    pub constant: f64,
    pub spread: f64,
    pub pass: bool,
}

pub const SWEEP_HEADER: &str = "p,q,s,eps,t0,T,constant,spread,pass";

impl SweepRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.p,
            self.q,
            self.s,
            self.eps,
            fmt_f64(self.t0),
            fmt_f64(self.horizon),
            fmt_f64(self.constant),
            fmt_f64(self.spread),
            self.pass
        )
    }

    pub fn parse(line: &str) -> Result<Self, String> {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 9 {
            return Err(format!("expected 9 columns, got {}", cols.len()));
        }
        Ok(SweepRow {
            p: cols[0].to_string(),
            q: cols[1].to_string(),
            s: cols[2].to_string(),
            eps: cols[3].to_string(),
            t0: cols[4].parse().map_err(|_| "bad t0")?,
            horizon: cols[5].parse().map_err(|_| "bad T")?,
            constant: cols[6].parse().map_err(|_| "bad constant")?,
            spread: cols[7].parse().map_err(|_| "bad spread")?,
            pass: cols[8].parse().map_err(|_| "bad pass")?,
        })
    }
}

pub fn write_sweep(dir: &str, rows: &[SweepRow]) -> std::io::Result<()> {
    let dir = PathBuf::from(dir);
    fs::create_dir_all(&dir)?;
    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    for r in rows {
        csv.push_str(&r.to_csv());
        csv.push('\n');
    }
    atomic_write(&dir.join("sweep.csv"), csv.as_bytes())
}
