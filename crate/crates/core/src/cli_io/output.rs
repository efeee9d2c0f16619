use std::io::Write;
use std::path::Path;

use crate::diagnostics::{BasicDissipation, DiagnosticsRecord};
use crate::error::ElhError;

pub const CSV_COLUMNS: [&str; 16] = [
    "t",
    "E_basic",
    "D_total",
    "D_visc",
    "D_mu1",
    "D_lam1",
    "D_cross",
    "D_mu56",
    "E_hs",
    "D_hs",
    "E_eta",
    "D_eta",
    "h_max",
    "h_l2",
    "tangency_max",
    "residual",
];

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

fn row(r: &DiagnosticsRecord) -> [String; 16] {
    let d = &r.dissipation;
    [
        fmt(r.t),
        fmt(r.e_basic),
        fmt(d.total),
        fmt(d.visc),
        fmt(d.mu1),
        fmt(d.lam1),
        fmt(d.cross),
        fmt(d.mu56),
        fmt_opt(r.e_hs),
        fmt_opt(r.d_hs),
        fmt_opt(r.e_eta),
        fmt_opt(r.d_eta),
        fmt(r.h_max),
        fmt(r.h_l2),
        fmt(r.tangency_max),
        fmt_opt(r.residual),
    ]
}

/// Writes `# `-prefixed header lines, the column line, then one row per record.
pub fn write_csv(mut out: impl Write, header: &[String], records: &[DiagnosticsRecord]) -> Result<(), ElhError> {
    for line in header {
        writeln!(out, "# {line}")?;
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let io = |e: csv::Error| ElhError::Format(e.to_string());
    w.write_record(CSV_COLUMNS).map_err(io)?;
    for r in records {
        w.write_record(row(r)).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_csv(path: &Path, header: &[String], records: &[DiagnosticsRecord]) -> Result<(), ElhError> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_csv(f, header, records)
}

/// Reads a diagnostics CSV back into records; `#` lines are skipped.
pub fn read_csv(path: &Path) -> Result<Vec<DiagnosticsRecord>, ElhError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| ElhError::Format(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(|e| ElhError::Format(e.to_string()))?.clone();
    if headers.iter().ne(CSV_COLUMNS.iter().copied()) {
        return Err(ElhError::Format(format!(
            "unexpected columns {:?}; expected {:?}",
            headers.iter().collect::<Vec<_>>(),
            CSV_COLUMNS
        )));
    }
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| ElhError::Format(e.to_string()))?;
        let cell = |i: usize| -> Result<Option<f64>, ElhError> {
            let s = rec.get(i).unwrap_or("").trim();
            if s.is_empty() {
                return Ok(None);
            }
            s.parse()
                .map(Some)
                .map_err(|_| ElhError::Format(format!("row {}: column {} is not a number: {s:?}", line + 1, CSV_COLUMNS[i])))
        };
        let req = |i: usize| -> Result<f64, ElhError> {
            cell(i)?.ok_or_else(|| ElhError::Format(format!("row {}: column {} is empty", line + 1, CSV_COLUMNS[i])))
        };
        let dissipation = BasicDissipation {
            total: req(2)?,
            visc: req(3)?,
            mu1: req(4)?,
            lam1: req(5)?,
            cross: req(6)?,
            mu56: req(7)?,
            completed_square: None,
            scale: 0.0,
        };
        out.push(DiagnosticsRecord {
            t: req(0)?,
            e_basic: req(1)?,
            dissipation,
            e_hs: cell(8)?,
            d_hs: cell(9)?,
            e_eta: cell(10)?,
            d_eta: cell(11)?,
            h_max: req(12)?,
            h_l2: req(13)?,
            tangency_max: req(14)?,
            residual: cell(15)?,
        });
    }
    Ok(out)
}

/// Whole-run figures printed after a simulation and by `report`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub rows: usize,
    pub t_final: f64,
    pub max_residual: Option<f64>,
    pub max_h: f64,
    pub max_tangency: f64,
    /// `|E(t_final) - E(0)| / E(0)` of the basic energy.
    pub energy_drift: f64,
    /// Largest single-sample increase of `E_eta`, when present.
    pub max_eta_increase: Option<f64>,
}

/// Per-sample increase of `E_eta` tolerated by the monotonicity verdict.
pub const ETA_MONOTONE_TOL: f64 = 1e-8;
pub const RESIDUAL_THRESHOLD: f64 = 1e-4;
pub const CONSTRAINT_THRESHOLD: f64 = 1e-6;

impl RunSummary {
    pub fn from_records(records: &[DiagnosticsRecord]) -> Self {
        let max_opt = |it: &mut dyn Iterator<Item = f64>| it.fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x))));
        let e0 = records.first().map(|r| r.e_basic).unwrap_or(0.0);
        let e1 = records.last().map(|r| r.e_basic).unwrap_or(0.0);
        let etas: Vec<f64> = records.iter().filter_map(|r| r.e_eta).collect();
        Self {
            rows: records.len(),
            t_final: records.last().map(|r| r.t).unwrap_or(0.0),
            max_residual: max_opt(&mut records.iter().filter_map(|r| r.residual)),
            max_h: records.iter().map(|r| r.h_max).fold(0.0, f64::max),
            max_tangency: records.iter().map(|r| r.tangency_max).fold(0.0, f64::max),
            energy_drift: if e0 > 0.0 { (e1 - e0).abs() / e0 } else { (e1 - e0).abs() },
            max_eta_increase: max_opt(&mut etas.windows(2).map(|p| p[1] - p[0])),
        }
    }

    pub fn eta_monotone(&self) -> Option<bool> {
        self.max_eta_increase.map(|m| m <= ETA_MONOTONE_TOL)
    }

    /// Threshold failures used by `report --assert`; empty when everything passes.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(r) = self.max_residual {
            if !(r <= RESIDUAL_THRESHOLD) {
                out.push(format!("energy residual {r:e} > {RESIDUAL_THRESHOLD:e}"));
            }
        }
        if !(self.max_h <= CONSTRAINT_THRESHOLD) {
            out.push(format!("constraint drift {:e} > {CONSTRAINT_THRESHOLD:e}", self.max_h));
        }
        if self.eta_monotone() == Some(false) {
            out.push(format!(
                "E_eta increased by {:e} in one sample",
                self.max_eta_increase.unwrap_or(f64::NAN)
            ));
        }
        out
    }

    pub fn render(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "n/a".into());
        let verdict = match self.eta_monotone() {
            Some(true) => "yes",
            Some(false) => "no",
            None => "n/a",
        };
        format!(
            "summary: rows={} t_final={}\n  max_residual = {}\n  max_h = {:.6e}\n  max_tangency = {:.6e}\n  energy_drift = {:.6e}\n  e_eta_monotone = {verdict} (max increase {})",
            self.rows,
            self.t_final,
            opt(self.max_residual),
            self.max_h,
            self.max_tangency,
            self.energy_drift,
            opt(self.max_eta_increase),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: f64, e_eta: Option<f64>) -> DiagnosticsRecord {
        DiagnosticsRecord {
            t,
            e_basic: 1.0 - t,
            dissipation: BasicDissipation {
                visc: 0.5,
                mu1: 0.1,
                lam1: 0.2,
                cross: -0.05,
                mu56: 0.25,
                total: 1.0,
                completed_square: None,
                scale: 0.0,
            },
            e_hs: None,
            d_hs: None,
            e_eta,
            d_eta: None,
            h_max: 1e-12,
            h_l2: 2e-12,
            tangency_max: 0.0,
            residual: if t > 0.0 { Some(1e-9) } else { None },
        }
    }

    #[test]
    fn csv_round_trip_and_format() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let recs = vec![rec(0.0, Some(1.0)), rec(0.1, Some(0.9))];
        save_csv(&path, &["seed: 3".into()], &recs).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# seed: 3"));
        assert_eq!(lines.next(), Some(CSV_COLUMNS.join(",").as_str()));
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), 16);
        assert_eq!(first[0], "0.0000000000000000e0");
        assert_eq!(first[8], "");
        let back = read_csv(&path).unwrap();
        assert_eq!(back[1].e_eta, Some(0.9));
        assert_eq!(back[1].t, 0.1);
        assert_eq!(back[0].residual, None);
    }

    #[test]
    fn summary_verdicts() {
        let s = RunSummary::from_records(&[rec(0.0, Some(1.0)), rec(0.1, Some(1.0 + 1e-9)), rec(0.2, Some(0.5))]);
        assert_eq!(s.eta_monotone(), Some(true));
        assert!(s.failures().is_empty());
        let s = RunSummary::from_records(&[rec(0.0, Some(1.0)), rec(0.1, Some(1.1))]);
        assert_eq!(s.eta_monotone(), Some(false));
        assert_eq!(s.failures().len(), 1);
    }
}
