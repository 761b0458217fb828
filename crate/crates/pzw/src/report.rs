//! Check records and the files they are written to.
//!
//! Every identity check produces one [`ReportRecord`]: the check name, the
//! relation it certifies, a digest of the inputs it ran on, both sides of
//! the comparison, the residual, the tolerance, and PASS or FAIL. Records
//! go to line-delimited JSON for machines and to CSV for plotting. Writing
//! the same records twice produces byte-identical files; floats are
//! serialized in shortest round-trip form.
//!
//! The module also owns the two auxiliary tables the command-line front end
//! emits: energy time series and per-point potential probes.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
        })
    }
}

/// One certified comparison. `status` is derived: PASS iff the residual is
/// within tolerance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportRecord {
    pub check: String,
    /// The relation being certified, stated as an equation.
    pub identity: String,
    /// Hex digest of the inputs the check ran on.
    pub digest: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub status: Status,
}

impl ReportRecord {
    pub fn new(
        check: &str,
        identity: &str,
        digest: &str,
        lhs: f64,
        rhs: f64,
        residual: f64,
        tolerance: f64,
    ) -> Self {
        let status = if residual <= tolerance { Status::Pass } else { Status::Fail };
        ReportRecord {
            check: check.to_string(),
            identity: identity.to_string(),
            digest: digest.to_string(),
            lhs,
            rhs,
            residual,
            tolerance,
            status,
        }
    }

    pub fn passes(&self) -> bool {
        self.status == Status::Pass
    }

    fn consistent(&self) -> bool {
        (self.residual <= self.tolerance) == (self.status == Status::Pass)
    }
}

pub fn all_pass(records: &[ReportRecord]) -> bool {
    records.iter().all(|r| r.passes())
}

/// Running hash of everything a check's result depends on. Feed named
/// values in a fixed order and take the hex prefix at the end.
#[derive(Clone)]
pub struct InputsDigest {
    hasher: Sha256,
}

impl InputsDigest {
    pub fn new() -> Self {
        InputsDigest { hasher: Sha256::new() }
    }

    pub fn text(&mut self, name: &str, value: &str) -> &mut Self {
        self.hasher.update(name.as_bytes());
        self.hasher.update(b"=");
        self.hasher.update(value.as_bytes());
        self.hasher.update(b";");
        self
    }

    pub fn number(&mut self, name: &str, value: f64) -> &mut Self {
        self.hasher.update(name.as_bytes());
        self.hasher.update(b"=");
        self.hasher.update(value.to_le_bytes());
        self.hasher.update(b";");
        self
    }

    pub fn integer(&mut self, name: &str, value: u64) -> &mut Self {
        self.hasher.update(name.as_bytes());
        self.hasher.update(b"=");
        self.hasher.update(value.to_le_bytes());
        self.hasher.update(b";");
        self
    }

    /// First 8 bytes of the hash as 16 hex characters.
    pub fn finish(&self) -> String {
        let full = self.hasher.clone().finalize();
        full[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl Default for InputsDigest {
    fn default() -> Self {
        Self::new()
    }
}

pub fn write_jsonl<W: Write>(records: &[ReportRecord], w: &mut W) -> Result<()> {
    for r in records {
        let line = serde_json::to_string(r)
            .map_err(|e| Error::Config(format!("cannot serialize record: {e}")))?;
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Read records back, enforcing the status invariant on each line.
pub fn read_jsonl<R: BufRead>(r: R) -> Result<Vec<ReportRecord>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ReportRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Config(format!("record on line {}: {e}", i + 1)))?;
        if !record.consistent() {
            return Err(Error::Config(format!(
                "record on line {}: status {} contradicts residual {:e} vs tolerance {:e}",
                i + 1,
                record.status,
                record.residual,
                record.tolerance
            )));
        }
        out.push(record);
    }
    Ok(out)
}

pub fn write_csv<W: Write>(records: &[ReportRecord], w: &mut W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["check", "identity", "digest", "lhs", "rhs", "residual", "tolerance", "status"])
        .map_err(csv_err)?;
    for r in records {
        csv.write_record([
            r.check.clone(),
            r.identity.clone(),
            r.digest.clone(),
            format!("{}", r.lhs),
            format!("{}", r.rhs),
            format!("{}", r.residual),
            format!("{}", r.tolerance),
            r.status.to_string(),
        ])
        .map_err(csv_err)?;
    }
    csv.flush()?;
    Ok(())
}

/// One row of the energy time series a trajectory run emits.
#[derive(Clone, Copy, Debug)]
pub struct EnergySample {
    pub t: f64,
    pub kinetic: f64,
    pub field: f64,
    pub total: f64,
}

pub fn write_energy_csv<W: Write>(samples: &[EnergySample], w: &mut W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["t", "kinetic", "field", "total"]).map_err(csv_err)?;
    for s in samples {
        csv.write_record([
            &format!("{}", s.t),
            &format!("{}", s.kinetic),
            &format!("{}", s.field),
            &format!("{}", s.total),
        ])
        .map_err(csv_err)?;
    }
    csv.flush()?;
    Ok(())
}

/// One probe point of the radial-gauge potential table. Points outside the
/// trusted ball keep their row with `in_ball = false`.
#[derive(Clone, Copy, Debug)]
pub struct PoincareRow {
    pub x: [f64; 3],
    pub phi: f64,
    pub a: [f64; 3],
    pub x_dot_a: f64,
    pub in_ball: bool,
}

pub fn write_poincare_csv<W: Write>(rows: &[PoincareRow], w: &mut W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["x", "y", "z", "phi", "a_x", "a_y", "a_z", "x_dot_a", "in_ball"])
        .map_err(csv_err)?;
    // Adding +0.0 folds negative zeros from cross products into plain 0.
    let fmt = |v: f64| format!("{}", v + 0.0);
    for r in rows {
        csv.write_record([
            fmt(r.x[0]),
            fmt(r.x[1]),
            fmt(r.x[2]),
            fmt(r.phi),
            fmt(r.a[0]),
            fmt(r.a[1]),
            fmt(r.a[2]),
            fmt(r.x_dot_a),
            (if r.in_ball { "true" } else { "false" }).to_string(),
        ])
        .map_err(csv_err)?;
    }
    csv.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("cannot write csv: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn records() -> Vec<ReportRecord> {
        vec![
            ReportRecord::new("alpha", "a = b", "0011aabb0011aabb", 1.0, 1.0 + 1e-9, 1e-9, 1e-6),
            ReportRecord::new("beta", "c = d", "ffee0022ffee0022", 2.0, 3.0, 0.5, 1e-6),
        ]
    }

    #[test]
    fn status_follows_the_tolerance() {
        let rs = records();
        assert_eq!(rs[0].status, Status::Pass);
        assert_eq!(rs[1].status, Status::Fail);
        assert!(!all_pass(&rs));
        assert!(all_pass(&rs[..1]));

        // Boundary: residual equal to tolerance passes.
        let edge = ReportRecord::new("edge", "e = f", "00", 0.0, 0.0, 1e-6, 1e-6);
        assert!(edge.passes());
    }

    #[test]
    fn jsonl_round_trips_and_rejects_tampering() {
        let rs = records();
        let mut buf = Vec::new();
        write_jsonl(&rs, &mut buf).unwrap();
        let back = read_jsonl(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].check, "alpha");
        assert_eq!(back[1].status, Status::Fail);
        assert_eq!(back[0].residual, rs[0].residual);

        let text = String::from_utf8(buf).unwrap();
        let tampered = text.replace("\"FAIL\"", "\"PASS\"");
        assert!(matches!(read_jsonl(tampered.as_bytes()), Err(Error::Config(_))));
        assert!(matches!(read_jsonl(&b"not json\n"[..]), Err(Error::Config(_))));
    }

    #[test]
    fn writers_are_deterministic() {
        let rs = records();
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_jsonl(&rs, &mut a).unwrap();
        write_jsonl(&rs, &mut b).unwrap();
        assert_eq!(a, b);

        let mut c = Vec::new();
        let mut d = Vec::new();
        write_csv(&rs, &mut c).unwrap();
        write_csv(&rs, &mut d).unwrap();
        assert_eq!(c, d);
        let text = String::from_utf8(c).unwrap();
        assert!(text.starts_with("check,identity,digest,lhs,rhs,residual,tolerance,status"));
        assert!(text.contains("FAIL"));
    }

    #[test]
    fn digests_separate_different_inputs() {
        let mut a = InputsDigest::new();
        a.text("scenario", "dipole").number("sigma", 3.0).integer("n", 64);
        let mut b = a.clone();
        b.integer("seed", 1);
        let da = a.finish();
        let db = b.finish();
        assert_eq!(da.len(), 16);
        assert_ne!(da, db);
        // Same inputs, same digest.
        let mut c = InputsDigest::new();
        c.text("scenario", "dipole").number("sigma", 3.0).integer("n", 64);
        assert_eq!(da, c.finish());
    }

    #[test]
    fn auxiliary_tables_have_stable_headers() {
        let mut buf = Vec::new();
        write_energy_csv(
            &[EnergySample { t: 0.0, kinetic: 1.0, field: 2.0, total: 3.0 }],
            &mut buf,
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,kinetic,field,total"));

        let mut buf = Vec::new();
        write_poincare_csv(
            &[PoincareRow {
                x: [0.0, 0.0, 0.0],
                phi: 1.5,
                a: [0.0, 0.0, 0.0],
                x_dot_a: 0.0,
                in_ball: true,
            }],
            &mut buf,
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,y,z,phi,a_x,a_y,a_z,x_dot_a,in_ball"));
        assert!(text.contains("true"));
    }
}
