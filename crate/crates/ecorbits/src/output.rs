//! Deterministic file output: CSV tables with round-trip-exact floats,
//! JSON for structured results, and a run manifest recording how a data
//! file was produced. Data files contain no timestamps, so a rerun with
//! identical inputs is byte-identical; volatile metadata (wall time) lives
//! only in the manifest.

use crate::continuation::{Bifurcation, Branch, CHatPoint, DiagramPoint};
use crate::ecfinder::{EcRoots, ScanRow};
use crate::error::Result;
use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Render a float with 17 significant digits, enough for exact f64
/// round-tripping.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn optional(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

/// Momentum scan table: `theta0,M,tau_star,r_min,status` (LF endings;
/// empty numeric fields on failed samples).
pub fn write_scan_csv<W: Write>(mut w: W, rows: &[ScanRow]) -> Result<()> {
    writeln!(w, "theta0,M,tau_star,r_min,status")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_float(r.theta0),
            optional(r.m),
            optional(r.tau_star),
            optional(r.r_min),
            r.status
        )?;
    }
    Ok(())
}

/// Found n-EC orbits: `family,theta0,tau_star,momentum_residual,collision_residual,energy_residual,certified`.
pub fn write_roots_csv<W: Write>(mut w: W, roots: &EcRoots) -> Result<()> {
    writeln!(
        w,
        "family,theta0,tau_star,momentum_residual,collision_residual,energy_residual,certified"
    )?;
    for o in &roots.orbits {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            o.family,
            fmt_float(o.theta0),
            fmt_float(o.tau_star),
            fmt_float(o.momentum_residual),
            fmt_float(o.collision_residual),
            fmt_float(o.energy_residual),
            o.certified
        )?;
    }
    Ok(())
}

/// One continued family branch: `energy,theta0,tau_star,collision_residual`.
pub fn write_branch_csv<W: Write>(mut w: W, branch: &Branch) -> Result<()> {
    writeln!(w, "family,energy,theta0,tau_star,collision_residual")?;
    for s in &branch.samples {
        writeln!(
            w,
            "{},{},{},{},{}",
            branch.family,
            fmt_float(s.energy),
            fmt_float(s.theta0),
            fmt_float(s.tau_star),
            fmt_float(s.collision_residual)
        )?;
    }
    Ok(())
}

/// Bifurcation-diagram point cloud: one `energy,theta0` row per root.
pub fn write_diagram_csv<W: Write>(mut w: W, points: &[DiagramPoint]) -> Result<()> {
    writeln!(w, "energy,theta0,family")?;
    for p in points {
        for o in &p.roots.orbits {
            writeln!(w, "{},{},{}", fmt_float(p.energy), fmt_float(o.theta0), o.family)?;
        }
    }
    Ok(())
}

/// First-bifurcation curve: `n,c_hat,k_hat,l_hat`.
pub fn write_chat_csv<W: Write>(mut w: W, points: &[CHatPoint]) -> Result<()> {
    writeln!(w, "n,c_hat,k_hat,l_hat")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{}",
            p.n,
            fmt_float(p.c_hat),
            fmt_float(p.k_hat),
            fmt_float(p.l_hat)
        )?;
    }
    Ok(())
}

/// Serialize any result type as pretty JSON with a trailing newline.
pub fn write_json<W: Write, T: Serialize + ?Sized>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| crate::error::Error::Sweep(format!("JSON serialization failed: {e}")))?;
    writeln!(w)?;
    Ok(())
}

/// Bifurcation events as JSON.
pub fn write_bifurcations_json<W: Write>(w: W, events: &[Bifurcation]) -> Result<()> {
    write_json(w, events)
}

/// Provenance of an output file: the exact invocation, tool version and
/// wall time. Written next to each data file as `<file>.manifest.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    /// Subcommand or example that produced the output.
    pub command: String,
    /// Full argument vector of the run.
    pub argv: Vec<String>,
    pub version: String,
    pub wall_time_s: f64,
    /// Data files produced by the run.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, argv: Vec<String>, outputs: Vec<String>, wall_time_s: f64) -> Self {
        RunManifest {
            command: command.into(),
            argv,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s,
            outputs,
        }
    }

    pub fn write_beside(&self, data_path: &Path) -> Result<()> {
        let mut p = data_path.as_os_str().to_owned();
        p.push(".manifest.json");
        write_json(BufWriter::new(File::create(Path::new(&p))?), self)
    }
}

/// Open a file for buffered writing, creating parent directories.
pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecfinder::Family;

    #[test]
    fn floats_round_trip_exactly() {
        for &x in &[std::f64::consts::PI, -1.0 / 3.0, 1e-17, 6.02214076e23, 0.1] {
            let s = fmt_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn scan_csv_shape() {
        let rows = vec![
            ScanRow {
                theta0: 0.5,
                m: Some(-1.25e-4),
                tau_star: Some(6.28),
                r_min: Some(1e-30),
                status: "ok".into(),
            },
            ScanRow { theta0: 1.0, m: None, tau_star: None, r_min: None, status: "missing event".into() },
        ];
        let mut buf = Vec::new();
        write_scan_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "theta0,M,tau_star,r_min,status");
        assert!(lines[1].starts_with("5.0000000000000000e-1,-1.25"));
        assert_eq!(lines[2], "1.0000000000000000e0,,,,missing event");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn reruns_are_byte_identical() {
        let roots = EcRoots {
            degenerate: false,
            orbits: vec![crate::ecfinder::EcOrbit {
                theta0: 0.7853981,
                family: Family::Delta,
                tau_star: 6.3,
                momentum_residual: 1e-16,
                collision_residual: 1e-14,
                energy_residual: 2e-13,
                certified: true,
            }],
            tangencies: vec![],
        };
        let (mut a, mut b) = (Vec::new(), Vec::new());
        write_roots_csv(&mut a, &roots).unwrap();
        write_roots_csv(&mut b, &roots).unwrap();
        assert_eq!(a, b);
        let (mut ja, mut jb) = (Vec::new(), Vec::new());
        write_json(&mut ja, &roots).unwrap();
        write_json(&mut jb, &roots).unwrap();
        assert_eq!(ja, jb);
    }
}
