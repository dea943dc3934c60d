//! CSV and JSON writers. Floats are written with 17 significant digits,
//! lines end in `\n`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use hk_core::harness::ConvergenceReport;
use hk_core::{mollify, FieldTable, Grid, KernelParams, TrajectoryRecord};
use serde::Serialize;

use crate::error::CliResult;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write(dir: &Path, name: &str, text: &str) -> CliResult<()> {
    fs::write(dir.join(name), text)?;
    Ok(())
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    write(dir, name, &text)
}

/// `t,x,f` for every snapshot and output point.
pub fn snapshots_csv(rec: &TrajectoryRecord, sigma: f64, xs: &[f64]) -> CliResult<String> {
    let mut s = String::from("t,x,f\n");
    for (t, ens) in rec.times.iter().zip(&rec.snapshots) {
        let f = mollify(ens, sigma, xs)?;
        for (x, v) in xs.iter().zip(f) {
            writeln!(s, "{},{},{}", num(*t), num(*x), num(v)).unwrap();
        }
    }
    Ok(s)
}

pub fn particles_csv(rec: &TrajectoryRecord) -> String {
    let mut s = String::from("t,index,position,weight\n");
    for (t, ens) in rec.times.iter().zip(&rec.snapshots) {
        for (i, (x, w)) in ens.positions().iter().zip(ens.weights()).enumerate() {
            writeln!(s, "{},{i},{},{}", num(*t), num(*x), num(*w)).unwrap();
        }
    }
    s
}

/// Column name for the mass in `[a, b]`.
pub fn mass_column(a: f64, b: f64) -> String {
    format!("mass_{a}_{b}")
}

pub fn diagnostics_csv(rec: &TrajectoryRecord, intervals: &[(f64, f64)]) -> String {
    let mut s = String::from("t,min,max,diameter,concentration,clusters");
    for &(a, b) in intervals {
        s.push(',');
        s.push_str(&mass_column(a, b));
    }
    s.push('\n');
    for (t, d) in rec.times.iter().zip(&rec.diagnostics) {
        write!(
            s,
            "{},{},{},{},{},{}",
            num(*t),
            num(d.min),
            num(d.max),
            num(d.diameter),
            num(d.concentration),
            d.clusters
        )
        .unwrap();
        for m in &d.interval_masses {
            write!(s, ",{}", num(*m)).unwrap();
        }
        s.push('\n');
    }
    s
}

/// `t,x,f,g,h,H` from grid solves on the output grid at every snapshot.
pub fn fields_csv(rec: &TrajectoryRecord, grid: Grid, sigma: f64, p: &KernelParams) -> CliResult<String> {
    let mut s = String::from("t,x,f,g,h,H\n");
    for (t, ens) in rec.times.iter().zip(&rec.snapshots) {
        let table = FieldTable::from_ensemble(ens, grid, sigma, p)?;
        for (j, x) in grid.nodes().iter().enumerate() {
            writeln!(
                s,
                "{},{},{},{},{},{}",
                num(*t),
                num(*x),
                num(table.f[j]),
                num(table.g[j]),
                num(table.h[j]),
                num(table.big_h[j])
            )
            .unwrap();
        }
    }
    Ok(s)
}

/// `dx,dt,error,ratio`; the ratio is empty on the last row.
pub fn report_csv(report: &ConvergenceReport) -> String {
    let mut s = String::from("dx,dt,error,ratio\n");
    for r in &report.rows {
        let ratio = r.ratio.map(num).unwrap_or_default();
        writeln!(s, "{},{},{},{ratio}", num(r.dx), num(r.dt), num(r.error)).unwrap();
    }
    s
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> CliResult<()> {
    write(dir, name, text)
}
