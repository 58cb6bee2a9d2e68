//! Files written by a run.
//!
//! * `records.jsonl`: one JSON record per run, appended,
//! * `<name>.report.txt`: the text report,
//! * `<name>.convergence.tsv`: the convergence table when a ladder ran,
//! * `<name>.field.bin` and `<name>.field.txt`: the finest solution when
//!   requested.
//!
//! Field dump layout, all little-endian: the 8 bytes `PMTKFLD1`; three `u64`
//! node counts; a `u64` chart code (0 Cartesian, 1 stretched Cartesian,
//! 2 spherical with `ln r` as first coordinate); an `f64` chart parameter
//! (the stretch length, or 0); three `f64` first-node chart coordinates;
//! three `f64` chart steps; then one `f64` per node in row-major order with
//! the last chart axis fastest (`x3` in Cartesian charts, the azimuth in the
//! spherical chart). Excluded nodes hold NaN.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use pmtk_core::geometry::{Chart, RadialMap};
use pmtk_core::solver::DiscreteField;

use crate::error::{Error, Result};
use crate::report::render;
use crate::run::RunOutput;
use crate::table::convergence_table;

pub const RECORDS_FILE: &str = "records.jsonl";
pub const DUMP_MAGIC: &[u8; 8] = b"PMTKFLD1";

pub fn write_outputs(dir: &Path, out: &RunOutput) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let r = &out.record;
    let mut written = Vec::new();

    let path = dir.join(RECORDS_FILE);
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .map_err(|e| Error::io(&path, e))?;
    writeln!(f, "{}", r.to_json_line()).map_err(|e| Error::io(&path, e))?;
    written.push(path);

    let path = dir.join(format!("{}.report.txt", r.name));
    fs::write(&path, render(r)).map_err(|e| Error::io(&path, e))?;
    written.push(path);

    if let Some(c) = &r.convergence {
        let path = dir.join(format!("{}.convergence.tsv", r.name));
        fs::write(&path, convergence_table(c)).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    if let Some(u) = &out.field {
        let bin = dir.join(format!("{}.field.bin", r.name));
        fs::write(&bin, dump_bytes(u)).map_err(|e| Error::io(&bin, e))?;
        let meta = dir.join(format!("{}.field.txt", r.name));
        fs::write(&meta, dump_metadata(u)).map_err(|e| Error::io(&meta, e))?;
        written.push(bin);
        written.push(meta);
    }
    Ok(written)
}

fn chart_code(c: &Chart) -> (u64, f64) {
    match *c {
        Chart::Cartesian { stretch: None } => (0, 0.0),
        Chart::Cartesian { stretch: Some(l) } => (1, l),
        Chart::Spherical { radial: RadialMap::Log, .. } => (2, 0.0),
        Chart::Spherical { radial: RadialMap::Linear, .. } => (3, 0.0),
    }
}

pub fn dump_bytes(u: &DiscreteField) -> Vec<u8> {
    let d = &u.domain;
    let mut b = Vec::with_capacity(8 + 8 * (11 + u.values.len()));
    b.extend_from_slice(DUMP_MAGIC);
    for n in d.dims() {
        b.extend_from_slice(&(n as u64).to_le_bytes());
    }
    let (code, param) = chart_code(&d.chart);
    b.extend_from_slice(&code.to_le_bytes());
    b.extend_from_slice(&param.to_le_bytes());
    for a in &d.axes {
        b.extend_from_slice(&a.start.to_le_bytes());
    }
    for a in &d.axes {
        b.extend_from_slice(&a.step.to_le_bytes());
    }
    for v in &u.values {
        b.extend_from_slice(&v.to_le_bytes());
    }
    b
}

/// Parses a dump back into `(dims, values)`.
pub fn read_dump(bytes: &[u8]) -> Option<([usize; 3], Vec<f64>)> {
    if bytes.len() < 8 + 11 * 8 || &bytes[..8] != DUMP_MAGIC {
        return None;
    }
    let word = |k: usize| -> [u8; 8] { bytes[8 + 8 * k..16 + 8 * k].try_into().unwrap() };
    let dims = [0, 1, 2].map(|k| u64::from_le_bytes(word(k)) as usize);
    let n = dims.iter().product::<usize>();
    let body = &bytes[8 + 11 * 8..];
    if body.len() != 8 * n {
        return None;
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Some((dims, values))
}

fn dump_metadata(u: &DiscreteField) -> String {
    let d = &u.domain;
    let (code, param) = chart_code(&d.chart);
    let mut s = String::new();
    s.push_str("format = PMTKFLD1\n");
    s.push_str("byte_order = little-endian\n");
    s.push_str("value_type = f64\n");
    s.push_str("layout = row-major, last axis fastest\n");
    s.push_str(&format!("dims = {:?}\n", d.dims()));
    s.push_str(&format!("chart = {:?}\n", d.chart));
    s.push_str(&format!("chart_code = {code}\n"));
    s.push_str(&format!("chart_parameter = {param}\n"));
    s.push_str(&format!("start = {:?}\n", d.axes.map(|a| a.start)));
    s.push_str(&format!("step = {:?}\n", d.axes.map(|a| a.step)));
    s.push_str(&format!("truncation = {:?}\n", d.truncation));
    s.push_str(&format!("iterations = {}\n", u.iterations));
    s.push_str(&format!("relative_residual = {:e}\n", u.relative_residual));
    s
}
