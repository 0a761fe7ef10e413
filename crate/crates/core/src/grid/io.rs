//! CSV and binary serialization of fields.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use super::{Domain, Grid, NodeField, SampleField};
use crate::error::Error;
use crate::Result;

const MAGIC: &[u8; 4] = b"MSF1";

/// Writes `x0,..,x{d-1},value` rows for every node.
pub fn write_field_csv(path: &Path, field: &NodeField<f64>) -> Result<()> {
    let grid = field.grid();
    let d = grid.dim();
    let mut w = BufWriter::new(File::create(path)?);
    let header: Vec<String> = (0..d).map(|a| format!("x{a}")).collect();
    writeln!(w, "{},value", header.join(","))?;
    for (node, v) in field.values().iter().enumerate() {
        let x = grid.coord(node);
        for xa in &x[..d] {
            write!(w, "{xa:.17e},")?;
        }
        writeln!(w, "{v:.17e}")?;
    }
    w.flush()?;
    Ok(())
}

/// Complex node field as `x..,re,im`.
pub fn write_complex_field_csv(path: &Path, field: &NodeField<Complex64>) -> Result<()> {
    let grid = field.grid();
    let d = grid.dim();
    let mut w = BufWriter::new(File::create(path)?);
    let header: Vec<String> = (0..d).map(|a| format!("x{a}")).collect();
    writeln!(w, "{},re,im", header.join(","))?;
    for (node, v) in field.values().iter().enumerate() {
        let x = grid.coord(node);
        for xa in &x[..d] {
            write!(w, "{xa:.17e},")?;
        }
        writeln!(w, "{:.17e},{:.17e}", v.re, v.im)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one row per boundary sample with its face normal and any number of
/// named value columns.
pub fn write_boundary_csv(path: &Path, columns: &[(&str, &SampleField<f64>)]) -> Result<()> {
    let Some((_, first)) = columns.first() else {
        return Err(Error::Domain("no boundary columns to write".into()));
    };
    let grid = first.grid();
    let d = grid.dim();
    let mut w = BufWriter::new(File::create(path)?);
    let mut header: Vec<String> = vec!["sample".into(), "node".into()];
    header.extend((0..d).map(|a| format!("x{a}")));
    header.extend((0..d).map(|a| format!("n{a}")));
    header.extend(columns.iter().map(|(n, _)| n.to_string()));
    writeln!(w, "{}", header.join(","))?;
    for (k, s) in grid.samples().iter().enumerate() {
        let x = grid.coord(s.node);
        let n = s.normal();
        let mut row = vec![k.to_string(), s.node.to_string()];
        row.extend(x[..d].iter().map(|v| format!("{v:.17e}")));
        row.extend(n[..d].iter().map(|v| format!("{v}")));
        row.extend(columns.iter().map(|(_, f)| format!("{:.17e}", f.values()[k])));
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the value column of a file written by [`write_field_csv`].
pub fn read_field_csv(path: &Path, grid: Arc<Grid>) -> Result<NodeField<f64>> {
    let reader = BufReader::new(File::open(path)?);
    let mut values = Vec::with_capacity(grid.len());
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if i == 0 {
            continue;
        }
        let last = line.rsplit(',').next().unwrap_or("");
        values.push(
            last.parse::<f64>()
                .map_err(|e| Error::Serialization(format!("line {}: {e}", i + 1)))?,
        );
    }
    NodeField::new(grid, values)
}

/// Compact little-endian container: magic, dimension, node counts, corners,
/// then the values.
pub fn write_container(path: &Path, field: &NodeField<f64>) -> Result<()> {
    let grid = field.grid();
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(grid.dim() as u32).to_le_bytes())?;
    for &n in grid.shape() {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    for a in 0..grid.dim() {
        w.write_all(&grid.domain().lower[a].to_le_bytes())?;
        w.write_all(&grid.domain().upper[a].to_le_bytes())?;
    }
    for v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_container(path: &Path) -> Result<NodeField<f64>> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    let bad = || Error::Serialization("truncated or malformed field container".into());
    if bytes.len() < 8 || &bytes[..4] != MAGIC {
        return Err(bad());
    }
    let mut pos = 4;
    let mut take = |k: usize| -> Result<&[u8]> {
        let s = bytes.get(pos..pos + k).ok_or_else(bad)?;
        pos += k;
        Ok(s)
    };
    let d = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let mut shape = Vec::new();
    for _ in 0..d {
        shape.push(u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize);
    }
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for _ in 0..d {
        lower.push(f64::from_le_bytes(take(8)?.try_into().unwrap()));
        upper.push(f64::from_le_bytes(take(8)?.try_into().unwrap()));
    }
    let grid = Arc::new(Grid::new(Domain::new(&lower, &upper)?, &shape)?);
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        values.push(f64::from_le_bytes(take(8)?.try_into().unwrap()));
    }
    NodeField::new(grid, values)
}
