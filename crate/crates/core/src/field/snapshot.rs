//! Field snapshot files.
//!
//! A snapshot starts with one header line
//!
//! ```text
//! presym-snapshot n=<n> length=<L> x0=<t> name=<field> count=<N> format=<csv|f64le>
//! ```
//!
//! followed either by `N` decimal values, one per line, or by `N` raw
//! little-endian `f64` values. Values are in row-major order, axis 1 slowest.

use std::io::{BufRead, Write};

use super::grid::{Grid3, ScalarField};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Binary,
}

impl Format {
    fn tag(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Binary => "f64le",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub name: String,
    pub x0: f64,
    pub field: ScalarField,
}

pub fn write_snapshot<W: Write>(w: &mut W, snap: &Snapshot, format: Format) -> Result<()> {
    if snap.name.is_empty() || snap.name.contains(char::is_whitespace) {
        return Err(Error::Snapshot(format!("invalid field name {:?}", snap.name)));
    }
    let g = snap.field.grid();
    writeln!(
        w,
        "presym-snapshot n={} length={:e} x0={:e} name={} count={} format={}",
        g.n(),
        g.length(),
        snap.x0,
        snap.name,
        g.len(),
        format.tag()
    )?;
    match format {
        Format::Csv => {
            for v in snap.field.values() {
                writeln!(w, "{v:e}")?;
            }
        }
        Format::Binary => {
            for v in snap.field.values() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

pub fn read_snapshot<R: BufRead>(r: &mut R) -> Result<Snapshot> {
    let mut header = String::new();
    r.read_line(&mut header)?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("presym-snapshot") {
        return Err(Error::Snapshot("missing header".into()));
    }
    let mut n = None;
    let mut length = None;
    let mut x0 = None;
    let mut name = None;
    let mut count = None;
    let mut format = None;
    for p in parts {
        let (k, v) = p.split_once('=').ok_or_else(|| Error::Snapshot(format!("bad header field {p:?}")))?;
        let bad = |_| Error::Snapshot(format!("bad value for {k}"));
        match k {
            "n" => n = Some(v.parse::<usize>().map_err(|_| Error::Snapshot("bad n".into()))?),
            "length" => length = Some(v.parse::<f64>().map_err(bad)?),
            "x0" => x0 = Some(v.parse::<f64>().map_err(bad)?),
            "name" => name = Some(v.to_string()),
            "count" => count = Some(v.parse::<usize>().map_err(|_| Error::Snapshot("bad count".into()))?),
            "format" => {
                format = Some(match v {
                    "csv" => Format::Csv,
                    "f64le" => Format::Binary,
                    _ => return Err(Error::Snapshot(format!("unknown format {v}"))),
                })
            }
            _ => return Err(Error::Snapshot(format!("unknown header field {k}"))),
        }
    }
    let missing = |f: &str| Error::Snapshot(format!("header lacks {f}"));
    let grid = Grid3::new(n.ok_or_else(|| missing("n"))?, length.ok_or_else(|| missing("length"))?)?;
    let count = count.ok_or_else(|| missing("count"))?;
    if count != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), found: count });
    }
    let values = match format.ok_or_else(|| missing("format"))? {
        Format::Csv => {
            let mut vals = Vec::with_capacity(count);
            for line in r.lines() {
                let line = line?;
                let t = line.trim();
                if t.is_empty() {
                    continue;
                }
                vals.push(t.parse::<f64>().map_err(|_| Error::Snapshot(format!("bad value {t:?}")))?);
            }
            vals
        }
        Format::Binary => {
            let mut buf = Vec::new();
            r.read_to_end(&mut buf)?;
            buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect()
        }
    };
    Ok(Snapshot {
        name: name.ok_or_else(|| missing("name"))?,
        x0: x0.ok_or_else(|| missing("x0"))?,
        field: ScalarField::from_values(grid, values)?,
    })
}
