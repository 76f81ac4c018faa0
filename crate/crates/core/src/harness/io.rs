//! CSV tables and binary field snapshots.
//!
//! A snapshot is a raw payload of little-endian `f64` values, first axis
//! fastest, one field after another, with no header. Its metadata lives in
//! a sidecar `<name>.meta.json` next to it (`u.bin` → `u.meta.json`).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ErrorTable;
use crate::error::{Error, Result};
use crate::operator::GridFunction;
use crate::stencil::{SchemeParams, StencilTensor};

pub const CSV_HEADER: &str = "alpha,lambda,gamma,h,err_inf,err_l2,order_inf,order_l2";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the table; missing orders are left empty.
pub fn write_csv(table: &ErrorTable, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.alpha,
            r.lambda,
            r.gamma,
            r.h,
            r.err_inf,
            r.err_l2,
            opt(r.order_inf),
            opt(r.order_l2)
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Dumps every stencil entry, center included, as `m[,n[,s]],value`.
pub fn write_coeffs_csv(stencil: &StencilTensor, mut out: impl Write) -> Result<()> {
    let header = ["m", "n", "s"][..stencil.d()].join(",");
    writeln!(out, "{header},value")?;
    for (k, v) in stencil.indices().zip(stencil.as_slice()) {
        let idx: Vec<String> = k.iter().map(|i| i.to_string()).collect();
        writeln!(out, "{},{}", idx.join(","), v)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub d: usize,
    /// Interior nodes per axis.
    pub dims: Vec<usize>,
    pub domain: Vec<[f64; 2]>,
    pub h: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub t: f64,
    /// Field names, in payload order.
    pub fields: Vec<String>,
}

impl SnapshotMeta {
    pub fn new(params: &SchemeParams, t: f64, fields: Vec<String>) -> Self {
        Self {
            d: params.d,
            dims: params.interior_dims(),
            domain: params.domain.clone(),
            h: params.h(),
            alpha: params.alpha,
            lambda: params.lambda,
            gamma: params.gamma,
            t,
            fields,
        }
    }
}

/// `dir/name.bin` → `dir/name.meta.json`.
pub fn meta_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

pub fn write_snapshot(fields: &[GridFunction], meta: &SnapshotMeta, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if fields.len() != meta.fields.len() {
        return Err(Error::DimensionMismatch {
            expected: vec![meta.fields.len()],
            found: vec![fields.len()],
        });
    }
    for f in fields {
        if f.dims() != meta.dims.as_slice() {
            return Err(Error::DimensionMismatch {
                expected: meta.dims.clone(),
                found: f.dims().to_vec(),
            });
        }
    }
    let mut bytes = Vec::with_capacity(fields.iter().map(|f| f.len() * 8).sum());
    for f in fields {
        for v in f.values() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, bytes)?;
    fs::write(meta_path(path), serde_json::to_string_pretty(meta)? + "\n")?;
    Ok(())
}

pub fn read_snapshot(path: impl AsRef<Path>) -> Result<(SnapshotMeta, Vec<GridFunction>)> {
    let path = path.as_ref();
    let meta: SnapshotMeta = serde_json::from_slice(&fs::read(meta_path(path))?)?;
    if meta.dims.len() != meta.d {
        return Err(Error::Format(format!("d = {} but dims = {:?}", meta.d, meta.dims)));
    }
    let bytes = fs::read(path)?;
    let per_field: usize = meta.dims.iter().product();
    let expected = per_field * meta.fields.len() * 8;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "payload has {} bytes, metadata implies {expected}",
            bytes.len()
        )));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let fields = values
        .chunks(per_field.max(1))
        .take(meta.fields.len())
        .map(|c| GridFunction::new(meta.dims.clone(), c.to_vec()))
        .collect::<Result<_>>()?;
    Ok((meta, fields))
}
