use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use faer::Mat;

use super::{Hermiticity, LatticeOperator};
use crate::c64;
use crate::error::{bail, Result};
use crate::geometry::LatticeSample;

const MAGIC: &[u8; 8] = b"SPBOP\0\0\x01";

/// Writes entries with `|A_ij| > threshold` as `row,col,re,im` lines.
pub fn write_triplets_csv(a: &LatticeOperator, path: &Path, threshold: f64) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["row", "col", "re", "im"])?;
    let m = a.matrix();
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            let v = m[(i, j)];
            if v.norm() > threshold {
                w.write_record([i.to_string(), j.to_string(), format!("{:e}", v.re), format!("{:e}", v.im)])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Dense little-endian dump: magic, dimension, then column-major `(re, im)` pairs.
pub fn write_binary(a: &LatticeOperator, path: &Path) -> Result<()> {
    let n = a.dim();
    let mut buf = Vec::with_capacity(16 + 16 * n * n);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(n as u64).to_le_bytes());
    let m = a.matrix();
    for j in 0..n {
        for i in 0..n {
            buf.extend_from_slice(&m[(i, j)].re.to_le_bytes());
            buf.extend_from_slice(&m[(i, j)].im.to_le_bytes());
        }
    }
    std::fs::File::create(path)?.write_all(&buf)?;
    Ok(())
}

pub fn read_binary(sample: Arc<LatticeSample>, path: &Path) -> Result<LatticeOperator> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    if buf.len() < 16 || &buf[..8] != MAGIC {
        bail!(Operator, "{} is not an operator dump", path.display());
    }
    let n = u64::from_le_bytes(buf[8..16].try_into().unwrap()) as usize;
    if n != sample.dim() || buf.len() != 16 + 16 * n * n {
        bail!(Operator, "dump dimension {n} does not match the sample");
    }
    let f = |k: usize| f64::from_le_bytes(buf[16 + 8 * k..24 + 8 * k].try_into().unwrap());
    let matrix = Mat::from_fn(n, n, |i, j| {
        let k = 2 * (j * n + i);
        c64::new(f(k), f(k + 1))
    });
    LatticeOperator::new(sample, matrix, Hermiticity::General)
}
