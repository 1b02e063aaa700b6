//! CSV results and the binary data-dump format.
//!
//! A dump is `u64 rows, u64 cols` for `Z_P`, the same for `Z_S`, then the
//! entries of `Z_P` followed by those of `Z_S`, column-major, each entry as
//! two `f64` (real, imaginary). Everything is little-endian. A subspace file
//! holds a single matrix in the same layout.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::ResultRow;
use crate::numerics::{c64, ComplexMatrix};
use crate::scenario::DataSet;

pub const CSV_HEADER: &str = "detector,N,r,K_P,K_S,env,snr_db,pfa_target,threshold,trials,pd_hat,ci_low,ci_high,seed";

impl ResultRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.detector,
            self.n,
            self.r,
            self.k_p,
            self.k_s,
            self.env,
            self.snr_db,
            self.pfa_target,
            self.threshold,
            self.trials,
            self.pd_hat,
            self.ci_low,
            self.ci_high,
            self.seed
        )
    }
}

pub fn csv_string(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}

/// Writes `contents` to a temporary sibling of `path` and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => std::env::current_dir()?,
    };
    fs::create_dir_all(&dir)?;
    let name = path.file_name().ok_or_else(|| Error::Config(format!("invalid output path {path:?}")))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    write_atomic(path, csv_string(rows).as_bytes())
}

fn push_matrix(buf: &mut Vec<u8>, m: &ComplexMatrix) {
    for z in m.iter() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
}

fn push_header(buf: &mut Vec<u8>, m: &ComplexMatrix) {
    buf.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    buf.extend_from_slice(&(m.ncols() as u64).to_le_bytes());
}

pub fn encode_dataset(data: &DataSet) -> Vec<u8> {
    let mut buf = Vec::new();
    push_header(&mut buf, &data.z_p);
    push_header(&mut buf, &data.z_s);
    push_matrix(&mut buf, &data.z_p);
    push_matrix(&mut buf, &data.z_s);
    buf
}

pub fn encode_matrix(m: &ComplexMatrix) -> Vec<u8> {
    let mut buf = Vec::new();
    push_header(&mut buf, m);
    push_matrix(&mut buf, m);
    buf
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take8(&mut self) -> Result<[u8; 8]> {
        let end = self.pos + 8;
        let chunk = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::Io(std::io::Error::new(std::io::ErrorKind::UnexpectedEof, "truncated data file")))?;
        self.pos = end;
        Ok(chunk.try_into().expect("8-byte slice"))
    }

    fn dim(&mut self) -> Result<usize> {
        let v = u64::from_le_bytes(self.take8()?);
        usize::try_from(v).ok().filter(|&d| d <= 1 << 20).ok_or_else(|| bad_data(format!("implausible dimension {v}")))
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<ComplexMatrix> {
        let mut vals = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            let re = f64::from_le_bytes(self.take8()?);
            let im = f64::from_le_bytes(self.take8()?);
            if !(re.is_finite() && im.is_finite()) {
                return Err(bad_data("non-finite entry".into()));
            }
            vals.push(c64(re, im));
        }
        Ok(ComplexMatrix::from_vec(rows, cols, vals))
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(bad_data(format!("{} trailing bytes", self.bytes.len() - self.pos)));
        }
        Ok(())
    }
}

fn bad_data(msg: String) -> Error {
    Error::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, msg))
}

pub fn decode_dataset(bytes: &[u8]) -> Result<DataSet> {
    let mut c = Cursor { bytes, pos: 0 };
    let (pr, pc) = (c.dim()?, c.dim()?);
    let (sr, sc) = (c.dim()?, c.dim()?);
    let z_p = c.matrix(pr, pc)?;
    let z_s = c.matrix(sr, sc)?;
    c.finish()?;
    DataSet::new(z_p, z_s)
}

pub fn decode_matrix(bytes: &[u8]) -> Result<ComplexMatrix> {
    let mut c = Cursor { bytes, pos: 0 };
    let (rows, cols) = (c.dim()?, c.dim()?);
    let m = c.matrix(rows, cols)?;
    c.finish()?;
    Ok(m)
}

fn read_all(path: &Path) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    Ok(bytes)
}

pub fn read_dataset(path: &Path) -> Result<DataSet> {
    decode_dataset(&read_all(path)?)
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    decode_matrix(&read_all(path)?)
}
