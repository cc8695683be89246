//! DRM dense matrix files.
//!
//! Layout (little-endian): magic `DRM1`, u64 rows, u64 cols, then rows×cols
//! float32 in row-major order. A sidecar `<file>.ids` lists one document id
//! per line in row order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;

use crate::binio;
use crate::error::{Error, Result};

pub const DRM_MAGIC: &[u8; 4] = b"DRM1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DrmHeader {
    pub rows: usize,
    pub cols: usize,
}

pub fn ids_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".ids");
    PathBuf::from(s)
}

pub fn write_drm(path: &Path, matrix: &Array2<f32>, ids: Option<&[String]>) -> Result<()> {
    if let Some(ids) = ids {
        if ids.len() != matrix.nrows() {
            return Err(Error::Alignment(format!(
                "{} ids for a {}-row matrix",
                ids.len(),
                matrix.nrows()
            )));
        }
    }
    let io = |e| Error::io(path, e);
    let file = File::create(path).map_err(io)?;
    let mut w = BufWriter::new(file);
    binio::write_magic(&mut w, DRM_MAGIC).map_err(io)?;
    binio::write_u64(&mut w, matrix.nrows() as u64).map_err(io)?;
    binio::write_u64(&mut w, matrix.ncols() as u64).map_err(io)?;
    for row in matrix.rows() {
        binio::write_f32s(&mut w, &row.to_vec()).map_err(io)?;
    }
    w.flush().map_err(io)?;

    if let Some(ids) = ids {
        let sidecar = ids_path(path);
        let io = |e| Error::io(&sidecar, e);
        let mut w = BufWriter::new(File::create(&sidecar).map_err(io)?);
        for id in ids {
            if id.contains('\n') {
                return Err(Error::Format(format!(
                    "document id {id:?} contains a newline"
                )));
            }
            writeln!(w, "{id}").map_err(io)?;
        }
        w.flush().map_err(io)?;
    }
    Ok(())
}

fn read_header<R: Read>(r: &mut R, path: &Path) -> Result<DrmHeader> {
    binio::read_magic(r, DRM_MAGIC, &path.display().to_string())?;
    let rows = binio::read_len(r)?;
    let cols = binio::read_len(r)?;
    if cols == 0 {
        return Err(Error::Format(format!(
            "{}: matrix has zero columns",
            path.display()
        )));
    }
    Ok(DrmHeader { rows, cols })
}

pub fn read_drm_header(path: &Path) -> Result<DrmHeader> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let len = file.metadata().map_err(|e| Error::io(path, e))?.len();
    let header = read_header(&mut BufReader::new(file), path)?;
    let expected = 20 + 4 * (header.rows as u64) * (header.cols as u64);
    if len != expected {
        return Err(Error::Format(format!(
            "{}: {len} bytes on disk, header implies {expected}",
            path.display()
        )));
    }
    Ok(header)
}

pub fn read_drm(path: &Path) -> Result<Array2<f32>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let h = read_header(&mut r, path)?;
    let n = h
        .rows
        .checked_mul(h.cols)
        .ok_or_else(|| Error::Format("matrix dimensions overflow".into()))?;
    let values = binio::read_f32s(&mut r, n)?;
    binio::expect_eof(&mut r, &path.display().to_string())?;
    Array2::from_shape_vec((h.rows, h.cols), values).map_err(|e| Error::Format(e.to_string()))
}

/// Reads the id sidecar, if present.
pub fn read_ids(path: &Path) -> Result<Option<Vec<String>>> {
    let sidecar = ids_path(path);
    if !sidecar.exists() {
        return Ok(None);
    }
    let file = File::open(&sidecar).map_err(|e| Error::io(&sidecar, e))?;
    BufReader::new(file)
        .lines()
        .map(|l| l.map_err(|e| Error::io(&sidecar, e)))
        .collect::<Result<Vec<_>>>()
        .map(Some)
}
