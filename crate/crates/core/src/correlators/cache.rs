//! On-disk cache of correlator tables.
//!
//! One file per table, named by a SHA-256 of the key. Layout, all
//! little-endian:
//!
//! ```text
//! offset  size  field
//!      0     8  magic "LRCGTAB\0"
//!      8     4  format version (u32, currently 1)
//!     12     4  reserved, zero
//!     16    40  mu, t, delta, alpha, beta (f64 each)
//!     56     8  x_max (u64)
//!     64     8  abs_tol (f64)
//!     72     8  grid_size (u64)
//!     80     8  max_subdivisions (u64)
//!     88     8  entry count n = 2·x_max + 3 (u64)
//!     96   8·n  G_x for x = −(x_max+1) ..= x_max+1 (f64)
//! ```

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::{correlator_table, CorrelatorTable, QuadratureConfig};
use crate::error::{Error, Result};
use crate::model::ModelParams;

const MAGIC: &[u8; 8] = b"LRCGTAB\0";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 96;

fn header(p: &ModelParams, x_max: usize, q: &QuadratureConfig) -> Vec<u8> {
    let mut h = Vec::with_capacity(HEADER_LEN);
    h.extend_from_slice(MAGIC);
    h.extend_from_slice(&VERSION.to_le_bytes());
    h.extend_from_slice(&0u32.to_le_bytes());
    for v in [p.mu(), p.t(), p.delta(), p.alpha(), p.beta()] {
        h.extend_from_slice(&v.to_le_bytes());
    }
    h.extend_from_slice(&(x_max as u64).to_le_bytes());
    h.extend_from_slice(&q.abs_tol.to_le_bytes());
    h.extend_from_slice(&(q.grid_size as u64).to_le_bytes());
    h.extend_from_slice(&(q.max_subdivisions as u64).to_le_bytes());
    h.extend_from_slice(&((2 * x_max + 3) as u64).to_le_bytes());
    h
}

fn io_err(path: &Path, e: io::Error) -> Error {
    Error::Cache(format!("{}: {e}", path.display()))
}

/// Directory-backed table cache.
#[derive(Debug, Clone)]
pub struct CorrelatorCache {
    dir: PathBuf,
}

impl CorrelatorCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        CorrelatorCache { dir: dir.into() }
    }

    pub fn path_for(&self, p: &ModelParams, x_max: usize, q: &QuadratureConfig) -> PathBuf {
        let digest = Sha256::digest(header(p, x_max, q));
        let name: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
        self.dir.join(format!("g-{name}.bin"))
    }

    /// Returns the cached table, or `None` when absent or written for a
    /// different key.
    pub fn load(
        &self,
        p: &ModelParams,
        x_max: usize,
        q: &QuadratureConfig,
    ) -> Result<Option<CorrelatorTable>> {
        let path = self.path_for(p, x_max, q);
        let mut file = match fs::File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(io_err(&path, e)),
        };
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes).map_err(|e| io_err(&path, e))?;
        let expect = header(p, x_max, q);
        if bytes.len() < HEADER_LEN || bytes[..HEADER_LEN] != expect[..] {
            return Ok(None);
        }
        let n = 2 * x_max + 3;
        let body = &bytes[HEADER_LEN..];
        if body.len() != 8 * n {
            return Err(Error::Cache(format!(
                "{}: expected {} payload bytes, found {}",
                path.display(),
                8 * n,
                body.len()
            )));
        }
        let values = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Some(CorrelatorTable::from_parts(*p, x_max, *q, values)))
    }

    pub fn store(&self, tbl: &CorrelatorTable) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir).map_err(|e| io_err(&self.dir, e))?;
        let path = self.path_for(tbl.params(), tbl.x_max(), tbl.quadrature());
        let mut bytes = header(tbl.params(), tbl.x_max(), tbl.quadrature());
        for v in tbl.values() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let tmp = path.with_extension("tmp");
        let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
        f.write_all(&bytes).map_err(|e| io_err(&tmp, e))?;
        drop(f);
        fs::rename(&tmp, &path).map_err(|e| io_err(&path, e))?;
        Ok(path)
    }

    pub fn load_or_build(
        &self,
        p: &ModelParams,
        x_max: usize,
        q: &QuadratureConfig,
    ) -> Result<CorrelatorTable> {
        if let Some(t) = self.load(p, x_max, q)? {
            return Ok(t);
        }
        let t = correlator_table(p, x_max, q)?;
        self.store(&t)?;
        Ok(t)
    }
}
