//! Self-describing binary container for lattice fields.
//!
//! A snapshot stores the grid header (sites per axis, box length, vacuum
//! constants) followed by any number of named scalar blocks, each holding
//! one f64 per site in the crate's row-major site order (x slowest). Vector
//! fields are stored as three blocks with `_x`, `_y`, `_z` suffixes.
//!
//! On-disk layout, all little-endian:
//!
//! ```text
//! magic    "PZWF"   4 bytes
//! version  u32      currently 1
//! n        u32      sites per axis
//! length   f64      box extent
//! eps0     f64
//! mu0      f64
//! count    u32      number of named blocks
//! blocks   count times: label_len u32, label utf8, n^3 f64
//! ```
//!
//! Blocks are written in sorted label order, so saving the same snapshot
//! twice produces byte-identical files.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::lattice::{Grid, ScalarField, VectorField};

const MAGIC: [u8; 4] = *b"PZWF";
const VERSION: u32 = 1;

// Caps on header counts so a corrupt file fails cleanly instead of
// attempting a huge allocation.
const MAX_BLOCKS: u32 = 256;
const MAX_LABEL_LEN: u32 = 256;

/// A bag of named lattice fields sharing one grid.
#[derive(Clone, Debug)]
pub struct Snapshot {
    grid: Grid,
    blocks: BTreeMap<String, Vec<f64>>,
}

impl Snapshot {
    pub fn new(grid: Grid) -> Self {
        Snapshot { grid, blocks: BTreeMap::new() }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Block labels in the order they are written to disk.
    pub fn labels(&self) -> Vec<&str> {
        self.blocks.keys().map(|s| s.as_str()).collect()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.blocks.contains_key(label)
    }

    pub fn insert_scalar(&mut self, label: &str, field: &ScalarField) -> Result<()> {
        self.grid.check_same(&field.grid, "snapshot insert")?;
        self.blocks.insert(label.to_string(), field.values.clone());
        Ok(())
    }

    /// Store a vector field as three suffixed scalar blocks.
    pub fn insert_vector(&mut self, label: &str, field: &VectorField) -> Result<()> {
        self.grid.check_same(&field.grid, "snapshot insert")?;
        for (c, suffix) in ["_x", "_y", "_z"].iter().enumerate() {
            self.blocks.insert(format!("{label}{suffix}"), field.values[c].clone());
        }
        Ok(())
    }

    pub fn scalar(&self, label: &str) -> Result<ScalarField> {
        let values = self
            .blocks
            .get(label)
            .ok_or_else(|| Error::Snapshot(format!("no block named `{label}`")))?
            .clone();
        Ok(ScalarField { grid: self.grid, values })
    }

    pub fn vector(&self, label: &str) -> Result<VectorField> {
        let x = self.scalar(&format!("{label}_x"))?;
        let y = self.scalar(&format!("{label}_y"))?;
        let z = self.scalar(&format!("{label}_z"))?;
        Ok(VectorField { grid: self.grid, values: [x.values, y.values, z.values] })
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(&MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.grid.n as u32).to_le_bytes())?;
        w.write_all(&self.grid.length.to_le_bytes())?;
        w.write_all(&self.grid.eps0.to_le_bytes())?;
        w.write_all(&self.grid.mu0.to_le_bytes())?;
        w.write_all(&(self.blocks.len() as u32).to_le_bytes())?;
        for (label, values) in &self.blocks {
            w.write_all(&(label.len() as u32).to_le_bytes())?;
            w.write_all(label.as_bytes())?;
            for v in values {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        read_exact(r, &mut magic, "magic")?;
        if magic != MAGIC {
            return Err(Error::Snapshot(format!(
                "bad magic {:02x?}, expected {:02x?}",
                magic, MAGIC
            )));
        }
        let version = read_u32(r, "version")?;
        if version != VERSION {
            return Err(Error::Snapshot(format!(
                "unsupported version {version}, this build reads {VERSION}"
            )));
        }
        let n = read_u32(r, "grid size")?;
        let length = read_f64(r, "box length")?;
        let eps0 = read_f64(r, "eps0")?;
        let mu0 = read_f64(r, "mu0")?;
        let grid = Grid::new(n as usize, length, eps0, mu0)
            .map_err(|e| Error::Snapshot(format!("invalid grid header: {e}")))?;

        let count = read_u32(r, "block count")?;
        if count > MAX_BLOCKS {
            return Err(Error::Snapshot(format!("block count {count} exceeds {MAX_BLOCKS}")));
        }
        let mut blocks = BTreeMap::new();
        for _ in 0..count {
            let label_len = read_u32(r, "label length")?;
            if label_len > MAX_LABEL_LEN {
                return Err(Error::Snapshot(format!(
                    "label length {label_len} exceeds {MAX_LABEL_LEN}"
                )));
            }
            let mut raw = vec![0u8; label_len as usize];
            read_exact(r, &mut raw, "label")?;
            let label = String::from_utf8(raw)
                .map_err(|_| Error::Snapshot("label is not utf-8".into()))?;
            let mut values = vec![0.0f64; grid.sites()];
            let mut buf = [0u8; 8];
            for v in values.iter_mut() {
                read_exact(r, &mut buf, "field data")?;
                *v = f64::from_le_bytes(buf);
            }
            if blocks.insert(label.clone(), values).is_some() {
                return Err(Error::Snapshot(format!("duplicate block `{label}`")));
            }
        }
        // A well-formed file ends exactly at the last block.
        let mut tail = [0u8; 1];
        if r.read(&mut tail)? != 0 {
            return Err(Error::Snapshot("trailing bytes after final block".into()));
        }
        Ok(Snapshot { grid, blocks })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        Self::read_from(&mut r)
    }
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| Error::Snapshot(format!("truncated while reading {what}")))
}

fn read_u32<R: Read>(r: &mut R, what: &str) -> Result<u32> {
    let mut buf = [0u8; 4];
    read_exact(r, &mut buf, what)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64<R: Read>(r: &mut R, what: &str) -> Result<f64> {
    let mut buf = [0u8; 8];
    read_exact(r, &mut buf, what)?;
    Ok(f64::from_le_bytes(buf))
}
