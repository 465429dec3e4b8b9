//! Binary weight file.
//!
//! ```text
//! "RFDW"  u32 version  u32 count
//! count × { u16 name_len, name (UTF-8), u8 rank, rank × u32 dim, f32 values }
//! ```
//!
//! Integers and values are little-endian. Tensors are written in name order;
//! trailing unit dimensions are dropped from the stored rank (minimum 1).

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use rfdn_core::arch::WeightStore;
use rfdn_core::{Shape, Tensor};

use crate::error::{CliError, Result};

pub const MAGIC: [u8; 4] = *b"RFDW";
pub const VERSION: u32 = 1;

/// Why a byte stream is not a valid weight file.
#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("bad magic bytes {0:?}, not a weight file")]
    Magic([u8; 4]),
    #[error("unsupported format version {0}")]
    Version(u32),
    #[error("tensor name is not UTF-8")]
    Name,
    #[error("duplicate tensor {0}")]
    Duplicate(String),
    #[error("tensor {name} has rank {rank}, at most 4 is supported")]
    Rank { name: String, rank: u8 },
    #[error("tensor {0} is larger than the file")]
    Size(String),
    #[error("{0} bytes after the last tensor")]
    Trailing(usize),
    #[error("{0}")]
    Io(#[from] io::Error),
}

fn stored_dims(s: Shape) -> Vec<u32> {
    let mut dims: Vec<u32> = s.dims().iter().map(|&d| d as u32).collect();
    while dims.len() > 1 && dims.last() == Some(&1) {
        dims.pop();
    }
    dims
}

pub fn write_weights(out: &mut impl Write, store: &WeightStore<f32>) -> io::Result<()> {
    out.write_all(&MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(store.len() as u32).to_le_bytes())?;
    for (name, t) in store {
        let bytes = name.as_bytes();
        let len = u16::try_from(bytes.len()).map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "name too long"))?;
        out.write_all(&len.to_le_bytes())?;
        out.write_all(bytes)?;
        let dims = stored_dims(t.shape());
        out.write_all(&[dims.len() as u8])?;
        for d in dims {
            out.write_all(&d.to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(4 * t.numel());
        t.data().iter().for_each(|v| buf.extend_from_slice(&v.to_le_bytes()));
        out.write_all(&buf)?;
    }
    Ok(())
}

struct Cursor<'a>(&'a [u8]);

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], FormatError> {
        if self.0.len() < n {
            return Err(io::Error::from(io::ErrorKind::UnexpectedEof).into());
        }
        let (head, tail) = self.0.split_at(n);
        self.0 = tail;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, FormatError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}

pub fn parse_weights(bytes: &[u8]) -> Result<WeightStore<f32>, FormatError> {
    let mut cur = Cursor(bytes);
    let magic: [u8; 4] = cur.take(4)?.try_into().expect("4 bytes");
    if magic != MAGIC {
        return Err(FormatError::Magic(magic));
    }
    let version = cur.u32()?;
    if version != VERSION {
        return Err(FormatError::Version(version));
    }
    let count = cur.u32()?;
    let mut seen = BTreeSet::new();
    let mut store = WeightStore::new();
    for _ in 0..count {
        let len = cur.u16()? as usize;
        let name = std::str::from_utf8(cur.take(len)?).map_err(|_| FormatError::Name)?.to_string();
        if !seen.insert(name.clone()) {
            return Err(FormatError::Duplicate(name));
        }
        let rank = cur.u8()?;
        if !(1..=4).contains(&rank) {
            return Err(FormatError::Rank { name, rank });
        }
        let mut dims = [1usize; 4];
        for d in dims.iter_mut().take(rank as usize) {
            *d = cur.u32()? as usize;
        }
        let numel = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        let raw = match numel.and_then(|n| n.checked_mul(4)) {
            Some(n) if n <= cur.0.len() => cur.take(n)?,
            _ => return Err(FormatError::Size(name)),
        };
        let data = raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes"))).collect();
        let tensor = Tensor::new(Shape::new(dims[0], dims[1], dims[2], dims[3]), data).expect("sized from dims");
        store.insert(name, tensor);
    }
    if !cur.0.is_empty() {
        return Err(FormatError::Trailing(cur.0.len()));
    }
    Ok(store)
}

pub fn read_weights(input: &mut impl Read) -> Result<WeightStore<f32>, FormatError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    parse_weights(&bytes)
}

pub fn save_weights(path: &Path, store: &WeightStore<f32>) -> Result<()> {
    let mut buf = Vec::new();
    write_weights(&mut buf, store).map_err(CliError::io(path))?;
    fs::write(path, buf).map_err(CliError::io(path))
}

pub fn load_weights(path: &Path) -> Result<WeightStore<f32>> {
    let bytes = fs::read(path).map_err(CliError::io(path))?;
    parse_weights(&bytes).map_err(|e| CliError::Format { path: path.to_path_buf(), message: e.to_string() })
}
