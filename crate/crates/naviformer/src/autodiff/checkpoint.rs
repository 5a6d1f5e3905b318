//! Versioned binary container for named tensors.
//!
//! Byte layout (all integers little-endian):
//!
//! ```text
//! magic    4 bytes   "NFCP"
//! version  u32       currently 1
//! meta_len u32
//! meta     meta_len  UTF-8 JSON manifest (caller-defined)
//! count    u32       number of tensors
//! tensor*  count times:
//!   name_len u32
//!   name     name_len UTF-8 bytes
//!   dtype    u8        0 = f32, 1 = f64
//!   ndim     u32
//!   dims     ndim x u64
//!   data     prod(dims) x dtype-width, IEEE 754 little-endian
//! digest   32 bytes  SHA-256 over every preceding byte
//! ```
//!
//! The digest makes on-disk corruption detectable, and the layout contains
//! nothing platform-specific, so other implementations can read and write
//! the same files.

use sha2::{Digest, Sha256};
use std::io::{Read, Write};
use std::path::Path;

use super::data::Data;
use super::params::ParamStore;
use super::scalar::{Dtype, Scalar};

pub const MAGIC: &[u8; 4] = b"NFCP";
pub const VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    BadVersion(u32),
    #[error("unknown dtype code {0}")]
    BadDtype(u8),
    #[error("digest mismatch: file is corrupt")]
    DigestMismatch,
    #[error("file truncated")]
    Truncated,
    #[error("tensor {name}: expected shape {expected:?}, found {found:?}")]
    ShapeMismatch {
        name: String,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("tensor {0} missing from checkpoint")]
    MissingTensor(String),
    #[error("invalid utf-8 in name or metadata")]
    BadUtf8,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// One tensor as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub dtype: Dtype,
    /// Values widened to f64 regardless of on-disk dtype.
    pub values: Vec<f64>,
}

/// Parsed checkpoint contents.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub meta: String,
    pub tensors: Vec<RawTensor>,
}

fn push_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn push_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

/// Serializes named tensors plus a JSON manifest.
pub fn encode<T: Scalar>(meta: &str, tensors: &[(String, &Data<T>)]) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    push_u32(&mut buf, VERSION);
    push_u32(&mut buf, meta.len() as u32);
    buf.extend_from_slice(meta.as_bytes());
    push_u32(&mut buf, tensors.len() as u32);
    for (name, data) in tensors {
        push_u32(&mut buf, name.len() as u32);
        buf.extend_from_slice(name.as_bytes());
        buf.push(T::DTYPE.code());
        push_u32(&mut buf, data.shape().len() as u32);
        for &d in data.shape() {
            push_u64(&mut buf, d as u64);
        }
        match T::DTYPE {
            Dtype::F32 => {
                for &v in data.buf() {
                    buf.extend_from_slice(&(v.to_f64() as f32).to_le_bytes());
                }
            }
            Dtype::F64 => {
                for &v in data.buf() {
                    buf.extend_from_slice(&v.to_f64().to_le_bytes());
                }
            }
        }
    }
    let digest = Sha256::digest(&buf);
    buf.extend_from_slice(&digest);
    buf
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        if self.pos + n > self.buf.len() {
            return Err(CheckpointError::Truncated);
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn u8(&mut self) -> Result<u8, CheckpointError> {
        Ok(self.take(1)?[0])
    }
}

/// Parses and digest-verifies a checkpoint image.
pub fn decode(bytes: &[u8]) -> Result<Checkpoint, CheckpointError> {
    if bytes.len() < 32 + 4 {
        return Err(CheckpointError::Truncated);
    }
    let (body, digest) = bytes.split_at(bytes.len() - 32);
    if Sha256::digest(body).as_slice() != digest {
        return Err(CheckpointError::DigestMismatch);
    }
    let mut cur = Cursor { buf: body, pos: 0 };
    if cur.take(4)? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = cur.u32()?;
    if version != VERSION {
        return Err(CheckpointError::BadVersion(version));
    }
    let meta_len = cur.u32()? as usize;
    let meta = std::str::from_utf8(cur.take(meta_len)?)
        .map_err(|_| CheckpointError::BadUtf8)?
        .to_string();
    let count = cur.u32()? as usize;
    let mut tensors = Vec::with_capacity(count);
    for _ in 0..count {
        let name_len = cur.u32()? as usize;
        let name = std::str::from_utf8(cur.take(name_len)?)
            .map_err(|_| CheckpointError::BadUtf8)?
            .to_string();
        let dtype = Dtype::from_code(cur.u8()?).ok_or_else(|| CheckpointError::BadDtype(0))?;
        let ndim = cur.u32()? as usize;
        let mut shape = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            shape.push(cur.u64()? as usize);
        }
        let len: usize = shape.iter().product();
        let mut values = Vec::with_capacity(len);
        match dtype {
            Dtype::F32 => {
                let raw = cur.take(len * 4)?;
                for c in raw.chunks_exact(4) {
                    values.push(f32::from_le_bytes(c.try_into().unwrap()) as f64);
                }
            }
            Dtype::F64 => {
                let raw = cur.take(len * 8)?;
                for c in raw.chunks_exact(8) {
                    values.push(f64::from_le_bytes(c.try_into().unwrap()));
                }
            }
        }
        tensors.push(RawTensor {
            name,
            shape,
            dtype,
            values,
        });
    }
    Ok(Checkpoint { meta, tensors })
}

/// Saves a parameter store with a manifest string.
pub fn save_store<T: Scalar>(path: &Path, meta: &str, store: &ParamStore<T>) -> Result<(), CheckpointError> {
    let tensors: Vec<(String, &Data<T>)> = store
        .entries()
        .iter()
        .map(|e| (e.name.clone(), &e.data))
        .collect();
    let bytes = encode(meta, &tensors);
    let mut f = std::fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}

/// Loads checkpoint tensors into a store with identical names and shapes.
/// Returns the manifest string.
pub fn load_store<T: Scalar>(path: &Path, store: &mut ParamStore<T>) -> Result<String, CheckpointError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let ckpt = decode(&bytes)?;
    for i in 0..store.len() {
        let name = store.entries()[i].name.clone();
        let expected = store.entries()[i].data.shape().to_vec();
        let raw = ckpt
            .tensors
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| CheckpointError::MissingTensor(name.clone()))?;
        if raw.shape != expected {
            return Err(CheckpointError::ShapeMismatch {
                name,
                expected,
                found: raw.shape.clone(),
            });
        }
        let data = Data::from_f64_slice(&raw.shape, &raw.values);
        *store.get_mut(super::params::ParamId(i)) = data;
    }
    Ok(ckpt.meta)
}

/// Reads only the manifest string of a checkpoint.
pub fn load_meta(path: &Path) -> Result<String, CheckpointError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    Ok(decode(&bytes)?.meta)
}
