//! Binary model container shared by the sequence labeler and the idiom
//! classifiers.
//!
//! Layout:
//!
//! ```text
//! magic   4 bytes  "DKMP"
//! version u16 LE   currently 1
//! mlen    u32 LE   manifest byte length
//! manifest         UTF-8 `key=value` lines; `block=<name>:<rows>:<cols>`
//!                  lines declare payload arrays in order
//! payload          row-major little-endian f32 arrays, one per block
//! checksum u32 LE  CRC-32 (IEEE) of the payload bytes
//! ```

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::mat::Matrix;

pub const MAGIC: &[u8; 4] = b"DKMP";
pub const FORMAT_VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum ContainerError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("bad model header")]
    BadHeader,
    #[error("unsupported model format version {0}")]
    Version(u16),
    #[error("model manifest is not valid UTF-8")]
    ManifestUtf8,
    #[error("bad manifest line: {0}")]
    ManifestLine(String),
    #[error("model payload checksum mismatch")]
    Checksum,
    #[error("model payload is truncated or has trailing bytes")]
    PayloadSize,
    #[error("missing manifest key: {0}")]
    MissingKey(String),
    #[error("missing block: {0}")]
    MissingBlock(String),
    #[error("bad value for {key}: {value}")]
    BadValue { key: String, value: String },
}

fn crc32(bytes: &[u8]) -> u32 {
    let mut table = [0u32; 256];
    for (i, slot) in table.iter_mut().enumerate() {
        let mut c = i as u32;
        for _ in 0..8 {
            c = if c & 1 != 0 { 0xEDB8_8320 ^ (c >> 1) } else { c >> 1 };
        }
        *slot = c;
    }
    let mut crc = 0xFFFF_FFFFu32;
    for &b in bytes {
        crc = table[((crc ^ b as u32) & 0xFF) as usize] ^ (crc >> 8);
    }
    crc ^ 0xFFFF_FFFF
}

/// Manifest entries plus named f64 blocks (stored as f32 on disk).
#[derive(Debug, Clone, Default)]
pub struct Container {
    pub entries: Vec<(String, String)>,
    pub blocks: Vec<(String, Matrix)>,
}

impl Container {
    pub fn new() -> Container {
        Container::default()
    }

    pub fn push_entry(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        debug_assert!(!key.contains('=') && !key.contains('\n'));
        debug_assert!(!value.contains('\n'));
        self.entries.push((key.to_string(), value));
    }

    pub fn push_block(&mut self, name: &str, m: Matrix) {
        self.blocks.push((name.to_string(), m));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str, ContainerError> {
        self.get(key)
            .ok_or_else(|| ContainerError::MissingKey(key.to_string()))
    }

    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T, ContainerError> {
        let v = self.require(key)?;
        v.parse().map_err(|_| ContainerError::BadValue {
            key: key.to_string(),
            value: v.to_string(),
        })
    }

    pub fn block(&self, name: &str) -> Result<&Matrix, ContainerError> {
        self.blocks
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m)
            .ok_or_else(|| ContainerError::MissingBlock(name.to_string()))
    }

    /// All entries with the given key, in manifest order. Used for repeated
    /// keys such as vocabulary tokens and merge rules.
    pub fn get_all(&self, key: &str) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut manifest = String::new();
        for (k, v) in &self.entries {
            manifest.push_str(k);
            manifest.push('=');
            manifest.push_str(v);
            manifest.push('\n');
        }
        for (name, m) in &self.blocks {
            manifest.push_str(&format!("block={}:{}:{}\n", name, m.rows(), m.cols()));
        }

        let mut payload: Vec<u8> = Vec::new();
        for (_, m) in &self.blocks {
            for &x in m.data() {
                payload.extend_from_slice(&(x as f32).to_le_bytes());
            }
        }

        let mut out = Vec::with_capacity(10 + manifest.len() + payload.len() + 4);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(manifest.len() as u32).to_le_bytes());
        out.extend_from_slice(manifest.as_bytes());
        out.extend_from_slice(&payload);
        out.extend_from_slice(&crc32(&payload).to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Container, ContainerError> {
        if bytes.len() < 10 || &bytes[0..4] != MAGIC {
            return Err(ContainerError::BadHeader);
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != FORMAT_VERSION {
            return Err(ContainerError::Version(version));
        }
        let mlen = u32::from_le_bytes([bytes[6], bytes[7], bytes[8], bytes[9]]) as usize;
        if bytes.len() < 10 + mlen + 4 {
            return Err(ContainerError::BadHeader);
        }
        let manifest = std::str::from_utf8(&bytes[10..10 + mlen])
            .map_err(|_| ContainerError::ManifestUtf8)?;

        let mut entries = Vec::new();
        let mut shapes: Vec<(String, usize, usize)> = Vec::new();
        for line in manifest.lines() {
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ContainerError::ManifestLine(line.to_string()))?;
            if k == "block" {
                let mut it = v.rsplitn(3, ':');
                let cols = it.next();
                let rows = it.next();
                let name = it.next();
                match (name, rows, cols) {
                    (Some(n), Some(r), Some(c)) => {
                        let r: usize = r
                            .parse()
                            .map_err(|_| ContainerError::ManifestLine(line.to_string()))?;
                        let c: usize = c
                            .parse()
                            .map_err(|_| ContainerError::ManifestLine(line.to_string()))?;
                        shapes.push((n.to_string(), r, c));
                    }
                    _ => return Err(ContainerError::ManifestLine(line.to_string())),
                }
            } else {
                entries.push((k.to_string(), v.to_string()));
            }
        }

        let payload_len: usize = shapes.iter().map(|(_, r, c)| r * c * 4).sum();
        if bytes.len() != 10 + mlen + payload_len + 4 {
            return Err(ContainerError::PayloadSize);
        }
        let payload = &bytes[10 + mlen..10 + mlen + payload_len];
        let stored = u32::from_le_bytes(
            bytes[10 + mlen + payload_len..]
                .try_into()
                .expect("checksum slice"),
        );
        if crc32(payload) != stored {
            return Err(ContainerError::Checksum);
        }

        let mut blocks = Vec::with_capacity(shapes.len());
        let mut off = 0;
        for (name, r, c) in shapes {
            let n = r * c;
            let mut data = Vec::with_capacity(n);
            for i in 0..n {
                let b = &payload[off + i * 4..off + i * 4 + 4];
                data.push(f32::from_le_bytes(b.try_into().expect("f32 slice")) as f64);
            }
            off += n * 4;
            blocks.push((name, Matrix::from_vec(r, c, data)));
        }
        Ok(Container { entries, blocks })
    }

    pub fn write(&self, path: &Path) -> Result<(), ContainerError> {
        fs::write(path, self.to_bytes()).map_err(|source| ContainerError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn read(path: &Path) -> Result<Container, ContainerError> {
        let bytes = fs::read(path).map_err(|source| ContainerError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Container::from_bytes(&bytes)
    }
}
