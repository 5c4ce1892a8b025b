//! Dataset files. Little-endian throughout:
//!
//! ```text
//! magic "HDRXDSET" | u32 version | u64 len + spec JSON | u64 record count
//! per record:
//!   u64 tti_index, f64 snr_db, f64 backoff_db, u64 pa_seed
//!   u32 rows, u32 symbols, u32 valid_len[symbols], (f64 re, f64 im)[rows*symbols]
//!   u32 subcarriers, u32 symbols, raw LS grid, known-channel grid (complex f64)
//!   u64 bit count, packed labels, packed mask (LSB first)
//! ```
//!
//! A JSON manifest next to the file records the spec, count, format
//! version and the SHA-256 of the file.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::generate::{Generator, TtiRecord};
use super::spec::DatasetSpec;
use crate::dsp::{GridKind, ResourceGrid, TimeFrame};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"HDRXDSET";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub spec: DatasetSpec,
    pub records: Vec<TtiRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub spec: DatasetSpec,
    pub count: usize,
    pub content_hash: String,
    pub file: String,
}

impl Dataset {
    pub fn generate(spec: &DatasetSpec) -> Result<Self> {
        let g = Generator::new(spec)?;
        let records = (0..spec.num_ttis as u64).map(|i| g.tti(i)).collect::<Result<_>>()?;
        Ok(Dataset {
            spec: spec.clone(),
            records,
        })
    }

    pub fn masked_bits(&self) -> u64 {
        self.records.iter().map(|r| r.mask.iter().filter(|&&m| m).count() as u64).sum()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer(Vec::new());
        w.0.extend_from_slice(MAGIC);
        w.u32(VERSION);
        let json = self.spec.to_json();
        w.u64(json.len() as u64);
        w.0.extend_from_slice(json.as_bytes());
        w.u64(self.records.len() as u64);
        for r in &self.records {
            w.u64(r.tti_index);
            w.f64(r.snr_db);
            w.f64(r.backoff_db);
            w.u64(r.pa_seed);
            w.u32(r.rx_frame.rows() as u32);
            w.u32(r.rx_frame.symbols() as u32);
            r.rx_frame.valid_len.iter().for_each(|&v| w.u32(v as u32));
            w.complex(&r.rx_frame.data);
            let (nd, ns) = r.raw_ls.shape();
            w.u32(nd as u32);
            w.u32(ns as u32);
            w.complex(&r.raw_ls.data);
            w.complex(&r.known_channel.data);
            w.u64(r.labels.len() as u64);
            w.bits(r.labels.iter().map(|&b| b != 0));
            w.bits(r.mask.iter().copied());
        }
        w.0
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::Format("not a dataset file (bad magic)".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported dataset version {version}")));
        }
        let len = r.u64()? as usize;
        let spec: DatasetSpec = serde_json::from_slice(r.take(len)?)?;
        let count = r.u64()? as usize;
        let mut records = Vec::with_capacity(count.min(1 << 20));
        for _ in 0..count {
            let tti_index = r.u64()?;
            let snr_db = r.f64()?;
            let backoff_db = r.f64()?;
            let pa_seed = r.u64()?;
            let rows = r.u32()? as usize;
            let ns = r.u32()? as usize;
            let valid_len = (0..ns).map(|_| r.u32().map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
            let rx_frame = TimeFrame::from_vec(rows, valid_len, r.complex(rows * ns)?)?;
            let nd = r.u32()? as usize;
            let ns = r.u32()? as usize;
            let raw_ls = ResourceGrid::from_vec(nd, ns, r.complex(nd * ns)?, GridKind::ChannelEstimate)?;
            let known_channel = ResourceGrid::from_vec(nd, ns, r.complex(nd * ns)?, GridKind::ChannelEstimate)?;
            let nbits = r.u64()? as usize;
            let labels = r.bits(nbits)?.into_iter().map(u8::from).collect();
            let mask = r.bits(nbits)?;
            records.push(TtiRecord {
                tti_index,
                snr_db,
                backoff_db,
                pa_seed,
                rx_frame,
                raw_ls,
                known_channel,
                labels,
                mask,
            });
        }
        if r.pos != bytes.len() {
            return Err(Error::Format(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        Ok(Dataset { spec, records })
    }

    /// Write the dataset and its manifest (`<path>.manifest.json`).
    pub fn save(&self, path: &Path) -> Result<Manifest> {
        let bytes = self.to_bytes();
        std::fs::write(path, &bytes).map_err(|e| Error::io(path, e))?;
        let manifest = Manifest {
            format_version: VERSION,
            spec: self.spec.clone(),
            count: self.records.len(),
            content_hash: sha256_hex(&bytes),
            file: path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
        };
        let mpath = manifest_path(path);
        let json = serde_json::to_string_pretty(&manifest)?;
        std::fs::write(&mpath, json).map_err(|e| Error::io(&mpath, e))?;
        Ok(manifest)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

pub fn manifest_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Generate `spec` and write it to `path`; returns the manifest.
pub fn generate_dataset(spec: &DatasetSpec, path: &Path) -> Result<Manifest> {
    Dataset::generate(spec)?.save(path)
}

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn complex(&mut self, v: &[Complex64]) {
        for z in v {
            self.f64(z.re);
            self.f64(z.im);
        }
    }
    fn bits(&mut self, bits: impl Iterator<Item = bool>) {
        let mut byte = 0u8;
        let mut n = 0;
        for b in bits {
            byte |= (b as u8) << (n % 8);
            n += 1;
            if n % 8 == 0 {
                self.0.push(byte);
                byte = 0;
            }
        }
        if n % 8 != 0 {
            self.0.push(byte);
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Format("truncated dataset".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn complex(&mut self, n: usize) -> Result<Vec<Complex64>> {
        (0..n).map(|_| Ok(Complex64::new(self.f64()?, self.f64()?))).collect()
    }
    fn bits(&mut self, n: usize) -> Result<Vec<bool>> {
        let raw = self.take(n.div_ceil(8))?;
        Ok((0..n).map(|i| raw[i / 8] >> (i % 8) & 1 == 1).collect())
    }
}
