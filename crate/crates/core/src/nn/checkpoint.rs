//! Little-endian binary checkpoint:
//!
//! ```text
//! magic "HDRXCKPT" | u32 version | u64 len + architecture JSON
//! u64 param count | per param: u32 len + name, u32 ndim, u64 dims, f64 values
//! u8 has_optimizer | [u64 t, f64 lr, beta1, beta2, eps, per param m then v]
//! ```

use std::path::Path;

use super::adam::{AdamConfig, AdamState};
use super::param::Module;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MAGIC: &[u8; 8] = b"HDRXCKPT";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct StoredParam {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub architecture: String,
    pub params: Vec<StoredParam>,
    pub optimizer: Option<AdamState<f64>>,
}

impl Checkpoint {
    pub fn capture<T: Real, M: Module<T> + ?Sized>(
        architecture: &str,
        model: &M,
        optimizer: Option<&AdamState<T>>,
    ) -> Self {
        let mut params = Vec::new();
        model.visit(&mut |p| {
            params.push(StoredParam {
                name: p.name.clone(),
                shape: p.value.shape().to_vec(),
                values: p.value.data.iter().map(|v| v.to_f64_lossy()).collect(),
            })
        });
        let to64 = |b: &Vec<Vec<T>>| -> Vec<Vec<f64>> {
            b.iter().map(|v| v.iter().map(|x| x.to_f64_lossy()).collect()).collect()
        };
        Checkpoint {
            architecture: architecture.to_string(),
            params,
            optimizer: optimizer.map(|s| AdamState {
                config: s.config,
                t: s.t,
                m: to64(&s.m),
                v: to64(&s.v),
            }),
        }
    }

    /// Copy stored values into `model`; names and shapes must match in order.
    pub fn restore<T: Real, M: Module<T> + ?Sized>(&self, model: &mut M) -> Result<()> {
        let names = model.param_names();
        if names.len() != self.params.len() {
            return Err(Error::Format(format!(
                "checkpoint has {} parameters, model has {}",
                self.params.len(),
                names.len()
            )));
        }
        let mut err = None;
        let mut i = 0;
        model.visit_mut(&mut |p| {
            let s = &self.params[i];
            i += 1;
            if err.is_some() {
                return;
            }
            if s.name != p.name || s.shape != p.value.shape() {
                err = Some(Error::Format(format!(
                    "parameter {} {:?} does not match stored {} {:?}",
                    p.name,
                    p.value.shape(),
                    s.name,
                    s.shape
                )));
                return;
            }
            p.value.data.iter_mut().zip(&s.values).for_each(|(d, &v)| *d = T::lit(v));
        });
        err.map_or(Ok(()), Err)
    }

    pub fn optimizer_as<T: Real>(&self) -> Option<AdamState<T>> {
        let conv = |b: &Vec<Vec<f64>>| b.iter().map(|v| v.iter().map(|&x| T::lit(x)).collect()).collect();
        self.optimizer.as_ref().map(|s| AdamState {
            config: s.config,
            t: s.t,
            m: conv(&s.m),
            v: conv(&s.v),
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut b = Vec::new();
        b.extend_from_slice(MAGIC);
        b.extend_from_slice(&VERSION.to_le_bytes());
        b.extend_from_slice(&(self.architecture.len() as u64).to_le_bytes());
        b.extend_from_slice(self.architecture.as_bytes());
        b.extend_from_slice(&(self.params.len() as u64).to_le_bytes());
        for p in &self.params {
            b.extend_from_slice(&(p.name.len() as u32).to_le_bytes());
            b.extend_from_slice(p.name.as_bytes());
            b.extend_from_slice(&(p.shape.len() as u32).to_le_bytes());
            for &d in &p.shape {
                b.extend_from_slice(&(d as u64).to_le_bytes());
            }
            p.values.iter().for_each(|v| b.extend_from_slice(&v.to_le_bytes()));
        }
        match &self.optimizer {
            None => b.push(0),
            Some(s) => {
                b.push(1);
                b.extend_from_slice(&s.t.to_le_bytes());
                for x in [s.config.lr, s.config.beta1, s.config.beta2, s.config.eps] {
                    b.extend_from_slice(&x.to_le_bytes());
                }
                for buf in s.m.iter().chain(&s.v) {
                    buf.iter().for_each(|v| b.extend_from_slice(&v.to_le_bytes()));
                }
            }
        }
        b
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::Format("not a checkpoint (bad magic)".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported checkpoint version {version}")));
        }
        let len = r.u64()? as usize;
        let architecture = r.string(len)?;
        let count = r.u64()? as usize;
        let mut params = Vec::with_capacity(count.min(1 << 16));
        for _ in 0..count {
            let len = r.u32()? as usize;
            let name = r.string(len)?;
            let ndim = r.u32()? as usize;
            let shape = (0..ndim).map(|_| r.u64().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
            let n = shape.iter().product();
            let values = r.f64s(n)?;
            params.push(StoredParam { name, shape, values });
        }
        let optimizer = match r.take(1)?[0] {
            0 => None,
            1 => {
                let t = r.u64()?;
                let config = AdamConfig {
                    lr: r.f64()?,
                    beta1: r.f64()?,
                    beta2: r.f64()?,
                    eps: r.f64()?,
                };
                let m = params.iter().map(|p| r.f64s(p.values.len())).collect::<Result<Vec<_>>>()?;
                let v = params.iter().map(|p| r.f64s(p.values.len())).collect::<Result<Vec<_>>>()?;
                Some(AdamState { config, t, m, v })
            }
            x => return Err(Error::Format(format!("bad optimizer flag {x}"))),
        };
        if r.pos != bytes.len() {
            return Err(Error::Format(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        Ok(Checkpoint {
            architecture,
            params,
            optimizer,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Format("truncated checkpoint".into()))?;
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

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n.checked_mul(8).ok_or_else(|| Error::Format("size overflow".into()))?)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }

    fn string(&mut self, n: usize) -> Result<String> {
        String::from_utf8(self.take(n)?.to_vec()).map_err(|e| Error::Format(e.to_string()))
    }
}
