//! Sample chains and their binary on-disk format.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! "BISC"                      4 bytes
//! version                     u16 (currently 1)
//! height, width               u32, u32
//! sample_count                u64
//! trace_count                 u16
//! trace names                 trace_count x (u32 byte length + UTF-8)
//! samples                     sample_count * height * width f64
//! traces                      trace_count * sample_count f64, trace by trace
//! meta                        u32 byte length + UTF-8 JSON
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;

pub const CHAIN_MAGIC: [u8; 4] = *b"BISC";
pub const CHAIN_VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainMeta {
    pub seed: u64,
    pub sampler: String,
    pub burn_in: u64,
    pub thinning: u64,
    /// Free-form run details (operator id, resolved settings, ...).
    #[serde(default)]
    pub notes: BTreeMap<String, String>,
}

impl ChainMeta {
    pub fn new(sampler: impl Into<String>, seed: u64) -> Self {
        Self {
            seed,
            sampler: sampler.into(),
            burn_in: 0,
            thinning: 1,
            notes: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleChain {
    height: usize,
    width: usize,
    samples: Vec<Image>,
    traces: Vec<(String, Vec<f64>)>,
    pub meta: ChainMeta,
}

impl SampleChain {
    pub fn new(height: usize, width: usize, meta: ChainMeta) -> Self {
        assert!(height > 0 && width > 0, "chain image dimensions must be positive");
        Self {
            height,
            width,
            samples: Vec::new(),
            traces: Vec::new(),
            meta,
        }
    }

    /// Declares a scalar trace. Must be called before the first sample is pushed.
    pub fn with_trace(mut self, name: impl Into<String>) -> Self {
        assert!(self.samples.is_empty(), "traces must be declared on an empty chain");
        self.traces.push((name.into(), Vec::new()));
        self
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Image] {
        &self.samples
    }

    pub fn trace_names(&self) -> impl Iterator<Item = &str> {
        self.traces.iter().map(|(n, _)| n.as_str())
    }

    pub fn trace(&self, name: &str) -> Option<&[f64]> {
        self.traces
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    /// Appends a sample together with one value per declared trace, in
    /// declaration order.
    pub fn push(&mut self, sample: Image, trace_values: &[f64]) -> Result<()> {
        if sample.shape() != (self.height, self.width) {
            return Err(Error::param(format!(
                "sample shape {:?} does not match chain shape {:?}",
                sample.shape(),
                (self.height, self.width)
            )));
        }
        if trace_values.len() != self.traces.len() {
            return Err(Error::Dimension {
                what: "trace values per sample",
                expected: self.traces.len(),
                actual: trace_values.len(),
            });
        }
        for ((_, t), &v) in self.traces.iter_mut().zip(trace_values) {
            t.push(v);
        }
        self.samples.push(sample);
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let meta = serde_json::to_string(&self.meta)
            .map_err(|e| Error::Format(format!("meta serialization: {e}")))?;
        let d = self.height * self.width;
        let mut out = Vec::with_capacity(
            32 + 8 * self.samples.len() * (d + self.traces.len()) + meta.len(),
        );
        out.extend_from_slice(&CHAIN_MAGIC);
        out.extend_from_slice(&CHAIN_VERSION.to_le_bytes());
        out.extend_from_slice(&to_u32(self.height, "height")?.to_le_bytes());
        out.extend_from_slice(&to_u32(self.width, "width")?.to_le_bytes());
        out.extend_from_slice(&(self.samples.len() as u64).to_le_bytes());
        let trace_count = u16::try_from(self.traces.len())
            .map_err(|_| Error::param("too many traces for the chain format"))?;
        out.extend_from_slice(&trace_count.to_le_bytes());
        for (name, _) in &self.traces {
            write_str(&mut out, name)?;
        }
        for s in &self.samples {
            for v in s.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        for (_, t) in &self.traces {
            for v in t {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        write_str(&mut out, &meta)?;
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        let magic: [u8; 4] = r.take(4, "magic")?.try_into().unwrap();
        if magic != CHAIN_MAGIC {
            return Err(Error::Magic {
                expected: CHAIN_MAGIC,
                found: magic,
            });
        }
        let version = r.u16("version")?;
        if version != CHAIN_VERSION {
            return Err(Error::Version(version));
        }
        let height = r.u32("height")? as usize;
        let width = r.u32("width")? as usize;
        if height == 0 || width == 0 {
            return Err(Error::Format(format!(
                "chain image dimensions must be positive, got {height}x{width}"
            )));
        }
        let count = usize::try_from(r.u64("sample count")?)
            .map_err(|_| Error::Format("sample count overflows".into()))?;
        let trace_count = r.u16("trace count")? as usize;
        let mut names = Vec::with_capacity(trace_count);
        for _ in 0..trace_count {
            names.push(r.string("trace name")?);
        }
        let d = height * width;
        let payload = count
            .checked_mul(d + trace_count)
            .and_then(|n| n.checked_mul(8))
            .ok_or_else(|| Error::Format("sample payload size overflows".into()))?;
        if r.remaining() < payload {
            return Err(Error::Truncated(format!(
                "expected {payload} payload bytes, {} available",
                r.remaining()
            )));
        }
        let mut samples = Vec::with_capacity(count);
        for _ in 0..count {
            let data = r.f64s(d, "samples")?;
            samples.push(Image::new(height, width, data)?);
        }
        let mut traces = Vec::with_capacity(trace_count);
        for name in names {
            traces.push((name, r.f64s(count, "traces")?));
        }
        let meta_json = r.string("meta")?;
        let meta: ChainMeta = serde_json::from_str(&meta_json)
            .map_err(|e| Error::Format(format!("meta JSON: {e}")))?;
        if r.remaining() != 0 {
            return Err(Error::Format(format!(
                "{} trailing bytes after meta",
                r.remaining()
            )));
        }
        Ok(Self {
            height,
            width,
            samples,
            traces,
            meta,
        })
    }
}

fn to_u32(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::param(format!("{what} {v} exceeds u32")))
}

fn write_str(out: &mut Vec<u8>, s: &str) -> Result<()> {
    out.extend_from_slice(&to_u32(s.len(), "string length")?.to_le_bytes());
    out.extend_from_slice(s.as_bytes());
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.remaining() < n {
            return Err(Error::Truncated(format!(
                "{what}: need {n} bytes, {} available",
                self.remaining()
            )));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn string(&mut self, what: &str) -> Result<String> {
        let n = self.u32(what)? as usize;
        let raw = self.take(n, what)?;
        String::from_utf8(raw.to_vec()).map_err(|_| Error::Format(format!("{what}: invalid UTF-8")))
    }

    fn f64s(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        let raw = self.take(n * 8, what)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}
