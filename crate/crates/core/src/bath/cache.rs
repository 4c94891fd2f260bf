//! On-disk kernel-table cache.
//!
//! File layout (little endian): magic `QDKC`, format version (u32), 32-byte
//! SHA-256 key, memory depth (u64), dt (f64 bits), temperature (f64 bits),
//! pair count (u64), then per pair: ν, μ (u64 each), K values (re, im) and
//! residuals for lags 0..=depth; finally the per-state polaron shifts
//! (count as u64, then f64 values). Floats are stored as raw bits, so a cache
//! hit reproduces the computed table exactly.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use super::kernel::{compute_kernel_table, MemoryKernelTable, KERNEL_TOLERANCE};
use super::spectral::SpectralDensity;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"QDKC";
const VERSION: u32 = 1;

/// Content hash of everything that determines a kernel table.
pub fn cache_key(sd: &SpectralDensity, dt: f64, memory_depth: usize, temperature_k: f64) -> String {
    let mut h = Sha256::new();
    h.update(b"qdpath-kernel-table");
    h.update(VERSION.to_le_bytes());
    h.update(sd.fingerprint());
    h.update(dt.to_bits().to_le_bytes());
    h.update((memory_depth as u64).to_le_bytes());
    h.update(temperature_k.to_bits().to_le_bytes());
    h.update(KERNEL_TOLERANCE.to_bits().to_le_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn key_bytes(key: &str) -> Result<[u8; 32]> {
    if key.len() != 64 {
        return Err(Error::Config(format!("malformed cache key {key:?}")));
    }
    let mut out = [0u8; 32];
    for (i, chunk) in key.as_bytes().chunks(2).enumerate() {
        let s = std::str::from_utf8(chunk).map_err(|_| Error::Config("malformed cache key".into()))?;
        out[i] = u8::from_str_radix(s, 16).map_err(|_| Error::Config("malformed cache key".into()))?;
    }
    Ok(out)
}

pub fn encode(table: &MemoryKernelTable, key: &str) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&key_bytes(key)?);
    let u = |out: &mut Vec<u8>, v: u64| out.extend_from_slice(&v.to_le_bytes());
    let f = |out: &mut Vec<u8>, v: f64| out.extend_from_slice(&v.to_bits().to_le_bytes());
    u(&mut out, table.memory_depth() as u64);
    f(&mut out, table.dt());
    f(&mut out, table.temperature_k());
    u(&mut out, table.pairs().len() as u64);
    for ((&(a, b), row), res) in table.pairs().iter().zip(table.rows()).zip(table.residual_rows()) {
        u(&mut out, a as u64);
        u(&mut out, b as u64);
        for z in row {
            f(&mut out, z.re);
            f(&mut out, z.im);
        }
        for &r in res {
            f(&mut out, r);
        }
    }
    u(&mut out, table.polaron_shift_mev().len() as u64);
    for &s in table.polaron_shift_mev() {
        f(&mut out, s);
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Io("truncated kernel cache file".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }
}

/// Decodes a cache file into its key and table.
pub fn decode(bytes: &[u8]) -> Result<(String, MemoryKernelTable)> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::Io("not a kernel cache file".into()));
    }
    let version = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
    if version != VERSION {
        return Err(Error::Io(format!("unsupported kernel cache version {version}")));
    }
    let key: String = r.take(32)?.iter().map(|b| format!("{b:02x}")).collect();
    let depth = r.u64()? as usize;
    let dt = r.f64()?;
    let temperature = r.f64()?;
    let n_pairs = r.u64()? as usize;
    let mut pairs = Vec::with_capacity(n_pairs);
    let mut values = Vec::with_capacity(n_pairs);
    let mut residuals = Vec::with_capacity(n_pairs);
    for _ in 0..n_pairs {
        pairs.push((r.u64()? as usize, r.u64()? as usize));
        let mut row = Vec::with_capacity(depth + 1);
        for _ in 0..=depth {
            row.push(Complex64::new(r.f64()?, r.f64()?));
        }
        let mut res = Vec::with_capacity(depth + 1);
        for _ in 0..=depth {
            res.push(r.f64()?);
        }
        values.push(row);
        residuals.push(res);
    }
    let n_shift = r.u64()? as usize;
    let mut shifts = Vec::with_capacity(n_shift);
    for _ in 0..n_shift {
        shifts.push(r.f64()?);
    }
    if r.pos != bytes.len() {
        return Err(Error::Io("trailing bytes in kernel cache file".into()));
    }
    Ok((
        key,
        MemoryKernelTable::from_parts(depth, dt, temperature, pairs, values, residuals, shifts),
    ))
}

/// Directory of `<key>.qdkc` files.
#[derive(Clone, Debug)]
pub struct KernelCache {
    dir: PathBuf,
}

/// Outcome of [`KernelCache::load_or_compute`].
#[derive(Clone, Debug)]
pub struct CachedTable {
    pub table: MemoryKernelTable,
    pub key: String,
    pub hit: bool,
}

impl KernelCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.qdkc"))
    }

    pub fn load(&self, key: &str) -> Result<Option<MemoryKernelTable>> {
        let path = self.path_for(key);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Error::Io(format!("{}: {e}", path.display()))),
        };
        let (stored, table) = decode(&bytes)?;
        if stored != key {
            return Err(Error::Io(format!("{}: key mismatch", path.display())));
        }
        Ok(Some(table))
    }

    pub fn store(&self, key: &str, table: &MemoryKernelTable) -> Result<()> {
        fs::create_dir_all(&self.dir).map_err(|e| Error::Io(format!("{}: {e}", self.dir.display())))?;
        let path = self.path_for(key);
        static COUNTER: AtomicUsize = AtomicUsize::new(0);
        let unique = COUNTER.fetch_add(1, Ordering::Relaxed);
        let tmp = path.with_extension(format!("qdkc.{}.{unique}.tmp", std::process::id()));
        fs::write(&tmp, encode(table, key)?).map_err(|e| Error::Io(format!("{}: {e}", tmp.display())))?;
        fs::rename(&tmp, &path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    pub fn load_or_compute(
        &self,
        sd: &SpectralDensity,
        dt: f64,
        memory_depth: usize,
        temperature_k: f64,
    ) -> Result<CachedTable> {
        let key = cache_key(sd, dt, memory_depth, temperature_k);
        if let Some(table) = self.load(&key)? {
            return Ok(CachedTable { table, key, hit: true });
        }
        let table = compute_kernel_table(sd, dt, memory_depth, temperature_k)?;
        self.store(&key, &table)?;
        Ok(CachedTable { table, key, hit: false })
    }
}
