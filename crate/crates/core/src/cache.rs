//! On-disk cache of half-sum tables.
//!
//! Layout, all integers and floats little-endian:
//!
//! | offset | size      | field                               |
//! |--------|-----------|-------------------------------------|
//! | 0      | 4         | magic `BCHS`                        |
//! | 4      | 4         | format version (`u32`, currently 1) |
//! | 8      | 8         | `λ` as binary64                     |
//! | 16     | 4         | depth `L` (`u32`)                   |
//! | 20     | 8         | entry count (`u64`) = `2^{L/2}`     |
//! | 28     | 8 · count | half sums, ascending binary64       |
//! | end    | 32        | SHA-256 of all preceding bytes      |

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::digits::HalfSumTable;
use crate::error::{Error, Result};
use crate::lambda::Lambda;

pub const MAGIC: &[u8; 4] = b"BCHS";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 28;
pub const DIGEST_LEN: usize = 32;
/// Environment variable overriding the default cache directory.
pub const CACHE_DIR_ENV: &str = "BERNCONV_CACHE_DIR";

/// `BERNCONV_CACHE_DIR` if set, otherwise `./.bernconv-cache`.
pub fn default_cache_dir() -> PathBuf {
    std::env::var_os(CACHE_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(".bernconv-cache"))
}

/// File name keyed by the exact bit pattern of `λ`.
pub fn cache_file_name(lambda: Lambda, depth: u32) -> String {
    format!("bchs-{:016x}-L{depth}.bin", lambda.get().to_bits())
}

pub fn encode_header(lambda: Lambda, depth: u32, count: u64) -> [u8; HEADER_LEN] {
    let mut h = [0u8; HEADER_LEN];
    h[0..4].copy_from_slice(MAGIC);
    h[4..8].copy_from_slice(&VERSION.to_le_bytes());
    h[8..16].copy_from_slice(&lambda.get().to_le_bytes());
    h[16..20].copy_from_slice(&depth.to_le_bytes());
    h[20..28].copy_from_slice(&count.to_le_bytes());
    h
}

pub fn write_table<W: Write>(table: &HalfSumTable, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    let mut hasher = Sha256::new();
    let header = encode_header(table.lambda(), table.depth(), table.halves().len() as u64);
    hasher.update(header);
    out.write_all(&header)?;
    for chunk in table.halves().chunks(1 << 14) {
        let bytes: Vec<u8> = chunk.iter().flat_map(|v| v.to_le_bytes()).collect();
        hasher.update(&bytes);
        out.write_all(&bytes)?;
    }
    out.write_all(&hasher.finalize())?;
    out.flush()?;
    Ok(())
}

/// Reads and validates a table. `eta` is not part of the file.
pub fn read_table<R: Read>(input: R, eta: f64) -> Result<HalfSumTable> {
    let mut input = BufReader::new(input);
    let mut header = [0u8; HEADER_LEN];
    input
        .read_exact(&mut header)
        .map_err(|e| Error::Integrity(format!("truncated header: {e}")))?;
    if &header[0..4] != MAGIC {
        return Err(Error::Integrity("bad magic".into()));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Integrity(format!("unsupported format version {version}")));
    }
    let lambda = f64::from_le_bytes(header[8..16].try_into().unwrap());
    let depth = u32::from_le_bytes(header[16..20].try_into().unwrap());
    let count = u64::from_le_bytes(header[20..28].try_into().unwrap());
    let lambda = Lambda::new(lambda).map_err(|_| Error::Integrity(format!("stored λ {lambda} is invalid")))?;
    if depth % 2 != 0 || !(2..=64).contains(&depth) || count != 1u64 << (depth / 2) {
        return Err(Error::Integrity(format!("count {count} does not match depth {depth}")));
    }
    let mut hasher = Sha256::new();
    hasher.update(header);
    let mut halves = Vec::new();
    halves
        .try_reserve_exact(count as usize)
        .map_err(|_| Error::Resource(format!("cannot allocate {} bytes", 8 * count)))?;
    let mut buf = vec![0u8; 8 << 14];
    let mut remaining = count as usize;
    while remaining > 0 {
        let n = remaining.min(1 << 14);
        let bytes = &mut buf[..8 * n];
        input
            .read_exact(bytes)
            .map_err(|e| Error::Integrity(format!("truncated payload: {e}")))?;
        hasher.update(&*bytes);
        halves.extend(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())));
        remaining -= n;
    }
    let mut digest = [0u8; DIGEST_LEN];
    input
        .read_exact(&mut digest)
        .map_err(|e| Error::Integrity(format!("missing digest: {e}")))?;
    if digest[..] != hasher.finalize()[..] {
        return Err(Error::Integrity("digest mismatch".into()));
    }
    let mut extra = [0u8; 1];
    if input.read(&mut extra)? != 0 {
        return Err(Error::Integrity("trailing bytes after digest".into()));
    }
    HalfSumTable::from_parts(lambda, depth, halves, eta)
}

/// A directory of cached tables.
#[derive(Debug, Clone)]
pub struct TableCache {
    dir: PathBuf,
}

impl TableCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        TableCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, lambda: Lambda, depth: u32) -> PathBuf {
        self.dir.join(cache_file_name(lambda, depth))
    }

    /// Writes atomically through a temporary file in the same directory.
    pub fn store(&self, table: &HalfSumTable) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path_for(table.lambda(), table.depth());
        let tmp = path.with_extension("tmp");
        write_table(table, File::create(&tmp)?)?;
        fs::rename(&tmp, &path)?;
        Ok(path)
    }

    /// `Ok(None)` if no file exists; an error if the file exists but is invalid
    /// or belongs to a different `(λ, L)`.
    pub fn load(&self, lambda: Lambda, depth: u32, eta: f64) -> Result<Option<HalfSumTable>> {
        let path = self.path_for(lambda, depth);
        let file = match File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let table = read_table(file, eta)?;
        if table.lambda().get().to_bits() != lambda.get().to_bits() || table.depth() != depth {
            return Err(Error::Integrity(format!(
                "{} holds λ = {}, L = {}",
                path.display(),
                table.lambda(),
                table.depth()
            )));
        }
        Ok(Some(table))
    }

    /// Loads the table, building and storing it on a miss.
    pub fn load_or_build(
        &self,
        lambda: Lambda,
        depth: u32,
        eta: f64,
        opts: crate::digits::TableOptions,
    ) -> Result<(HalfSumTable, bool)> {
        if let Some(t) = self.load(lambda, depth, eta)? {
            return Ok((t, true));
        }
        let t = HalfSumTable::build_with(lambda, depth, eta, opts)?;
        self.store(&t)?;
        Ok((t, false))
    }
}
