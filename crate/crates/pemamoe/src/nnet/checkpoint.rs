//! Binary checkpoint format for `ParamStore`.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "PMOE"
//! 4       4     version: u32 (currently 1)
//! 8       4     entry count: u32
//! --- per entry, in registration order ---
//!         2     name length: u16
//!         n     name bytes (UTF-8)
//!         1     group code: u8 (0 router, 1 expert, 2 head, 3 logstd, 4 critic)
//!         2     expert index: u16 (0 unless group code is 1)
//!         1     rank: u8
//!         4*r   dims: u32 each
//! --- after the table ---
//!         8*k   all values: f64 little-endian, entries concatenated in
//!               table order
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::params::{ParamGroup, ParamStore};
use crate::error::NnetError;

const MAGIC: &[u8; 4] = b"PMOE";
const VERSION: u32 = 1;

fn group_code(g: ParamGroup) -> (u8, u16) {
    match g {
        ParamGroup::Router => (0, 0),
        ParamGroup::Expert(j) => (1, j as u16),
        ParamGroup::Head => (2, 0),
        ParamGroup::LogStd => (3, 0),
        ParamGroup::Critic => (4, 0),
    }
}

fn group_from(code: u8, idx: u16) -> Result<ParamGroup, NnetError> {
    Ok(match code {
        0 => ParamGroup::Router,
        1 => ParamGroup::Expert(idx as usize),
        2 => ParamGroup::Head,
        3 => ParamGroup::LogStd,
        4 => ParamGroup::Critic,
        other => return Err(NnetError::BadCheckpoint(format!("unknown group code {other}"))),
    })
}

/// Write every parameter to `path`.
pub fn save(store: &ParamStore, path: &Path) -> Result<(), NnetError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(store.entries().len() as u32).to_le_bytes())?;
    for e in store.entries() {
        let name = e.name.as_bytes();
        w.write_all(&(name.len() as u16).to_le_bytes())?;
        w.write_all(name)?;
        let (code, idx) = group_code(e.group);
        w.write_all(&[code])?;
        w.write_all(&idx.to_le_bytes())?;
        w.write_all(&[e.shape.len() as u8])?;
        for d in &e.shape {
            w.write_all(&(*d as u32).to_le_bytes())?;
        }
    }
    for v in store.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_exact<const N: usize>(r: &mut impl Read) -> Result<[u8; N], NnetError> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

/// Load a checkpoint written by [`save`], rebuilding the full store.
pub fn load(path: &Path) -> Result<ParamStore, NnetError> {
    let mut r = BufReader::new(File::open(path)?);
    if &read_exact::<4>(&mut r)? != MAGIC {
        return Err(NnetError::BadCheckpoint("bad magic".into()));
    }
    let version = u32::from_le_bytes(read_exact::<4>(&mut r)?);
    if version != VERSION {
        return Err(NnetError::BadCheckpoint(format!("unsupported version {version}")));
    }
    let n = u32::from_le_bytes(read_exact::<4>(&mut r)?) as usize;
    let mut table = Vec::with_capacity(n);
    for _ in 0..n {
        let name_len = u16::from_le_bytes(read_exact::<2>(&mut r)?) as usize;
        let mut name = vec![0u8; name_len];
        r.read_exact(&mut name)?;
        let name = String::from_utf8(name)
            .map_err(|_| NnetError::BadCheckpoint("non-utf8 name".into()))?;
        let code = read_exact::<1>(&mut r)?[0];
        let idx = u16::from_le_bytes(read_exact::<2>(&mut r)?);
        let group = group_from(code, idx)?;
        let rank = read_exact::<1>(&mut r)?[0] as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(u32::from_le_bytes(read_exact::<4>(&mut r)?) as usize);
        }
        table.push((name, group, shape));
    }
    let mut store = ParamStore::new();
    for (name, group, shape) in table {
        let len: usize = shape.iter().product();
        let mut values = Vec::with_capacity(len);
        for _ in 0..len {
            values.push(f64::from_le_bytes(read_exact::<8>(&mut r)?));
        }
        store.register(&name, &shape, group, values)?;
    }
    Ok(store)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn checkpoint_round_trips_bitwise() {
        let mut store = ParamStore::new();
        store
            .register("actor.router.w", &[3, 5], ParamGroup::Router, (0..15).map(|i| i as f64 * 0.77 - 3.1).collect())
            .unwrap();
        store
            .register("actor.expert1.w1", &[2, 5], ParamGroup::Expert(1), (0..10).map(|i| (i as f64).sin()).collect())
            .unwrap();
        store.register("actor.logstd", &[2], ParamGroup::LogStd, vec![0.3, 0.3]).unwrap();

        let dir = tempdir().unwrap();
        let path = dir.path().join("test.ckpt");
        save(&store, &path).unwrap();
        let loaded = load(&path).unwrap();
        assert_eq!(loaded.data(), store.data());
        assert_eq!(loaded.entries().len(), store.entries().len());
        for (a, b) in loaded.entries().iter().zip(store.entries()) {
            assert_eq!(a.name, b.name);
            assert_eq!(a.shape, b.shape);
            assert_eq!(a.group, b.group);
            assert_eq!(a.offset, b.offset);
        }
    }

    #[test]
    fn load_rejects_garbage() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.ckpt");
        std::fs::write(&path, b"not a checkpoint").unwrap();
        assert!(load(&path).is_err());
    }
}
