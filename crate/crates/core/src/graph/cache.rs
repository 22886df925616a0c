//! Binary adjacency cache.
//!
//! Layout, all integers little-endian:
//! magic `SPEMBGR\0`, version `u32`, `n: u64`, `m: u64`, `n` degrees as `u32`,
//! `2m` neighbor ids as `u32` (per-node lists concatenated in id order), then
//! `n` names each as `u32` byte length + UTF-8 bytes.

use std::io::{Read, Write};

use super::Graph;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"SPEMBGR\0";
pub const CACHE_VERSION: u32 = 1;

pub fn write_cache<W: Write>(graph: &Graph, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&CACHE_VERSION.to_le_bytes())?;
    w.write_all(&(graph.n() as u64).to_le_bytes())?;
    w.write_all(&(graph.m() as u64).to_le_bytes())?;
    for i in 0..graph.n() {
        w.write_all(&(graph.degree(i) as u32).to_le_bytes())?;
    }
    for &j in graph.raw_neighbors() {
        w.write_all(&j.to_le_bytes())?;
    }
    for name in graph.names() {
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub fn read_cache<R: Read>(mut r: R) -> Result<Graph> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::BadCache("bad magic".into()));
    }
    let version = read_u32(&mut r)?;
    if version != CACHE_VERSION {
        return Err(Error::BadCache(format!("unsupported version {version}")));
    }
    let n = read_u64(&mut r)? as usize;
    let m = read_u64(&mut r)? as usize;
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0usize);
    for _ in 0..n {
        let d = read_u32(&mut r)? as usize;
        offsets.push(offsets.last().unwrap() + d);
    }
    if offsets[n] != 2 * m {
        return Err(Error::BadCache("degree sum does not equal 2m".into()));
    }
    let mut raw = vec![0u8; 8 * m];
    r.read_exact(&mut raw)?;
    let neighbors: Vec<u32> = raw
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    drop(raw);
    if neighbors.iter().any(|&j| j as usize >= n) {
        return Err(Error::BadCache("neighbor id out of range".into()));
    }
    let mut names = Vec::with_capacity(n);
    for _ in 0..n {
        let len = read_u32(&mut r)? as usize;
        let mut buf = vec![0u8; len];
        r.read_exact(&mut buf)?;
        names.push(String::from_utf8(buf).map_err(|_| Error::BadCache("name is not UTF-8".into()))?);
    }
    if names.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadCache("names not strictly ascending".into()));
    }
    Ok(Graph::from_raw_parts(names, offsets, neighbors))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_round_trip_is_bit_exact() {
        let g = Graph::from_id_pairs(6, [(0, 1), (1, 2), (2, 0), (3, 4)]);
        let mut a = Vec::new();
        write_cache(&g, &mut a).unwrap();
        let back = read_cache(a.as_slice()).unwrap();
        assert_eq!(back.names(), g.names());
        assert_eq!(back.degrees(), g.degrees());
        assert_eq!(back.edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
        let mut b = Vec::new();
        write_cache(&back, &mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_cache(&b"NOTACACHE..."[..]).is_err());
        let g = Graph::from_id_pairs(3, [(0, 1)]);
        let mut a = Vec::new();
        write_cache(&g, &mut a).unwrap();
        a[8] = 9;
        assert!(matches!(read_cache(a.as_slice()), Err(Error::BadCache(_))));
    }
}
