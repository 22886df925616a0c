//! Topology ingestion: link records and geolocation labels into an immutable
//! simple undirected graph with contiguous ids.

mod cache;
mod geo;
mod parse;

use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};

pub use cache::{read_cache, write_cache, CACHE_VERSION};
pub use geo::{parse_geo, write_geo_tsv, GeoLabels, GeoRecord, GeoRecords, GeoTallies, Level};
pub use parse::{parse_edge_tsv, parse_links};

/// Counters collected while parsing and building.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub lines: usize,
    pub records: usize,
    pub malformed_lines: usize,
    pub self_pairs_dropped: usize,
    pub duplicate_pairs_dropped: usize,
}

/// Unordered name pairs as parsed, before deduplication.
///
/// Names are interned on insertion; pairs refer to the interned ids.
#[derive(Debug, Default, Clone)]
pub struct EdgeList {
    names: Vec<String>,
    index: HashMap<String, u32>,
    pairs: Vec<(u32, u32)>,
    pub report: IngestReport,
}

impl EdgeList {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a node name without any incident pair.
    pub fn add_node(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = u32::try_from(self.names.len()).expect("more than u32::MAX nodes");
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), id);
        id
    }

    /// Adds the unordered pair `{a, b}`. Self-pairs are counted and dropped.
    pub fn add_pair(&mut self, a: &str, b: &str) {
        let ia = self.add_node(a);
        let ib = self.add_node(b);
        self.push_ids(ia, ib);
    }

    fn push_ids(&mut self, a: u32, b: u32) {
        if a == b {
            self.report.self_pairs_dropped += 1;
        } else {
            self.pairs.push((a, b));
        }
    }

    /// Adds all `C(r, 2)` pairs among `members` (clique expansion).
    pub fn add_clique<S: AsRef<str>>(&mut self, members: &[S]) {
        let ids: Vec<u32> = members.iter().map(|m| self.add_node(m.as_ref())).collect();
        for (x, &a) in ids.iter().enumerate() {
            for &b in &ids[x + 1..] {
                self.push_ids(a, b);
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    /// Number of pairs held, duplicates included.
    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn node_names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.pairs
            .iter()
            .map(|&(a, b)| (self.names[a as usize].as_str(), self.names[b as usize].as_str()))
    }

    /// Appends another list, e.g. one parsed from a separate stream.
    pub fn merge(&mut self, other: EdgeList) {
        let remap: Vec<u32> = other.names.iter().map(|n| self.add_node(n)).collect();
        self.pairs.extend(
            other
                .pairs
                .iter()
                .map(|&(a, b)| (remap[a as usize], remap[b as usize])),
        );
        let r = &mut self.report;
        r.lines += other.report.lines;
        r.records += other.report.records;
        r.malformed_lines += other.report.malformed_lines;
        r.self_pairs_dropped += other.report.self_pairs_dropped;
        r.duplicate_pairs_dropped += other.report.duplicate_pairs_dropped;
    }
}

/// Immutable simple undirected graph in compressed adjacency form.
///
/// Node ids are `0..n` in lexicographic order of the external names, and every
/// adjacency list is sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    names: Vec<String>,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    pub report: IngestReport,
}

/// Finalizes an [`EdgeList`]: assigns ids, drops duplicate pairs, fills adjacency.
pub fn build_graph(list: EdgeList) -> Result<Graph> {
    if list.pairs.is_empty() {
        return Err(Error::EmptyEdgeList);
    }
    let EdgeList {
        names,
        index: _,
        pairs,
        mut report,
    } = list;

    let mut order: Vec<u32> = (0..names.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| names[a as usize].cmp(&names[b as usize]));
    let mut rank = vec![0u32; names.len()];
    for (new, &old) in order.iter().enumerate() {
        rank[old as usize] = new as u32;
    }

    let mut keys: Vec<u64> = pairs
        .iter()
        .map(|&(a, b)| {
            let (a, b) = (rank[a as usize], rank[b as usize]);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            (u64::from(lo) << 32) | u64::from(hi)
        })
        .collect();
    drop(pairs);
    keys.sort_unstable();
    let before = keys.len();
    keys.dedup();
    report.duplicate_pairs_dropped += before - keys.len();

    let mut sorted_names: Vec<Option<String>> = names.into_iter().map(Some).collect();
    let names: Vec<String> = order
        .iter()
        .map(|&old| sorted_names[old as usize].take().expect("each name moved once"))
        .collect();

    Ok(Graph::from_sorted_keys(names, &keys, report))
}

impl Graph {
    /// Builds from deduplicated, ascending `(lo << 32) | hi` keys with `lo < hi`.
    fn from_sorted_keys(names: Vec<String>, keys: &[u64], report: IngestReport) -> Self {
        let n = names.len();
        let mut degree = vec![0usize; n];
        for &k in keys {
            degree[(k >> 32) as usize] += 1;
            degree[(k & 0xffff_ffff) as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut acc = 0;
        for d in &degree {
            acc += d;
            offsets.push(acc);
        }
        drop(degree);
        let mut cursor = offsets[..n].to_vec();
        let mut neighbors = vec![0u32; acc];
        // Keys ascend by (lo, hi), so both endpoints' lists fill in ascending order.
        for &k in keys {
            let (lo, hi) = ((k >> 32) as usize, (k & 0xffff_ffff) as usize);
            neighbors[cursor[lo]] = hi as u32;
            cursor[lo] += 1;
            neighbors[cursor[hi]] = lo as u32;
            cursor[hi] += 1;
        }
        Graph {
            names,
            offsets,
            neighbors,
            report,
        }
    }

    /// Graph over nodes `0..n` from arbitrary id pairs; self-pairs and repeats are dropped.
    ///
    /// Nodes are named `N` plus the zero-padded id, so lexicographic and numeric
    /// order agree and a TSV round trip preserves ids.
    pub fn from_id_pairs(n: usize, pairs: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let width = n.saturating_sub(1).to_string().len();
        let names = (0..n).map(|i| format!("N{:0width$}", i)).collect();
        let mut report = IngestReport::default();
        let mut keys: Vec<u64> = pairs
            .into_iter()
            .filter_map(|(a, b)| {
                assert!((a as usize) < n && (b as usize) < n, "node id out of range");
                if a == b {
                    report.self_pairs_dropped += 1;
                    return None;
                }
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                Some((u64::from(lo) << 32) | u64::from(hi))
            })
            .collect();
        keys.sort_unstable();
        let before = keys.len();
        keys.dedup();
        report.duplicate_pairs_dropped = before - keys.len();
        Self::from_sorted_keys(names, &keys, report)
    }

    pub(crate) fn from_raw_parts(
        names: Vec<String>,
        offsets: Vec<usize>,
        neighbors: Vec<u32>,
    ) -> Self {
        Graph {
            names,
            offsets,
            neighbors,
            report: IngestReport::default(),
        }
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn m(&self) -> usize {
        self.neighbors.len() / 2
    }

    #[inline]
    pub fn degree(&self, id: usize) -> usize {
        self.offsets[id + 1] - self.offsets[id]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n()).map(|i| self.degree(i)).collect()
    }

    #[inline]
    pub fn neighbors(&self, id: usize) -> &[u32] {
        &self.neighbors[self.offsets[id]..self.offsets[id + 1]]
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Internal id of an external name.
    pub fn id_of(&self, name: &str) -> Option<usize> {
        self.names.binary_search_by(|n| n.as_str().cmp(name)).ok()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.neighbors(a).binary_search(&(b as u32)).is_ok()
    }

    pub fn isolated_count(&self) -> usize {
        (0..self.n()).filter(|&i| self.degree(i) == 0).count()
    }

    /// Each edge once as `(lo, hi)`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .map(|&j| j as usize)
                .filter(move |&j| j > i)
                .map(move |j| (i, j))
        })
    }

    pub(crate) fn raw_neighbors(&self) -> &[u32] {
        &self.neighbors
    }
}

/// Canonical edge list: `name_a<TAB>name_b`, `name_a < name_b`, sorted.
pub fn write_edge_tsv<W: Write>(graph: &Graph, mut w: W) -> Result<()> {
    for (a, b) in graph.edges() {
        writeln!(w, "{}\t{}", graph.name(a), graph.name(b))?;
    }
    w.flush()?;
    Ok(())
}
