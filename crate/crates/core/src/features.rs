//! Per-node local degree statistics.
//!
//! For node `i` with degree `k_i` and neighbors `j`:
//!
//! * average neighbor degree `(1/k_i) Σ_j k_j`
//! * local neighbor degree variance `(1/(k_i-1)) Σ_j (k_j - <k>)^2`, taken
//!   around the global mean degree `<k>`
//! * local neighbor degree correlation `(1/(σ_k^2 k_i)) Σ_j (k_i - <k>)(k_j - <k>)`
//!
//! Degenerate rows: `k_i = 0` gives all zeros, `k_i = 1` gives variance 0,
//! and `σ_k = 0` gives correlation 0.

use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fmt::f9;
use crate::graph::Graph;
use crate::scalar::Scalar;

/// Conventions used for rows the formulas leave undefined.
pub const DEGENERATE_CONVENTIONS: &str =
    "k=0 -> (0,0,0,0); k=1 -> local_var=0; degree_std=0 -> local_corr=0";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalDegreeStats<T> {
    pub mean_degree: T,
    /// Sample standard deviation, `n - 1` normalization.
    pub degree_std: T,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeFeatures<T> {
    pub k: usize,
    pub avg_nbr_deg: T,
    pub local_var: T,
    pub local_corr: T,
}

impl<T: Scalar> NodeFeatures<T> {
    pub fn to_array(&self) -> [T; 4] {
        [T::from_count(self.k), self.avg_nbr_deg, self.local_var, self.local_corr]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable<T> {
    pub rows: Vec<NodeFeatures<T>>,
    pub stats: GlobalDegreeStats<T>,
}

impl<T: Scalar> FeatureTable<T> {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn vectors(&self) -> Vec<[T; 4]> {
        self.rows.iter().map(NodeFeatures::to_array).collect()
    }
}

pub fn global_degree_stats<T: Scalar>(graph: &Graph) -> Result<GlobalDegreeStats<T>> {
    let n = graph.n();
    if n < 2 {
        return Err(Error::TooFewNodes { needed: 2, got: n });
    }
    let nf = T::from_count(n);
    let mean = T::from_count(2 * graph.m()) / nf;
    let ss: T = (0..n)
        .map(|i| {
            let d = T::from_count(graph.degree(i)) - mean;
            d * d
        })
        .sum();
    Ok(GlobalDegreeStats {
        mean_degree: mean,
        degree_std: (ss / (nf - T::one())).sqrt(),
        n,
    })
}

pub fn node_feature_vector<T: Scalar>(
    graph: &Graph,
    stats: &GlobalDegreeStats<T>,
    id: usize,
) -> NodeFeatures<T> {
    let k = graph.degree(id);
    if k == 0 {
        return NodeFeatures {
            k,
            avg_nbr_deg: T::zero(),
            local_var: T::zero(),
            local_corr: T::zero(),
        };
    }
    let mean = stats.mean_degree;
    let mut sum_k = T::zero();
    let mut sum_dev = T::zero();
    let mut sum_sq = T::zero();
    for &j in graph.neighbors(id) {
        let kj = T::from_count(graph.degree(j as usize));
        let dev = kj - mean;
        sum_k = sum_k + kj;
        sum_dev = sum_dev + dev;
        sum_sq = sum_sq + dev * dev;
    }
    let kf = T::from_count(k);
    let local_var = if k == 1 {
        T::zero()
    } else {
        sum_sq / (kf - T::one())
    };
    let var_k = stats.degree_std * stats.degree_std;
    let local_corr = if var_k == T::zero() {
        T::zero()
    } else {
        (kf - mean) * sum_dev / (var_k * kf)
    };
    NodeFeatures {
        k,
        avg_nbr_deg: sum_k / kf,
        local_var,
        local_corr,
    }
}

/// Features for every node, computed in parallel; output does not depend on scheduling.
pub fn compute_all_features<T: Scalar>(graph: &Graph) -> Result<FeatureTable<T>> {
    let stats = global_degree_stats(graph)?;
    let rows = (0..graph.n())
        .into_par_iter()
        .map(|i| node_feature_vector(graph, &stats, i))
        .collect();
    Ok(FeatureTable { rows, stats })
}

/// Writes `node<TAB>k<TAB>avg_nbr_deg<TAB>local_var<TAB>local_corr` rows in id
/// (= name) order, preceded by `#` metadata lines.
pub fn write_features_tsv<T: Scalar, W: Write>(
    graph: &Graph,
    table: &FeatureTable<T>,
    mut w: W,
) -> Result<()> {
    let s = &table.stats;
    writeln!(
        w,
        "# mean_degree={}\tdegree_std={}\tn={}",
        f9(s.mean_degree.as_f64()),
        f9(s.degree_std.as_f64()),
        s.n
    )?;
    writeln!(w, "# conventions: {DEGENERATE_CONVENTIONS}")?;
    writeln!(w, "#node\tk\tavg_nbr_deg\tlocal_var\tlocal_corr")?;
    for (id, row) in table.rows.iter().enumerate() {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}",
            graph.name(id),
            row.k,
            f9(row.avg_nbr_deg.as_f64()),
            f9(row.local_var.as_f64()),
            f9(row.local_corr.as_f64())
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a features TSV back as `(names, table)`.
pub fn read_features_tsv<T: Scalar, R: BufRead>(reader: R) -> Result<(Vec<String>, FeatureTable<T>)> {
    let mut names = Vec::new();
    let mut rows = Vec::new();
    let mut stats: Option<GlobalDegreeStats<T>> = None;
    let parse_err = |line: usize, msg: &str| Error::Parse {
        line,
        msg: msg.to_string(),
    };
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if let Some(meta) = line.strip_prefix("# mean_degree=") {
            let mut it = meta.split('\t');
            let mean = it.next().and_then(|v| v.parse::<f64>().ok());
            let std = it
                .next()
                .and_then(|v| v.strip_prefix("degree_std="))
                .and_then(|v| v.parse::<f64>().ok());
            let n = it
                .next()
                .and_then(|v| v.strip_prefix("n="))
                .and_then(|v| v.parse::<usize>().ok());
            match (mean, std, n) {
                (Some(mean), Some(std), Some(n)) => {
                    stats = Some(GlobalDegreeStats {
                        mean_degree: T::lit(mean),
                        degree_std: T::lit(std),
                        n,
                    })
                }
                _ => return Err(parse_err(lineno, "bad degree statistics line")),
            }
            continue;
        }
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 5 {
            return Err(parse_err(lineno, "expected 5 columns"));
        }
        let k: usize = f[1].parse().map_err(|_| parse_err(lineno, "bad degree"))?;
        let mut vals = [T::zero(); 3];
        for (v, s) in vals.iter_mut().zip(&f[2..]) {
            *v = T::lit(s.parse::<f64>().map_err(|_| parse_err(lineno, "bad float"))?);
        }
        names.push(f[0].to_string());
        rows.push(NodeFeatures {
            k,
            avg_nbr_deg: vals[0],
            local_var: vals[1],
            local_corr: vals[2],
        });
    }
    let stats = stats.ok_or_else(|| parse_err(0, "missing degree statistics header"))?;
    if stats.n != rows.len() {
        return Err(parse_err(0, "row count does not match header n"));
    }
    Ok((names, FeatureTable { rows, stats }))
}
