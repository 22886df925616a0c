//! Labeled synthetic graphs: a random null baseline, preferential attachment,
//! and a gravity-style growth model that plants group-level structure.
//!
//! The gravity model is one concrete instantiation chosen for testing; it is
//! not a fitted model of Internet growth.

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{GeoLabels, Graph};
use crate::rng::stream;

/// Distance floor in the gravity kernel.
pub const GRAVITY_DELTA: f64 = 0.01;

/// Erdős–Rényi `G(n, p)` by geometric skipping over the pair sequence.
pub fn gen_er(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::invalid("G(n, p) needs n >= 2"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("edge probability {p} outside [0, 1]")));
    }
    let n32 = u32::try_from(n).map_err(|_| Error::invalid("n too large"))?;
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    if p == 1.0 {
        for v in 1..n32 {
            pairs.extend((0..v).map(|w| (v, w)));
        }
    } else if p > 0.0 {
        let mut rng = stream(seed);
        let log_q = (1.0 - p).ln();
        let (mut v, mut w): (u64, i64) = (1, -1);
        let n = n as u64;
        pairs.reserve((p * (n * (n - 1) / 2) as f64 * 1.01) as usize);
        while v < n {
            let r: f64 = rng.gen();
            w += 1 + ((1.0 - r).ln() / log_q).floor() as i64;
            while w >= v as i64 && v < n {
                w -= v as i64;
                v += 1;
            }
            if v < n {
                pairs.push((v as u32, w as u32));
            }
        }
    }
    Ok(Graph::from_id_pairs(n, pairs))
}

/// Picks `want` distinct entries of `urn` (each entry weighted by multiplicity).
fn draw_distinct<R: Rng>(urn: &[u32], want: usize, rng: &mut R, out: &mut Vec<u32>) {
    out.clear();
    while out.len() < want {
        let cand = urn[rng.gen_range(0..urn.len())];
        if !out.contains(&cand) {
            out.push(cand);
        }
    }
}

/// Barabási–Albert growth from a seed clique of `m + 1` nodes; each arrival
/// links to `m` distinct nodes chosen proportionally to degree.
pub fn gen_pref_attach(n: usize, m: usize, seed: u64) -> Result<Graph> {
    if m < 1 || n <= m {
        return Err(Error::invalid(format!("need n > m >= 1, got n={n} m={m}")));
    }
    let mut rng = stream(seed);
    let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(m * n);
    let mut urn: Vec<u32> = Vec::with_capacity(2 * m * n);
    for a in 0..=m as u32 {
        for b in a + 1..=m as u32 {
            pairs.push((a, b));
            urn.push(a);
            urn.push(b);
        }
    }
    let mut picks = Vec::with_capacity(m);
    for v in (m + 1) as u32..n as u32 {
        draw_distinct(&urn, m, &mut rng, &mut picks);
        for &t in &picks {
            pairs.push((v, t));
            urn.push(v);
            urn.push(t);
        }
    }
    Ok(Graph::from_id_pairs(n, pairs))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GravityParams {
    pub n: usize,
    /// One point in the unit square per group.
    pub positions: Vec<(f64, f64)>,
    /// Edges each arriving node of group `g` attaches with.
    pub stubs: Vec<usize>,
    pub beta: f64,
    pub seed: u64,
}

impl GravityParams {
    /// Group positions drawn uniformly on the unit square from `seed`.
    pub fn with_random_positions(n: usize, stubs: Vec<usize>, beta: f64, seed: u64) -> Self {
        let mut rng = crate::rng::task_stream(seed, 1);
        let positions = (0..stubs.len()).map(|_| (rng.gen(), rng.gen())).collect();
        GravityParams {
            n,
            positions,
            stubs,
            beta,
            seed,
        }
    }

    pub fn groups(&self) -> usize {
        self.positions.len()
    }

    fn validate(&self) -> Result<()> {
        let g = self.groups();
        if g == 0 || self.n < g {
            return Err(Error::invalid("need n >= groups >= 1"));
        }
        if self.stubs.len() != g {
            return Err(Error::invalid("one stub count per group required"));
        }
        if self.stubs.iter().any(|&s| s == 0) {
            return Err(Error::invalid("stub counts must be >= 1"));
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::invalid("beta must be finite and >= 0"));
        }
        if self
            .positions
            .iter()
            .any(|&(x, y)| !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y))
        {
            return Err(Error::invalid("group positions must lie in the unit square"));
        }
        Ok(())
    }
}

/// Country label of group `g`.
pub fn group_label(g: usize) -> String {
    format!("G{g:03}")
}

fn quadrant((x, y): (f64, f64)) -> &'static str {
    match (x >= 0.5, y >= 0.5) {
        (false, false) => "Q1",
        (true, false) => "Q2",
        (false, true) => "Q3",
        (true, true) => "Q4",
    }
}

/// Gravity-style growth. Node `i` belongs to group `i mod G` and attaches
/// `stubs[g]` edges (fewer while the graph is small) to distinct earlier nodes
/// `j`, chosen with probability proportional to
/// `(k_j + 1) * (d(g_i, g_j) + δ)^(-beta)`, where `d` is the Euclidean distance
/// between group positions. Labels: country = group, region = quadrant of the
/// group's position.
pub fn gen_spatial_gravity(params: &GravityParams) -> Result<(Graph, GeoLabels)> {
    params.validate()?;
    let g_count = params.groups();
    let kernel: Vec<Vec<f64>> = params
        .positions
        .iter()
        .map(|&(x1, y1)| {
            params
                .positions
                .iter()
                .map(|&(x2, y2)| {
                    let d = ((x1 - x2).powi(2) + (y1 - y2).powi(2)).sqrt();
                    (d + GRAVITY_DELTA).powf(-params.beta)
                })
                .collect()
        })
        .collect();

    let mut rng = stream(params.seed);
    // Per group: every member once, plus once per incident edge end, so a
    // uniform draw is proportional to k + 1.
    let mut urns: Vec<Vec<u32>> = vec![Vec::new(); g_count];
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    let mut picks: Vec<u32> = Vec::new();
    let mut held: Vec<usize> = vec![0; g_count];
    let mut weights = vec![0.0; g_count];
    let mut multiplicity = vec![0usize; params.n];

    for v in 0..params.n {
        let g = v % g_count;
        let want = params.stubs[g].min(v);
        picks.clear();
        held.iter_mut().for_each(|h| *h = 0);
        while picks.len() < want {
            for h in 0..g_count {
                weights[h] = kernel[g][h] * (urns[h].len() - held[h]) as f64;
            }
            let total: f64 = weights.iter().sum();
            let mut x = rng.gen::<f64>() * total;
            let mut h = 0;
            while h + 1 < g_count && (x >= weights[h] || weights[h] == 0.0) {
                x -= weights[h];
                h += 1;
            }
            while weights[h] == 0.0 {
                h -= 1;
            }
            let target = loop {
                let c = urns[h][rng.gen_range(0..urns[h].len())];
                if !picks.contains(&c) {
                    break c;
                }
            };
            held[h] += multiplicity[target as usize];
            picks.push(target);
        }
        urns[g].push(v as u32);
        multiplicity[v] += 1;
        for &t in &picks {
            pairs.push((v as u32, t));
            urns[(t as usize) % g_count].push(t);
            multiplicity[t as usize] += 1;
            urns[g].push(v as u32);
            multiplicity[v] += 1;
        }
    }

    let graph = Graph::from_id_pairs(params.n, pairs);
    let mut labels = GeoLabels::unlabeled(params.n);
    for v in 0..params.n {
        let g = v % g_count;
        labels.set(
            v,
            Some(group_label(g)),
            Some(quadrant(params.positions[g]).to_string()),
        );
    }
    Ok((graph, labels))
}

/// Country-only labels for disjoint random groups of the given sizes; every
/// other node stays unlabeled.
pub fn random_group_labels(n: usize, sizes: &[usize], seed: u64) -> Result<GeoLabels> {
    let total: usize = sizes.iter().sum();
    if total > n {
        return Err(Error::invalid(format!("groups need {total} nodes, graph has {n}")));
    }
    let mut rng = stream(seed);
    let chosen = index::sample(&mut rng, n, total).into_vec();
    let mut labels = GeoLabels::unlabeled(n);
    let mut it = chosen.into_iter();
    for (g, &size) in sizes.iter().enumerate() {
        for id in it.by_ref().take(size) {
            labels.set(id, Some(group_label(g)), None);
        }
    }
    Ok(labels)
}
