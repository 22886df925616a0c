//! Random-set null model, power-law fit of its spread, and per-group Z-scores.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::feature_space::{distance, EmbeddedPoint, MeanDistanceResult};
use crate::fmt::{f17, f9};
use crate::graph::Level;
use crate::rng::task_stream;
use crate::scalar::Scalar;

/// Two-sided significance cutoff on `|z|` (strict).
pub const Z_THRESHOLD: f64 = 2.0;
pub const HISTOGRAM_CLAMP: i32 = 20;

const NULL_STREAM_DOMAIN: u64 = 1 << 63;

/// How the spread of a set size's null distribution is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NullStatistic {
    /// Sample std of the `R` per-set mean distances.
    #[default]
    SetMeans,
    /// Std of all pair distances pooled over the `R` sets.
    PooledPairs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullSamplingConfig {
    pub set_sizes: Vec<usize>,
    pub sets_per_size: usize,
    pub pair_budget: u64,
    pub seed: u64,
    pub statistic: NullStatistic,
}

impl Default for NullSamplingConfig {
    fn default() -> Self {
        NullSamplingConfig {
            set_sizes: vec![10, 20, 50, 100, 200, 500],
            sets_per_size: 100,
            pair_budget: crate::feature_space::DEFAULT_PAIR_BUDGET,
            seed: 1,
            statistic: NullStatistic::SetMeans,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullRecord<T> {
    pub set_size: usize,
    pub mean: T,
    pub std: T,
    pub sets: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullSamples<T> {
    pub records: Vec<NullRecord<T>>,
}

/// `σ_r(N) = a · N^(-alpha)` around the stable mean `mu_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct NullModel<T> {
    pub mu_r: T,
    pub a: T,
    pub alpha: T,
    /// RMS of the log-space residuals of the fitted points.
    pub fit_residual: T,
    pub samples: NullSamples<T>,
}

impl<T: Scalar> NullModel<T> {
    pub fn sigma(&self, n: usize) -> T {
        self.a * T::from_count(n).powf(-self.alpha)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupTestResult<T> {
    pub level: Level,
    pub group: String,
    pub n_nodes: usize,
    pub mu_data: T,
    pub z: T,
    pub p_value: T,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignificanceSummary {
    pub groups: usize,
    pub significant: usize,
    pub below: usize,
    pub above: usize,
    /// `(low, high, count)` with unit-width bins over `[-20, 20)`; values
    /// outside are clamped into the end bins.
    pub histogram: Vec<(i32, i32, usize)>,
}

/// Sum, sum of squares and count of pair distances.
struct PairMoments<T> {
    sum: T,
    sum_sq: T,
    count: u64,
}

fn pair_moments<T: Scalar, R: Rng + ?Sized>(
    points: &[EmbeddedPoint<T>],
    pair_budget: u64,
    rng: &mut R,
    need_squares: bool,
) -> Result<PairMoments<T>> {
    if !need_squares {
        let r = crate::feature_space::mean_pairwise_distance(points, pair_budget, rng)?;
        return Ok(PairMoments {
            sum: r.mean * T::lit(r.pair_count_used as f64),
            sum_sq: T::zero(),
            count: r.pair_count_used,
        });
    }
    let n = points.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let total = n as u64 * (n as u64 - 1) / 2;
    let mut sum = T::zero();
    let mut sum_sq = T::zero();
    if total <= pair_budget {
        for i in 0..n - 1 {
            for q in &points[i + 1..] {
                let d = distance(&points[i], q);
                sum = sum + d;
                sum_sq = sum_sq + d * d;
            }
        }
        return Ok(PairMoments {
            sum,
            sum_sq,
            count: total,
        });
    }
    for _ in 0..pair_budget {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let d = distance(&points[i], &points[j]);
        sum = sum + d;
        sum_sq = sum_sq + d * d;
    }
    Ok(PairMoments {
        sum,
        sum_sq,
        count: pair_budget,
    })
}

fn mean_and_sample_std<T: Scalar>(xs: &[T]) -> (T, T) {
    let n = T::from_count(xs.len());
    let mean = xs.iter().copied().sum::<T>() / n;
    let ss: T = xs.iter().map(|&x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - T::one())).sqrt())
}

/// Draws `R` random sets per configured size and records the mean and spread
/// of their mean pair distances. Fully determined by `config.seed`.
pub fn sample_null<T: Scalar>(
    points: &[EmbeddedPoint<T>],
    config: &NullSamplingConfig,
) -> Result<NullSamples<T>> {
    let reps = config.sets_per_size;
    if reps < 2 {
        return Err(Error::invalid("need at least 2 sets per size"));
    }
    if config.set_sizes.is_empty() {
        return Err(Error::invalid("no set sizes configured"));
    }
    for &n in &config.set_sizes {
        if n < 2 {
            return Err(Error::invalid(format!("set size {n} < 2")));
        }
        if n > points.len() {
            return Err(Error::TooFewPoints {
                needed: n,
                got: points.len(),
            });
        }
    }
    let pooled = config.statistic == NullStatistic::PooledPairs;
    let tasks: Vec<(usize, usize)> = (0..config.set_sizes.len())
        .flat_map(|s| (0..reps).map(move |r| (s, r)))
        .collect();
    let moments: Vec<PairMoments<T>> = tasks
        .par_iter()
        .map(|&(s, r)| {
            let task = (s * reps + r) as u64;
            let mut rng = task_stream(config.seed, NULL_STREAM_DOMAIN | task);
            let size = config.set_sizes[s];
            let set: Vec<EmbeddedPoint<T>> = index::sample(&mut rng, points.len(), size)
                .into_iter()
                .map(|i| points[i])
                .collect();
            pair_moments(&set, config.pair_budget, &mut rng, pooled)
        })
        .collect::<Result<_>>()?;

    let records = config
        .set_sizes
        .iter()
        .enumerate()
        .map(|(s, &size)| {
            let chunk = &moments[s * reps..(s + 1) * reps];
            let means: Vec<T> = chunk
                .iter()
                .map(|m| m.sum / T::lit(m.count as f64))
                .collect();
            let (mean, std) = if pooled {
                let count = T::lit(chunk.iter().map(|m| m.count as f64).sum());
                let sum: T = chunk.iter().map(|m| m.sum).sum();
                let sum_sq: T = chunk.iter().map(|m| m.sum_sq).sum();
                let mean = sum / count;
                let var = ((sum_sq - sum * mean) / (count - T::one())).max(T::zero());
                (mean, var.sqrt())
            } else {
                mean_and_sample_std(&means)
            };
            NullRecord {
                set_size: size,
                mean,
                std,
                sets: reps,
            }
        })
        .collect();
    Ok(NullSamples { records })
}

/// Fits `mu_r` (set-count-weighted mean of the per-size means) and the power
/// law `σ(N) = a · N^(-alpha)` by least squares in log-log space. With
/// `fix_alpha` only `a` is fitted. Sizes whose spread is zero are skipped.
pub fn fit_null_scaling<T: Scalar>(
    samples: &NullSamples<T>,
    fix_alpha: Option<T>,
) -> Result<NullModel<T>> {
    if samples.records.is_empty() {
        return Err(Error::NullFit("no null samples".into()));
    }
    let weight: T = samples.records.iter().map(|r| T::from_count(r.sets)).sum();
    let mu_r = samples
        .records
        .iter()
        .map(|r| T::from_count(r.sets) * r.mean)
        .sum::<T>()
        / weight;

    let pts: Vec<(T, T)> = samples
        .records
        .iter()
        .filter(|r| r.std > T::zero() && r.std.is_finite())
        .map(|r| (T::from_count(r.set_size).ln(), r.std.ln()))
        .collect();
    let mut distinct: Vec<usize> = samples
        .records
        .iter()
        .filter(|r| r.std > T::zero() && r.std.is_finite())
        .map(|r| r.set_size)
        .collect();
    distinct.sort_unstable();
    distinct.dedup();
    let needed = if fix_alpha.is_some() { 1 } else { 3 };
    if distinct.len() < needed {
        return Err(Error::NullFit(format!(
            "need {needed} set sizes with nonzero spread, have {}",
            distinct.len()
        )));
    }

    let np = T::from_count(pts.len());
    let (log_a, alpha) = match fix_alpha {
        Some(alpha) => {
            let log_a = pts.iter().map(|&(x, y)| y + alpha * x).sum::<T>() / np;
            (log_a, alpha)
        }
        None => {
            let mx = pts.iter().map(|p| p.0).sum::<T>() / np;
            let my = pts.iter().map(|p| p.1).sum::<T>() / np;
            let sxx: T = pts.iter().map(|&(x, _)| (x - mx) * (x - mx)).sum();
            let sxy: T = pts.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
            let slope = sxy / sxx;
            (my - slope * mx, -slope)
        }
    };
    let rss: T = pts
        .iter()
        .map(|&(x, y)| {
            let e = y - (log_a - alpha * x);
            e * e
        })
        .sum();
    Ok(NullModel {
        mu_r,
        a: log_a.exp(),
        alpha,
        fit_residual: (rss / np).sqrt(),
        samples: samples.clone(),
    })
}

/// Stable 64-bit FNV-1a, used to key a group's random stream by its name.
fn group_stream_id(key: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in key.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h & !NULL_STREAM_DOMAIN
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupDistances<T> {
    /// `(group, size, mean distance)` in key order.
    pub measured: Vec<(String, usize, MeanDistanceResult<T>)>,
    /// Groups below the minimum size, with their sizes.
    pub skipped: Vec<(String, usize)>,
}

/// Mean inter-node distance for every group with at least `min_group_size`
/// members. Each group draws from a stream keyed by its name, so a group's
/// result does not depend on which other groups are evaluated.
pub fn group_mean_distance<T: Scalar>(
    points: &[EmbeddedPoint<T>],
    membership: &BTreeMap<String, Vec<u32>>,
    pair_budget: u64,
    seed: u64,
    min_group_size: usize,
) -> Result<GroupDistances<T>> {
    if membership.is_empty() {
        return Err(Error::invalid("empty group membership"));
    }
    let min = min_group_size.max(2);
    let (keep, skip): (Vec<_>, Vec<_>) = membership.iter().partition(|(_, ids)| ids.len() >= min);
    let measured = keep
        .par_iter()
        .map(|(key, ids)| {
            let set: Vec<EmbeddedPoint<T>> = ids.iter().map(|&i| points[i as usize]).collect();
            let mut rng = task_stream(seed, group_stream_id(key));
            let r = crate::feature_space::mean_pairwise_distance(&set, pair_budget, &mut rng)?;
            Ok(((*key).clone(), ids.len(), r))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GroupDistances {
        measured,
        skipped: skip.into_iter().map(|(k, ids)| (k.clone(), ids.len())).collect(),
    })
}

/// Two-sided standard normal tail probability of `z`.
pub fn two_sided_p(z: f64) -> f64 {
    statrs::function::erf::erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

pub fn z_score<T: Scalar>(
    model: &NullModel<T>,
    level: Level,
    group: &str,
    n_data: usize,
    mu_data: T,
) -> GroupTestResult<T> {
    let z = (mu_data - model.mu_r) / model.sigma(n_data);
    GroupTestResult {
        level,
        group: group.to_string(),
        n_nodes: n_data,
        mu_data,
        z,
        p_value: T::lit(two_sided_p(z.as_f64())),
        significant: z.abs() > T::lit(Z_THRESHOLD),
    }
}

pub fn summarize<T: Scalar>(results: &[GroupTestResult<T>]) -> Result<SignificanceSummary> {
    if results.is_empty() {
        return Err(Error::invalid("no group results to summarize"));
    }
    let thr = T::lit(Z_THRESHOLD);
    let mut histogram: Vec<(i32, i32, usize)> = (-HISTOGRAM_CLAMP..HISTOGRAM_CLAMP)
        .map(|lo| (lo, lo + 1, 0))
        .collect();
    for r in results {
        let z = r.z.as_f64();
        let bin = if z.is_nan() {
            continue;
        } else {
            (z.floor().clamp(-HISTOGRAM_CLAMP as f64, (HISTOGRAM_CLAMP - 1) as f64) as i32
                + HISTOGRAM_CLAMP) as usize
        };
        histogram[bin].2 += 1;
    }
    Ok(SignificanceSummary {
        groups: results.len(),
        significant: results.iter().filter(|r| r.significant).count(),
        below: results.iter().filter(|r| r.z < -thr).count(),
        above: results.iter().filter(|r| r.z > thr).count(),
        histogram,
    })
}

pub fn write_null_samples_tsv<T: Scalar, W: Write>(s: &NullSamples<T>, mut w: W) -> Result<()> {
    writeln!(w, "#N\tmean\tstd\tR")?;
    for r in &s.records {
        writeln!(
            w,
            "{}\t{}\t{}\t{}",
            r.set_size,
            f9(r.mean.as_f64()),
            f9(r.std.as_f64()),
            r.sets
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_null_samples_tsv<T: Scalar, R: BufRead>(reader: R) -> Result<NullSamples<T>> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let err = || Error::Parse {
            line: idx + 1,
            msg: "expected `N<TAB>mean<TAB>std<TAB>R`".into(),
        };
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 4 {
            return Err(err());
        }
        records.push(NullRecord {
            set_size: f[0].parse().map_err(|_| err())?,
            mean: T::lit(f[1].parse().map_err(|_| err())?),
            std: T::lit(f[2].parse().map_err(|_| err())?),
            sets: f[3].parse().map_err(|_| err())?,
        });
    }
    Ok(NullSamples { records })
}

/// Null model row: `mu_r a alpha residual`, 17 significant digits.
pub fn write_null_model_tsv<T: Scalar, W: Write>(m: &NullModel<T>, mut w: W) -> Result<()> {
    writeln!(w, "#mu_r\ta\talpha\tresidual")?;
    writeln!(
        w,
        "{}\t{}\t{}\t{}",
        f17(m.mu_r.as_f64()),
        f17(m.a.as_f64()),
        f17(m.alpha.as_f64()),
        f17(m.fit_residual.as_f64())
    )?;
    w.flush()?;
    Ok(())
}

/// Reads the fitted parameters; the returned model carries no samples.
pub fn read_null_model_tsv<T: Scalar, R: BufRead>(reader: R) -> Result<NullModel<T>> {
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let err = || Error::Parse {
            line: idx + 1,
            msg: "expected `mu_r<TAB>a<TAB>alpha<TAB>residual`".into(),
        };
        let vals: Vec<f64> = line
            .split('\t')
            .map(|s| s.parse::<f64>().map_err(|_| err()))
            .collect::<Result<_>>()?;
        if vals.len() != 4 || !(vals[1] > 0.0) {
            return Err(err());
        }
        return Ok(NullModel {
            mu_r: T::lit(vals[0]),
            a: T::lit(vals[1]),
            alpha: T::lit(vals[2]),
            fit_residual: T::lit(vals[3]),
            samples: NullSamples { records: vec![] },
        });
    }
    Err(Error::Parse {
        line: 0,
        msg: "empty null model file".into(),
    })
}

/// Sorts results by ascending z (ties by level then group) and writes them.
pub fn write_results_tsv<T: Scalar, W: Write>(
    results: &[GroupTestResult<T>],
    mut w: W,
) -> Result<()> {
    let mut sorted: Vec<&GroupTestResult<T>> = results.iter().collect();
    sorted.sort_by(|a, b| {
        a.z.partial_cmp(&b.z)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.level.cmp(&b.level))
            .then(a.group.cmp(&b.group))
    });
    writeln!(w, "#level\tgroup\tn_nodes\tmean_dist\tz\tp\tsignificant")?;
    for r in sorted {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.level,
            r.group,
            r.n_nodes,
            f9(r.mu_data.as_f64()),
            f9(r.z.as_f64()),
            f9(r.p_value.as_f64()),
            u8::from(r.significant)
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results_tsv<T: Scalar, R: BufRead>(reader: R) -> Result<Vec<GroupTestResult<T>>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let err = || Error::Parse {
            line: idx + 1,
            msg: "malformed results row".into(),
        };
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 7 {
            return Err(err());
        }
        let num = |s: &str| s.parse::<f64>().map(T::lit).map_err(|_| err());
        out.push(GroupTestResult {
            level: f[0].parse().map_err(|_| err())?,
            group: f[1].to_string(),
            n_nodes: f[2].parse().map_err(|_| err())?,
            mu_data: num(f[3])?,
            z: num(f[4])?,
            p_value: num(f[5])?,
            significant: match f[6] {
                "1" => true,
                "0" => false,
                _ => return Err(err()),
            },
        });
    }
    Ok(out)
}

pub fn write_summary_tsv<W: Write>(s: &SignificanceSummary, label: &str, mut w: W) -> Result<()> {
    writeln!(
        w,
        "# {label} groups={} significant={} z_below_-2={} z_above_+2={}",
        s.groups, s.significant, s.below, s.above
    )?;
    writeln!(w, "#bin_low\tbin_high\tcount")?;
    for &(lo, hi, c) in &s.histogram {
        writeln!(w, "{lo}\t{hi}\t{c}")?;
    }
    w.flush()?;
    Ok(())
}
