//! PCA-whitened feature space.
//!
//! Projecting centred features onto the covariance eigenvectors and dividing
//! each score by the square root of its eigenvalue turns Mahalanobis distance
//! into plain Euclidean distance between embedded points.

use std::io::{BufRead, Write};

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fmt::f17;
use crate::scalar::Scalar;

pub const DIM: usize = 4;

/// Relative eigenvalue floor below which a component is dropped.
pub const DEFAULT_EPS_EIG: f64 = 1e-12;

/// Default number of sampled pairs once a set has more than this many pairs.
pub const DEFAULT_PAIR_BUDGET: u64 = 2_000_000;

const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel<T> {
    pub mean: [T; DIM],
    pub covariance: [[T; DIM]; DIM],
    /// Descending, clamped at zero.
    pub eigenvalues: [T; DIM],
    /// `eigenvectors[c]` pairs with `eigenvalues[c]`.
    pub eigenvectors: [[T; DIM]; DIM],
    pub retained: usize,
    pub eps_eig: T,
    /// First `retained` rows: eigenvector scaled by `1/sqrt(eigenvalue)`.
    pub whitening: [[T; DIM]; DIM],
}

/// Whitened coordinates. Entries past the model's `retained` count are zero,
/// so they never contribute to a distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddedPoint<T>(pub [T; DIM]);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanDistanceResult<T> {
    pub mean: T,
    pub pair_count_used: u64,
    /// True when every pair was visited.
    pub exact: bool,
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order with matching unit eigenvectors.
/// Each eigenvector's largest-magnitude entry is made positive.
pub fn symmetric_eigen<T: Scalar, const N: usize>(a: &[[T; N]; N]) -> ([T; N], [[T; N]; N]) {
    let mut a = *a;
    let mut v = [[T::zero(); N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = T::one();
    }
    let frob = a
        .iter()
        .flatten()
        .map(|&x| x * x)
        .sum::<T>()
        .sqrt();
    let tol = T::lit(JACOBI_TOL).max(T::epsilon() * T::lit(4.0)) * frob;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off = (0..N)
            .flat_map(|p| (0..N).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum::<T>()
            .sqrt();
        if off <= tol {
            break;
        }
        for p in 0..N {
            for q in p + 1..N {
                if a[p][q] == T::zero() {
                    continue;
                }
                let two = T::lit(2.0);
                let theta = (a[q][q] - a[p][p]) / (two * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..N {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..N).collect();
    order.sort_by(|&x, &y| a[y][y].partial_cmp(&a[x][x]).unwrap_or(std::cmp::Ordering::Equal));
    let mut values = [T::zero(); N];
    let mut vectors = [[T::zero(); N]; N];
    for (slot, &col) in order.iter().enumerate() {
        values[slot] = a[col][col];
        let mut vec = [T::zero(); N];
        for (k, row) in v.iter().enumerate() {
            vec[k] = row[col];
        }
        let pivot = vec
            .iter()
            .copied()
            .fold(T::zero(), |best, x| if x.abs() > best.abs() { x } else { best });
        if pivot < T::zero() {
            vec.iter_mut().for_each(|x| *x = -*x);
        }
        vectors[slot] = vec;
    }
    (values, vectors)
}

/// Fits the embedding on feature vectors (one row per node).
pub fn fit_embedding<T: Scalar>(rows: &[[T; DIM]], eps_eig: T) -> Result<EmbeddingModel<T>> {
    if rows.len() < 5 {
        return Err(Error::TooFewPoints {
            needed: 5,
            got: rows.len(),
        });
    }
    let n = T::from_count(rows.len());
    let mut mean = [T::zero(); DIM];
    for r in rows {
        for d in 0..DIM {
            mean[d] = mean[d] + r[d];
        }
    }
    mean.iter_mut().for_each(|m| *m = *m / n);

    let mut cov = [[T::zero(); DIM]; DIM];
    for r in rows {
        let c: [T; DIM] = std::array::from_fn(|d| r[d] - mean[d]);
        for p in 0..DIM {
            for q in p..DIM {
                cov[p][q] = cov[p][q] + c[p] * c[q];
            }
        }
    }
    for p in 0..DIM {
        for q in p..DIM {
            cov[p][q] = cov[p][q] / (n - T::one());
            cov[q][p] = cov[p][q];
        }
    }
    if (0..DIM).all(|d| cov[d][d] == T::zero()) {
        return Err(Error::DegenerateFeatures(
            "every feature column is constant".into(),
        ));
    }
    EmbeddingModel::from_decomposition(mean, cov, eps_eig)
}

impl<T: Scalar> EmbeddingModel<T> {
    fn from_decomposition(
        mean: [T; DIM],
        covariance: [[T; DIM]; DIM],
        eps_eig: T,
    ) -> Result<Self> {
        let (mut eigenvalues, eigenvectors) = symmetric_eigen(&covariance);
        eigenvalues.iter_mut().for_each(|l| *l = l.max(T::zero()));
        let lmax = eigenvalues[0];
        if lmax <= T::zero() {
            return Err(Error::DegenerateFeatures("zero covariance".into()));
        }
        let retained = eigenvalues.iter().filter(|&&l| l > eps_eig * lmax).count();
        let mut whitening = [[T::zero(); DIM]; DIM];
        for c in 0..retained {
            let scale = T::one() / eigenvalues[c].sqrt();
            whitening[c] = eigenvectors[c].map(|x| x * scale);
        }
        Ok(EmbeddingModel {
            mean,
            covariance,
            eigenvalues,
            eigenvectors,
            retained,
            eps_eig,
            whitening,
        })
    }

    pub fn transform(&self, x: &[T; DIM]) -> EmbeddedPoint<T> {
        let centred: [T; DIM] = std::array::from_fn(|d| x[d] - self.mean[d]);
        let mut out = [T::zero(); DIM];
        for (c, slot) in out.iter_mut().enumerate().take(self.retained) {
            *slot = self.whitening[c]
                .iter()
                .zip(&centred)
                .fold(T::zero(), |acc, (&w, &x)| acc + w * x);
        }
        EmbeddedPoint(out)
    }

    pub fn transform_all(&self, rows: &[[T; DIM]]) -> Vec<EmbeddedPoint<T>> {
        use rayon::prelude::*;
        rows.par_iter().map(|r| self.transform(r)).collect()
    }

    /// Plain-text model: key/value lines and matrix rows at 17 significant digits.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        let row = |v: &[T; DIM]| {
            v.iter()
                .map(|x| f17(x.as_f64()))
                .collect::<Vec<_>>()
                .join("\t")
        };
        writeln!(w, "# spatembed embedding model v1")?;
        writeln!(w, "eps_eig\t{}", f17(self.eps_eig.as_f64()))?;
        writeln!(w, "retained\t{}", self.retained)?;
        writeln!(w, "mean\t{}", row(&self.mean))?;
        for (i, r) in self.covariance.iter().enumerate() {
            writeln!(w, "covariance[{i}]\t{}", row(r))?;
        }
        writeln!(w, "eigenvalues\t{}", row(&self.eigenvalues))?;
        for (i, r) in self.eigenvectors.iter().enumerate() {
            writeln!(w, "eigenvector[{i}]\t{}", row(r))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reloads a model written by [`write_text`](Self::write_text); the
    /// whitening matrix is rebuilt from the stored eigenpairs.
    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let bad = |m: &str| Error::BadModel(m.to_string());
        let mut eps = None;
        let mut retained = None;
        let mut mean = None;
        let mut cov = [None; DIM];
        let mut values = None;
        let mut vecs = [None; DIM];
        for line in reader.lines() {
            let line = line?;
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let (key, rest) = line.split_once('\t').ok_or_else(|| bad("missing tab"))?;
            let vector = || -> Result<[T; DIM]> {
                let vals: Vec<f64> = rest
                    .split('\t')
                    .map(|s| s.parse::<f64>().map_err(|_| bad("bad float")))
                    .collect::<Result<_>>()?;
                if vals.len() != DIM {
                    return Err(bad("wrong vector length"));
                }
                Ok(std::array::from_fn(|i| T::lit(vals[i])))
            };
            let indexed = |prefix: &str| -> Option<usize> {
                key.strip_prefix(prefix)?
                    .strip_suffix(']')?
                    .parse()
                    .ok()
                    .filter(|&i: &usize| i < DIM)
            };
            match key {
                "eps_eig" => eps = Some(T::lit(rest.parse().map_err(|_| bad("bad eps_eig"))?)),
                "retained" => retained = Some(rest.parse::<usize>().map_err(|_| bad("bad retained"))?),
                "mean" => mean = Some(vector()?),
                "eigenvalues" => values = Some(vector()?),
                _ => {
                    if let Some(i) = indexed("covariance[") {
                        cov[i] = Some(vector()?);
                    } else if let Some(i) = indexed("eigenvector[") {
                        vecs[i] = Some(vector()?);
                    } else {
                        return Err(bad(&format!("unknown key `{key}`")));
                    }
                }
            }
        }
        let covariance = cov.map(|r| r.ok_or_else(|| bad("missing covariance row")));
        let eigenvectors = vecs.map(|r| r.ok_or_else(|| bad("missing eigenvector")));
        let covariance: [[T; DIM]; DIM] = {
            let mut out = [[T::zero(); DIM]; DIM];
            for (o, r) in out.iter_mut().zip(covariance) {
                *o = r?;
            }
            out
        };
        let eigenvectors: [[T; DIM]; DIM] = {
            let mut out = [[T::zero(); DIM]; DIM];
            for (o, r) in out.iter_mut().zip(eigenvectors) {
                *o = r?;
            }
            out
        };
        let eigenvalues = values.ok_or_else(|| bad("missing eigenvalues"))?;
        let retained = retained.ok_or_else(|| bad("missing retained"))?;
        if retained == 0 || retained > DIM {
            return Err(bad("retained out of range"));
        }
        let mut whitening = [[T::zero(); DIM]; DIM];
        for c in 0..retained {
            if eigenvalues[c] <= T::zero() {
                return Err(bad("retained component with nonpositive eigenvalue"));
            }
            let scale = T::one() / eigenvalues[c].sqrt();
            whitening[c] = eigenvectors[c].map(|x| x * scale);
        }
        Ok(EmbeddingModel {
            mean: mean.ok_or_else(|| bad("missing mean"))?,
            covariance,
            eigenvalues,
            eigenvectors,
            retained,
            eps_eig: eps.ok_or_else(|| bad("missing eps_eig"))?,
            whitening,
        })
    }
}

#[inline]
pub fn distance<T: Scalar>(a: &EmbeddedPoint<T>, b: &EmbeddedPoint<T>) -> T {
    a.0.iter()
        .zip(&b.0)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
        .sqrt()
}

/// Row index `i` of pair number `k` in the enumeration `(0,1),(0,2),..,(1,2),..`.
fn decode_pair(k: u64, n: u64) -> (usize, usize) {
    let start = |i: u64| i * n - i * (i + 1) / 2;
    let nf = n as f64 - 0.5;
    let guess = (nf - (nf * nf - 2.0 * k as f64).max(0.0).sqrt()).floor();
    let mut i = (guess.max(0.0) as u64).min(n - 2);
    while i > 0 && start(i) > k {
        i -= 1;
    }
    while i + 1 < n - 1 && start(i + 1) <= k {
        i += 1;
    }
    let j = k - start(i) + i + 1;
    (i as usize, j as usize)
}

/// Mean distance over all pairs, or over `pair_budget` distinct pairs drawn
/// uniformly without replacement when there are more pairs than that.
pub fn mean_pairwise_distance<T: Scalar, R: Rng + ?Sized>(
    points: &[EmbeddedPoint<T>],
    pair_budget: u64,
    rng: &mut R,
) -> Result<MeanDistanceResult<T>> {
    let n = points.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    if pair_budget == 0 {
        return Err(Error::invalid("pair budget must be positive"));
    }
    let total = n as u64 * (n as u64 - 1) / 2;
    if total <= pair_budget {
        let mut sum = T::zero();
        for i in 0..n - 1 {
            let row: T = points[i + 1..]
                .iter()
                .map(|q| distance(&points[i], q))
                .sum();
            sum = sum + row;
        }
        return Ok(MeanDistanceResult {
            mean: sum / T::lit(total as f64),
            pair_count_used: total,
            exact: true,
        });
    }
    let total_usize = usize::try_from(total).map_err(|_| Error::invalid("too many pairs"))?;
    let mut picks: Vec<u64> = index::sample(rng, total_usize, pair_budget as usize)
        .into_iter()
        .map(|k| k as u64)
        .collect();
    picks.sort_unstable();
    let sum: T = picks
        .iter()
        .map(|&k| {
            let (i, j) = decode_pair(k, n as u64);
            distance(&points[i], &points[j])
        })
        .sum();
    Ok(MeanDistanceResult {
        mean: sum / T::lit(pair_budget as f64),
        pair_count_used: pair_budget,
        exact: false,
    })
}
