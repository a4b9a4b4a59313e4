//! Dynamic time warping between 1-D curves.
//!
//! Full `O(n·m)` alignment with local cost `|a_i − b_j|` and steps
//! `(+1,0)`, `(0,+1)`, `(+1,+1)`. No warping window.

use rayon::prelude::*;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WarpResult {
    pub distance: f64,
    /// Index pairs `(i, j)` from `(0, 0)` to `(n − 1, m − 1)`.
    pub path: Vec<(usize, usize)>,
}

fn check(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::domain("DTW needs two non-empty series"));
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::domain("DTW series must be finite"));
    }
    Ok(())
}

/// Distance and optimal path. On backtracking ties the diagonal predecessor
/// wins, then the vertical one `(i − 1, j)`.
pub fn dtw_distance(a: &[f64], b: &[f64]) -> Result<WarpResult> {
    check(a, b)?;
    let (n, m) = (a.len(), b.len());
    let mut acc = vec![f64::INFINITY; n * m];
    let at = |i: usize, j: usize| i * m + j;

    for i in 0..n {
        for j in 0..m {
            let cost = (a[i] - b[j]).abs();
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let diag = if i > 0 && j > 0 { acc[at(i - 1, j - 1)] } else { f64::INFINITY };
                let up = if i > 0 { acc[at(i - 1, j)] } else { f64::INFINITY };
                let left = if j > 0 { acc[at(i, j - 1)] } else { f64::INFINITY };
                diag.min(up).min(left)
            };
            acc[at(i, j)] = cost + best;
        }
    }

    let mut path = vec![(n - 1, m - 1)];
    let (mut i, mut j) = (n - 1, m - 1);
    while (i, j) != (0, 0) {
        (i, j) = if i == 0 {
            (0, j - 1)
        } else if j == 0 {
            (i - 1, 0)
        } else {
            let diag = acc[at(i - 1, j - 1)];
            let up = acc[at(i - 1, j)];
            let left = acc[at(i, j - 1)];
            if diag <= up && diag <= left {
                (i - 1, j - 1)
            } else if up <= left {
                (i - 1, j)
            } else {
                (i, j - 1)
            }
        };
        path.push((i, j));
    }
    path.reverse();

    Ok(WarpResult {
        distance: acc[at(n - 1, m - 1)],
        path,
    })
}

/// Distance only, with two rolling rows.
pub fn dtw_cost(a: &[f64], b: &[f64]) -> Result<f64> {
    check(a, b)?;
    let m = b.len();
    let mut prev = vec![f64::INFINITY; m];
    let mut cur = vec![f64::INFINITY; m];
    for (i, &x) in a.iter().enumerate() {
        for j in 0..m {
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let diag = if i > 0 && j > 0 { prev[j - 1] } else { f64::INFINITY };
                let up = if i > 0 { prev[j] } else { f64::INFINITY };
                let left = if j > 0 { cur[j - 1] } else { f64::INFINITY };
                diag.min(up).min(left)
            };
            cur[j] = (x - b[j]).abs() + best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m - 1])
}

/// Mean and spread of a set of distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceStats {
    pub mean: f64,
    /// Sample standard deviation over pairs (`P − 1` denominator); 0 when
    /// there is a single pair.
    pub std: f64,
    pub pairs: usize,
}

/// DTW statistics over all `n(n − 1)/2` unordered pairs.
pub fn pairwise_dtw_stats<S: AsRef<[f64]> + Sync>(samples: &[S]) -> Result<DistanceStats> {
    if samples.len() < 2 {
        return Err(Error::domain("pairwise DTW statistics need at least two samples"));
    }
    let pairs: Vec<(usize, usize)> = (0..samples.len())
        .flat_map(|i| (i + 1..samples.len()).map(move |j| (i, j)))
        .collect();
    let distances = pairs
        .par_iter()
        .map(|&(i, j)| dtw_cost(samples[i].as_ref(), samples[j].as_ref()))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(&distances))
}

pub(crate) fn summarize(distances: &[f64]) -> DistanceStats {
    let p = distances.len();
    let mean = distances.iter().sum::<f64>() / p as f64;
    let std = if p > 1 {
        (distances.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (p - 1) as f64).sqrt()
    } else {
        0.0
    };
    DistanceStats {
        mean,
        std,
        pairs: p,
    }
}
