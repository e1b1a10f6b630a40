//! Offline Lloyd's k-means.
//!
//! Iteration stops once the fraction of vectors whose nearest centroid did
//! not change between consecutive assignments reaches `min_convergence`.
//! Distance is squared Euclidean; ties go to the lowest centroid index; an
//! empty cluster keeps its previous centroid.

use std::io::Write;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KMeansError {
    #[error("training set is empty")]
    EmptyTraining,
    #[error("need at least one initial centroid")]
    NoCentroids,
    #[error("min_convergence {0} not in (0, 1]")]
    BadConvergence(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KMeansConfig {
    pub min_convergence: f64,
    pub max_iters: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            min_convergence: 0.99,
            max_iters: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KMeansModel<const D: usize> {
    pub centroids: Vec<[f64; D]>,
    /// Centroid updates performed.
    pub iterations: usize,
    /// Convergence metric after the last iteration.
    pub convergence: f64,
    /// False when `max_iters` stopped the run first.
    pub converged: bool,
    /// Within-cluster sum of squares after the initial assignment and after
    /// every iteration.
    pub wcss_history: Vec<f64>,
    /// Final cluster of each training vector.
    pub assignment: Vec<usize>,
}

fn sq_dist<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest<const D: usize>(centroids: &[[f64; D]], x: &[f64; D]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(c, x);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

fn wcss<const D: usize>(centroids: &[[f64; D]], data: &[[f64; D]], assignment: &[usize]) -> f64 {
    data.iter()
        .zip(assignment)
        .map(|(x, &c)| sq_dist(&centroids[c], x))
        .sum()
}

pub fn fit<const D: usize>(
    train: &[[f64; D]],
    initial: Vec<[f64; D]>,
    cfg: &KMeansConfig,
) -> Result<KMeansModel<D>, KMeansError> {
    if train.is_empty() {
        return Err(KMeansError::EmptyTraining);
    }
    if initial.is_empty() {
        return Err(KMeansError::NoCentroids);
    }
    if !(cfg.min_convergence > 0.0 && cfg.min_convergence <= 1.0) {
        return Err(KMeansError::BadConvergence(cfg.min_convergence));
    }
    let k = initial.len();
    let mut centroids = initial;
    let mut assignment: Vec<usize> = train.iter().map(|x| nearest(&centroids, x)).collect();
    let mut wcss_history = vec![wcss(&centroids, train, &assignment)];
    let mut iterations = 0;
    let mut convergence = 0.0;

    while iterations < cfg.max_iters {
        let mut sums = vec![[0.0; D]; k];
        let mut counts = vec![0usize; k];
        for (x, &c) in train.iter().zip(&assignment) {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(x) {
                *s += v;
            }
        }
        for ((centroid, sum), &count) in centroids.iter_mut().zip(&sums).zip(&counts) {
            if count > 0 {
                *centroid = sum.map(|s| s / count as f64);
            }
        }
        let next: Vec<usize> = train.iter().map(|x| nearest(&centroids, x)).collect();
        let unchanged = next.iter().zip(&assignment).filter(|(a, b)| a == b).count();
        convergence = unchanged as f64 / train.len() as f64;
        assignment = next;
        iterations += 1;
        wcss_history.push(wcss(&centroids, train, &assignment));
        if convergence >= cfg.min_convergence {
            break;
        }
    }

    Ok(KMeansModel {
        centroids,
        iterations,
        convergence,
        converged: convergence >= cfg.min_convergence,
        wcss_history,
        assignment,
    })
}

impl<const D: usize> KMeansModel<D> {
    /// Nearest-centroid cluster for each vector; centroids do not move.
    pub fn assign(&self, data: &[[f64; D]]) -> Vec<usize> {
        data.iter().map(|x| nearest(&self.centroids, x)).collect()
    }

    /// CSV: `centroid,c1..cD,iterations,convergence`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let coords: Vec<String> = (1..=D).map(|j| format!("c{j}")).collect();
        writeln!(out, "centroid,{},iterations,convergence", coords.join(","))?;
        for (i, c) in self.centroids.iter().enumerate() {
            let values: Vec<String> = c.iter().map(|v| format!("{v:?}")).collect();
            writeln!(
                out,
                "{},{},{},{:?}",
                i + 1,
                values.join(","),
                self.iterations,
                self.convergence
            )?;
        }
        Ok(())
    }
}
