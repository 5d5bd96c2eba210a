use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::LearnError;

/// A fitted K-Means clustering.
#[derive(Debug, Clone)]
pub struct KMeansModel {
    centroids: Vec<Vec<f64>>,
    assignments: Vec<usize>,
    objective_history: Vec<f64>,
    iterations: usize,
}

impl KMeansModel {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn centroids(&self) -> &[Vec<f64>] {
        &self.centroids
    }

    /// Cluster index of each training item.
    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    /// Sum of squared distances to assigned centroids after each assignment
    /// step; non-increasing by construction of Lloyd's algorithm.
    pub fn objective_history(&self) -> &[f64] {
        &self.objective_history
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Final within-cluster sum of squared distances.
    pub fn objective(&self) -> f64 {
        *self
            .objective_history
            .last()
            .expect("at least one assignment pass")
    }

    /// Squared distances from `x` to every centroid.
    pub fn squared_distances(&self, x: &[f64]) -> Result<Vec<f64>, LearnError> {
        let dim = self.centroids[0].len();
        if x.len() != dim {
            return Err(LearnError::DimensionMismatch {
                expected: dim,
                got: x.len(),
            });
        }
        Ok(self
            .centroids
            .iter()
            .map(|c| squared_distance(c, x))
            .collect())
    }

    /// Nearest centroid index; ties resolve to the lowest index.
    pub fn assign(&self, x: &[f64]) -> Result<usize, LearnError> {
        let dists = self.squared_distances(x)?;
        Ok(nearest(&dists))
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

fn nearest(dists: &[f64]) -> usize {
    let mut best = 0;
    for (i, &d) in dists.iter().enumerate().skip(1) {
        if d < dists[best] {
            best = i;
        }
    }
    best
}

/// Lloyd's algorithm with seeded initialization.
///
/// Initial centroids are `k` items drawn without replacement, preferring
/// distinct points; an empty cluster keeps its previous centroid. The run is
/// deterministic for a fixed seed.
pub fn kmeans(
    items: &[Vec<f64>],
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<KMeansModel, LearnError> {
    let n = items.len();
    if n == 0 {
        return Err(LearnError::EmptyTrainingSet);
    }
    if k == 0 || k > n {
        return Err(LearnError::BadClusterCount { k, n });
    }
    let dim = items[0].len();
    for item in items {
        if item.len() != dim {
            return Err(LearnError::DimensionMismatch {
                expected: dim,
                got: item.len(),
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    for &i in &order {
        if centroids.len() == k {
            break;
        }
        if !centroids.iter().any(|c| c == &items[i]) {
            centroids.push(items[i].clone());
        }
    }
    // Fewer distinct points than k: fill with duplicates so k is honored.
    for &i in &order {
        if centroids.len() == k {
            break;
        }
        centroids.push(items[i].clone());
    }

    let mut assignments = vec![0usize; n];
    let mut objective_history = Vec::new();
    let mut iterations = 0;
    for _ in 0..max_iter.max(1) {
        iterations += 1;
        let mut objective = 0.0;
        let mut changed = false;
        for (i, item) in items.iter().enumerate() {
            let dists: Vec<f64> = centroids.iter().map(|c| squared_distance(c, item)).collect();
            let a = nearest(&dists);
            objective += dists[a];
            if assignments[i] != a {
                assignments[i] = a;
                changed = true;
            }
        }
        objective_history.push(objective);
        if !changed && objective_history.len() > 1 {
            break;
        }

        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, item) in items.iter().enumerate() {
            counts[assignments[i]] += 1;
            for (s, v) in sums[assignments[i]].iter_mut().zip(item) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for (ci, s) in centroids[c].iter_mut().zip(&sums[c]) {
                    *ci = s / counts[c] as f64;
                }
            }
        }
        if !changed {
            break;
        }
    }

    Ok(KMeansModel {
        centroids,
        assignments,
        objective_history,
        iterations,
    })
}
