use etsc_core::{Dataset, TimeSeries};
use rayon::prelude::*;

use crate::error::AlgoError;
use crate::{Decision, DecisionStream, EarlyClassifier};

/// Nearest-neighbor sets per training instance, for every prefix length.
/// A set holds every co-minimal neighbor (exact distance ties), so the
/// reverse sets obey j ∈ RNN_t(i) ⇔ i ∈ NN_t(j). Ties are what let one
/// instance's reverse set change at a prefix length without disturbing
/// anyone else's; with unique neighbors every rewiring touches two targets
/// at once.
pub struct NnTables {
    /// nn[t-1][i] = ascending indices of i's nearest neighbors at prefix t.
    nn: Vec<Vec<Vec<usize>>>,
    n: usize,
}

impl NnTables {
    pub fn num_instances(&self) -> usize {
        self.n
    }

    pub fn series_len(&self) -> usize {
        self.nn.len()
    }

    /// Lowest-index nearest neighbor of `i` at prefix length `t` (1-based).
    pub fn nn(&self, t: usize, i: usize) -> usize {
        self.nn[t - 1][i][0]
    }

    /// All co-minimal neighbors of `i` at prefix length `t`, ascending.
    pub fn nn_set(&self, t: usize, i: usize) -> &[usize] {
        &self.nn[t - 1][i]
    }

    /// Ascending reverse-nearest-neighbor set of `i` at prefix length `t`.
    pub fn rnn(&self, t: usize, i: usize) -> Vec<usize> {
        (0..self.n)
            .filter(|&j| self.nn[t - 1][j].binary_search(&i).is_ok())
            .collect()
    }
}

/// Builds per-prefix nearest-neighbor tables under Euclidean distance.
/// Exact distance ties are kept as sets; an instance is never its own
/// neighbor.
pub fn build_nn_tables(d: &Dataset) -> Result<NnTables, AlgoError> {
    let t_len = check_univariate_equal_length(d)?;
    let n = d.len();
    if n < 2 {
        return Err(AlgoError::BadParameter(
            "nearest-neighbor tables need at least 2 instances".into(),
        ));
    }
    let series: Vec<&[f64]> = d.instances().iter().map(|x| x.series.variable(0)).collect();
    // Row i carries its squared distances to everyone and extends them one
    // time point per step, so a full row costs O(n·T).
    let rows: Vec<Vec<Vec<usize>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut sq = vec![0.0f64; n];
            let mut nn_of_i = Vec::with_capacity(t_len);
            for t in 0..t_len {
                let xi = series[i][t];
                let mut best_sq = f64::INFINITY;
                for (j, acc) in sq.iter_mut().enumerate() {
                    let d = xi - series[j][t];
                    *acc += d * d;
                    if j != i && *acc < best_sq {
                        best_sq = *acc;
                    }
                }
                let ties: Vec<usize> = (0..n).filter(|&j| j != i && sq[j] == best_sq).collect();
                nn_of_i.push(ties);
            }
            nn_of_i
        })
        .collect();
    let nn = (0..t_len)
        .map(|t| (0..n).map(|i| rows[i][t].clone()).collect())
        .collect();
    Ok(NnTables { nn, n })
}

/// Minimum prediction length from nearest-neighbor structure alone: the
/// smallest t* such that RNN_t(i) equals RNN_T(i) for every t ∈ [t*, T].
pub fn mpl_nn(tables: &NnTables, i: usize) -> usize {
    let t_len = tables.series_len();
    let final_rnn = tables.rnn(t_len, i);
    let mut mpl = t_len;
    for t in (1..t_len).rev() {
        if tables.rnn(t, i) == final_rnn {
            mpl = t;
        } else {
            break;
        }
    }
    mpl
}

#[derive(Debug, Clone, Copy)]
pub struct EctsParams {
    /// Minimum reverse-neighbor count (at full length) an instance needs to
    /// serve as a predictor; 0 disables the filter.
    pub support: usize,
}

impl Default for EctsParams {
    fn default() -> Self {
        EctsParams { support: 0 }
    }
}

/// 1-NN early classifier gated by per-instance minimum prediction lengths.
pub struct EctsModel {
    series: Vec<Vec<f64>>,
    labels: Vec<usize>,
    mpl: Vec<usize>,
    /// |RNN_T(i)|, consulted by the support filter.
    rnn_final_size: Vec<usize>,
    support: usize,
    num_classes: usize,
    series_len: usize,
}

impl EctsModel {
    /// Final per-instance minimum prediction lengths (post refinement).
    pub fn mpl(&self) -> &[usize] {
        &self.mpl
    }

    pub fn series_len(&self) -> usize {
        self.series_len
    }
}

fn check_univariate_equal_length(d: &Dataset) -> Result<usize, AlgoError> {
    if d.num_variables() != 1 {
        return Err(AlgoError::NeedsUnivariate {
            got: d.num_variables(),
        });
    }
    d.equal_length().ok_or_else(|| {
        AlgoError::NeedsEqualLength(format!("dataset {} has ragged series", d.name()))
    })
}

struct Cluster {
    members: Vec<usize>,
    label: usize,
    active: bool,
}

/// Smallest t* from which both conditions hold through T: the cluster's
/// outside reverse set {j ∉ C : NN_t(j) ∩ C ≠ ∅} equals its full-length
/// value, and every member keeps at least one nearest neighbor inside the
/// cluster. `None` when even the full length violates neighbor containment.
fn cluster_mpl(tables: &NnTables, members: &[usize]) -> Option<usize> {
    let n = tables.num_instances();
    let t_len = tables.series_len();
    let mut inside = vec![false; n];
    for &i in members {
        inside[i] = true;
    }
    let points_in = |t: usize, j: usize| tables.nn_set(t, j).iter().any(|&k| inside[k]);
    let outside_set = |t: usize| -> Vec<usize> {
        (0..n).filter(|&j| !inside[j] && points_in(t, j)).collect()
    };
    let contained = |t: usize| members.iter().all(|&i| points_in(t, i));
    if !contained(t_len) {
        return None;
    }
    let final_outside = outside_set(t_len);
    let mut mpl = t_len;
    for t in (1..t_len).rev() {
        if contained(t) && outside_set(t) == final_outside {
            mpl = t;
        } else {
            break;
        }
    }
    Some(mpl)
}

/// Agglomerative refinement: repeatedly merge the closest label-pure pair
/// of clusters (single linkage on full-length distance); a mixed-label
/// closest pair freezes both clusters. Every merge that admits a cluster
/// MPL lowers its members' prediction lengths to at most that value.
pub fn cluster_and_refine(
    d: &Dataset,
    tables: &NnTables,
    params: &EctsParams,
) -> Result<EctsModel, AlgoError> {
    let t_len = check_univariate_equal_length(d)?;
    let n = d.len();
    if n != tables.num_instances() || t_len != tables.series_len() {
        return Err(AlgoError::BadParameter(
            "nearest-neighbor tables do not match the dataset".into(),
        ));
    }
    let series: Vec<Vec<f64>> = d
        .instances()
        .iter()
        .map(|x| x.series.variable(0).to_vec())
        .collect();
    let labels = d.label_indices().to_vec();
    let mut mpl: Vec<usize> = (0..n).map(|i| mpl_nn(tables, i)).collect();

    let mut dist_sq = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let sq: f64 = series[i]
                .iter()
                .zip(&series[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            dist_sq[i][j] = sq;
            dist_sq[j][i] = sq;
        }
    }

    let mut clusters: Vec<Cluster> = (0..n)
        .map(|i| Cluster {
            members: vec![i],
            label: labels[i],
            active: true,
        })
        .collect();

    loop {
        let active: Vec<usize> = (0..clusters.len()).filter(|&c| clusters[c].active).collect();
        if active.len() < 2 {
            break;
        }
        // Closest active pair; ties resolve on the representative (lowest
        // member) indices so the loop is deterministic.
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for (ai, &a) in active.iter().enumerate() {
            for &b in &active[ai + 1..] {
                let mut link = f64::INFINITY;
                for &i in &clusters[a].members {
                    for &j in &clusters[b].members {
                        link = link.min(dist_sq[i][j]);
                    }
                }
                let ra = clusters[a].members[0].min(clusters[b].members[0]);
                let rb = clusters[a].members[0].max(clusters[b].members[0]);
                let key = (link, ra, rb, a, b);
                best = match best {
                    None => Some(key),
                    Some(cur)
                        if link < cur.0
                            || (link == cur.0 && (ra, rb) < (cur.1, cur.2)) =>
                    {
                        Some(key)
                    }
                    other => other,
                };
            }
        }
        let (_, _, _, a, b) = best.expect("two active clusters have a closest pair");
        if clusters[a].label != clusters[b].label {
            clusters[a].active = false;
            clusters[b].active = false;
            continue;
        }
        let taken = std::mem::take(&mut clusters[b].members);
        clusters[b].active = false;
        clusters[a].members.extend(taken);
        clusters[a].members.sort_unstable();
        if let Some(m) = cluster_mpl(tables, &clusters[a].members) {
            for &i in &clusters[a].members {
                mpl[i] = mpl[i].min(m);
            }
        }
    }

    let rnn_final_size = (0..n).map(|i| tables.rnn(t_len, i).len()).collect();
    Ok(EctsModel {
        series,
        labels,
        mpl,
        rnn_final_size,
        support: params.support,
        num_classes: d.num_classes(),
        series_len: t_len,
    })
}

/// Trains ECTS: nearest-neighbor tables, per-instance minimum prediction
/// lengths, and clustering-based refinement.
pub fn train_ects(d: &Dataset, params: &EctsParams) -> Result<EctsModel, AlgoError> {
    let tables = build_nn_tables(d)?;
    cluster_and_refine(d, &tables, params)
}

impl EarlyClassifier for EctsModel {
    fn checkpoints(&self, series_len: usize) -> Vec<usize> {
        (1..=series_len.max(1)).collect()
    }

    fn open_stream(&self) -> Box<dyn DecisionStream + '_> {
        Box::new(EctsStream {
            model: self,
            sq: vec![0.0; self.series.len()],
            seen: 0,
        })
    }

    fn num_classes(&self) -> usize {
        self.num_classes
    }
}

/// Streaming state: squared prefix distance to every training instance,
/// extended by one term per new time point.
struct EctsStream<'m> {
    model: &'m EctsModel,
    sq: Vec<f64>,
    seen: usize,
}

impl EctsStream<'_> {
    fn nearest(&self, eligible_only: bool) -> Option<usize> {
        let m = self.model;
        let mut best = None;
        let mut best_sq = f64::INFINITY;
        for (j, &sq) in self.sq.iter().enumerate() {
            if eligible_only && m.rnn_final_size[j] < m.support {
                continue;
            }
            if sq < best_sq {
                best_sq = sq;
                best = Some(j);
            }
        }
        best
    }
}

impl DecisionStream for EctsStream<'_> {
    fn observe(&mut self, prefix: &TimeSeries) -> Result<Decision, AlgoError> {
        if prefix.num_variables() != 1 {
            return Err(AlgoError::NeedsUnivariate {
                got: prefix.num_variables(),
            });
        }
        let values = prefix.variable(0);
        let t = values.len().min(self.model.series_len);
        for u in self.seen..t {
            let x = values[u];
            for (acc, train) in self.sq.iter_mut().zip(&self.model.series) {
                let d = x - train[u];
                *acc += d * d;
            }
        }
        self.seen = t;

        if let Some(nn) = self.nearest(true) {
            if t >= self.model.mpl[nn] {
                return Ok(Decision::Predict(self.model.labels[nn]));
            }
        }
        if values.len() >= self.model.series_len {
            // Forced prediction at full length: plain 1-NN, ignoring the
            // support filter if it left no eligible predictor.
            let nn = self
                .nearest(true)
                .or_else(|| self.nearest(false))
                .expect("training set is non-empty");
            return Ok(Decision::Predict(self.model.labels[nn]));
        }
        Ok(Decision::Wait)
    }
}
