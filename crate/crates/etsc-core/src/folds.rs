use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::CoreError;

/// What to balance across folds: class labels (the usual case) or the
/// instances' source ids (for datasets where several series come from the
/// same physical object and must stay comparable across folds).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StratifyKey {
    Class,
    SourceId,
}

/// A k-fold assignment of dataset instances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    assignments: Vec<usize>,
    key: StratifyKey,
    warnings: Vec<String>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Fold index per instance, aligned with the dataset.
    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn stratify_key(&self) -> StratifyKey {
        self.key
    }

    /// Diagnostics produced while planning (e.g. a stratum smaller than k).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Instance indices held out as the test set of `fold`.
    pub fn test_indices(&self, fold: usize) -> Result<Vec<usize>, CoreError> {
        self.check_fold(fold)?;
        Ok(self.positions(|f| f == fold))
    }

    /// Instance indices used for training when `fold` is held out.
    pub fn train_indices(&self, fold: usize) -> Result<Vec<usize>, CoreError> {
        self.check_fold(fold)?;
        Ok(self.positions(|f| f != fold))
    }

    /// `(train, test)` indices for one fold.
    pub fn split(&self, fold: usize) -> Result<(Vec<usize>, Vec<usize>), CoreError> {
        Ok((self.train_indices(fold)?, self.test_indices(fold)?))
    }

    fn check_fold(&self, fold: usize) -> Result<(), CoreError> {
        if fold >= self.k {
            return Err(CoreError::FoldOutOfRange { fold, k: self.k });
        }
        Ok(())
    }

    fn positions(&self, keep: impl Fn(usize) -> bool) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &f)| keep(f))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Plans stratified k-fold cross-validation.
///
/// Instances are grouped by the stratify key, each group is shuffled with a
/// seeded generator, and group members are dealt round-robin starting from a
/// seeded offset. Per stratum, fold counts differ by at most one, and the
/// whole plan is deterministic for a fixed seed.
///
/// A stratum smaller than `k` is legal but leaves that stratum absent from
/// some test folds; this is reported as a warning on the plan.
pub fn stratified_folds(
    dataset: &Dataset,
    k: usize,
    seed: u64,
    key: StratifyKey,
) -> Result<FoldPlan, CoreError> {
    if k < 2 {
        return Err(CoreError::BadFoldCount { k });
    }
    // Strata in deterministic order: first appearance of each key value.
    let mut stratum_names: Vec<String> = Vec::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, inst) in dataset.instances().iter().enumerate() {
        let name = match key {
            StratifyKey::Class => inst.label.clone(),
            StratifyKey::SourceId => inst
                .source_id
                .clone()
                .ok_or(CoreError::MissingSourceId { instance: i })?,
        };
        match stratum_names.iter().position(|s| *s == name) {
            Some(g) => groups[g].push(i),
            None => {
                stratum_names.push(name);
                groups.push(vec![i]);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![0usize; dataset.len()];
    let mut warnings = Vec::new();
    for (g, group) in groups.iter().enumerate() {
        if group.len() < k {
            warnings.push(format!(
                "stratum {:?} has {} instance(s), fewer than {} folds; it will be absent from some test folds",
                stratum_names[g],
                group.len(),
                k
            ));
        }
        let mut shuffled = group.clone();
        shuffled.shuffle(&mut rng);
        let start = rng.gen_range(0..k);
        for (pos, &idx) in shuffled.iter().enumerate() {
            assignments[idx] = (start + pos) % k;
        }
    }

    Ok(FoldPlan {
        k,
        assignments,
        key,
        warnings,
    })
}
