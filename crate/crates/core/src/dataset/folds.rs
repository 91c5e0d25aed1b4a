use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub run: usize,
    pub fold: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Repeated stratified k-fold partition of instance indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub runs: usize,
    pub folds: usize,
    pub seed: u64,
    pub splits: Vec<Split>,
}

impl FoldPlan {
    pub fn len(&self) -> usize {
        self.splits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.splits.is_empty()
    }
}

pub fn make_folds(ds: &Dataset, runs: usize, folds: usize, seed: u64) -> Result<FoldPlan> {
    stratified_folds(ds.classes(), runs, folds, seed)
}

/// Builds `runs` independent stratified partitions into `folds` test sets.
///
/// Each class is shuffled and dealt evenly; the remainder of every class is
/// dealt round-robin to folds, continuing from where the previous class
/// stopped, so per-fold class counts differ by at most one.
pub fn stratified_folds(
    classes: &[usize],
    runs: usize,
    folds: usize,
    seed: u64,
) -> Result<FoldPlan> {
    if folds < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {folds}")));
    }
    if runs < 1 {
        return Err(Error::Config("need at least 1 run".into()));
    }
    let n = classes.len();
    if n < folds {
        return Err(Error::Config(format!(
            "{n} instances cannot fill {folds} folds"
        )));
    }
    let n_classes = classes.iter().max().map_or(0, |&m| m + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &c) in classes.iter().enumerate() {
        by_class[c].push(i);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut splits = Vec::with_capacity(runs * folds);
    for run in 0..runs {
        let mut tests: Vec<Vec<usize>> = vec![Vec::new(); folds];
        let mut next = 0;
        for members in &by_class {
            let mut members = members.clone();
            members.shuffle(&mut rng);
            let even = members.len() / folds * folds;
            for (pos, &i) in members[..even].iter().enumerate() {
                tests[pos % folds].push(i);
            }
            for &i in &members[even..] {
                tests[next].push(i);
                next = (next + 1) % folds;
            }
        }
        for (fold, mut test) in tests.into_iter().enumerate() {
            test.sort_unstable();
            let mut in_test = vec![false; n];
            for &i in &test {
                in_test[i] = true;
            }
            let train = (0..n).filter(|&i| !in_test[i]).collect();
            splits.push(Split {
                run,
                fold,
                train,
                test,
            });
        }
    }
    Ok(FoldPlan {
        runs,
        folds,
        seed,
        splits,
    })
}
