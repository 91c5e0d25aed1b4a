use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::credal::{CredalEnsemble, CredalVariant};
use crate::dataset::{Discretizer, FoldPlan, Imputer, RawTable};
use crate::ensemble::{DeterminateKind, Ensemble, EnsembleSettings};
use crate::error::{Error, Result};
use crate::eval::metrics::{brier, credal_metrics, discounted_accuracy, mean_utility, Utility};
use crate::mass::argmax;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassifierKind {
    Aode,
    BmaAode,
    CompAode,
    BmaAodeStar,
    CompAodeStar,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 5] = [
        ClassifierKind::Aode,
        ClassifierKind::BmaAode,
        ClassifierKind::CompAode,
        ClassifierKind::BmaAodeStar,
        ClassifierKind::CompAodeStar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Aode => "aode",
            ClassifierKind::BmaAode => "bma-aode",
            ClassifierKind::CompAode => "comp-aode",
            ClassifierKind::BmaAodeStar => "bma-aode-star",
            ClassifierKind::CompAodeStar => "comp-aode-star",
        }
    }

    pub fn credal(self) -> Option<CredalVariant> {
        match self {
            ClassifierKind::BmaAodeStar => Some(CredalVariant::BmaStar),
            ClassifierKind::CompAodeStar => Some(CredalVariant::CompStar),
            _ => None,
        }
    }

    /// The single-prior classifier whose posterior is reported.
    pub fn determinate(self) -> DeterminateKind {
        match self {
            ClassifierKind::Aode => DeterminateKind::Aode,
            ClassifierKind::BmaAode | ClassifierKind::BmaAodeStar => DeterminateKind::BmaAode,
            ClassifierKind::CompAode | ClassifierKind::CompAodeStar => DeterminateKind::CompAode,
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let wanted = s.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|k| k.name() == wanted)
            .ok_or_else(|| {
                let names: Vec<&str> = Self::ALL.iter().map(|k| k.name()).collect();
                Error::Config(format!(
                    "unknown classifier `{s}`; valid names: {}",
                    names.join(", ")
                ))
            })
    }
}

/// Metrics of one classifier on one test set, or their means over cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub brier: f64,
    pub determinacy: f64,
    pub single_accuracy: Option<f64>,
    pub set_accuracy: Option<f64>,
    pub output_size: Option<f64>,
    pub discounted_accuracy: f64,
    pub u65: f64,
    pub u80: f64,
    pub n_test: usize,
}

/// Accuracy of the determinate counterpart split by whether the credal
/// classifier judged the instance safe (singleton) or prior-dependent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SafetySplit {
    pub safe_correct: usize,
    pub safe_total: usize,
    pub dependent_correct: usize,
    pub dependent_total: usize,
}

impl SafetySplit {
    pub fn safe_accuracy(&self) -> Option<f64> {
        (self.safe_total > 0).then(|| self.safe_correct as f64 / self.safe_total as f64)
    }

    pub fn dependent_accuracy(&self) -> Option<f64> {
        (self.dependent_total > 0)
            .then(|| self.dependent_correct as f64 / self.dependent_total as f64)
    }

    fn add(&mut self, other: &SafetySplit) {
        self.safe_correct += other.safe_correct;
        self.safe_total += other.safe_total;
        self.dependent_correct += other.dependent_correct;
        self.dependent_total += other.dependent_total;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellReport {
    pub run: usize,
    pub fold: usize,
    pub metrics: Metrics,
    pub safety: SafetySplit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub classifier: ClassifierKind,
    pub cells: Vec<CellReport>,
    /// Means over the cells; optional metrics average the cells where they are defined.
    pub aggregate: Metrics,
    /// Pooled over all cells.
    pub safety: SafetySplit,
    /// Instances in the data set.
    pub n: usize,
    /// Features in the data set.
    pub k: usize,
    pub folds: usize,
    pub runs: usize,
    pub seed: u64,
    pub epsilon: f64,
}

/// Outcome of a single classifier on one test instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceOutcome {
    pub posterior: Vec<f64>,
    pub set: Vec<usize>,
    pub truth: usize,
}

/// Per-instance outcomes into metrics. `set` is the singleton argmax for
/// determinate classifiers.
pub fn score(outcomes: &[InstanceOutcome]) -> (Metrics, SafetySplit) {
    let posteriors: Vec<Vec<f64>> = outcomes.iter().map(|o| o.posterior.clone()).collect();
    let sets: Vec<Vec<usize>> = outcomes.iter().map(|o| o.set.clone()).collect();
    let truths: Vec<usize> = outcomes.iter().map(|o| o.truth).collect();
    let n = truths.len();
    let mut safety = SafetySplit::default();
    let mut correct = 0;
    for o in outcomes {
        let hit = argmax(&o.posterior) == o.truth;
        correct += usize::from(hit);
        if o.set.len() == 1 {
            safety.safe_total += 1;
            safety.safe_correct += usize::from(hit);
        } else {
            safety.dependent_total += 1;
            safety.dependent_correct += usize::from(hit);
        }
    }
    let cm = credal_metrics(&sets, &truths);
    let metrics = Metrics {
        accuracy: correct as f64 / n as f64,
        brier: brier(&posteriors, &truths),
        determinacy: cm.determinacy,
        single_accuracy: cm.single_accuracy,
        set_accuracy: cm.set_accuracy,
        output_size: cm.output_size,
        discounted_accuracy: discounted_accuracy(&sets, &truths),
        u65: mean_utility(&sets, &truths, Utility::U65),
        u80: mean_utility(&sets, &truths, Utility::U80),
        n_test: n,
    };
    (metrics, safety)
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    sum / count as f64
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, count) = values
        .flatten()
        .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Mean over cells of every metric.
pub fn aggregate(cells: &[Metrics]) -> Metrics {
    Metrics {
        accuracy: mean(cells.iter().map(|m| m.accuracy)),
        brier: mean(cells.iter().map(|m| m.brier)),
        determinacy: mean(cells.iter().map(|m| m.determinacy)),
        single_accuracy: mean_defined(cells.iter().map(|m| m.single_accuracy)),
        set_accuracy: mean_defined(cells.iter().map(|m| m.set_accuracy)),
        output_size: mean_defined(cells.iter().map(|m| m.output_size)),
        discounted_accuracy: mean(cells.iter().map(|m| m.discounted_accuracy)),
        u65: mean(cells.iter().map(|m| m.u65)),
        u80: mean(cells.iter().map(|m| m.u80)),
        n_test: cells.iter().map(|m| m.n_test).sum(),
    }
}

/// Fits every requested classifier on `train` (imputation and
/// discretization included) and returns per-classifier outcomes on `test`.
pub fn run_split(
    table: &RawTable,
    train: &[usize],
    test: &[usize],
    classifiers: &[ClassifierKind],
    settings: EnsembleSettings,
    seed: u64,
) -> Result<Vec<Vec<InstanceOutcome>>> {
    let imputed = Imputer::fit(table, train)?.apply(table);
    let disc = Discretizer::fit(&imputed, train)?;
    let train_ds = disc.transform_rows(&imputed, train)?;
    let test_ds = disc.transform_rows(&imputed, test)?;
    let ensemble = Ensemble::fit(&train_ds, settings);
    let credal = if classifiers.iter().any(|c| c.credal().is_some()) {
        Some(CredalEnsemble::new(&ensemble, seed)?)
    } else {
        None
    };

    let mut out: Vec<Vec<InstanceOutcome>> =
        vec![Vec::with_capacity(test.len()); classifiers.len()];
    for (truth, x) in test_ds.instances() {
        let posteriors = ensemble.posteriors(x);
        for (slot, &kind) in out.iter_mut().zip(classifiers) {
            let outcome = match (kind.credal(), &credal) {
                (Some(variant), Some(cred)) => {
                    let p = cred.predict_from(variant, &posteriors)?;
                    InstanceOutcome {
                        posterior: p.posterior,
                        set: p.classes,
                        truth,
                    }
                }
                _ => {
                    let posterior = ensemble.combine(kind.determinate(), &posteriors);
                    InstanceOutcome {
                        set: vec![argmax(&posterior)],
                        posterior,
                        truth,
                    }
                }
            };
            slot.push(outcome);
        }
    }
    Ok(out)
}

/// Runs every (run, fold) cell of `plan` in parallel and aggregates in
/// plan order, so the result does not depend on scheduling.
pub fn cross_validate(
    table: &RawTable,
    plan: &FoldPlan,
    classifiers: &[ClassifierKind],
    settings: EnsembleSettings,
    seed: u64,
) -> Result<Vec<EvalReport>> {
    if classifiers.is_empty() {
        return Err(Error::Config("no classifiers requested".into()));
    }
    if plan.is_empty() {
        return Err(Error::Config("empty fold plan".into()));
    }
    let cells: Vec<Vec<(Metrics, SafetySplit)>> = plan
        .splits
        .par_iter()
        .map(|split| {
            let outcomes = run_split(
                table,
                &split.train,
                &split.test,
                classifiers,
                settings,
                seed,
            )?;
            Ok(outcomes.iter().map(|o| score(o)).collect())
        })
        .collect::<Result<_>>()?;

    let k = table.feature_columns().len();
    Ok(classifiers
        .iter()
        .enumerate()
        .map(|(c, &classifier)| {
            let cell_reports: Vec<CellReport> = plan
                .splits
                .iter()
                .zip(&cells)
                .map(|(split, row)| CellReport {
                    run: split.run,
                    fold: split.fold,
                    metrics: row[c].0,
                    safety: row[c].1,
                })
                .collect();
            let metrics: Vec<Metrics> = cell_reports.iter().map(|r| r.metrics).collect();
            let mut safety = SafetySplit::default();
            for r in &cell_reports {
                safety.add(&r.safety);
            }
            EvalReport {
                classifier,
                aggregate: aggregate(&metrics),
                cells: cell_reports,
                safety,
                n: table.n_rows(),
                k,
                folds: plan.folds,
                runs: plan.runs,
                seed,
                epsilon: settings.epsilon,
            }
        })
        .collect())
}
