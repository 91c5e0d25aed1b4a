//! Credal ensembles: BMA-AODE* and COMP-AODE*.
//!
//! Both keep every prior over the SPODEs with `P(s_j) >= eps`. A class `c'`
//! dominates `c''` when the ratio of their mixture probabilities exceeds one
//! for every prior in the set, and the prediction is the set of classes no
//! other class dominates.

use crate::ensemble::{bma_survivors, DeterminateKind, Ensemble};
use crate::error::{Error, Result};
use crate::mass::argmax;
use crate::optimize::{
    ratio_min_exceeds, solve_fractional, FractionalLp, OptimizeError, RatioProgram,
    DOMINANCE_MARGIN,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CredalVariant {
    BmaStar,
    CompStar,
}

impl CredalVariant {
    /// The single-prior classifier whose prior belongs to the credal set.
    pub fn counterpart(self) -> DeterminateKind {
        match self {
            CredalVariant::BmaStar => DeterminateKind::BmaAode,
            CredalVariant::CompStar => DeterminateKind::CompAode,
        }
    }
}

/// Lower bound `epsilon` on each SPODE prior; with `includes_null` the null
/// model also gets a fixed prior of `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CredalSpec {
    epsilon: f64,
    k: usize,
    includes_null: bool,
}

impl CredalSpec {
    pub fn new(epsilon: f64, k: usize, includes_null: bool) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::Config(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        if k == 0 {
            return Err(Error::Config("credal set over zero models".into()));
        }
        let models = k + usize::from(includes_null);
        if models as f64 * epsilon > 1.0 || (!includes_null && k as f64 * epsilon >= 1.0) {
            return Err(Error::Config(format!(
                "epsilon {epsilon} is too large for {k} models"
            )));
        }
        Ok(Self {
            epsilon,
            k,
            includes_null,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn includes_null(&self) -> bool {
        self.includes_null
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CredalPrediction {
    /// Non-dominated classes in increasing index order.
    pub classes: Vec<usize>,
    /// Posterior of the determinate counterpart.
    pub posterior: Vec<f64>,
    pub prior_dependent: bool,
    /// COMP-AODE* found no SPODE with positive upper compression and
    /// returned every class.
    pub no_feasible_model: bool,
}

impl CredalPrediction {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn contains(&self, class: usize) -> bool {
        self.classes.contains(&class)
    }
}

/// Maximality: removes every class that some other class dominates.
pub fn nondominated(
    n_classes: usize,
    mut dominates: impl FnMut(usize, usize) -> Result<bool>,
) -> Result<Vec<usize>> {
    let mut alive = vec![true; n_classes];
    for c1 in 0..n_classes {
        for c2 in 0..n_classes {
            if c1 == c2 || !alive[c2] {
                continue;
            }
            if dominates(c1, c2)? {
                alive[c2] = false;
            }
        }
    }
    Ok((0..n_classes).filter(|&c| alive[c]).collect())
}

/// BMA-AODE* credal set after pruning: the surviving models share
/// `1 - (k - k~) eps`, each with at least `eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct BmaCredalSet {
    models: Vec<usize>,
    likelihood: Vec<f64>,
    epsilon: f64,
    total: f64,
}

impl BmaCredalSet {
    pub fn new(spode_ll: &[f64], prune_log_ratio: f64, spec: &CredalSpec) -> Result<Self> {
        if spec.includes_null() || spec.k() != spode_ll.len() {
            return Err(Error::Config(
                "BMA credal set needs a CredalSpec over exactly the SPODEs".into(),
            ));
        }
        let keep = bma_survivors(spode_ll, prune_log_ratio);
        let models: Vec<usize> = (0..spode_ll.len()).filter(|&j| keep[j]).collect();
        let max = spode_ll.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let likelihood = models.iter().map(|&j| (spode_ll[j] - max).exp()).collect();
        let eps = spec.epsilon();
        let total = 1.0 - (spode_ll.len() - models.len()) as f64 * eps;
        Ok(Self {
            models,
            likelihood,
            epsilon: eps,
            total,
        })
    }

    pub fn models(&self) -> &[usize] {
        &self.models
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn program(&self, posteriors: &[Vec<f64>], c1: usize, c2: usize) -> FractionalLp {
        let (numerator, denominator) = self
            .models
            .iter()
            .zip(&self.likelihood)
            .map(|(&j, &l)| (posteriors[j][c1] * l, posteriors[j][c2] * l))
            .unzip();
        FractionalLp {
            numerator,
            numerator_constant: 0.0,
            denominator,
            denominator_constant: 0.0,
            lower_bound: self.epsilon,
            total: self.total,
        }
    }

    pub fn dominates(&self, posteriors: &[Vec<f64>], c1: usize, c2: usize) -> Result<bool> {
        let lp = self.program(posteriors, c1, c2);
        match solve_fractional(&lp) {
            Ok(sol) => Ok(sol.value > 1.0 + DOMINANCE_MARGIN),
            Err(OptimizeError::DenominatorNotPositive) => Ok(false),
            Err(e) => Err(e.into()),
        }
    }
}

/// Range of the raw compression coefficient of one SPODE over the credal set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressionInterval {
    pub lower: f64,
    pub upper: f64,
}

/// Bounds of each raw compression coefficient when the SPODE prior ranges
/// over `[eps, 1 - k eps]` and the null model keeps `eps`.
pub fn comp_upper_pi(
    spode_ll: &[f64],
    null_ll: f64,
    spec: &CredalSpec,
) -> Vec<CompressionInterval> {
    let eps = spec.epsilon();
    let z = null_ll + eps.ln();
    let top = (1.0 - spec.k() as f64 * eps).ln();
    spode_ll
        .iter()
        .map(|&ll| CompressionInterval {
            lower: 1.0 - (ll + eps.ln()) / z,
            upper: 1.0 - (ll + top) / z,
        })
        .collect()
}

/// COMP-AODE* credal set restricted to the SPODEs with positive upper
/// compression; the others keep prior `eps`, as does the null model.
#[derive(Debug, Clone, PartialEq)]
pub struct CompCredalSet {
    models: Vec<usize>,
    /// `ln eps + LL_0 - LL_j` for each feasible model.
    offsets: Vec<f64>,
    epsilon: f64,
    total: f64,
    seed: u64,
}

impl CompCredalSet {
    pub fn new(spode_ll: &[f64], null_ll: f64, spec: &CredalSpec, seed: u64) -> Result<Self> {
        if !spec.includes_null() || spec.k() != spode_ll.len() {
            return Err(Error::Config(
                "compression credal set needs a CredalSpec that includes the null model".into(),
            ));
        }
        let eps = spec.epsilon();
        let intervals = comp_upper_pi(spode_ll, null_ll, spec);
        let models: Vec<usize> = (0..spode_ll.len())
            .filter(|&j| intervals[j].upper > 0.0)
            .collect();
        let offsets = models
            .iter()
            .map(|&j| eps.ln() + null_ll - spode_ll[j])
            .collect();
        let total = 1.0 - (spode_ll.len() - models.len() + 1) as f64 * eps;
        Ok(Self {
            models,
            offsets,
            epsilon: eps,
            total,
            seed,
        })
    }

    pub fn models(&self) -> &[usize] {
        &self.models
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// `minimize (sum alpha_j ln y_j - a) / (sum beta_j ln y_j - b)` with
    /// `alpha_j = P(c'|x, s_j)`, `beta_j = P(c''|x, s_j)` and
    /// `a = sum alpha_j (ln eps + LL_0 - LL_j)`, `b` likewise.
    pub fn program(
        &self,
        posteriors: &[Vec<f64>],
        c1: usize,
        c2: usize,
    ) -> std::result::Result<RatioProgram, OptimizeError> {
        let alpha: Vec<f64> = self.models.iter().map(|&j| posteriors[j][c1]).collect();
        let beta: Vec<f64> = self.models.iter().map(|&j| posteriors[j][c2]).collect();
        let a = alpha.iter().zip(&self.offsets).map(|(x, o)| x * o).sum();
        let b = beta.iter().zip(&self.offsets).map(|(x, o)| x * o).sum();
        RatioProgram::new(alpha, beta, a, b, self.epsilon, self.total)
    }

    pub fn dominates(&self, posteriors: &[Vec<f64>], c1: usize, c2: usize) -> Result<bool> {
        if self.is_empty() {
            return Ok(false);
        }
        match self.program(posteriors, c1, c2) {
            Ok(rp) => Ok(ratio_min_exceeds(&rp, 1.0 + DOMINANCE_MARGIN, self.seed)),
            Err(OptimizeError::IndefiniteRatio) => Ok(false),
            Err(e) => Err(e.into()),
        }
    }
}

pub fn bma_dominates(
    c1: usize,
    c2: usize,
    posteriors: &[Vec<f64>],
    spode_ll: &[f64],
    prune_log_ratio: f64,
    spec: &CredalSpec,
) -> Result<bool> {
    BmaCredalSet::new(spode_ll, prune_log_ratio, spec)?.dominates(posteriors, c1, c2)
}

pub fn comp_dominates(
    c1: usize,
    c2: usize,
    posteriors: &[Vec<f64>],
    spode_ll: &[f64],
    null_ll: f64,
    spec: &CredalSpec,
    seed: u64,
) -> Result<bool> {
    CompCredalSet::new(spode_ll, null_ll, spec, seed)?.dominates(posteriors, c1, c2)
}

/// An ensemble together with both credal sets, built once per training set.
#[derive(Debug, Clone)]
pub struct CredalEnsemble<'a> {
    ensemble: &'a Ensemble,
    bma: BmaCredalSet,
    comp: CompCredalSet,
}

impl<'a> CredalEnsemble<'a> {
    pub fn new(ensemble: &'a Ensemble, seed: u64) -> Result<Self> {
        let settings = ensemble.settings();
        let scores = ensemble.scores();
        let k = ensemble.k();
        let bma = BmaCredalSet::new(
            &scores.spode_ll,
            settings.prune_log_ratio,
            &CredalSpec::new(settings.epsilon, k, false)?,
        )?;
        let comp = CompCredalSet::new(
            &scores.spode_ll,
            scores.null_ll,
            &CredalSpec::new(settings.epsilon, k, true)?,
            seed,
        )?;
        Ok(Self {
            ensemble,
            bma,
            comp,
        })
    }

    pub fn ensemble(&self) -> &Ensemble {
        self.ensemble
    }

    pub fn bma(&self) -> &BmaCredalSet {
        &self.bma
    }

    pub fn comp(&self) -> &CompCredalSet {
        &self.comp
    }

    pub fn predict(&self, variant: CredalVariant, features: &[usize]) -> Result<CredalPrediction> {
        let posteriors = self.ensemble.posteriors(features);
        self.predict_from(variant, &posteriors)
    }

    /// Prediction from precomputed SPODE posteriors.
    pub fn predict_from(
        &self,
        variant: CredalVariant,
        posteriors: &[Vec<f64>],
    ) -> Result<CredalPrediction> {
        let n_classes = self.ensemble.n_classes();
        let posterior = self.ensemble.combine(variant.counterpart(), posteriors);
        let (classes, no_feasible_model) = match variant {
            CredalVariant::BmaStar => (
                nondominated(n_classes, |c1, c2| self.bma.dominates(posteriors, c1, c2))?,
                false,
            ),
            CredalVariant::CompStar if self.comp.is_empty() => ((0..n_classes).collect(), true),
            CredalVariant::CompStar => (
                nondominated(n_classes, |c1, c2| self.comp.dominates(posteriors, c1, c2))?,
                false,
            ),
        };
        let best = argmax(&posterior);
        if !classes.contains(&best) {
            log::warn!(
                "{variant:?}: determinate argmax {best} is outside the non-dominated set {classes:?}"
            );
        }
        Ok(CredalPrediction {
            prior_dependent: classes.len() > 1,
            classes,
            posterior,
            no_feasible_model,
        })
    }
}

/// One-off credal prediction; prefer [`CredalEnsemble`] for many instances.
pub fn predict_credal(
    variant: CredalVariant,
    ensemble: &Ensemble,
    features: &[usize],
    seed: u64,
) -> Result<CredalPrediction> {
    CredalEnsemble::new(ensemble, seed)?.predict(variant, features)
}
