//! Determinate SPODE ensembles: AODE (arithmetic mean), BMA-AODE
//! (conditional-likelihood weights with pruning) and COMP-AODE
//! (normalized compression coefficients against the null model).

use std::f64::consts::LN_10;

use crate::dataset::Dataset;
use crate::mass::{mixture, normalize};
use crate::spode::{
    conditional_log_likelihood, fit_all_spodes, fit_null, ClassPosterior, NullModel, SpodeModel,
};

/// `ln(10^4)`: models whose likelihood is below `L_max / 10^4` are pruned.
pub const DEFAULT_PRUNE_LOG_RATIO: f64 = 4.0 * LN_10;

pub const DEFAULT_EPSILON: f64 = 0.01;

/// Sufficient statistics shared by every weighting scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleScores {
    /// Conditional log-likelihood of each SPODE on its training data.
    pub spode_ll: Vec<f64>,
    /// Conditional log-likelihood of the null model.
    pub null_ll: f64,
    /// Class entropy in nats.
    pub class_entropy: f64,
    /// Training instance count.
    pub n: usize,
}

/// Normalized `exp(log_values)`, computed after subtracting the maximum.
pub fn robust_exp(log_values: &[f64]) -> Vec<f64> {
    assert!(
        !log_values.is_empty(),
        "robust_exp needs at least one value"
    );
    let max = log_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = log_values.iter().map(|&l| (l - max).exp()).collect();
    normalize(&mut out);
    out
}

/// Which models survive likelihood pruning: `LL_j >= LL_max - prune_log_ratio`.
pub fn bma_survivors(spode_ll: &[f64], prune_log_ratio: f64) -> Vec<bool> {
    let max = spode_ll.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    spode_ll
        .iter()
        .map(|&ll| ll >= max - prune_log_ratio)
        .collect()
}

/// Posterior model weights under a uniform prior, pruned models at zero.
pub fn bma_weights(spode_ll: &[f64], prune_log_ratio: f64) -> Vec<f64> {
    let keep = bma_survivors(spode_ll, prune_log_ratio);
    let logs: Vec<f64> = spode_ll
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(&ll, _)| ll)
        .collect();
    let mut survivors = robust_exp(&logs).into_iter();
    keep.iter()
        .map(|&k| if k { survivors.next().unwrap() } else { 0.0 })
        .collect()
}

/// Raw compression coefficient of a model with log-likelihood `ll` and
/// prior `exp(log_prior)`, relative to the null model with prior `epsilon`:
/// `1 - (ll + log_prior) / (null_ll + ln epsilon)`.
pub fn compression_coefficient(ll: f64, log_prior: f64, null_ll: f64, epsilon: f64) -> f64 {
    1.0 - (ll + log_prior) / (null_ll + epsilon.ln())
}

/// Raw compression coefficients under the single prior that gives the null
/// model `epsilon` and every SPODE `(1 - epsilon) / k`.
pub fn raw_compression(spode_ll: &[f64], null_ll: f64, epsilon: f64) -> Vec<f64> {
    let log_prior = ((1.0 - epsilon) / spode_ll.len() as f64).ln();
    spode_ll
        .iter()
        .map(|&ll| compression_coefficient(ll, log_prior, null_ll, epsilon))
        .collect()
}

/// Normalizes the positive coefficients; `None` when no model is feasible.
pub fn normalized_compression(pi: &[f64]) -> Option<Vec<f64>> {
    let total: f64 = pi.iter().filter(|&&p| p > 0.0).sum();
    if total <= 0.0 {
        return None;
    }
    Some(
        pi.iter()
            .map(|&p| if p > 0.0 { p / total } else { 0.0 })
            .collect(),
    )
}

/// Arithmetic mean of per-model posteriors.
pub fn average_posteriors(posteriors: &[Vec<f64>]) -> Vec<f64> {
    let w = vec![1.0 / posteriors.len() as f64; posteriors.len()];
    mixture(posteriors, &w)
}

pub fn spode_posteriors(models: &[SpodeModel], features: &[usize]) -> Vec<Vec<f64>> {
    models.iter().map(|m| m.posterior(features)).collect()
}

pub fn aode_predict(models: &[SpodeModel], features: &[usize]) -> Vec<f64> {
    average_posteriors(&spode_posteriors(models, features))
}

pub fn bma_predict(models: &[SpodeModel], weights: &[f64], features: &[usize]) -> Vec<f64> {
    mixture(&spode_posteriors(models, features), weights)
}

/// Compression-weighted mixture; without feasible models the null
/// model's class marginal is returned.
pub fn comp_predict(
    models: &[SpodeModel],
    weights: Option<&[f64]>,
    null: &NullModel,
    features: &[usize],
) -> Vec<f64> {
    match weights {
        Some(w) => mixture(&spode_posteriors(models, features), w),
        None => null.marginal().to_vec(),
    }
}

/// Single-prior classifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeterminateKind {
    Aode,
    BmaAode,
    CompAode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSettings {
    pub epsilon: f64,
    pub prune_log_ratio: f64,
}

impl Default for EnsembleSettings {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            prune_log_ratio: DEFAULT_PRUNE_LOG_RATIO,
        }
    }
}

/// All `k` SPODEs and the null model fitted on one training set, with the
/// derived BMA and compression weights.
#[derive(Debug, Clone)]
pub struct Ensemble {
    spodes: Vec<SpodeModel>,
    null: NullModel,
    scores: EnsembleScores,
    settings: EnsembleSettings,
    bma_weights: Vec<f64>,
    raw_compression: Vec<f64>,
    comp_weights: Option<Vec<f64>>,
}

impl Ensemble {
    pub fn fit(train: &Dataset, settings: EnsembleSettings) -> Self {
        let spodes = fit_all_spodes(train);
        let null = fit_null(train);
        let scores = EnsembleScores {
            spode_ll: spodes
                .iter()
                .map(|m| conditional_log_likelihood(m, train))
                .collect(),
            null_ll: conditional_log_likelihood(&null, train),
            class_entropy: null.class_entropy(),
            n: train.n(),
        };
        Self::from_parts(spodes, null, scores, settings)
    }

    pub fn from_parts(
        spodes: Vec<SpodeModel>,
        null: NullModel,
        scores: EnsembleScores,
        settings: EnsembleSettings,
    ) -> Self {
        let bma_weights = bma_weights(&scores.spode_ll, settings.prune_log_ratio);
        let raw = raw_compression(&scores.spode_ll, scores.null_ll, settings.epsilon);
        let comp_weights = normalized_compression(&raw);
        Self {
            spodes,
            null,
            scores,
            settings,
            bma_weights,
            raw_compression: raw,
            comp_weights,
        }
    }

    pub fn spodes(&self) -> &[SpodeModel] {
        &self.spodes
    }

    pub fn null(&self) -> &NullModel {
        &self.null
    }

    pub fn scores(&self) -> &EnsembleScores {
        &self.scores
    }

    pub fn settings(&self) -> EnsembleSettings {
        self.settings
    }

    pub fn k(&self) -> usize {
        self.spodes.len()
    }

    pub fn n_classes(&self) -> usize {
        self.null.n_classes()
    }

    pub fn bma_weights(&self) -> &[f64] {
        &self.bma_weights
    }

    pub fn raw_compression(&self) -> &[f64] {
        &self.raw_compression
    }

    /// `None` when every raw compression coefficient is non-positive.
    pub fn comp_weights(&self) -> Option<&[f64]> {
        self.comp_weights.as_deref()
    }

    pub fn posteriors(&self, features: &[usize]) -> Vec<Vec<f64>> {
        spode_posteriors(&self.spodes, features)
    }

    /// Determinate prediction from precomputed SPODE posteriors.
    pub fn combine(&self, kind: DeterminateKind, posteriors: &[Vec<f64>]) -> Vec<f64> {
        match kind {
            DeterminateKind::Aode => average_posteriors(posteriors),
            DeterminateKind::BmaAode => mixture(posteriors, &self.bma_weights),
            DeterminateKind::CompAode => match &self.comp_weights {
                Some(w) => mixture(posteriors, w),
                None => self.null.marginal().to_vec(),
            },
        }
    }

    pub fn predict(&self, kind: DeterminateKind, features: &[usize]) -> Vec<f64> {
        self.combine(kind, &self.posteriors(features))
    }
}
