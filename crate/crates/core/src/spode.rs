//! SuperParent-One-Dependence Estimators and the no-arc null model.
//!
//! Every conditional distribution is the posterior mean under a symmetric
//! Dirichlet prior with total mass 1 per parent configuration:
//! `P(x | pa) = (N(x, pa) + 1/|X|) / (N(pa) + 1)`.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::mass::{log_sum_exp, softmax};

/// Conditional probability table, one mass function per parent configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    states: usize,
    parents: usize,
    probs: Vec<f64>,
    log_probs: Vec<f64>,
}

impl Cpt {
    /// Smoothed table from counts laid out as `counts[parent * states + state]`.
    pub fn from_counts(states: usize, parents: usize, counts: &[usize]) -> Self {
        assert_eq!(counts.len(), states * parents);
        let alpha = 1.0 / states as f64;
        let mut probs = Vec::with_capacity(counts.len());
        for column in counts.chunks_exact(states) {
            let total: usize = column.iter().sum();
            let denom = total as f64 + 1.0;
            probs.extend(column.iter().map(|&c| (c as f64 + alpha) / denom));
        }
        Self::from_valid(states, parents, probs)
    }

    /// Table from explicit probabilities; each column must be a strictly
    /// positive mass function.
    pub fn from_probs(states: usize, parents: usize, probs: Vec<f64>) -> Result<Self> {
        if states == 0 || probs.len() != states * parents {
            return Err(Error::Config(format!(
                "expected {} probabilities, got {}",
                states * parents,
                probs.len()
            )));
        }
        for (p, column) in probs.chunks_exact(states).enumerate() {
            let total: f64 = column.iter().sum();
            if (total - 1.0).abs() > 1e-12 || column.iter().any(|&v| !(v > 0.0)) {
                return Err(Error::Config(format!(
                    "column {p} is not a positive mass function"
                )));
            }
        }
        Ok(Self::from_valid(states, parents, probs))
    }

    fn from_valid(states: usize, parents: usize, probs: Vec<f64>) -> Self {
        let log_probs = probs.iter().map(|p| p.ln()).collect();
        Self {
            states,
            parents,
            probs,
            log_probs,
        }
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn parents(&self) -> usize {
        self.parents
    }

    pub fn prob(&self, state: usize, parent: usize) -> f64 {
        self.probs[parent * self.states + state]
    }

    pub fn ln_prob(&self, state: usize, parent: usize) -> f64 {
        self.log_probs[parent * self.states + state]
    }

    pub fn column(&self, parent: usize) -> &[f64] {
        &self.probs[parent * self.states..(parent + 1) * self.states]
    }
}

/// Anything that returns a class posterior for a coded feature vector.
pub trait ClassPosterior {
    fn n_classes(&self) -> usize;

    /// Natural-log posterior over classes.
    fn log_posterior(&self, features: &[usize]) -> Vec<f64>;

    fn posterior(&self, features: &[usize]) -> Vec<f64> {
        softmax(&self.log_posterior(features))
    }
}

/// SPODE with super-parent `A_j`:
/// `P(c, a) = P(c) P(a_j | c) prod_{l != j} P(a_l | a_j, c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpodeModel {
    super_parent: usize,
    class_prior: Cpt,
    parent_given_class: Cpt,
    /// `children[l]` is `P(A_l | A_j, C)` with parent index `c * |A_j| + a_j`;
    /// `None` at the super-parent.
    children: Vec<Option<Cpt>>,
}

impl SpodeModel {
    /// Assembles a model from explicit tables, checking their shapes.
    pub fn from_tables(
        super_parent: usize,
        class_prior: Cpt,
        parent_given_class: Cpt,
        children: Vec<Option<Cpt>>,
    ) -> Result<Self> {
        let l = class_prior.states();
        let v = parent_given_class.states();
        let shape_ok = class_prior.parents() == 1
            && parent_given_class.parents() == l
            && super_parent < children.len()
            && children.iter().enumerate().all(|(f, c)| match c {
                None => f == super_parent,
                Some(c) => f != super_parent && c.parents() == l * v,
            });
        if !shape_ok {
            return Err(Error::Config("inconsistent SPODE table shapes".into()));
        }
        Ok(Self {
            super_parent,
            class_prior,
            parent_given_class,
            children,
        })
    }

    pub fn super_parent(&self) -> usize {
        self.super_parent
    }

    pub fn class_prior(&self) -> &Cpt {
        &self.class_prior
    }

    pub fn parent_given_class(&self) -> &Cpt {
        &self.parent_given_class
    }

    /// `P(A_l | A_j, C)`, or `None` for the super-parent itself.
    pub fn child(&self, feature: usize) -> Option<&Cpt> {
        self.children[feature].as_ref()
    }

    pub fn n_features(&self) -> usize {
        self.children.len()
    }

    /// `ln P(c, a)` for every class.
    pub fn log_joint(&self, features: &[usize]) -> Vec<f64> {
        let j = self.super_parent;
        let aj = features[j];
        let v = self.parent_given_class.states();
        (0..self.class_prior.states())
            .map(|c| {
                let mut lp =
                    self.class_prior.ln_prob(c, 0) + self.parent_given_class.ln_prob(aj, c);
                for (l, child) in self.children.iter().enumerate() {
                    if let Some(child) = child {
                        lp += child.ln_prob(features[l], c * v + aj);
                    }
                }
                lp
            })
            .collect()
    }
}

impl ClassPosterior for SpodeModel {
    fn n_classes(&self) -> usize {
        self.class_prior.states()
    }

    fn log_posterior(&self, features: &[usize]) -> Vec<f64> {
        let joint = self.log_joint(features);
        let norm = log_sum_exp(&joint);
        joint.into_iter().map(|l| l - norm).collect()
    }
}

/// Fits the SPODE whose super-parent is feature `super_parent`.
pub fn fit_spode(ds: &Dataset, super_parent: usize) -> Result<SpodeModel> {
    if super_parent >= ds.k() {
        return Err(Error::Config(format!(
            "super-parent {super_parent} out of range for {} features",
            ds.k()
        )));
    }
    let l = ds.n_classes();
    let cards = ds.cardinalities();
    let v = cards[super_parent];

    let class_counts = ds.class_counts();
    let mut parent_counts = vec![0usize; l * v];
    let mut child_counts: Vec<Vec<usize>> = cards
        .iter()
        .enumerate()
        .map(|(f, &card)| {
            if f == super_parent {
                Vec::new()
            } else {
                vec![0usize; l * v * card]
            }
        })
        .collect();
    for (c, x) in ds.instances() {
        let aj = x[super_parent];
        parent_counts[c * v + aj] += 1;
        for (f, counts) in child_counts.iter_mut().enumerate() {
            if f != super_parent {
                counts[(c * v + aj) * cards[f] + x[f]] += 1;
            }
        }
    }
    let children = child_counts
        .iter()
        .enumerate()
        .map(|(f, counts)| (f != super_parent).then(|| Cpt::from_counts(cards[f], l * v, counts)))
        .collect();
    Ok(SpodeModel {
        super_parent,
        class_prior: Cpt::from_counts(l, 1, &class_counts),
        parent_given_class: Cpt::from_counts(v, l, &parent_counts),
        children,
    })
}

/// Fits all `k` SPODEs, one per super-parent.
pub fn fit_all_spodes(ds: &Dataset) -> Vec<SpodeModel> {
    (0..ds.k())
        .map(|j| fit_spode(ds, j).expect("super-parent index in range"))
        .collect()
}

/// Network without arcs: predicts the smoothed class marginal everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct NullModel {
    marginal: Cpt,
    entropy: f64,
}

impl NullModel {
    pub fn marginal(&self) -> &[f64] {
        self.marginal.column(0)
    }

    /// Class entropy (nats) of the unsmoothed training frequencies.
    pub fn class_entropy(&self) -> f64 {
        self.entropy
    }
}

impl ClassPosterior for NullModel {
    fn n_classes(&self) -> usize {
        self.marginal.states()
    }

    fn log_posterior(&self, _features: &[usize]) -> Vec<f64> {
        (0..self.marginal.states())
            .map(|c| self.marginal.ln_prob(c, 0))
            .collect()
    }

    fn posterior(&self, _features: &[usize]) -> Vec<f64> {
        self.marginal.column(0).to_vec()
    }
}

pub fn fit_null(ds: &Dataset) -> NullModel {
    let counts = ds.class_counts();
    NullModel {
        marginal: Cpt::from_counts(ds.n_classes(), 1, &counts),
        entropy: class_entropy(&counts),
    }
}

/// Entropy in nats of the empirical distribution given by `counts`.
pub fn class_entropy(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.ln()
        })
        .sum()
}

/// `sum_i ln P(c_i | a_i)` over the instances of `ds`.
pub fn conditional_log_likelihood<M: ClassPosterior + ?Sized>(model: &M, ds: &Dataset) -> f64 {
    ds.instances().map(|(c, x)| model.log_posterior(x)[c]).sum()
}
