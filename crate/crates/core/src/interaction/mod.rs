//! Univariate stratification and the log-odds interaction decomposition.
//!
//! A pairwise interaction is `L_bi − (L_u1 + L_u2)`. A triple interaction
//! subtracts the three univariate logits and the three pairwise interactions
//! from `L_multi`. Both are linear in condition logits, which is how the
//! permutation test recomputes them: see [`Contrast`].

pub mod bucket;
pub mod permutation;
pub mod stratify;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::{Ledger, StatsOptions};
use crate::prompt_space::SemanticConfig;

pub use bucket::{classify_bucket, Bucket, Sign};
pub use permutation::{permutation_test, permutation_test_contrast, PermutationOutcome, MIN_ITERATIONS};
pub use stratify::{binomial_two_sided_p, stratify, Tier, TierAssignment};

pub fn pairwise_interaction(l_bi: f64, l_u1: f64, l_u2: f64) -> f64 {
    l_bi - (l_u1 + l_u2)
}

pub fn triple_interaction(l_multi: f64, l_u: [f64; 3], i_pairs: [f64; 3]) -> f64 {
    l_multi - l_u.iter().sum::<f64>() - i_pairs.iter().sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    Pairwise,
    Triple,
}

/// Which ledger conditions enter one interaction term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionSpec {
    pub order: Order,
    pub composite: String,
    /// Descriptor ids of the composite, in axis order.
    pub descriptors: Vec<String>,
    /// Univariate condition ids, aligned with `descriptors`.
    pub univariates: Vec<String>,
    /// Pairwise condition ids for a triple (pairs (0,1), (0,2), (1,2)); empty
    /// for a pairwise spec.
    pub pairs: Vec<String>,
}

impl InteractionSpec {
    pub fn for_config(config: &SemanticConfig) -> Result<Self> {
        let populated: Vec<_> = config.populated().collect();
        let order = match populated.len() {
            2 => Order::Pairwise,
            3 => Order::Triple,
            n => {
                return Err(Error::MalformedConfig(format!(
                    "interaction needs a composite of arity 2 or 3, got {n}"
                )))
            }
        };
        let univariates = populated
            .iter()
            .map(|d| SemanticConfig::univariate(d).condition_id())
            .collect();
        let pairs = if order == Order::Triple {
            [(0, 1), (0, 2), (1, 2)]
                .into_iter()
                .map(|(i, j)| {
                    SemanticConfig::from_descriptors([populated[i], populated[j]])
                        .expect("distinct axes")
                        .condition_id()
                })
                .collect()
        } else {
            Vec::new()
        };
        Ok(InteractionSpec {
            order,
            composite: config.condition_id(),
            descriptors: populated.iter().map(|d| d.id.clone()).collect(),
            univariates,
            pairs,
        })
    }

    /// Every condition the term depends on: composite, univariates, pairs.
    pub fn conditions(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.composite.as_str())
            .chain(self.univariates.iter().map(String::as_str))
            .chain(self.pairs.iter().map(String::as_str))
    }

    /// The term as signed logit coefficients. Expanding the triple formula,
    /// each univariate enters once negatively and twice positively through
    /// the pair terms, for a net +1.
    pub fn contrast(&self) -> Contrast {
        let mut c = Contrast::default();
        c.add(&self.composite, 1.0);
        match self.order {
            Order::Pairwise => {
                for u in &self.univariates {
                    c.add(u, -1.0);
                }
            }
            Order::Triple => {
                for u in &self.univariates {
                    c.add(u, 1.0);
                }
                for p in &self.pairs {
                    c.add(p, -1.0);
                }
            }
        }
        c
    }

    /// Computes the term from ledger logits by the nested formulas.
    pub fn evaluate(&self, ledger: &Ledger, opts: &StatsOptions) -> Result<f64> {
        let logit = |id: &str| ledger.condition_stats(id, opts).map(|s| s.logit);
        let l = logit(&self.composite)?;
        let lu = self
            .univariates
            .iter()
            .map(|u| logit(u))
            .collect::<Result<Vec<_>>>()?;
        match self.order {
            Order::Pairwise => Ok(pairwise_interaction(l, lu[0], lu[1])),
            Order::Triple => {
                let mut ip = [0.0; 3];
                for (slot, (p, (i, j))) in ip
                    .iter_mut()
                    .zip(self.pairs.iter().zip([(0, 1), (0, 2), (1, 2)]))
                {
                    *slot = pairwise_interaction(logit(p)?, lu[i], lu[j]);
                }
                Ok(triple_interaction(l, [lu[0], lu[1], lu[2]], ip))
            }
        }
    }
}

/// A linear combination of condition logits, in first-mention order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Contrast {
    pub terms: Vec<(String, f64)>,
}

impl Contrast {
    pub fn add(&mut self, condition_id: &str, coefficient: f64) {
        match self.terms.iter_mut().find(|(id, _)| id == condition_id) {
            Some((_, c)) => *c += coefficient,
            None => self.terms.push((condition_id.to_string(), coefficient)),
        }
    }

    /// The contrast whose value is the mean of the members' values.
    pub fn mean<'a>(members: impl IntoIterator<Item = &'a Contrast>) -> Contrast {
        let members: Vec<&Contrast> = members.into_iter().collect();
        let mut out = Contrast::default();
        let scale = 1.0 / members.len().max(1) as f64;
        for m in &members {
            for (id, c) in &m.terms {
                out.add(id, c * scale);
            }
        }
        out
    }

    pub fn evaluate(&self, ledger: &Ledger, opts: &StatsOptions) -> Result<f64> {
        self.terms.iter().try_fold(0.0, |acc, (id, c)| {
            Ok(acc + c * ledger.condition_stats(id, opts)?.logit)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionResult {
    pub spec: InteractionSpec,
    pub i_value: f64,
    pub p_value: f64,
    pub bucket: Bucket,
    pub sign: Sign,
}

/// Observed term, permutation p-value and bucket for one spec.
pub fn analyze(
    ledger: &Ledger,
    spec: &InteractionSpec,
    opts: &StatsOptions,
    iterations: usize,
    seed: u64,
) -> Result<InteractionResult> {
    let i_value = spec.evaluate(ledger, opts)?;
    let perm = permutation_test(ledger, spec, opts, iterations, seed)?;
    Ok(InteractionResult {
        spec: spec.clone(),
        i_value,
        p_value: perm.p_value,
        bucket: classify_bucket(i_value, perm.p_value),
        sign: Sign::of(i_value),
    })
}
