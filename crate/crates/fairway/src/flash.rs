//! Sequential model-based search over a discrete logistic-regression
//! hyperparameter grid. A CART regression tree fitted on the evaluated
//! configurations predicts the composite score of the unevaluated ones;
//! each round promotes the argmax-predicted configuration, evaluates it
//! for real, and burns one life when it fails to improve on the best
//! score seen so far.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::encode::EncodedDataset;
use crate::error::{Error, Result};
use crate::learner::cart::{cart_fit, cart_predict, CartParams};
use crate::learner::logistic::{lr_fit, lr_predict, LrHyper};
use crate::metrics::{confusion, measures, MeasureSet};

/// Discrete search space: the cross product of three ordered axes.
/// Each configuration is addressed by one integer and coded for the
/// surrogate as its vector of axis indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSpace {
    pub c_values: Vec<f64>,
    pub max_iter_values: Vec<usize>,
    pub tol_values: Vec<f64>,
}

impl Default for ConfigSpace {
    fn default() -> Self {
        ConfigSpace {
            c_values: vec![0.01, 0.1, 0.5, 1.0, 5.0, 10.0, 100.0],
            max_iter_values: vec![50, 100, 200, 500],
            tol_values: vec![1e-3, 1e-4, 1e-5],
        }
    }
}

impl ConfigSpace {
    pub fn size(&self) -> usize {
        self.c_values.len() * self.max_iter_values.len() * self.tol_values.len()
    }

    /// Axis indices of the integer-coded configuration.
    pub fn coded(&self, index: usize) -> Vec<f64> {
        let n_tol = self.tol_values.len();
        let n_mi = self.max_iter_values.len();
        let ic = index / (n_mi * n_tol);
        let im = (index / n_tol) % n_mi;
        let it = index % n_tol;
        vec![ic as f64, im as f64, it as f64]
    }

    pub fn hyper(&self, index: usize) -> LrHyper {
        let n_tol = self.tol_values.len();
        let n_mi = self.max_iter_values.len();
        LrHyper {
            c: self.c_values[index / (n_mi * n_tol)],
            max_iter: self.max_iter_values[(index / n_tol) % n_mi],
            tol: self.tol_values[index % n_tol],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.size() < 2 {
            return Err(Error::SpaceTooSmall(format!(
                "{} configurations (need at least 2)",
                self.size()
            )));
        }
        for i in 0..self.size() {
            self.hyper(i).validate()?;
        }
        Ok(())
    }
}

/// Scalarization weights: recall counts positively, false alarm, AOD and
/// EOD negatively.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    pub recall: f64,
    pub false_alarm: f64,
    pub aod: f64,
    pub eod: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        ObjectiveWeights {
            recall: 1.0,
            false_alarm: 1.0,
            aod: 1.0,
            eod: 1.0,
        }
    }
}

impl ObjectiveWeights {
    pub fn validate(&self) -> Result<()> {
        let all_zero = self.recall == 0.0
            && self.false_alarm == 0.0
            && self.aod == 0.0
            && self.eod == 0.0;
        if all_zero {
            return Err(Error::Config("objective weights are all zero".into()));
        }
        Ok(())
    }
}

/// w_recall * recall - w_far * false_alarm - w_aod * aod - w_eod * eod.
pub fn composite(m: &MeasureSet, w: &ObjectiveWeights) -> f64 {
    w.recall * m.recall - w.false_alarm * m.false_alarm - w.aod * m.aod - w.eod * m.eod
}

/// Train with one configuration and measure on the validation split with
/// respect to `attribute`.
pub fn evaluate_config(
    hyper: LrHyper,
    train: &EncodedDataset,
    validation: &EncodedDataset,
    attribute: &str,
) -> Result<MeasureSet> {
    let model = lr_fit(train.features(), train.labels(), hyper)?;
    let predictions = lr_predict(&model, validation.features())?;
    let group = validation.group(attribute)?;
    let c = confusion(validation.labels(), &predictions, &group)?;
    Ok(measures(&c))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlashBudget {
    pub initial_pool: usize,
    pub life: usize,
}

impl Default for FlashBudget {
    fn default() -> Self {
        FlashBudget {
            initial_pool: 20,
            life: 5,
        }
    }
}

/// One evaluated configuration in the search trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub config_index: usize,
    pub hyper: LrHyper,
    pub measures: MeasureSet,
    pub true_composite: f64,
    /// Surrogate prediction that promoted this configuration; absent for
    /// the seed pool.
    pub predicted_composite: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlashResult {
    pub best_index: usize,
    pub best: LrHyper,
    pub best_composite: f64,
    pub evaluations_used: usize,
    pub trace: Vec<TraceEntry>,
}

/// Run the search. Deterministic given identical inputs and seed.
#[allow(clippy::too_many_arguments)]
pub fn run_flash(
    space: &ConfigSpace,
    weights: &ObjectiveWeights,
    budget: FlashBudget,
    train: &EncodedDataset,
    validation: &EncodedDataset,
    attribute: &str,
    seed: u64,
) -> Result<FlashResult> {
    space.validate()?;
    weights.validate()?;
    if budget.initial_pool < 2 {
        return Err(Error::SpaceTooSmall(format!(
            "initial pool {} (need at least 2)",
            budget.initial_pool
        )));
    }
    if budget.life < 1 {
        return Err(Error::SpaceTooSmall("life must be at least 1".into()));
    }

    let size = space.size();
    let initial = budget.initial_pool.min(size);

    let mut order: Vec<usize> = (0..size).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut rest: Vec<usize> = order[initial..].to_vec();
    rest.sort_unstable();

    let mut seed_pool: Vec<usize> = order[..initial].to_vec();
    seed_pool.sort_unstable();

    let mut trace: Vec<TraceEntry> = Vec::new();
    let mut evaluate = |index: usize, predicted: Option<f64>, trace: &mut Vec<TraceEntry>| -> Result<f64> {
        let hyper = space.hyper(index);
        let m = evaluate_config(hyper, train, validation, attribute)?;
        let score = composite(&m, weights);
        trace.push(TraceEntry {
            config_index: index,
            hyper,
            measures: m,
            true_composite: score,
            predicted_composite: predicted,
        });
        Ok(score)
    };

    for &index in &seed_pool {
        evaluate(index, None, &mut trace)?;
    }

    let mut life = budget.life;
    while life > 0 && !rest.is_empty() {
        let xs: Vec<Vec<f64>> = trace.iter().map(|t| space.coded(t.config_index)).collect();
        let ys: Vec<f64> = trace.iter().map(|t| t.true_composite).collect();
        let surrogate = cart_fit(&xs, &ys, CartParams::default())?;

        // argmax of predicted composite; ties go to the lowest index
        // (rest is kept sorted)
        let mut best_pos = 0usize;
        let mut best_pred = f64::NEG_INFINITY;
        for (pos, &index) in rest.iter().enumerate() {
            let pred = cart_predict(&surrogate, &space.coded(index))?;
            if pred > best_pred {
                best_pred = pred;
                best_pos = pos;
            }
        }
        let index = rest.remove(best_pos);

        let best_so_far = trace
            .iter()
            .map(|t| t.true_composite)
            .fold(f64::NEG_INFINITY, f64::max);
        let score = evaluate(index, Some(best_pred), &mut trace)?;
        if score < best_so_far {
            life -= 1;
        }
    }

    // best true composite; ties broken by lowest configuration index
    let best_entry = trace
        .iter()
        .max_by(|a, b| {
            a.true_composite
                .partial_cmp(&b.true_composite)
                .unwrap()
                .then(b.config_index.cmp(&a.config_index))
        })
        .expect("trace is non-empty");

    Ok(FlashResult {
        best_index: best_entry.config_index,
        best: best_entry.hyper,
        best_composite: best_entry.true_composite,
        evaluations_used: trace.len(),
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composite_arithmetic() {
        let w = ObjectiveWeights::default();
        let perfect = MeasureSet {
            recall: 1.0,
            false_alarm: 0.0,
            aod: 0.0,
            eod: 0.0,
        };
        assert_eq!(composite(&perfect, &w), 1.0);

        let a = MeasureSet {
            recall: 0.5,
            false_alarm: 0.5,
            aod: 0.0,
            eod: 0.0,
        };
        let b = MeasureSet {
            recall: 0.5,
            false_alarm: 0.0,
            aod: 0.5,
            eod: 0.0,
        };
        assert_eq!(composite(&a, &w), composite(&b, &w));
        assert_eq!(composite(&a, &w), 0.0);

        let weighted = ObjectiveWeights {
            recall: 1.0,
            false_alarm: 1.0,
            aod: 2.0,
            eod: 2.0,
        };
        let m = MeasureSet {
            recall: 0.6,
            false_alarm: 0.1,
            aod: 0.05,
            eod: 0.1,
        };
        assert!((composite(&m, &weighted) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn coded_round_trip() {
        let space = ConfigSpace::default();
        assert_eq!(space.size(), 84);
        for index in [0usize, 1, 11, 12, 41, 83] {
            let coded = space.coded(index);
            let n_tol = space.tol_values.len();
            let n_mi = space.max_iter_values.len();
            let back = coded[0] as usize * n_mi * n_tol + coded[1] as usize * n_tol + coded[2] as usize;
            assert_eq!(back, index);
        }
        let h = space.hyper(0);
        assert_eq!(h.c, 0.01);
        assert_eq!(h.max_iter, 50);
        assert_eq!(h.tol, 1e-3);
        let h = space.hyper(83);
        assert_eq!(h.c, 100.0);
        assert_eq!(h.max_iter, 500);
        assert_eq!(h.tol, 1e-5);
    }

    #[test]
    fn weights_all_zero_rejected() {
        let w = ObjectiveWeights {
            recall: 0.0,
            false_alarm: 0.0,
            aod: 0.0,
            eod: 0.0,
        };
        assert!(w.validate().is_err());
    }

    #[test]
    fn tiny_space_rejected() {
        let space = ConfigSpace {
            c_values: vec![1.0],
            max_iter_values: vec![100],
            tol_values: vec![1e-4],
        };
        assert!(matches!(
            space.validate(),
            Err(Error::SpaceTooSmall(_))
        ));
    }
}
