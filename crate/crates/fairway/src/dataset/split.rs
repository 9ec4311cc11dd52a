//! Seeded shuffling into train/validation/test and z-score standardization
//! of numeric feature columns using train-split statistics.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::encode::EncodedDataset;
use crate::error::{Error, Result};

pub const TRAIN_FRACTION: f64 = 0.70;
pub const VALIDATION_FRACTION: f64 = 0.15;
pub const MIN_ROWS: usize = 20;

/// Per-column affine transform `(x - mean) / std` fitted on the train
/// split's numeric feature columns. One-hot and protected indicator
/// columns are left untouched so they stay exactly 0/1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub columns: Vec<usize>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    fn fit(train: &EncodedDataset) -> Standardizer {
        let columns = train.numeric_columns().to_vec();
        let n = train.rows() as f64;
        let mut mean = Vec::with_capacity(columns.len());
        let mut std = Vec::with_capacity(columns.len());
        for &j in &columns {
            let col = train.features().column(j).to_owned();
            let m = col.sum() / n;
            let var = col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
            let s = var.sqrt();
            mean.push(m);
            std.push(if s > 0.0 { s } else { 1.0 });
        }
        Standardizer { columns, mean, std }
    }

    pub fn apply(&self, data: &EncodedDataset) -> EncodedDataset {
        let mut features: Array2<f64> = data.features().to_owned();
        for (k, &j) in self.columns.iter().enumerate() {
            for v in features.column_mut(j).iter_mut() {
                *v = (*v - self.mean[k]) / self.std[k];
            }
        }
        data.replace_features(features)
    }
}

/// Disjoint, exhaustive 70/15/15 partition of a shuffled dataset. The
/// numeric columns of all three members are standardized with the train
/// split's statistics; `*_rows` map each member's rows back to input rows.
#[derive(Debug, Clone)]
pub struct SplitTriple {
    pub train: EncodedDataset,
    pub validation: EncodedDataset,
    pub test: EncodedDataset,
    pub seed: u64,
    pub fractions: (f64, f64, f64),
    pub standardizer: Standardizer,
    pub train_rows: Vec<usize>,
    pub validation_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
}

/// Shuffle rows with a PRNG seeded from `seed`, cut at the 70% / 85%
/// boundaries (sizes `floor(0.70 n)`, `floor(0.15 n)`, remainder), then
/// standardize. The same `(data, seed)` always yields the same triple.
pub fn split(data: &EncodedDataset, seed: u64) -> Result<SplitTriple> {
    let n = data.rows();
    if n < MIN_ROWS {
        return Err(Error::TooFewRows { got: n, need: MIN_ROWS });
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let n_train = (n as f64 * TRAIN_FRACTION).floor() as usize;
    let n_validation = (n as f64 * VALIDATION_FRACTION).floor() as usize;
    let train_rows = order[..n_train].to_vec();
    let validation_rows = order[n_train..n_train + n_validation].to_vec();
    let test_rows = order[n_train + n_validation..].to_vec();

    let train_raw = data.select_rows(&train_rows);
    let standardizer = Standardizer::fit(&train_raw);

    Ok(SplitTriple {
        train: standardizer.apply(&train_raw),
        validation: standardizer.apply(&data.select_rows(&validation_rows)),
        test: standardizer.apply(&data.select_rows(&test_rows)),
        seed,
        fractions: (TRAIN_FRACTION, VALIDATION_FRACTION, 1.0 - TRAIN_FRACTION - VALIDATION_FRACTION),
        standardizer,
        train_rows,
        validation_rows,
        test_rows,
    })
}
