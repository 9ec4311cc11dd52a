//! Ambiguity filtering: train one logistic model per protected group (the
//! group models never see the protected indicator column), compare their
//! class predictions on every training row, and drop rows on which the
//! models disagree.

use serde::{Deserialize, Serialize};

use crate::dataset::encode::EncodedDataset;
use crate::error::{Error, Result};
use crate::learner::logistic::{lr_fit, lr_predict, LrHyper};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterMode {
    Single,
    Joint,
}

impl std::fmt::Display for FilterMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FilterMode::Single => write!(f, "single"),
            FilterMode::Joint => write!(f, "joint"),
        }
    }
}

/// Result of one filtering pass over a training set.
#[derive(Debug, Clone)]
pub struct FilterOutcome {
    pub retained: EncodedDataset,
    pub dropped_indices: Vec<usize>,
    pub dropped_fraction: f64,
    pub mode: FilterMode,
}

fn group_rows(indicator: &[u8], want: u8) -> Vec<usize> {
    indicator
        .iter()
        .enumerate()
        .filter(|(_, &g)| g == want)
        .map(|(i, _)| i)
        .collect()
}

fn check_group(
    data: &EncodedDataset,
    rows: &[usize],
    attribute: &str,
    group_name: &str,
) -> Result<()> {
    let ones = rows.iter().filter(|&&r| data.labels()[r] == 1).count();
    let zeros = rows.len() - ones;
    if ones < 2 || zeros < 2 {
        return Err(Error::DegenerateGroup {
            attribute: attribute.to_string(),
            group: group_name.to_string(),
            reason: format!("{} favorable / {} unfavorable rows (need 2 of each)", ones, zeros),
        });
    }
    Ok(())
}

/// Fit one model per row subset on `reduced` (protected columns already
/// removed) and return each model's predictions over all rows.
fn group_predictions(
    reduced: &EncodedDataset,
    groups: &[Vec<usize>],
    hyper: &LrHyper,
) -> Result<Vec<Vec<u8>>> {
    let mut all = Vec::with_capacity(groups.len());
    for rows in groups {
        let sub = reduced.select_rows(rows);
        let model = lr_fit(sub.features(), sub.labels(), *hyper)?;
        all.push(lr_predict(&model, reduced.features())?);
    }
    Ok(all)
}

fn assemble(
    train: &EncodedDataset,
    agree: impl Fn(usize) -> bool,
    mode: FilterMode,
) -> FilterOutcome {
    let mut retained_rows = Vec::new();
    let mut dropped_indices = Vec::new();
    for r in 0..train.rows() {
        if agree(r) {
            retained_rows.push(r);
        } else {
            dropped_indices.push(r);
        }
    }
    let dropped_fraction = dropped_indices.len() as f64 / train.rows() as f64;
    FilterOutcome {
        retained: train.select_rows(&retained_rows),
        dropped_indices,
        dropped_fraction,
        mode,
    }
}

/// Two-group filter on one protected attribute.
pub fn filter_single(
    train: &EncodedDataset,
    attribute: &str,
    hyper: &LrHyper,
) -> Result<FilterOutcome> {
    let col = train.protected_column_index(attribute)?;
    let indicator = train.group(attribute)?;
    let privileged = group_rows(&indicator, 1);
    let unprivileged = group_rows(&indicator, 0);
    check_group(train, &privileged, attribute, "privileged")?;
    check_group(train, &unprivileged, attribute, "unprivileged")?;

    let reduced = train.drop_columns(&[col]);
    let preds = group_predictions(&reduced, &[privileged, unprivileged], hyper)?;
    Ok(assemble(train, |r| preds[0][r] == preds[1][r], FilterMode::Single))
}

/// Four-group filter on a pair of protected attributes; a row is retained
/// only when all four group models agree on it.
pub fn filter_joint(
    train: &EncodedDataset,
    attributes: (&str, &str),
    hyper: &LrHyper,
) -> Result<FilterOutcome> {
    let col_a = train.protected_column_index(attributes.0)?;
    let col_b = train.protected_column_index(attributes.1)?;
    if col_a == col_b {
        return Err(Error::Config(format!(
            "joint filter needs two distinct attributes, got `{}` twice",
            attributes.0
        )));
    }
    let ind_a = train.group(attributes.0)?;
    let ind_b = train.group(attributes.1)?;

    let mut groups = Vec::with_capacity(4);
    for a in [1u8, 0u8] {
        for b in [1u8, 0u8] {
            let rows: Vec<usize> = (0..train.rows())
                .filter(|&r| ind_a[r] == a && ind_b[r] == b)
                .collect();
            let name = format!(
                "{}={}, {}={}",
                attributes.0,
                if a == 1 { "privileged" } else { "unprivileged" },
                attributes.1,
                if b == 1 { "privileged" } else { "unprivileged" },
            );
            check_group(train, &rows, &format!("{}+{}", attributes.0, attributes.1), &name)?;
            groups.push(rows);
        }
    }

    let reduced = train.drop_columns(&[col_a, col_b]);
    let preds = group_predictions(&reduced, &groups, hyper)?;
    Ok(assemble(
        train,
        |r| preds.iter().all(|p| p[r] == preds[0][r]),
        FilterMode::Joint,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    /// Dataset where the label depends only on feature 0, identically in
    /// both groups, and is separable.
    fn consistent_dataset() -> EncodedDataset {
        let n = 24;
        let mut features = Array2::<f64>::zeros((n, 2));
        let mut labels = Vec::new();
        for i in 0..n {
            let x = if i % 2 == 0 { -1.0 } else { 1.0 };
            features[[i, 0]] = x + 0.01 * (i as f64 / n as f64);
            features[[i, 1]] = f64::from(u8::from(i % 4 < 2));
            labels.push(u8::from(x > 0.0));
        }
        EncodedDataset::for_tests(features, labels, vec![("g".into(), 1)])
    }

    #[test]
    fn identical_decision_rules_drop_nothing() {
        let data = consistent_dataset();
        let out = filter_single(&data, "g", &LrHyper::default()).unwrap();
        assert_eq!(out.dropped_indices.len(), 0);
        assert_eq!(out.dropped_fraction, 0.0);
        assert_eq!(out.retained.rows(), data.rows());
    }

    #[test]
    fn group_models_never_see_the_protected_column() {
        let data = consistent_dataset();
        let reduced = data.drop_columns(&[1]);
        assert_eq!(reduced.dimension(), data.dimension() - 1);
    }

    #[test]
    fn degenerate_group_detected() {
        // unprivileged group present with a single class only
        let mut features = Array2::<f64>::zeros((12, 2));
        let mut labels = Vec::new();
        for i in 0..12 {
            features[[i, 0]] = i as f64;
            let g = u8::from(i < 8);
            features[[i, 1]] = f64::from(g);
            labels.push(if g == 1 { u8::from(i % 2 == 0) } else { 1 });
        }
        let data = EncodedDataset::for_tests(features, labels, vec![("g".into(), 1)]);
        assert!(matches!(
            filter_single(&data, "g", &LrHyper::default()),
            Err(Error::DegenerateGroup { .. })
        ));
    }

    #[test]
    fn retained_and_dropped_partition_the_input() {
        let data = crafted_disagreement();
        let out = filter_single(&data, "g", &LrHyper::default()).unwrap();
        assert_eq!(out.retained.rows() + out.dropped_indices.len(), data.rows());
        let frac = out.dropped_indices.len() as f64 / data.rows() as f64;
        assert_eq!(out.dropped_fraction, frac);
    }

    /// Groups with opposite decision rules on feature 0: every row where
    /// the two rules differ must be dropped.
    fn crafted_disagreement() -> EncodedDataset {
        let mut rows: Vec<(f64, u8, u8)> = Vec::new(); // (x, group, label)
        for i in 0..8 {
            let x = -2.0 + i as f64 * 0.55; // -2 .. 1.85
            rows.push((x, 1, u8::from(x > 0.0)));
            rows.push((x, 0, u8::from(x < 0.0)));
        }
        let mut features = Array2::<f64>::zeros((rows.len(), 2));
        let mut labels = Vec::new();
        for (i, (x, g, y)) in rows.iter().enumerate() {
            features[[i, 0]] = *x;
            features[[i, 1]] = f64::from(*g);
            labels.push(*y);
        }
        EncodedDataset::for_tests(features, labels, vec![("g".into(), 1)])
    }

    #[test]
    fn dropped_set_matches_brute_force_recomputation() {
        let data = crafted_disagreement();
        let hyper = LrHyper::default();
        let out = filter_single(&data, "g", &hyper).unwrap();

        // independent recomputation: same learner, fit per group by hand
        let reduced = data.drop_columns(&[1]);
        let ind = data.group("g").unwrap();
        let mut expected_dropped = Vec::new();
        let fit_rows = |want: u8| {
            let rows: Vec<usize> = (0..data.rows()).filter(|&r| ind[r] == want).collect();
            let sub = reduced.select_rows(&rows);
            lr_fit(sub.features(), sub.labels(), hyper).unwrap()
        };
        let m1 = fit_rows(1);
        let m0 = fit_rows(0);
        let p1 = lr_predict(&m1, reduced.features()).unwrap();
        let p0 = lr_predict(&m0, reduced.features()).unwrap();
        for r in 0..data.rows() {
            if p1[r] != p0[r] {
                expected_dropped.push(r);
            }
        }
        assert!(!expected_dropped.is_empty(), "crafted set should disagree somewhere");
        assert_eq!(out.dropped_indices, expected_dropped);
    }

    #[test]
    fn joint_filter_consistent_groups_drop_nothing() {
        // two protected attributes, same separable rule everywhere
        let n = 48;
        let mut features = Array2::<f64>::zeros((n, 3));
        let mut labels = Vec::new();
        for i in 0..n {
            let x = if i % 2 == 0 { -1.0 } else { 1.0 };
            features[[i, 0]] = x + 0.005 * i as f64 / n as f64;
            features[[i, 1]] = f64::from(u8::from(i % 4 < 2));
            features[[i, 2]] = f64::from(u8::from(i % 8 < 4));
            labels.push(u8::from(x > 0.0));
        }
        let data = EncodedDataset::for_tests(
            features,
            labels,
            vec![("a".into(), 1), ("b".into(), 2)],
        );
        let out = filter_joint(&data, ("a", "b"), &LrHyper::default()).unwrap();
        assert_eq!(out.dropped_indices.len(), 0);
    }

    #[test]
    fn joint_filter_matches_brute_force_four_models() {
        // one deviant group (a=0, b=0) with an inverted rule
        let mut rows: Vec<(f64, u8, u8, u8)> = Vec::new();
        for i in 0..8 {
            let x = -2.0 + i as f64 * 0.55;
            for (a, b) in [(1u8, 1u8), (1, 0), (0, 1), (0, 0)] {
                let y = if a == 0 && b == 0 {
                    u8::from(x < 0.0)
                } else {
                    u8::from(x > 0.0)
                };
                rows.push((x, a, b, y));
            }
        }
        let mut features = Array2::<f64>::zeros((rows.len(), 3));
        let mut labels = Vec::new();
        for (i, (x, a, b, y)) in rows.iter().enumerate() {
            features[[i, 0]] = *x;
            features[[i, 1]] = f64::from(*a);
            features[[i, 2]] = f64::from(*b);
            labels.push(*y);
        }
        let data = EncodedDataset::for_tests(
            features,
            labels,
            vec![("a".into(), 1), ("b".into(), 2)],
        );
        let hyper = LrHyper::default();
        let out = filter_joint(&data, ("a", "b"), &hyper).unwrap();

        let reduced = data.drop_columns(&[1, 2]);
        let ia = data.group("a").unwrap();
        let ib = data.group("b").unwrap();
        let mut preds = Vec::new();
        for (a, b) in [(1u8, 1u8), (1, 0), (0, 1), (0, 0)] {
            let rows: Vec<usize> = (0..data.rows())
                .filter(|&r| ia[r] == a && ib[r] == b)
                .collect();
            let sub = reduced.select_rows(&rows);
            let m = lr_fit(sub.features(), sub.labels(), hyper).unwrap();
            preds.push(lr_predict(&m, reduced.features()).unwrap());
        }
        let expected: Vec<usize> = (0..data.rows())
            .filter(|&r| !preds.iter().all(|p| p[r] == preds[0][r]))
            .collect();
        assert!(!expected.is_empty());
        assert_eq!(out.dropped_indices, expected);
        assert_eq!(out.mode, FilterMode::Joint);
    }

    #[test]
    fn filter_is_deterministic() {
        let data = crafted_disagreement();
        let a = filter_single(&data, "g", &LrHyper::default()).unwrap();
        let b = filter_single(&data, "g", &LrHyper::default()).unwrap();
        assert_eq!(a.dropped_indices, b.dropped_indices);
    }
}
