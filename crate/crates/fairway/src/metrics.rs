//! Group confusion counts and the four pipeline measures: recall, false
//! alarm, average odds difference (AOD) and equal opportunity difference
//! (EOD). AOD and EOD are reported as absolute values; rates with a zero
//! denominator are defined as 0 so degenerate groups never poison a score.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-group confusion cells. Group P is privileged, U unprivileged;
/// class 1 (the favorable label) counts as positive.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GroupConfusion {
    pub tn_p: u64,
    pub fp_p: u64,
    pub fn_p: u64,
    pub tp_p: u64,
    pub tn_u: u64,
    pub fp_u: u64,
    pub fn_u: u64,
    pub tp_u: u64,
}

impl GroupConfusion {
    /// Total number of scored rows.
    pub fn scored(&self) -> u64 {
        self.tn_p + self.fp_p + self.fn_p + self.tp_p + self.tn_u + self.fp_u + self.fn_u
            + self.tp_u
    }
}

/// The four measures for one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureSet {
    pub recall: f64,
    pub false_alarm: f64,
    pub aod: f64,
    pub eod: f64,
}

/// Tally confusion cells per group. `labels`, `predictions` and `group`
/// must have equal, non-zero length; group 1 is privileged.
pub fn confusion(labels: &[u8], predictions: &[u8], group: &[u8]) -> Result<GroupConfusion> {
    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    if labels.len() != predictions.len() {
        return Err(Error::LengthMismatch(labels.len(), predictions.len()));
    }
    if labels.len() != group.len() {
        return Err(Error::LengthMismatch(labels.len(), group.len()));
    }
    let mut c = GroupConfusion::default();
    for i in 0..labels.len() {
        let cell = match (group[i], labels[i], predictions[i]) {
            (1, 0, 0) => &mut c.tn_p,
            (1, 0, _) => &mut c.fp_p,
            (1, _, 0) => &mut c.fn_p,
            (1, _, _) => &mut c.tp_p,
            (_, 0, 0) => &mut c.tn_u,
            (_, 0, _) => &mut c.fp_u,
            (_, _, 0) => &mut c.fn_u,
            (_, _, _) => &mut c.tp_u,
        };
        *cell += 1;
    }
    Ok(c)
}

fn rate(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// (TPR_P, TPR_U, FPR_P, FPR_U); zero denominators yield rate 0.
pub fn rates(c: &GroupConfusion) -> (f64, f64, f64, f64) {
    (
        rate(c.tp_p, c.tp_p + c.fn_p),
        rate(c.tp_u, c.tp_u + c.fn_u),
        rate(c.fp_p, c.fp_p + c.tn_p),
        rate(c.fp_u, c.fp_u + c.tn_u),
    )
}

/// Equal opportunity difference: |TPR_U - TPR_P|.
pub fn eod(c: &GroupConfusion) -> f64 {
    let (tpr_p, tpr_u, _, _) = rates(c);
    (tpr_u - tpr_p).abs()
}

/// Average odds difference: |((FPR_U - FPR_P) + (TPR_U - TPR_P)) / 2|.
/// The group differences are summed signed and the absolute value is taken
/// at the end, so opposite-signed gaps can cancel.
pub fn aod(c: &GroupConfusion) -> f64 {
    let (tpr_p, tpr_u, fpr_p, fpr_u) = rates(c);
    (0.5 * ((fpr_u - fpr_p) + (tpr_u - tpr_p))).abs()
}

/// Pooled recall and false alarm over both groups.
pub fn performance(c: &GroupConfusion) -> (f64, f64) {
    let recall = rate(c.tp_p + c.tp_u, c.tp_p + c.tp_u + c.fn_p + c.fn_u);
    let false_alarm = rate(c.fp_p + c.fp_u, c.fp_p + c.fp_u + c.tn_p + c.tn_u);
    (recall, false_alarm)
}

/// All four measures from one confusion tally.
pub fn measures(c: &GroupConfusion) -> MeasureSet {
    let (recall, false_alarm) = performance(c);
    MeasureSet {
        recall,
        false_alarm,
        aod: aod(c),
        eod: eod(c),
    }
}
