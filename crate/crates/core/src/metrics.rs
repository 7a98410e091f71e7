//! Community-health measures: citation/quality correlation, churn, Gini,
//! and the split of reference-list slots across quality groups.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::engine::{CitationKind, ReferenceList, Trajectory};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSnapshot {
    pub timestep: usize,
    /// `None` while either citations or qualities have zero variance.
    pub correlation: Option<f64>,
    /// `None` at the first timestep, which has no predecessor.
    pub churn: Option<usize>,
    pub gini: f64,
}

/// Pearson correlation; `Ok(None)` when either side has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "pearson needs equal lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InvalidInput(
            "pearson needs at least two observations".into(),
        ));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(None);
    }
    Ok(Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)))
}

/// Gini coefficient of a nonnegative vector; the all-zero vector has Gini 0.
pub fn gini(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidInput("gini of an empty vector".into()));
    }
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::InvalidInput(format!(
            "gini needs finite nonnegative entries, got {v}"
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(gini_sorted(&sorted))
}

// Ascending input. Uses G = sum_i (2i - n + 1) x_i / (n * sum x), i zero-based.
fn gini_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let total: f64 = sorted.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, x)| (2.0 * i as f64 - n + 1.0) * x)
        .sum();
    (weighted / (n * total)).clamp(0.0, 1.0)
}

/// Number of distinct papers in `cur` that were not cited in `prev`.
pub fn churn(prev: &ReferenceList, cur: &ReferenceList) -> usize {
    let before: BTreeSet<usize> = prev.distinct_papers().collect();
    cur.distinct_papers()
        .filter(|id| !before.contains(id))
        .count()
}

/// Correlation and Gini of the current citation counts.
pub(crate) fn snapshot(
    timestep: usize,
    counts: &[u32],
    qualities: &[f64],
    churn: Option<usize>,
) -> MetricSnapshot {
    let as_f64: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let correlation = if counts.len() >= 2 {
        pearson(&as_f64, qualities).expect("lengths checked")
    } else {
        None
    };
    let mut sorted = counts.to_vec();
    sorted.sort_unstable();
    let sorted: Vec<f64> = sorted.into_iter().map(f64::from).collect();
    MetricSnapshot {
        timestep,
        correlation,
        churn,
        gini: gini_sorted(&sorted),
    }
}

/// Mean churn over the timesteps where it is defined (all but the first).
pub fn mean_churn(trajectory: &Trajectory) -> Option<f64> {
    let values: Vec<f64> = trajectory
        .records
        .iter()
        .filter_map(|r| r.snapshot.churn)
        .map(|c| c as f64)
        .collect();
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Share of all reference-list slots falling in each (kind, quality group) cell.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SlotDecomposition {
    pub frac_substantive_top40: f64,
    pub frac_substantive_41_150: f64,
    pub frac_rhetorical_top40: f64,
    pub frac_rhetorical_41_150: f64,
    pub frac_other: f64,
}

impl SlotDecomposition {
    /// Share of slots going to either quality group, any kind.
    pub fn top_groups(&self) -> f64 {
        self.frac_substantive_top40
            + self.frac_substantive_41_150
            + self.frac_rhetorical_top40
            + self.frac_rhetorical_41_150
    }
}

/// Sizes of the high-quality group and of high plus mid-quality groups.
/// 40 and 150 at 600 papers, scaled proportionally otherwise.
pub fn quality_group_bounds(literature_size: usize) -> (usize, usize) {
    let scale = |k: usize| ((k * literature_size) as f64 / 600.0).round() as usize;
    (
        scale(40).min(literature_size),
        scale(150).min(literature_size),
    )
}

/// Quality rank of each paper: 0 for the best, ties broken by lower id.
pub fn quality_ranks(qualities: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..qualities.len()).collect();
    order.sort_by(|&a, &b| qualities[b].total_cmp(&qualities[a]).then(a.cmp(&b)));
    let mut rank = vec![0; qualities.len()];
    for (r, id) in order.into_iter().enumerate() {
        rank[id] = r;
    }
    rank
}

pub fn slot_decomposition(trajectory: &Trajectory, qualities: &[f64]) -> SlotDecomposition {
    let ranks = quality_ranks(qualities);
    let (top, mid) = quality_group_bounds(qualities.len());
    let mut cells = [0usize; 5];
    let mut total = 0usize;
    for slot in trajectory.records.iter().flat_map(|r| r.refs.slots.iter()) {
        let rank = ranks[slot.paper_id];
        let cell = match (slot.kind, rank) {
            (CitationKind::Substantive, r) if r < top => 0,
            (CitationKind::Substantive, r) if r < mid => 1,
            (CitationKind::Rhetorical, r) if r < top => 2,
            (CitationKind::Rhetorical, r) if r < mid => 3,
            _ => 4,
        };
        cells[cell] += 1;
        total += 1;
    }
    if total == 0 {
        return SlotDecomposition::default();
    }
    let frac = |k: usize| cells[k] as f64 / total as f64;
    // the remainder keeps the five shares summing to exactly one
    let named = frac(0) + frac(1) + frac(2) + frac(3);
    SlotDecomposition {
        frac_substantive_top40: frac(0),
        frac_substantive_41_150: frac(1),
        frac_rhetorical_top40: frac(2),
        frac_rhetorical_41_150: frac(3),
        frac_other: 1.0 - named,
    }
}
