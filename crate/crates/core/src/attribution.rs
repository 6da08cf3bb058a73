//! Correlation impact ratio scores for single features and feature sets.
//!
//! For a centered feature `x~_j` and centered output `y~`, every sample
//! contributes a signed co-movement term `p_ij = x~_ij * y~_i`. A feature set
//! `G` aggregates member terms per sample before accumulating:
//! `p_iG = sum_j p_ij` and `u_iG = sum_j |p_ij|`. The score is
//! `CIR(G) = (1 + N_G / D_G) / 2` with `N_G = sum_i p_iG` and
//! `D_G = sum_i u_iG`, and exactly 0.5 when `D_G = 0`.

use std::cmp::Ordering;
use std::ops::Range;

use rayon::prelude::*;

use crate::accumulator::{Accumulator, AccumulatorSet};
use crate::centering::{center_table, CenteredData, CenteringSpec};
use crate::data::DataTable;
use crate::error::{Error, Result};
use crate::groups::{GroupFamily, WeightVector};

/// Rows folded into one partial accumulator before the pairwise reduction.
const CHUNK_ROWS: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureScore {
    pub name: String,
    pub cir: f64,
    /// `N / D`; 0 when neutral. `cir == (1 + ratio_nd) / 2`.
    pub ratio_nd: f64,
    /// Set when `D = 0` and the score was forced to 0.5.
    pub neutral: bool,
    /// 1-based position in descending-score order, ties by ascending name.
    pub rank: usize,
    pub accumulator: Accumulator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupScore {
    pub name: String,
    pub members: Vec<String>,
    pub cir: f64,
    pub ratio_nd: f64,
    pub neutral: bool,
    pub accumulator: Accumulator,
}

/// Scores for one output column. `features` keeps table order; use
/// [`ScoreReport::ranked_features`] for ranked order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    pub output: String,
    pub class: Option<String>,
    pub centering: CenteringSpec,
    pub rows_used: usize,
    pub weighted: bool,
    pub features: Vec<FeatureScore>,
    pub groups: Vec<GroupScore>,
}

impl ScoreReport {
    /// Per-feature CIR values in table order.
    pub fn cir_vector(&self) -> Vec<f64> {
        self.features.iter().map(|f| f.cir).collect()
    }

    pub fn feature(&self, name: &str) -> Option<&FeatureScore> {
        self.features.iter().find(|f| f.name == name)
    }

    pub fn group(&self, name: &str) -> Option<&GroupScore> {
        self.groups.iter().find(|g| g.name == name)
    }

    pub fn ranked_features(&self) -> Vec<&FeatureScore> {
        let mut out: Vec<&FeatureScore> = self.features.iter().collect();
        out.sort_by_key(|f| f.rank);
        out
    }

    /// Feature names in rank order.
    pub fn ranking(&self) -> Vec<&str> {
        self.ranked_features()
            .into_iter()
            .map(|f| f.name.as_str())
            .collect()
    }
}

/// Descending score, then ascending name.
pub(crate) fn rank_order(names: &[String], scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| match scores[b].total_cmp(&scores[a]) {
        Ordering::Equal => names[a].cmp(&names[b]),
        other => other,
    });
    order
}

fn check_weights(weights: Option<&WeightVector>, n: usize) -> Result<()> {
    match weights {
        Some(w) if w.len() != n => Err(Error::InvalidInput(format!(
            "weight vector has {} entries for {n} rows",
            w.len()
        ))),
        _ => Ok(()),
    }
}

/// Accumulates `(N, D)` for every feature and group over `rows`, using the
/// centers in `centered`. Partial results over disjoint row ranges merge
/// with [`AccumulatorSet::merge`].
pub fn accumulate_rows(
    table: &DataTable,
    centered: &CenteredData,
    groups: &GroupFamily,
    weights: Option<&WeightVector>,
    rows: Range<usize>,
) -> Result<AccumulatorSet> {
    if rows.end > table.n() || rows.start > rows.end {
        return Err(Error::InvalidInput(format!(
            "row range {rows:?} outside table of {} rows",
            table.n()
        )));
    }
    groups.validate(table.d())?;
    check_weights(weights, table.n())?;
    let y = table.output(&centered.output)?;
    let weights = weights.map(WeightVector::as_slice);

    let chunks: Vec<Range<usize>> = rows
        .clone()
        .step_by(CHUNK_ROWS)
        .map(|start| start..(start + CHUNK_ROWS).min(rows.end))
        .collect();
    let parts: Vec<AccumulatorSet> = chunks
        .into_par_iter()
        .map(|chunk| accumulate_chunk(table, centered, y, groups, weights, chunk))
        .collect();
    Ok(AccumulatorSet::reduce_pairwise(parts)
        .unwrap_or_else(|| AccumulatorSet::zeros(table.d(), groups.len())))
}

fn accumulate_chunk(
    table: &DataTable,
    centered: &CenteredData,
    y: &[f64],
    groups: &GroupFamily,
    weights: Option<&[f64]>,
    rows: Range<usize>,
) -> AccumulatorSet {
    let d = table.d();
    let len = rows.len();
    let y_tilde: Vec<f64> = y[rows.clone()]
        .iter()
        .map(|v| v - centered.center_y)
        .collect();
    let w = weights.map(|w| &w[rows.clone()]);
    let keep_products = !groups.is_empty();
    let mut products = if keep_products {
        vec![0.0; d * len]
    } else {
        Vec::new()
    };
    let mut set = AccumulatorSet::zeros(d, groups.len());

    for (j, acc) in set.features.iter_mut().enumerate() {
        let col = &table.column(j)[rows.clone()];
        let center = centered.centers_x[j];
        let products_j = if keep_products {
            &mut products[j * len..(j + 1) * len]
        } else {
            &mut []
        };
        for r in 0..len {
            let p = (col[r] - center) * y_tilde[r];
            match w {
                Some(w) => acc.push(w[r] * p, w[r] * p.abs()),
                None => acc.push(p, p.abs()),
            }
            if keep_products {
                products_j[r] = p;
            }
        }
    }

    for (group, acc) in groups.iter().zip(set.groups.iter_mut()) {
        let (first, rest) = group.members.split_first().expect("groups are nonempty");
        for r in 0..len {
            let mut p = products[first * len + r];
            let mut u = p.abs();
            for &j in rest {
                let pj = products[j * len + r];
                p += pj;
                u += pj.abs();
            }
            match w {
                Some(w) => acc.push(w[r] * p, w[r] * u),
                None => acc.push(p, u),
            }
        }
    }
    set
}

/// Turns accumulated sums into a report.
pub fn finalize(
    table: &DataTable,
    centered: &CenteredData,
    groups: &GroupFamily,
    acc: &AccumulatorSet,
    rows_used: usize,
    weighted: bool,
) -> ScoreReport {
    let names = table.feature_names();
    let scores: Vec<f64> = acc.features.iter().map(Accumulator::cir).collect();
    let mut ranks = vec![0; scores.len()];
    for (pos, j) in rank_order(names, &scores).into_iter().enumerate() {
        ranks[j] = pos + 1;
    }

    let features = acc
        .features
        .iter()
        .enumerate()
        .map(|(j, a)| FeatureScore {
            name: names[j].clone(),
            cir: a.cir(),
            ratio_nd: a.ratio(),
            neutral: a.is_neutral(),
            rank: ranks[j],
            accumulator: *a,
        })
        .collect();
    let groups = groups
        .iter()
        .zip(&acc.groups)
        .map(|(g, a)| GroupScore {
            name: g.name.clone(),
            members: g.members.iter().map(|&j| names[j].clone()).collect(),
            cir: a.cir(),
            ratio_nd: a.ratio(),
            neutral: a.is_neutral(),
            accumulator: *a,
        })
        .collect();

    ScoreReport {
        output: centered.output.clone(),
        class: None,
        centering: centered.spec,
        rows_used,
        weighted,
        features,
        groups,
    }
}

/// Scores every feature and group against precomputed centers.
pub fn score_with_centers(
    table: &DataTable,
    centered: &CenteredData,
    groups: &GroupFamily,
    weights: Option<&WeightVector>,
) -> Result<ScoreReport> {
    let acc = accumulate_rows(table, centered, groups, weights, 0..table.n())?;
    Ok(finalize(
        table,
        centered,
        groups,
        &acc,
        table.n(),
        weights.is_some(),
    ))
}

/// Per-feature (and optional per-group) CIR against `output_name`.
pub fn cir_scores(
    table: &DataTable,
    output_name: &str,
    groups: &GroupFamily,
    spec: &CenteringSpec,
    weights: Option<&WeightVector>,
) -> Result<ScoreReport> {
    groups.validate(table.d())?;
    check_weights(weights, table.n())?;
    let centered = center_table(table, output_name, spec)?;
    score_with_centers(table, &centered, groups, weights)
}

/// Set-level scores only; the report's `features` list is empty.
pub fn block_cir(
    table: &DataTable,
    output_name: &str,
    groups: &GroupFamily,
    spec: &CenteringSpec,
) -> Result<ScoreReport> {
    if groups.is_empty() {
        return Err(Error::InvalidGroup("at least one group is required".into()));
    }
    let mut report = cir_scores(table, output_name, groups, spec, None)?;
    report.features.clear();
    Ok(report)
}

/// One report per class score column (logits or margins).
pub fn class_conditioned_cir<S: AsRef<str>>(
    table: &DataTable,
    class_columns: &[S],
    groups: &GroupFamily,
    spec: &CenteringSpec,
) -> Result<Vec<ScoreReport>> {
    if class_columns.is_empty() {
        return Err(Error::InvalidInput("no class columns given".into()));
    }
    for c in class_columns {
        table.output(c.as_ref())?;
    }
    class_columns
        .iter()
        .map(|c| {
            let mut report = cir_scores(table, c.as_ref(), groups, spec, None)?;
            report.class = Some(c.as_ref().to_string());
            Ok(report)
        })
        .collect()
}
