//! Robust location estimates and centered views of a [`DataTable`].
//!
//! Quantiles use linear interpolation between the closest order statistics
//! at position `h = (n - 1) * alpha` (the "type 7" rule), so every `n >= 1`
//! is handled by the same formula.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DataTable;
use crate::error::{Error, Result};
use crate::sketch::GkSketch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CenterMethod {
    /// Midhinge: `(Q(0.25) + Q(0.75)) / 2`.
    #[default]
    Midmean,
    Median,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CenterSource {
    #[default]
    Exact,
    /// Quantiles read from a Greenwald–Khanna sketch with rank error `epsilon`.
    Sketch { epsilon: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CenteringSpec {
    pub method: CenterMethod,
    pub source: CenterSource,
}

impl CenteringSpec {
    pub fn exact(method: CenterMethod) -> Self {
        Self {
            method,
            source: CenterSource::Exact,
        }
    }

    pub fn sketch(method: CenterMethod, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::InvalidInput(format!(
                "sketch epsilon {epsilon} must lie in (0, 0.5)"
            )));
        }
        Ok(Self {
            method,
            source: CenterSource::Sketch { epsilon },
        })
    }
}

impl fmt::Display for CenterMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CenterMethod::Midmean => "midmean",
            CenterMethod::Median => "median",
            CenterMethod::Mean => "mean",
        })
    }
}

impl fmt::Display for CenteringSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.source {
            CenterSource::Exact => write!(f, "{}/exact", self.method),
            CenterSource::Sketch { epsilon } => write!(f, "{}/gk({epsilon})", self.method),
        }
    }
}

fn check_finite(col: &[f64]) -> Result<()> {
    if col.is_empty() {
        return Err(Error::InvalidInput("cannot center an empty vector".into()));
    }
    if let Some(i) = col.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "non-finite value at position {i}"
        )));
    }
    Ok(())
}

/// Type-7 quantile of an already sorted slice.
pub fn quantile_sorted(sorted: &[f64], alpha: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * alpha;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    match sorted.get(lo + 1) {
        Some(&hi) if frac > 0.0 => interpolate(sorted[lo], hi, frac),
        _ => sorted[lo],
    }
}

/// Linear interpolation anchored at the nearer endpoint. Negating the data
/// then negates the result exactly, so `m(-x) == -m(x)` bit for bit.
fn interpolate(lo: f64, hi: f64, frac: f64) -> f64 {
    if frac < 0.5 {
        lo + frac * (hi - lo)
    } else if frac > 0.5 {
        hi - (1.0 - frac) * (hi - lo)
    } else {
        0.5 * lo + 0.5 * hi
    }
}

/// Type-7 quantiles at several levels using selection instead of a full sort.
/// Reorders `scratch`.
fn quantiles_select(scratch: &mut [f64], alphas: &[f64]) -> Vec<f64> {
    let n = scratch.len();
    alphas
        .iter()
        .map(|&alpha| {
            let h = (n - 1) as f64 * alpha;
            let lo = h.floor() as usize;
            let frac = h - lo as f64;
            let (_, &mut lo_val, right) = scratch.select_nth_unstable_by(lo, f64::total_cmp);
            if frac > 0.0 && !right.is_empty() {
                let hi_val = right.iter().copied().fold(f64::INFINITY, f64::min);
                interpolate(lo_val, hi_val, frac)
            } else {
                lo_val
            }
        })
        .collect()
}

/// Type-7 quantile of an unsorted vector.
pub fn quantile(col: &[f64], alpha: f64) -> Result<f64> {
    check_finite(col)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidInput(format!(
            "quantile level {alpha} outside [0, 1]"
        )));
    }
    let mut scratch = col.to_vec();
    Ok(quantiles_select(&mut scratch, &[alpha])[0])
}

/// Mean computed relative to the first element, so a constant vector maps
/// exactly onto its constant.
fn shifted_mean(col: &[f64]) -> f64 {
    let anchor = col[0];
    let offset: f64 = col.iter().map(|v| v - anchor).sum::<f64>() / col.len() as f64;
    anchor + offset
}

/// Location estimate `m(col)` under `spec`.
pub fn robust_center(col: &[f64], spec: &CenteringSpec) -> Result<f64> {
    check_finite(col)?;
    if spec.method == CenterMethod::Mean {
        return Ok(shifted_mean(col));
    }
    match spec.source {
        CenterSource::Exact => {
            let mut scratch = col.to_vec();
            Ok(match spec.method {
                CenterMethod::Midmean => {
                    let q = quantiles_select(&mut scratch, &[0.25, 0.75]);
                    0.5 * (q[0] + q[1])
                }
                _ => quantiles_select(&mut scratch, &[0.5])[0],
            })
        }
        CenterSource::Sketch { epsilon } => {
            let mut sketch = GkSketch::new(epsilon)?;
            for &v in col {
                sketch.insert(v)?;
            }
            match spec.method {
                CenterMethod::Midmean => sketch.midmean(),
                _ => sketch.query(0.5),
            }
        }
    }
}

/// Centers for every feature column and one output column.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredData {
    pub centers_x: Vec<f64>,
    pub center_y: f64,
    pub output: String,
    pub spec: CenteringSpec,
}

impl CenteredData {
    /// `x_ij - m(x_j)`.
    pub fn x_tilde(&self, table: &DataTable, i: usize, j: usize) -> f64 {
        table.column(j)[i] - self.centers_x[j]
    }

    /// `y_i - m(y)`.
    pub fn y_tilde(&self, table: &DataTable, i: usize) -> Result<f64> {
        Ok(table.output(&self.output)?[i] - self.center_y)
    }

    /// Centered copy of feature column `j`.
    pub fn centered_column(&self, table: &DataTable, j: usize) -> Vec<f64> {
        let c = self.centers_x[j];
        table.column(j).iter().map(|v| v - c).collect()
    }
}

/// Computes `m(x_j)` for every feature and `m(y)` for `output_name`.
pub fn center_table(
    table: &DataTable,
    output_name: &str,
    spec: &CenteringSpec,
) -> Result<CenteredData> {
    let y = table.output(output_name)?;
    let centers_x = table
        .columns()
        .par_iter()
        .map(|col| robust_center(col, spec))
        .collect::<Result<Vec<_>>>()?;
    Ok(CenteredData {
        centers_x,
        center_y: robust_center(y, spec)?,
        output: output_name.to_string(),
        spec: *spec,
    })
}
