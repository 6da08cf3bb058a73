//! Subsampled ("lightweight") runs compared against the full-data run.
//!
//! Each fraction draws its own row subset, independently of the other
//! fractions, recomputes centers on that subset and accumulates scores over
//! it. The resulting per-feature CIR vector is compared with the `f = 1.0`
//! reference using the full agreement suite.

use std::sync::Mutex;
use std::time::Instant;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agreement::{compare, AgreementReport};
use crate::attribution::{cir_scores, ScoreReport};
use crate::centering::CenteringSpec;
use crate::data::DataTable;
use crate::error::{Error, Result};
use crate::groups::GroupFamily;

/// Only one timed run executes at a time, process-wide.
static TIMING_LOCK: Mutex<()> = Mutex::new(());

pub const DEFAULT_FRACTIONS: [f64; 6] = [0.2, 0.3, 0.4, 0.5, 0.75, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferConfig {
    pub fractions: Vec<f64>,
    pub seed: u64,
    pub k: usize,
    pub repeats: usize,
}

impl Default for TransferConfig {
    fn default() -> Self {
        Self {
            fractions: DEFAULT_FRACTIONS.to_vec(),
            seed: 0,
            k: 8,
            repeats: 1,
        }
    }
}

impl TransferConfig {
    /// Sorts and deduplicates the fractions and adds the `1.0` reference.
    pub fn normalized(mut self) -> Result<Self> {
        for &f in &self.fractions {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::InvalidFraction(f));
            }
        }
        if self.repeats == 0 {
            return Err(Error::InvalidInput("repeats must be at least 1".into()));
        }
        if self.k == 0 {
            return Err(Error::InvalidInput("k must be at least 1".into()));
        }
        self.fractions.push(1.0);
        self.fractions.sort_by(f64::total_cmp);
        self.fractions.dedup();
        Ok(self)
    }
}

#[derive(Debug, Clone)]
pub struct TransferRecord {
    pub fraction: f64,
    pub repeat: usize,
    pub rows: usize,
    /// Wall time for centering plus accumulation.
    pub seconds: f64,
    pub agreement: AgreementReport,
    pub report: ScoreReport,
}

#[derive(Debug, Clone)]
pub struct TransferCurve {
    pub config: TransferConfig,
    pub records: Vec<TransferRecord>,
}

impl TransferCurve {
    pub fn reference(&self) -> Option<&TransferRecord> {
        self.records.iter().find(|r| r.fraction == 1.0)
    }

    /// Records grouped by fraction, ascending.
    pub fn by_fraction(&self) -> Vec<(f64, Vec<&TransferRecord>)> {
        let mut out: Vec<(f64, Vec<&TransferRecord>)> = Vec::new();
        for r in &self.records {
            match out.iter_mut().find(|(f, _)| *f == r.fraction) {
                Some((_, v)) => v.push(r),
                None => out.push((r.fraction, vec![r])),
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }
}

/// `max(1, round(f * n))` distinct row indices, ascending, drawn without
/// replacement from a generator seeded by `seed`.
pub fn subsample_rows(n: usize, fraction: f64, seed: u64) -> Result<Vec<usize>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidFraction(fraction));
    }
    if fraction == 1.0 {
        return Ok((0..n).collect());
    }
    let keep = ((fraction * n as f64).round() as usize).clamp(1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = index::sample(&mut rng, n, keep).into_vec();
    rows.sort_unstable();
    Ok(rows)
}

/// SplitMix64 finalizer, used to derive independent per-draw seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one (fraction, repeat) draw.
pub fn draw_seed(seed: u64, fraction: f64, repeat: usize) -> u64 {
    mix(mix(seed ^ mix(fraction.to_bits())) ^ repeat as u64)
}

fn timed_scores(
    table: &DataTable,
    output_name: &str,
    groups: &GroupFamily,
    spec: &CenteringSpec,
) -> Result<(ScoreReport, f64)> {
    let _guard = TIMING_LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let report = cir_scores(table, output_name, groups, spec, None)?;
    Ok((report, start.elapsed().as_secs_f64()))
}

pub fn run_transfer(
    table: &DataTable,
    output_name: &str,
    groups: &GroupFamily,
    spec: &CenteringSpec,
    config: TransferConfig,
) -> Result<TransferCurve> {
    let config = config.normalized()?;
    if config.k > table.d() {
        return Err(Error::InvalidK {
            k: config.k,
            d: table.d(),
        });
    }
    let (full, full_secs) = timed_scores(table, output_name, groups, spec)?;
    let reference = full.cir_vector();

    let mut records = Vec::new();
    for &fraction in &config.fractions {
        for repeat in 0..config.repeats {
            let (report, seconds, rows) = if fraction == 1.0 {
                if repeat == 0 {
                    (full.clone(), full_secs, table.n())
                } else {
                    let (r, s) = timed_scores(table, output_name, groups, spec)?;
                    (r, s, table.n())
                }
            } else {
                let rows = subsample_rows(
                    table.n(),
                    fraction,
                    draw_seed(config.seed, fraction, repeat),
                )?;
                let sub = table.select_rows(&rows);
                let (r, s) = timed_scores(&sub, output_name, groups, spec)?;
                (r, s, rows.len())
            };
            let agreement = compare(&report.cir_vector(), &reference, config.k)?;
            records.push(TransferRecord {
                fraction,
                repeat,
                rows,
                seconds,
                agreement,
                report,
            });
        }
    }
    Ok(TransferCurve { config, records })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Knee {
    pub fraction: f64,
    pub target_jaccard: f64,
    /// Set when no configured fraction reaches the target.
    pub no_knee: bool,
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Smallest fraction whose median Jaccard@k meets `target_jaccard`.
pub fn pareto_knee(curve: &TransferCurve, target_jaccard: f64) -> Knee {
    for (fraction, records) in curve.by_fraction() {
        let mut js: Vec<f64> = records.iter().map(|r| r.agreement.jaccard_at_k).collect();
        if !js.is_empty() && median(&mut js) >= target_jaccard {
            return Knee {
                fraction,
                target_jaccard,
                no_knee: false,
            };
        }
    }
    Knee {
        fraction: 1.0,
        target_jaccard,
        no_knee: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agreement::AgreementReport;
    use crate::attribution::ScoreReport;

    #[test]
    fn subsample_sizes_and_determinism() {
        assert_eq!(
            subsample_rows(10, 1.0, 3).unwrap(),
            (0..10).collect::<Vec<_>>()
        );
        let a = subsample_rows(10, 0.2, 42).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a, subsample_rows(10, 0.2, 42).unwrap());
        assert_eq!(subsample_rows(100, 0.001, 1).unwrap().len(), 1);
        assert!(matches!(
            subsample_rows(10, 0.0, 1),
            Err(Error::InvalidFraction(_))
        ));
        assert!(matches!(
            subsample_rows(10, 1.5, 1),
            Err(Error::InvalidFraction(_))
        ));
        let rows = subsample_rows(1000, 0.37, 9).unwrap();
        assert_eq!(rows.len(), 370);
        assert!(rows.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn config_adds_reference() {
        let c = TransferConfig {
            fractions: vec![0.5, 0.2, 0.5],
            ..Default::default()
        }
        .normalized()
        .unwrap();
        assert_eq!(c.fractions, vec![0.2, 0.5, 1.0]);
    }

    fn fake_curve(points: &[(f64, f64)]) -> TransferCurve {
        let report = ScoreReport {
            output: "y".into(),
            class: None,
            centering: Default::default(),
            rows_used: 1,
            weighted: false,
            features: vec![],
            groups: vec![],
        };
        TransferCurve {
            config: TransferConfig::default(),
            records: points
                .iter()
                .map(|&(fraction, j)| TransferRecord {
                    fraction,
                    repeat: 0,
                    rows: 1,
                    seconds: 0.0,
                    agreement: AgreementReport {
                        k: 8,
                        jaccard_at_k: j,
                        spearman: None,
                        kendall: None,
                        procrustes_residual: None,
                        sym_kl: None,
                    },
                    report: report.clone(),
                })
                .collect(),
        }
    }

    #[test]
    fn knee_lookup() {
        let curve = fake_curve(&[(0.2, 0.5), (0.3, 0.8), (0.5, 0.9), (1.0, 1.0)]);
        assert_eq!(pareto_knee(&curve, 0.8).fraction, 0.3);
        assert_eq!(pareto_knee(&curve, 0.0).fraction, 0.2);
        let k = pareto_knee(&curve, 1.0);
        assert_eq!((k.fraction, k.no_knee), (1.0, false));
        let k = pareto_knee(&curve, 1.1);
        assert_eq!((k.fraction, k.no_knee), (1.0, true));
    }

    #[test]
    fn knee_uses_median_over_repeats() {
        let curve = fake_curve(&[(0.2, 0.2), (0.2, 0.9), (0.2, 0.95), (1.0, 1.0)]);
        assert_eq!(pareto_knee(&curve, 0.9).fraction, 0.2);
        assert_eq!(pareto_knee(&curve, 0.92).fraction, 1.0);
    }
}
