//! Correlation impact ratio (CIR) feature attribution.
//!
//! Scores how much of the co-movement between each robustly centered feature
//! (or feature set) and a model output is aligned in sign, in one pass over
//! the rows after centering. Also provides a Greenwald–Khanna sketch for
//! streaming centers, agreement metrics between score vectors, and a harness
//! for comparing subsampled runs against the full run.

pub mod accumulator;
pub mod agreement;
pub mod attribution;
pub mod centering;
pub mod cli;
pub mod data;
pub mod error;
pub mod groups;
pub mod io;
pub mod sketch;
pub mod transfer;

pub use accumulator::{merge_accumulators, Accumulator, AccumulatorSet};
pub use agreement::{
    compare, jaccard_at_k, kendall_tau, procrustes_residual, spearman_rho, symmetric_kl,
    AgreementReport,
};
pub use attribution::{
    accumulate_rows, block_cir, cir_scores, class_conditioned_cir, finalize, score_with_centers,
    FeatureScore, GroupScore, ScoreReport,
};
pub use centering::{
    center_table, robust_center, CenterMethod, CenterSource, CenteredData, CenteringSpec,
};
pub use data::DataTable;
pub use error::{Error, Result};
pub use groups::{FeatureGroup, GroupFamily, WeightVector};
pub use sketch::GkSketch;
pub use transfer::{
    pareto_knee, run_transfer, subsample_rows, Knee, TransferConfig, TransferCurve, TransferRecord,
};
