//! Agreement between two score vectors over the same features.

use serde::{Deserialize, Serialize};

use crate::centering::quantile_sorted;
use crate::error::{Error, Result};

/// Points in the shared KDE evaluation grid.
pub const KDE_GRID_POINTS: usize = 512;
/// Grid padding on each side, in units of the larger bandwidth.
pub const KDE_PAD_BANDWIDTHS: f64 = 3.0;
/// Density floor applied before taking logs.
pub const KDE_DENSITY_FLOOR: f64 = 1e-12;

/// Undefined metrics (degenerate inputs) are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub k: usize,
    pub jaccard_at_k: f64,
    pub spearman: Option<f64>,
    pub kendall: Option<f64>,
    pub procrustes_residual: Option<f64>,
    pub sym_kl: Option<f64>,
}

fn same_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "score vectors differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if let Some(v) = a.iter().chain(b).find(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite score {v}")));
    }
    Ok(())
}

/// Indices of the `k` largest scores, ties broken by ascending index.
pub fn top_k(scores: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(k);
    order
}

/// `|top_k(a) ∩ top_k(b)| / |top_k(a) ∪ top_k(b)|`.
pub fn jaccard_at_k(a: &[f64], b: &[f64], k: usize) -> Result<f64> {
    same_len(a, b)?;
    if k == 0 || k > a.len() {
        return Err(Error::InvalidK { k, d: a.len() });
    }
    let mut in_a = vec![false; a.len()];
    for i in top_k(a, k) {
        in_a[i] = true;
    }
    let inter = top_k(b, k).into_iter().filter(|&i| in_a[i]).count();
    Ok(inter as f64 / (2 * k - inter) as f64)
}

/// Fractional (average) ranks, 1-based.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && v[order[end]] == v[order[start]] {
            end += 1;
        }
        // positions start..end share ranks start+1..=end
        let avg = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Pearson correlation of average ranks.
pub fn spearman_rho(a: &[f64], b: &[f64]) -> Result<f64> {
    same_len(a, b)?;
    if a.len() < 2 {
        return Err(Error::DegenerateInput(
            "spearman needs at least 2 points".into(),
        ));
    }
    pearson(&average_ranks(a), &average_ranks(b))
        .ok_or_else(|| Error::DegenerateInput("zero rank variance".into()))
}

/// Tie-corrected Kendall τ-b by pair enumeration.
pub fn kendall_tau(a: &[f64], b: &[f64]) -> Result<f64> {
    same_len(a, b)?;
    let n = a.len();
    if n < 2 {
        return Err(Error::DegenerateInput(
            "kendall needs at least 2 points".into(),
        ));
    }
    let (mut concordant, mut discordant) = (0i64, 0i64);
    let (mut untied_a, mut untied_b) = (0i64, 0i64);
    for i in 0..n {
        for j in (i + 1)..n {
            let da = (a[i] - a[j]).partial_cmp(&0.0).expect("finite");
            let db = (b[i] - b[j]).partial_cmp(&0.0).expect("finite");
            use std::cmp::Ordering::*;
            if da != Equal {
                untied_a += 1;
            }
            if db != Equal {
                untied_b += 1;
            }
            match (da, db) {
                (Equal, _) | (_, Equal) => {}
                (x, y) if x == y => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    if untied_a == 0 || untied_b == 0 {
        return Err(Error::DegenerateInput("zero rank variance".into()));
    }
    let denom = ((untied_a as f64) * (untied_b as f64)).sqrt();
    Ok((concordant - discordant) as f64 / denom)
}

fn centered(v: &[f64]) -> Vec<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| x - mean).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Normalized residual `min_{q, s} ||a^ - s q b^|| / ||a^||` over sign
/// `q ∈ {±1}` and scale `s >= 0`, with `a^`, `b^` the mean-centered inputs.
/// Lies in `[0, 1]`.
pub fn procrustes_residual(a: &[f64], b: &[f64]) -> Result<f64> {
    same_len(a, b)?;
    if a.is_empty() {
        return Err(Error::DegenerateInput("empty score vector".into()));
    }
    let (ac, bc) = (centered(a), centered(b));
    let (aa, bb) = (dot(&ac, &ac), dot(&bc, &bc));
    if aa == 0.0 || bb == 0.0 {
        return Err(Error::DegenerateInput("constant score vector".into()));
    }
    // s * q collapses to the signed least-squares coefficient.
    let coef = dot(&ac, &bc) / bb;
    let resid: f64 = ac
        .iter()
        .zip(&bc)
        .map(|(x, y)| {
            let r = x - coef * y;
            r * r
        })
        .sum();
    Ok((resid.sqrt() / aa.sqrt()).min(1.0))
}

/// Silverman's rule: `0.9 * min(sd, IQR / 1.34) * n^(-1/5)`. Falls back to
/// the standard deviation alone when the IQR is zero.
pub fn silverman_bandwidth(sample: &[f64]) -> Result<f64> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::DegenerateInput("KDE needs at least 2 points".into()));
    }
    let mean = sample.iter().sum::<f64>() / n as f64;
    let var = sample.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    if sd == 0.0 {
        return Err(Error::DegenerateInput("constant sample".into()));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    Ok(0.9 * spread * (n as f64).powf(-0.2))
}

/// Gaussian KDE evaluated on `grid`, normalized to sum to 1 after flooring.
fn kde_on_grid(sample: &[f64], bandwidth: f64, grid: &[f64]) -> Vec<f64> {
    let inv_h = 1.0 / bandwidth;
    let mut dens: Vec<f64> = grid
        .iter()
        .map(|&x| {
            sample
                .iter()
                .map(|&s| {
                    let z = (x - s) * inv_h;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
        })
        .collect();
    let total: f64 = dens.iter().sum();
    for v in &mut dens {
        *v = (*v / total).max(KDE_DENSITY_FLOOR);
    }
    let total: f64 = dens.iter().sum();
    for v in &mut dens {
        *v /= total;
    }
    dens
}

/// Jeffreys divergence `KL(P||Q) + KL(Q||P)` between Gaussian KDEs of the
/// two samples on a shared uniform grid.
pub fn symmetric_kl(a: &[f64], b: &[f64]) -> Result<f64> {
    if let Some(v) = a.iter().chain(b).find(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite score {v}")));
    }
    let ha = silverman_bandwidth(a)?;
    let hb = silverman_bandwidth(b)?;
    let pad = KDE_PAD_BANDWIDTHS * ha.max(hb);
    let lo = a.iter().chain(b).copied().fold(f64::INFINITY, f64::min) - pad;
    let hi = a.iter().chain(b).copied().fold(f64::NEG_INFINITY, f64::max) + pad;
    let step = (hi - lo) / (KDE_GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..KDE_GRID_POINTS).map(|i| lo + step * i as f64).collect();

    let p = kde_on_grid(a, ha, &grid);
    let q = kde_on_grid(b, hb, &grid);
    // (p - q)(ln p - ln q) is symmetric in (p, q) term by term.
    let kl: f64 = p
        .iter()
        .zip(&q)
        .map(|(&pi, &qi)| (pi - qi) * (pi.ln() - qi.ln()))
        .sum();
    Ok(kl.max(0.0))
}

/// All five metrics. Degenerate rank or shape inputs yield `None` for the
/// affected metric.
pub fn compare(a: &[f64], b: &[f64], k: usize) -> Result<AgreementReport> {
    same_len(a, b)?;
    let defined = |r: Result<f64>| match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::DegenerateInput(_)) => Ok(None),
        Err(e) => Err(e),
    };
    Ok(AgreementReport {
        k,
        jaccard_at_k: jaccard_at_k(a, b, k)?,
        spearman: defined(spearman_rho(a, b))?,
        kendall: defined(kendall_tau(a, b))?,
        procrustes_residual: defined(procrustes_residual(a, b))?,
        sym_kl: defined(symmetric_kl(a, b))?,
    })
}
