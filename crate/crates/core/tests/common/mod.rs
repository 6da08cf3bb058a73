//! Shared fixtures: a naive reference scorer and random table generators.
#![allow(dead_code)]

use excir::{DataTable, GroupFamily};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, Normal, StudentT};

/// Type-7 quantile computed from a fresh full sort.
pub fn naive_quantile(v: &[f64], alpha: f64) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = (s.len() - 1) as f64 * alpha;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    s[lo] + (h - lo as f64) * (s[hi] - s[lo])
}

pub fn naive_midmean(v: &[f64]) -> f64 {
    (naive_quantile(v, 0.25) + naive_quantile(v, 0.75)) / 2.0
}

/// Explicit double loop over rows and members, straight from the definition.
/// Returns `(feature_scores, group_scores)`.
pub fn naive_scores(
    cols: &[Vec<f64>],
    y: &[f64],
    groups: &[Vec<usize>],
    weights: Option<&[f64]>,
) -> (Vec<f64>, Vec<f64>) {
    let n = y.len();
    let my = naive_midmean(y);
    let mx: Vec<f64> = cols.iter().map(|c| naive_midmean(c)).collect();
    let score = |members: &[usize]| {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            let yt = y[i] - my;
            let mut p = 0.0;
            let mut u = 0.0;
            for &j in members {
                let term = (cols[j][i] - mx[j]) * yt;
                p += term;
                u += term.abs();
            }
            let w = weights.map_or(1.0, |w| w[i]);
            num += w * p;
            den += w * u;
        }
        if den > 0.0 {
            0.5 * (1.0 + num / den)
        } else {
            0.5
        }
    };
    let features = (0..cols.len()).map(|j| score(&[j])).collect();
    let group_scores = groups.iter().map(|g| score(g)).collect();
    (features, group_scores)
}

pub fn feature_names(d: usize) -> Vec<String> {
    (0..d).map(|j| format!("x{j}")).collect()
}

/// Mixed light/heavy-tailed columns with a noisy linear output.
pub fn random_table(seed: u64, n: usize, d: usize) -> DataTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let student = StudentT::new(2.5).unwrap();
    let cauchy = Cauchy::new(0.0, 1.0).unwrap();
    let mut cols = Vec::with_capacity(d);
    for _ in 0..d {
        let kind = rng.random_range(0..4);
        let scale = rng.random_range(0.1..5.0);
        let shift = rng.random_range(-3.0..3.0);
        let col: Vec<f64> = (0..n)
            .map(|_| {
                let v: f64 = match kind {
                    0 | 1 => normal.sample(&mut rng),
                    2 => student.sample(&mut rng),
                    _ => f64::clamp(cauchy.sample(&mut rng), -1e4, 1e4),
                };
                shift + scale * v
            })
            .collect();
        cols.push(col);
    }
    let beta: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
    let y: Vec<f64> = (0..n)
        .map(|i| {
            let lin: f64 = (0..d)
                .map(|j| beta[j] * cols[j][i].clamp(-50.0, 50.0))
                .sum();
            lin + normal.sample(&mut rng)
        })
        .collect();
    DataTable::with_output(feature_names(d), cols, "y", y).unwrap()
}

/// A few random, possibly overlapping groups.
pub fn random_groups(seed: u64, d: usize) -> (GroupFamily, Vec<Vec<usize>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
    let count = rng.random_range(1..=4);
    let mut raw = Vec::new();
    for _ in 0..count {
        let size = rng.random_range(1..=d.min(5));
        let mut members: Vec<usize> = (0..size).map(|_| rng.random_range(0..d)).collect();
        members.sort_unstable();
        members.dedup();
        raw.push(members);
    }
    let family = GroupFamily::new(
        raw.iter()
            .enumerate()
            .map(|(i, m)| (format!("g{i}"), m.clone())),
        d,
    )
    .unwrap();
    (family, raw)
}

pub fn random_weights(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED);
    (0..n)
        .map(|_| {
            if rng.random_bool(0.1) {
                0.0
            } else {
                rng.random_range(0.0..3.0)
            }
        })
        .collect()
}

/// Regression table with `informative` leading features whose coefficients
/// grow geometrically from `5 * noise`, so the top of the ranking is well
/// separated.
pub fn regression_table(seed: u64, n: usize, d: usize, informative: usize) -> DataTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let noise = 1.0;
    let beta: Vec<f64> = (0..d)
        .map(|j| {
            if j < informative {
                5.0 * noise * 1.2f64.powi(j as i32)
            } else {
                0.0
            }
        })
        .collect();
    let cols: Vec<Vec<f64>> = (0..d)
        .map(|_| (0..n).map(|_| normal.sample(&mut rng)).collect())
        .collect();
    let y: Vec<f64> = (0..n)
        .map(|i| {
            let mut acc = noise * normal.sample(&mut rng);
            for j in 0..informative {
                acc += beta[j] * cols[j][i];
            }
            acc
        })
        .collect();
    DataTable::with_output(feature_names(d), cols, "y", y).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Copies of the feature columns with `f` applied elementwise.
pub fn map_features(t: &DataTable, f: impl Fn(usize, f64) -> f64) -> Vec<Vec<f64>> {
    t.columns()
        .iter()
        .enumerate()
        .map(|(j, c)| c.iter().map(|&v| f(j, v)).collect())
        .collect()
}

/// Writes the features and every output column as a headed CSV file.
pub fn write_csv(t: &DataTable, path: &std::path::Path) {
    use std::fmt::Write as _;
    let mut s = String::new();
    let mut header: Vec<&str> = t.feature_names().iter().map(String::as_str).collect();
    header.extend(t.output_names());
    s.push_str(&header.join(","));
    s.push('\n');
    for i in 0..t.n() {
        let mut row: Vec<String> = t.columns().iter().map(|c| format!("{:?}", c[i])).collect();
        for name in t.output_names() {
            row.push(format!("{:?}", t.output(name).unwrap()[i]));
        }
        writeln!(s, "{}", row.join(",")).unwrap();
    }
    std::fs::write(path, s).unwrap();
}
