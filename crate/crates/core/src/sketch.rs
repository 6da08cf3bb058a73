//! Greenwald–Khanna streaming quantile summary.
//!
//! Each stored tuple `(v, g, delta)` carries the rank gap `g` to its
//! predecessor and the rank uncertainty `delta`, so that the true rank of `v`
//! lies in `[rmin, rmin + delta]` where `rmin` is the running sum of `g`.
//! Keeping `g + delta <= floor(2 * eps * n)` for every tuple is what yields
//! the `eps * n` rank guarantee on queries.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
struct Tuple {
    value: f64,
    g: u64,
    delta: u64,
}

#[derive(Debug, Clone)]
pub struct GkSketch {
    epsilon: f64,
    tuples: Vec<Tuple>,
    count: u64,
    compress_every: u64,
    since_compress: u64,
}

impl GkSketch {
    pub const DEFAULT_EPSILON: f64 = 0.01;

    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::InvalidInput(format!(
                "sketch epsilon {epsilon} must lie in (0, 0.5)"
            )));
        }
        Ok(Self {
            epsilon,
            tuples: Vec::new(),
            count: 0,
            compress_every: (1.0 / (2.0 * epsilon)).ceil() as u64,
            since_compress: 0,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Items inserted so far.
    pub fn count(&self) -> u64 {
        self.count
    }

    /// Number of stored tuples.
    pub fn size(&self) -> usize {
        self.tuples.len()
    }

    fn capacity(&self) -> u64 {
        (2.0 * self.epsilon * self.count as f64).floor() as u64
    }

    pub fn insert(&mut self, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::InvalidInput(format!(
                "cannot sketch non-finite value {value}"
            )));
        }
        let pos = self.tuples.partition_point(|t| t.value <= value);
        let delta = if pos == 0 || pos == self.tuples.len() {
            0
        } else {
            self.capacity().saturating_sub(1)
        };
        self.tuples.insert(pos, Tuple { value, g: 1, delta });
        self.count += 1;

        self.since_compress += 1;
        if self.since_compress >= self.compress_every {
            self.compress();
            self.since_compress = 0;
        }
        Ok(())
    }

    /// Merges adjacent tuples whose combined band still fits the error budget.
    /// The first and last tuples (exact min and max) are never absorbed.
    fn compress(&mut self) {
        let cap = self.capacity();
        if self.tuples.len() < 3 {
            return;
        }
        let mut kept: Vec<Tuple> = Vec::with_capacity(self.tuples.len());
        // Walk right to left, folding each tuple into its right neighbour
        // (the top of `kept`) whenever the merged band fits.
        let last = self.tuples.len() - 1;
        kept.push(self.tuples[last]);
        for i in (1..last).rev() {
            let t = self.tuples[i];
            let right = kept.last_mut().expect("nonempty");
            if t.g + right.g + right.delta <= cap {
                right.g += t.g;
            } else {
                kept.push(t);
            }
        }
        kept.push(self.tuples[0]);
        kept.reverse();
        self.tuples = kept;
    }

    /// Value whose rank is within `eps * count` of `alpha * count`: the
    /// stored tuple whose rank band `[rmin, rmax]` sits closest to the target.
    pub fn query(&self, alpha: f64) -> Result<f64> {
        if self.tuples.is_empty() {
            return Err(Error::EmptySketch);
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidInput(format!(
                "quantile level {alpha} outside [0, 1]"
            )));
        }
        let target = alpha * self.count as f64;
        let mut rmin = 0u64;
        let mut best = (f64::INFINITY, self.tuples[0].value);
        for t in &self.tuples {
            rmin += t.g;
            let lo = rmin as f64;
            let hi = (rmin + t.delta) as f64;
            let err = (target - lo).max(hi - target);
            if err < best.0 {
                best = (err, t.value);
            }
        }
        Ok(best.1)
    }

    /// `(Q(0.25) + Q(0.75)) / 2` from sketch queries.
    pub fn midmean(&self) -> Result<f64> {
        Ok(0.5 * (self.query(0.25)? + self.query(0.75)?))
    }

    #[cfg(test)]
    fn check_invariants(&self) {
        let total: u64 = self.tuples.iter().map(|t| t.g).sum();
        assert_eq!(total, self.count);
        assert!(self.tuples.windows(2).all(|w| w[0].value <= w[1].value));
        let cap = self.capacity().max(1);
        for t in &self.tuples {
            assert!(t.g + t.delta <= cap, "{t:?} cap {cap}");
        }
    }
}
