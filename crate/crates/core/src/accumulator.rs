//! Additive co-movement sufficient statistics.

use std::ops::{Add, AddAssign};

/// Running `(N, D)` pair: `N` sums signed co-movement terms, `D` sums their
/// member-wise magnitudes. Two accumulators built over disjoint rows against
/// the same centers add componentwise.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Accumulator {
    pub numerator: f64,
    pub denominator: f64,
}

impl Accumulator {
    pub const ZERO: Accumulator = Accumulator {
        numerator: 0.0,
        denominator: 0.0,
    };

    /// Folds in one sample's signed term `p` and mass `u` (`u >= |p|`).
    #[inline]
    pub fn push(&mut self, p: f64, u: f64) {
        debug_assert!(u >= 0.0);
        self.numerator += p;
        self.denominator += u;
    }

    /// True when there is no co-movement mass and the score is neutral.
    pub fn is_neutral(&self) -> bool {
        self.denominator == 0.0
    }

    /// `N / D`, or 0 when `D = 0`. Clamped to `[-1, 1]` against rounding.
    pub fn ratio(&self) -> f64 {
        if self.is_neutral() {
            0.0
        } else {
            (self.numerator / self.denominator).clamp(-1.0, 1.0)
        }
    }

    /// `(1 + N / D) / 2`, exactly 0.5 when `D = 0`.
    pub fn cir(&self) -> f64 {
        if self.is_neutral() {
            0.5
        } else {
            0.5 * (1.0 + self.ratio())
        }
    }
}

impl Add for Accumulator {
    type Output = Accumulator;

    fn add(self, rhs: Accumulator) -> Accumulator {
        Accumulator {
            numerator: self.numerator + rhs.numerator,
            denominator: self.denominator + rhs.denominator,
        }
    }
}

impl AddAssign for Accumulator {
    fn add_assign(&mut self, rhs: Accumulator) {
        *self = *self + rhs;
    }
}

/// Componentwise sum of two accumulators computed against the same centers.
pub fn merge_accumulators(a: Accumulator, b: Accumulator) -> Accumulator {
    a + b
}

/// Per-feature and per-group accumulators for one output column.
#[derive(Debug, Clone, PartialEq)]
pub struct AccumulatorSet {
    pub features: Vec<Accumulator>,
    pub groups: Vec<Accumulator>,
}

impl AccumulatorSet {
    pub fn zeros(d: usize, groups: usize) -> Self {
        Self {
            features: vec![Accumulator::ZERO; d],
            groups: vec![Accumulator::ZERO; groups],
        }
    }

    /// Componentwise merge. Panics if the shapes differ.
    pub fn merge(mut self, other: &AccumulatorSet) -> Self {
        assert_eq!(self.features.len(), other.features.len());
        assert_eq!(self.groups.len(), other.groups.len());
        for (a, b) in self.features.iter_mut().zip(&other.features) {
            *a += *b;
        }
        for (a, b) in self.groups.iter_mut().zip(&other.groups) {
            *a += *b;
        }
        self
    }

    /// Pairwise (tree) reduction of partial sums in a fixed order, so the
    /// result does not depend on how the partials were produced.
    pub fn reduce_pairwise(mut parts: Vec<AccumulatorSet>) -> Option<AccumulatorSet> {
        while parts.len() > 1 {
            let mut next = Vec::with_capacity(parts.len().div_ceil(2));
            let mut iter = parts.into_iter();
            while let Some(a) = iter.next() {
                match iter.next() {
                    Some(b) => next.push(a.merge(&b)),
                    None => next.push(a),
                }
            }
            parts = next;
        }
        parts.pop()
    }
}
