//! Feature sets and per-row weights.

use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};

/// One named feature set. Indices are sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureGroup {
    pub name: String,
    pub members: Vec<usize>,
}

/// Named, possibly overlapping feature sets over `d` features.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroupFamily {
    groups: Vec<FeatureGroup>,
}

impl GroupFamily {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Validates every group against `d` features. Group order is preserved.
    pub fn new<I, S, M>(groups: I, d: usize) -> Result<Self>
    where
        I: IntoIterator<Item = (S, M)>,
        S: Into<String>,
        M: IntoIterator<Item = usize>,
    {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (name, members) in groups {
            let name = name.into();
            if name.is_empty() {
                return Err(Error::InvalidGroup("group name is empty".into()));
            }
            if !seen.insert(name.clone()) {
                return Err(Error::InvalidGroup(format!(
                    "duplicate group name `{name}`"
                )));
            }
            let members: BTreeSet<usize> = members.into_iter().collect();
            if members.is_empty() {
                return Err(Error::InvalidGroup(format!("group `{name}` is empty")));
            }
            if let Some(&bad) = members.iter().find(|&&j| j >= d) {
                return Err(Error::InvalidGroup(format!(
                    "group `{name}` references feature index {bad}, but d = {d}"
                )));
            }
            out.push(FeatureGroup {
                name,
                members: members.into_iter().collect(),
            });
        }
        Ok(Self { groups: out })
    }

    /// One singleton group per feature, named after the feature.
    pub fn singletons(feature_names: &[String]) -> Self {
        Self {
            groups: feature_names
                .iter()
                .enumerate()
                .map(|(j, name)| FeatureGroup {
                    name: name.clone(),
                    members: vec![j],
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, FeatureGroup> {
        self.groups.iter()
    }

    /// Re-checks index bounds against a table with `d` features.
    pub fn validate(&self, d: usize) -> Result<()> {
        for g in &self.groups {
            if let Some(&bad) = g.members.iter().find(|&&j| j >= d) {
                return Err(Error::InvalidGroup(format!(
                    "group `{}` references feature index {bad}, but d = {d}",
                    g.name
                )));
            }
        }
        Ok(())
    }
}

impl<'a> IntoIterator for &'a GroupFamily {
    type Item = &'a FeatureGroup;
    type IntoIter = std::slice::Iter<'a, FeatureGroup>;

    fn into_iter(self) -> Self::IntoIter {
        self.groups.iter()
    }
}

/// Nonnegative per-row weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if let Some((row, &value)) = w
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidWeight { row, value });
        }
        Ok(Self(w))
    }

    pub fn uniform(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn select_rows(&self, rows: &[usize]) -> WeightVector {
        WeightVector(rows.iter().map(|&i| self.0[i]).collect())
    }
}
