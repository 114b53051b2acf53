use std::collections::HashSet;

use crate::error::{Error, Result};

/// Ordered index sets for a transfer query: `source → target`, conditioning
/// on nothing else; every other state is the remainder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubspacePartition {
    n: usize,
    source: Vec<usize>,
    target: Vec<usize>,
    remainder: Vec<usize>,
}

impl SubspacePartition {
    pub fn new(n: usize, source: &[usize], target: &[usize]) -> Result<Self> {
        if source.is_empty() || target.is_empty() {
            return Err(Error::InvalidPartition(
                "source and target must be non-empty".into(),
            ));
        }
        let mut seen = HashSet::new();
        for &i in source.iter().chain(target) {
            if i >= n {
                return Err(Error::InvalidPartition(format!(
                    "index {i} out of range for {n} states"
                )));
            }
            if !seen.insert(i) {
                return Err(Error::InvalidPartition(format!(
                    "index {i} repeated or shared by source and target"
                )));
            }
        }
        let remainder = (0..n).filter(|i| !seen.contains(i)).collect();
        Ok(Self {
            n,
            source: source.to_vec(),
            target: target.to_vec(),
            remainder,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn source(&self) -> &[usize] {
        &self.source
    }

    pub fn target(&self) -> &[usize] {
        &self.target
    }

    pub fn remainder(&self) -> &[usize] {
        &self.remainder
    }

    /// Source followed by remainder: the `x` block.
    pub fn non_target(&self) -> Vec<usize> {
        self.source.iter().chain(&self.remainder).copied().collect()
    }
}

/// Named, disjoint groups covering every state exactly once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSpec {
    groups: Vec<(String, Vec<usize>)>,
}

impl GroupSpec {
    pub fn new(n: usize, groups: Vec<(String, Vec<usize>)>) -> Result<Self> {
        let mut names = HashSet::new();
        let mut covered = vec![false; n];
        for (name, idx) in &groups {
            if !names.insert(name.as_str()) {
                return Err(Error::InvalidPartition(format!(
                    "duplicate group name {name:?}"
                )));
            }
            if idx.is_empty() {
                return Err(Error::InvalidPartition(format!("group {name:?} is empty")));
            }
            for &i in idx {
                if i >= n {
                    return Err(Error::InvalidPartition(format!(
                        "index {i} out of range in {name:?}"
                    )));
                }
                if covered[i] {
                    return Err(Error::InvalidPartition(format!(
                        "index {i} in more than one group"
                    )));
                }
                covered[i] = true;
            }
        }
        if let Some(i) = covered.iter().position(|c| !c) {
            return Err(Error::InvalidPartition(format!(
                "index {i} not covered by any group"
            )));
        }
        Ok(Self { groups })
    }

    /// One group per state, named by its label.
    pub fn singletons(labels: &[String]) -> Self {
        Self {
            groups: labels
                .iter()
                .enumerate()
                .map(|(i, l)| (l.clone(), vec![i]))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn name(&self, g: usize) -> &str {
        &self.groups[g].0
    }

    pub fn indices(&self, g: usize) -> &[usize] {
        &self.groups[g].1
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.groups.iter().map(|(n, _)| n.as_str())
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.groups.iter().position(|(n, _)| n == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn remainder_is_complement_in_order() {
        let p = SubspacePartition::new(5, &[3], &[0, 4]).unwrap();
        assert_eq!(p.remainder(), &[1, 2]);
        assert_eq!(p.non_target(), vec![3, 1, 2]);
    }

    #[test]
    fn invalid_partitions() {
        assert!(SubspacePartition::new(3, &[], &[1]).is_err());
        assert!(SubspacePartition::new(3, &[0], &[0]).is_err());
        assert!(SubspacePartition::new(3, &[0], &[3]).is_err());
    }

    #[test]
    fn group_spec_must_cover() {
        assert!(GroupSpec::new(3, vec![("a".into(), vec![0, 1])]).is_err());
        assert!(GroupSpec::new(2, vec![("a".into(), vec![0]), ("a".into(), vec![1])]).is_err());
        assert!(GroupSpec::new(2, vec![("a".into(), vec![0, 1]), ("b".into(), vec![1])]).is_err());
        let g = GroupSpec::new(3, vec![("a".into(), vec![2, 0]), ("b".into(), vec![1])]).unwrap();
        assert_eq!(g.position("b"), Some(1));
    }
}
