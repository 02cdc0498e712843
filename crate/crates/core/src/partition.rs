//! Equivalence relations on `{0..n}` in canonical form.

use std::fmt;

/// Blocks are numbered by first occurrence, so the block of the least
/// element is block 0 and blocks are ordered by their least element. Two
/// partitions are equal as relations iff they are equal as values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    labels: Vec<usize>,
    blocks: usize,
}

impl Partition {
    /// Canonicalizes arbitrary labels: elements with equal labels share a block.
    pub fn from_labels<T: Eq + std::hash::Hash + Copy>(labels: &[T]) -> Partition {
        let mut seen = std::collections::HashMap::new();
        let labels: Vec<usize> = labels
            .iter()
            .map(|l| {
                let next = seen.len();
                *seen.entry(*l).or_insert(next)
            })
            .collect();
        Partition {
            blocks: seen.len(),
            labels,
        }
    }

    pub fn diagonal(n: usize) -> Partition {
        Partition {
            labels: (0..n).collect(),
            blocks: n,
        }
    }

    pub fn full(n: usize) -> Partition {
        Partition {
            labels: vec![0; n],
            blocks: usize::from(n > 0),
        }
    }

    /// Least equivalence containing `pairs`.
    pub fn generated(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Partition {
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (a, b) in pairs {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let roots: Vec<usize> = (0..n).map(|x| find(&mut parent, x)).collect();
        Partition::from_labels(&roots)
    }

    /// Number of elements of the underlying set.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, a: usize) -> usize {
        self.labels[a]
    }

    pub fn related(&self, a: usize, b: usize) -> bool {
        self.labels[a] == self.labels[b]
    }

    pub fn is_diagonal(&self) -> bool {
        self.blocks == self.labels.len()
    }

    pub fn is_full(&self) -> bool {
        self.blocks <= 1
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.blocks];
        for (a, &l) in self.labels.iter().enumerate() {
            out[l].push(a);
        }
        out
    }

    /// Least element of each block, in block order.
    pub fn representatives(&self) -> Vec<usize> {
        let mut reps = Vec::with_capacity(self.blocks);
        for (a, &l) in self.labels.iter().enumerate() {
            if l == reps.len() {
                reps.push(a);
            }
        }
        reps
    }

    /// Intersection of the two relations.
    pub fn meet(&self, other: &Partition) -> Partition {
        assert_eq!(self.len(), other.len());
        let pairs: Vec<(usize, usize)> = self
            .labels
            .iter()
            .zip(&other.labels)
            .map(|(&a, &b)| (a, b))
            .collect();
        Partition::from_labels(&pairs)
    }

    /// `self ⊆ other` as relations.
    pub fn refines(&self, other: &Partition) -> bool {
        assert_eq!(self.len(), other.len());
        let mut image = vec![usize::MAX; self.blocks];
        for (&mine, &theirs) in self.labels.iter().zip(&other.labels) {
            if image[mine] == usize::MAX {
                image[mine] = theirs;
            } else if image[mine] != theirs {
                return false;
            }
        }
        true
    }

    /// Relabels through a bijection: `a ~' b` iff `map[a] ~ map[b]`.
    pub fn pull_back(&self, map: &[usize]) -> Partition {
        let labels: Vec<usize> = map.iter().map(|&m| self.labels[m]).collect();
        Partition::from_labels(&labels)
    }

    /// Canonical text encoding, e.g. `0.0.1`.
    pub fn encode(&self) -> String {
        let parts: Vec<String> = self.labels.iter().map(usize::to_string).collect();
        parts.join(".")
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let blocks = self.blocks();
        for (i, b) in blocks.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            let items: Vec<String> = b.iter().map(usize::to_string).collect();
            write!(f, "{{{}}}", items.join(","))?;
        }
        Ok(())
    }
}
