//! Partitions of the coordinate set, used by the backward construction
//! of the non-Markovian coupling.

use crate::error::{Error, Result};

/// A partition of `{0, ..., dim-1}` into disjoint nonempty blocks.
/// Blocks are kept in canonical form: members sorted, blocks ordered by
/// smallest member, so `==` is structural equality of set partitions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    dim: usize,
    block_of: Vec<usize>,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// The all-singletons partition `{{0}, ..., {dim-1}}`.
    pub fn singletons(dim: usize) -> Self {
        Partition {
            dim,
            block_of: (0..dim).collect(),
            blocks: (0..dim).map(|i| vec![i]).collect(),
        }
    }

    pub fn from_blocks(dim: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut block_of = vec![usize::MAX; dim];
        for (b, members) in blocks.iter().enumerate() {
            if members.is_empty() {
                return Err(Error::Parameter("empty block".into()));
            }
            for &i in members {
                if i >= dim || block_of[i] != usize::MAX {
                    return Err(Error::Index(format!("index {i} missing or repeated")));
                }
                block_of[i] = b;
            }
        }
        if block_of.iter().any(|&b| b == usize::MAX) {
            return Err(Error::Parameter("blocks do not cover the index set".into()));
        }
        let mut p = Partition { dim, block_of, blocks };
        p.canonicalize();
        Ok(p)
    }

    fn canonicalize(&mut self) {
        for b in &mut self.blocks {
            b.sort_unstable();
        }
        self.blocks.sort_by_key(|b| b[0]);
        for (id, members) in self.blocks.iter().enumerate() {
            for &i in members {
                self.block_of[i] = id;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_id(&self, i: usize) -> usize {
        self.block_of[i]
    }

    pub fn block_containing(&self, i: usize) -> &[usize] {
        &self.blocks[self.block_of[i]]
    }

    pub fn same_block(&self, i: usize, j: usize) -> bool {
        self.block_of[i] == self.block_of[j]
    }

    pub fn is_single_block(&self) -> bool {
        self.blocks.len() == 1
    }

    /// Merges the blocks containing `i` and `j`; returns `false` (and
    /// leaves the partition unchanged) when they already share a block.
    pub fn merge(&mut self, i: usize, j: usize) -> bool {
        let (a, b) = (self.block_of[i], self.block_of[j]);
        if a == b {
            return false;
        }
        let (keep, drop) = (a.min(b), a.max(b));
        let moved = std::mem::take(&mut self.blocks[drop]);
        self.blocks[keep].extend(moved);
        self.blocks.remove(drop);
        self.canonicalize();
        true
    }

    /// True when every block of `self` is contained in a block of
    /// `other` (i.e. `self` refines `other`).
    pub fn refines(&self, other: &Partition) -> bool {
        self.dim == other.dim
            && self
                .blocks
                .iter()
                .all(|b| b.iter().all(|&i| other.block_of[i] == other.block_of[b[0]]))
    }
}
