//! Uniform perfect matchings of coordinate indices (the pairing `P_t`
//! of one walk step). Indices are 0-based throughout the crate.

use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    dim: usize,
    pairs: Vec<(usize, usize)>,
}

impl Matching {
    /// Validates that `pairs` is a perfect matching of `{0, ..., dim-1}`.
    pub fn new(dim: usize, pairs: Vec<(usize, usize)>) -> Result<Self> {
        if dim < 2 || dim % 2 != 0 {
            return Err(Error::InvalidDimension { dim, reason: "matching needs even dim >= 2" });
        }
        if pairs.len() != dim / 2 {
            return Err(Error::Parameter(format!(
                "expected {} pairs, got {}",
                dim / 2,
                pairs.len()
            )));
        }
        let mut seen = vec![false; dim];
        for &(i, j) in &pairs {
            if i >= dim || j >= dim || i == j {
                return Err(Error::Index(format!("bad pair ({i}, {j}) for dim {dim}")));
            }
            if seen[i] || seen[j] {
                return Err(Error::Index(format!("index repeated in pair ({i}, {j})")));
            }
            seen[i] = true;
            seen[j] = true;
        }
        Ok(Self { dim, pairs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn num_pairs(&self) -> usize {
        self.pairs.len()
    }

    /// A canonical form (each pair ordered, pairs sorted) for counting
    /// distinct matchings in statistical tests.
    pub fn canonical(&self) -> Vec<(usize, usize)> {
        let mut c: Vec<(usize, usize)> =
            self.pairs.iter().map(|&(i, j)| (i.min(j), i.max(j))).collect();
        c.sort_unstable();
        c
    }
}

/// Samples a uniformly random perfect matching of `{0, ..., w-1}`:
/// shuffle the index array, pair consecutive entries. Every matching
/// corresponds to exactly `2^{w/2} * (w/2)!` orderings, hence the
/// distribution is uniform.
pub fn sample_matching(w: usize, rng: &mut RngStream) -> Result<Matching> {
    if w < 2 || w % 2 != 0 {
        return Err(Error::InvalidDimension { dim: w, reason: "matching needs even dim >= 2" });
    }
    let mut idx: Vec<usize> = (0..w).collect();
    // Fisher-Yates.
    for i in (1..w).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        idx.swap(i, j);
    }
    let pairs = idx.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    Matching::new(w, pairs)
}

/// Enumerates all `(w-1)!!` perfect matchings; oracle for uniformity tests.
pub fn enumerate_matchings(w: usize) -> Result<Vec<Vec<(usize, usize)>>> {
    if w < 2 || w % 2 != 0 {
        return Err(Error::InvalidDimension { dim: w, reason: "matching needs even dim >= 2" });
    }
    let mut out = Vec::new();
    let mut remaining: Vec<usize> = (0..w).collect();
    let mut current = Vec::new();
    fn recurse(
        remaining: &mut Vec<usize>,
        current: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if remaining.is_empty() {
            out.push(current.clone());
            return;
        }
        let first = remaining[0];
        for pos in 1..remaining.len() {
            let partner = remaining[pos];
            let mut rest: Vec<usize> = remaining
                .iter()
                .copied()
                .filter(|&x| x != first && x != partner)
                .collect();
            current.push((first, partner));
            recurse(&mut rest, current, out);
            current.pop();
        }
    }
    recurse(&mut remaining, &mut current, &mut out);
    Ok(out)
}
