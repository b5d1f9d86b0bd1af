//! Backward construction of the partition schedule that drives the
//! non-Markovian coupling: matchings are sampled for the whole window
//! up front, then partitions are built from all-singletons at the final
//! time back to the initial one, merging the blocks of each pair as it
//! is passed. A pair whose endpoints sat in distinct blocks is a merge
//! point (the set `H`).

use crate::error::{Error, Result};
use crate::matching::{sample_matching, Matching};
use crate::partition::Partition;
use crate::rng::RngStream;

#[derive(Clone, Debug)]
pub struct PartitionSchedule {
    t0: usize,
    t_end: usize,
    matchings: Vec<Matching>,
    /// `partitions[t - t0][k]` is the partition in effect before pair `k`
    /// of step `t` is applied; index `k = m` holds the partition after the
    /// step's last pair (equal to the next step's entry 0).
    partitions: Vec<Vec<Partition>>,
    /// `merge[t - t0][k]` flags pair `k` of step `t` as a merge point.
    merge: Vec<Vec<bool>>,
    final_partition: Partition,
}

impl PartitionSchedule {
    pub fn t0(&self) -> usize {
        self.t0
    }

    pub fn t_end(&self) -> usize {
        self.t_end
    }

    pub fn steps(&self) -> usize {
        self.t_end - self.t0
    }

    pub fn dim(&self) -> usize {
        self.final_partition.dim()
    }

    pub fn matchings(&self) -> &[Matching] {
        &self.matchings
    }

    pub fn matching(&self, t_rel: usize) -> &Matching {
        &self.matchings[t_rel]
    }

    /// Partition in effect before pair `k` of relative step `t_rel`;
    /// `k` may equal the pair count to address the post-step partition.
    pub fn partition(&self, t_rel: usize, k: usize) -> &Partition {
        &self.partitions[t_rel][k]
    }

    pub fn is_merge_point(&self, t_rel: usize, k: usize) -> bool {
        self.merge[t_rel][k]
    }

    /// The earliest partition, `P_{T0,1}`.
    pub fn initial_partition(&self) -> &Partition {
        if self.steps() == 0 {
            &self.final_partition
        } else {
            &self.partitions[0][0]
        }
    }

    /// All-singletons partition at the final time.
    pub fn final_partition(&self) -> &Partition {
        &self.final_partition
    }

    /// Whether the schedule reached the one-block partition, i.e. the
    /// union of the window's matchings is a connected graph.
    pub fn is_connected(&self) -> bool {
        self.initial_partition().is_single_block()
    }

    /// Number of merge points `|H|`.
    pub fn merge_count(&self) -> usize {
        self.merge.iter().map(|row| row.iter().filter(|&&b| b).count()).sum()
    }
}

/// Builds the schedule from explicitly given matchings (first entry is
/// applied at `t0`).
pub fn build_schedule_from_matchings(
    w: usize,
    matchings: Vec<Matching>,
    t0: usize,
) -> Result<PartitionSchedule> {
    let steps = matchings.len();
    if matchings.iter().any(|m| m.dim() != w) {
        return Err(Error::Parameter("matchings disagree on dimension".into()));
    }
    let final_partition = Partition::singletons(w);
    let mut partitions = vec![Vec::new(); steps];
    let mut merge = vec![Vec::new(); steps];
    let mut current = final_partition.clone();
    for t_rel in (0..steps).rev() {
        let m = matchings[t_rel].num_pairs();
        let mut row = Vec::with_capacity(m + 1);
        row.push(current.clone());
        let mut flags = vec![false; m];
        // Backward over pairs: row is built from the post-step side.
        for k in (0..m).rev() {
            let (i, j) = matchings[t_rel].pairs()[k];
            let mut p = row.last().unwrap().clone();
            flags[k] = p.merge(i, j);
            row.push(p);
        }
        row.reverse();
        current = row[0].clone();
        partitions[t_rel] = row;
        merge[t_rel] = flags;
    }
    Ok(PartitionSchedule {
        t0,
        t_end: t0 + steps,
        matchings,
        partitions,
        merge,
        final_partition,
    })
}

/// Samples the matchings for `t in [t0, t_end)` and builds the schedule.
/// Step `t` draws its matching from `rng.substream(t - t0).substream(0)`,
/// the same lane layout as the walk.
pub fn build_partition_schedule(
    w: usize,
    t0: usize,
    t_end: usize,
    rng: &RngStream,
) -> Result<PartitionSchedule> {
    if t_end < t0 {
        return Err(Error::Parameter(format!("empty window: t0 = {t0}, t_end = {t_end}")));
    }
    let matchings = (0..t_end - t0)
        .map(|t_rel| sample_matching(w, &mut rng.substream(t_rel as u64).substream(0)))
        .collect::<Result<Vec<_>>>()?;
    build_schedule_from_matchings(w, matchings, t0)
}
