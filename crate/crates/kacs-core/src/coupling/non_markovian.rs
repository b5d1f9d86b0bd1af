//! The coalescing-phase coupling: proportional updates away from merge
//! points, maximal block-weight couplings at merge points, and an event
//! ledger that audits the block-weight equalities and sign conditions
//! along the way.

use super::good_dist::{good_dist_couple_complex, good_dist_couple_real};
use super::schedule::PartitionSchedule;
use super::{proportional_pair_complex, proportional_pair_real, CoupledPair};
use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::rng::RngStream;
use crate::state::{Field, StateVector};
use num_complex::Complex64;

/// Tolerance for the block-weight equalities of the event chain.
pub const EVENT_TOLERANCE: f64 = 1e-9;

/// Audit entry for one (step, pair) point of the run.
#[derive(Clone, Copy, Debug)]
pub struct EventRecord {
    pub step: usize,
    pub pair: usize,
    pub is_merge: bool,
    /// Whether the good-dist draw coalesced (always true off merge points).
    pub coalesced: bool,
    /// Block-weight equalities (and sign conditions, real case) hold.
    pub event_ok: bool,
    /// `max_S sum_{i in S} |X[i]^2 - Y[i]^2|` over the current partition.
    pub max_block_l1: f64,
}

/// Per-trial audit of the event chain `A(t, k)`.
#[derive(Clone, Debug, Default)]
pub struct EventLedger {
    /// `||A_{T0,1} - B_{T0,1}||_1` at entry.
    pub initial_l1: f64,
    /// The entry event (total weights equal over the initial partition).
    pub initial_event_ok: bool,
    pub records: Vec<EventRecord>,
}

impl EventLedger {
    /// True when every event in the run held.
    pub fn chain_intact(&self) -> bool {
        self.initial_event_ok && self.records.iter().all(|r| r.event_ok)
    }

    /// Number of leading records (after the initial event) with the chain
    /// still intact.
    pub fn intact_prefix_len(&self) -> usize {
        if !self.initial_event_ok {
            return 0;
        }
        self.records.iter().take_while(|r| r.event_ok).count()
    }

    /// Never-drift audit: while the chain is intact, every per-block
    /// weight discrepancy stays below the initial total discrepancy
    /// (with head-room for the float noise of recomputed sums).
    pub fn never_drift_ok(&self) -> bool {
        let slack = 64.0 * f64::EPSILON;
        self.records[..self.intact_prefix_len()]
            .iter()
            .all(|r| r.max_block_l1 <= self.initial_l1 + slack)
    }

    /// Largest per-block discrepancy seen while the chain was intact.
    pub fn max_intact_block_l1(&self) -> f64 {
        self.records[..self.intact_prefix_len()]
            .iter()
            .map(|r| r.max_block_l1)
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct NonMarkovianOutcome {
    /// All amplitudes of the two chains are exactly equal at the end.
    pub coalesced: bool,
    /// Whether the schedule allowed the coalescing path at all.
    pub schedule_connected: bool,
}

/// Checks the block-weight equalities over `partition` and returns
/// `(all_within_tolerance, max_block_discrepancy)`.
fn check_cond1(pair: &CoupledPair, partition: &Partition) -> (bool, f64) {
    let mut ok = true;
    let mut max_l1 = 0.0f64;
    for block in partition.blocks() {
        let mut diff_sum = 0.0;
        let mut l1 = 0.0;
        for &i in block {
            let d = pair.x.amp_sq(i) - pair.y.amp_sq(i);
            diff_sum += d;
            l1 += d.abs();
        }
        if diff_sum.abs() > EVENT_TOLERANCE {
            ok = false;
        }
        max_l1 = max_l1.max(l1);
    }
    (ok, max_l1)
}

fn sign_condition(pair: &CoupledPair, i: usize, j: usize) -> bool {
    match (&pair.x, &pair.y) {
        (StateVector::Real(x), StateVector::Real(y)) => {
            x[i] * y[i] >= 0.0 && x[j] * y[j] >= 0.0
        }
        _ => true,
    }
}

struct MergeContext {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    /// Both touched blocks are singletons, so a coalescing draw can copy
    /// amplitudes bit-exactly.
    singleton: bool,
}

/// Block-weight parameters at a merge point. The real analysis anchors on
/// the block of `i`, the complex one on the block of `j`; either choice
/// pins the complementary block through weight conservation.
fn merge_context(
    pair: &CoupledPair,
    finer: &Partition,
    i: usize,
    j: usize,
    field: Field,
) -> MergeContext {
    let anchor = match field {
        Field::Real => i,
        Field::Complex => j,
    };
    let block = finer.block_containing(anchor);
    let a = block.iter().filter(|&&l| l != anchor).map(|&l| pair.x.amp_sq(l)).sum();
    let c = block.iter().filter(|&&l| l != anchor).map(|&l| pair.y.amp_sq(l)).sum();
    let b = pair.x.amp_sq(i) + pair.x.amp_sq(j);
    let d = pair.y.amp_sq(i) + pair.y.amp_sq(j);
    let singleton =
        finer.block_containing(i).len() == 1 && finer.block_containing(j).len() == 1;
    MergeContext { a, b, c, d, singleton }
}

/// Applies the merge-point coupling to one pair. On a coalescing draw with
/// singleton blocks, the updated `Y` amplitudes are copied from `X` rather
/// than recomputed, which makes eventual coalescence exact in floating
/// point; elsewhere `Y` is re-pointed by the coupled angle.
fn merge_update_real(
    pair: &mut CoupledPair,
    i: usize,
    j: usize,
    ctx: &MergeContext,
    rng: &mut RngStream,
) -> Result<bool> {
    let draw = match good_dist_couple_real(ctx.a, ctx.b, ctx.c, ctx.d, rng) {
        Ok(d) => d,
        Err(Error::DegenerateScale(_)) => {
            // A zero-weight subvector: fall back to independent angles.
            let theta = rng.uniform_angle();
            let theta_p = rng.uniform_angle();
            set_pair_real(&mut pair.x, i, j, ctx.b.sqrt(), theta);
            set_pair_real(&mut pair.y, i, j, ctx.d.sqrt(), theta_p);
            return Ok(false);
        }
        Err(e) => return Err(e),
    };
    set_pair_real(&mut pair.x, i, j, ctx.b.sqrt(), draw.first);
    if draw.coalesced && ctx.singleton {
        copy_pair(pair, i, j);
    } else {
        set_pair_real(&mut pair.y, i, j, ctx.d.sqrt(), draw.second);
    }
    Ok(draw.coalesced)
}

fn set_pair_real(state: &mut StateVector, i: usize, j: usize, len: f64, theta: f64) {
    if let StateVector::Real(v) = state {
        let (s, c) = theta.sin_cos();
        v[i] = len * c;
        v[j] = len * s;
    }
}

fn merge_update_complex(
    pair: &mut CoupledPair,
    i: usize,
    j: usize,
    ctx: &MergeContext,
    rng: &mut RngStream,
) -> Result<bool> {
    let alpha = rng.uniform_angle();
    let beta = rng.uniform_angle();
    let draw = match good_dist_couple_complex(ctx.a, ctx.b, ctx.c, ctx.d, rng) {
        Ok(d) => d,
        Err(Error::DegenerateScale(_)) => {
            let zeta = rng.uniform_f64();
            let zeta_p = rng.uniform_f64();
            set_pair_complex(&mut pair.x, i, j, ctx.b.sqrt(), alpha, beta, zeta);
            set_pair_complex(&mut pair.y, i, j, ctx.d.sqrt(), alpha, beta, zeta_p);
            return Ok(false);
        }
        Err(e) => return Err(e),
    };
    set_pair_complex(&mut pair.x, i, j, ctx.b.sqrt(), alpha, beta, draw.first);
    if draw.coalesced && ctx.singleton {
        copy_pair(pair, i, j);
    } else {
        set_pair_complex(&mut pair.y, i, j, ctx.d.sqrt(), alpha, beta, draw.second);
    }
    Ok(draw.coalesced)
}

fn set_pair_complex(
    state: &mut StateVector,
    i: usize,
    j: usize,
    len: f64,
    alpha: f64,
    beta: f64,
    zeta: f64,
) {
    if let StateVector::Complex(v) = state {
        let theta = zeta.sqrt().asin();
        let (s, c) = theta.sin_cos();
        v[i] = Complex64::from_polar(len * c, alpha);
        v[j] = Complex64::from_polar(len * s, -beta);
    }
}

fn copy_pair(pair: &mut CoupledPair, i: usize, j: usize) {
    match (&pair.x, &mut pair.y) {
        (StateVector::Real(x), StateVector::Real(y)) => {
            y[i] = x[i];
            y[j] = x[j];
        }
        (StateVector::Complex(x), StateVector::Complex(y)) => {
            y[i] = x[i];
            y[j] = x[j];
        }
        _ => {}
    }
}

/// Runs the non-Markovian coupling over the schedule's window. When the
/// schedule's initial partition is not the one-block partition, the run
/// falls back to the identical-randomness coupling (both chains driven by
/// the same angles), which cannot report coalescence unless the chains
/// already agree.
pub fn non_markovian_run(
    pair: &mut CoupledPair,
    schedule: &PartitionSchedule,
    rng: &RngStream,
) -> Result<(NonMarkovianOutcome, EventLedger)> {
    if pair.dim() != schedule.dim() && schedule.steps() > 0 {
        return Err(Error::InvalidDimension {
            dim: schedule.dim(),
            reason: "schedule dimension mismatch",
        });
    }
    let mut ledger = EventLedger {
        initial_l1: pair.l1_weight_distance(),
        initial_event_ok: check_cond1(pair, schedule.initial_partition()).0,
        records: Vec::new(),
    };

    if !schedule.is_connected() {
        run_identical_randomness(pair, schedule, rng)?;
        let outcome =
            NonMarkovianOutcome { coalesced: pair.x == pair.y, schedule_connected: false };
        return Ok((outcome, ledger));
    }

    let field = pair.field();
    for t_rel in 0..schedule.steps() {
        let step_rng = rng.substream(t_rel as u64);
        let matching = schedule.matching(t_rel);
        for (k, &(i, j)) in matching.pairs().iter().enumerate() {
            let mut pair_rng = step_rng.substream(1 + k as u64);
            let is_merge = schedule.is_merge_point(t_rel, k);
            let coalesced = if is_merge {
                let finer = schedule.partition(t_rel, k + 1);
                let ctx = merge_context(pair, finer, i, j, field);
                match field {
                    Field::Real => merge_update_real(pair, i, j, &ctx, &mut pair_rng)?,
                    Field::Complex => merge_update_complex(pair, i, j, &ctx, &mut pair_rng)?,
                }
            } else {
                match field {
                    Field::Real => proportional_pair_real(pair, i, j, &mut pair_rng)?,
                    Field::Complex => proportional_pair_complex(pair, i, j, &mut pair_rng)?,
                }
                true
            };
            let (cond1_ok, max_block_l1) = check_cond1(pair, schedule.partition(t_rel, k + 1));
            let event_ok = cond1_ok && sign_condition(pair, i, j);
            ledger.records.push(EventRecord {
                step: schedule.t0() + t_rel,
                pair: k,
                is_merge,
                coalesced,
                event_ok,
                max_block_l1,
            });
        }
    }
    let outcome = NonMarkovianOutcome { coalesced: pair.x == pair.y, schedule_connected: true };
    Ok((outcome, ledger))
}

/// Step-4 fallback: both chains take the same walk steps.
fn run_identical_randomness(
    pair: &mut CoupledPair,
    schedule: &PartitionSchedule,
    rng: &RngStream,
) -> Result<()> {
    for t_rel in 0..schedule.steps() {
        let step_rng = rng.substream(t_rel as u64);
        let matching = schedule.matching(t_rel);
        let angles =
            crate::walk::sample_step_angles(pair.field(), matching.num_pairs(), &step_rng);
        crate::walk::parallel_step(&mut pair.x, matching, &angles)?;
        crate::walk::parallel_step(&mut pair.y, matching, &angles)?;
    }
    Ok(())
}
