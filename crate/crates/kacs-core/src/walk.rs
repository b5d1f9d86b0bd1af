//! Exact (continuous-parameter) parallel Kac's walk on real and complex
//! spheres. One step pairs all coordinates by a uniform matching and
//! rotates every pair independently: planar rotations in the real case,
//! Haar SU(2) elements in the complex case.

use crate::error::{Error, Result};
use crate::haar::{su2_haar_sample, Su2Params};
use crate::matching::{sample_matching, Matching};
use crate::rng::RngStream;
use crate::state::{Field, StateVector};

/// Per-pair rotation parameters for one step.
#[derive(Clone, Debug, PartialEq)]
pub enum StepAngles {
    Real(Vec<f64>),
    Complex(Vec<Su2Params>),
}

impl StepAngles {
    pub fn len(&self) -> usize {
        match self {
            StepAngles::Real(v) => v.len(),
            StepAngles::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Everything needed to replay one walk step.
#[derive(Clone, Debug)]
pub struct WalkStepRecord {
    pub step: usize,
    pub matching: Matching,
    pub angles: StepAngles,
}

fn check_pair(dim: usize, i: usize, j: usize) -> Result<()> {
    if i == j {
        return Err(Error::Index(format!("rotation needs distinct indices, got i = j = {i}")));
    }
    if i >= dim || j >= dim {
        return Err(Error::Index(format!("pair ({i}, {j}) out of range for dim {dim}")));
    }
    Ok(())
}

impl StateVector {
    /// Planar rotation of the coordinate pair `(i, j)` by `theta`:
    /// `(v_i, v_j) <- (cos t * v_i - sin t * v_j, sin t * v_i + cos t * v_j)`.
    pub fn rotate_pair(&mut self, i: usize, j: usize, theta: f64) -> Result<()> {
        check_pair(self.dim(), i, j)?;
        let (s, c) = theta.sin_cos();
        match self {
            StateVector::Real(v) => {
                let (a, b) = (v[i], v[j]);
                v[i] = c * a - s * b;
                v[j] = s * a + c * b;
            }
            StateVector::Complex(v) => {
                let (a, b) = (v[i], v[j]);
                v[i] = a * c - b * s;
                v[j] = a * s + b * c;
            }
        }
        Ok(())
    }

    /// Applies the SU(2) element `U(alpha, beta, theta)` to the pair `(i, j)`.
    pub fn rotate_pair_su2(&mut self, i: usize, j: usize, u: &Su2Params) -> Result<()> {
        check_pair(self.dim(), i, j)?;
        match self {
            StateVector::Complex(v) => {
                let m = u.matrix();
                let (a, b) = (v[i], v[j]);
                v[i] = m[0][0] * a + m[0][1] * b;
                v[j] = m[1][0] * a + m[1][1] * b;
                Ok(())
            }
            StateVector::Real(_) => {
                Err(Error::Parameter("SU(2) rotation needs a complex state".into()))
            }
        }
    }
}

/// One step of the parallel walk: rotates every pair of `matching` by its
/// angle. Pairs are disjoint, so the result does not depend on the order
/// in which they are processed.
pub fn parallel_step(
    state: &mut StateVector,
    matching: &Matching,
    angles: &StepAngles,
) -> Result<()> {
    if matching.dim() != state.dim() {
        return Err(Error::InvalidDimension {
            dim: matching.dim(),
            reason: "matching dimension mismatch",
        });
    }
    if angles.len() != matching.num_pairs() {
        return Err(Error::Parameter(format!(
            "need {} angles, got {}",
            matching.num_pairs(),
            angles.len()
        )));
    }
    match (angles, state.field()) {
        (StepAngles::Real(thetas), _) => {
            for (&(i, j), &theta) in matching.pairs().iter().zip(thetas) {
                state.rotate_pair(i, j, theta)?;
            }
        }
        (StepAngles::Complex(us), Field::Complex) => {
            for (&(i, j), u) in matching.pairs().iter().zip(us) {
                state.rotate_pair_su2(i, j, u)?;
            }
        }
        (StepAngles::Complex(_), Field::Real) => {
            return Err(Error::Parameter("SU(2) angles need a complex state".into()));
        }
    }
    Ok(())
}

/// Draws the angle set for one step. Per-pair draws consume rng lanes
/// indexed by pair rank, so they are independent of scheduling.
pub fn sample_step_angles(field: Field, pairs: usize, step_rng: &RngStream) -> StepAngles {
    match field {
        Field::Real => StepAngles::Real(
            (0..pairs).map(|k| step_rng.substream(1 + k as u64).uniform_angle()).collect(),
        ),
        Field::Complex => StepAngles::Complex(
            (0..pairs).map(|k| su2_haar_sample(&mut step_rng.substream(1 + k as u64))).collect(),
        ),
    }
}

/// Runs `t_steps` independent walk steps from `state0`. Deterministic
/// given `rng`: step `t` consumes `rng.substream(t)`, with lane 0 for the
/// matching and lane `1 + k` for pair `k`'s angles.
pub fn run_walk(
    state0: &StateVector,
    t_steps: usize,
    rng: &RngStream,
) -> Result<(StateVector, Vec<WalkStepRecord>)> {
    let w = state0.dim();
    if w % 2 != 0 || w < 2 {
        return Err(Error::InvalidDimension { dim: w, reason: "walk needs even dim >= 2" });
    }
    let mut state = state0.clone();
    let mut trace = Vec::with_capacity(t_steps);
    for t in 0..t_steps {
        let step_rng = rng.substream(t as u64);
        let matching = sample_matching(w, &mut step_rng.substream(0))?;
        let angles = sample_step_angles(state.field(), matching.num_pairs(), &step_rng);
        parallel_step(&mut state, &matching, &angles)?;
        trace.push(WalkStepRecord { step: t, matching, angles });
    }
    Ok((state, trace))
}
