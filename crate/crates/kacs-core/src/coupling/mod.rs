//! Coupling machinery for pairs of parallel Kac's walks: the proportional
//! couplings that contract squared-amplitude profiles, the backward
//! partition schedule, the maximal angle couplings used at merge points,
//! and the non-Markovian coalescing run built from all of them.

mod good_dist;
mod non_markovian;
mod schedule;

pub use good_dist::{good_dist_couple_complex, good_dist_couple_real, CoupledDraw};
pub use non_markovian::{non_markovian_run, EventLedger, EventRecord, NonMarkovianOutcome};
pub use schedule::{build_partition_schedule, build_schedule_from_matchings, PartitionSchedule};

use crate::error::{Error, Result};
use crate::matching::Matching;
use crate::rng::RngStream;
use crate::state::{Field, StateVector};
use num_complex::Complex64;

/// Two coupled chains sharing field and dimension.
#[derive(Clone, Debug)]
pub struct CoupledPair {
    pub x: StateVector,
    pub y: StateVector,
}

impl CoupledPair {
    pub fn new(x: StateVector, y: StateVector) -> Result<Self> {
        if x.field() != y.field() || x.dim() != y.dim() {
            return Err(Error::Parameter("coupled chains must share field and dim".into()));
        }
        Ok(Self { x, y })
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    pub fn field(&self) -> Field {
        self.x.field()
    }

    /// `sum_i (|X[i]|^2 - |Y[i]|^2)^2`, the contraction statistic.
    pub fn contraction_statistic(&self) -> f64 {
        (0..self.dim()).map(|i| (self.x.amp_sq(i) - self.y.amp_sq(i)).powi(2)).sum()
    }

    /// `sum_i | |X[i]|^2 - |Y[i]|^2 |`.
    pub fn l1_weight_distance(&self) -> f64 {
        (0..self.dim()).map(|i| (self.x.amp_sq(i) - self.y.amp_sq(i)).abs()).sum()
    }
}

/// One pair update of the real proportional coupling. `X`'s subvector is
/// rotated by the uniform angle; `Y`'s subvector is re-pointed along the
/// same direction, which is the unique valid angle choice whenever the
/// subvectors are nonzero.
pub(crate) fn proportional_pair_real(
    pair: &mut CoupledPair,
    i: usize,
    j: usize,
    rng: &mut RngStream,
) -> Result<()> {
    let theta = rng.uniform_angle();
    let (xv, yv) = match (&mut pair.x, &mut pair.y) {
        (StateVector::Real(x), StateVector::Real(y)) => (x, y),
        _ => return Err(Error::Parameter("real coupling needs real states".into())),
    };
    // Pre-rotation subvector lengths; a rotation preserves them exactly in
    // real arithmetic, and using the shared pre-update values keeps the
    // coupling diagonal absorbing bit-for-bit.
    let rx = xv[i].hypot(xv[j]);
    let ry = yv[i].hypot(yv[j]);
    let (s, c) = theta.sin_cos();
    let (a, b) = (xv[i], xv[j]);
    xv[i] = c * a - s * b;
    xv[j] = s * a + c * b;
    if ry == rx {
        // Shared magnitudes: the diagonal is absorbing, bit-exactly.
        yv[i] = xv[i];
        yv[j] = xv[j];
    } else if rx > 0.0 {
        let scale = ry / rx;
        yv[i] = xv[i] * scale;
        yv[j] = xv[j] * scale;
    } else {
        // Degenerate X subvector: every argument is compatible, draw one.
        let phi = rng.uniform_angle();
        let (s, c) = phi.sin_cos();
        yv[i] = ry * c;
        yv[j] = ry * s;
    }
    Ok(())
}

/// One pair update of the complex proportional coupling. Both subvectors
/// are aligned to `(length, 0)` and hit with the same Haar SU(2) draw, so
/// the updated coordinates share arguments exactly.
pub(crate) fn proportional_pair_complex(
    pair: &mut CoupledPair,
    i: usize,
    j: usize,
    rng: &mut RngStream,
) -> Result<()> {
    let alpha = rng.uniform_angle();
    let beta = rng.uniform_angle();
    let theta = rng.uniform_f64().sqrt().asin();
    let (xv, yv) = match (&mut pair.x, &mut pair.y) {
        (StateVector::Complex(x), StateVector::Complex(y)) => (x, y),
        _ => return Err(Error::Parameter("complex coupling needs complex states".into())),
    };
    let (s, c) = theta.sin_cos();
    let dir_i = Complex64::from_polar(c, alpha);
    let dir_j = Complex64::from_polar(s, -beta);
    let lx = (xv[i].norm_sqr() + xv[j].norm_sqr()).sqrt();
    let ly = (yv[i].norm_sqr() + yv[j].norm_sqr()).sqrt();
    xv[i] = dir_i * lx;
    xv[j] = dir_j * lx;
    if ly == lx {
        yv[i] = xv[i];
        yv[j] = xv[j];
    } else {
        yv[i] = dir_i * ly;
        yv[j] = dir_j * ly;
    }
    Ok(())
}

/// One full step of the real proportional coupling on a shared matching.
/// Pair `k` consumes rng lane `1 + k`, matching the walk's convention.
pub fn proportional_step_real(
    pair: &mut CoupledPair,
    matching: &Matching,
    rng: &RngStream,
) -> Result<()> {
    for (k, &(i, j)) in matching.pairs().iter().enumerate() {
        proportional_pair_real(pair, i, j, &mut rng.substream(1 + k as u64))?;
    }
    Ok(())
}

/// One full step of the complex proportional coupling.
pub fn proportional_step_complex(
    pair: &mut CoupledPair,
    matching: &Matching,
    rng: &RngStream,
) -> Result<()> {
    for (k, &(i, j)) in matching.pairs().iter().enumerate() {
        proportional_pair_complex(pair, i, j, &mut rng.substream(1 + k as u64))?;
    }
    Ok(())
}

/// Runs `steps` proportional-coupling steps, sampling a fresh matching per
/// step (lane 0) and pair angles (lanes `1 + k`), exactly like `run_walk`.
pub fn run_proportional_coupling(
    pair: &mut CoupledPair,
    steps: usize,
    rng: &RngStream,
) -> Result<()> {
    let w = pair.dim();
    for t in 0..steps {
        let step_rng = rng.substream(t as u64);
        let matching = crate::matching::sample_matching(w, &mut step_rng.substream(0))?;
        match pair.field() {
            Field::Real => proportional_step_real(pair, &matching, &step_rng)?,
            Field::Complex => proportional_step_complex(pair, &matching, &step_rng)?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::haar_sphere_sample;
    use crate::matching::sample_matching;
    use crate::state::Field;

    fn fresh_pair(w: usize, field: Field, seed: u64) -> CoupledPair {
        let mut rng = RngStream::from_seed_u64(seed);
        let x = StateVector::basis(field, w, 0).unwrap();
        let y = haar_sphere_sample(w, field, &mut rng).unwrap();
        CoupledPair::new(x, y).unwrap()
    }

    #[test]
    fn contraction_statistic_examples() {
        let x = StateVector::basis(Field::Real, 2, 0).unwrap();
        let y = StateVector::basis(Field::Real, 2, 1).unwrap();
        let p = CoupledPair::new(x.clone(), y).unwrap();
        assert_eq!(p.contraction_statistic(), 2.0);
        let p = CoupledPair::new(x.clone(), x.clone()).unwrap();
        assert_eq!(p.contraction_statistic(), 0.0);
        let half = StateVector::unit_real(vec![0.5f64.sqrt(), 0.5f64.sqrt()]).unwrap();
        let p = CoupledPair::new(half, x).unwrap();
        assert!((p.contraction_statistic() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn diagonal_is_absorbing_real_and_complex() {
        for field in [Field::Real, Field::Complex] {
            let mut rng = RngStream::from_seed_u64(31);
            let x = haar_sphere_sample(8, field, &mut rng).unwrap();
            let mut pair = CoupledPair::new(x.clone(), x).unwrap();
            run_proportional_coupling(&mut pair, 5, &RngStream::from_seed_u64(32)).unwrap();
            assert_eq!(pair.x, pair.y, "{field} diagonal must stay exactly equal");
        }
    }

    #[test]
    fn real_coupling_aligns_signs() {
        let mut pair = fresh_pair(16, Field::Real, 33);
        let root = RngStream::from_seed_u64(34);
        for t in 0..20 {
            let step = root.substream(t);
            let m = sample_matching(16, &mut step.substream(0)).unwrap();
            proportional_step_real(&mut pair, &m, &step).unwrap();
            let (x, y) = (pair.x.as_real().unwrap(), pair.y.as_real().unwrap());
            for i in 0..16 {
                assert!(x[i] * y[i] >= 0.0, "sign misalignment at {i}");
            }
        }
        assert!((pair.x.norm() - 1.0).abs() < 1e-12);
        assert!((pair.y.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complex_coupling_aligns_arguments() {
        let mut pair = fresh_pair(16, Field::Complex, 35);
        let root = RngStream::from_seed_u64(36);
        for t in 0..20 {
            let step = root.substream(t);
            let m = sample_matching(16, &mut step.substream(0)).unwrap();
            proportional_step_complex(&mut pair, &m, &step).unwrap();
        }
        let (x, y) = (pair.x.as_complex().unwrap(), pair.y.as_complex().unwrap());
        for i in 0..16 {
            if x[i].norm() > 1e-12 && y[i].norm() > 1e-12 {
                let mut d = (x[i].arg() - y[i].arg()).abs();
                d = d.min((std::f64::consts::TAU - d).abs());
                assert!(d < 1e-9, "argument mismatch {d} at {i}");
            }
        }
    }

    /// Contraction at the expected rates, small-scale version of the
    /// acceptance criterion.
    fn contraction_check(field: Field, rate: f64) {
        let w = 64;
        let trials = 1500;
        let root = RngStream::from_seed_u64(37);
        for l in [5usize, 10, 20] {
            let mut acc = crate::analysis::stats::Welford::new();
            for trial in 0..trials {
                let trial_rng = root.substream((l * 100_000 + trial) as u64);
                let mut pair = CoupledPair::new(
                    StateVector::basis(field, w, 0).unwrap(),
                    haar_sphere_sample(w, field, &mut trial_rng.substream(1_000_000)).unwrap(),
                )
                .unwrap();
                run_proportional_coupling(&mut pair, l, &trial_rng).unwrap();
                acc.push(pair.contraction_statistic());
            }
            let bound = 2.0 * rate.powi(l as i32);
            assert!(
                acc.mean() <= bound + 3.0 * acc.stderr(),
                "{field} l={l}: mean {} vs bound {bound} (se {})",
                acc.mean(),
                acc.stderr()
            );
        }
    }

    #[test]
    fn real_contraction_rate() {
        contraction_check(Field::Real, 0.75);
    }

    #[test]
    fn complex_contraction_rate() {
        contraction_check(Field::Complex, 2.0 / 3.0);
    }

    #[test]
    fn marginal_validity_of_y_chain() {
        // The Y-projection of the coupling must be distributed like an
        // unconstrained walk started at Y_0 (two-sample KS on a coordinate).
        let w = 8;
        let steps = 6;
        let trials = 4000;
        let root = RngStream::from_seed_u64(38);
        let y0 = haar_sphere_sample(w, Field::Real, &mut RngStream::from_seed_u64(39)).unwrap();
        let mut coupled: Vec<f64> = Vec::with_capacity(trials);
        let mut free: Vec<f64> = Vec::with_capacity(trials);
        for trial in 0..trials {
            let r = root.substream(trial as u64);
            let mut pair = CoupledPair::new(
                StateVector::basis(Field::Real, w, 0).unwrap(),
                y0.clone(),
            )
            .unwrap();
            run_proportional_coupling(&mut pair, steps, &r).unwrap();
            coupled.push(pair.y.as_real().unwrap()[0]);
            let (s, _) = crate::walk::run_walk(&y0, steps, &r.substream(u64::MAX - 1)).unwrap();
            free.push(s.as_real().unwrap()[0]);
        }
        let p = crate::analysis::stats::ks_two_sample_p(&mut coupled, &mut free);
        assert!(p > 0.01, "KS p = {p}");
    }
}
