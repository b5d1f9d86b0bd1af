//! Deterministic gate-parameter construction steering one state to
//! another: bisect the index set bit by bit, matching the 2-norm of every
//! prefix block of the target, then fix the final pair values. Real
//! targets need `n` gates, complex ones `n + 1` (one gate to zero the
//! pair's second entries, one to rebuild magnitudes and phases).
//!
//! Discrete mode returns the same construction with every table truncated
//! to `d` bits; composing those gates lands within `T 2^{1-d} pi` (real)
//! or `T 2^{6-d/2}` (complex) of the target in 2-norm.

use super::{apply_gate, GateParams, Permutation};
use crate::bits::AngleTable;
use crate::error::{Error, Result};
use crate::state::{Field, StateVector};
use std::f64::consts::TAU;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SteerMode {
    Continuous,
    Discrete(u32),
}

/// Angle as a fraction of the full turn, in `[0, 1)`.
fn unit_fraction(angle: f64) -> f64 {
    let f = angle.rem_euclid(TAU) / TAU;
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// 2-norm of `state` over the index range `[lo, lo + len)`.
fn range_norm(state: &StateVector, lo: usize, len: usize) -> f64 {
    (lo..lo + len).map(|i| state.amp_sq(i)).sum::<f64>().sqrt()
}

/// `arccos(a / b)` guarded against float overshoot; 0 when `b` vanishes.
fn safe_arccos_ratio(a: f64, b: f64) -> f64 {
    if b <= 0.0 {
        0.0
    } else {
        (a / b).clamp(-1.0, 1.0).acos()
    }
}

fn steer_real(eta: &StateVector, xi: &StateVector, n: u32) -> Result<Vec<GateParams>> {
    let mut current = eta.clone();
    let mut gates = Vec::with_capacity(n as usize);
    let xi_v = xi.as_real()?;
    for t in 1..=n {
        let sigma = Permutation::bit_to_front(n, t);
        let z_count = 1usize << (n - t);
        let block = z_count * 2;
        let mut values = vec![0.0f64; 1 << (n - 1)];
        let cur = current.as_real()?;
        for y in 0..1usize << (t - 1) {
            let base = y * block;
            let alpha = if t < n {
                let l_parent = range_norm(xi, base, block);
                safe_arccos_ratio(range_norm(xi, base, z_count), l_parent)
            } else {
                xi_v[base + 1].atan2(xi_v[base])
            };
            for z in 0..z_count {
                let beta = cur[base + z_count + z].atan2(cur[base + z]);
                values[y * z_count + z] = unit_fraction(alpha - beta);
            }
        }
        let params =
            GateParams::real(sigma, AngleTable::from_values(n, values)?)?;
        apply_gate(&mut current, &params)?;
        gates.push(params);
    }
    Ok(gates)
}

fn steer_complex(eta: &StateVector, xi: &StateVector, n: u32) -> Result<Vec<GateParams>> {
    let mut current = eta.clone();
    let mut gates = Vec::with_capacity(n as usize + 1);
    let xi_v = xi.as_complex()?;
    let half = 1usize << (n - 1);

    // Steps 1..n-1: match the target's prefix-block lengths.
    for t in 1..n {
        let sigma = Permutation::bit_to_front(n, t);
        let z_count = 1usize << (n - t);
        let block = z_count * 2;
        let mut f = vec![0.0f64; half];
        let mut g = vec![0.0f64; half];
        let mut h = vec![0.0f64; half];
        let cur = current.as_complex()?;
        for y in 0..1usize << (t - 1) {
            let base = y * block;
            let l_parent = range_norm(xi, base, block);
            let alpha = safe_arccos_ratio(range_norm(xi, base, z_count), l_parent);
            for z in 0..z_count {
                let (a0, a1) = (cur[base + z], cur[base + z_count + z]);
                let pair_norm = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
                let rho = safe_arccos_ratio(a0.norm(), pair_norm);
                let delta = alpha - rho;
                let w = y * z_count + z;
                f[w] = (delta.sin().powi(2)).min(1.0);
                g[w] = unit_fraction(a1.arg());
                // Rotations by a negative delta are realized by shifting
                // the second phase factor by pi.
                let flip = if delta < 0.0 { 0.5 } else { 0.0 };
                h[w] = (unit_fraction(a0.arg()) + flip).rem_euclid(1.0);
            }
        }
        let params = GateParams::complex(
            sigma,
            AngleTable::from_values(n, f)?,
            AngleTable::from_values(n, g)?,
            AngleTable::from_values(n, h)?,
        )?;
        apply_gate(&mut current, &params)?;
        gates.push(params);
    }

    // Step n: zero the second entry of every pair.
    let sigma_n = Permutation::bit_to_front(n, n);
    {
        let mut f = vec![0.0f64; half];
        let mut g = vec![0.0f64; half];
        let mut h = vec![0.0f64; half];
        let cur = current.as_complex()?;
        for y in 0..half {
            let (a0, a1) = (cur[2 * y], cur[2 * y + 1]);
            let pair_sq = a0.norm_sqr() + a1.norm_sqr();
            if pair_sq > 0.0 {
                f[y] = (a1.norm_sqr() / pair_sq).min(1.0);
                g[y] = unit_fraction(-a0.arg());
                h[y] = unit_fraction(std::f64::consts::PI - a1.arg());
            }
        }
        let params = GateParams::complex(
            sigma_n.clone(),
            AngleTable::from_values(n, f)?,
            AngleTable::from_values(n, g)?,
            AngleTable::from_values(n, h)?,
        )?;
        apply_gate(&mut current, &params)?;
        gates.push(params);
    }

    // Step n+1: rebuild the target pair magnitudes and phases.
    {
        let mut f = vec![0.0f64; half];
        let mut g = vec![0.0f64; half];
        let mut h = vec![0.0f64; half];
        for y in 0..half {
            let (x0, x1) = (xi_v[2 * y], xi_v[2 * y + 1]);
            let pair_sq = x0.norm_sqr() + x1.norm_sqr();
            if pair_sq > 0.0 {
                f[y] = (x1.norm_sqr() / pair_sq).min(1.0);
                g[y] = unit_fraction(x0.arg());
                h[y] = unit_fraction(-x1.arg());
            }
        }
        let params = GateParams::complex(
            sigma_n,
            AngleTable::from_values(n, f)?,
            AngleTable::from_values(n, g)?,
            AngleTable::from_values(n, h)?,
        )?;
        apply_gate(&mut current, &params)?;
        gates.push(params);
    }
    let _ = current;
    Ok(gates)
}

/// Builds the gate sequence carrying `eta` to `xi`. Continuous mode is
/// exact up to float error; `Discrete(d)` truncates every table to `d`
/// bits, trading exactness for the composition bound.
pub fn steer_to_target(
    eta: &StateVector,
    xi: &StateVector,
    mode: SteerMode,
) -> Result<Vec<GateParams>> {
    if eta.field() != xi.field() || eta.dim() != xi.dim() {
        return Err(Error::Parameter("steering needs matching field and dimension".into()));
    }
    let dim = eta.dim();
    if !dim.is_power_of_two() || dim < 2 {
        return Err(Error::InvalidDimension { dim, reason: "steering needs dim = 2^n >= 2" });
    }
    eta.check_norm()?;
    xi.check_norm()?;
    let n = dim.trailing_zeros();
    let gates = match eta.field() {
        Field::Real => steer_real(eta, xi, n)?,
        Field::Complex => steer_complex(eta, xi, n)?,
    };
    match mode {
        SteerMode::Continuous => Ok(gates),
        SteerMode::Discrete(d) => gates.iter().map(|g| g.truncated(d)).collect(),
    }
}

/// Convenience: applies a steering gate list in order.
pub fn apply_gate_sequence(state: &StateVector, gates: &[GateParams]) -> Result<StateVector> {
    let mut out = state.clone();
    for g in gates {
        apply_gate(&mut out, g)?;
    }
    Ok(out)
}
