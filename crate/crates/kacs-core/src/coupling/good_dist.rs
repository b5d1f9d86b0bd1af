//! Maximal couplings of the per-pair block-weight statistics used at
//! merge points.
//!
//! Both couplings follow the same recipe: draw the first variable from
//! its marginal, accept the shared value with probability
//! `min(1, q(S)/p(S))`, otherwise rejection-sample the second variable
//! from the residual density. The probability that the shared value is
//! accepted equals the overlap `int min(p, q)`, which is what the merge
//! analysis needs, and both marginals stay exactly uniform.

use crate::error::{Error, Result};
use crate::rng::RngStream;

const MAX_REJECTION_ROUNDS: usize = 1_000_000;

/// Outcome of one coupled draw. `first`/`second` are the two angle
/// variables; `coalesced` reports whether the shared-value branch fired,
/// i.e. whether the two derived statistics are intended to be equal.
/// (The flag exists because floating-point recomputation of `S` from the
/// returned second variable cannot witness exact equality.)
#[derive(Clone, Copy, Debug)]
pub struct CoupledDraw {
    pub first: f64,
    pub second: f64,
    pub coalesced: bool,
}

fn check_scales(b: f64, d: f64) -> Result<()> {
    if !(b > 0.0) || !(d > 0.0) {
        return Err(Error::DegenerateScale(format!("interval widths B = {b}, D = {d}")));
    }
    Ok(())
}

/// Couples `zeta, zeta' ~ Unif[0,1)` to maximize `Pr[A + B zeta = C + D zeta']`:
/// the maximal coupling of the uniform distributions on `[A, A+B]` and
/// `[C, C+D]`. Returns `(zeta, zeta')` plus the coalescence flag.
pub fn good_dist_couple_complex(
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    rng: &mut RngStream,
) -> Result<CoupledDraw> {
    check_scales(b, d)?;
    let zeta = rng.uniform_f64();
    let s = a + b * zeta;
    let w = rng.uniform_f64();
    // Accept shared value iff w * p(s) <= q(s), with p = 1/B on [A, A+B]
    // and q = 1/D on [C, C+D].
    if s >= c && s <= c + d && w * d <= b {
        let zeta_p = ((s - c) / d).clamp(0.0, 1.0 - f64::EPSILON);
        return Ok(CoupledDraw { first: zeta, second: zeta_p, coalesced: true });
    }
    for _ in 0..MAX_REJECTION_ROUNDS {
        let zeta_p = rng.uniform_f64();
        let sp = c + d * zeta_p;
        let wp = rng.uniform_f64();
        // Accept iff wp * q(sp) > p(sp).
        if sp < a || sp > a + b || wp * b > d {
            return Ok(CoupledDraw { first: zeta, second: zeta_p, coalesced: false });
        }
    }
    // Unreachable for non-degenerate parameters; keep the marginal by
    // falling back to an independent draw.
    Ok(CoupledDraw { first: zeta, second: rng.uniform_f64(), coalesced: false })
}

/// Density of `S = A + B cos^2(theta)` for uniform `theta`, up to the
/// common factor `1/pi`: `1 / (B sqrt(u(1-u)))` with `u = (s-A)/B`.
/// Returns `+inf` on the boundary and 0 outside the support.
fn arcsine_density(s: f64, a: f64, b: f64) -> f64 {
    let u = (s - a) / b;
    if !(0.0..=1.0).contains(&u) {
        return 0.0;
    }
    let g = u * (1.0 - u);
    if g <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / (b * g.sqrt())
    }
}

/// Reconstructs the angle in `theta`'s quadrant with `cos^2 = u`.
fn angle_in_same_quadrant(u: f64, theta: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    let c = u.sqrt().copysign(theta.cos());
    let s = (1.0 - u).sqrt().copysign(theta.sin());
    s.atan2(c).rem_euclid(std::f64::consts::TAU)
}

/// Couples `theta, theta' ~ Unif[0, 2pi)` to maximize
/// `Pr[A + B cos^2 theta = C + D cos^2 theta']` subject to
/// `cos(theta) cos(theta') >= 0` and `sin(theta) sin(theta') >= 0`.
///
/// The statistics `S`, `S'` follow arcsine laws on `[A, A+B]` and
/// `[C, C+D]`. Only `cos^2 theta'` is pinned by the maximal coupling of
/// those laws; the quadrant of `theta` is uniform and independent of
/// `cos^2 theta`, so placing `theta'` in the same quadrant keeps its
/// marginal exactly uniform while enforcing both sign constraints on
/// every draw (not just coalescing ones).
pub fn good_dist_couple_real(
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    rng: &mut RngStream,
) -> Result<CoupledDraw> {
    check_scales(b, d)?;
    let theta = rng.uniform_angle();
    let u = theta.cos().powi(2);
    let s = a + b * u;
    let w = rng.uniform_f64();
    let p = arcsine_density(s, a, b);
    let q = arcsine_density(s, c, d);
    let coalesce = if p.is_infinite() { q.is_infinite() } else { w * p <= q };
    if coalesce {
        let theta_p = angle_in_same_quadrant((s - c) / d, theta);
        return Ok(CoupledDraw { first: theta, second: theta_p, coalesced: true });
    }
    for _ in 0..MAX_REJECTION_ROUNDS {
        let proposal = rng.uniform_angle();
        let up = proposal.cos().powi(2);
        let sp = c + d * up;
        let wp = rng.uniform_f64();
        let pp = arcsine_density(sp, a, b);
        let qp = arcsine_density(sp, c, d);
        // Accept iff wp * q(sp) > p(sp); an infinite p forces rejection.
        let accept = if pp == 0.0 {
            true
        } else if pp.is_infinite() {
            false
        } else if qp.is_infinite() {
            true
        } else {
            wp * qp > pp
        };
        if accept {
            let theta_p = angle_in_same_quadrant(up, theta);
            return Ok(CoupledDraw { first: theta, second: theta_p, coalesced: false });
        }
    }
    Ok(CoupledDraw {
        first: theta,
        second: angle_in_same_quadrant(rng.uniform_f64(), theta),
        coalesced: false,
    })
}
