//! Reference Haar samplers on spheres and SU(2), plus the tail-probability
//! estimator used to check the small-coordinate tail bounds.
//!
//! The Gaussian-normalize sampler is exact, so it doubles as the ground
//! truth oracle for all mixing tests: Haar moments quoted anywhere in the
//! statistics come from these samplers, never from hard-coded constants.

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::state::{Field, StateVector};
use num_complex::Complex64;

/// Angle triple parameterizing an SU(2) element
/// `U(alpha, beta, theta) = [[e^{ia} cos t, -e^{ib} sin t], [e^{-ib} sin t, e^{-ia} cos t]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Su2Params {
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
}

impl Su2Params {
    pub const IDENTITY: Su2Params = Su2Params { alpha: 0.0, beta: 0.0, theta: 0.0 };

    /// The induced 2x2 unitary, row-major.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        let (s, c) = self.theta.sin_cos();
        let ea = Complex64::from_polar(1.0, self.alpha);
        let eb = Complex64::from_polar(1.0, self.beta);
        [[ea * c, -eb * s], [eb.conj() * s, ea.conj() * c]]
    }

    /// `det U = 1` exactly in real arithmetic; returns the float value.
    pub fn det(&self) -> Complex64 {
        let m = self.matrix();
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }
}

/// Exact Haar sample on the unit sphere of `R^w` or `C^w`:
/// i.i.d. standard Gaussians, normalized.
pub fn haar_sphere_sample(w: usize, field: Field, rng: &mut RngStream) -> Result<StateVector> {
    if w < 1 {
        return Err(Error::InvalidDimension { dim: w, reason: "need dim >= 1" });
    }
    loop {
        let state = match field {
            Field::Real => {
                let v: Vec<f64> = (0..w).map(|_| rng.standard_normal()).collect();
                StateVector::normalized_real(v)
            }
            Field::Complex => {
                let v: Vec<Complex64> = (0..w)
                    .map(|_| Complex64::new(rng.standard_normal(), rng.standard_normal()))
                    .collect();
                StateVector::normalized_complex(v)
            }
        };
        match state {
            Ok(s) => return Ok(s),
            // Resample on the (measure-zero) degenerate draw.
            Err(Error::DegenerateScale(_)) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// Haar sample on SU(2): alpha, beta uniform on `[0, 2pi)` and
/// `theta = arcsin(sqrt(zeta))` with `zeta` uniform on `[0, 1)`.
pub fn su2_haar_sample(rng: &mut RngStream) -> Su2Params {
    let alpha = rng.uniform_angle();
    let beta = rng.uniform_angle();
    let theta = rng.uniform_f64().sqrt().asin();
    Su2Params { alpha, beta, theta }
}

/// Monte Carlo estimate with binomial standard error.
#[derive(Clone, Copy, Debug)]
pub struct TailEstimate {
    /// Empirical `Pr[|Y[0]|^2 <= threshold]`.
    pub estimate: f64,
    pub stderr: f64,
    pub threshold: f64,
    /// Analytic upper bound for the probability.
    pub bound: f64,
    pub trials: u64,
}

/// Estimates the probability that the first coordinate of a Haar vector
/// is small: `Pr[Y[0]^2 <= W^{-3c}]` (real) or `Pr[|Y[0]|^2 <= (2W)^{-3c}]`
/// (complex), with the corresponding bounds `2 W^{1-c}` / `2 (2W)^{1-c}`.
pub fn haar_tail_probability(
    w: usize,
    c: f64,
    field: Field,
    trials: u64,
    rng: &RngStream,
) -> Result<TailEstimate> {
    if c <= 1.0 {
        return Err(Error::Parameter(format!("tail exponent c = {c} must exceed 1")));
    }
    if trials < 1 {
        return Err(Error::Parameter("need at least one trial".into()));
    }
    let base = match field {
        Field::Real => w as f64,
        Field::Complex => 2.0 * w as f64,
    };
    let threshold = base.powf(-3.0 * c);
    let bound = 2.0 * base.powf(1.0 - c);
    let mut hits = 0u64;
    let mut local = rng.substream(0);
    for _ in 0..trials {
        let y = haar_sphere_sample(w, field, &mut local)?;
        if y.amp_sq(0) <= threshold {
            hits += 1;
        }
    }
    let p = hits as f64 / trials as f64;
    let stderr = (p * (1.0 - p) / trials as f64).sqrt();
    Ok(TailEstimate { estimate: p, stderr, threshold, bound, trials })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_sample_is_unit() {
        let mut rng = RngStream::from_seed_u64(2);
        for _ in 0..50 {
            let s = haar_sphere_sample(8, Field::Real, &mut rng).unwrap();
            assert!((s.norm() - 1.0).abs() < 1e-12);
            let s = haar_sphere_sample(5, Field::Complex, &mut rng).unwrap();
            assert!((s.norm() - 1.0).abs() < 1e-12);
        }
        assert!(haar_sphere_sample(0, Field::Real, &mut rng).is_err());
    }

    #[test]
    fn second_moment_by_symmetry() {
        // E[x_0^2] = 1/W is forced by permutation symmetry.
        let mut rng = RngStream::from_seed_u64(3);
        let n = 100_000;
        let mean: f64 =
            (0..n).map(|_| haar_sphere_sample(8, Field::Real, &mut rng).unwrap().amp_sq(0)).sum::<f64>()
                / n as f64;
        assert!((mean - 0.125).abs() < 0.003, "mean {mean}");
    }

    /// Independent sphere sampler: rejection from the cube.
    fn rejection_sphere_sample(w: usize, rng: &mut RngStream) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..w).map(|_| 2.0 * rng.uniform_f64() - 1.0).collect();
            let n2: f64 = v.iter().map(|x| x * x).sum();
            if n2 <= 1.0 && n2 > 1e-12 {
                let n = n2.sqrt();
                return v.into_iter().map(|x| x / n).collect();
            }
        }
    }

    #[test]
    fn fourth_moment_matches_rejection_oracle() {
        let n = 100_000;
        let mut rng = RngStream::from_seed_u64(4);
        let mut gauss = Vec::with_capacity(n);
        let mut reject = Vec::with_capacity(n);
        for _ in 0..n {
            let s = haar_sphere_sample(4, Field::Real, &mut rng).unwrap();
            gauss.push(s.amp_sq(0) * s.amp_sq(0));
            let r = rejection_sphere_sample(4, &mut rng);
            reject.push(r[0].powi(4));
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let var = |v: &[f64], m: f64| {
            v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)
        };
        let (mg, mr) = (mean(&gauss), mean(&reject));
        let se = (var(&gauss, mg) / n as f64 + var(&reject, mr) / n as f64).sqrt();
        assert!((mg - mr).abs() < 3.0 * se, "gauss {mg} vs rejection {mr} (se {se})");
    }

    #[test]
    fn su2_determinant_and_orthonormality() {
        let mut rng = RngStream::from_seed_u64(5);
        for _ in 0..1000 {
            let u = su2_haar_sample(&mut rng);
            assert!((u.det() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            let m = u.matrix();
            // Columns orthonormal.
            let c0 = (m[0][0].norm_sqr() + m[1][0].norm_sqr()).sqrt();
            let c1 = (m[0][1].norm_sqr() + m[1][1].norm_sqr()).sqrt();
            let dot = m[0][0].conj() * m[0][1] + m[1][0].conj() * m[1][1];
            assert!((c0 - 1.0).abs() < 1e-12 && (c1 - 1.0).abs() < 1e-12);
            assert!(dot.norm() < 1e-12);
        }
    }

    /// Haar-on-U(2) oracle via Gram-Schmidt of a complex Ginibre matrix;
    /// the |U_11|^2 marginal agrees with SU(2) Haar.
    fn ginibre_u2_entry_sq(rng: &mut RngStream) -> f64 {
        let g = |r: &mut RngStream| Complex64::new(r.standard_normal(), r.standard_normal());
        let (a, b) = (g(rng), g(rng));
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        (a / n).norm_sqr()
    }

    #[test]
    fn su2_first_entry_moment_matches_qr_oracle() {
        let n = 100_000;
        let mut rng = RngStream::from_seed_u64(6);
        let mut su2_mean = 0.0;
        let mut oracle_mean = 0.0;
        for _ in 0..n {
            su2_mean += su2_haar_sample(&mut rng).matrix()[0][0].norm_sqr();
            oracle_mean += ginibre_u2_entry_sq(&mut rng);
        }
        su2_mean /= n as f64;
        oracle_mean /= n as f64;
        assert!((su2_mean - 0.5).abs() < 0.005, "E|U11|^2 = {su2_mean}");
        assert!((su2_mean - oracle_mean).abs() < 0.005);
    }

    #[test]
    fn su2_cos_sq_theta_moment() {
        let n = 100_000;
        let mut rng = RngStream::from_seed_u64(7);
        let mean: f64 =
            (0..n).map(|_| su2_haar_sample(&mut rng).theta.cos().powi(2)).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.005);
    }

    #[test]
    fn tail_bounds_hold() {
        let rng = RngStream::from_seed_u64(8);
        let real = haar_tail_probability(16, 2.0, Field::Real, 20_000, &rng).unwrap();
        assert!(real.estimate <= real.bound + 3.0 * real.stderr);
        assert!((real.bound - 0.125).abs() < 1e-12);
        let cplx = haar_tail_probability(16, 2.0, Field::Complex, 20_000, &rng.substream(1)).unwrap();
        assert!(cplx.estimate <= cplx.bound + 3.0 * cplx.stderr);
        assert!((cplx.bound - 0.0625).abs() < 1e-12);
        assert!(haar_tail_probability(16, 1.0, Field::Real, 10, &rng).is_err());
    }

    /// Quadrature oracle for the exact tail mass: Y[0]^2 ~ Beta(1/2, (W-1)/2),
    /// so Pr[Y^2 <= eps] = (2 / B(1/2, (W-1)/2)) * int_0^{sqrt(eps)} (1-u^2)^{(W-3)/2} du.
    fn beta_tail_quadrature(w: usize, eps: f64) -> f64 {
        use statrs::function::gamma::ln_gamma;
        let a = 0.5;
        let b = (w as f64 - 1.0) / 2.0;
        let ln_beta = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
        let upper = eps.sqrt();
        // Simpson's rule on the substituted (smooth) integrand.
        let steps = 10_000;
        let h = upper / steps as f64;
        let f = |u: f64| (1.0 - u * u).powf((w as f64 - 3.0) / 2.0);
        let mut acc = f(0.0) + f(upper);
        for k in 1..steps {
            let u = k as f64 * h;
            acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(u);
        }
        let integral = acc * h / 3.0;
        2.0 * integral / ln_beta.exp()
    }

    #[test]
    fn tail_matches_quadrature_oracle() {
        let w = 8;
        let c = 4.0;
        let rng = RngStream::from_seed_u64(9);
        let est = haar_tail_probability(w, c, Field::Real, 100_000, &rng).unwrap();
        let exact = beta_tail_quadrature(w, est.threshold);
        let se = (exact / est.trials as f64).sqrt().max(1e-9);
        assert!(
            (est.estimate - exact).abs() <= 3.0 * se + 1.0 / est.trials as f64,
            "estimate {} vs quadrature {exact}",
            est.estimate
        );
    }

    #[test]
    fn orthogonal_invariance_under_coordinate_permutation() {
        // Empirical moments of a fixed permuted coordinate match the
        // unpermuted ones (two-sample KS on x_sigma(0) vs x_0).
        let n = 20_000;
        let mut rng = RngStream::from_seed_u64(10);
        let mut a: Vec<f64> = Vec::with_capacity(n);
        let mut b: Vec<f64> = Vec::with_capacity(n);
        for _ in 0..n {
            let s = haar_sphere_sample(6, Field::Real, &mut rng).unwrap();
            let v = s.as_real().unwrap();
            a.push(v[0]);
            b.push(v[4]); // coordinate picked by a fixed permutation
        }
        let p = crate::analysis::stats::ks_two_sample_p(&mut a, &mut b);
        assert!(p > 0.01, "KS p-value {p}");
    }
}
