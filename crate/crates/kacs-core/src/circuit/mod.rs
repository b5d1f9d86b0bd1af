//! Discretized scrambler gates over `2^n`-dimensional state vectors.
//!
//! A real gate is determined by a permutation `sigma` of the basis and an
//! angle table `f`: for every `(n-1)`-bit label `y` the amplitude pair at
//! `(sigma^{-1}(0y), sigma^{-1}(1y))` is rotated by `theta_y = 2 pi f(y)`.
//! Complex gates decompose the SU(2) action into a phase, a rotation, and
//! another phase, each discretized to `d` fractional bits.

mod io;
mod keyed;
mod scramble;
mod steer;

pub use io::{read_state, state_from_json, state_to_json, write_state};
pub use keyed::{prf_bytes, prf_u64, KeyedPrp, ScramblerKey};
pub use scramble::{
    derive_step_params, prss_decrypt, prss_encrypt, random_continuous_params, scramble,
    unscramble, Ciphertext, EncMode, ParamSource,
};
pub use steer::{apply_gate_sequence, steer_to_target, SteerMode};

use crate::bits::{round_to_d_bits, trunc_to_grid, AngleTable};
use crate::error::{Error, Result};
use crate::haar::Su2Params;
use crate::rng::RngStream;
use crate::state::StateVector;
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, TAU};

/// A permutation of `{0, ..., 2^n - 1}` with both directions materialized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    n: u32,
    forward: Vec<u32>,
    inverse: Vec<u32>,
}

impl Permutation {
    pub fn identity(n: u32) -> Self {
        let forward: Vec<u32> = (0..1u32 << n).collect();
        Permutation { n, inverse: forward.clone(), forward }
    }

    pub fn from_forward(n: u32, forward: Vec<u32>) -> Result<Self> {
        let size = 1usize << n;
        if forward.len() != size {
            return Err(Error::Parameter(format!(
                "permutation needs {size} entries, got {}",
                forward.len()
            )));
        }
        let mut inverse = vec![u32::MAX; size];
        for (x, &fx) in forward.iter().enumerate() {
            if fx as usize >= size || inverse[fx as usize] != u32::MAX {
                return Err(Error::Parameter(format!("not a bijection at {x} -> {fx}")));
            }
            inverse[fx as usize] = x as u32;
        }
        Ok(Permutation { n, forward, inverse })
    }

    /// Uniformly random permutation (Fisher-Yates).
    pub fn random(n: u32, rng: &mut RngStream) -> Self {
        let size = 1usize << n;
        let mut forward: Vec<u32> = (0..size as u32).collect();
        for i in (1..size).rev() {
            let j = rng.below(i as u64 + 1) as usize;
            forward.swap(i, j);
        }
        Self::from_forward(n, forward).expect("shuffle is a bijection")
    }

    /// The bit-rotation `x_1...x_n -> x_t x_1...x_{t-1} x_{t+1}...x_n`
    /// (`t` is 1-based), used by the steering construction: it pairs each
    /// index having bit `t` clear with the index differing only in bit `t`.
    pub fn bit_to_front(n: u32, t: u32) -> Self {
        assert!((1..=n).contains(&t));
        let size = 1usize << n;
        let low_bits = n - t;
        let low_mask = (1u32 << low_bits) - 1;
        let forward = (0..size as u32)
            .map(|x| {
                let b = (x >> low_bits) & 1;
                let hi = x >> (low_bits + 1);
                let lo = x & low_mask;
                (b << (n - 1)) | (hi << low_bits) | lo
            })
            .collect();
        Self::from_forward(n, forward).expect("bit rotation is a bijection")
    }

    /// Materializes a keyed pseudorandom permutation.
    pub fn from_keyed(prp: &KeyedPrp) -> Self {
        let n = prp.bits();
        let size = 1usize << n;
        let forward = (0..size as u64).map(|x| prp.forward(x) as u32).collect();
        Self::from_forward(n, forward).expect("keyed PRP is a bijection")
    }

    pub fn qubits(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.forward.len()
    }

    pub fn forward(&self, x: usize) -> usize {
        self.forward[x] as usize
    }

    pub fn inverse(&self, x: usize) -> usize {
        self.inverse[x] as usize
    }
}

/// Parameters of one scrambler gate: the pairing permutation, the angle
/// table `f` (plus `g`, `h` in the complex case), and the precision `d`
/// (`None` for continuous-parameter gates).
#[derive(Clone, Debug)]
pub struct GateParams {
    pub sigma: Permutation,
    pub f: AngleTable,
    pub g: Option<AngleTable>,
    pub h: Option<AngleTable>,
    pub d: Option<u32>,
}

impl GateParams {
    pub fn real(sigma: Permutation, f: AngleTable) -> Result<Self> {
        Self::validate(&sigma, &f)?;
        let d = discrete_d(&f);
        Ok(GateParams { sigma, f, g: None, h: None, d })
    }

    pub fn complex(sigma: Permutation, f: AngleTable, g: AngleTable, h: AngleTable) -> Result<Self> {
        Self::validate(&sigma, &f)?;
        Self::validate(&sigma, &g)?;
        Self::validate(&sigma, &h)?;
        let d = discrete_d(&f);
        if discrete_d(&g) != d || discrete_d(&h) != d {
            return Err(Error::Parameter("angle tables disagree on precision".into()));
        }
        Ok(GateParams { sigma, f, g: Some(g), h: Some(h), d })
    }

    fn validate(sigma: &Permutation, table: &AngleTable) -> Result<()> {
        if table.qubits() != sigma.qubits() {
            return Err(Error::Parameter("angle table and permutation disagree on n".into()));
        }
        Ok(())
    }

    pub fn qubits(&self) -> u32 {
        self.sigma.qubits()
    }

    pub fn is_complex(&self) -> bool {
        self.g.is_some()
    }

    /// The discretized version of a continuous gate.
    pub fn truncated(&self, d: u32) -> Result<GateParams> {
        let f = self.f.truncated(d)?;
        match (&self.g, &self.h) {
            (Some(g), Some(h)) => {
                GateParams::complex(self.sigma.clone(), f, g.truncated(d)?, h.truncated(d)?)
            }
            _ => GateParams::real(self.sigma.clone(), f),
        }
    }
}

fn discrete_d(t: &AngleTable) -> Option<u32> {
    match t {
        AngleTable::Discrete { d, .. } => Some(*d),
        AngleTable::Continuous { .. } => None,
    }
}

fn check_gate_dim(state: &StateVector, params: &GateParams) -> Result<u32> {
    let n = params.qubits();
    if state.dim() != 1usize << n {
        return Err(Error::InvalidDimension {
            dim: state.dim(),
            reason: "state dimension must be 2^n for the gate",
        });
    }
    Ok(n)
}

/// Rotation angle of the real gate at label `y`: `2 pi val(f(y))` for
/// discrete tables, `2 pi f~(y)` for continuous ones.
fn real_angle(params: &GateParams, y: usize) -> f64 {
    TAU * params.f.value(y)
}

/// The real gate: permute, rotate every labeled pair, un-permute (fused
/// into indexed rotations). Norm is preserved by construction.
pub fn apply_kac_gate_real(state: &mut StateVector, params: &GateParams) -> Result<()> {
    apply_real_impl(state, params, false)
}

fn apply_real_impl(state: &mut StateVector, params: &GateParams, invert: bool) -> Result<()> {
    if params.is_complex() {
        return Err(Error::Parameter("complex gate applied through the real entry point".into()));
    }
    let n = check_gate_dim(state, params)?;
    let half = 1usize << (n - 1);
    for y in 0..half {
        let i = params.sigma.inverse(y);
        let j = params.sigma.inverse(y | half);
        let theta = real_angle(params, y);
        state.rotate_pair(i, j, if invert { -theta } else { theta })?;
    }
    Ok(())
}

/// Per-pair SU(2) element of the complex gate at label `y`.
///
/// Discrete tables go through the three-factor decomposition with
/// `xi_y = round_d((2/pi) arcsin sqrt(val f))`,
/// `gamma^+_y = round_d((val g + val h)/2)` and
/// `gamma^-_y = round_d((val g - val h)/2)`; the product is
/// `U(2 pi (g+ + g-), 2 pi (g+ - g-), pi/2 xi)`. Continuous tables use the
/// exact `U(2 pi g~, 2 pi h~, arcsin sqrt(f~))`.
pub fn complex_pair_unitary(params: &GateParams, y: usize) -> Result<Su2Params> {
    let (g, h) = match (&params.g, &params.h) {
        (Some(g), Some(h)) => (g, h),
        _ => return Err(Error::Parameter("complex gate needs g and h tables".into())),
    };
    let vf = params.f.value(y);
    let vg = g.value(y);
    let vh = h.value(y);
    match params.d {
        Some(d) => {
            let theta = vf.sqrt().asin();
            let xi = round_to_d_bits((theta / FRAC_PI_2).min(1.0 - f64::EPSILON), d)? as f64
                / (1u64 << d) as f64;
            let gamma_p = round_to_d_bits((vg + vh) / 2.0, d)? as f64 / (1u64 << d) as f64;
            let gamma_m = trunc_to_grid((vg - vh) / 2.0, d);
            Ok(Su2Params {
                alpha: TAU * (gamma_p + gamma_m),
                beta: TAU * (gamma_p - gamma_m),
                theta: FRAC_PI_2 * xi,
            })
        }
        None => Ok(Su2Params { alpha: TAU * vg, beta: TAU * vh, theta: vf.sqrt().asin() }),
    }
}

pub fn apply_kac_gate_complex(state: &mut StateVector, params: &GateParams) -> Result<()> {
    apply_complex_impl(state, params, false)
}

fn apply_complex_impl(state: &mut StateVector, params: &GateParams, invert: bool) -> Result<()> {
    let n = check_gate_dim(state, params)?;
    let half = 1usize << (n - 1);
    let amps = match state {
        StateVector::Complex(v) => v,
        StateVector::Real(_) => {
            return Err(Error::Parameter("complex gate needs a complex state".into()))
        }
    };
    for y in 0..half {
        let i = params.sigma.inverse(y);
        let j = params.sigma.inverse(y | half);
        let m = complex_pair_unitary(params, y)?.matrix();
        let (a, b) = (amps[i], amps[j]);
        if invert {
            // Conjugate transpose.
            amps[i] = m[0][0].conj() * a + m[1][0].conj() * b;
            amps[j] = m[0][1].conj() * a + m[1][1].conj() * b;
        } else {
            amps[i] = m[0][0] * a + m[0][1] * b;
            amps[j] = m[1][0] * a + m[1][1] * b;
        }
    }
    Ok(())
}

/// Applies a gate, dispatching on the parameter kind.
pub fn apply_gate(state: &mut StateVector, params: &GateParams) -> Result<()> {
    if params.is_complex() {
        apply_kac_gate_complex(state, params)
    } else {
        apply_kac_gate_real(state, params)
    }
}

/// Applies the inverse of a gate.
pub fn apply_gate_inverse(state: &mut StateVector, params: &GateParams) -> Result<()> {
    if params.is_complex() {
        apply_complex_impl(state, params, true)
    } else {
        apply_real_impl(state, params, true)
    }
}

/// Operator-norm distance between a discretized gate and its continuous
/// counterpart on a shared permutation.
///
/// Conjugation by the shared permutation preserves singular values, so
/// the distance is the largest per-pair block norm: the real case has the
/// closed form `2 |sin((theta - theta~)/2)|`, the complex case computes
/// each 2x2 block's largest singular value exactly.
pub fn gate_operator_distance(discrete: &GateParams, continuous: &GateParams) -> Result<f64> {
    if discrete.sigma != continuous.sigma {
        return Err(Error::Parameter("gate distance needs a shared permutation".into()));
    }
    if discrete.is_complex() != continuous.is_complex() {
        return Err(Error::Parameter("cannot mix real and complex gates".into()));
    }
    let half = 1usize << (discrete.qubits() - 1);
    let mut max = 0.0f64;
    for y in 0..half {
        let block = if discrete.is_complex() {
            let a = complex_pair_unitary(discrete, y)?.matrix();
            let b = complex_pair_unitary(continuous, y)?.matrix();
            let m = [a[0][0] - b[0][0], a[0][1] - b[0][1], a[1][0] - b[1][0], a[1][1] - b[1][1]];
            sigma_max_2x2(&m)
        } else {
            let dt = real_angle(discrete, y) - real_angle(continuous, y);
            2.0 * (dt / 2.0).sin().abs()
        };
        max = max.max(block);
    }
    Ok(max)
}

/// Largest singular value of a 2x2 complex matrix, in closed form.
fn sigma_max_2x2(m: &[Complex64; 4]) -> f64 {
    // Gram matrix eigenvalues via trace and determinant.
    let g00 = m[0].norm_sqr() + m[2].norm_sqr();
    let g11 = m[1].norm_sqr() + m[3].norm_sqr();
    let tr = g00 + g11;
    let det = (m[0] * m[3] - m[1] * m[2]).norm_sqr();
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    ((tr + disc) / 2.0).max(0.0).sqrt()
}

/// Embeds an `n`-qubit state into `m >= n` qubits by tensoring ancilla
/// zeros on the high-order side: amplitude `x` lands at index `x`, all
/// other coordinates are zero. This is the input embedding for scramblers
/// whose output space is larger than their input space; `n = m` is the
/// primary path everywhere else.
pub fn pad_state(state: &StateVector, m_qubits: u32) -> Result<StateVector> {
    let dim = state.dim();
    if !dim.is_power_of_two() {
        return Err(Error::InvalidDimension { dim, reason: "padding needs dim = 2^n" });
    }
    let n = dim.trailing_zeros();
    if m_qubits < n {
        return Err(Error::InvalidDimension {
            dim: 1 << m_qubits,
            reason: "target space smaller than the input",
        });
    }
    let target = 1usize << m_qubits;
    Ok(match state {
        StateVector::Real(v) => {
            let mut out = vec![0.0; target];
            out[..dim].copy_from_slice(v);
            StateVector::Real(out)
        }
        StateVector::Complex(v) => {
            let mut out = vec![Complex64::new(0.0, 0.0); target];
            out[..dim].copy_from_slice(v);
            StateVector::Complex(out)
        }
    })
}

/// Dense matrix of a gate (row-major, `2^n x 2^n`), for oracle checks.
pub fn dense_gate_matrix(params: &GateParams) -> Result<Vec<Complex64>> {
    let n = params.qubits();
    let dim = 1usize << n;
    let half = dim / 2;
    let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
    for y in 0..half {
        let i = params.sigma.inverse(y);
        let j = params.sigma.inverse(y | half);
        let u = if params.is_complex() {
            complex_pair_unitary(params, y)?.matrix()
        } else {
            let (s, c) = real_angle(params, y).sin_cos();
            [
                [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
            ]
        };
        m[i * dim + i] = u[0][0];
        m[i * dim + j] = u[0][1];
        m[j * dim + i] = u[1][0];
        m[j * dim + j] = u[1][1];
    }
    Ok(m)
}
