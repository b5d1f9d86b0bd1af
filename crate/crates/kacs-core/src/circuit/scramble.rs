//! Step-parameter derivation, T-step scrambles with invertible traces,
//! and the scrambler-based encryption demo.

use super::keyed::{prf_u64, KeyedPrp, ScramblerKey};
use super::{apply_gate, apply_gate_inverse, GateParams, Permutation};
use crate::bits::AngleTable;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::state::{Field, StateVector};
use rand::RngCore;

/// Where one step's gate parameters come from.
pub enum ParamSource<'a> {
    /// Uniformly random permutations and tables; step `t` consumes
    /// `rng.substream(t)`.
    TrueRandom(&'a RngStream),
    /// Keyed pseudorandom permutation and function families.
    Keyed(&'a ScramblerKey),
}

fn keyed_table(key: &[u8; 32], n: u32, d: u32) -> AngleTable {
    let bits = (0..1u64 << (n - 1))
        .map(|y| prf_u64(key, &y.to_le_bytes()) >> (64 - d))
        .collect();
    AngleTable::Discrete { n, d, bits }
}

/// Gate parameters for step `t`: uniform `sigma_t` and `d`-bit tables in
/// the true-random mode, a Feistel permutation and keyed-function tables
/// in the keyed mode. Deterministic given `(source, t)`.
pub fn derive_step_params(
    source: &ParamSource,
    t: usize,
    n: u32,
    d: u32,
    field: Field,
) -> Result<GateParams> {
    if n == 0 {
        return Err(Error::InvalidDimension { dim: 0, reason: "need at least one qubit" });
    }
    match source {
        ParamSource::TrueRandom(rng) => {
            let step = rng.substream(t as u64);
            let sigma = Permutation::random(n, &mut step.substream(0));
            let f = AngleTable::random_discrete(n, d, &mut step.substream(1))?;
            match field {
                Field::Real => GateParams::real(sigma, f),
                Field::Complex => {
                    let g = AngleTable::random_discrete(n, d, &mut step.substream(2))?;
                    let h = AngleTable::random_discrete(n, d, &mut step.substream(3))?;
                    GateParams::complex(sigma, f, g, h)
                }
            }
        }
        ParamSource::Keyed(key) => {
            if key.field() != field {
                return Err(Error::Key("key field does not match the requested field".into()));
            }
            if t >= key.t_steps() {
                return Err(Error::Key(format!(
                    "step {t} beyond the key's {} steps",
                    key.t_steps()
                )));
            }
            let prp = KeyedPrp::new(n, &key.perm_key(t))?;
            let sigma = Permutation::from_keyed(&prp);
            let f = keyed_table(&key.fn_key(t, 0), n, d);
            match field {
                Field::Real => GateParams::real(sigma, f),
                Field::Complex => {
                    let g = keyed_table(&key.fn_key(t, 1), n, d);
                    let h = keyed_table(&key.fn_key(t, 2), n, d);
                    GateParams::complex(sigma, f, g, h)
                }
            }
        }
    }
}

/// Continuous-parameter gate with uniform tables, the exact one-step walk
/// analogue; used by equivalence checks and steering tests.
pub fn random_continuous_params(n: u32, field: Field, rng: &RngStream) -> Result<GateParams> {
    let sigma = Permutation::random(n, &mut rng.substream(0));
    let f = AngleTable::random_continuous(n, &mut rng.substream(1));
    match field {
        Field::Real => GateParams::real(sigma, f),
        Field::Complex => {
            let g = AngleTable::random_continuous(n, &mut rng.substream(2));
            let h = AngleTable::random_continuous(n, &mut rng.substream(3));
            GateParams::complex(sigma, f, g, h)
        }
    }
}

/// Applies `t_steps` gates with per-step derived parameters and returns
/// the final state together with the parameter trace.
pub fn scramble(
    state: &StateVector,
    t_steps: usize,
    source: &ParamSource,
    d: u32,
) -> Result<(StateVector, Vec<GateParams>)> {
    let dim = state.dim();
    if !dim.is_power_of_two() || dim < 2 {
        return Err(Error::InvalidDimension { dim, reason: "scramble needs dim = 2^n >= 2" });
    }
    let n = dim.trailing_zeros();
    let mut out = state.clone();
    let mut trace = Vec::with_capacity(t_steps);
    for t in 0..t_steps {
        let params = derive_step_params(source, t, n, d, state.field())?;
        apply_gate(&mut out, &params)?;
        trace.push(params);
    }
    Ok((out, trace))
}

/// Inverts a scramble by applying each traced gate's inverse in reverse.
pub fn unscramble(state: &StateVector, trace: &[GateParams]) -> Result<StateVector> {
    let mut out = state.clone();
    for params in trace.iter().rev() {
        apply_gate_inverse(&mut out, params)?;
    }
    Ok(out)
}

/// Encryption flavors of the scrambler.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EncMode {
    /// Full-length key used as-is.
    Direct,
    /// Short master seed expanded into per-step subkeys.
    PrgExpanded,
    /// Fresh randomizer `r` per encryption; the effective key is the
    /// keyed function of `r`, and `r` ships with the ciphertext.
    PrfRandomized,
}

/// A scrambled state, plus the randomizer in the randomized mode.
#[derive(Clone, Debug, PartialEq)]
pub struct Ciphertext {
    pub state: StateVector,
    pub randomizer: Option<[u8; 32]>,
}

fn effective_key(key: &ScramblerKey, mode: EncMode, r: Option<&[u8; 32]>) -> Result<ScramblerKey> {
    match mode {
        EncMode::Direct | EncMode::PrgExpanded => Ok(key.clone()),
        EncMode::PrfRandomized => {
            let r = r.ok_or_else(|| Error::Key("randomized mode needs a randomizer".into()))?;
            key.randomized(r)
        }
    }
}

/// Encrypt = scramble under the mode's derived key. Encrypting the same
/// state twice under the same key (non-randomized modes) yields exactly
/// the same ciphertext.
pub fn prss_encrypt(
    state: &StateVector,
    key: &ScramblerKey,
    mode: EncMode,
    rng: Option<&mut RngStream>,
) -> Result<Ciphertext> {
    if state.field() != key.field() {
        return Err(Error::Key("state and key fields disagree".into()));
    }
    let randomizer = match mode {
        EncMode::PrfRandomized => {
            let rng = rng.ok_or_else(|| {
                Error::Parameter("randomized encryption needs an rng for the fresh r".into())
            })?;
            let mut r = [0u8; 32];
            rng.fill_bytes(&mut r);
            Some(r)
        }
        _ => None,
    };
    let eff = effective_key(key, mode, randomizer.as_ref())?;
    let (out, _) = scramble(
        state,
        eff.t_steps(),
        &ParamSource::Keyed(&eff),
        eff.precision_bits(),
    )?;
    Ok(Ciphertext { state: out, randomizer })
}

/// Decrypt = apply the keyed gates' inverses in reverse order.
pub fn prss_decrypt(ct: &Ciphertext, key: &ScramblerKey, mode: EncMode) -> Result<StateVector> {
    let eff = effective_key(key, mode, ct.randomizer.as_ref())?;
    let dim = ct.state.dim();
    if !dim.is_power_of_two() || dim < 2 {
        return Err(Error::InvalidDimension { dim, reason: "ciphertext dim must be 2^n" });
    }
    let n = dim.trailing_zeros();
    let source = ParamSource::Keyed(&eff);
    let mut out = ct.state.clone();
    for t in (0..eff.t_steps()).rev() {
        let params = derive_step_params(&source, t, n, eff.precision_bits(), ct.state.field())?;
        apply_gate_inverse(&mut out, &params)?;
    }
    Ok(out)
}
