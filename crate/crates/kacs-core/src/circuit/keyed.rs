//! Keyed pseudorandom primitives backing the scrambler's keyed mode:
//! a SHAKE128-based keyed function and a four-round Feistel permutation
//! over `n`-bit strings built from it. These are engineering stand-ins
//! for the abstract keyed function/permutation families; no quantum
//! security is claimed for the concrete instantiation.

use crate::error::{Error, Result};
use crate::state::Field;
use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake128;

/// Keyed extendable-output function: fills `out` with
/// `SHAKE128(key || domain)`.
pub fn prf_bytes(key: &[u8; 32], domain: &[u8], out: &mut [u8]) {
    let mut xof = Shake128::default();
    xof.update(key);
    xof.update(domain);
    xof.finalize_xof().read(out);
}

/// First eight output bytes as a little-endian integer.
pub fn prf_u64(key: &[u8; 32], domain: &[u8]) -> u64 {
    let mut buf = [0u8; 8];
    prf_bytes(key, domain, &mut buf);
    u64::from_le_bytes(buf)
}

fn derived_key(key: &[u8; 32], tag: &[u8], index: u64) -> [u8; 32] {
    let mut domain = Vec::with_capacity(tag.len() + 8);
    domain.extend_from_slice(tag);
    domain.extend_from_slice(&index.to_le_bytes());
    let mut out = [0u8; 32];
    prf_bytes(key, &domain, &mut out);
    out
}

const FEISTEL_ROUNDS: usize = 4;

/// Keyed permutation of `{0,1}^n` via a Feistel network whose rounds
/// alternately XOR one half with a keyed function of the other. The
/// split is `ceil(n/2)` high bits / `floor(n/2)` low bits, which also
/// covers odd widths (one half may be empty for n = 1).
#[derive(Clone, Debug)]
pub struct KeyedPrp {
    n: u32,
    hi_bits: u32,
    lo_bits: u32,
    round_keys: [[u8; 32]; FEISTEL_ROUNDS],
}

impl KeyedPrp {
    pub fn new(n: u32, key: &[u8; 32]) -> Result<Self> {
        if n == 0 || n > 63 {
            return Err(Error::Parameter(format!("PRP width n = {n} out of range")));
        }
        let lo_bits = n / 2;
        let hi_bits = n - lo_bits;
        let mut round_keys = [[0u8; 32]; FEISTEL_ROUNDS];
        for (r, rk) in round_keys.iter_mut().enumerate() {
            *rk = derived_key(key, b"feistel-round", r as u64);
        }
        Ok(KeyedPrp { n, hi_bits, lo_bits, round_keys })
    }

    pub fn bits(&self) -> u32 {
        self.n
    }

    fn round(&self, r: usize, input: u64, width: u32) -> u64 {
        if width == 0 {
            return 0;
        }
        let mask = (1u64 << width) - 1;
        prf_u64(&self.round_keys[r], &input.to_le_bytes()) & mask
    }

    fn split(&self, x: u64) -> (u64, u64) {
        let lo_mask = if self.lo_bits == 0 { 0 } else { (1u64 << self.lo_bits) - 1 };
        (x >> self.lo_bits, x & lo_mask)
    }

    pub fn forward(&self, x: u64) -> u64 {
        debug_assert!(x < 1u64 << self.n);
        let (mut hi, mut lo) = self.split(x);
        for r in 0..FEISTEL_ROUNDS {
            if r % 2 == 0 {
                hi ^= self.round(r, lo, self.hi_bits);
            } else {
                lo ^= self.round(r, hi, self.lo_bits);
            }
        }
        (hi << self.lo_bits) | lo
    }

    pub fn inverse(&self, y: u64) -> u64 {
        debug_assert!(y < 1u64 << self.n);
        let (mut hi, mut lo) = self.split(y);
        for r in (0..FEISTEL_ROUNDS).rev() {
            if r % 2 == 0 {
                hi ^= self.round(r, lo, self.hi_bits);
            } else {
                lo ^= self.round(r, hi, self.lo_bits);
            }
        }
        (hi << self.lo_bits) | lo
    }
}

/// Key material for a `t_steps`-gate scrambler. Subkeys are either a pure
/// function of a short master seed (expanded mode) or supplied in full,
/// laid out per step as `(r_t, s_t)` for real schemes and
/// `(r_t, u_t, s_t, t_t)` for complex ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScramblerKey {
    field: Field,
    t_steps: usize,
    d: u32,
    material: KeyMaterial,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum KeyMaterial {
    Expanded { master: [u8; 32] },
    Full { subkeys: Vec<[u8; 32]> },
}

impl ScramblerKey {
    fn subkeys_per_step(field: Field) -> usize {
        match field {
            Field::Real => 2,
            Field::Complex => 4,
        }
    }

    /// Short-seed key; every subkey is derived from `master`.
    pub fn expanded(master: [u8; 32], field: Field, t_steps: usize, d: u32) -> Self {
        ScramblerKey { field, t_steps, d, material: KeyMaterial::Expanded { master } }
    }

    /// Full-length key with independently supplied subkeys.
    pub fn from_subkeys(subkeys: Vec<[u8; 32]>, field: Field, d: u32) -> Result<Self> {
        let per = Self::subkeys_per_step(field);
        if subkeys.is_empty() || subkeys.len() % per != 0 {
            return Err(Error::Key(format!(
                "full key needs a multiple of {per} subkeys, got {}",
                subkeys.len()
            )));
        }
        let t_steps = subkeys.len() / per;
        Ok(ScramblerKey { field, t_steps, d, material: KeyMaterial::Full { subkeys } })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn t_steps(&self) -> usize {
        self.t_steps
    }

    pub fn precision_bits(&self) -> u32 {
        self.d
    }

    /// Permutation subkey `r_t`.
    pub fn perm_key(&self, t: usize) -> [u8; 32] {
        match &self.material {
            KeyMaterial::Expanded { master } => derived_key(master, b"perm", t as u64),
            KeyMaterial::Full { subkeys } => subkeys[t * Self::subkeys_per_step(self.field)],
        }
    }

    /// Function subkey for table `which` (0 = f, 1 = g, 2 = h) at step `t`.
    pub fn fn_key(&self, t: usize, which: usize) -> [u8; 32] {
        let per = Self::subkeys_per_step(self.field);
        debug_assert!(which + 1 < per, "table index {which} out of range for {}", self.field);
        match &self.material {
            KeyMaterial::Expanded { master } => {
                derived_key(master, b"fn", (t as u64) << 2 | which as u64)
            }
            KeyMaterial::Full { subkeys } => subkeys[t * per + 1 + which],
        }
    }

    /// Derives the effective key for the randomized encryption mode.
    pub fn randomized(&self, r: &[u8; 32]) -> Result<ScramblerKey> {
        match &self.material {
            KeyMaterial::Expanded { master } => {
                let mut domain = Vec::with_capacity(4 + 32);
                domain.extend_from_slice(b"rand");
                domain.extend_from_slice(r);
                let mut eff = [0u8; 32];
                prf_bytes(master, &domain, &mut eff);
                Ok(ScramblerKey::expanded(eff, self.field, self.t_steps, self.d))
            }
            KeyMaterial::Full { .. } => {
                Err(Error::Key("randomized mode needs a master-seed key".into()))
            }
        }
    }

    /// Hex serialization: `version || mode || field || d || t_steps || payload`.
    pub fn to_hex(&self) -> String {
        let mut bytes = Vec::new();
        bytes.push(1u8);
        let (mode, payload): (u8, Vec<u8>) = match &self.material {
            KeyMaterial::Expanded { master } => (0, master.to_vec()),
            KeyMaterial::Full { subkeys } => (1, subkeys.concat()),
        };
        bytes.push(mode);
        bytes.push(match self.field {
            Field::Real => 0,
            Field::Complex => 1,
        });
        bytes.extend_from_slice(&self.d.to_le_bytes());
        bytes.extend_from_slice(&(self.t_steps as u64).to_le_bytes());
        bytes.extend_from_slice(&payload);
        hex::encode(bytes)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let bytes = hex::decode(s).map_err(|e| Error::Key(format!("bad hex: {e}")))?;
        if bytes.len() < 15 || bytes[0] != 1 {
            return Err(Error::Key("unsupported key encoding".into()));
        }
        let mode = bytes[1];
        let field = match bytes[2] {
            0 => Field::Real,
            1 => Field::Complex,
            other => return Err(Error::Key(format!("bad field tag {other}"))),
        };
        let d = u32::from_le_bytes(bytes[3..7].try_into().unwrap());
        let t_steps = u64::from_le_bytes(bytes[7..15].try_into().unwrap()) as usize;
        let payload = &bytes[15..];
        match mode {
            0 => {
                let master: [u8; 32] = payload
                    .try_into()
                    .map_err(|_| Error::Key("expanded key needs a 32-byte seed".into()))?;
                Ok(ScramblerKey::expanded(master, field, t_steps, d))
            }
            1 => {
                if payload.len() % 32 != 0 {
                    return Err(Error::Key("full key payload must be 32-byte aligned".into()));
                }
                let subkeys: Vec<[u8; 32]> =
                    payload.chunks_exact(32).map(|c| c.try_into().unwrap()).collect();
                let key = ScramblerKey::from_subkeys(subkeys, field, d)?;
                if key.t_steps != t_steps {
                    return Err(Error::Key("step count disagrees with payload".into()));
                }
                Ok(key)
            }
            other => Err(Error::Key(format!("bad mode tag {other}"))),
        }
    }
}
