//! Dyadic angle encodings: `val`, truncation to `d` bits, and angle tables.
//!
//! A `d`-bit string `x_1 x_2 ... x_d` encodes the dyadic rational
//! `val(x) = sum_i 2^{-i} x_i`, stored here as a `u64` whose most
//! significant of the low `d` bits is `x_1`. `d` is capped at 52 so
//! `val` is exact in an `f64`.

use crate::error::{Error, Result};
use crate::rng::RngStream;
use rand::RngCore;

/// Largest supported fractional-bit count; keeps `val` exact in `f64`.
pub const MAX_PRECISION_BITS: u32 = 52;

fn check_d(d: u32) -> Result<()> {
    if d == 0 || d > MAX_PRECISION_BITS {
        return Err(Error::PrecisionOverflow(d));
    }
    Ok(())
}

/// `val(x) = sum_{i=1}^{d} 2^{-i} x_i`, exact for `d <= 52`.
pub fn val(bits: u64, d: u32) -> Result<f64> {
    check_d(d)?;
    if bits >> d != 0 {
        return Err(Error::Domain(format!("bit pattern {bits:#x} wider than d={d}")));
    }
    Ok(bits as f64 / (1u64 << d) as f64)
}

/// First `d` binary digits of `x in [0, 1)` (truncation, not rounding).
/// Guarantees `|x - val(round_to_d_bits(x, d))| < 2^{-d}`.
pub fn round_to_d_bits(x: f64, d: u32) -> Result<u64> {
    check_d(d)?;
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} outside [0, 1)")));
    }
    let scaled = (x * (1u64 << d) as f64).floor() as u64;
    // x < 1 guarantees scaled < 2^d, but guard against rounding at the edge.
    Ok(scaled.min((1u64 << d) - 1))
}

/// Truncation of an arbitrary real to the grid `2^{-d} * Z` (toward minus
/// infinity), as a float. Used for signed quantities like the phase
/// half-differences of the complex gate.
pub fn trunc_to_grid(x: f64, d: u32) -> f64 {
    let scale = (1u64 << d) as f64;
    (x * scale).floor() / scale
}

/// Parses a bit string like `"0110"`; convenience for tables and tests.
pub fn parse_bits(s: &str) -> Result<(u64, u32)> {
    if s.is_empty() || s.len() > MAX_PRECISION_BITS as usize {
        return Err(Error::Domain(format!("bad bit-string length {}", s.len())));
    }
    let mut bits = 0u64;
    for c in s.chars() {
        bits <<= 1;
        match c {
            '0' => {}
            '1' => bits |= 1,
            _ => return Err(Error::Domain(format!("invalid bit character {c:?}"))),
        }
    }
    Ok((bits, s.len() as u32))
}

/// Formats the low `d` bits as a string, most significant first.
pub fn format_bits(bits: u64, d: u32) -> String {
    (0..d).rev().map(|i| if bits >> i & 1 == 1 { '1' } else { '0' }).collect()
}

/// A function from `(n-1)`-bit strings to rotation parameters, either
/// `d`-bit strings (discrete gates) or reals in `[0, 1)` (continuous
/// gates / exact walk steps).
#[derive(Clone, Debug, PartialEq)]
pub enum AngleTable {
    Discrete { n: u32, d: u32, bits: Vec<u64> },
    Continuous { n: u32, values: Vec<f64> },
}

impl AngleTable {
    /// Uniformly random `d`-bit table on all `(n-1)`-bit inputs.
    pub fn random_discrete(n: u32, d: u32, rng: &mut RngStream) -> Result<Self> {
        check_d(d)?;
        let len = 1usize << (n - 1);
        let mask = (1u64 << d) - 1;
        let bits = (0..len).map(|_| rng.next_u64() & mask).collect();
        Ok(AngleTable::Discrete { n, d, bits })
    }

    /// Uniformly random continuous table with values in `[0, 1)`.
    pub fn random_continuous(n: u32, rng: &mut RngStream) -> Self {
        let len = 1usize << (n - 1);
        let values = (0..len).map(|_| rng.uniform_f64()).collect();
        AngleTable::Continuous { n, values }
    }

    /// Builds a continuous table from explicit values. Entries live in
    /// `[0, 1]`; the closed right endpoint is admitted so degenerate
    /// steering pairs can request an exact quarter-turn (`theta = pi/2`).
    pub fn from_values(n: u32, values: Vec<f64>) -> Result<Self> {
        if values.len() != 1usize << (n - 1) {
            return Err(Error::Parameter(format!(
                "table needs {} entries, got {}",
                1usize << (n - 1),
                values.len()
            )));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Domain("continuous table entry outside [0,1]".into()));
        }
        Ok(AngleTable::Continuous { n, values })
    }

    pub fn qubits(&self) -> u32 {
        match self {
            AngleTable::Discrete { n, .. } | AngleTable::Continuous { n, .. } => *n,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            AngleTable::Discrete { bits, .. } => bits.len(),
            AngleTable::Continuous { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Table value at input `y`, as a real in `[0, 1)`.
    pub fn value(&self, y: usize) -> f64 {
        match self {
            AngleTable::Discrete { d, bits, .. } => bits[y] as f64 / (1u64 << d) as f64,
            AngleTable::Continuous { values, .. } => values[y],
        }
    }

    /// The `d`-bit truncation of a continuous table; discrete tables are
    /// returned unchanged when `d` matches.
    pub fn truncated(&self, d: u32) -> Result<AngleTable> {
        check_d(d)?;
        match self {
            AngleTable::Discrete { n, d: d0, bits } => {
                if *d0 == d {
                    Ok(AngleTable::Discrete { n: *n, d: *d0, bits: bits.clone() })
                } else {
                    Err(Error::Parameter(format!("table has d={d0}, requested d={d}")))
                }
            }
            AngleTable::Continuous { n, values } => {
                // The closed endpoint truncates to the all-ones string.
                let below_one = 1.0 - f64::EPSILON / 2.0;
                let bits = values
                    .iter()
                    .map(|&v| round_to_d_bits(v.min(below_one), d))
                    .collect::<Result<Vec<_>>>()?;
                Ok(AngleTable::Discrete { n: *n, d, bits })
            }
        }
    }
}
