//! State import/export.
//!
//! Binary container layout (little-endian):
//! `field: u8` (0 = real, 1 = complex), `n: u32` (qubit count),
//! `d: u32` (precision-bit annotation, 0 when not applicable), then
//! `2^n` f64 amplitudes (real) or `2^n` re/im-interleaved f64 pairs
//! (complex). The JSON text form mirrors the same fields for small
//! states.

use crate::error::{Error, Result};
use crate::state::{Field, StateVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

pub fn write_state(state: &StateVector, d: u32, mut w: impl Write) -> Result<()> {
    let dim = state.dim();
    if !dim.is_power_of_two() {
        return Err(Error::InvalidDimension { dim, reason: "container needs dim = 2^n" });
    }
    let n = dim.trailing_zeros();
    w.write_all(&[match state.field() {
        Field::Real => 0u8,
        Field::Complex => 1u8,
    }])?;
    w.write_all(&n.to_le_bytes())?;
    w.write_all(&d.to_le_bytes())?;
    match state {
        StateVector::Real(v) => {
            for x in v {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        StateVector::Complex(v) => {
            for z in v {
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

pub fn read_state(mut r: impl Read) -> Result<(StateVector, u32)> {
    let mut tag = [0u8; 1];
    r.read_exact(&mut tag)?;
    let field = match tag[0] {
        0 => Field::Real,
        1 => Field::Complex,
        other => return Err(Error::Format(format!("bad field tag {other}"))),
    };
    let mut word = [0u8; 4];
    r.read_exact(&mut word)?;
    let n = u32::from_le_bytes(word);
    if n > 30 {
        return Err(Error::Format(format!("unreasonable qubit count {n}")));
    }
    r.read_exact(&mut word)?;
    let d = u32::from_le_bytes(word);
    let dim = 1usize << n;
    let mut f = [0u8; 8];
    let state = match field {
        Field::Real => {
            let mut v = Vec::with_capacity(dim);
            for _ in 0..dim {
                r.read_exact(&mut f)?;
                v.push(f64::from_le_bytes(f));
            }
            StateVector::Real(v)
        }
        Field::Complex => {
            let mut v = Vec::with_capacity(dim);
            for _ in 0..dim {
                r.read_exact(&mut f)?;
                let re = f64::from_le_bytes(f);
                r.read_exact(&mut f)?;
                v.push(Complex64::new(re, f64::from_le_bytes(f)));
            }
            StateVector::Complex(v)
        }
    };
    state.check_norm()?;
    Ok((state, d))
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    field: Field,
    n: u32,
    d: u32,
    /// Flat amplitudes; re/im interleaved for complex states.
    amps: Vec<f64>,
}

pub fn state_to_json(state: &StateVector, d: u32) -> Result<String> {
    let dim = state.dim();
    if !dim.is_power_of_two() {
        return Err(Error::InvalidDimension { dim, reason: "container needs dim = 2^n" });
    }
    let amps = match state {
        StateVector::Real(v) => v.clone(),
        StateVector::Complex(v) => v.iter().flat_map(|z| [z.re, z.im]).collect(),
    };
    let doc = StateJson { field: state.field(), n: dim.trailing_zeros(), d, amps };
    serde_json::to_string(&doc).map_err(|e| Error::Format(e.to_string()))
}

pub fn state_from_json(text: &str) -> Result<(StateVector, u32)> {
    let doc: StateJson = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    let dim = 1usize << doc.n;
    let state = match doc.field {
        Field::Real => {
            if doc.amps.len() != dim {
                return Err(Error::Format("amplitude count mismatch".into()));
            }
            StateVector::Real(doc.amps)
        }
        Field::Complex => {
            if doc.amps.len() != 2 * dim {
                return Err(Error::Format("amplitude count mismatch".into()));
            }
            StateVector::Complex(
                doc.amps.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect(),
            )
        }
    };
    state.check_norm()?;
    Ok((state, doc.d))
}
