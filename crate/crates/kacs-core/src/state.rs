//! Dense unit vectors over the real or complex field.

use crate::error::{Error, Result};
use num_complex::Complex64;

pub const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Field::Real => write!(f, "real"),
            Field::Complex => write!(f, "complex"),
        }
    }
}

impl std::str::FromStr for Field {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" | "Real" | "R" => Ok(Field::Real),
            "complex" | "Complex" | "C" => Ok(Field::Complex),
            other => Err(Error::Parameter(format!("unknown field {other:?}"))),
        }
    }
}

/// A unit vector on the real or complex sphere, stored densely.
#[derive(Clone, Debug, PartialEq)]
pub enum StateVector {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl StateVector {
    /// Standard basis vector `e_index`.
    pub fn basis(field: Field, dim: usize, index: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension { dim, reason: "dimension must be positive" });
        }
        if index >= dim {
            return Err(Error::Index(format!("basis index {index} out of range for dim {dim}")));
        }
        Ok(match field {
            Field::Real => {
                let mut v = vec![0.0; dim];
                v[index] = 1.0;
                StateVector::Real(v)
            }
            Field::Complex => {
                let mut v = vec![Complex64::new(0.0, 0.0); dim];
                v[index] = Complex64::new(1.0, 0.0);
                StateVector::Complex(v)
            }
        })
    }

    /// Wraps an amplitude vector, checking unit norm to `1e-9`.
    pub fn unit_real(amps: Vec<f64>) -> Result<Self> {
        let s = StateVector::Real(amps);
        s.check_norm()?;
        Ok(s)
    }

    /// Wraps a complex amplitude vector, checking unit norm to `1e-9`.
    pub fn unit_complex(amps: Vec<Complex64>) -> Result<Self> {
        let s = StateVector::Complex(amps);
        s.check_norm()?;
        Ok(s)
    }

    /// Normalizes an arbitrary nonzero vector onto the sphere.
    pub fn normalized_real(mut amps: Vec<f64>) -> Result<Self> {
        let n = amps.iter().map(|a| a * a).sum::<f64>().sqrt();
        if !n.is_normal() {
            return Err(Error::DegenerateScale("cannot normalize a (near-)zero vector".into()));
        }
        amps.iter_mut().for_each(|a| *a /= n);
        Ok(StateVector::Real(amps))
    }

    pub fn normalized_complex(mut amps: Vec<Complex64>) -> Result<Self> {
        let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !n.is_normal() {
            return Err(Error::DegenerateScale("cannot normalize a (near-)zero vector".into()));
        }
        amps.iter_mut().for_each(|a| *a /= n);
        Ok(StateVector::Complex(amps))
    }

    pub fn field(&self) -> Field {
        match self {
            StateVector::Real(_) => Field::Real,
            StateVector::Complex(_) => Field::Complex,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            StateVector::Real(v) => v.len(),
            StateVector::Complex(v) => v.len(),
        }
    }

    /// Squared magnitude of amplitude `i`.
    pub fn amp_sq(&self, i: usize) -> f64 {
        match self {
            StateVector::Real(v) => v[i] * v[i],
            StateVector::Complex(v) => v[i].norm_sqr(),
        }
    }

    /// The vector of squared magnitudes (`A_t` / `B_t` of the couplings).
    pub fn amp_sq_vec(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.amp_sq(i)).collect()
    }

    pub fn norm(&self) -> f64 {
        match self {
            StateVector::Real(v) => v.iter().map(|a| a * a).sum::<f64>().sqrt(),
            StateVector::Complex(v) => v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt(),
        }
    }

    pub fn check_norm(&self) -> Result<()> {
        let n = self.norm();
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Domain(format!("norm {n} deviates from 1 beyond 1e-9")));
        }
        Ok(())
    }

    /// `<self, other>`; real inner products are returned with zero
    /// imaginary part. Complex convention: conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::InvalidDimension { dim: other.dim(), reason: "dimension mismatch" });
        }
        match (self, other) {
            (StateVector::Real(a), StateVector::Real(b)) => {
                Ok(Complex64::new(a.iter().zip(b).map(|(x, y)| x * y).sum(), 0.0))
            }
            (StateVector::Complex(a), StateVector::Complex(b)) => {
                Ok(a.iter().zip(b).map(|(x, y)| x.conj() * y).sum())
            }
            _ => Err(Error::Parameter("cannot mix real and complex states".into())),
        }
    }

    /// Euclidean distance `||self - other||_2`.
    pub fn l2_distance(&self, other: &StateVector) -> f64 {
        match (self, other) {
            (StateVector::Real(a), StateVector::Real(b)) => {
                a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
            }
            (StateVector::Complex(a), StateVector::Complex(b)) => {
                a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
            }
            _ => f64::NAN,
        }
    }

    /// Largest per-amplitude deviation from `other`.
    pub fn max_amp_distance(&self, other: &StateVector) -> f64 {
        match (self, other) {
            (StateVector::Real(a), StateVector::Real(b)) => {
                a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
            }
            (StateVector::Complex(a), StateVector::Complex(b)) => {
                a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
            }
            _ => f64::NAN,
        }
    }

    /// Real amplitudes, or an error for complex states.
    pub fn as_real(&self) -> Result<&[f64]> {
        match self {
            StateVector::Real(v) => Ok(v),
            StateVector::Complex(_) => Err(Error::Parameter("expected a real state".into())),
        }
    }

    pub fn as_complex(&self) -> Result<&[Complex64]> {
        match self {
            StateVector::Complex(v) => Ok(v),
            StateVector::Real(_) => Err(Error::Parameter("expected a complex state".into())),
        }
    }

    /// The complex embedding of the amplitudes (copies real states).
    pub fn to_complex_amps(&self) -> Vec<Complex64> {
        match self {
            StateVector::Real(v) => v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            StateVector::Complex(v) => v.clone(),
        }
    }
}
