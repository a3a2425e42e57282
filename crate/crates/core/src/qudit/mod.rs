//! Dense qudit engine: states, operators and measurements.
//!
//! Basis ordering is row-major with subsystem 0 most significant. This engine
//! is the ground truth the label-level swap engine is checked against.

mod measure;
mod named;
mod operator;
mod state;

pub use measure::{
    collapse_in_basis, fourier_basis_measure, measure_cat_basis, measure_computational,
    measure_generalized_bell, MeasurementOutcome,
};
pub use named::{basis_state, bell_state, cat_state, fourier_state, prepare_in_basis, singlet_state, SINGLET_CAP};
pub use operator::{fourier_matrix, weyl_operator, Operator};
pub use state::{StateVector, AMPLITUDE_TOL, DENSE_CAP};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;

use crate::error::{domain, Result};

/// Number of levels of a qudit. Always at least 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Dimension(usize);

impl Dimension {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(domain!("qudit dimension must be at least 2, got {d}"));
        }
        Ok(Self(d))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    /// `a ⊕ b`
    #[inline]
    pub fn add(self, a: usize, b: usize) -> usize {
        (a % self.0 + b % self.0) % self.0
    }

    /// `a ⊖ b`
    #[inline]
    pub fn sub(self, a: usize, b: usize) -> usize {
        (a % self.0 + self.0 - b % self.0) % self.0
    }

    /// `ζ^k` with `ζ = e^{2πi/d}`. The exponent is reduced mod d first so
    /// that equal exponents give bit-identical values.
    pub fn zeta_pow(self, k: i64) -> Complex64 {
        let r = k.rem_euclid(self.0 as i64);
        if r == 0 {
            return Complex64::new(1.0, 0.0);
        }
        Complex64::from_polar(1.0, TAU * r as f64 / self.0 as f64)
    }

    pub(crate) fn check_value(self, what: &str, value: usize) -> Result<()> {
        if value >= self.0 {
            return Err(domain!("{what} = {value} is out of range for d = {}", self.0));
        }
        Ok(())
    }
}

impl TryFrom<usize> for Dimension {
    type Error = crate::Error;
    fn try_from(d: usize) -> Result<Self> {
        Self::new(d)
    }
}

impl From<Dimension> for usize {
    fn from(d: Dimension) -> usize {
        d.0
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Marks `(u, v)` of the two-qudit Bell state `|φ(u,v)⟩`: `u` is the phase
/// mark, `v` the shift mark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BellLabel {
    pub phase: usize,
    pub shift: usize,
}

impl BellLabel {
    pub const fn new(phase: usize, shift: usize) -> Self {
        Self { phase, shift }
    }

    pub fn validate(&self, d: Dimension) -> Result<()> {
        d.check_value("Bell phase mark", self.phase)?;
        d.check_value("Bell shift mark", self.shift)
    }

    /// Every label for dimension `d`, phase-major.
    pub fn all(d: Dimension) -> impl Iterator<Item = BellLabel> {
        let d = d.get();
        (0..d).flat_map(move |u| (0..d).map(move |v| BellLabel::new(u, v)))
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.phase, self.shift)
    }
}

/// Marks `(u₀, u₁, …, u_m)` of an (m+1)-qudit cat state. `u₀` is the phase
/// mark, `u₁..u_m` are the shifts of qudits 1..m relative to qudit 0.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CatLabel {
    marks: Vec<usize>,
}

impl CatLabel {
    pub fn new(marks: Vec<usize>) -> Result<Self> {
        if marks.len() < 2 {
            return Err(domain!("a cat label needs a phase mark and at least one shift mark"));
        }
        Ok(Self { marks })
    }

    pub fn marks(&self) -> &[usize] {
        &self.marks
    }

    pub fn phase(&self) -> usize {
        self.marks[0]
    }

    /// Number of shift marks `m`; the state has `m + 1` qudits.
    pub fn m(&self) -> usize {
        self.marks.len() - 1
    }

    pub fn particles(&self) -> usize {
        self.marks.len()
    }

    pub fn validate(&self, d: Dimension) -> Result<()> {
        match self.marks.iter().position(|&u| u >= d.get()) {
            Some(i) => d.check_value(&format!("cat mark u{i}"), self.marks[i]),
            None => Ok(()),
        }
    }

    pub(crate) fn set(&mut self, position: usize, value: usize) {
        self.marks[position] = value;
    }

    /// Every label with `m` shift marks for dimension `d`, in lexicographic order.
    pub fn all(d: Dimension, m: usize) -> impl Iterator<Item = CatLabel> {
        let d = d.get();
        let count = d.pow(m as u32 + 1);
        (0..count).map(move |mut idx| {
            let mut marks = vec![0; m + 1];
            for slot in marks.iter_mut().rev() {
                *slot = idx % d;
                idx /= d;
            }
            CatLabel { marks }
        })
    }
}

impl From<BellLabel> for CatLabel {
    fn from(b: BellLabel) -> Self {
        CatLabel { marks: vec![b.phase, b.shift] }
    }
}

impl fmt::Display for CatLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, u) in self.marks.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{u}")?;
        }
        write!(f, ")")
    }
}

/// The two single-qudit bases used for decoy photons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    /// `{|0⟩, …, |d−1⟩}`
    Computational,
    /// `{F|0⟩, …, F|d−1⟩}`
    Fourier,
}

impl BasisKind {
    pub const ALL: [BasisKind; 2] = [BasisKind::Computational, BasisKind::Fourier];
}
