use num_complex::Complex64;

use super::{BellLabel, Dimension, StateVector};
use crate::error::{domain, Result};

/// Single-qudit operator as a dense `d × d` matrix (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    entries: Vec<Complex64>,
}

impl Operator {
    pub fn identity(d: Dimension) -> Self {
        let d = d.get();
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            entries[i * d + i] = Complex64::new(1.0, 0.0);
        }
        Self { dim: d, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry `⟨row|A|col⟩`.
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn adjoint(&self) -> Operator {
        let d = self.dim;
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                entries[c * d + r] = self.entries[r * d + c].conj();
            }
        }
        Operator { dim: d, entries }
    }

    pub fn matmul(&self, other: &Operator) -> Operator {
        let d = self.dim;
        assert_eq!(d, other.dim, "operator dimension mismatch");
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.entries[r * d + k];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for c in 0..d {
                    entries[r * d + c] += a * other.entries[k * d + c];
                }
            }
        }
        Operator { dim: d, entries }
    }

    /// `‖U†U − I‖_max ≤ tol`
    pub fn is_unitary(&self, tol: f64) -> bool {
        let product = self.adjoint().matmul(self);
        (0..self.dim).all(|r| {
            (0..self.dim).all(|c| {
                let expected = if r == c { 1.0 } else { 0.0 };
                (product.get(r, c) - Complex64::new(expected, 0.0)).norm() <= tol
            })
        })
    }

    /// Apply this operator to subsystem `target` of `state`.
    pub fn apply(&self, state: &StateVector, target: usize) -> Result<StateVector> {
        let dims = state.dims();
        if target >= dims.len() {
            return Err(domain!("subsystem {target} out of range for {} subsystems", dims.len()));
        }
        if dims[target] != self.dim {
            return Err(domain!(
                "operator of dimension {} applied to subsystem of dimension {}",
                self.dim,
                dims[target]
            ));
        }
        let d = self.dim;
        let stride = state.strides()[target];
        let block = d * stride;
        let src = state.amplitudes();
        let mut out = vec![Complex64::new(0.0, 0.0); src.len()];
        let mut column = vec![Complex64::new(0.0, 0.0); d];
        for base in (0..src.len()).step_by(block) {
            for offset in 0..stride {
                for (k, slot) in column.iter_mut().enumerate() {
                    *slot = src[base + offset + k * stride];
                }
                for r in 0..d {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (k, value) in column.iter().enumerate() {
                        acc += self.entries[r * d + k] * value;
                    }
                    out[base + offset + r * stride] = acc;
                }
            }
        }
        Ok(StateVector::from_parts(dims.to_vec(), out))
    }
}

/// Quantum Fourier transform `F|k⟩ = d^{-1/2} Σ_r ζ^{kr}|r⟩`.
pub fn fourier_matrix(d: Dimension) -> Operator {
    let n = d.get();
    let scale = 1.0 / (n as f64).sqrt();
    let mut entries = Vec::with_capacity(n * n);
    for r in 0..n {
        for k in 0..n {
            entries.push(d.zeta_pow((k * r) as i64) * scale);
        }
    }
    Operator { dim: n, entries }
}

/// Encoding operator `U(u,v) = Σ_j ζ^{ju} |j⊕v⟩⟨j|`.
///
/// Applied to the second qudit of `|φ(0,0)⟩` it yields `|φ(u,v)⟩`.
pub fn weyl_operator(d: Dimension, label: BellLabel) -> Result<Operator> {
    label.validate(d)?;
    let n = d.get();
    let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let row = d.add(j, label.shift);
        entries[row * n + j] = d.zeta_pow((j * label.phase) as i64);
    }
    Ok(Operator { dim: n, entries })
}
