use num_complex::Complex64;
use std::fmt::Write as _;

use crate::error::{domain, Error, Result};

/// Absolute tolerance for amplitude comparisons and normalization checks.
pub const AMPLITUDE_TOL: f64 = 1e-9;

/// Largest total Hilbert-space dimension the dense engine will allocate.
pub const DENSE_CAP: usize = 1_000_000;

/// Pure state of a register of qudits, stored as a dense amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dims: Vec<usize>,
    amps: Vec<Complex64>,
}

pub(crate) fn total_dimension(dims: &[usize]) -> Result<usize> {
    let mut total: usize = 1;
    for &d in dims {
        if d < 2 {
            return Err(domain!("subsystem dimension must be at least 2, got {d}"));
        }
        total = total
            .checked_mul(d)
            .filter(|&t| t <= DENSE_CAP)
            .ok_or_else(|| {
                Error::Capability(format!(
                    "register {dims:?} exceeds the dense cap of {DENSE_CAP} amplitudes; use the label engine"
                ))
            })?;
    }
    Ok(total)
}

impl StateVector {
    /// Build a state from explicit amplitudes. The vector must be normalized.
    pub fn from_amplitudes(dims: Vec<usize>, amps: Vec<Complex64>) -> Result<Self> {
        let total = total_dimension(&dims)?;
        if amps.len() != total {
            return Err(domain!(
                "expected {total} amplitudes for dims {dims:?}, got {}",
                amps.len()
            ));
        }
        let state = Self { dims, amps };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > AMPLITUDE_TOL {
            return Err(domain!("state is not normalized (squared norm {norm})"));
        }
        Ok(state)
    }

    /// Callers guarantee `amps.len() == Π dims` and that `dims` is within the cap.
    pub(crate) fn from_parts(dims: Vec<usize>, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), dims.iter().product::<usize>());
        Self { dims, amps }
    }

    /// Computational basis state `|digits⟩`.
    pub fn basis(dims: Vec<usize>, digits: &[usize]) -> Result<Self> {
        let total = total_dimension(&dims)?;
        if digits.len() != dims.len() {
            return Err(domain!("{} digits given for {} subsystems", digits.len(), dims.len()));
        }
        for (i, (&x, &d)) in digits.iter().zip(&dims).enumerate() {
            if x >= d {
                return Err(domain!("digit {x} out of range for subsystem {i} of dimension {d}"));
            }
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); total];
        let mut state = Self { dims, amps: Vec::new() };
        amps[state.index_of(digits)] = Complex64::new(1.0, 0.0);
        state.amps = amps;
        Ok(state)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn amplitude(&self, digits: &[usize]) -> Complex64 {
        self.amps[self.index_of(digits)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Stride of each subsystem in the flat index.
    pub(crate) fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for i in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.dims[i + 1];
        }
        strides
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&x, &d)| acc * d + x)
    }

    pub fn digits_of(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.dims.len()];
        for (slot, &d) in digits.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
        digits
    }

    /// `|self⟩ ⊗ |other⟩`
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        total_dimension(&dims)?;
        let mut amps = Vec::with_capacity(self.len() * other.len());
        for a in &self.amps {
            amps.extend(other.amps.iter().map(|b| a * b));
        }
        Ok(Self { dims, amps })
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dims != other.dims {
            return Err(domain!(
                "inner product of registers with dims {:?} and {:?}",
                self.dims,
                other.dims
            ));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Largest absolute amplitude difference, or infinity when the registers differ.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        if self.dims != other.dims {
            return f64::INFINITY;
        }
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &StateVector, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    /// Reorder subsystems: subsystem `i` of the result is subsystem `order[i]` of `self`.
    pub fn permute(&self, order: &[usize]) -> Result<StateVector> {
        let n = self.dims.len();
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|&o| o >= n || std::mem::replace(&mut seen[o], true)) {
            return Err(domain!("{order:?} is not a permutation of {n} subsystems"));
        }
        let dims: Vec<usize> = order.iter().map(|&o| self.dims[o]).collect();
        let old_strides = self.strides();
        let mut out = Self::from_parts(dims, vec![Complex64::new(0.0, 0.0); self.len()]);
        for new_index in 0..out.len() {
            let digits = out.digits_of(new_index);
            let old_index: usize = digits
                .iter()
                .zip(order)
                .map(|(&x, &o)| x * old_strides[o])
                .sum();
            out.amps[new_index] = self.amps[old_index];
        }
        Ok(out)
    }

    /// Relabel basis states by a bijection on digit tuples.
    pub(crate) fn map_basis(&self, mut f: impl FnMut(&mut [usize])) -> StateVector {
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        let mut digits = vec![0; self.dims.len()];
        for (index, amp) in self.amps.iter().enumerate() {
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            digits.copy_from_slice(&self.digits_of(index));
            f(&mut digits);
            out[self.index_of(&digits)] += amp;
        }
        Self::from_parts(self.dims.clone(), out)
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub(crate) fn renormalize(&mut self) -> Result<()> {
        let norm = self.norm_sqr().sqrt();
        if norm <= 0.0 {
            return Err(Error::Internal("renormalizing a zero vector".into()));
        }
        for a in &mut self.amps {
            *a /= norm;
        }
        Ok(())
    }

    /// Text fixture format: a `dims` line followed by one `re im` line per
    /// amplitude in basis order.
    ///
    /// ```text
    /// dims 2 2
    /// 0.7071067811865476 0
    /// 0 0
    /// 0 0
    /// 0.7071067811865476 0
    /// ```
    pub fn to_text(&self) -> String {
        let mut out = String::from("dims");
        for d in &self.dims {
            let _ = write!(out, " {d}");
        }
        out.push('\n');
        for a in &self.amps {
            let _ = writeln!(out, "{} {}", a.re, a.im);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<StateVector> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| domain!("empty state text"))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("dims") {
            return Err(domain!("state text must start with a `dims` line"));
        }
        let dims = fields
            .map(|f| f.parse::<usize>().map_err(|e| domain!("bad dimension `{f}`: {e}")))
            .collect::<Result<Vec<_>>>()?;
        let amps = lines
            .map(|line| {
                let parts: Vec<&str> = line.split_whitespace().collect();
                if parts.len() != 2 {
                    return Err(domain!("amplitude line `{line}` must have two numbers"));
                }
                let parse = |s: &str| s.parse::<f64>().map_err(|e| domain!("bad number `{s}`: {e}"));
                Ok(Complex64::new(parse(parts[0])?, parse(parts[1])?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_amplitudes(dims, amps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_unnormalized_and_wrong_length() {
        assert!(StateVector::from_amplitudes(vec![2], vec![c(1.0, 0.0), c(1.0, 0.0)]).is_err());
        assert!(StateVector::from_amplitudes(vec![2], vec![c(1.0, 0.0)]).is_err());
        assert!(StateVector::from_amplitudes(vec![1], vec![c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn dense_cap_is_a_capability_error() {
        let err = StateVector::basis(vec![10; 7], &[0; 7]).unwrap_err();
        assert!(matches!(err, Error::Capability(_)));
        assert!(StateVector::basis(vec![10; 6], &[0; 6]).is_ok());
    }

    #[test]
    fn digits_roundtrip_row_major() {
        let s = StateVector::basis(vec![2, 3, 4], &[1, 2, 3]).unwrap();
        assert_eq!(s.index_of(&[1, 2, 3]), 12 + 8 + 3);
        assert_eq!(s.digits_of(23), vec![1, 2, 3]);
        assert_eq!(s.amplitudes()[23], c(1.0, 0.0));
        assert_eq!(s.strides(), vec![12, 4, 1]);
    }

    #[test]
    fn permute_moves_subsystems() {
        let s = StateVector::basis(vec![2, 3], &[1, 2]).unwrap();
        let p = s.permute(&[1, 0]).unwrap();
        assert_eq!(p.dims(), &[3, 2]);
        assert_eq!(p.amplitude(&[2, 1]), c(1.0, 0.0));
        assert!(s.permute(&[0, 0]).is_err());
    }

    #[test]
    fn tensor_and_inner() {
        let a = StateVector::basis(vec![2], &[1]).unwrap();
        let b = StateVector::basis(vec![3], &[2]).unwrap();
        let ab = a.tensor(&b).unwrap();
        assert_eq!(ab.amplitude(&[1, 2]), c(1.0, 0.0));
        assert_eq!(ab.inner(&ab).unwrap(), c(1.0, 0.0));
        assert!(a.inner(&b).is_err());
    }

    #[test]
    fn text_format_roundtrip() {
        let h = 0.5f64.sqrt();
        let s = StateVector::from_amplitudes(vec![2], vec![c(h, 0.0), c(0.0, -h)]).unwrap();
        let text = s.to_text();
        assert!(text.starts_with("dims 2\n"));
        assert_eq!(StateVector::from_text(&text).unwrap(), s);
        assert!(StateVector::from_text("dimz 2\n1 0\n0 0").is_err());
    }
}
