use num_complex::Complex64;

use super::state::total_dimension;
use super::{BasisKind, BellLabel, CatLabel, Dimension, StateVector};
use crate::error::{domain, Error, Result};

/// Largest singlet the engine will build (κ! terms over κ^κ amplitudes).
pub const SINGLET_CAP: usize = 6;

/// `|k⟩` on a single qudit.
pub fn basis_state(d: Dimension, k: usize) -> Result<StateVector> {
    d.check_value("basis index", k)?;
    StateVector::basis(vec![d.get()], &[k])
}

/// `F|k⟩ = d^{-1/2} Σ_r ζ^{kr}|r⟩`
pub fn fourier_state(d: Dimension, k: usize) -> Result<StateVector> {
    d.check_value("Fourier index", k)?;
    let n = d.get();
    let scale = 1.0 / (n as f64).sqrt();
    let amps = (0..n).map(|r| d.zeta_pow((k * r) as i64) * scale).collect();
    Ok(StateVector::from_parts(vec![n], amps))
}

/// Single qudit prepared as element `value` of the given basis.
pub fn prepare_in_basis(d: Dimension, basis: BasisKind, value: usize) -> Result<StateVector> {
    match basis {
        BasisKind::Computational => basis_state(d, value),
        BasisKind::Fourier => fourier_state(d, value),
    }
}

/// `|φ(u,v)⟩ = d^{-1/2} Σ_j ζ^{ju}|j⟩|j⊕v⟩`
pub fn bell_state(d: Dimension, label: BellLabel) -> Result<StateVector> {
    cat_state(d, &CatLabel::from(label))
}

/// `d^{-1/2} Σ_j ζ^{j·u₀}|j, j⊕u₁, …, j⊕u_m⟩`
pub fn cat_state(d: Dimension, label: &CatLabel) -> Result<StateVector> {
    label.validate(d)?;
    let n = d.get();
    let dims = vec![n; label.particles()];
    let total = total_dimension(&dims)?;
    let mut state = StateVector::from_parts(dims, vec![Complex64::new(0.0, 0.0); total]);
    let scale = 1.0 / (n as f64).sqrt();
    let mut digits = vec![0; label.particles()];
    for j in 0..n {
        digits[0] = j;
        for (slot, &shift) in digits[1..].iter_mut().zip(&label.marks()[1..]) {
            *slot = d.add(j, shift);
        }
        let index = state.index_of(&digits);
        state.amps_mut()[index] = d.zeta_pow((j * label.phase()) as i64) * scale;
    }
    Ok(state)
}

/// Totally antisymmetric κ-qudit κ-level state: `(κ!)^{-1/2} Σ_π sgn(π)|π(0)…π(κ−1)⟩`.
pub fn singlet_state(kappa: usize) -> Result<StateVector> {
    if kappa < 2 {
        return Err(domain!("singlet needs at least 2 particles, got {kappa}"));
    }
    if kappa > SINGLET_CAP {
        return Err(Error::Capability(format!(
            "singlet of {kappa} particles exceeds the cap of {SINGLET_CAP}"
        )));
    }
    let dims = vec![kappa; kappa];
    let total = total_dimension(&dims)?;
    let mut state = StateVector::from_parts(dims, vec![Complex64::new(0.0, 0.0); total]);
    let perms = permutations(kappa);
    let scale = 1.0 / (perms.len() as f64).sqrt();
    for perm in perms {
        let sign = if inversions(&perm) % 2 == 0 { 1.0 } else { -1.0 };
        let index = state.index_of(&perm);
        state.amps_mut()[index] = Complex64::new(sign * scale, 0.0);
    }
    Ok(state)
}

pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                extend(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

pub(crate) fn inversions(perm: &[usize]) -> usize {
    let mut count = 0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                count += 1;
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qudit::AMPLITUDE_TOL;

    fn dim(d: usize) -> Dimension {
        Dimension::new(d).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() <= AMPLITUDE_TOL
    }

    #[test]
    fn fourier_examples() {
        let h = 0.5f64.sqrt();
        let s = fourier_state(dim(2), 0).unwrap();
        assert!(close(s.amplitudes()[0], c(h, 0.0)) && close(s.amplitudes()[1], c(h, 0.0)));

        // ζ = e^{2πi/3}: (1, ζ, ζ²)/√3
        let s = fourier_state(dim(3), 1).unwrap();
        let r3 = 3f64.sqrt();
        let zeta = c(-0.5, 3f64.sqrt() / 2.0);
        assert!(close(s.amplitudes()[0], c(1.0 / r3, 0.0)));
        assert!(close(s.amplitudes()[1], zeta / r3));
        assert!(close(s.amplitudes()[2], zeta * zeta / r3));

        let s = fourier_state(dim(4), 2).unwrap();
        for (a, e) in s.amplitudes().iter().zip([0.5, -0.5, 0.5, -0.5]) {
            assert!(close(*a, c(e, 0.0)));
        }

        assert!(fourier_state(dim(3), 3).is_err());
    }

    #[test]
    fn bell_examples() {
        let h = 0.5f64.sqrt();
        let s = bell_state(dim(2), BellLabel::new(0, 0)).unwrap();
        assert!(close(s.amplitude(&[0, 0]), c(h, 0.0)));
        assert!(close(s.amplitude(&[1, 1]), c(h, 0.0)));
        assert!(close(s.amplitude(&[0, 1]), c(0.0, 0.0)));

        let r3 = 1.0 / 3f64.sqrt();
        let s = bell_state(dim(3), BellLabel::new(0, 0)).unwrap();
        for j in 0..3 {
            assert!(close(s.amplitude(&[j, j]), c(r3, 0.0)));
        }

        let s = bell_state(dim(2), BellLabel::new(1, 1)).unwrap();
        assert!(close(s.amplitude(&[0, 1]), c(h, 0.0)));
        assert!(close(s.amplitude(&[1, 0]), c(-h, 0.0)));
    }

    #[test]
    fn cat_examples() {
        let h = 0.5f64.sqrt();
        let ghz = cat_state(dim(2), &CatLabel::new(vec![0, 0, 0]).unwrap()).unwrap();
        assert!(close(ghz.amplitude(&[0, 0, 0]), c(h, 0.0)));
        assert!(close(ghz.amplitude(&[1, 1, 1]), c(h, 0.0)));
        assert!((ghz.norm_sqr() - 1.0).abs() < AMPLITUDE_TOL);

        let d = dim(3);
        let a = cat_state(d, &CatLabel::new(vec![1, 0, 2]).unwrap()).unwrap();
        let b = cat_state(d, &CatLabel::new(vec![2, 0, 2]).unwrap()).unwrap();
        assert!(close(a.inner(&a).unwrap(), c(1.0, 0.0)));
        assert!(close(a.inner(&b).unwrap(), c(0.0, 0.0)));

        let m1 = cat_state(dim(2), &CatLabel::new(vec![1, 1]).unwrap()).unwrap();
        assert!(close(m1.amplitude(&[0, 1]), c(h, 0.0)));
        assert!(close(m1.amplitude(&[1, 0]), c(-h, 0.0)));
    }

    #[test]
    fn singlet_signs_follow_inversion_parity() {
        let s = singlet_state(2).unwrap();
        let h = 0.5f64.sqrt();
        assert!(close(s.amplitude(&[0, 1]), c(h, 0.0)));
        assert!(close(s.amplitude(&[1, 0]), c(-h, 0.0)));

        let s = singlet_state(3).unwrap();
        let a = 1.0 / 6f64.sqrt();
        let expected = [
            ([0, 1, 2], a),
            ([0, 2, 1], -a),
            ([1, 0, 2], -a),
            ([1, 2, 0], a),
            ([2, 0, 1], a),
            ([2, 1, 0], -a),
        ];
        for (digits, amp) in expected {
            assert!(close(s.amplitude(&digits), c(amp, 0.0)), "{digits:?}");
        }
        assert!((s.norm_sqr() - 1.0).abs() < AMPLITUDE_TOL);
    }

    #[test]
    fn singlet_bounds() {
        assert!(matches!(singlet_state(7), Err(Error::Capability(_))));
        assert!(matches!(singlet_state(1), Err(Error::Domain(_))));
        assert_eq!(singlet_state(6).unwrap().len(), 46656);
    }

    #[test]
    fn inversion_counts() {
        assert_eq!(inversions(&[0, 1, 2]), 0);
        assert_eq!(inversions(&[2, 1, 0]), 3);
        assert_eq!(permutations(4).len(), 24);
    }
}
