use num_complex::Complex64;

use super::operator::fourier_matrix;
use super::{BasisKind, BellLabel, CatLabel, Dimension, StateVector};
use crate::error::{domain, Error, Result};
use crate::random::Coins;

/// Result of a projective measurement on part of a register.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    /// One value per measured subsystem, in the order they were requested.
    pub values: Vec<usize>,
    /// Normalized state of the unmeasured subsystems, in their original order.
    pub post_state: StateVector,
}

fn check_subsystems(state: &StateVector, subsystems: &[usize]) -> Result<()> {
    let n = state.num_subsystems();
    for (i, &s) in subsystems.iter().enumerate() {
        if s >= n {
            return Err(domain!("subsystem {s} out of range for {n} subsystems"));
        }
        if subsystems[..i].contains(&s) {
            return Err(domain!("subsystem {s} listed twice"));
        }
    }
    Ok(())
}

fn equal_dimension(state: &StateVector, subsystems: &[usize]) -> Result<Dimension> {
    let dims = state.dims();
    let d = dims[subsystems[0]];
    if let Some(&s) = subsystems.iter().find(|&&s| dims[s] != d) {
        return Err(domain!(
            "subsystems must share one dimension: {} has {} but {} has {d}",
            s,
            dims[s],
            subsystems[0]
        ));
    }
    Dimension::new(d)
}

/// Measure `subsystems` in the computational basis with Born-rule sampling.
pub fn measure_computational(
    state: &StateVector,
    subsystems: &[usize],
    coins: &mut impl Coins,
) -> Result<MeasurementOutcome> {
    check_subsystems(state, subsystems)?;
    let dims = state.dims();
    let strides = state.strides();
    let outcome_dims: Vec<usize> = subsystems.iter().map(|&s| dims[s]).collect();
    let outcome_count: usize = outcome_dims.iter().product();

    let outcome_of = |index: usize| -> usize {
        subsystems
            .iter()
            .zip(&outcome_dims)
            .fold(0, |acc, (&s, &d)| acc * d + (index / strides[s]) % d)
    };

    let mut probabilities = vec![0.0; outcome_count];
    for (index, amp) in state.amplitudes().iter().enumerate() {
        probabilities[outcome_of(index)] += amp.norm_sqr();
    }
    let chosen = coins.weighted(&probabilities);
    let p = probabilities[chosen];
    if p <= 0.0 {
        return Err(Error::Internal(format!("sampled outcome {chosen} has zero probability")));
    }

    let mut values = vec![0; subsystems.len()];
    let mut rest = chosen;
    for (slot, &d) in values.iter_mut().zip(&outcome_dims).rev() {
        *slot = rest % d;
        rest /= d;
    }

    let survivors: Vec<usize> = (0..dims.len()).filter(|s| !subsystems.contains(s)).collect();
    let post_dims: Vec<usize> = survivors.iter().map(|&s| dims[s]).collect();
    let scale = 1.0 / p.sqrt();
    let mut post_amps = Vec::with_capacity(state.len() / outcome_count);
    for (index, amp) in state.amplitudes().iter().enumerate() {
        if outcome_of(index) == chosen {
            post_amps.push(amp * scale);
        }
    }
    Ok(MeasurementOutcome {
        values,
        post_state: StateVector::from_parts(post_dims, post_amps),
    })
}

/// Rotate the listed subsystems so that the cat basis on them becomes the
/// computational basis: `s_k ← s_k ⊖ s_0` for k ≥ 1, then `F†` on `s_0`.
fn into_cat_frame(state: &StateVector, subsystems: &[usize], d: Dimension) -> Result<StateVector> {
    let head = subsystems[0];
    let tail = subsystems[1..].to_vec();
    let shifted = state.map_basis(|digits| {
        let base = digits[head];
        for &s in &tail {
            digits[s] = d.sub(digits[s], base);
        }
    });
    fourier_matrix(d).adjoint().apply(&shifted, head)
}

/// Projective measurement of `subsystems` in the cat basis `{|φ(u₀,…,u_m)⟩}`.
/// The first listed subsystem plays the role of the unshifted qudit.
pub fn measure_cat_basis(
    state: &StateVector,
    subsystems: &[usize],
    coins: &mut impl Coins,
) -> Result<(CatLabel, StateVector)> {
    check_subsystems(state, subsystems)?;
    if subsystems.len() < 2 {
        return Err(domain!("cat-basis measurement needs at least two subsystems"));
    }
    let d = equal_dimension(state, subsystems)?;
    let rotated = into_cat_frame(state, subsystems, d)?;
    let outcome = measure_computational(&rotated, subsystems, coins)?;
    Ok((CatLabel::new(outcome.values)?, outcome.post_state))
}

/// Generalized Bell measurement on `pair = (first, second)`, projecting onto
/// `|φ(u,v)⟩ = d^{-1/2} Σ_j ζ^{ju}|j⟩_first|j⊕v⟩_second`.
pub fn measure_generalized_bell(
    state: &StateVector,
    pair: (usize, usize),
    coins: &mut impl Coins,
) -> Result<(BellLabel, StateVector)> {
    let (label, post) = measure_cat_basis(state, &[pair.0, pair.1], coins)?;
    Ok((BellLabel::new(label.marks()[0], label.marks()[1]), post))
}

/// Measure one subsystem in the Fourier basis `{F|k⟩}`.
pub fn fourier_basis_measure(
    state: &StateVector,
    subsystem: usize,
    coins: &mut impl Coins,
) -> Result<MeasurementOutcome> {
    check_subsystems(state, &[subsystem])?;
    let d = Dimension::new(state.dims()[subsystem])?;
    let rotated = fourier_matrix(d).adjoint().apply(state, subsystem)?;
    measure_computational(&rotated, &[subsystem], coins)
}

/// Measure one subsystem in `basis` and leave it in the observed basis state
/// (measure-and-resend). Returns the observed value and the full collapsed register.
pub fn collapse_in_basis(
    state: &StateVector,
    subsystem: usize,
    basis: BasisKind,
    coins: &mut impl Coins,
) -> Result<(usize, StateVector)> {
    check_subsystems(state, &[subsystem])?;
    let d = Dimension::new(state.dims()[subsystem])?;
    let fourier = fourier_matrix(d);
    let working = match basis {
        BasisKind::Computational => state.clone(),
        BasisKind::Fourier => fourier.adjoint().apply(state, subsystem)?,
    };
    let stride = working.strides()[subsystem];
    let digit = |index: usize| (index / stride) % d.get();
    let mut probabilities = vec![0.0; d.get()];
    for (index, amp) in working.amplitudes().iter().enumerate() {
        probabilities[digit(index)] += amp.norm_sqr();
    }
    let value = coins.weighted(&probabilities);
    let mut collapsed = working;
    for (index, amp) in collapsed.amps_mut().iter_mut().enumerate() {
        if digit(index) != value {
            *amp = Complex64::new(0.0, 0.0);
        }
    }
    collapsed.renormalize()?;
    let collapsed = match basis {
        BasisKind::Computational => collapsed,
        BasisKind::Fourier => fourier.apply(&collapsed, subsystem)?,
    };
    Ok((value, collapsed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qudit::{basis_state, bell_state, cat_state, fourier_state, singlet_state, AMPLITUDE_TOL};
    use crate::random::{enumerate_paths, seeded};

    fn dim(d: usize) -> Dimension {
        Dimension::new(d).unwrap()
    }

    #[test]
    fn bell_pair_outcomes_are_correlated() {
        let s = bell_state(dim(2), BellLabel::new(0, 0)).unwrap();
        let paths = enumerate_paths(|c| measure_computational(&s, &[0, 1], c).unwrap().values);
        assert_eq!(paths.len(), 2);
        for (values, p) in paths {
            assert_eq!(values[0], values[1]);
            assert!((p - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_measurement_leaves_normalized_remainder() {
        let ghz = cat_state(dim(3), &CatLabel::new(vec![0, 1, 2]).unwrap()).unwrap();
        let out = measure_computational(&ghz, &[1], &mut seeded(5)).unwrap();
        assert_eq!(out.post_state.dims(), &[3, 3]);
        assert!((out.post_state.norm_sqr() - 1.0).abs() < AMPLITUDE_TOL);
        // qudit 1 holds j⊕1, so qudit 0 must be value ⊖ 1 and qudit 2 must be j⊕2
        let j = dim(3).sub(out.values[0], 1);
        assert!((out.post_state.amplitude(&[j, dim(3).add(j, 2)]).norm() - 1.0).abs() < AMPLITUDE_TOL);
    }

    #[test]
    fn singlet_outcomes_are_uniform_permutations() {
        let s = singlet_state(3).unwrap();
        let paths = enumerate_paths(|c| measure_computational(&s, &[0, 1, 2], c).unwrap().values);
        assert_eq!(paths.len(), 6);
        for (values, p) in paths {
            let mut sorted = values.clone();
            sorted.sort();
            assert_eq!(sorted, vec![0, 1, 2]);
            assert!((p - 1.0 / 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fourier_state_is_uniform_in_computational_basis() {
        let s = fourier_state(dim(3), 0).unwrap();
        let paths = enumerate_paths(|c| measure_computational(&s, &[0], c).unwrap().values[0]);
        assert_eq!(paths.len(), 3);
        assert!(paths.iter().all(|(_, p)| (p - 1.0 / 3.0).abs() < 1e-12));
    }

    #[test]
    fn bell_eigenstate_measures_its_label() {
        let label = BellLabel::new(1, 2);
        let s = bell_state(dim(3), label).unwrap();
        let paths = enumerate_paths(|c| measure_generalized_bell(&s, (0, 1), c).unwrap().0);
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].0, label);
        assert!((paths[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cat_bell_joint_measurement_is_uniform() {
        let d = dim(2);
        let joint = cat_state(d, &CatLabel::new(vec![0, 0, 0]).unwrap())
            .unwrap()
            .tensor(&bell_state(d, BellLabel::new(0, 0)).unwrap())
            .unwrap();
        // cat qudit 1 with Bell qudit 0 (register index 3)
        let paths = enumerate_paths(|c| measure_generalized_bell(&joint, (3, 1), c).unwrap().0);
        assert_eq!(paths.len(), 4);
        assert!(paths.iter().all(|(_, p)| (p - 0.25).abs() < 1e-12));
    }

    #[test]
    fn bell_measurement_rejects_mixed_dimensions() {
        let s = basis_state(dim(2), 0)
            .unwrap()
            .tensor(&basis_state(dim(3), 0).unwrap())
            .unwrap();
        assert!(matches!(
            measure_generalized_bell(&s, (0, 1), &mut seeded(1)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn fourier_measurements() {
        let s = fourier_state(dim(3), 2).unwrap();
        let paths = enumerate_paths(|c| fourier_basis_measure(&s, 0, c).unwrap().values[0]);
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].0, 2);

        for (d, k) in [(2, 0), (3, 1)] {
            let s = basis_state(dim(d), k).unwrap();
            let paths = enumerate_paths(|c| fourier_basis_measure(&s, 0, c).unwrap().values[0]);
            assert_eq!(paths.len(), d);
            assert!(paths.iter().all(|(_, p)| (p - 1.0 / d as f64).abs() < 1e-12));
        }
    }

    #[test]
    fn collapse_leaves_basis_state_in_place() {
        let d = dim(3);
        let s = bell_state(d, BellLabel::new(2, 1)).unwrap();
        let (value, collapsed) = collapse_in_basis(&s, 1, BasisKind::Fourier, &mut seeded(11)).unwrap();
        assert_eq!(collapsed.dims(), &[3, 3]);
        let again = fourier_basis_measure(&collapsed, 1, &mut seeded(0)).unwrap();
        assert_eq!(again.values[0], value);
    }

    #[test]
    fn rejects_repeated_subsystems() {
        let s = bell_state(dim(2), BellLabel::new(0, 0)).unwrap();
        assert!(measure_computational(&s, &[0, 0], &mut seeded(1)).is_err());
        assert!(measure_computational(&s, &[2], &mut seeded(1)).is_err());
    }
}
