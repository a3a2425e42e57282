//! Exact label-level cat–Bell entanglement swapping.
//!
//! A cat state `|φ(u₀,…,u_m)⟩` and a Bell pair `|φ(a,b)⟩` are joined by a
//! generalized Bell measurement on the Bell pair's first qudit and cat qudit
//! `k`. Each of the d² outcomes `(v₀,v₁)` occurs with amplitude magnitude
//! `1/d` and leaves the Bell pair's second qudit in cat position `k`:
//!
//! ```text
//! phase mark:  u₀ ⊕ a ⊖ v₀
//! mark k:      b ⊕ u_k ⊖ v₁
//! coefficient: ζ^{(u_k ⊖ v₁)(a ⊖ v₀)} / d
//! ```
//!
//! [`dense_swap_oracle`] recomputes the same table from state vectors.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::qudit::{bell_state, cat_state, BellLabel, CatLabel, Dimension, StateVector, AMPLITUDE_TOL};
use crate::random::Coins;

/// One branch of a swap.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SwapOutcome {
    /// Phase mark of the measured Bell state (λ).
    pub v0: usize,
    /// Shift mark of the measured Bell state (γ).
    pub v1: usize,
    pub new_cat: CatLabel,
    /// Exponent of ζ in the branch coefficient; a global phase, never observable.
    pub phase_exponent: usize,
}

impl SwapOutcome {
    pub fn measured(&self) -> BellLabel {
        BellLabel::new(self.v0, self.v1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwapEntry {
    pub measured: BellLabel,
    pub new_cat: CatLabel,
    #[serde(serialize_with = "serialize_complex")]
    pub coefficient: Complex64,
}

fn serialize_complex<S: serde::Serializer>(c: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&c.re)?;
    t.serialize_element(&c.im)?;
    t.end()
}

/// Full expansion of `cat ⊗ bell` over (new cat state) ⊗ (measured Bell state).
/// Entries are sorted by measured label, then by new cat label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwapDistribution {
    pub entries: Vec<SwapEntry>,
}

impl SwapDistribution {
    pub fn probability_sum(&self) -> f64 {
        self.entries.iter().map(|e| e.coefficient.norm_sqr()).sum()
    }

    /// Largest coefficient deviation from `other`, or `None` when the two
    /// tables do not have the same branches.
    pub fn max_deviation(&self, other: &SwapDistribution) -> Option<f64> {
        if self.entries.len() != other.entries.len() {
            return None;
        }
        let mut worst: f64 = 0.0;
        for (a, b) in self.entries.iter().zip(&other.entries) {
            if a.measured != b.measured || a.new_cat != b.new_cat {
                return None;
            }
            worst = worst.max((a.coefficient - b.coefficient).norm());
        }
        Some(worst)
    }

    pub fn matches(&self, other: &SwapDistribution, tol: f64) -> bool {
        self.max_deviation(other).is_some_and(|dev| dev <= tol)
    }

    fn sort(&mut self) {
        self.entries
            .sort_by(|a, b| (a.measured, &a.new_cat).cmp(&(b.measured, &b.new_cat)));
    }
}

fn check_inputs(d: Dimension, cat: &CatLabel, bell: BellLabel, k: usize) -> Result<()> {
    cat.validate(d)?;
    bell.validate(d)?;
    if k == 0 || k > cat.m() {
        return Err(domain!("swap position k = {k} must lie in 1..={}", cat.m()));
    }
    Ok(())
}

/// The branch selected by measured Bell label `(v0, v1)`.
pub fn swap_branch(d: Dimension, cat: &CatLabel, bell: BellLabel, k: usize, measured: BellLabel) -> Result<SwapOutcome> {
    check_inputs(d, cat, bell, k)?;
    measured.validate(d)?;
    let (v0, v1) = (measured.phase, measured.shift);
    let uk = cat.marks()[k];
    let mut new_cat = cat.clone();
    new_cat.set(0, d.sub(d.add(cat.phase(), bell.phase), v0));
    new_cat.set(k, d.sub(d.add(bell.shift, uk), v1));
    let phase_exponent = (d.sub(uk, v1) * d.sub(bell.phase, v0)) % d.get();
    Ok(SwapOutcome { v0, v1, new_cat, phase_exponent })
}

/// Sample a swap. All branches have probability `1/d²`, so the measured
/// label is drawn uniformly and the rest follows deterministically.
pub fn swap_sample(
    d: Dimension,
    cat: &CatLabel,
    bell: BellLabel,
    k: usize,
    coins: &mut impl Coins,
) -> Result<SwapOutcome> {
    check_inputs(d, cat, bell, k)?;
    let v0 = coins.uniform(d.get());
    let v1 = coins.uniform(d.get());
    swap_branch(d, cat, bell, k, BellLabel::new(v0, v1))
}

/// All d² branches with their coefficients `ζ^{phase}/d`.
pub fn swap_distribution(d: Dimension, cat: &CatLabel, bell: BellLabel, k: usize) -> Result<SwapDistribution> {
    check_inputs(d, cat, bell, k)?;
    let scale = 1.0 / d.get() as f64;
    let mut dist = SwapDistribution {
        entries: BellLabel::all(d)
            .map(|measured| {
                let branch = swap_branch(d, cat, bell, k, measured)?;
                Ok(SwapEntry {
                    measured,
                    new_cat: branch.new_cat,
                    coefficient: d.zeta_pow(branch.phase_exponent as i64) * scale,
                })
            })
            .collect::<Result<_>>()?,
    };
    dist.sort();
    Ok(dist)
}

/// Recompute the swap table from dense vectors.
///
/// The register is `cat (qudits 0..=m) ⊗ bell (qudits m+1, m+2)`. For every
/// candidate cat label `c` and Bell label `v`, the coefficient is the overlap
/// of the joint state with `|φ(c)⟩` on (cat qudits with qudit `k` replaced by
/// qudit `m+2`) times `|φ(v)⟩` on `(m+1, k)`.
pub fn dense_swap_oracle(d: Dimension, cat: &CatLabel, bell: BellLabel, k: usize) -> Result<SwapDistribution> {
    check_inputs(d, cat, bell, k)?;
    let m = cat.m();
    let joint = cat_state(d, cat)?.tensor(&bell_state(d, bell)?)?;
    let support: Vec<(Vec<usize>, Complex64)> = joint
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > 0.0)
        .map(|(i, a)| (joint.digits_of(i), *a))
        .collect();

    let bell_basis: Vec<(BellLabel, StateVector)> = BellLabel::all(d)
        .map(|label| Ok((label, bell_state(d, label)?)))
        .collect::<Result<_>>()?;

    let mut entries = Vec::new();
    let mut cat_digits = vec![0; m + 1];
    for candidate in CatLabel::all(d, m) {
        let candidate_state = cat_state(d, &candidate)?;
        for (measured, measured_state) in &bell_basis {
            let mut coefficient = Complex64::new(0.0, 0.0);
            for (digits, amp) in &support {
                cat_digits.copy_from_slice(&digits[..=m]);
                cat_digits[k] = digits[m + 2];
                let basis_amp = candidate_state.amplitude(&cat_digits)
                    * measured_state.amplitude(&[digits[m + 1], digits[k]]);
                coefficient += basis_amp.conj() * amp;
            }
            if coefficient.norm() > AMPLITUDE_TOL {
                entries.push(SwapEntry {
                    measured: *measured,
                    new_cat: candidate.clone(),
                    coefficient,
                });
            }
        }
    }
    let mut dist = SwapDistribution { entries };
    dist.sort();
    Ok(dist)
}

/// How [`swap_check`] picks its cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapCheckMode {
    /// Every cat label, Bell label and position.
    Exhaustive,
    /// Uniformly random cases from a seeded generator.
    Sampled { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwapMismatch {
    pub cat: CatLabel,
    pub bell: BellLabel,
    pub k: usize,
    /// `None` when the branch sets differ.
    pub deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwapCheckReport {
    pub d: usize,
    /// Shift marks per cat label.
    pub m: usize,
    pub cases: usize,
    pub max_deviation: f64,
    pub mismatches: Vec<SwapMismatch>,
}

impl SwapCheckReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compare [`swap_distribution`] against [`dense_swap_oracle`] on cat labels
/// with `m` shift marks. Refuses inputs whose joint register
/// (`d^(m+3)` amplitudes) would exceed the dense cap.
pub fn swap_check(d: Dimension, m: usize, mode: SwapCheckMode, tol: f64) -> Result<SwapCheckReport> {
    if m == 0 {
        return Err(domain!("a cat label needs at least one shift mark"));
    }
    let joint = (d.get() as f64).powi(m as i32 + 3);
    if joint > crate::qudit::DENSE_CAP as f64 {
        return Err(crate::Error::Capability(format!(
            "d = {d}, m = {m} needs {d}^{} amplitudes, above the dense cap of {}",
            m + 3,
            crate::qudit::DENSE_CAP
        )));
    }
    let cases: Vec<(CatLabel, BellLabel, usize)> = match mode {
        SwapCheckMode::Exhaustive => {
            let mut all = Vec::new();
            for cat in CatLabel::all(d, m) {
                for bell in BellLabel::all(d) {
                    all.extend((1..=m).map(|k| (cat.clone(), bell, k)));
                }
            }
            all
        }
        SwapCheckMode::Sampled { samples, seed } => {
            let mut rng = crate::random::seeded(seed);
            (0..samples)
                .map(|_| {
                    let marks = (0..=m).map(|_| rng.uniform(d.get())).collect();
                    let bell = BellLabel::new(rng.uniform(d.get()), rng.uniform(d.get()));
                    Ok((CatLabel::new(marks)?, bell, 1 + rng.uniform(m)))
                })
                .collect::<Result<_>>()?
        }
    };
    let mut report = SwapCheckReport { d: d.get(), m, cases: cases.len(), max_deviation: 0.0, mismatches: Vec::new() };
    for (cat, bell, k) in cases {
        let deviation = swap_distribution(d, &cat, bell, k)?.max_deviation(&dense_swap_oracle(d, &cat, bell, k)?);
        match deviation {
            Some(dev) if dev <= tol => report.max_deviation = report.max_deviation.max(dev),
            _ => report.mismatches.push(SwapMismatch { cat, bell, k, deviation }),
        }
    }
    Ok(report)
}
