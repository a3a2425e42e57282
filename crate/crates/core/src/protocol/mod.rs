//! The two anonymous computation protocols and their shared round machinery.
//!
//! Both protocols end the same way: TP owns one `(n+1)`-qudit cat state per
//! round, hands qudit `i` of each to participant `P_i`, every participant
//! swaps a Bell pair `|φ(v, w)⟩` carrying its data `w` into the cat state,
//! returns the Bell half, and TP reads `w` summed over participants from the
//! final cat marks and the announced sum of the participants' `γ` outcomes.

mod function;
pub mod one;
mod rounds;
mod transcript;
pub mod two;
mod verify;

pub use function::{check_permutation_invariance, CustomFunction, FunctionValue, SymmetricFunction};
pub use one::{derive_value_counts, expand_counts, run_protocol_one, run_protocol_one_seeded, ProtocolOneConfig, ValueCounts};
pub use transcript::{
    ChannelRecord, ChannelStage, Outcome, ProtocolKind, RoundRecord, RunSettings, SingletRecord, TpView, Transcript,
    SCHEMA_VERSION,
};
pub use two::{
    encode_slot, run_protocol_two, run_protocol_two_seeded, singlet_round, verify_singlet_copies, ProtocolTwoConfig, SingletOutcome, SingletSource,
    SingletStage, SlotAssignment,
};
pub use verify::{verify_transcript, ConsistencyIssue, ConsistencyReport};

use serde::{Deserialize, Serialize};

use crate::channel::EveModel;
use crate::error::{domain, Error, Result};
use crate::qudit::{CatLabel, Dimension};

/// How the participants' joint announcement `𝒜^r = Σ_i γ_i^r` is published.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Announcement {
    /// `Σ_i γ_i^r mod d`. Recovery only needs the residue, and the residue
    /// reveals nothing about which participant holds which value.
    #[default]
    Reduced,
    /// The plain integer sum. Lets TP correlate per-participant marks with
    /// the sum's range, which breaks anonymity.
    Integer,
}

impl Announcement {
    pub fn announce(self, gammas: impl IntoIterator<Item = usize>, d: Dimension) -> usize {
        let total: usize = gammas.into_iter().sum();
        match self {
            Announcement::Reduced => total % d.get(),
            Announcement::Integer => total,
        }
    }
}

/// Which engine carries the cat states through a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    /// Exact label arithmetic; cannot model interception of payload qudits.
    Label,
    /// Dense state vectors; bounded by the dense cap.
    Dense,
}

/// `None` selects the label engine for Eve-free runs and the dense engine otherwise.
pub(crate) fn resolve_engine(requested: Option<EngineKind>, eve: &EveModel) -> Result<EngineKind> {
    match (requested, eve.is_active()) {
        (Some(EngineKind::Label), true) => Err(domain!(
            "the label engine cannot simulate interception of entangled payload qudits; use the dense engine"
        )),
        (Some(kind), _) => Ok(kind),
        (None, false) => Ok(EngineKind::Label),
        (None, true) => Ok(EngineKind::Dense),
    }
}

/// TP's count for one round: `Σ_i m_i − Σ_i u_i + 𝒜 (mod d)` where `m_i` are
/// the measured shift marks and `u_i` the prepared ones.
///
/// Each measured mark is `u_i ⊕ w_i ⊖ γ_i`, so the result is `Σ_i w_i mod d`.
pub fn tp_recover_count(measured: &CatLabel, prepared: &CatLabel, announcement: Option<usize>, d: Dimension) -> Result<usize> {
    let announcement =
        announcement.ok_or_else(|| Error::Protocol("no announcement received for this round".into()))?;
    if measured.particles() != prepared.particles() {
        return Err(Error::Protocol(format!(
            "measured cat has {} marks but {} were prepared",
            measured.particles(),
            prepared.particles()
        )));
    }
    let measured_sum: i128 = measured.marks()[1..].iter().map(|&m| m as i128).sum();
    let prepared_sum: i128 = prepared.marks()[1..].iter().map(|&u| u as i128).sum();
    let raw = measured_sum - prepared_sum + announcement as i128;
    Ok(raw.rem_euclid(d.get() as i128) as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat(marks: &[usize]) -> CatLabel {
        CatLabel::new(marks.to_vec()).unwrap()
    }

    #[test]
    fn recovery_by_substitution() {
        let d = Dimension::new(4).unwrap();
        // u1=2, w1=1, γ1=0 → mark 3
        assert_eq!(tp_recover_count(&cat(&[0, 3]), &cat(&[0, 2]), Some(0), d).unwrap(), 1);
        // u1=3, w1=2, γ1=3 → mark (3+2−3) mod 4 = 2
        assert_eq!(tp_recover_count(&cat(&[1, 2]), &cat(&[0, 3]), Some(3), d).unwrap(), 2);
    }

    #[test]
    fn missing_announcement_is_protocol_error() {
        let d = Dimension::new(2).unwrap();
        assert!(matches!(tp_recover_count(&cat(&[0, 1]), &cat(&[0, 1]), None, d), Err(Error::Protocol(_))));
    }

    #[test]
    fn announcement_modes() {
        let d = Dimension::new(3).unwrap();
        assert_eq!(Announcement::Reduced.announce([2, 2, 1], d), 2);
        assert_eq!(Announcement::Integer.announce([2, 2, 1], d), 5);
    }

    #[test]
    fn engine_resolution() {
        assert_eq!(resolve_engine(None, &EveModel::None).unwrap(), EngineKind::Label);
        assert_eq!(resolve_engine(None, &EveModel::InterceptResend).unwrap(), EngineKind::Dense);
        assert!(resolve_engine(Some(EngineKind::Label), &EveModel::InterceptResend).is_err());
        assert_eq!(resolve_engine(Some(EngineKind::Dense), &EveModel::None).unwrap(), EngineKind::Dense);
    }
}
