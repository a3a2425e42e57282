use serde::{Deserialize, Serialize};

use super::function::FunctionValue;
use super::{Announcement, EngineKind};
use crate::channel::{EveModel, TransmissionReport};
use crate::qudit::{BellLabel, CatLabel};

/// Bumped whenever the serialized layout changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelStage {
    /// TP sends singlet particles (protocol two only).
    SingletDistribution,
    /// TP sends cat-state particles to a participant.
    CatDistribution,
    /// A participant returns the unmeasured Bell halves to TP.
    BellReturn,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChannelRecord {
    pub stage: ChannelStage,
    /// 1-based participant index.
    pub participant: usize,
    pub report: TransmissionReport,
}

/// Everything that happened to one cat state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// `r`: data value (protocol one) or slot (protocol two).
    pub round: usize,
    /// TP's cat label `(u₀, u₁, …, u_n)`.
    pub prepared: CatLabel,
    /// Participants' encoded Bell labels `(v_i, w_i)`.
    pub encoded: Option<Vec<BellLabel>>,
    /// Participants' Bell measurement results `(λ_i, γ_i)`.
    pub bell_results: Option<Vec<BellLabel>>,
    /// `𝒜^r`
    pub announcement: Option<usize>,
    /// TP's cat-basis measurement of the returned state.
    pub measured: Option<CatLabel>,
    /// `ℛ^r`
    pub recovered: Option<usize>,
}

/// Outcome of singlet verification in protocol two.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingletRecord {
    pub pool_size: usize,
    /// Pool indices TP selected for testing, ascending.
    pub tested: Vec<usize>,
    pub survivor: usize,
    /// First tested copy whose outcomes were not all distinct.
    pub failed_copy: Option<usize>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Completed {
        /// `ℛ^r` in round order.
        recovered: Vec<usize>,
        function: String,
        value: FunctionValue,
    },
    Aborted {
        reason: String,
        channel: Option<ChannelRecord>,
    },
}

/// Settings echoed into every transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSettings {
    pub n: usize,
    pub d: usize,
    /// Largest data value ξ (protocol one).
    pub xi: Option<usize>,
    pub strict_d: bool,
    /// Singlet test multiplicity τ (protocol two).
    pub tau: Option<usize>,
    pub decoys: Option<usize>,
    pub threshold: usize,
    pub announcement: Announcement,
    pub eve: EveModel,
    pub engine: EngineKind,
}

/// Complete record of one protocol run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub schema_version: u32,
    pub protocol: ProtocolKind,
    pub settings: RunSettings,
    pub seed: Option<u64>,
    pub channels: Vec<ChannelRecord>,
    pub singlet: Option<SingletRecord>,
    /// Private slot of each participant (protocol two), 1-based.
    pub slots: Option<Vec<usize>>,
    pub rounds: Vec<RoundRecord>,
    pub outcome: Outcome,
}

/// The part of a transcript the third party observes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct TpView {
    pub prepared: Vec<CatLabel>,
    pub measured: Vec<Option<CatLabel>>,
    pub announcements: Vec<Option<usize>>,
    pub channels: Vec<ChannelRecord>,
    pub singlet: Option<(Vec<usize>, usize, bool)>,
    pub aborted: bool,
}

impl Transcript {
    pub fn is_aborted(&self) -> bool {
        matches!(self.outcome, Outcome::Aborted { .. })
    }

    pub fn recovered(&self) -> Option<&[usize]> {
        match &self.outcome {
            Outcome::Completed { recovered, .. } => Some(recovered),
            Outcome::Aborted { .. } => None,
        }
    }

    pub fn function_value(&self) -> Option<&FunctionValue> {
        match &self.outcome {
            Outcome::Completed { value, .. } => Some(value),
            Outcome::Aborted { .. } => None,
        }
    }

    /// Drop everything only participants know: encodings, Bell results, slots.
    pub fn tp_view(&self) -> TpView {
        TpView {
            prepared: self.rounds.iter().map(|r| r.prepared.clone()).collect(),
            measured: self.rounds.iter().map(|r| r.measured.clone()).collect(),
            announcements: self.rounds.iter().map(|r| r.announcement).collect(),
            channels: self.channels.clone(),
            singlet: self.singlet.as_ref().map(|s| (s.tested.clone(), s.survivor, s.passed)),
            aborted: self.is_aborted(),
        }
    }

    /// Pretty JSON with fixed field order.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("transcripts always serialize");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> crate::Result<Transcript> {
        serde_json::from_str(text).map_err(|e| crate::Error::Domain(format!("malformed transcript: {e}")))
    }
}
