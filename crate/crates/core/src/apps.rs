//! Anonymous voting, ranking and surveying on top of the two protocols.
//!
//! Results carry aggregate data only. Transcripts are not returned because
//! they record each participant's encoding.

use serde::Serialize;
use std::collections::BTreeMap;

use crate::analysis::{minimal_d_one, minimal_d_two};
use crate::channel::{ChannelConfig, EveModel};
use crate::error::{domain, Result};
use crate::protocol::one::expand_counts;
use crate::protocol::{
    run_protocol_one, run_protocol_two, Outcome, ProtocolOneConfig, ProtocolTwoConfig, SymmetricFunction, Transcript,
};
use crate::qudit::{Dimension, SINGLET_CAP};
use crate::random::Coins;

/// Settings shared by the applications.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppConfig {
    /// `None` picks the smallest admissible dimension.
    pub d: Option<Dimension>,
    /// Protocol one only: keep every count below d.
    pub strict_d: bool,
    pub tau: usize,
    pub channel: ChannelConfig,
    pub eve: EveModel,
}

impl Default for AppConfig {
    fn default() -> Self {
        Self {
            d: None,
            strict_d: true,
            tau: ProtocolTwoConfig::DEFAULT_TAU,
            channel: ChannelConfig::default(),
            eve: EveModel::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum AppOutcome<T> {
    Completed { result: T },
    Aborted { reason: String },
}

impl<T> AppOutcome<T> {
    pub fn completed(self) -> Option<T> {
        match self {
            AppOutcome::Completed { result } => Some(result),
            AppOutcome::Aborted { .. } => None,
        }
    }

    fn map<U>(self, f: impl FnOnce(T) -> U) -> AppOutcome<U> {
        match self {
            AppOutcome::Completed { result } => AppOutcome::Completed { result: f(result) },
            AppOutcome::Aborted { reason } => AppOutcome::Aborted { reason },
        }
    }
}

fn outcome_of(transcript: Transcript) -> AppOutcome<Vec<usize>> {
    match transcript.outcome {
        Outcome::Completed { recovered, .. } => AppOutcome::Completed { result: recovered },
        Outcome::Aborted { reason, .. } => AppOutcome::Aborted { reason },
    }
}

/// Protocol one over `lists`, returning the recovered counts `ℛ^0..ℛ^ξ`.
fn counts_via_one(lists: &[Vec<usize>], xi: usize, config: &AppConfig, coins: &mut impl Coins) -> Result<AppOutcome<Vec<usize>>> {
    let d = match config.d {
        Some(d) => d,
        None if config.strict_d => {
            let total: usize = lists.iter().map(Vec::len).sum();
            minimal_d_one(&[total])?.d
        }
        None => minimal_d_one(&lists.iter().map(Vec::len).collect::<Vec<_>>())?.d,
    };
    let mut p = ProtocolOneConfig::new(lists.len(), xi, d);
    p.strict_d = config.strict_d;
    p.channel = config.channel;
    let transcript = run_protocol_one(&p, lists, &SymmetricFunction::Sum, &config.eve, coins)?;
    Ok(outcome_of(transcript))
}

/// Recover the multiset of one value per participant. Protocol two when the
/// group fits a singlet, otherwise protocol one with one-element data sets.
fn multiset_of_values(values: &[usize], config: &AppConfig, coins: &mut impl Coins) -> Result<AppOutcome<Vec<usize>>> {
    let largest = values.iter().copied().max().ok_or_else(|| domain!("no participants"))?;
    if values.len() <= SINGLET_CAP {
        let d = match config.d {
            Some(d) => d,
            None => minimal_d_two(values)?.d,
        };
        if largest >= d.get() {
            return Err(domain!("value {largest} does not fit d = {d}; raise d to at least {}", largest + 1));
        }
        let mut p = ProtocolTwoConfig::new(values.len(), d);
        p.tau = config.tau;
        p.channel = config.channel;
        let transcript = run_protocol_two(&p, values, &SymmetricFunction::Sum, &config.eve, coins)?;
        Ok(outcome_of(transcript).map(|mut v| {
            v.sort_unstable();
            v
        }))
    } else {
        let lists: Vec<Vec<usize>> = values.iter().map(|&x| vec![x]).collect();
        Ok(counts_via_one(&lists, largest, config, coins)?.map(|counts| expand_counts(&counts)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VoteMode {
    /// One candidate per voter; runs protocol two.
    OneVote,
    /// Any number of votes per voter; runs protocol one with ξ = m − 1.
    MultiVote,
}

/// Candidates chosen by one voter, numbered from 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ballot {
    pub candidates: Vec<usize>,
}

impl Ballot {
    pub fn new(candidates: Vec<usize>) -> Self {
        Self { candidates }
    }
}

/// Votes per candidate; `counts[c - 1]` belongs to candidate `c`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub counts: Vec<usize>,
}

pub fn anonymous_vote(
    ballots: &[Ballot],
    m: usize,
    mode: VoteMode,
    config: &AppConfig,
    coins: &mut impl Coins,
) -> Result<AppOutcome<Tally>> {
    if m == 0 {
        return Err(domain!("an election needs at least one candidate"));
    }
    if ballots.is_empty() {
        return Err(domain!("an election needs at least one voter"));
    }
    for (i, ballot) in ballots.iter().enumerate() {
        if let Some(&c) = ballot.candidates.iter().find(|&&c| c == 0 || c > m) {
            return Err(domain!("ballot {} names candidate {c}, outside 1..={m}", i + 1));
        }
        if mode == VoteMode::OneVote && ballot.candidates.len() != 1 {
            return Err(domain!("ballot {} holds {} votes; one-vote mode needs exactly one", i + 1, ballot.candidates.len()));
        }
    }
    match mode {
        VoteMode::OneVote => {
            let values: Vec<usize> = ballots.iter().map(|b| b.candidates[0] - 1).collect();
            let mut config = config.clone();
            config.d = config.d.or(Some(Dimension::new(m.max(2))?));
            Ok(multiset_of_values(&values, &config, coins)?.map(|votes| {
                let mut counts = vec![0; m];
                for v in votes {
                    counts[v] += 1;
                }
                Tally { counts }
            }))
        }
        VoteMode::MultiVote => {
            let lists: Vec<Vec<usize>> = ballots.iter().map(|b| b.candidates.iter().map(|c| c - 1).collect()).collect();
            Ok(counts_via_one(&lists, m - 1, config, coins)?.map(|counts| Tally { counts }))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AppInput {
    /// One value per participant.
    Single(Vec<usize>),
    /// A data set per participant.
    Multi(Vec<Vec<usize>>),
}

impl AppInput {
    fn participants(&self) -> usize {
        match self {
            AppInput::Single(v) => v.len(),
            AppInput::Multi(v) => v.len(),
        }
    }
}

/// The pooled values in ascending order, with owners removed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankingResult {
    pub sorted: Vec<usize>,
    /// value → multiplicity
    pub multiplicities: BTreeMap<usize, usize>,
}

impl RankingResult {
    fn from_sorted(sorted: Vec<usize>) -> Self {
        let mut multiplicities = BTreeMap::new();
        for &v in &sorted {
            *multiplicities.entry(v).or_insert(0) += 1;
        }
        Self { sorted, multiplicities }
    }
}

fn pooled(input: &AppInput, config: &AppConfig, coins: &mut impl Coins) -> Result<AppOutcome<Vec<usize>>> {
    match input {
        AppInput::Single(values) => multiset_of_values(values, config, coins),
        AppInput::Multi(lists) => {
            let xi = lists.iter().flatten().copied().max().unwrap_or(0);
            Ok(counts_via_one(lists, xi, config, coins)?.map(|counts| expand_counts(&counts)))
        }
    }
}

pub fn anonymous_rank(input: &AppInput, config: &AppConfig, coins: &mut impl Coins) -> Result<AppOutcome<RankingResult>> {
    if input.participants() < 2 {
        return Err(domain!("ranking needs at least two participants, got {}", input.participants()));
    }
    Ok(pooled(input, config, coins)?.map(RankingResult::from_sorted))
}

/// Sum of all contributed values.
pub fn anonymous_survey(input: &AppInput, config: &AppConfig, coins: &mut impl Coins) -> Result<AppOutcome<u64>> {
    if input.participants() == 0 {
        return Err(domain!("a survey needs at least one respondent"));
    }
    Ok(pooled(input, config, coins)?.map(|values| values.iter().map(|&v| v as u64).sum()))
}
