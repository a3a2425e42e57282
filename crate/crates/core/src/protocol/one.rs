//! Protocol I: every participant holds a multiset of values in `0..=ξ`.
//! One round per value `r`; participant `i` encodes how many of its values
//! equal `r`, and TP recovers the total multiplicity `ℛ^r` of each value
//! without learning who contributed it.

use serde::Serialize;

use super::rounds::CatRounds;
use super::transcript::{ChannelStage, Outcome, ProtocolKind, RunSettings, Transcript, SCHEMA_VERSION};
use super::{resolve_engine, Announcement, EngineKind, SymmetricFunction};
use crate::channel::{ChannelConfig, EveModel};
use crate::error::{domain, Result};
use crate::qudit::{BellLabel, Dimension};
use crate::random::{seeded, Coins};

/// A participant's data summarized per value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValueCounts {
    /// Distinct values `y¹ > y² > …`, descending.
    pub distinct: Vec<usize>,
    /// `η^t`: multiplicity of `distinct[t]`.
    pub multiplicities: Vec<usize>,
    /// `w^r` for `r = 0..=ξ`: multiplicity of `r` (zero when absent).
    pub w: Vec<usize>,
}

pub fn derive_value_counts(data: &[usize], xi: usize) -> Result<ValueCounts> {
    let mut w = vec![0; xi + 1];
    for &x in data {
        if x > xi {
            return Err(domain!("datum {x} exceeds the maximum value ξ = {xi}"));
        }
        w[x] += 1;
    }
    let (distinct, multiplicities) = (0..=xi).rev().filter(|&r| w[r] > 0).map(|r| (r, w[r])).unzip();
    Ok(ValueCounts { distinct, multiplicities, w })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolOneConfig {
    pub n: usize,
    /// Largest admissible data value ξ.
    pub xi: usize,
    pub d: Dimension,
    /// Require `d > Σ l_i` so that recovered counts cannot wrap modulo d.
    pub strict_d: bool,
    pub channel: ChannelConfig,
    pub announcement: Announcement,
    /// `None` picks the label engine unless an eavesdropper is active.
    pub engine: Option<EngineKind>,
}

impl ProtocolOneConfig {
    pub fn new(n: usize, xi: usize, d: Dimension) -> Self {
        Self {
            n,
            xi,
            d,
            strict_d: false,
            channel: ChannelConfig::default(),
            announcement: Announcement::default(),
            engine: None,
        }
    }

    pub fn validate(&self, secrets: &[Vec<usize>]) -> Result<()> {
        if self.n == 0 {
            return Err(domain!("protocol one needs at least one participant"));
        }
        if secrets.len() != self.n {
            return Err(domain!("{} data sets given for n = {} participants", secrets.len(), self.n));
        }
        let d = self.d.get();
        let longest = secrets.iter().map(Vec::len).max().unwrap_or(0);
        if d <= longest {
            return Err(domain!("d = {d} must exceed the longest data set (l = {longest})"));
        }
        let total: usize = secrets.iter().map(Vec::len).sum();
        if self.strict_d && d <= total {
            return Err(domain!("strict mode needs d > Σ l_i = {total}, got d = {d}"));
        }
        for (i, data) in secrets.iter().enumerate() {
            if let Some(&x) = data.iter().find(|&&x| x > self.xi) {
                return Err(domain!("participant {} holds {x}, above ξ = {}", i + 1, self.xi));
            }
        }
        Ok(())
    }

    fn settings(&self, eve: &EveModel, engine: EngineKind) -> RunSettings {
        RunSettings {
            n: self.n,
            d: self.d.get(),
            xi: Some(self.xi),
            strict_d: self.strict_d,
            tau: None,
            decoys: self.channel.decoys,
            threshold: self.channel.threshold,
            announcement: self.announcement,
            eve: *eve,
            engine,
        }
    }
}

/// Expand `ℛ^0..ℛ^ξ` into the multiset `{r repeated ℛ^r times}`.
pub fn expand_counts(counts: &[usize]) -> Vec<usize> {
    counts
        .iter()
        .enumerate()
        .flat_map(|(r, &c)| std::iter::repeat(r).take(c))
        .collect()
}

/// Run protocol I end to end.
///
/// Aborts are reported in the transcript's outcome. Randomness is drawn in a
/// fixed order: TP's cat labels (rounds outer, marks inner), the cat
/// distribution channels (participants in order), the participants' `v`
/// marks (rounds outer, participants inner), the swaps (same order), the
/// return channels, and TP's final measurements.
pub fn run_protocol_one(
    config: &ProtocolOneConfig,
    secrets: &[Vec<usize>],
    f: &SymmetricFunction,
    eve: &EveModel,
    coins: &mut impl Coins,
) -> Result<Transcript> {
    config.validate(secrets)?;
    let engine = resolve_engine(config.engine, eve)?;
    let d = config.d;
    let counts = secrets
        .iter()
        .map(|data| derive_value_counts(data, config.xi))
        .collect::<Result<Vec<_>>>()?;

    let mut channels = Vec::new();
    let mut rounds = CatRounds::prepare(d, config.n, 0..=config.xi, engine, coins)?;
    let mut transcript = Transcript {
        schema_version: SCHEMA_VERSION,
        protocol: ProtocolKind::One,
        settings: config.settings(eve, engine),
        seed: None,
        channels: Vec::new(),
        singlet: None,
        slots: None,
        rounds: Vec::new(),
        outcome: Outcome::Aborted { reason: String::new(), channel: None },
    };

    let abort = |transcript: &mut Transcript, rounds: CatRounds, channels, record, reason: &str| {
        transcript.channels = channels;
        transcript.rounds = rounds.into_records();
        transcript.outcome = Outcome::Aborted { reason: reason.to_owned(), channel: record };
    };

    if let Some(record) = rounds.transfer(ChannelStage::CatDistribution, &config.channel, eve, coins, &mut channels)? {
        abort(&mut transcript, rounds, channels, Some(record), "eavesdropper detected on cat distribution");
        return Ok(transcript);
    }

    let encoded: Vec<Vec<BellLabel>> = (0..=config.xi)
        .map(|r| {
            counts
                .iter()
                .map(|c| BellLabel::new(coins.uniform(d.get()), c.w[r]))
                .collect()
        })
        .collect();
    rounds.swap_all(encoded, coins)?;

    if let Some(record) = rounds.transfer(ChannelStage::BellReturn, &config.channel, eve, coins, &mut channels)? {
        abort(&mut transcript, rounds, channels, Some(record), "eavesdropper detected on Bell-half return");
        return Ok(transcript);
    }

    let recovered = rounds.finish(config.announcement, coins)?;
    let value = f.evaluate(&expand_counts(&recovered));
    transcript.channels = channels;
    transcript.rounds = rounds.into_records();
    transcript.outcome = Outcome::Completed { recovered, function: f.name().to_owned(), value };
    Ok(transcript)
}

/// [`run_protocol_one`] with a fresh generator; records the seed.
pub fn run_protocol_one_seeded(
    config: &ProtocolOneConfig,
    secrets: &[Vec<usize>],
    f: &SymmetricFunction,
    eve: &EveModel,
    seed: u64,
) -> Result<Transcript> {
    let mut transcript = run_protocol_one(config, secrets, f, eve, &mut seeded(seed))?;
    transcript.seed = Some(seed);
    Ok(transcript)
}
