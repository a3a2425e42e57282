//! Protocol II: every participant holds a single value. A shared singlet
//! state assigns each participant a private round ("slot"); participant `i`
//! encodes its value only in its own round, so TP recovers the list of
//! values in slot order without learning whose value sits in which slot.

use serde::Serialize;

use super::rounds::CatRounds;
use super::transcript::{ChannelRecord, ChannelStage, Outcome, ProtocolKind, RunSettings, SingletRecord, Transcript, SCHEMA_VERSION};
use super::{resolve_engine, Announcement, EngineKind, SymmetricFunction};
use crate::channel::{run_session, ChannelConfig, EveModel};
use crate::error::{domain, Error, Result};
use crate::qudit::{collapse_in_basis, measure_computational, singlet_state, BellLabel, Dimension, StateVector, SINGLET_CAP};
use crate::random::{seeded, Coins};

/// Who prepares the singlet pool.
#[derive(Debug, Clone, Default, PartialEq)]
pub enum SingletSource {
    #[default]
    Honest,
    /// Pool copy `copy` is replaced by `state` (an adversarial source).
    Forged { copy: usize, state: StateVector },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolTwoConfig {
    pub n: usize,
    pub d: Dimension,
    /// Test singlets per participant; the pool holds `n·τ + 1` copies.
    pub tau: usize,
    pub channel: ChannelConfig,
    pub announcement: Announcement,
    pub engine: Option<EngineKind>,
    pub singlet_source: SingletSource,
}

impl ProtocolTwoConfig {
    pub const DEFAULT_TAU: usize = 2;

    pub fn new(n: usize, d: Dimension) -> Self {
        Self {
            n,
            d,
            tau: Self::DEFAULT_TAU,
            channel: ChannelConfig::default(),
            announcement: Announcement::default(),
            engine: None,
            singlet_source: SingletSource::Honest,
        }
    }

    pub fn validate(&self, values: &[usize]) -> Result<()> {
        if self.n == 0 {
            return Err(domain!("protocol two needs at least one participant"));
        }
        if self.n > SINGLET_CAP {
            return Err(Error::Capability(format!(
                "{} participants need a {}-particle singlet; the cap is {SINGLET_CAP}",
                self.n, self.n
            )));
        }
        if values.len() != self.n {
            return Err(domain!("{} values given for n = {} participants", values.len(), self.n));
        }
        if let Some(&x) = values.iter().find(|&&x| x >= self.d.get()) {
            return Err(domain!("value {x} does not fit d = {}; choose d > {x}", self.d));
        }
        Ok(())
    }

    fn settings(&self, eve: &EveModel, engine: EngineKind) -> RunSettings {
        RunSettings {
            n: self.n,
            d: self.d.get(),
            xi: None,
            strict_d: false,
            tau: Some(self.tau),
            decoys: self.channel.decoys,
            threshold: self.channel.threshold,
            announcement: self.announcement,
            eve: *eve,
            engine,
        }
    }
}

/// Participants' computational outcomes on the surviving singlet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlotAssignment {
    /// Outcome of participant `i` (0-based), a permutation of `0..n`.
    pub outcomes: Vec<usize>,
}

impl SlotAssignment {
    /// 1-based slot of participant `i` (0-based index).
    pub fn slot(&self, participant: usize) -> usize {
        self.outcomes[participant] + 1
    }

    pub fn slots(&self) -> Vec<usize> {
        self.outcomes.iter().map(|o| o + 1).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SingletOutcome {
    Assigned(SlotAssignment),
    ChannelAborted(ChannelRecord),
    /// A tested copy produced repeated values.
    VerificationFailed { copy: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingletStage {
    pub outcome: SingletOutcome,
    pub record: SingletRecord,
    pub channels: Vec<ChannelRecord>,
}

/// Measure every tested copy in the computational basis; returns the first
/// copy whose outcomes are not pairwise distinct.
pub fn verify_singlet_copies(copies: &[StateVector], tested: &[usize], coins: &mut impl Coins) -> Result<Option<usize>> {
    for &copy in tested {
        let state = copies
            .get(copy)
            .ok_or_else(|| domain!("tested copy {copy} is not in a pool of {}", copies.len()))?;
        let all: Vec<usize> = (0..state.num_subsystems()).collect();
        let mut values = measure_computational(state, &all, coins)?.values;
        values.sort_unstable();
        if values.windows(2).any(|w| w[0] == w[1]) {
            return Ok(Some(copy));
        }
    }
    Ok(None)
}

/// Distribute `n·τ + 1` singlets, test all but one chosen at random, and
/// measure the survivor to assign slots.
pub fn singlet_round(
    n: usize,
    tau: usize,
    eve: &EveModel,
    channel: &ChannelConfig,
    source: &SingletSource,
    coins: &mut impl Coins,
) -> Result<SingletStage> {
    if n == 1 {
        // a lone participant owns the only slot
        return Ok(SingletStage {
            outcome: SingletOutcome::Assigned(SlotAssignment { outcomes: vec![0] }),
            record: SingletRecord { pool_size: 0, tested: Vec::new(), survivor: 0, failed_copy: None, passed: true },
            channels: Vec::new(),
        });
    }
    let pool_size = n * tau + 1;
    let honest = singlet_state(n)?;
    let mut copies = vec![honest; pool_size];
    if let SingletSource::Forged { copy, state } = source {
        if *copy >= pool_size {
            return Err(domain!("forged copy {copy} is outside a pool of {pool_size}"));
        }
        if state.dims() != copies[*copy].dims() {
            return Err(domain!("forged state has dims {:?}, expected {:?}", state.dims(), copies[*copy].dims()));
        }
        copies[*copy] = state.clone();
    }

    let d = Dimension::new(n)?;
    let mut channels = Vec::new();
    for participant in 1..=n {
        let payload: Vec<usize> = (0..pool_size).collect();
        let (report, _) = run_session(payload, d, channel, eve, coins, |copy, basis, c| {
            let (_, collapsed) = collapse_in_basis(&copies[*copy], participant - 1, basis, c)?;
            copies[*copy] = collapsed;
            Ok(())
        })?;
        let record = ChannelRecord { stage: ChannelStage::SingletDistribution, participant, report };
        channels.push(record.clone());
        if report.aborted {
            return Ok(SingletStage {
                outcome: SingletOutcome::ChannelAborted(record),
                record: SingletRecord { pool_size, tested: Vec::new(), survivor: 0, failed_copy: None, passed: false },
                channels,
            });
        }
    }

    let survivor = coins.uniform(pool_size);
    let tested: Vec<usize> = (0..pool_size).filter(|&c| c != survivor).collect();
    let failed_copy = verify_singlet_copies(&copies, &tested, coins)?;
    let record = SingletRecord { pool_size, tested, survivor, failed_copy, passed: failed_copy.is_none() };
    if let Some(copy) = failed_copy {
        return Ok(SingletStage { outcome: SingletOutcome::VerificationFailed { copy }, record, channels });
    }

    let all: Vec<usize> = (0..n).collect();
    let outcomes = measure_computational(&copies[survivor], &all, coins)?.values;
    Ok(SingletStage { outcome: SingletOutcome::Assigned(SlotAssignment { outcomes }), record, channels })
}

/// Participant encoding: `w = x` in round `slot`, zero elsewhere, with a
/// random phase mark `v` in every round. Returns one label per round.
pub fn encode_slot(slot: usize, x: usize, n: usize, d: Dimension, coins: &mut impl Coins) -> Result<Vec<BellLabel>> {
    if slot == 0 || slot > n {
        return Err(domain!("slot {slot} outside 1..={n}"));
    }
    d.check_value("encoded value", x)?;
    Ok((1..=n)
        .map(|r| BellLabel::new(coins.uniform(d.get()), if r == slot { x } else { 0 }))
        .collect())
}

/// Run protocol II end to end. The recovered list is in slot order.
pub fn run_protocol_two(
    config: &ProtocolTwoConfig,
    values: &[usize],
    f: &SymmetricFunction,
    eve: &EveModel,
    coins: &mut impl Coins,
) -> Result<Transcript> {
    config.validate(values)?;
    let engine = resolve_engine(config.engine, eve)?;
    let (n, d) = (config.n, config.d);
    let mut transcript = Transcript {
        schema_version: SCHEMA_VERSION,
        protocol: ProtocolKind::Two,
        settings: config.settings(eve, engine),
        seed: None,
        channels: Vec::new(),
        singlet: None,
        slots: None,
        rounds: Vec::new(),
        outcome: Outcome::Aborted { reason: String::new(), channel: None },
    };

    let stage = singlet_round(n, config.tau, eve, &config.channel, &config.singlet_source, coins)?;
    transcript.channels = stage.channels;
    transcript.singlet = Some(stage.record);
    let assignment = match stage.outcome {
        SingletOutcome::Assigned(a) => a,
        SingletOutcome::ChannelAborted(record) => {
            transcript.outcome = Outcome::Aborted {
                reason: "eavesdropper detected on singlet distribution".into(),
                channel: Some(record),
            };
            return Ok(transcript);
        }
        SingletOutcome::VerificationFailed { copy } => {
            transcript.outcome = Outcome::Aborted {
                reason: format!("singlet copy {copy} failed the distinctness test"),
                channel: None,
            };
            return Ok(transcript);
        }
    };
    transcript.slots = Some(assignment.slots());

    let mut rounds = CatRounds::prepare(d, n, 1..=n, engine, coins)?;
    let mut channels = std::mem::take(&mut transcript.channels);
    let aborted = rounds.transfer(ChannelStage::CatDistribution, &config.channel, eve, coins, &mut channels)?;
    let aborted = match aborted {
        Some(record) => Some((record, "eavesdropper detected on cat distribution")),
        None => {
            // per participant: one label per round
            let by_participant = values
                .iter()
                .enumerate()
                .map(|(i, &x)| encode_slot(assignment.slot(i), x, n, d, coins))
                .collect::<Result<Vec<_>>>()?;
            let encoded = (0..n).map(|r| by_participant.iter().map(|row| row[r]).collect()).collect();
            rounds.swap_all(encoded, coins)?;
            rounds
                .transfer(ChannelStage::BellReturn, &config.channel, eve, coins, &mut channels)?
                .map(|record| (record, "eavesdropper detected on Bell-half return"))
        }
    };
    transcript.channels = channels;
    if let Some((record, reason)) = aborted {
        transcript.rounds = rounds.into_records();
        transcript.outcome = Outcome::Aborted { reason: reason.into(), channel: Some(record) };
        return Ok(transcript);
    }

    let recovered = rounds.finish(config.announcement, coins)?;
    let value = f.evaluate(&recovered);
    transcript.rounds = rounds.into_records();
    transcript.outcome = Outcome::Completed { recovered, function: f.name().to_owned(), value };
    Ok(transcript)
}

/// [`run_protocol_two`] with a fresh generator; records the seed.
pub fn run_protocol_two_seeded(
    config: &ProtocolTwoConfig,
    values: &[usize],
    f: &SymmetricFunction,
    eve: &EveModel,
    seed: u64,
) -> Result<Transcript> {
    let mut transcript = run_protocol_two(config, values, f, eve, &mut seeded(seed))?;
    transcript.seed = Some(seed);
    Ok(transcript)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::FunctionValue;
    use crate::random::enumerate_paths;

    fn dim(d: usize) -> Dimension {
        Dimension::new(d).unwrap()
    }

    fn sorted(mut v: Vec<usize>) -> Vec<usize> {
        v.sort_unstable();
        v
    }

    #[test]
    fn encode_slot_examples() {
        let mut rng = seeded(3);
        let labels = encode_slot(2, 3, 3, dim(4), &mut rng).unwrap();
        assert_eq!(labels.iter().map(|b| b.shift).collect::<Vec<_>>(), vec![0, 3, 0]);
        assert!(encode_slot(2, 0, 3, dim(4), &mut rng).unwrap().iter().all(|b| b.shift == 0));
        assert_eq!(encode_slot(1, 5, 1, dim(6), &mut rng).unwrap()[0].shift, 5);
        assert!(encode_slot(0, 1, 3, dim(4), &mut rng).is_err());
        assert!(encode_slot(4, 1, 3, dim(4), &mut rng).is_err());
        assert!(encode_slot(1, 4, 3, dim(4), &mut rng).is_err());
    }

    #[test]
    fn two_party_slots_are_fair_coin() {
        let paths = enumerate_paths(|c| {
            let stage = singlet_round(2, 1, &EveModel::None, &ChannelConfig { decoys: Some(0), threshold: 0 }, &SingletSource::Honest, c).unwrap();
            assert!(stage.record.passed);
            match stage.outcome {
                SingletOutcome::Assigned(a) => a.outcomes,
                other => panic!("unexpected {other:?}"),
            }
        });
        let mut totals = std::collections::BTreeMap::new();
        for (outcome, p) in paths {
            *totals.entry(outcome).or_insert(0.0) += p;
        }
        assert_eq!(totals.len(), 2);
        for (outcome, p) in totals {
            assert!(outcome == vec![0, 1] || outcome == vec![1, 0]);
            assert!((p - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn planted_product_state_is_always_rejected() {
        let n = 3;
        let fake = StateVector::basis(vec![n; n], &[0; 3]).unwrap();
        let copies = vec![singlet_state(n).unwrap(), fake, singlet_state(n).unwrap()];
        let paths = enumerate_paths(|c| verify_singlet_copies(&copies, &[0, 1, 2], c).unwrap());
        assert!(paths.iter().all(|(failed, _)| *failed == Some(1)));
    }

    #[test]
    fn example_runs() {
        let config = ProtocolTwoConfig::new(3, dim(6));
        let t = run_protocol_two_seeded(&config, &[2, 0, 5], &SymmetricFunction::Sum, &EveModel::None, 4).unwrap();
        assert_eq!(sorted(t.recovered().unwrap().to_vec()), vec![0, 2, 5]);
        assert_eq!(t.function_value(), Some(&FunctionValue::Integer(7)));

        let config = ProtocolTwoConfig::new(2, dim(2));
        let t = run_protocol_two_seeded(&config, &[0, 0], &SymmetricFunction::Sum, &EveModel::None, 4).unwrap();
        assert_eq!(t.recovered().unwrap(), &[0, 0]);

        let config = ProtocolTwoConfig::new(2, dim(4));
        for seed in 0..8 {
            let t = run_protocol_two_seeded(&config, &[1, 3], &SymmetricFunction::SortedList, &EveModel::None, seed).unwrap();
            assert_eq!(t.function_value(), Some(&FunctionValue::List(vec![1, 3])));
        }
    }

    #[test]
    fn single_participant_degenerates() {
        let config = ProtocolTwoConfig::new(1, dim(8));
        let t = run_protocol_two_seeded(&config, &[7], &SymmetricFunction::Sum, &EveModel::None, 0).unwrap();
        assert_eq!(t.recovered().unwrap(), &[7]);
        assert_eq!(t.slots, Some(vec![1]));
    }

    #[test]
    fn recovered_list_follows_slots() {
        let config = ProtocolTwoConfig::new(4, dim(8));
        let values = [7, 1, 4, 4];
        let t = run_protocol_two_seeded(&config, &values, &SymmetricFunction::Sum, &EveModel::None, 21).unwrap();
        let slots = t.slots.clone().unwrap();
        let recovered = t.recovered().unwrap();
        for (i, &x) in values.iter().enumerate() {
            assert_eq!(recovered[slots[i] - 1], x);
        }
    }

    #[test]
    fn value_must_fit_dimension() {
        let config = ProtocolTwoConfig::new(2, dim(4));
        assert!(config.validate(&[1, 4]).is_err());
        assert!(config.validate(&[1]).is_err());
        assert!(ProtocolTwoConfig::new(7, dim(8)).validate(&[0; 7]).is_err());
    }

    #[test]
    fn forged_survivor_goes_unnoticed_but_tested_forgery_aborts() {
        let n = 2;
        let fake = StateVector::basis(vec![n; n], &[1, 1]).unwrap();
        let source = SingletSource::Forged { copy: 0, state: fake };
        let channel = ChannelConfig { decoys: Some(0), threshold: 0 };
        let mut rejected = 0.0;
        for (failed, p) in enumerate_paths(|c| {
            let stage = singlet_round(n, 1, &EveModel::None, &channel, &source, c).unwrap();
            matches!(stage.outcome, SingletOutcome::VerificationFailed { copy: 0 })
        }) {
            if failed {
                rejected += p;
            }
        }
        // copy 0 is tested unless it is the survivor (probability 1/3)
        assert!((rejected - 2.0 / 3.0).abs() < 1e-12);
    }
}
