//! Cat-state rounds shared by both protocols: distribution, swapping,
//! return, announcement and TP's recovery.

use super::transcript::{ChannelRecord, ChannelStage, RoundRecord};
use super::{tp_recover_count, Announcement, EngineKind};
use crate::channel::{run_session, ChannelConfig, EveModel};
use crate::error::{Error, Result};
use crate::qudit::{bell_state, cat_state, collapse_in_basis, measure_cat_basis, measure_generalized_bell, BasisKind, BellLabel, CatLabel, Dimension, StateVector};
use crate::qudit::DENSE_CAP;
use crate::random::Coins;
use crate::swap::swap_sample;

enum RoundState {
    Label(CatLabel),
    Dense(StateVector),
}

impl RoundState {
    fn attack(&mut self, qudit: usize, basis: BasisKind, coins: &mut impl Coins) -> Result<()> {
        match self {
            RoundState::Label(_) => Err(Error::Internal("payload interception reached the label engine".into())),
            RoundState::Dense(state) => {
                let (_, collapsed) = collapse_in_basis(state, qudit, basis, coins)?;
                *state = collapsed;
                Ok(())
            }
        }
    }

    /// Swap Bell pair `bell` into cat position `position`; returns `(λ, γ)`.
    fn swap(&mut self, d: Dimension, position: usize, bell: BellLabel, coins: &mut impl Coins) -> Result<BellLabel> {
        match self {
            RoundState::Label(cat) => {
                let outcome = swap_sample(d, cat, bell, position, coins)?;
                let measured = outcome.measured();
                *cat = outcome.new_cat;
                Ok(measured)
            }
            RoundState::Dense(state) => {
                let last = state.num_subsystems() - 1;
                let joint = state.tensor(&bell_state(d, bell)?)?;
                // Bell qudit 0 sits at last+1, Bell qudit 1 at last+2
                let (measured, post) = measure_generalized_bell(&joint, (last + 1, position), coins)?;
                // post holds the cat qudits without `position`, then the Bell half
                let order: Vec<usize> = (0..=last)
                    .map(|p| match p.cmp(&position) {
                        std::cmp::Ordering::Less => p,
                        std::cmp::Ordering::Equal => last,
                        std::cmp::Ordering::Greater => p - 1,
                    })
                    .collect();
                *state = post.permute(&order)?;
                Ok(measured)
            }
        }
    }

    fn measure(&self, coins: &mut impl Coins) -> Result<CatLabel> {
        match self {
            RoundState::Label(cat) => Ok(cat.clone()),
            RoundState::Dense(state) => {
                let all: Vec<usize> = (0..state.num_subsystems()).collect();
                Ok(measure_cat_basis(state, &all, coins)?.0)
            }
        }
    }
}

pub(crate) struct CatRounds {
    d: Dimension,
    n: usize,
    states: Vec<RoundState>,
    pub(crate) records: Vec<RoundRecord>,
}

impl CatRounds {
    /// TP prepares one random `(n+1)`-qudit cat state per round id.
    pub(crate) fn prepare(
        d: Dimension,
        n: usize,
        round_ids: impl IntoIterator<Item = usize>,
        engine: EngineKind,
        coins: &mut impl Coins,
    ) -> Result<Self> {
        if engine == EngineKind::Dense {
            let peak = (d.get() as f64).powi(n as i32 + 3);
            if peak > DENSE_CAP as f64 {
                return Err(Error::Capability(format!(
                    "dense rounds need {d}^{} amplitudes, above the cap of {DENSE_CAP}",
                    n + 3
                )));
            }
        }
        let mut states = Vec::new();
        let mut records = Vec::new();
        for round in round_ids {
            let marks = (0..=n).map(|_| coins.uniform(d.get())).collect();
            let prepared = CatLabel::new(marks)?;
            states.push(match engine {
                EngineKind::Label => RoundState::Label(prepared.clone()),
                EngineKind::Dense => RoundState::Dense(cat_state(d, &prepared)?),
            });
            records.push(RoundRecord {
                round,
                prepared,
                encoded: None,
                bell_results: None,
                announcement: None,
                measured: None,
                recovered: None,
            });
        }
        Ok(Self { d, n, states, records })
    }

    /// Move cat position `i` of every round across participant `i`'s channel,
    /// for each participant in turn. Stops at the first aborted session and
    /// returns it.
    pub(crate) fn transfer<C: Coins>(
        &mut self,
        stage: ChannelStage,
        channel: &ChannelConfig,
        eve: &EveModel,
        coins: &mut C,
        log: &mut Vec<ChannelRecord>,
    ) -> Result<Option<ChannelRecord>> {
        for participant in 1..=self.n {
            let payload: Vec<usize> = (0..self.states.len()).collect();
            let states = &mut self.states;
            let (report, _) = run_session(payload, self.d, channel, eve, coins, |round, basis, c| {
                states[*round].attack(participant, basis, c)
            })?;
            let record = ChannelRecord { stage, participant, report };
            log.push(record.clone());
            if report.aborted {
                return Ok(Some(record));
            }
        }
        Ok(None)
    }

    /// Every participant swaps its encoded Bell pair into every round.
    /// `encoded[round][i]` is participant `i+1`'s label. Rounds outer,
    /// participants inner.
    pub(crate) fn swap_all(&mut self, encoded: Vec<Vec<BellLabel>>, coins: &mut impl Coins) -> Result<()> {
        if encoded.len() != self.states.len() || encoded.iter().any(|row| row.len() != self.n) {
            return Err(Error::Internal("encoding table does not match the round layout".into()));
        }
        for ((state, record), row) in self.states.iter_mut().zip(&mut self.records).zip(encoded) {
            let mut results = Vec::with_capacity(self.n);
            for (i, &bell) in row.iter().enumerate() {
                results.push(state.swap(self.d, i + 1, bell, coins)?);
            }
            record.encoded = Some(row);
            record.bell_results = Some(results);
        }
        Ok(())
    }

    /// Announce `𝒜^r`, measure each cat state and recover `ℛ^r`.
    pub(crate) fn finish(&mut self, announcement: Announcement, coins: &mut impl Coins) -> Result<Vec<usize>> {
        let mut recovered = Vec::with_capacity(self.states.len());
        for (state, record) in self.states.iter().zip(&mut self.records) {
            let results = record
                .bell_results
                .as_ref()
                .ok_or_else(|| Error::Internal("round finished before swapping".into()))?;
            let a = announcement.announce(results.iter().map(|b| b.shift), self.d);
            let measured = state.measure(coins)?;
            let r = tp_recover_count(&measured, &record.prepared, Some(a), self.d)?;
            record.announcement = Some(a);
            record.measured = Some(measured);
            record.recovered = Some(r);
            recovered.push(r);
        }
        Ok(recovered)
    }

    pub(crate) fn into_records(self) -> Vec<RoundRecord> {
        self.records
    }
}
