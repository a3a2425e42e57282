//! Qudit transmission with decoy photons and intercept-resend eavesdroppers.
//!
//! A sender hides single-qudit decoys, each prepared in a random element of
//! the computational or Fourier basis, at random positions among the payload.
//! The receiver hands the decoys back to the sender's bookkeeping, which
//! measures each in its preparation basis and counts mismatches.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};
use crate::qudit::{collapse_in_basis, fourier_basis_measure, measure_computational, prepare_in_basis, BasisKind, Dimension, StateVector};
use crate::random::Coins;

/// Sender-side record of one inserted decoy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoyPhoton {
    pub basis: BasisKind,
    pub value: usize,
    /// Index in the augmented sequence.
    pub position: usize,
}

/// Eavesdropper strategy on a quantum channel. Eve cannot tell decoys from
/// payload, so every qudit on the wire is attacked.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "basis")]
pub enum EveModel {
    #[default]
    None,
    /// Measure each qudit in a uniformly random basis and resend the outcome state.
    InterceptResend,
    /// Measure each qudit in a fixed basis and resend the outcome state.
    FixedBasisInterceptResend(BasisKind),
}

impl EveModel {
    pub fn is_active(&self) -> bool {
        !matches!(self, EveModel::None)
    }

    fn pick_basis(&self, coins: &mut impl Coins) -> Option<BasisKind> {
        match self {
            EveModel::None => None,
            EveModel::InterceptResend => Some(BasisKind::ALL[coins.uniform(2)]),
            EveModel::FixedBasisInterceptResend(b) => Some(*b),
        }
    }
}

impl FromStr for EveModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(EveModel::None),
            "intercept" | "intercept-resend" => Ok(EveModel::InterceptResend),
            "intercept-computational" => Ok(EveModel::FixedBasisInterceptResend(BasisKind::Computational)),
            "intercept-fourier" => Ok(EveModel::FixedBasisInterceptResend(BasisKind::Fourier)),
            other => Err(domain!(
                "unknown eavesdropper model `{other}` (expected none, intercept, intercept-computational, intercept-fourier)"
            )),
        }
    }
}

impl fmt::Display for EveModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EveModel::None => "none",
            EveModel::InterceptResend => "intercept",
            EveModel::FixedBasisInterceptResend(BasisKind::Computational) => "intercept-computational",
            EveModel::FixedBasisInterceptResend(BasisKind::Fourier) => "intercept-fourier",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TransmissionReport {
    pub decoys_checked: usize,
    pub mismatches: usize,
    pub aborted: bool,
}

/// One element on the wire: a decoy qudit, or a payload item owned by the caller.
#[derive(Debug, Clone, PartialEq)]
pub enum Carrier<T> {
    Decoy(StateVector),
    Payload(T),
}

/// Decoy settings for one channel session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelConfig {
    /// Decoys per session; `None` means one decoy per payload qudit.
    pub decoys: Option<usize>,
    /// Largest tolerated mismatch count; anything above aborts.
    pub threshold: usize,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self { decoys: None, threshold: 0 }
    }
}

impl ChannelConfig {
    pub fn decoys_for(&self, payload_len: usize) -> usize {
        self.decoys.unwrap_or(payload_len)
    }
}

/// Uniformly random `count`-subset of `0..len`, sorted.
fn random_positions(len: usize, count: usize, coins: &mut impl Coins) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..len).collect();
    for i in 0..count {
        let j = i + coins.uniform(len - i);
        pool.swap(i, j);
    }
    let mut chosen = pool[..count].to_vec();
    chosen.sort_unstable();
    chosen
}

/// Hide `n_decoys` random decoy qudits among `payload`.
pub fn insert_decoys<T>(
    payload: Vec<T>,
    n_decoys: usize,
    d: Dimension,
    coins: &mut impl Coins,
) -> Result<(Vec<Carrier<T>>, Vec<DecoyPhoton>)> {
    let total = payload.len() + n_decoys;
    let positions = random_positions(total, n_decoys, coins);
    let mut records = Vec::with_capacity(n_decoys);
    let mut payload = payload.into_iter();
    let mut sequence = Vec::with_capacity(total);
    let mut next_decoy = positions.iter().peekable();
    for position in 0..total {
        if next_decoy.peek() == Some(&&position) {
            next_decoy.next();
            let basis = BasisKind::ALL[coins.uniform(2)];
            let value = coins.uniform(d.get());
            sequence.push(Carrier::Decoy(prepare_in_basis(d, basis, value)?));
            records.push(DecoyPhoton { basis, value, position });
        } else {
            let item = payload
                .next()
                .ok_or_else(|| Error::Internal("payload exhausted while interleaving decoys".into()))?;
            sequence.push(Carrier::Payload(item));
        }
    }
    Ok((sequence, records))
}

/// Send a sequence through a channel watched by `eve`.
///
/// Decoys are attacked here; payload items are handed to `attack_payload`
/// together with Eve's basis, since only the caller knows how a payload
/// qudit is entangled with the rest of its register.
pub fn transmit<T, C: Coins>(
    mut sequence: Vec<Carrier<T>>,
    eve: &EveModel,
    coins: &mut C,
    mut attack_payload: impl FnMut(&mut T, BasisKind, &mut C) -> Result<()>,
) -> Result<Vec<Carrier<T>>> {
    if !eve.is_active() {
        return Ok(sequence);
    }
    for item in &mut sequence {
        let Some(basis) = eve.pick_basis(coins) else { continue };
        match item {
            Carrier::Decoy(state) => {
                let (_, collapsed) = collapse_in_basis(state, 0, basis, coins)?;
                *state = collapsed;
            }
            Carrier::Payload(payload) => attack_payload(payload, basis, coins)?,
        }
    }
    Ok(sequence)
}

/// Measure-and-resend on a payload that is itself a standalone register;
/// Eve attacks qudit 0.
pub fn attack_standalone<C: Coins>(state: &mut StateVector, basis: BasisKind, coins: &mut C) -> Result<()> {
    let (_, collapsed) = collapse_in_basis(state, 0, basis, coins)?;
    *state = collapsed;
    Ok(())
}

/// Verify the decoys of a received sequence and strip them out.
///
/// Returns the report and the payload in its original order.
pub fn check_decoys<T>(
    received: Vec<Carrier<T>>,
    records: &[DecoyPhoton],
    threshold: usize,
    coins: &mut impl Coins,
) -> Result<(TransmissionReport, Vec<T>)> {
    let decoy_count = received.iter().filter(|c| matches!(c, Carrier::Decoy(_))).count();
    if decoy_count != records.len() {
        return Err(Error::Protocol(format!(
            "{} decoy records for a sequence carrying {decoy_count} decoys",
            records.len()
        )));
    }
    let mut records_iter = records.iter().peekable();
    let mut mismatches = 0;
    let mut payload = Vec::with_capacity(received.len() - decoy_count);
    for (position, item) in received.into_iter().enumerate() {
        match item {
            Carrier::Decoy(state) => {
                let record = records_iter
                    .next()
                    .filter(|r| r.position == position)
                    .ok_or_else(|| Error::Protocol(format!("unrecorded decoy at position {position}")))?;
                let outcome = match record.basis {
                    BasisKind::Computational => measure_computational(&state, &[0], coins)?,
                    BasisKind::Fourier => fourier_basis_measure(&state, 0, coins)?,
                };
                if outcome.values[0] != record.value {
                    mismatches += 1;
                }
            }
            Carrier::Payload(p) => {
                if records_iter.peek().is_some_and(|r| r.position == position) {
                    return Err(Error::Protocol(format!("decoy record points at payload position {position}")));
                }
                payload.push(p);
            }
        }
    }
    let report = TransmissionReport {
        decoys_checked: records.len(),
        mismatches,
        aborted: mismatches > threshold,
    };
    Ok((report, payload))
}

/// Insert decoys, transmit, and check: one complete channel use.
pub fn run_session<T, C: Coins>(
    payload: Vec<T>,
    d: Dimension,
    config: &ChannelConfig,
    eve: &EveModel,
    coins: &mut C,
    attack_payload: impl FnMut(&mut T, BasisKind, &mut C) -> Result<()>,
) -> Result<(TransmissionReport, Vec<T>)> {
    let n_decoys = config.decoys_for(payload.len());
    if n_decoys == 0 && !eve.is_active() {
        let report = TransmissionReport { decoys_checked: 0, mismatches: 0, aborted: false };
        return Ok((report, payload));
    }
    let (sequence, records) = insert_decoys(payload, n_decoys, d, coins)?;
    let received = transmit(sequence, eve, coins, attack_payload)?;
    check_decoys(received, &records, config.threshold, coins)
}

/// Per-decoy probability that intercept-resend with a uniformly random basis
/// is caught: wrong basis (1/2) times wrong value (1 − 1/d).
pub fn intercept_resend_detection_probability(d: Dimension) -> f64 {
    0.5 * (1.0 - 1.0 / d.get() as f64)
}
