//! Success-probability formulas, dimension selection, experiment drivers and
//! exact anonymity enumeration.

use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

use crate::channel::{run_session, ChannelConfig, EveModel, TransmissionReport};
use crate::error::{domain, Result};
use crate::protocol::one::{derive_value_counts, run_protocol_one, ProtocolOneConfig};
use crate::protocol::two::{run_protocol_two, ProtocolTwoConfig};
use crate::protocol::{ProtocolKind, SymmetricFunction, TpView, Transcript};
use crate::qudit::Dimension;
use crate::random::{for_each_path, trial_stream, PathCoins};

/// Table of `(u_i^r, w_i^r)` cells, indexed `[round][participant]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuccessProbInput {
    pub d: Dimension,
    pub cells: Vec<Vec<(usize, usize)>>,
}

impl SuccessProbInput {
    /// Prepared shift marks and encoded values from a completed transcript.
    pub fn from_transcript(transcript: &Transcript) -> Result<Self> {
        let d = Dimension::new(transcript.settings.d)?;
        let cells = transcript
            .rounds
            .iter()
            .map(|round| {
                let encoded = round
                    .encoded
                    .as_ref()
                    .ok_or_else(|| domain!("round {} has no encodings", round.round))?;
                Ok(round.prepared.marks()[1..]
                    .iter()
                    .zip(encoded)
                    .map(|(&u, bell)| (u, bell.shift))
                    .collect())
            })
            .collect::<Result<_>>()?;
        Ok(Self { d, cells })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuccessProbability {
    pub value: f64,
    /// The product left `[0, 1]`; reported, never clamped.
    pub out_of_range: bool,
}

fn product_formula(input: &SuccessProbInput, rounds: usize, n: usize) -> Result<SuccessProbability> {
    if input.cells.len() != rounds || input.cells.iter().any(|row| row.len() != n) {
        return Err(domain!("expected a {rounds} × {n} grid of (u, w) cells"));
    }
    let d = input.d.get();
    let denom = (d * d) as f64;
    let mut value = 1.0;
    for &(u, w) in input.cells.iter().flatten() {
        if u >= d || w >= d {
            return Err(domain!("cell (u = {u}, w = {w}) out of range for d = {d}"));
        }
        value *= ((d - u) * (u + w)) as f64 / denom;
    }
    Ok(SuccessProbability { value, out_of_range: !(0.0..=1.0).contains(&value) })
}

/// `∏_{r=0}^{ξ} ∏_{i=1}^{n} (d − u_i^r)(u_i^r + w_i^r) / d²`
pub fn success_prob_one(input: &SuccessProbInput, xi: usize, n: usize) -> Result<SuccessProbability> {
    product_formula(input, xi + 1, n)
}

/// `∏_{r=1}^{n} ∏_{i=1}^{n} (d − u_i^r)(u_i^r + w_i^r) / d²`
pub fn success_prob_two(input: &SuccessProbInput, n: usize) -> Result<SuccessProbability> {
    product_formula(input, n, n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MinimalDimension {
    pub d: Dimension,
    /// `max + 1` was below 2 and got raised.
    pub clamped: bool,
}

fn max_plus_one(values: &[usize]) -> Result<MinimalDimension> {
    let max = values.iter().copied().max().ok_or_else(|| domain!("need at least one value"))?;
    let raw = max + 1;
    Ok(MinimalDimension { d: Dimension::new(raw.max(2))?, clamped: raw < 2 })
}

/// Smallest admissible d for protocol one: `max{l_i} + 1`.
pub fn minimal_d_one(lengths: &[usize]) -> Result<MinimalDimension> {
    max_plus_one(lengths)
}

/// Smallest admissible d for protocol two: `max{x_i} + 1`.
pub fn minimal_d_two(values: &[usize]) -> Result<MinimalDimension> {
    max_plus_one(values)
}

/// Whether folding `⊕` over `values` equals `(Σ values) mod d`.
pub fn mod_sum_identity_check(values: &[u64], d: u64) -> bool {
    assert!(d > 0, "modulus must be positive");
    let folded = values.iter().fold(0u64, |acc, &x| (acc + x % d) % d);
    let summed: u128 = values.iter().map(|&x| x as u128).sum();
    folded as u128 == summed % d as u128
}

/// What an experiment repeats.
#[derive(Debug, Clone)]
pub enum ExperimentProtocol {
    One { config: ProtocolOneConfig, secrets: Vec<Vec<usize>> },
    Two { config: ProtocolTwoConfig, values: Vec<usize> },
    /// A single channel session carrying only decoys.
    DecoyDetection { d: Dimension, decoys: usize, threshold: usize },
}

impl ExperimentProtocol {
    fn name(&self) -> &'static str {
        match self {
            ExperimentProtocol::One { .. } => "one",
            ExperimentProtocol::Two { .. } => "two",
            ExperimentProtocol::DecoyDetection { .. } => "decoy_detection",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Statistic {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl Statistic {
    /// Mean and standard error of `hits` successes in `samples` Bernoulli trials.
    pub fn proportion(hits: usize, samples: usize) -> Self {
        if samples == 0 {
            return Self { mean: 0.0, std_error: 0.0, samples };
        }
        let p = hits as f64 / samples as f64;
        Self { mean: p, std_error: (p * (1.0 - p) / samples as f64).sqrt(), samples }
    }

    fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Some(Self { mean, std_error: (var / n).sqrt(), samples: values.len() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub protocol: &'static str,
    pub eve: EveModel,
    pub seed: u64,
    pub trials: usize,
    pub completed: usize,
    pub abort_rate: Statistic,
    /// Fraction of completed runs whose recovered data equals the truth exactly.
    pub correctness: Statistic,
    /// Total recovery error per completed run → number of runs.
    pub count_error_histogram: BTreeMap<usize, usize>,
    /// The product formula evaluated on each completed run's (u, w) grid.
    pub formula: Option<Statistic>,
    pub formula_out_of_range: usize,
    /// Per-decoy mismatch rate, pooled over all checked decoys.
    pub detection_rate: Option<Statistic>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("reports always serialize");
        text.push('\n');
        text
    }
}

struct TrialResult {
    aborted: bool,
    error: Option<usize>,
    formula: Option<crate::Result<SuccessProbability>>,
    decoys: Vec<TransmissionReport>,
}

fn protocol_trial(transcript: Transcript, truth_error: impl Fn(&[usize]) -> usize) -> TrialResult {
    let decoys = transcript.channels.iter().map(|c| c.report).collect();
    match transcript.recovered() {
        None => TrialResult { aborted: true, error: None, formula: None, decoys },
        Some(recovered) => {
            let formula = SuccessProbInput::from_transcript(&transcript).and_then(|input| match transcript.protocol {
                ProtocolKind::One => success_prob_one(&input, input.cells.len() - 1, transcript.settings.n),
                ProtocolKind::Two => success_prob_two(&input, transcript.settings.n),
            });
            TrialResult { aborted: false, error: Some(truth_error(recovered)), formula: Some(formula), decoys }
        }
    }
}

/// Repeat a protocol `trials` times with independent per-trial streams
/// derived from `seed`. Identical arguments give identical reports.
pub fn run_experiment(protocol: &ExperimentProtocol, eve: &EveModel, trials: usize, seed: u64) -> Result<ExperimentReport> {
    if trials == 0 {
        return Err(domain!("an experiment needs at least one trial"));
    }
    let f = SymmetricFunction::Sum;
    match protocol {
        ExperimentProtocol::One { config, secrets } => config.validate(secrets)?,
        ExperimentProtocol::Two { config, values } => config.validate(values)?,
        ExperimentProtocol::DecoyDetection { .. } => {}
    }

    let results: Vec<TrialResult> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| -> Result<TrialResult> {
            let mut rng = trial_stream(seed, trial);
            Ok(match protocol {
                ExperimentProtocol::One { config, secrets } => {
                    let mut truth = vec![0usize; config.xi + 1];
                    for data in secrets {
                        for (t, w) in truth.iter_mut().zip(derive_value_counts(data, config.xi)?.w) {
                            *t += w;
                        }
                    }
                    let transcript = run_protocol_one(config, secrets, &f, eve, &mut rng)?;
                    protocol_trial(transcript, |got| got.iter().zip(&truth).map(|(&g, &t)| g.abs_diff(t)).sum())
                }
                ExperimentProtocol::Two { config, values } => {
                    let mut truth = values.clone();
                    truth.sort_unstable();
                    let transcript = run_protocol_two(config, values, &f, eve, &mut rng)?;
                    protocol_trial(transcript, |got| {
                        let mut got = got.to_vec();
                        got.sort_unstable();
                        got.iter().zip(&truth).filter(|(g, t)| g != t).count()
                    })
                }
                ExperimentProtocol::DecoyDetection { d, decoys, threshold } => {
                    let channel = ChannelConfig { decoys: Some(*decoys), threshold: *threshold };
                    let (report, _) = run_session(Vec::<()>::new(), *d, &channel, eve, &mut rng, |_, _, _| Ok(()))?;
                    TrialResult { aborted: report.aborted, error: None, formula: None, decoys: vec![report] }
                }
            })
        })
        .collect::<Result<_>>()?;

    let aborted = results.iter().filter(|r| r.aborted).count();
    let errors: Vec<usize> = results.iter().filter_map(|r| r.error).collect();
    let mut histogram = BTreeMap::new();
    for &e in &errors {
        *histogram.entry(e).or_insert(0) += 1;
    }
    let formulas: Vec<SuccessProbability> = results
        .iter()
        .filter_map(|r| r.formula.clone())
        .collect::<Result<_>>()?;
    let (checked, mismatches) = results
        .iter()
        .flat_map(|r| &r.decoys)
        .fold((0, 0), |(c, m), rep| (c + rep.decoys_checked, m + rep.mismatches));

    Ok(ExperimentReport {
        schema_version: crate::protocol::SCHEMA_VERSION,
        protocol: protocol.name(),
        eve: *eve,
        seed,
        trials,
        completed: trials - aborted,
        abort_rate: Statistic::proportion(aborted, trials),
        correctness: Statistic::proportion(errors.iter().filter(|&&e| e == 0).count(), errors.len()),
        count_error_histogram: histogram,
        formula: Statistic::of(&formulas.iter().map(|p| p.value).collect::<Vec<_>>()),
        formula_out_of_range: formulas.iter().filter(|p| p.out_of_range).count(),
        detection_rate: (checked > 0).then(|| Statistic::proportion(mismatches, checked)),
    })
}

/// Exact distribution of what TP observes, by walking every random branch
/// of `run`.
pub fn tp_view_distribution(mut run: impl FnMut(&mut PathCoins) -> Result<Transcript>) -> Result<BTreeMap<TpView, f64>> {
    let mut error = None;
    let mut distribution = BTreeMap::new();
    for_each_path(
        |coins| run(coins).map(|t| t.tp_view()),
        |view, p| match view {
            Ok(view) => *distribution.entry(view).or_insert(0.0) += p,
            Err(e) => {
                error.get_or_insert(e);
            }
        },
    );
    match error {
        Some(e) => Err(e),
        None => Ok(distribution),
    }
}

/// Same support, and every probability within `tol`.
pub fn distributions_match<K: Ord>(a: &BTreeMap<K, f64>, b: &BTreeMap<K, f64>, tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|((ka, pa), (kb, pb))| ka == kb && (pa - pb).abs() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(d: usize) -> Dimension {
        Dimension::new(d).unwrap()
    }

    fn grid(d: usize, cells: Vec<Vec<(usize, usize)>>) -> SuccessProbInput {
        SuccessProbInput { d: dim(d), cells }
    }

    #[test]
    fn formula_examples() {
        assert_eq!(success_prob_one(&grid(2, vec![vec![(1, 0)]]), 0, 1).unwrap().value, 0.25);
        let p = success_prob_one(&grid(3, vec![vec![(1, 1), (2, 0)]]), 0, 2).unwrap();
        assert!((p.value - 8.0 / 81.0).abs() <= 1e-12);
        assert_eq!(success_prob_two(&grid(2, vec![vec![(1, 1)]]), 1).unwrap().value, 0.5);
        let p = success_prob_two(&grid(2, vec![vec![(1, 0); 2]; 2]), 2).unwrap();
        assert!((p.value - 0.25f64.powi(4)).abs() <= 1e-12);
        assert!(!p.out_of_range);
    }

    #[test]
    fn zero_cell_absorbs() {
        assert_eq!(success_prob_one(&grid(3, vec![vec![(2, 1), (0, 0)]]), 0, 2).unwrap().value, 0.0);
        assert_eq!(success_prob_two(&grid(2, vec![vec![(0, 0)]]), 1).unwrap().value, 0.0);
    }

    #[test]
    fn formula_grid_validation() {
        assert!(success_prob_one(&grid(2, vec![vec![(1, 0)]]), 1, 1).is_err());
        assert!(success_prob_two(&grid(2, vec![vec![(2, 0)]]), 1).is_err());
    }

    #[test]
    fn minimal_dimensions() {
        assert_eq!(minimal_d_one(&[3, 1, 2]).unwrap(), MinimalDimension { d: dim(4), clamped: false });
        assert_eq!(minimal_d_two(&[0]).unwrap(), MinimalDimension { d: dim(2), clamped: true });
        assert_eq!(minimal_d_two(&[5, 5]).unwrap().d, dim(6));
        assert!(minimal_d_one(&[]).is_err());
    }

    #[test]
    fn mod_sum_examples() {
        assert!(mod_sum_identity_check(&[3, 4], 5));
        assert!(mod_sum_identity_check(&[0, 0, 0], 7));
        assert!(mod_sum_identity_check(&[u64::MAX, u64::MAX], 17));
    }

    #[test]
    fn zero_trials_rejected() {
        let p = ExperimentProtocol::DecoyDetection { d: dim(2), decoys: 4, threshold: 0 };
        assert!(run_experiment(&p, &EveModel::None, 0, 1).is_err());
    }

    #[test]
    fn experiments_are_reproducible() {
        let config = ProtocolOneConfig::new(2, 2, dim(3));
        let p = ExperimentProtocol::One { config, secrets: vec![vec![0, 2], vec![1, 1]] };
        let a = run_experiment(&p, &EveModel::None, 40, 5).unwrap();
        let b = run_experiment(&p, &EveModel::None, 40, 5).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.correctness.mean, 1.0);
        assert!(a.formula.is_some());
    }
}
