use serde::Serialize;

use super::one::expand_counts;
use super::transcript::{Outcome, ProtocolKind, Transcript};
use super::{tp_recover_count, SymmetricFunction};
use crate::qudit::Dimension;
use crate::swap::swap_branch;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConsistencyIssue {
    /// Round id, or `None` for transcript-wide problems.
    pub round: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ConsistencyReport {
    pub rounds_checked: usize,
    pub issues: Vec<ConsistencyIssue>,
}

impl ConsistencyReport {
    pub fn is_consistent(&self) -> bool {
        self.issues.is_empty()
    }

    fn flag(&mut self, round: Option<usize>, message: String) {
        self.issues.push(ConsistencyIssue { round, message });
    }
}

/// Replay every round of a completed transcript through the swap identities
/// and check TP's measurements, the announcements, the recovered counts and
/// the function value. Never fails; problems are listed in the report.
///
/// Runs with an active eavesdropper disturb the cat states, so their
/// measured labels are not expected to match the replay.
pub fn verify_transcript(transcript: &Transcript) -> ConsistencyReport {
    let mut report = ConsistencyReport::default();
    let d = match Dimension::new(transcript.settings.d) {
        Ok(d) => d,
        Err(e) => {
            report.flag(None, e.to_string());
            return report;
        }
    };
    let Outcome::Completed { recovered, function, value } = &transcript.outcome else {
        report.flag(None, "transcript is aborted; nothing to verify".into());
        return report;
    };
    if recovered.len() != transcript.rounds.len() {
        report.flag(None, format!("{} recovered counts for {} rounds", recovered.len(), transcript.rounds.len()));
    }

    for (index, round) in transcript.rounds.iter().enumerate() {
        let id = Some(round.round);
        report.rounds_checked += 1;
        let (Some(encoded), Some(results), Some(announcement), Some(measured), Some(count)) = (
            round.encoded.as_ref(),
            round.bell_results.as_ref(),
            round.announcement,
            round.measured.as_ref(),
            round.recovered,
        ) else {
            report.flag(id, "round is incomplete".into());
            continue;
        };
        if encoded.len() != results.len() || encoded.len() + 1 != round.prepared.particles() {
            report.flag(id, "participant count does not match the cat state".into());
            continue;
        }

        let mut cat = round.prepared.clone();
        for (i, (&bell, &result)) in encoded.iter().zip(results).enumerate() {
            match swap_branch(d, &cat, bell, i + 1, result) {
                Ok(branch) => cat = branch.new_cat,
                Err(e) => {
                    report.flag(id, format!("participant {}: {e}", i + 1));
                    break;
                }
            }
        }
        if &cat != measured {
            report.flag(id, format!("measured cat {measured} but the swap identities give {cat}"));
        }

        let expected = transcript.settings.announcement.announce(results.iter().map(|b| b.shift), d);
        if announcement != expected {
            report.flag(id, format!("announcement {announcement} differs from the γ sum {expected}"));
        }

        match tp_recover_count(measured, &round.prepared, Some(announcement), d) {
            Ok(r) if r == count => {}
            Ok(r) => report.flag(id, format!("recorded count {count} but TP's arithmetic gives {r}")),
            Err(e) => report.flag(id, e.to_string()),
        }
        if recovered.get(index) != Some(&count) {
            report.flag(id, "outcome list disagrees with the round record".into());
        }
    }

    if let Ok(f) = function.parse::<SymmetricFunction>() {
        let data = match transcript.protocol {
            ProtocolKind::One => expand_counts(recovered),
            ProtocolKind::Two => recovered.clone(),
        };
        if &f.evaluate(&data) != value {
            report.flag(None, format!("function {function} does not evaluate to the recorded value"));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::EveModel;
    use crate::protocol::one::{run_protocol_one_seeded, ProtocolOneConfig};
    use crate::protocol::two::{run_protocol_two_seeded, ProtocolTwoConfig};
    use crate::protocol::{tp_recover_count, SymmetricFunction};
    use crate::qudit::BellLabel;

    fn sample() -> Transcript {
        let config = ProtocolOneConfig::new(3, 3, Dimension::new(4).unwrap());
        run_protocol_one_seeded(&config, &[vec![1, 1, 3], vec![3], vec![0, 2]], &SymmetricFunction::Sum, &EveModel::None, 99).unwrap()
    }

    #[test]
    fn honest_runs_are_consistent() {
        for seed in 0..10 {
            let config = ProtocolOneConfig::new(2, 2, Dimension::new(3).unwrap());
            let t = run_protocol_one_seeded(&config, &[vec![0, 2], vec![1]], &SymmetricFunction::Mean, &EveModel::None, seed).unwrap();
            assert!(verify_transcript(&t).is_consistent(), "{:?}", verify_transcript(&t));
            let config = ProtocolTwoConfig::new(3, Dimension::new(5).unwrap());
            let t = run_protocol_two_seeded(&config, &[4, 0, 4], &SymmetricFunction::Histogram, &EveModel::None, seed).unwrap();
            assert!(verify_transcript(&t).is_consistent());
        }
        assert_eq!(verify_transcript(&sample()).rounds_checked, 4);
    }

    #[test]
    fn tampered_gamma_is_flagged_at_its_round() {
        let mut t = sample();
        let results = t.rounds[2].bell_results.as_mut().unwrap();
        let old = results[1];
        results[1] = BellLabel::new(old.phase, (old.shift + 1) % 4);
        let report = verify_transcript(&t);
        assert!(!report.is_consistent());
        assert!(report.issues.iter().all(|i| i.round == Some(2)));
    }

    #[test]
    fn misreported_announcement_shifts_the_count() {
        let t = sample();
        let d = Dimension::new(4).unwrap();
        let round = &t.rounds[1];
        let honest = round.recovered.unwrap();
        let offset = 3;
        let shifted = tp_recover_count(round.measured.as_ref().unwrap(), &round.prepared, Some(round.announcement.unwrap() + offset), d).unwrap();
        assert_eq!(shifted, (honest + offset) % 4);

        let mut tampered = t.clone();
        tampered.rounds[1].announcement = Some(round.announcement.unwrap() + offset);
        let report = verify_transcript(&tampered);
        assert!(report.issues.iter().any(|i| i.round == Some(1) && i.message.contains("announcement")));
    }

    #[test]
    fn aborted_transcripts_are_reported() {
        let mut config = ProtocolOneConfig::new(1, 1, Dimension::new(2).unwrap());
        config.engine = None;
        config.channel.decoys = Some(40);
        let t = run_protocol_one_seeded(&config, &[vec![1]], &SymmetricFunction::Sum, &EveModel::InterceptResend, 3).unwrap();
        assert!(t.is_aborted());
        assert!(!verify_transcript(&t).is_consistent());
    }
}
