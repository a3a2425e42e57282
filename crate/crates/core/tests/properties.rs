use std::collections::BTreeMap;

use proptest::prelude::*;

use anonqc::analysis::{mod_sum_identity_check, success_prob_one, SuccessProbInput};
use anonqc::apps::{anonymous_rank, anonymous_survey, anonymous_vote, AppConfig, AppInput, Ballot, VoteMode};
use anonqc::channel::{check_decoys, insert_decoys, Carrier};
use anonqc::protocol::{
    derive_value_counts, run_protocol_one_seeded, run_protocol_two_seeded, ProtocolOneConfig, ProtocolTwoConfig,
    SymmetricFunction,
};
use anonqc::channel::EveModel;
use anonqc::qudit::Dimension;
use anonqc::random::seeded;

fn dim(d: usize) -> Dimension {
    Dimension::new(d).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn modular_sum_identity(values in prop::collection::vec(0u64..1_000_000, 0..12), d in 2u64..=17) {
        prop_assert!(mod_sum_identity_check(&values, d));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn zero_cell_zeroes_the_product(
        d in 2usize..=6,
        n in 1usize..=3,
        xi in 0usize..=2,
        seed in any::<u64>(),
        at in any::<prop::sample::Index>(),
    ) {
        let mut rng = seeded(seed);
        let mut cells: Vec<Vec<(usize, usize)>> = (0..=xi)
            .map(|_| (0..n).map(|_| (rand::Rng::gen_range(&mut rng, 0..d), rand::Rng::gen_range(&mut rng, 0..d))).collect())
            .collect();
        let flat = at.index((xi + 1) * n);
        cells[flat / n][flat % n] = (0, 0);
        let p = success_prob_one(&SuccessProbInput { d: dim(d), cells }, xi, n).unwrap();
        prop_assert_eq!(p.value, 0.0);
    }

    #[test]
    fn decoys_round_trip(payload in prop::collection::vec(any::<u32>(), 0..20), decoys in 0usize..20, d in 2usize..=5, seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let (sequence, records) = insert_decoys(payload.clone(), decoys, dim(d), &mut rng).unwrap();
        prop_assert_eq!(sequence.len(), payload.len() + decoys);
        prop_assert_eq!(sequence.iter().filter(|c| matches!(c, Carrier::Decoy(_))).count(), decoys);
        let (report, stripped) = check_decoys(sequence, &records, 0, &mut rng).unwrap();
        prop_assert_eq!(stripped, payload);
        prop_assert_eq!(report.mismatches, 0);
        prop_assert!(!report.aborted);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn protocol_one_counts_values(
        secrets in prop::collection::vec(prop::collection::vec(0usize..=4, 0..=4), 1..=4),
        seed in any::<u64>(),
    ) {
        let xi = 4;
        let total: usize = secrets.iter().map(Vec::len).sum();
        let mut config = ProtocolOneConfig::new(secrets.len(), xi, dim(total.max(1) + 1));
        config.strict_d = true;
        let t = run_protocol_one_seeded(&config, &secrets, &SymmetricFunction::Sum, &EveModel::None, seed).unwrap();
        let mut truth = vec![0; xi + 1];
        for data in &secrets {
            for (c, w) in truth.iter_mut().zip(derive_value_counts(data, xi).unwrap().w) {
                *c += w;
            }
        }
        prop_assert_eq!(t.recovered().unwrap(), truth.as_slice());
    }

    #[test]
    fn protocol_two_recovers_multiset(values in prop::collection::vec(0usize..=7, 1..=4), seed in any::<u64>()) {
        let config = ProtocolTwoConfig::new(values.len(), dim(8));
        let t = run_protocol_two_seeded(&config, &values, &SymmetricFunction::Sum, &EveModel::None, seed).unwrap();
        let mut got = t.recovered().unwrap().to_vec();
        let mut want = values.clone();
        got.sort_unstable();
        want.sort_unstable();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn apps_agree_with_brute_force(
        ballots in prop::collection::vec(prop::collection::btree_set(1usize..=4, 0..=4), 1..=4),
        values in prop::collection::vec(0usize..=9, 2..=5),
        seed in any::<u64>(),
    ) {
        let config = AppConfig::default();
        let mut rng = seeded(seed);

        let ballots: Vec<Ballot> = ballots.into_iter().map(|b| Ballot::new(b.into_iter().collect())).collect();
        let tally = anonymous_vote(&ballots, 4, VoteMode::MultiVote, &config, &mut rng).unwrap().completed().unwrap();
        let mut expected = vec![0; 4];
        for c in ballots.iter().flat_map(|b| &b.candidates) {
            expected[c - 1] += 1;
        }
        prop_assert_eq!(tally.counts, expected);

        let input = AppInput::Single(values.clone());
        let ranking = anonymous_rank(&input, &config, &mut rng).unwrap().completed().unwrap();
        let mut sorted = values.clone();
        sorted.sort_unstable();
        let mut multiplicities = BTreeMap::new();
        for &v in &sorted {
            *multiplicities.entry(v).or_insert(0) += 1;
        }
        prop_assert_eq!(ranking.sorted, sorted);
        prop_assert_eq!(ranking.multiplicities, multiplicities);

        let sum = anonymous_survey(&input, &config, &mut rng).unwrap().completed().unwrap();
        prop_assert_eq!(sum, values.iter().map(|&v| v as u64).sum::<u64>());
    }
}
