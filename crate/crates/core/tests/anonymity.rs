use anonqc::analysis::{distributions_match, tp_view_distribution};
use anonqc::channel::{ChannelConfig, EveModel};
use anonqc::protocol::{run_protocol_one, Announcement, ProtocolOneConfig, SymmetricFunction};
use anonqc::qudit::Dimension;

/// Do TP's views agree when participants 1 and 2 trade their data sets?
fn swap_invariant(announcement: Announcement) -> bool {
    let mut config = ProtocolOneConfig::new(2, 0, Dimension::new(2).unwrap());
    config.channel = ChannelConfig { decoys: Some(0), threshold: 0 };
    config.announcement = announcement;
    let f = SymmetricFunction::Sum;
    let view = |secrets: &[Vec<usize>]| {
        tp_view_distribution(|c| run_protocol_one(&config, secrets, &f, &EveModel::None, c)).unwrap()
    };
    distributions_match(&view(&[vec![0], vec![]]), &view(&[vec![], vec![0]]), 1e-12)
}

#[test]
fn reduced_announcement_hides_owners() {
    assert!(swap_invariant(Announcement::Reduced));
}

#[test]
fn integer_announcement_reveals_owners() {
    assert!(!swap_invariant(Announcement::Integer));
}
