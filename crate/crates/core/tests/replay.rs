mod common;

use common::criteria::replay_mode;
use plancheck::eval::Mode;

#[test]
fn formal_llm_replay_matches_expected() {
    replay_mode(Mode::FormalLlm).unwrap();
}

#[test]
fn direct_llm_replay_matches_expected() {
    replay_mode(Mode::DirectLlm).unwrap();
}

#[test]
fn formal_direct_matches_labels() {
    replay_mode(Mode::FormalDirect).unwrap();
}
