mod common;

use common::*;
use plancheck::kripke::{KripkeStructure, State};

#[test]
fn initial_states_match_brute_force() {
    let mut r = rng(23);
    for _ in 0..200 {
        let m = random_model(&mut r, 4, 6);
        let ex = Explicit::build(&m);
        let k = KripkeStructure::compile(&m).unwrap();
        let got = k.initial_states(10_000).unwrap();
        let mut want: Vec<State> = ex.init.iter().map(|&i| ex.state(i)).collect();
        want.sort();
        assert_eq!(got, want);
    }
}

#[test]
fn successors_agree_with_transition_predicate() {
    let mut r = rng(29);
    for _ in 0..60 {
        let m = random_model(&mut r, 3, 4);
        let ex = Explicit::build(&m);
        let k = KripkeStructure::compile(&m).unwrap();
        for (i, s) in ex.states.iter().enumerate() {
            let s = State(s.clone());
            let mut succ = k.successors(&s).unwrap();
            succ.sort();
            let mut want: Vec<State> = ex.succ[i].iter().map(|&j| ex.state(j)).collect();
            want.sort();
            assert_eq!(succ, want);
            for (j, t) in ex.states.iter().enumerate() {
                let t = State(t.clone());
                assert_eq!(k.trans_holds(&s, &t).unwrap(), ex.succ[i].contains(&j));
            }
        }
    }
}

#[test]
fn reachable_sets_match_brute_force() {
    let mut r = rng(31);
    for _ in 0..100 {
        let m = random_model(&mut r, 4, 6);
        let ex = Explicit::build(&m);
        let k = KripkeStructure::compile(&m).unwrap();
        let mut got = k.enumerate_reachable(10_000).unwrap();
        got.sort();
        let mut want: Vec<State> = ex.reachable().into_iter().map(|i| ex.state(i)).collect();
        want.sort();
        assert_eq!(got, want);
    }
}
