mod common;

use common::*;
use hearts_core::card::{Card, CardSet};
use hearts_core::env::*;
use hearts_core::game::{new_game, GameState, Position, RulesConfig, Seat};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn default_env() -> Env {
    Env::new(RulesConfig::default(), Box::new(DefaultShaper::default()))
}

#[test]
fn reset_shows_opening_view() {
    for seed in 0..20 {
        let (mut env, seat, obs) = env_reset(seed, RulesConfig::default(), Box::new(DefaultShaper::default()));
        assert_eq!(obs.mask.cards(), set(&["2C"]));
        assert_eq!(obs.card_states.iter().filter(|&&s| s == CODE_OWN_HAND).count(), 13);
        assert_eq!(obs.card_states.iter().filter(|&&s| s == CODE_UNKNOWN).count(), 39);
        assert_eq!(env.state().unwrap().to_act(), seat);
        assert_eq!(env.reset(seed), (seat, obs));
    }
}

#[test]
fn step_before_reset_and_after_end() {
    let mut env = default_env();
    assert_eq!(env.step(c("2C")).unwrap_err(), EnvError::NotStarted);
    let (_, mut obs) = env.reset(4);
    loop {
        let out = env.step(obs.mask.iter().next().unwrap()).unwrap();
        match out.next_observation {
            Some((_, o)) => obs = o,
            None => break,
        }
    }
    assert_eq!(env.step(c("2C")).unwrap_err(), EnvError::Terminal);
}

#[test]
fn ducking_follower_gets_zero() {
    let mut env = default_env();
    let state = position(5, &["4D", "8S", "TS", "2C", "5C", "9C", "3S", "JS", "KS"], &["9D", "KD"], false);
    env.reset_to(state, 0).unwrap();
    let out = env.step(c("4D")).unwrap();
    assert_eq!(out.reward_events, vec![(Seat::new(0), 0.0)]);
    assert!(!out.info.illegal_action_substituted);
    assert_eq!(out.next_observation.unwrap().0, Seat::new(1));
}

#[test]
fn winner_of_queen_and_two_hearts_gets_minus_15() {
    let cards = ["AS", "QS", "4H", "9H"];
    let rest = CardSet::FULL.difference(set(&cards));
    let state = GameState::from_position(Position {
        hands: cards.map(|n| set(&[n])),
        current_trick: vec![],
        trick_number: 13,
        hearts_broken: true,
        collected: [CardSet::EMPTY, rest, CardSet::EMPTY, CardSet::EMPTY],
        to_act: Seat::new(0),
        rules: RulesConfig::default(),
    })
    .unwrap();
    let mut env = default_env();
    env.reset_to(state, 0);
    let mut last = None;
    for n in cards {
        last = Some(env.step(c(n)).unwrap());
    }
    let out = last.unwrap();
    assert!(out.done);
    assert_eq!(out.info.trick.unwrap().winner, Seat::new(0));
    assert_eq!(out.reward_events[0], (Seat::new(0), -15.0));
    assert_eq!(out.info.scores.unwrap().raw, [15, 11, 0, 0]);
}

#[test]
fn illegal_action_is_substituted_and_charged() {
    let mut env = default_env();
    let (seat, _) = env.reset(11);
    let bad = env.state().unwrap().hand(seat).iter().find(|&c| c != Card::TWO_OF_CLUBS).unwrap();
    let out = env.step(bad).unwrap();
    assert!(out.info.illegal_action_substituted);
    assert_eq!(out.info.played, Card::TWO_OF_CLUBS);
    assert_eq!(out.reward_events, vec![(seat, -DEFAULT_ILLEGAL_PENALTY)]);
}

/// Plays one random game through the env; returns cumulative rewards and final adjusted scores.
fn play_random(env: &mut Env, seed: u64, rng: &mut ChaCha8Rng) -> ([f64; 4], [u32; 4]) {
    let (mut seat, mut obs) = env.reset(seed);
    let mut total = [0.0; 4];
    loop {
        let state = env.state().unwrap().clone();
        assert_eq!(state.to_act(), seat, "turn order");
        assert_eq!(obs, encode_observation(&state, seat));
        assert_eq!(obs.mask, state.legal_actions().unwrap(), "mask fidelity");
        let card = random_legal(obs.mask, rng);
        let out = env.step(card).unwrap();
        assert!(out.reward_events.iter().any(|&(s, _)| s == seat));
        for &(s, r) in &out.reward_events {
            total[s.index()] += r;
        }
        match out.next_observation {
            Some((s, o)) => (seat, obs) = (s, o),
            None => {
                assert_eq!(out.reward_events.len(), 4);
                return (total, out.info.scores.unwrap().adjusted);
            }
        }
    }
}

#[test]
fn episode_sum_equals_minus_adjusted() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut env = default_env();
    for seed in 0..3000 {
        let (total, adjusted) = play_random(&mut env, seed, &mut rng);
        for i in 0..4 {
            assert_eq!(total[i], -(adjusted[i] as f64));
        }
    }
}

#[test]
fn substitution_always_picks_a_legal_card() {
    let mut env = default_env();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for seed in 0..300 {
        let (_, mut obs) = env.reset(seed);
        loop {
            let wild = Card::new(rng.gen_range(0..52)).unwrap();
            let out = env.step(wild).unwrap();
            assert!(obs.mask.is_legal(out.info.played));
            assert_eq!(out.info.illegal_action_substituted, !obs.mask.is_legal(wild));
            match out.next_observation {
                Some((_, o)) => obs = o,
                None => break,
            }
        }
    }
}

#[test]
fn observation_codes() {
    // After seat's own two of clubs lead: code 2 (table, offset 0).
    let g = new_game(8, RulesConfig::default());
    let leader = g.to_act();
    let (g2, _) = g.apply_action(Card::TWO_OF_CLUBS).unwrap();
    let obs = encode_observation(&g2, leader);
    assert_eq!(obs.card_states[0], CODE_ON_TABLE);
    let next = encode_observation(&g2, leader.next());
    assert_eq!(next.card_states[0], CODE_ON_TABLE + 3, "leader is offset 3 from the next seat");
    assert_eq!(next.table(), vec![(3, Card::TWO_OF_CLUBS)]);

    // After a trick taken by the observer, its 4 cards carry code 6.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut g = new_game(8, RulesConfig::default());
    let event = loop {
        if let Some(ev) = random_step(&mut g, &mut rng) {
            break ev;
        }
    };
    let obs = encode_observation(&g, event.winner);
    for (_, card) in event.cards {
        assert_eq!(obs.card_states[card.index()], CODE_COLLECTED);
    }
    let other = encode_observation(&g, event.winner.next());
    for (_, card) in event.cards {
        assert_eq!(other.card_states[card.index()], CODE_COLLECTED + 3);
    }
}

#[test]
fn table_codes_count_current_trick() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for seed in 0..500 {
        let mut g = new_game(seed, RulesConfig::default());
        while !g.is_terminal() {
            for seat in Seat::ALL {
                let obs = encode_observation(&g, seat);
                let on_table = obs.card_states.iter().filter(|&&s| (2..=5).contains(&s)).count();
                assert_eq!(on_table, g.current_trick().len());
                assert_eq!(
                    obs.card_states.iter().filter(|&&s| s == CODE_OWN_HAND).count(),
                    g.hand(seat).len()
                );
                if seat == g.to_act() {
                    let order: Vec<Card> = obs.table().into_iter().map(|(_, c)| c).collect();
                    let truth: Vec<Card> = g.current_trick().iter().map(|&(_, c)| c).collect();
                    assert_eq!(order, truth);
                }
            }
            random_step(&mut g, &mut rng);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    /// Reshuffling the cards held by the other three seats leaves the view unchanged.
    #[test]
    fn hidden_hands_do_not_leak(seed in any::<u64>(), steps in 0usize..48, swap_seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = new_game(seed, RulesConfig::default());
        for _ in 0..steps {
            random_step(&mut g, &mut rng);
        }
        let observer = g.to_act();
        let others: Vec<Seat> = Seat::ALL.into_iter().filter(|&s| s != observer).collect();
        let mut pool: Vec<Card> = others.iter().flat_map(|&s| g.hand(s).iter()).collect();
        let mut shuffle_rng = ChaCha8Rng::seed_from_u64(swap_seed);
        use rand::seq::SliceRandom;
        pool.shuffle(&mut shuffle_rng);
        let mut hands = *g.hands();
        let mut it = pool.into_iter();
        for &s in &others {
            let n = g.hand(s).len();
            hands[s.index()] = it.by_ref().take(n).collect();
        }
        let swapped = GameState::from_position(Position {
            hands,
            current_trick: g.current_trick().to_vec(),
            trick_number: g.trick_number(),
            hearts_broken: g.hearts_broken(),
            collected: Seat::ALL.map(|s| g.collected(s)),
            to_act: observer,
            rules: *g.rules(),
        }).unwrap();
        prop_assert_eq!(encode_observation(&g, observer), encode_observation(&swapped, observer));
    }
}
