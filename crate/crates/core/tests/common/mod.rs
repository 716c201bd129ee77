#![allow(dead_code)]

use hearts_core::card::{Card, CardSet, Suit};
use hearts_core::game::{GameState, Position, RulesConfig, Seat};
use rand::Rng;

pub fn c(name: &str) -> Card {
    name.parse().unwrap()
}

pub fn set(names: &[&str]) -> CardSet {
    names.iter().map(|n| c(n)).collect()
}

/// Per-card legality written directly from the rules, independent of the
/// engine's set arithmetic.
pub fn oracle_is_legal(state: &GameState, card: Card) -> bool {
    let seat = state.to_act();
    let hand: Vec<Card> = state.hand(seat).iter().collect();
    if !hand.contains(&card) {
        return false;
    }
    let is_penalty = |c: &Card| c.suit() == Suit::Hearts || c.to_string() == "QS";
    let trick = state.current_trick();
    let first = state.trick_number() == 1;
    if trick.is_empty() {
        if first {
            return card.to_string() == "2C";
        }
        if card.suit() == Suit::Hearts && !state.hearts_broken() {
            return hand.iter().all(|c| c.suit() == Suit::Hearts);
        }
        return true;
    }
    let lead = trick[0].1.suit();
    if hand.iter().any(|c| c.suit() == lead) {
        return card.suit() == lead;
    }
    if first && is_penalty(&card) {
        if !hand.iter().all(is_penalty) {
            return false;
        }
        if state.rules().allow_points_on_first_trick_when_forced {
            return true;
        }
        return !hand.iter().any(|c| c.suit() == Suit::Hearts) || card.suit() == Suit::Hearts;
    }
    true
}

pub fn oracle_mask(state: &GameState) -> CardSet {
    Card::all().filter(|&c| oracle_is_legal(state, c)).collect()
}

pub fn random_rules<R: Rng>(rng: &mut R) -> RulesConfig {
    RulesConfig {
        moon_rule: if rng.gen_bool(0.8) {
            hearts_core::game::MoonRule::OthersPlus26
        } else {
            hearts_core::game::MoonRule::Off
        },
        allow_points_on_first_trick_when_forced: rng.gen_bool(0.7),
        queen_breaks_hearts: rng.gen_bool(0.3),
    }
}

/// A mid-game state with `hand` for seat 0 to act after `trick` was played
/// by the preceding seats. Remaining cards fill the other hands in index
/// order, then go to seat 1's collected tricks.
pub fn position(trick_number: u8, hand: &[&str], trick: &[&str], hearts_broken: bool) -> GameState {
    let to_act = Seat::new(0);
    let k = trick.len();
    let current_trick: Vec<(Seat, Card)> =
        trick.iter().enumerate().map(|(i, n)| (Seat::new((4 - k + i) % 4), c(n))).collect();
    let hand = set(hand);
    assert_eq!(hand.len(), 14 - trick_number as usize);
    let table: CardSet = current_trick.iter().map(|&(_, c)| c).collect();
    let mut pool = CardSet::FULL.difference(hand).difference(table).iter();
    let mut hands = [CardSet::EMPTY; 4];
    hands[0] = hand;
    for seat in 1..4 {
        let played = current_trick.iter().any(|&(s, _)| s.index() == seat) as usize;
        for _ in 0..(14 - trick_number as usize - played) {
            hands[seat].insert(pool.next().unwrap());
        }
    }
    let mut collected = [CardSet::EMPTY; 4];
    collected[1] = pool.collect();
    GameState::from_position(Position {
        hands,
        current_trick,
        trick_number,
        hearts_broken,
        collected,
        to_act,
        rules: RulesConfig::default(),
    })
    .unwrap()
}

/// Plays a uniformly random legal card.
pub fn random_step<R: Rng>(state: &mut GameState, rng: &mut R) -> Option<hearts_core::game::TrickEvent> {
    let mask = state.legal_actions().unwrap();
    let card = mask.iter().nth(rng.gen_range(0..mask.count())).unwrap();
    state.play(card).unwrap()
}
