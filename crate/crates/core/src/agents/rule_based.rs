//! A deterministic ducking heuristic.
//!
//! 1. First trick: play the highest legal card (no points can land yet).
//! 2. Leading: play the lowest rank, suits ordered clubs < diamonds < hearts < spades.
//! 3. Following suit: play the highest card that still loses to the current
//!    winner, or the lowest card if every option wins.
//! 4. Void in the lead suit: dump the queen of spades, else the highest heart,
//!    else the highest card.

use rand::RngCore;

use super::Policy;
use crate::card::{Card, CardSet, Suit};
use crate::env::ObservationVector;

#[derive(Debug, Clone, Copy, Default)]
pub struct RuleBasedPolicy;

impl Policy for RuleBasedPolicy {
    fn act(&self, observation: &ObservationVector, _rng: &mut dyn RngCore) -> Card {
        rule_based_policy(observation)
    }
}

fn highest(cards: CardSet) -> Option<Card> {
    cards.iter().max_by_key(|c| (c.rank(), c.suit()))
}

fn lowest(cards: CardSet) -> Option<Card> {
    cards.iter().min_by_key(|c| (c.rank(), c.suit()))
}

pub fn rule_based_policy(observation: &ObservationVector) -> Card {
    let legal = observation.mask.cards();
    assert!(!legal.is_empty(), "empty action mask");
    if observation.trick_number == 1 {
        return highest(legal).unwrap();
    }
    let table = observation.table();
    let Some(&(_, lead_card)) = table.first() else {
        return lowest(legal).unwrap();
    };
    let lead = lead_card.suit();
    if !legal.of_suit(lead).is_empty() {
        let winning_rank = table
            .iter()
            .filter(|(_, c)| c.suit() == lead)
            .map(|(_, c)| c.rank())
            .max()
            .unwrap();
        let ducks: CardSet = legal.iter().filter(|c| c.rank() < winning_rank).collect();
        return highest(ducks).or_else(|| lowest(legal)).unwrap();
    }
    if legal.contains(Card::QUEEN_OF_SPADES) {
        return Card::QUEEN_OF_SPADES;
    }
    highest(legal.of_suit(Suit::Hearts)).or_else(|| highest(legal)).unwrap()
}
