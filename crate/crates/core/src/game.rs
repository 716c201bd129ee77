//! The Hearts rules engine.
//!
//! Four seats, 13 tricks, no passing. Following suit is mandatory, the highest
//! card of the lead suit wins the trick, the two of clubs opens, no penalty
//! card may be played in the first trick, and hearts cannot be led until a
//! heart has been discarded in an earlier trick. Collecting all 26 penalty
//! points ("shooting the moon") flips the result when the moon rule is on.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::card::{Card, CardSet, Suit, DECK_SIZE};

pub const NUM_SEATS: usize = 4;
pub const NUM_TRICKS: u8 = 13;
pub const TOTAL_PENALTY: u32 = 26;

/// A seat at the table, 0..4. Play proceeds in increasing seat order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Seat(u8);

impl Seat {
    pub const ALL: [Seat; 4] = [Seat(0), Seat(1), Seat(2), Seat(3)];

    pub fn new(i: usize) -> Seat {
        assert!(i < NUM_SEATS, "seat {i} out of range");
        Seat(i as u8)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn next(self) -> Seat {
        self.offset(1)
    }

    pub fn offset(self, by: usize) -> Seat {
        Seat(((self.0 as usize + by) % NUM_SEATS) as u8)
    }

    /// `self - observer (mod 4)`: 0 for the observer itself, 1 for the next seat.
    pub fn relative_to(self, observer: Seat) -> usize {
        (self.index() + NUM_SEATS - observer.index()) % NUM_SEATS
    }
}

impl TryFrom<u8> for Seat {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, String> {
        if (v as usize) < NUM_SEATS {
            Ok(Seat(v))
        } else {
            Err(format!("seat {v} out of range"))
        }
    }
}

impl From<Seat> for u8 {
    fn from(s: Seat) -> u8 {
        s.0
    }
}

impl fmt::Debug for Seat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "seat{}", self.0)
    }
}

impl fmt::Display for Seat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoonRule {
    /// The shooter scores 0 and every other seat 26.
    #[default]
    OthersPlus26,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RulesConfig {
    pub moon_rule: MoonRule,
    /// A first-trick hand holding only penalty cards (and void in the lead
    /// suit) may discard them.
    pub allow_points_on_first_trick_when_forced: bool,
    pub queen_breaks_hearts: bool,
}

impl Default for RulesConfig {
    fn default() -> Self {
        RulesConfig {
            moon_rule: MoonRule::OthersPlus26,
            allow_points_on_first_trick_when_forced: true,
            queen_breaks_hearts: false,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("the game is over")]
    Terminal,
    #[error("the game is not over yet")]
    NotTerminal,
    #[error("{card} is not a legal play for {seat:?}")]
    IllegalCard { seat: Seat, card: Card },
}

/// Emitted when the fourth card of a trick is played.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrickEvent {
    pub trick_number: u8,
    pub leader: Seat,
    pub winner: Seat,
    pub penalty: u32,
    /// Cards in play order, starting with the leader.
    pub cards: [(Seat, Card); 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scores {
    pub raw: [u32; 4],
    pub adjusted: [u32; 4],
}

/// Input to [`GameState::from_position`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Position {
    pub hands: [CardSet; 4],
    pub current_trick: Vec<(Seat, Card)>,
    pub trick_number: u8,
    pub hearts_broken: bool,
    pub collected: [CardSet; 4],
    pub to_act: Seat,
    pub rules: RulesConfig,
}

/// Complete, authoritative state of one game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameState {
    hands: [CardSet; 4],
    trick: [(Seat, Card); 4],
    trick_len: u8,
    trick_number: u8,
    hearts_broken: bool,
    collected: [CardSet; 4],
    to_act: Seat,
    terminal: bool,
    rules: RulesConfig,
}

/// Deals a fresh game from `seed`. Seat `k` receives positions `13k..13k+13`
/// of a uniformly shuffled deck; the holder of the two of clubs acts first.
pub fn new_game(seed: u64, rules: RulesConfig) -> GameState {
    let mut deck: Vec<Card> = Card::all().collect();
    deck.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut hands = [CardSet::EMPTY; 4];
    for (i, chunk) in deck.chunks(13).enumerate() {
        hands[i] = chunk.iter().copied().collect();
    }
    GameState::from_hands(hands, rules)
}

impl GameState {
    /// Starts a game from explicit hands, which must partition the deck 13/13/13/13.
    pub fn from_hands(hands: [CardSet; 4], rules: RulesConfig) -> GameState {
        let union = hands.iter().fold(CardSet::EMPTY, |acc, h| acc.union(*h));
        assert_eq!(union, CardSet::FULL, "hands must cover the deck");
        assert!(hands.iter().all(|h| h.len() == 13), "hands must hold 13 cards each");
        let to_act = Seat::ALL
            .into_iter()
            .find(|s| hands[s.index()].contains(Card::TWO_OF_CLUBS))
            .expect("someone holds the two of clubs");
        GameState {
            hands,
            trick: [(Seat(0), Card::TWO_OF_CLUBS); 4],
            trick_len: 0,
            trick_number: 1,
            hearts_broken: false,
            collected: [CardSet::EMPTY; 4],
            to_act,
            terminal: false,
            rules,
        }
    }

    /// Builds a mid-game state. `collected` holds every card of the tricks
    /// each seat has taken; `to_act` is the seat whose turn it is.
    pub fn from_position(position: Position) -> Result<GameState, String> {
        let Position { hands, current_trick, trick_number, hearts_broken, collected, to_act, rules } =
            position;
        if !(1..=NUM_TRICKS).contains(&trick_number) {
            return Err(format!("trick number {trick_number} out of range"));
        }
        if current_trick.len() > 3 {
            return Err("a trick in progress holds at most 3 cards".into());
        }
        let mut seen = CardSet::EMPTY;
        let table: CardSet = current_trick.iter().map(|&(_, c)| c).collect();
        for part in hands.iter().chain(collected.iter()).chain([&table]) {
            if !seen.intersect(*part).is_empty() {
                return Err("a card appears twice".into());
            }
            seen = seen.union(*part);
        }
        if seen != CardSet::FULL || table.len() != current_trick.len() {
            return Err("hands, table and collected tricks must partition the deck".into());
        }
        if collected.iter().any(|c| c.len() % 4 != 0)
            || collected.iter().map(|c| c.len()).sum::<usize>() != 4 * (trick_number as usize - 1)
        {
            return Err("collected cards do not match the trick number".into());
        }
        for (i, &(seat, _)) in current_trick.iter().enumerate() {
            if seat != current_trick[0].0.offset(i) {
                return Err("trick cards must be played in seat order".into());
            }
        }
        if let Some(&(leader, _)) = current_trick.first() {
            if to_act != leader.offset(current_trick.len()) {
                return Err("to_act does not follow the trick".into());
            }
        }
        for seat in Seat::ALL {
            let played_this_trick = current_trick.iter().any(|&(s, _)| s == seat) as usize;
            if hands[seat.index()].len() + played_this_trick != 14 - trick_number as usize {
                return Err(format!("{seat:?} holds the wrong number of cards"));
            }
        }
        let mut trick = [(Seat(0), Card::TWO_OF_CLUBS); 4];
        trick[..current_trick.len()].copy_from_slice(&current_trick);
        Ok(GameState {
            hands,
            trick,
            trick_len: current_trick.len() as u8,
            trick_number,
            hearts_broken,
            collected,
            to_act,
            terminal: false,
            rules,
        })
    }

    pub fn hand(&self, seat: Seat) -> CardSet {
        self.hands[seat.index()]
    }

    pub fn hands(&self) -> &[CardSet; 4] {
        &self.hands
    }

    /// Cards played so far in the current trick, leader first.
    pub fn current_trick(&self) -> &[(Seat, Card)] {
        &self.trick[..self.trick_len as usize]
    }

    pub fn lead_suit(&self) -> Option<Suit> {
        self.current_trick().first().map(|(_, c)| c.suit())
    }

    /// 1..=13. Stays at 13 once the game is over.
    pub fn trick_number(&self) -> u8 {
        self.trick_number
    }

    pub fn hearts_broken(&self) -> bool {
        self.hearts_broken
    }

    /// Every card of every trick taken by `seat`.
    pub fn collected(&self, seat: Seat) -> CardSet {
        self.collected[seat.index()]
    }

    pub fn to_act(&self) -> Seat {
        self.to_act
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal
    }

    pub fn rules(&self) -> &RulesConfig {
        &self.rules
    }

    /// Penalty points currently lying on the table.
    pub fn penalty_on_table(&self) -> u32 {
        self.current_trick().iter().map(|(_, c)| c.penalty()).sum()
    }

    /// Cards of the current trick as a set.
    pub fn table_cards(&self) -> CardSet {
        self.current_trick().iter().map(|&(_, c)| c).collect()
    }

    /// The legal cards for the seat to act.
    pub fn legal_actions(&self) -> Result<ActionMask, GameError> {
        if self.terminal {
            return Err(GameError::Terminal);
        }
        Ok(ActionMask(self.legal_set()))
    }

    fn legal_set(&self) -> CardSet {
        let hand = self.hand(self.to_act);
        let first_trick = self.trick_number == 1;
        let penalty = CardSet::penalty_cards();
        match self.lead_suit() {
            None if first_trick => hand.intersect(CardSet::from_iter([Card::TWO_OF_CLUBS])),
            None => {
                let non_hearts = hand.difference(Suit::Hearts.cards());
                if self.hearts_broken || non_hearts.is_empty() {
                    hand
                } else {
                    non_hearts
                }
            }
            Some(lead) if !hand.of_suit(lead).is_empty() => hand.of_suit(lead),
            Some(_) if first_trick => {
                let clean = hand.difference(penalty);
                if !clean.is_empty() {
                    clean
                } else if self.rules.allow_points_on_first_trick_when_forced {
                    hand
                } else {
                    // Still have to play something: hearts before the queen.
                    let hearts = hand.of_suit(Suit::Hearts);
                    if hearts.is_empty() {
                        hand
                    } else {
                        hearts
                    }
                }
            }
            Some(_) => hand,
        }
    }

    /// Plays `card` for the seat to act, in place.
    pub fn play(&mut self, card: Card) -> Result<Option<TrickEvent>, GameError> {
        if self.terminal {
            return Err(GameError::Terminal);
        }
        let seat = self.to_act;
        if !self.legal_set().contains(card) {
            return Err(GameError::IllegalCard { seat, card });
        }
        self.hands[seat.index()].remove(card);
        self.trick[self.trick_len as usize] = (seat, card);
        self.trick_len += 1;
        if self.trick_len < 4 {
            self.to_act = seat.next();
            return Ok(None);
        }

        let lead = self.trick[0].1.suit();
        let (winner, _) = self
            .trick
            .iter()
            .filter(|(_, c)| c.suit() == lead)
            .max_by_key(|(_, c)| c.rank())
            .copied()
            .expect("leader follows its own suit");
        let cards: CardSet = self.trick.iter().map(|&(_, c)| c).collect();
        let event = TrickEvent {
            trick_number: self.trick_number,
            leader: self.trick[0].0,
            winner,
            penalty: cards.penalty(),
            cards: self.trick,
        };
        self.collected[winner.index()] = self.collected[winner.index()].union(cards);
        if !cards.of_suit(Suit::Hearts).is_empty()
            || (self.rules.queen_breaks_hearts && cards.contains(Card::QUEEN_OF_SPADES))
        {
            self.hearts_broken = true;
        }
        self.trick_len = 0;
        self.to_act = winner;
        if self.trick_number == NUM_TRICKS {
            self.terminal = true;
        } else {
            self.trick_number += 1;
        }
        Ok(Some(event))
    }

    /// Value-semantics form of [`GameState::play`].
    pub fn apply_action(&self, card: Card) -> Result<(GameState, Option<TrickEvent>), GameError> {
        let mut next = self.clone();
        let event = next.play(card)?;
        Ok((next, event))
    }

    pub fn final_scores(&self) -> Result<Scores, GameError> {
        if !self.terminal {
            return Err(GameError::NotTerminal);
        }
        let raw = Seat::ALL.map(|s| self.collected(s).penalty());
        Ok(Scores {
            raw,
            adjusted: adjust_for_moon(raw, self.rules.moon_rule),
        })
    }
}

pub fn legal_actions(state: &GameState) -> Result<ActionMask, GameError> {
    state.legal_actions()
}

pub fn apply_action(
    state: &GameState,
    card: Card,
) -> Result<(GameState, Option<TrickEvent>), GameError> {
    state.apply_action(card)
}

pub fn card_penalty(card: Card) -> u32 {
    card.penalty()
}

pub fn final_scores(state: &GameState) -> Result<Scores, GameError> {
    state.final_scores()
}

/// Applies the moon rule to raw scores.
pub fn adjust_for_moon(raw: [u32; 4], rule: MoonRule) -> [u32; 4] {
    match (rule, raw.iter().position(|&r| r == TOTAL_PENALTY)) {
        (MoonRule::OthersPlus26, Some(shooter)) => {
            std::array::from_fn(|i| if i == shooter { 0 } else { TOTAL_PENALTY })
        }
        _ => raw,
    }
}

/// Competition ranking by ascending score: ties share the better rank and the
/// following rank is skipped, so `(5, 5, 6, 10)` ranks `(1, 1, 3, 4)`.
pub fn placements(adjusted: [u32; 4]) -> [u8; 4] {
    std::array::from_fn(|i| 1 + adjusted.iter().filter(|&&s| s < adjusted[i]).count() as u8)
}

/// Legal cards for the seat to act; bit `i` is card index `i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ActionMask(CardSet);

impl ActionMask {
    pub fn from_set(set: CardSet) -> ActionMask {
        ActionMask(set)
    }

    pub fn from_bits(bits: u64) -> Option<ActionMask> {
        CardSet::from_bits(bits).map(ActionMask)
    }

    pub fn bits(self) -> u64 {
        self.0.bits()
    }

    pub fn cards(self) -> CardSet {
        self.0
    }

    pub fn is_legal(self, card: Card) -> bool {
        self.0.contains(card)
    }

    pub fn count(self) -> usize {
        self.0.len()
    }

    pub fn is_empty(self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(self) -> impl Iterator<Item = Card> {
        self.0.iter()
    }

    /// Fixed-width hex rendering: 13 digits, card 0 is the lowest bit of the last digit.
    pub fn to_hex(self) -> String {
        format!("{:013x}", self.bits())
    }

    pub fn from_hex(s: &str) -> Option<ActionMask> {
        if s.len() != 13 || !s.bytes().all(|b| b.is_ascii_hexdigit()) {
            return None;
        }
        u64::from_str_radix(s, 16).ok().and_then(ActionMask::from_bits)
    }

    pub fn as_bools(self) -> [bool; DECK_SIZE] {
        std::array::from_fn(|i| self.bits() >> i & 1 == 1)
    }
}

impl fmt::Debug for ActionMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ActionMask{:?}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(name: &str) -> Card {
        name.parse().unwrap()
    }

    fn set(names: &[&str]) -> CardSet {
        names.iter().map(|n| c(n)).collect()
    }

    #[test]
    fn opening_state() {
        for seed in 0..50 {
            let g = new_game(seed, RulesConfig::default());
            assert!(g.hand(g.to_act()).contains(Card::TWO_OF_CLUBS));
            assert_eq!(g.trick_number(), 1);
            assert!(!g.hearts_broken());
            let mask = g.legal_actions().unwrap();
            assert_eq!(mask.cards(), set(&["2C"]));
        }
    }

    #[test]
    fn same_seed_same_deal() {
        let a = new_game(99, RulesConfig::default());
        let b = new_game(99, RulesConfig::default());
        assert_eq!(a, b);
        assert_ne!(a.hands(), new_game(100, RulesConfig::default()).hands());
    }

    #[test]
    fn deals_partition_the_deck() {
        for seed in 0..1000 {
            let g = new_game(seed, RulesConfig::default());
            let mut union = CardSet::EMPTY;
            for h in g.hands() {
                assert_eq!(h.len(), 13);
                assert!(union.intersect(*h).is_empty());
                union = union.union(*h);
            }
            assert_eq!(union, CardSet::FULL);
        }
    }

    #[test]
    fn placements_competition_ranking() {
        assert_eq!(placements([0, 26, 26, 26]), [1, 2, 2, 2]);
        assert_eq!(placements([5, 5, 6, 10]), [1, 1, 3, 4]);
        assert_eq!(placements([6, 7, 8, 5]), [2, 3, 4, 1]);
    }

    #[test]
    fn moon_adjustment() {
        assert_eq!(adjust_for_moon([26, 0, 0, 0], MoonRule::OthersPlus26), [0, 26, 26, 26]);
        assert_eq!(adjust_for_moon([0, 0, 26, 0], MoonRule::OthersPlus26), [26, 26, 0, 26]);
        assert_eq!(adjust_for_moon([13, 13, 0, 0], MoonRule::OthersPlus26), [13, 13, 0, 0]);
        assert_eq!(adjust_for_moon([26, 0, 0, 0], MoonRule::Off), [26, 0, 0, 0]);
    }

    #[test]
    fn terminal_contract_errors() {
        let g = new_game(1, RulesConfig::default());
        assert_eq!(g.final_scores(), Err(GameError::NotTerminal));
        let illegal = g.hand(g.to_act()).iter().find(|&c| c != Card::TWO_OF_CLUBS).unwrap();
        assert!(matches!(g.apply_action(illegal), Err(GameError::IllegalCard { .. })));
    }

    #[test]
    fn mask_hex_round_trip() {
        let m = ActionMask::from_set(set(&["2C", "AS"]));
        assert_eq!(m.to_hex(), "8000000000001");
        assert_eq!(ActionMask::from_hex(&m.to_hex()), Some(m));
        assert_eq!(ActionMask::from_hex("0000000000001").unwrap().cards(), set(&["2C"]));
        assert!(ActionMask::from_hex("g000000000001").is_none());
        assert!(ActionMask::from_hex("1").is_none());
        assert!(ActionMask::from_hex("fffffffffffff").is_some());
    }
}
