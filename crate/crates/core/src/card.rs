//! Cards, suits and 52-bit card sets.
//!
//! A card is identified by a single index `suit * 13 + (rank - 2)` with suits
//! ordered clubs, diamonds, hearts, spades and aces high. Index 0 is the two of
//! clubs, index 49 the queen of spades.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DECK_SIZE: usize = 52;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suit {
    Clubs = 0,
    Diamonds = 1,
    Hearts = 2,
    Spades = 3,
}

impl Suit {
    pub const ALL: [Suit; 4] = [Suit::Clubs, Suit::Diamonds, Suit::Hearts, Suit::Spades];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Suit> {
        Suit::ALL.get(i).copied()
    }

    pub fn symbol(self) -> char {
        match self {
            Suit::Clubs => 'C',
            Suit::Diamonds => 'D',
            Suit::Hearts => 'H',
            Suit::Spades => 'S',
        }
    }

    /// All 13 cards of this suit.
    pub fn cards(self) -> CardSet {
        CardSet(0x1FFF << (13 * self.index()))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CardError {
    #[error("card index {0} out of range 0..52")]
    OutOfRange(u32),
    #[error("invalid card name {0:?}")]
    BadName(String),
}

/// A playing card, stored as its canonical index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Card(u8);

impl Card {
    pub const TWO_OF_CLUBS: Card = Card(0);
    pub const QUEEN_OF_SPADES: Card = Card(49);

    pub fn new(index: u8) -> Result<Card, CardError> {
        if (index as usize) < DECK_SIZE {
            Ok(Card(index))
        } else {
            Err(CardError::OutOfRange(index as u32))
        }
    }

    /// Builds a card from suit and rank (2..=14, ace high).
    pub fn from_suit_rank(suit: Suit, rank: u8) -> Card {
        assert!((2..=14).contains(&rank), "rank {rank} out of range");
        Card(suit as u8 * 13 + rank - 2)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn suit(self) -> Suit {
        Suit::ALL[self.index() / 13]
    }

    pub fn rank(self) -> u8 {
        self.0 % 13 + 2
    }

    pub fn is_heart(self) -> bool {
        self.suit() == Suit::Hearts
    }

    pub fn is_penalty(self) -> bool {
        self.is_heart() || self == Card::QUEEN_OF_SPADES
    }

    /// Penalty points carried by the card: 1 per heart, 13 for the queen of spades.
    pub fn penalty(self) -> u32 {
        if self == Card::QUEEN_OF_SPADES {
            13
        } else if self.is_heart() {
            1
        } else {
            0
        }
    }

    pub fn all() -> impl Iterator<Item = Card> {
        (0..DECK_SIZE as u8).map(Card)
    }

    fn rank_char(self) -> char {
        b"23456789TJQKA"[(self.rank() - 2) as usize] as char
    }
}

impl TryFrom<u8> for Card {
    type Error = CardError;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        Card::new(value)
    }
}

impl From<Card> for u8 {
    fn from(card: Card) -> u8 {
        card.0
    }
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.rank_char(), self.suit().symbol())
    }
}

impl fmt::Debug for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Card {
    type Err = CardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CardError::BadName(s.to_string());
        let mut chars = s.chars();
        let (r, su) = match (chars.next(), chars.next(), chars.next()) {
            (Some(r), Some(su), None) => (r.to_ascii_uppercase(), su.to_ascii_uppercase()),
            _ => return Err(bad()),
        };
        let rank = match r {
            '2'..='9' => r as u8 - b'0',
            'T' => 10,
            'J' => 11,
            'Q' => 12,
            'K' => 13,
            'A' => 14,
            _ => return Err(bad()),
        };
        let suit = match su {
            'C' => Suit::Clubs,
            'D' => Suit::Diamonds,
            'H' => Suit::Hearts,
            'S' => Suit::Spades,
            _ => return Err(bad()),
        };
        Ok(Card::from_suit_rank(suit, rank))
    }
}

/// Text name of a card index, e.g. `card_name(49) == "QS"`.
pub fn card_name(index: u8) -> Result<String, CardError> {
    Card::new(index).map(|c| c.to_string())
}

/// Index of a card given its text name.
pub fn card_from_name(name: &str) -> Result<u8, CardError> {
    name.parse::<Card>().map(u8::from)
}

/// A set of cards as a 52-bit mask; bit `i` is card index `i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct CardSet(u64);

impl CardSet {
    pub const EMPTY: CardSet = CardSet(0);
    pub const FULL: CardSet = CardSet((1 << DECK_SIZE) - 1);

    pub fn from_bits(bits: u64) -> Option<CardSet> {
        (bits & !Self::FULL.0 == 0).then_some(CardSet(bits))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, card: Card) -> bool {
        self.0 >> card.index() & 1 == 1
    }

    pub fn insert(&mut self, card: Card) {
        self.0 |= 1 << card.index();
    }

    pub fn remove(&mut self, card: Card) {
        self.0 &= !(1 << card.index());
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: CardSet) -> CardSet {
        CardSet(self.0 | other.0)
    }

    pub fn intersect(self, other: CardSet) -> CardSet {
        CardSet(self.0 & other.0)
    }

    pub fn difference(self, other: CardSet) -> CardSet {
        CardSet(self.0 & !other.0)
    }

    pub fn of_suit(self, suit: Suit) -> CardSet {
        self.intersect(suit.cards())
    }

    /// Hearts plus the queen of spades.
    pub fn penalty_cards() -> CardSet {
        let mut set = Suit::Hearts.cards();
        set.insert(Card::QUEEN_OF_SPADES);
        set
    }

    pub fn penalty(self) -> u32 {
        self.iter().map(Card::penalty).sum()
    }

    pub fn lowest(self) -> Option<Card> {
        (self.0 != 0).then(|| Card(self.0.trailing_zeros() as u8))
    }

    pub fn highest(self) -> Option<Card> {
        (self.0 != 0).then(|| Card(63 - self.0.leading_zeros() as u8))
    }

    /// Cards in ascending index order.
    pub fn iter(self) -> CardSetIter {
        CardSetIter(self.0)
    }
}

impl FromIterator<Card> for CardSet {
    fn from_iter<I: IntoIterator<Item = Card>>(iter: I) -> Self {
        let mut set = CardSet::EMPTY;
        for card in iter {
            set.insert(card);
        }
        set
    }
}

impl IntoIterator for CardSet {
    type Item = Card;
    type IntoIter = CardSetIter;

    fn into_iter(self) -> CardSetIter {
        self.iter()
    }
}

impl fmt::Debug for CardSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

pub struct CardSetIter(u64);

impl Iterator for CardSetIter {
    type Item = Card;

    fn next(&mut self) -> Option<Card> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(Card(i as u8))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for CardSetIter {}
