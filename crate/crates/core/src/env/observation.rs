use crate::card::{Card, DECK_SIZE};
use crate::game::{ActionMask, GameState, Seat, NUM_TRICKS};

pub const CODE_UNKNOWN: u8 = 0;
pub const CODE_OWN_HAND: u8 = 1;
/// `CODE_ON_TABLE + offset` for a card on the table played by relative seat `offset`.
pub const CODE_ON_TABLE: u8 = 2;
/// `CODE_COLLECTED + offset` for a card in a trick taken by relative seat `offset`.
pub const CODE_COLLECTED: u8 = 6;
pub const NUM_CODES: usize = 10;

/// What one seat may know about the game when it is asked to act.
///
/// Relative offsets are `seat - observer (mod 4)`, so offset 0 is the
/// observer. Cards in other players' hands are always [`CODE_UNKNOWN`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationVector {
    pub card_states: [u8; DECK_SIZE],
    pub trick_number: u8,
    pub hearts_broken: bool,
    pub penalty_on_table: u32,
    pub mask: ActionMask,
}

impl ObservationVector {
    pub fn trick_number_normalized(&self) -> f64 {
        self.trick_number as f64 / NUM_TRICKS as f64
    }

    /// `[trick_number / 13, hearts_broken, penalty_on_table]`.
    pub fn scalars(&self) -> [f64; 3] {
        [
            self.trick_number_normalized(),
            self.hearts_broken as u8 as f64,
            self.penalty_on_table as f64,
        ]
    }

    /// Inverse of [`ObservationVector::scalars`]; rejects values that no game can produce.
    pub fn from_parts(
        card_states: [u8; DECK_SIZE],
        scalars: [f64; 3],
        mask: ActionMask,
    ) -> Result<ObservationVector, String> {
        if let Some(code) = card_states.iter().find(|&&c| c as usize >= NUM_CODES) {
            return Err(format!("card state code {code} out of range"));
        }
        let [t, hb, pen] = scalars;
        let trick = (t * NUM_TRICKS as f64).round();
        if !t.is_finite() || !(1.0..=NUM_TRICKS as f64).contains(&trick) {
            return Err(format!("trick scalar {t} out of range"));
        }
        if hb != 0.0 && hb != 1.0 {
            return Err(format!("hearts_broken scalar {hb} is not 0 or 1"));
        }
        if !pen.is_finite() || pen < 0.0 || pen > 26.0 || pen.fract() != 0.0 {
            return Err(format!("penalty scalar {pen} out of range"));
        }
        Ok(ObservationVector {
            card_states,
            trick_number: trick as u8,
            hearts_broken: hb == 1.0,
            penalty_on_table: pen as u32,
            mask,
        })
    }

    pub fn own_hand(&self) -> impl Iterator<Item = Card> + '_ {
        self.cards_with_code(CODE_OWN_HAND)
    }

    pub fn cards_with_code(&self, code: u8) -> impl Iterator<Item = Card> + '_ {
        Card::all().filter(move |c| self.card_states[c.index()] == code)
    }

    /// The current trick reconstructed in play order. The observer is the
    /// next to play, so with `k` cards down the leader sits at offset `4 - k`.
    pub fn table(&self) -> Vec<(usize, Card)> {
        let mut on_table: Vec<(usize, Card)> = Card::all()
            .filter_map(|c| {
                let code = self.card_states[c.index()];
                (CODE_ON_TABLE..CODE_COLLECTED)
                    .contains(&code)
                    .then(|| ((code - CODE_ON_TABLE) as usize, c))
            })
            .collect();
        let k = on_table.len();
        on_table.sort_by_key(|&(offset, _)| (offset + k) % 4);
        on_table
    }
}

/// Encodes what `observer` can see of `state`. The mask is the legal set when
/// the observer is to act, otherwise empty.
pub fn encode_observation(state: &GameState, observer: Seat) -> ObservationVector {
    let mut card_states = [CODE_UNKNOWN; DECK_SIZE];
    for card in state.hand(observer) {
        card_states[card.index()] = CODE_OWN_HAND;
    }
    for seat in Seat::ALL {
        let code = CODE_COLLECTED + seat.relative_to(observer) as u8;
        for card in state.collected(seat) {
            card_states[card.index()] = code;
        }
    }
    for &(seat, card) in state.current_trick() {
        card_states[card.index()] = CODE_ON_TABLE + seat.relative_to(observer) as u8;
    }
    let mask = if !state.is_terminal() && state.to_act() == observer {
        state.legal_actions().expect("non-terminal")
    } else {
        ActionMask::default()
    };
    ObservationVector {
        card_states,
        trick_number: state.trick_number(),
        hearts_broken: state.hearts_broken(),
        penalty_on_table: state.penalty_on_table(),
        mask,
    }
}
