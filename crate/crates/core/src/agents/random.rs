use rand::RngCore;

use super::Policy;
use crate::card::Card;
use crate::env::{random_legal, ObservationVector};

/// Uniform over the legal cards.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomPolicy;

impl Policy for RandomPolicy {
    fn act(&self, observation: &ObservationVector, rng: &mut dyn RngCore) -> Card {
        random_legal(observation.mask, rng)
    }
}

pub fn random_policy(observation: &ObservationVector, rng: &mut dyn RngCore) -> Card {
    RandomPolicy.act(observation, rng)
}
