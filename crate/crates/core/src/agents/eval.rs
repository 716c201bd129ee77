use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Policy;
use crate::env::{DefaultShaper, Env};
use crate::game::{placements, RulesConfig, Seat};
use crate::seed::{self, tag};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("n_games must be at least 1")]
    NoGames,
}

/// Aggregate over all games for the policy in one slot of `evaluate`'s input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntrantStats {
    pub mean_adjusted: f64,
    pub std_err: f64,
    /// `placements[k]` counts games finished with rank `k + 1`.
    pub placements: [u64; 4],
    pub illegal_actions: u64,
}

impl EntrantStats {
    /// Normal-approximation 95% confidence interval of the mean.
    pub fn ci95(&self) -> (f64, f64) {
        (self.mean_adjusted - 1.96 * self.std_err, self.mean_adjusted + 1.96 * self.std_err)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub games: u64,
    pub entrants: Vec<EntrantStats>,
}

impl EvalReport {
    pub fn write_csv<W: io::Write>(&self, names: &[String], out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "entrant", "policy", "games", "mean_adjusted", "std_err", "first", "second", "third",
            "fourth", "illegal_actions",
        ])?;
        for (i, e) in self.entrants.iter().enumerate() {
            let name = names.get(i).cloned().unwrap_or_default();
            w.write_record([
                i.to_string(),
                name,
                self.games.to_string(),
                e.mean_adjusted.to_string(),
                e.std_err.to_string(),
                e.placements[0].to_string(),
                e.placements[1].to_string(),
                e.placements[2].to_string(),
                e.placements[3].to_string(),
                e.illegal_actions.to_string(),
            ])?;
        }
        w.flush()
    }
}

/// Plays `n_games` games between four policies. With `rotate`, policy `p`
/// sits in seat `(p + game) mod 4`, otherwise in seat `p`. Every game draws
/// its deal and each seat's randomness from streams derived from
/// `(seed, game index)`, so results do not depend on evaluation order.
pub fn evaluate(
    policies: [&dyn Policy; 4],
    n_games: u64,
    seed: u64,
    rotate: bool,
    rules: RulesConfig,
) -> Result<EvalReport, EvalError> {
    if n_games == 0 {
        return Err(EvalError::NoGames);
    }
    let mut env = Env::new(rules, Box::new(DefaultShaper::default()));
    let mut sum = [0f64; 4];
    let mut sum_sq = [0f64; 4];
    let mut hist = [[0u64; 4]; 4];
    let mut illegal = [0u64; 4];

    for game in 0..n_games {
        let shift = if rotate { (game % 4) as usize } else { 0 };
        let entrant_at = |seat: Seat| (seat.index() + 4 - shift) % 4;
        let mut rngs: Vec<_> =
            (0..4).map(|s| seed::stream(seed, &[game, tag::SEAT_POLICY + s])).collect();
        let (mut seat, mut obs) = env.reset(seed::derive_seed(seed, &[game, tag::DEAL]));
        let scores = loop {
            let card = policies[entrant_at(seat)].act(&obs, &mut rngs[seat.index()]);
            let outcome = env.step(card).expect("game in progress");
            if outcome.info.illegal_action_substituted {
                illegal[entrant_at(outcome.info.seat)] += 1;
            }
            match outcome.next_observation {
                Some((s, o)) => (seat, obs) = (s, o),
                None => break outcome.info.scores.expect("terminal scores"),
            }
        };
        let ranks = placements(scores.adjusted);
        for s in Seat::ALL {
            let e = entrant_at(s);
            let x = scores.adjusted[s.index()] as f64;
            sum[e] += x;
            sum_sq[e] += x * x;
            hist[e][ranks[s.index()] as usize - 1] += 1;
        }
    }

    let n = n_games as f64;
    let entrants = (0..4)
        .map(|e| {
            let mean = sum[e] / n;
            let var = if n_games > 1 { (sum_sq[e] - n * mean * mean).max(0.0) / (n - 1.0) } else { 0.0 };
            EntrantStats {
                mean_adjusted: mean,
                std_err: (var / n).sqrt(),
                placements: hist[e],
                illegal_actions: illegal[e],
            }
        })
        .collect();
    Ok(EvalReport { games: n_games, entrants })
}
