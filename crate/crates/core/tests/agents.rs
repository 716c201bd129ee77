mod common;

use common::*;
use hearts_core::agents::*;
use hearts_core::card::Card;
use hearts_core::env::{encode_observation, ObservationVector};
use hearts_core::game::{new_game, ActionMask, RulesConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Observations of the seat to act, sampled along random games.
fn random_observations(n: usize, seed: u64) -> Vec<ObservationVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut game = 0;
    while out.len() < n {
        let mut g = new_game(seed ^ game, RulesConfig::default());
        game += 1;
        while !g.is_terminal() && out.len() < n {
            out.push(encode_observation(&g, g.to_act()));
            random_step(&mut g, &mut rng);
        }
    }
    out
}

#[test]
fn fresh_hand_features() {
    let g = new_game(1, RulesConfig::default());
    let obs = encode_observation(&g, g.to_act());
    let phi = features(&obs, Card::TWO_OF_CLUBS);
    let ones = phi.0.iter().filter(|&&(i, v)| i < SCALAR_OFFSET && v == 1.0).count();
    assert_eq!(ones, 14);
    assert_eq!(phi.nnz(), 15);
    let dense = phi.to_dense();
    assert_eq!(dense.len(), FEATURE_LEN);
    assert_eq!(&dense[SCALAR_OFFSET..], &[1.0 / 13.0, 0.0, 0.0]);
    assert_eq!(dense[action_feature_index(Card::TWO_OF_CLUBS, PlaySituation::Lead)], 1.0);
}

#[test]
fn feature_structure() {
    for obs in random_observations(5000, 3) {
        for card in obs.mask.iter() {
            let phi = features(&obs, card);
            assert!(phi.nnz() <= 56);
            assert!(phi.0.iter().all(|&(i, v)| v >= 0.0 && i < FEATURE_LEN));
            assert!(phi.0.windows(2).all(|w| w[0].0 < w[1].0));
            assert_eq!(phi, features(&obs, card));
            let action_slots = phi.0.iter().filter(|&&(i, _)| (ACTION_OFFSET..SCALAR_OFFSET).contains(&i)).count();
            assert_eq!(action_slots, 1);
        }
    }
}

#[test]
fn play_situations() {
    let lead = ObservationVector { mask: ActionMask::from_set(set(&["4D"])), ..blank(3) };
    assert_eq!(PlaySituation::of(&lead, c("4D")), PlaySituation::Lead);
    let mut follow = blank(3);
    follow.card_states[c("9D").index()] = 2 + 3; // led by the seat before the observer
    assert_eq!(PlaySituation::of(&follow, c("4D")), PlaySituation::Duck);
    assert_eq!(PlaySituation::of(&follow, c("KD")), PlaySituation::Overtake);
    assert_eq!(PlaySituation::of(&follow, c("KS")), PlaySituation::Discard);
}

fn blank(trick: u8) -> ObservationVector {
    ObservationVector {
        card_states: [0; 52],
        trick_number: trick,
        hearts_broken: false,
        penalty_on_table: 0,
        mask: ActionMask::default(),
    }
}

/// Squared TD error with the bootstrap target frozen at `target`.
fn half_sq_td(w: &[f64], phi: &[f64], target: f64) -> f64 {
    let q: f64 = w.iter().zip(phi).map(|(a, b)| a * b).sum();
    0.5 * (target - q) * (target - q)
}

#[test]
fn td_update_matches_finite_difference_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let obs = random_observations(200, 8);
    for trial in 0..50 {
        let w: Vec<f64> = (0..FEATURE_LEN).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let o = &obs[trial * 3];
        let a = o.mask.iter().next().unwrap();
        let phi = features(o, a);
        let next_obs = &obs[trial * 3 + 1];
        let next: Vec<Features> = next_obs.mask.iter().map(|c| features(next_obs, c)).collect();
        let (alpha, gamma, reward) = (0.01, rng.gen_range(0.5..1.0), rng.gen_range(-13.0..0.0));
        let terminal = trial % 5 == 0;

        let dense: Vec<f64> = phi.to_dense();
        let bootstrap = if terminal {
            0.0
        } else {
            next.iter()
                .map(|f| f.to_dense().iter().zip(&w).map(|(x, y)| x * y).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let target = reward + gamma * bootstrap;

        let mut updated = w.clone();
        let t = Transition { phi: phi.clone(), reward, next, terminal };
        td_update(&mut updated, &t, alpha, gamma).unwrap();

        let h = 1e-6;
        for &(i, _) in &phi.0 {
            let mut plus = w.clone();
            let mut minus = w.clone();
            plus[i] += h;
            minus[i] -= h;
            let grad = (half_sq_td(&plus, &dense, target) - half_sq_td(&minus, &dense, target)) / (2.0 * h);
            let expected = -alpha * grad;
            let got = updated[i] - w[i];
            assert!(
                (got - expected).abs() <= 1e-6 * expected.abs().max(1e-3),
                "index {i}: update {got} vs finite difference {expected}"
            );
        }
        for i in 0..FEATURE_LEN {
            if dense[i] == 0.0 {
                assert_eq!(updated[i], w[i]);
            }
        }
    }
}

#[test]
fn greedy_is_argmax_with_lowest_index_tie_break() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (k, obs) in random_observations(3000, 11).into_iter().enumerate() {
        let mut weights = LinearQWeights::zeros(TrainConfig::default());
        if k % 3 != 0 {
            // coarse values force frequent ties
            weights.w.iter_mut().for_each(|x| *x = rng.gen_range(0..3) as f64);
        }
        let mut best: Option<(Card, f64)> = None;
        for i in 0..52u8 {
            let card = Card::new(i).unwrap();
            if !obs.mask.is_legal(card) {
                continue;
            }
            let q: f64 = features(&obs, card).to_dense().iter().zip(&weights.w).map(|(a, b)| a * b).sum();
            if best.is_none() || q > best.unwrap().1 {
                best = Some((card, q));
            }
        }
        let policy = GreedyQPolicy::new(weights);
        assert_eq!(policy.act(&obs, &mut rng), best.unwrap().0);
    }
}

#[test]
fn builtin_policies_only_play_legal_cards() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut weights = LinearQWeights::zeros(TrainConfig::default());
    weights.w.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
    let greedy = GreedyQPolicy::new(weights);
    for obs in random_observations(100_000, 21) {
        assert!(obs.mask.is_legal(random_policy(&obs, &mut rng)));
        let rule = rule_based_policy(&obs);
        assert!(obs.mask.is_legal(rule));
        assert_eq!(rule, rule_based_policy(&obs.clone()));
        assert!(obs.mask.is_legal(greedy.act(&obs, &mut rng)));
    }
}

#[test]
fn random_policy_is_reproducible() {
    let obs = random_observations(500, 4);
    let run = |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        obs.iter().map(|o| random_policy(o, &mut rng)).collect::<Vec<_>>()
    };
    assert_eq!(run(5), run(5));
    assert_ne!(run(5), run(6));
    let single = ObservationVector { mask: ActionMask::from_set(set(&["2C"])), ..obs[0].clone() };
    for s in 0..20 {
        assert_eq!(random_policy(&single, &mut ChaCha8Rng::seed_from_u64(s)), Card::TWO_OF_CLUBS);
    }
}

#[test]
fn evaluate_single_game_and_errors() {
    let r = evaluate([&RandomPolicy, &RandomPolicy, &RuleBasedPolicy, &RandomPolicy], 1, 3, true, RulesConfig::default()).unwrap();
    assert_eq!(r.games, 1);
    assert_eq!(r.entrants.len(), 4);
    for e in &r.entrants {
        assert_eq!(e.placements.iter().sum::<u64>(), 1);
        assert_eq!(e.std_err, 0.0);
    }
    let total: f64 = r.entrants.iter().map(|e| e.mean_adjusted).sum();
    assert!(total == 26.0 || total == 78.0);
    assert_eq!(
        evaluate([&RandomPolicy, &RandomPolicy, &RandomPolicy, &RandomPolicy], 0, 3, true, RulesConfig::default()),
        Err(EvalError::NoGames)
    );
}

#[test]
fn rotation_evens_out_identical_policies() {
    let r = evaluate([&RandomPolicy; 4].map(|p| p as &dyn Policy), 10_000, 17, true, RulesConfig::default()).unwrap();
    let means: Vec<f64> = r.entrants.iter().map(|e| e.mean_adjusted).collect();
    let spread = means.iter().cloned().fold(f64::MIN, f64::max) - means.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread <= 0.6, "{means:?}");
    // Each game contributes 26 points, or 78 when someone shot the moon.
    let total = means.iter().sum::<f64>() * 10_000.0;
    let moons = (total - 26.0 * 10_000.0) / 52.0;
    assert!((moons - moons.round()).abs() < 1e-6 && moons >= 0.0, "{total}");
}

#[test]
fn evaluation_is_reproducible() {
    let ps: [&dyn Policy; 4] = [&RuleBasedPolicy, &RandomPolicy, &RandomPolicy, &RandomPolicy];
    let a = evaluate(ps, 300, 9, true, RulesConfig::default()).unwrap();
    let b = evaluate(ps, 300, 9, true, RulesConfig::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn training_rejects_zero_games() {
    let cfg = TrainConfig { games: 0, ..Default::default() };
    assert!(matches!(train_selfplay(&cfg), Err(TrainError::Config(_))));
    let cfg = TrainConfig { opponents: vec![PolicySpec::Random], ..Default::default() };
    assert!(matches!(train_selfplay(&cfg), Err(TrainError::Config(_))));
}

#[test]
fn training_is_bit_reproducible() {
    let cfg = TrainConfig { games: 2500, seed: 31, curve_window: 1000, ..Default::default() };
    let a = train_selfplay(&cfg).unwrap();
    let b = train_selfplay(&cfg).unwrap();
    assert_eq!(a.curve.len(), 3);
    assert_eq!(a.curve[2].game_window, 2500);
    assert!(a.weights.w.iter().zip(&b.weights.w).all(|(x, y)| x.to_bits() == y.to_bits()));
    assert_eq!(a.curve, b.curve);
    let mut csv_a = Vec::new();
    a.write_curve_csv(&mut csv_a).unwrap();
    let text = String::from_utf8(csv_a).unwrap();
    assert!(text.starts_with("game_window,mean_adjusted_score\n1000,"));
}

#[test]
fn epsilon_schedule_is_linear_then_flat() {
    let e = EpsilonSchedule::default();
    assert_eq!(e.at(0, 1000), 0.5);
    assert!((e.at(250, 1000) - 0.275).abs() < 1e-12);
    assert!((e.at(500, 1000) - 0.05).abs() < 1e-12);
    assert!((e.at(999, 1000) - 0.05).abs() < 1e-12);
}

#[test]
fn weight_file_round_trip() {
    let cfg = TrainConfig { games: 300, seed: 2, ..Default::default() };
    let out = train_selfplay(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.json");
    out.weights.save(&path).unwrap();
    let loaded = LinearQWeights::load(&path).unwrap();
    assert!(loaded.w.iter().zip(&out.weights.w).all(|(x, y)| x.to_bits() == y.to_bits()));
    assert_eq!(loaded.config, cfg);
    let spec: PolicySpec = format!("weights:{}", path.display()).parse().unwrap();
    spec.build().unwrap();
    assert!("weights:".parse::<PolicySpec>().is_err());
    assert!("greedy".parse::<PolicySpec>().is_err());
    assert_eq!(PolicySpec::parse_list("rule, random").unwrap(), vec![PolicySpec::Rule, PolicySpec::Random]);
}

proptest! {
    #[test]
    fn zero_td_error_leaves_weights(idx in 0usize..FEATURE_LEN, alpha in 0.0001f64..1.0) {
        let mut w = vec![0.0; FEATURE_LEN];
        let t = Transition { phi: Features(vec![(idx, 1.0)]), reward: 0.0, next: vec![], terminal: true };
        prop_assert_eq!(td_update(&mut w, &t, alpha, 1.0).unwrap(), 0.0);
        prop_assert!(w.iter().all(|&x| x == 0.0));
    }
}
