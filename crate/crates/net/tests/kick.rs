mod common;

use std::time::{Duration, Instant};

use common::RawClient;
use hearts_core::protocol::{error_code, Message};
use hearts_net::{serve, PlaySource, ServerConfig, TableConfig};

fn server_cfg(n_games: u64, n_parallel: usize, timeout_ms: u64, grace_ms: u64) -> ServerConfig {
    ServerConfig {
        table: TableConfig {
            n_games,
            n_parallel,
            action_timeout_ms: timeout_ms,
            grace_ms,
            master_seed: 11,
            keep_transcripts: true,
            ..TableConfig::default()
        },
        results_log: None,
    }
}

/// Reads every server line until the connection closes, recording them.
async fn drain(mut c: RawClient) -> Vec<Message> {
    let mut seen = Vec::new();
    while let Some(m) = c.recv().await {
        let end = matches!(m, Message::RoundResult { .. });
        seen.push(m);
        if end {
            break;
        }
    }
    seen
}

#[tokio::test(flavor = "multi_thread")]
async fn stalling_client_is_replaced_by_bot() {
    let server = serve("127.0.0.1:0", server_cfg(50, 16, 100, 50)).await.unwrap();
    let mut staller = RawClient::connect(server.local_addr()).await;
    let id = staller.join("staller").await;
    let reader = tokio::spawn(drain(staller));

    let started = Instant::now();
    let r = server.start_table(&[id]).await.unwrap();
    let elapsed = started.elapsed();

    let me = &r.entrants[0];
    assert!(me.kicked);
    assert_eq!(me.timeouts, 1);
    assert_eq!(me.bot_actions, 50 * 13);
    for t in &r.transcripts {
        let seat = t.seating.iter().position(|&e| e == 0).unwrap() as u8;
        assert!(t.plays.iter().filter(|p| p.seat == seat).all(|p| p.source == PlaySource::Bot));
    }
    assert!(!r.all_kicked);
    // One window per timeout, plus generous room for the games themselves.
    let window = Duration::from_millis(150);
    assert!(elapsed <= window * me.timeouts as u32 + Duration::from_millis(1000), "{elapsed:?}");

    let seen = reader.await.unwrap();
    assert_eq!(seen.iter().filter(|m| matches!(m, Message::Kicked { .. })).count(), 1);
    assert!(matches!(seen.last(), Some(Message::RoundResult { .. })));
    server.shutdown();
}

#[tokio::test(flavor = "multi_thread")]
async fn reply_just_inside_deadline_is_never_kicked() {
    let server = serve("127.0.0.1:0", server_cfg(4, 4, 40, 20)).await.unwrap();
    let mut slow = RawClient::connect(server.local_addr()).await;
    let id = slow.join("slow").await;
    let mut rd = slow;
    let (tx, mut rx) = tokio::sync::mpsc::unbounded_channel::<Message>();
    let player = tokio::spawn(async move {
        let mut requests = 0;
        loop {
            tokio::select! {
                m = rd.recv() => match m {
                    Some(m @ Message::RequestAction { .. }) => {
                        requests += 1;
                        let tx = tx.clone();
                        tokio::spawn(async move {
                            let Message::RequestAction { game_id, deadline_ms, .. } = &m else { unreachable!() };
                            tokio::time::sleep(Duration::from_millis(deadline_ms - 1)).await;
                            let obs = m.observation().unwrap().unwrap();
                            let card = obs.mask.iter().next().unwrap();
                            let _ = tx.send(Message::Action {
                                game_id: *game_id,
                                trick_number: obs.trick_number,
                                card_index: card.index() as u8,
                            });
                        });
                    }
                    Some(Message::Kicked { reason }) => panic!("kicked: {reason}"),
                    Some(Message::RoundResult { .. }) | None => return requests,
                    Some(_) => {}
                },
                Some(reply) = rx.recv() => rd.send(&reply).await,
            }
        }
    });
    let r = server.start_table(&[id]).await.unwrap();
    assert_eq!(player.await.unwrap(), 4 * 13);
    let me = &r.entrants[0];
    assert!(!me.kicked);
    assert_eq!((me.timeouts, me.bot_actions), (0, 0));
    for t in &r.transcripts {
        let seat = t.seating.iter().position(|&e| e == 0).unwrap() as u8;
        assert!(t.plays.iter().filter(|p| p.seat == seat).all(|p| p.source == PlaySource::Remote));
    }
    server.shutdown();
}

#[tokio::test(flavor = "multi_thread")]
async fn late_action_after_kick_gets_kicked_error() {
    let server = serve("127.0.0.1:0", server_cfg(2, 2, 30, 10)).await.unwrap();
    let mut late = RawClient::connect(server.local_addr()).await;
    let id = late.join("late").await;
    let client = tokio::spawn(async move {
        let mut first = None;
        loop {
            match late.recv().await.expect("server open") {
                m @ Message::RequestAction { .. } if first.is_none() => first = Some(m),
                Message::Kicked { .. } => break,
                _ => {}
            }
        }
        let m = first.expect("a request before the kick");
        let Message::RequestAction { game_id, .. } = m else { unreachable!() };
        let obs = m.observation().unwrap().unwrap();
        let card = obs.mask.iter().next().unwrap();
        late.send(&Message::Action { game_id, trick_number: obs.trick_number, card_index: card.index() as u8 })
            .await;
        loop {
            match late.recv().await.expect("server open") {
                Message::Error { code, .. } => return code,
                _ => {}
            }
        }
    });
    let r = server.start_table(&[id]).await.unwrap();
    assert!(r.entrants[0].kicked);
    assert_eq!(client.await.unwrap(), error_code::KICKED);
    server.shutdown();
}

#[tokio::test(flavor = "multi_thread")]
async fn disconnect_counts_as_kick() {
    let server = serve("127.0.0.1:0", server_cfg(20, 4, 2000, 250)).await.unwrap();
    let mut quitter = RawClient::connect(server.local_addr()).await;
    let id = quitter.join("quitter").await;
    let client = tokio::spawn(async move {
        while let Some(m) = quitter.recv().await {
            if matches!(m, Message::RequestAction { .. }) {
                return;
            }
        }
    });
    let started = Instant::now();
    let r = server.start_table(&[id]).await.unwrap();
    client.await.unwrap();
    assert!(r.entrants[0].kicked);
    assert_eq!(r.entrants[0].bot_actions, 20 * 13);
    // No timeout had to expire.
    assert!(started.elapsed() < Duration::from_millis(2000));
    server.shutdown();
}

#[tokio::test(flavor = "multi_thread")]
async fn table_of_four_stallers_finishes_flagged() {
    let server = serve("127.0.0.1:0", server_cfg(8, 8, 30, 10)).await.unwrap();
    let mut ids = Vec::new();
    let mut readers = Vec::new();
    for k in 0..4 {
        let mut c = RawClient::connect(server.local_addr()).await;
        ids.push(c.join(&format!("s{k}")).await);
        readers.push(tokio::spawn(drain(c)));
    }
    let r = server.start_table(&ids).await.unwrap();
    assert!(r.all_kicked);
    assert_eq!(r.transcripts.len(), 8);
    for e in &r.entrants {
        assert!(e.kicked);
        assert_eq!(e.bot_actions, 8 * 13);
    }
    for h in readers {
        h.await.unwrap();
    }
    server.shutdown();
}

#[tokio::test(flavor = "multi_thread")]
async fn kick_lasts_only_for_the_round() {
    let server = serve("127.0.0.1:0", server_cfg(2, 2, 30, 10)).await.unwrap();
    let mut c = RawClient::connect(server.local_addr()).await;
    let id = c.join("twice").await;
    let reader = tokio::spawn(async move {
        let mut kicks = 0;
        let mut rounds = 0;
        while let Some(m) = c.recv().await {
            match m {
                Message::Kicked { .. } => kicks += 1,
                Message::RoundResult { .. } => {
                    rounds += 1;
                    if rounds == 2 {
                        break;
                    }
                }
                _ => {}
            }
        }
        kicks
    });
    assert!(server.start_table(&[id]).await.unwrap().entrants[0].kicked);
    assert!(server.start_table(&[id]).await.unwrap().entrants[0].kicked);
    assert_eq!(reader.await.unwrap(), 2);
    server.shutdown();
}
