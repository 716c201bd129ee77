#![allow(dead_code)]

use std::sync::Arc;
use std::time::Duration;

use hearts_core::agents::{Policy, RandomPolicy, RuleBasedPolicy};
use hearts_core::protocol::{decode_message, encode_message, Frame, Message};
use hearts_net::{Entrant, FrameReader};
use tokio::io::AsyncWriteExt;
use tokio::net::tcp::{OwnedReadHalf, OwnedWriteHalf};
use tokio::net::TcpStream;

/// A hand-driven protocol peer for poking the server.
pub struct RawClient {
    reader: FrameReader<OwnedReadHalf>,
    writer: OwnedWriteHalf,
}

impl RawClient {
    pub async fn connect(addr: std::net::SocketAddr) -> RawClient {
        let stream = TcpStream::connect(addr).await.expect("connect");
        let (r, w) = stream.into_split();
        RawClient { reader: FrameReader::new(r), writer: w }
    }

    pub async fn send(&mut self, m: &Message) {
        self.writer.write_all(&encode_message(m)).await.expect("write");
    }

    pub async fn send_raw(&mut self, bytes: &[u8]) {
        self.writer.write_all(bytes).await.expect("write");
    }

    /// Next message, or `None` on close or after 20 s of silence.
    pub async fn recv(&mut self) -> Option<Message> {
        loop {
            match tokio::time::timeout(Duration::from_secs(20), self.reader.next_frame()).await {
                Ok(Ok(Some(Frame::Line(l)))) => return Some(decode_message(&l).expect("server sends valid lines")),
                Ok(Ok(Some(Frame::Overlong))) => panic!("server sent an overlong line"),
                _ => return None,
            }
        }
    }

    pub async fn join(&mut self, name: &str) -> u64 {
        self.send(&Message::Join { name: name.into(), team: "t".into() }).await;
        match self.recv().await {
            Some(Message::Welcome { player_id, .. }) => player_id,
            other => panic!("expected welcome, got {other:?}"),
        }
    }
}

pub fn random_entrant(name: &str) -> Entrant {
    Entrant::local(name, Arc::new(RandomPolicy) as Arc<dyn Policy>)
}

pub fn rule_entrant(name: &str) -> Entrant {
    Entrant::local(name, Arc::new(RuleBasedPolicy) as Arc<dyn Policy>)
}
