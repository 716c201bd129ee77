//! Server-side view of one connected client.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

use hearts_core::protocol::{encode_message, Message};
use tokio::sync::{mpsc, oneshot, watch};

/// Key of an outstanding `RequestAction`.
pub type RequestKey = (u64, u8);

/// Outcome of routing an incoming `Action` line.
#[derive(Debug, PartialEq, Eq)]
pub enum Routed {
    Delivered,
    /// No request is waiting for this key and the entrant is kicked.
    Kicked,
    Unexpected,
}

struct Inner {
    id: u64,
    name: String,
    team: String,
    outbox: mpsc::UnboundedSender<Vec<u8>>,
    pending: Mutex<HashMap<RequestKey, oneshot::Sender<u8>>>,
    kicked: watch::Sender<bool>,
    closed: AtomicBool,
}

/// Cheaply clonable handle to a joined client.
#[derive(Clone)]
pub struct RemoteHandle(Arc<Inner>);

impl std::fmt::Debug for RemoteHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteHandle").field("id", &self.0.id).field("name", &self.0.name).finish()
    }
}

impl RemoteHandle {
    pub fn new(id: u64, name: String, team: String, outbox: mpsc::UnboundedSender<Vec<u8>>) -> RemoteHandle {
        RemoteHandle(Arc::new(Inner {
            id,
            name,
            team,
            outbox,
            pending: Mutex::new(HashMap::new()),
            kicked: watch::Sender::new(false),
            closed: AtomicBool::new(false),
        }))
    }

    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn team(&self) -> &str {
        &self.0.team
    }

    pub fn send(&self, message: &Message) -> bool {
        !self.is_closed() && self.0.outbox.send(encode_message(message)).is_ok()
    }

    pub fn is_closed(&self) -> bool {
        self.0.closed.load(Ordering::SeqCst)
    }

    /// Marks the connection gone and fails every outstanding request.
    pub fn close(&self) {
        self.0.closed.store(true, Ordering::SeqCst);
        self.0.pending.lock().unwrap().clear();
    }

    /// Registers a request; the receiver yields the card index the client sends back.
    pub fn expect_reply(&self, key: RequestKey) -> oneshot::Receiver<u8> {
        let (tx, rx) = oneshot::channel();
        let mut pending = self.0.pending.lock().unwrap();
        if !self.is_closed() {
            pending.insert(key, tx);
        }
        rx
    }

    pub fn forget(&self, key: RequestKey) {
        self.0.pending.lock().unwrap().remove(&key);
    }

    pub fn route_action(&self, key: RequestKey, card_index: u8) -> Routed {
        let sender = self.0.pending.lock().unwrap().remove(&key);
        match sender {
            Some(tx) => {
                let _ = tx.send(card_index);
                Routed::Delivered
            }
            None if self.is_kicked() => Routed::Kicked,
            None => Routed::Unexpected,
        }
    }

    /// Clears the kick flag at the start of a table round.
    pub fn begin_round(&self) {
        self.0.kicked.send_replace(false);
    }

    pub fn is_kicked(&self) -> bool {
        *self.0.kicked.borrow()
    }

    pub fn kick_watch(&self) -> watch::Receiver<bool> {
        self.0.kicked.subscribe()
    }

    /// Kicks the entrant for the rest of the round. Returns true for the
    /// call that performed the kick; only that call notifies the client.
    pub fn kick(&self, reason: &str) -> bool {
        let was_kicked = self.0.kicked.send_replace(true);
        if was_kicked {
            return false;
        }
        self.0.pending.lock().unwrap().clear();
        self.send(&Message::Kicked { reason: reason.to_string() });
        true
    }
}
