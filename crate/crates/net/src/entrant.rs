use std::fmt;
use std::sync::Arc;

use hearts_core::agents::{Policy, RandomPolicy};

use crate::remote::RemoteHandle;

/// Where an entrant's actions come from.
#[derive(Clone)]
pub enum Endpoint {
    Local(Arc<dyn Policy>),
    Remote(RemoteHandle),
}

/// One participant of a table or tournament.
#[derive(Clone)]
pub struct Entrant {
    pub name: String,
    pub endpoint: Endpoint,
    /// Set for random bots added to fill a table or bracket.
    pub pad: bool,
}

impl Entrant {
    pub fn local(name: impl Into<String>, policy: Arc<dyn Policy>) -> Entrant {
        Entrant { name: name.into(), endpoint: Endpoint::Local(policy), pad: false }
    }

    pub fn remote(handle: RemoteHandle) -> Entrant {
        Entrant { name: handle.name().to_string(), endpoint: Endpoint::Remote(handle), pad: false }
    }

    pub fn pad_bot(n: usize) -> Entrant {
        Entrant { name: format!("pad-bot-{n}"), endpoint: Endpoint::Local(Arc::new(RandomPolicy)), pad: true }
    }

    pub fn remote_handle(&self) -> Option<&RemoteHandle> {
        match &self.endpoint {
            Endpoint::Remote(h) => Some(h),
            Endpoint::Local(_) => None,
        }
    }
}

impl fmt::Debug for Entrant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.endpoint {
            Endpoint::Local(_) => "local",
            Endpoint::Remote(_) => "remote",
        };
        f.debug_struct("Entrant").field("name", &self.name).field("kind", &kind).field("pad", &self.pad).finish()
    }
}

/// Fills `entrants` with random bots up to `len`.
pub fn pad_to(entrants: &mut Vec<Entrant>, len: usize) -> usize {
    let mut added = 0;
    while entrants.len() < len {
        added += 1;
        entrants.push(Entrant::pad_bot(added));
    }
    added
}
