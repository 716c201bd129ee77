//! The guide in `book/` is written for mdbook, which cannot run listings that
//! depend on workspace crates. Each chapter is included here as a module doc
//! so `cargo test --doc` runs every listing against the current code.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/rules.md")]
pub mod rules {}
#[doc = include_str!("../../../book/src/environment.md")]
pub mod environment {}
#[doc = include_str!("../../../book/src/agents.md")]
pub mod agents {}
#[doc = include_str!("../../../book/src/learning.md")]
pub mod learning {}
#[doc = include_str!("../../../book/src/protocol.md")]
pub mod protocol {}
#[doc = include_str!("../../../book/src/server.md")]
pub mod server {}
#[doc = include_str!("../../../book/src/client.md")]
pub mod client {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
