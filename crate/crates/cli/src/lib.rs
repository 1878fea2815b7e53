//! Shout server, terminal client, IRC bot and the batch tools.

pub mod bot;
pub mod client;
pub mod config;
pub mod server;
pub mod session;
pub mod tools;
