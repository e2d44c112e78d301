//! Interactive session protocol: newline-delimited JSON frames over any byte stream.

mod client;
mod protocol;
mod server;
mod transcript;

pub use client::{ClientView, HeadlessClient};
pub use protocol::{
    state_hash, ActedBody, AssistBody, ErrorBody, ErrorCode, Frame, MapView, MetricsBody, ScenarioSource, StartBody,
    StartedBody, StateDelta, HUMAN_POLICY, PROTOCOL_VERSION,
};
pub use server::{ServerConfig, SessionServer, DEFAULT_IDLE_TIMEOUT};
pub use transcript::Transcript;
