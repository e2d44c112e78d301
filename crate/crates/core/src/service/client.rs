use std::collections::BTreeMap;

use super::protocol::{state_hash, ActedBody, AssistBody, Frame, MapView, MetricsBody, StartedBody};
use crate::session::{AssistancePayload, SessionSnapshot};
use crate::task::Scenario;

/// What a client knows about one session, built only from server frames.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientView {
    pub map: MapView,
    pub scenario: Scenario,
    pub snapshot: SessionSnapshot,
    pub assist: AssistancePayload,
    pub last_seq: u64,
}

impl ClientView {
    pub fn hash(&self) -> String {
        state_hash(&self.snapshot)
    }
}

/// A client without a screen: applies server frames and checks every state hash.
#[derive(Debug, Default)]
pub struct HeadlessClient {
    views: BTreeMap<String, ClientView>,
    finished: BTreeMap<String, MetricsBody>,
}

impl HeadlessClient {
    pub fn new() -> Self {
        Self::default()
    }

    /// Apply one server line. Fails if the frame is unreadable or the rebuilt state disagrees with its hash.
    pub fn receive(&mut self, line: &str) -> Result<Frame, String> {
        let frame: Frame = serde_json::from_str(line).map_err(|e| format!("unreadable frame: {e}"))?;
        let id = frame.session_id.clone();
        let body = frame.body.clone();
        let parse_err = |e: serde_json::Error| format!("seq {}: bad {} body: {e}", frame.seq, frame.kind);
        match frame.kind.as_str() {
            "state" if body.get("snapshot").is_some() => {
                let started: StartedBody = serde_json::from_value(body).map_err(parse_err)?;
                let id = id.ok_or("start reply without session_id")?;
                let view = ClientView {
                    map: started.map,
                    scenario: started.scenario,
                    snapshot: started.snapshot,
                    assist: started.assist,
                    last_seq: frame.seq,
                };
                check_hash(&view, &started.state_hash)?;
                self.views.insert(id, view);
            }
            "state" => {
                let acted: ActedBody = serde_json::from_value(body).map_err(parse_err)?;
                let view = self.view_mut(id.as_deref())?;
                acted.delta.apply(&mut view.snapshot);
                view.assist = acted.assist;
                view.last_seq = frame.seq;
                check_hash(view, &acted.state_hash)?;
            }
            "assist" => {
                let assist: AssistBody = serde_json::from_value(body).map_err(parse_err)?;
                let view = self.view_mut(id.as_deref())?;
                view.assist = assist.assist;
                view.last_seq = frame.seq;
                check_hash(view, &assist.state_hash)?;
            }
            "metrics" => {
                let metrics: MetricsBody = serde_json::from_value(body).map_err(parse_err)?;
                let id = id.ok_or("metrics without session_id")?;
                self.views.remove(&id);
                self.finished.insert(id, metrics);
            }
            "error" => {}
            other => return Err(format!("unexpected server frame type '{other}'")),
        }
        Ok(frame)
    }

    fn view_mut(&mut self, id: Option<&str>) -> Result<&mut ClientView, String> {
        let id = id.ok_or("frame without session_id")?;
        self.views.get_mut(id).ok_or_else(|| format!("frame for unknown session {id}"))
    }

    pub fn view(&self, id: &str) -> Option<&ClientView> {
        self.views.get(id)
    }

    pub fn finished(&self, id: &str) -> Option<&MetricsBody> {
        self.finished.get(id)
    }
}

fn check_hash(view: &ClientView, expected: &str) -> Result<(), String> {
    let got = view.hash();
    if got == expected {
        Ok(())
    } else {
        Err(format!("rebuilt state hash {got} differs from server hash {expected}"))
    }
}
