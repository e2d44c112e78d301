use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use serde::de::DeserializeOwned;
use serde_json::Value;

use super::protocol::{
    state_hash, ActedBody, AssistBody, ErrorBody, ErrorCode, Frame, MapView, MetricsBody, ScenarioSource, StartBody,
    StartedBody, StateDelta, HUMAN_POLICY, PROTOCOL_VERSION,
};
use crate::env::{render_map, GridMap};
use crate::planner::DEFAULT_BUDGET;
use crate::session::{Action, Session, SessionConfig, SessionError};
use crate::task::{Bin, SceneGenerator};

pub const DEFAULT_IDLE_TIMEOUT: Duration = Duration::from_secs(30 * 60);

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub idle_timeout: Duration,
    /// Finished traces are written here as `<session_id>.json`.
    pub trace_dir: Option<PathBuf>,
    pub budget: usize,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self { idle_timeout: DEFAULT_IDLE_TIMEOUT, trace_dir: None, budget: DEFAULT_BUDGET }
    }
}

struct MapEntry {
    map: Arc<GridMap>,
    bins: Vec<Bin>,
}

struct Live {
    session: Session,
    last_seen: Instant,
}

type Reply = Result<Frame, (ErrorCode, String)>;

/// Authoritative session state behind the newline-delimited JSON protocol.
///
/// One session's frames are applied under that session's lock, so they are
/// processed one at a time; distinct sessions proceed in parallel.
pub struct SessionServer {
    maps: BTreeMap<String, MapEntry>,
    sessions: Mutex<HashMap<String, Arc<Mutex<Live>>>>,
    next_id: AtomicU64,
    config: ServerConfig,
}

impl SessionServer {
    pub fn new(config: ServerConfig) -> Self {
        Self { maps: BTreeMap::new(), sessions: Mutex::new(HashMap::new()), next_id: AtomicU64::new(1), config }
    }

    pub fn add_map(&mut self, name: &str, map: GridMap, bins: Vec<Bin>) {
        self.maps.insert(name.to_string(), MapEntry { map: Arc::new(map), bins });
    }

    pub fn map_names(&self) -> Vec<&str> {
        self.maps.keys().map(String::as_str).collect()
    }

    /// Handle one client line and return one server line.
    pub fn handle_line(&self, line: &str) -> String {
        self.expire_idle(Instant::now());
        let value: Value = match serde_json::from_str(line) {
            Ok(v) => v,
            Err(e) => return error_frame(None, 0, ErrorCode::BadFrame, format!("not JSON: {e}")).to_line(),
        };
        let seq = value.get("seq").and_then(Value::as_u64).unwrap_or(0);
        let session_id = value.get("session_id").and_then(Value::as_str).map(str::to_string);
        let frame: Frame = match serde_json::from_value(value) {
            Ok(f) => f,
            Err(e) => return error_frame(session_id, seq, ErrorCode::BadFrame, format!("bad envelope: {e}")).to_line(),
        };
        self.handle_frame(frame).to_line()
    }

    pub fn handle_frame(&self, frame: Frame) -> Frame {
        let (seq, session_id) = (frame.seq, frame.session_id.clone());
        if frame.v != PROTOCOL_VERSION {
            return error_frame(
                session_id,
                seq,
                ErrorCode::UnsupportedVersion,
                format!("protocol version {} is not supported", frame.v),
            );
        }
        let reply = match frame.kind.as_str() {
            "start" => self.start(&frame),
            "action" => self.action(&frame),
            "assist" => self.assist(&frame),
            "finish" => self.finish(&frame),
            other => Err((ErrorCode::UnknownType, format!("unknown message type '{other}'"))),
        };
        reply.unwrap_or_else(|(code, message)| error_frame(session_id, seq, code, message))
    }

    fn start(&self, frame: &Frame) -> Reply {
        let body: StartBody = parse_body(&frame.body)?;
        let unknown_map = |name: &str| (ErrorCode::BadScenario, format!("unknown map '{name}'"));
        let (entry, scenario) = match body.scenario {
            ScenarioSource::Inline(scenario) => {
                let entry = self.maps.get(&scenario.map_name).ok_or_else(|| unknown_map(&scenario.map_name))?;
                (entry, *scenario)
            }
            ScenarioSource::Generate { map, seed, n } => {
                let entry = self.maps.get(&map).ok_or_else(|| unknown_map(&map))?;
                let generator = SceneGenerator { map: &entry.map, map_name: map.clone(), bins: entry.bins.clone(), seed };
                let scenario = generator.generate(n).map_err(|e| (ErrorCode::BadScenario, e.to_string()))?;
                (entry, scenario)
            }
        };
        let config = SessionConfig {
            solver_policy: body.solver_policy,
            budget: self.config.budget,
            rng_seed: body.rng_seed,
            ..SessionConfig::new(body.fidelity)
        };
        let session = Session::start(entry.map.clone(), scenario, config).map_err(|e| match e {
            SessionError::Task(_) | SessionError::Env(_) => (ErrorCode::BadScenario, e.to_string()),
            other => (ErrorCode::Internal, other.to_string()),
        })?;
        let id = format!("s{}", self.next_id.fetch_add(1, Ordering::SeqCst));
        let snapshot = session.snapshot();
        let body = StartedBody {
            protocol_version: PROTOCOL_VERSION,
            map: MapView {
                name: session.scenario().map_name.clone(),
                width: entry.map.width(),
                height: entry.map.height(),
                text: render_map(&entry.map),
            },
            scenario: session.scenario().clone(),
            state_hash: state_hash(&snapshot),
            assist: session.assistance_view(),
            snapshot,
        };
        let live = Live { session, last_seen: Instant::now() };
        lock(&self.sessions).insert(id.clone(), Arc::new(Mutex::new(live)));
        log::info!("session {id} started");
        Ok(Frame::new("state", Some(id), frame.seq, body))
    }

    fn live(&self, frame: &Frame) -> Result<(String, Arc<Mutex<Live>>), (ErrorCode, String)> {
        let id = frame.session_id.clone().ok_or((ErrorCode::BadFrame, "session_id is required".to_string()))?;
        let live = lock(&self.sessions)
            .get(&id)
            .cloned()
            .ok_or_else(|| (ErrorCode::UnknownSession, format!("unknown session '{id}'")))?;
        Ok((id, live))
    }

    fn action(&self, frame: &Frame) -> Reply {
        let (id, live) = self.live(frame)?;
        let action: Action = parse_body(&frame.body)?;
        let mut live = lock(&live);
        live.last_seen = Instant::now();
        let session = &mut live.session;
        let before = session.snapshot();
        let outcome = session.apply(action).map_err(|e| match e {
            SessionError::Complete => (ErrorCode::SessionComplete, e.to_string()),
            SessionError::UnknownObject(_) => (ErrorCode::UnknownObject, e.to_string()),
            other => (ErrorCode::Internal, other.to_string()),
        })?;
        let after = session.snapshot();
        let delta = StateDelta::between(&before, &after, &session.events()[before.events..]);
        let body = ActedBody {
            accepted: outcome.accepted,
            replanned: outcome.replanned,
            delta,
            assist: session.assistance_view(),
            message: outcome.message,
            state_hash: state_hash(&after),
        };
        Ok(Frame::new("state", Some(id), frame.seq, body))
    }

    fn assist(&self, frame: &Frame) -> Reply {
        let (id, live) = self.live(frame)?;
        let mut live = lock(&live);
        live.last_seen = Instant::now();
        let body = AssistBody { assist: live.session.assistance_view(), state_hash: state_hash(&live.session.snapshot()) };
        Ok(Frame::new("assist", Some(id), frame.seq, body))
    }

    fn finish(&self, frame: &Frame) -> Reply {
        let (id, _) = self.live(frame)?;
        let live = lock(&self.sessions)
            .remove(&id)
            .ok_or_else(|| (ErrorCode::UnknownSession, format!("unknown session '{id}'")))?;
        let live = lock(&live);
        let trace = live.session.trace(HUMAN_POLICY);
        let metrics = trace.metrics.clone().expect("session traces carry metrics");
        let trace_file = match &self.config.trace_dir {
            Some(dir) => {
                let path = dir.join(format!("{id}.json"));
                crate::harness::write_trace(&path, &trace).map_err(|e| (ErrorCode::Internal, e.to_string()))?;
                Some(path.display().to_string())
            }
            None => None,
        };
        log::info!("session {id} finished");
        let body = MetricsBody { partial: metrics.partial, metrics, trace, trace_file };
        Ok(Frame::new("metrics", Some(id), frame.seq, body))
    }

    /// Drop sessions idle for longer than the timeout; returns how many were dropped.
    pub fn expire_idle(&self, now: Instant) -> usize {
        let mut sessions = lock(&self.sessions);
        let before = sessions.len();
        sessions.retain(|id, live| {
            // a session busy on another thread is not idle
            let keep = match live.try_lock() {
                Ok(l) => now.saturating_duration_since(l.last_seen) <= self.config.idle_timeout,
                Err(_) => true,
            };
            if !keep {
                log::info!("session {id} expired");
            }
            keep
        });
        before - sessions.len()
    }

    pub fn live_sessions(&self) -> usize {
        lock(&self.sessions).len()
    }

    /// Current state hash of a live session.
    pub fn state_hash(&self, session_id: &str) -> Option<String> {
        let live = lock(&self.sessions).get(session_id).cloned()?;
        let live = lock(&live);
        Some(state_hash(&live.session.snapshot()))
    }
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

fn parse_body<T: DeserializeOwned>(body: &Value) -> Result<T, (ErrorCode, String)> {
    serde_json::from_value(body.clone()).map_err(|e| (ErrorCode::BadFrame, format!("bad body: {e}")))
}

fn error_frame(session_id: Option<String>, seq: u64, code: ErrorCode, message: String) -> Frame {
    Frame::new("error", session_id, seq, ErrorBody { code, message })
}
