use super::client::HeadlessClient;
use super::server::SessionServer;

/// A recorded conversation: `> ` client lines, each followed by its `< ` server line.
/// Lines starting with `#` and blank lines are ignored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Transcript {
    pub exchanges: Vec<(String, String)>,
}

impl Transcript {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut exchanges = Vec::new();
        let mut pending: Option<String> = None;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            match (line.split_at_checked(2), pending.take()) {
                (Some(("> ", request)), None) => pending = Some(request.to_string()),
                (Some(("< ", reply)), Some(request)) => exchanges.push((request, reply.to_string())),
                _ => return Err(format!("line {}: expected alternating '> ' and '< ' lines", i + 1)),
            }
        }
        if pending.is_some() {
            return Err("transcript ends with an unanswered request".into());
        }
        Ok(Self { exchanges })
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (request, reply) in &self.exchanges {
            out.push_str("> ");
            out.push_str(request);
            out.push_str("\n< ");
            out.push_str(reply);
            out.push('\n');
        }
        out
    }

    /// Send each request to `server` and record what comes back.
    pub fn record<'a>(server: &SessionServer, requests: impl IntoIterator<Item = &'a str>) -> Self {
        Self {
            exchanges: requests
                .into_iter()
                .map(|r| (r.to_string(), server.handle_line(r)))
                .collect(),
        }
    }

    /// Replay against a fresh server, feeding replies through a headless client.
    ///
    /// Every reply must match the recording byte for byte and every state hash
    /// must be reproducible from the frames alone.
    pub fn replay(&self, server: &SessionServer, client: &mut HeadlessClient) -> Result<usize, String> {
        for (i, (request, expected)) in self.exchanges.iter().enumerate() {
            let reply = server.handle_line(request);
            if &reply != expected {
                return Err(format!("exchange {}: reply differs\n  got:      {reply}\n  recorded: {expected}", i + 1));
            }
            client.receive(&reply).map_err(|e| format!("exchange {}: {e}", i + 1))?;
        }
        Ok(self.exchanges.len())
    }
}
