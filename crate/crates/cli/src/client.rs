//! HTTP client for the shout server and the offline spool.

use std::path::{Path, PathBuf};
use std::time::Duration;

use aa_core::journal::{read_records, write_records, FileJournal, Journal, JournalRecord, Payload};
use aa_core::{MessageKind, PushItem, Shout, ShoutId, Source, Timestamp};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("server unreachable: {0}")]
    Network(String),
    #[error("server refused ({status} {code}): {message}")]
    Server {
        status: u16,
        code: String,
        message: String,
    },
    #[error("unexpected response: {0}")]
    Decode(String),
    #[error("spool: {0}")]
    Spool(String),
    #[error("{0}")]
    Invalid(String),
}

impl ClientError {
    /// Failures worth spooling and retrying later.
    pub fn is_transient(&self) -> bool {
        match self {
            ClientError::Network(_) => true,
            ClientError::Server { status, .. } => *status >= 500,
            _ => false,
        }
    }
}

#[derive(Clone)]
pub struct Client {
    base: String,
    agent: ureq::Agent,
}

impl Client {
    pub fn new(base: &str) -> Client {
        Client::with_timeout(base, Duration::from_secs(10))
    }

    pub fn with_timeout(base: &str, timeout: Duration) -> Client {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(timeout))
            .build()
            .into();
        Client {
            base: base.trim_end_matches('/').to_string(),
            agent,
        }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    fn decode<T: DeserializeOwned>(
        result: Result<ureq::http::Response<ureq::Body>, ureq::Error>,
    ) -> Result<T, ClientError> {
        let text = Self::text(result)?;
        serde_json::from_str(&text).map_err(|e| ClientError::Decode(format!("{e}: {text}")))
    }

    fn text(
        result: Result<ureq::http::Response<ureq::Body>, ureq::Error>,
    ) -> Result<String, ClientError> {
        let mut response = result.map_err(|e| ClientError::Network(e.to_string()))?;
        let status = response.status().as_u16();
        let body = response
            .body_mut()
            .read_to_string()
            .map_err(|e| ClientError::Network(e.to_string()))?;
        if status >= 400 {
            let v: Value = serde_json::from_str(&body).unwrap_or(Value::Null);
            return Err(ClientError::Server {
                status,
                code: v["error"].as_str().unwrap_or("unknown").to_string(),
                message: v["message"].as_str().unwrap_or(&body).to_string(),
            });
        }
        Ok(body)
    }

    fn post<T: DeserializeOwned>(&self, path: &str, body: Value) -> Result<T, ClientError> {
        Self::decode(
            self.agent
                .post(format!("{}{path}", self.base))
                .send_json(body),
        )
    }

    /// Sends one message; the server dispatches on its first word.
    pub fn message(
        &self,
        nick: &str,
        msg: &str,
        client_created: Option<Timestamp>,
        source: Source,
    ) -> Result<Value, ClientError> {
        let mut body = json!({ "nick": nick, "msg": msg });
        if let Some(t) = client_created {
            body["client_created"] = json!(t);
        }
        if source == Source::Chat {
            body["source"] = json!("chat");
        }
        self.post("/message", body)
    }

    pub fn shout(&self, nick: &str, msg: &str) -> Result<Value, ClientError> {
        self.post("/shout", json!({ "nick": nick, "msg": msg }))
    }

    pub fn push(&self, nick: &str, items: &[PushItem]) -> Result<Vec<ShoutId>, ClientError> {
        let v: Value = self.post(
            "/message",
            json!({ "nick": nick, "msg": "push", "items": items }),
        )?;
        serde_json::from_value(v["ids"].clone()).map_err(|e| ClientError::Decode(e.to_string()))
    }

    pub fn lost(&self, session: &str, slot: u64) -> Result<Value, ClientError> {
        self.post(
            &format!("/session/{}/lost", encode(session)),
            json!({ "slot": slot }),
        )
    }

    pub fn screencast(&self, session: &str, url: &str) -> Result<Value, ClientError> {
        self.post(
            &format!("/session/{}/screencast", encode(session)),
            json!({ "url": url }),
        )
    }

    pub fn review(
        &self,
        session: &str,
        reviewer: &str,
        score: f64,
        comment: Option<&str>,
    ) -> Result<Value, ClientError> {
        let mut body = json!({ "reviewer": reviewer, "score": score });
        if let Some(c) = comment {
            body["comment"] = json!(c);
        }
        self.post(&format!("/session/{}/review", encode(session)), body)
    }

    pub fn session(&self, session: &str) -> Result<Value, ClientError> {
        Self::decode(
            self.agent
                .get(format!("{}/session/{}", self.base, encode(session)))
                .call(),
        )
    }

    pub fn report(&self, n: Option<usize>) -> Result<Value, ClientError> {
        let mut req = self.agent.get(format!("{}/report", self.base));
        if let Some(n) = n {
            req = req.query("n", n.to_string());
        }
        Self::decode(req.call())
    }

    pub fn listing(&self, format: &str, nick: Option<&str>) -> Result<String, ClientError> {
        let mut req = self
            .agent
            .get(format!("{}/shouts", self.base))
            .query("format", format);
        if let Some(n) = nick {
            req = req.query("nick", n);
        }
        Self::text(req.call())
    }
}

fn encode(segment: &str) -> String {
    url::form_urlencoded::byte_serialize(segment.as_bytes()).collect()
}

/// Messages that could not be delivered, kept as journal records.
#[derive(Debug, Clone)]
pub struct Spool {
    path: PathBuf,
}

impl Spool {
    pub fn new(path: impl Into<PathBuf>) -> Spool {
        Spool { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn load(&self) -> Result<Vec<JournalRecord>, ClientError> {
        read_records(&self.path)
            .map(|(records, _)| records)
            .map_err(|e| ClientError::Spool(e.to_string()))
    }

    pub fn len(&self) -> Result<usize, ClientError> {
        Ok(self.load()?.len())
    }

    pub fn is_empty(&self) -> Result<bool, ClientError> {
        Ok(self.len()? == 0)
    }

    /// Appends a message authored now (or at `created`).
    pub fn append(
        &self,
        nick: &str,
        msg: &str,
        created: Timestamp,
        source: Source,
    ) -> Result<(), ClientError> {
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| ClientError::Spool(e.to_string()))?;
        }
        let seq = self.len()? as u64 + 1;
        let record = JournalRecord {
            seq,
            written: created,
            payload: Payload::Shout(Shout {
                id: ShoutId(seq),
                nick: nick.to_string(),
                message: msg.to_string(),
                created,
                client_created: Some(created),
                source,
                kind: MessageKind::Shout,
                tags: Vec::new(),
                session_ref: None,
                deviation: None,
            }),
        };
        FileJournal::new(&self.path)
            .append(&[record])
            .map_err(|e| ClientError::Spool(e.to_string()))
    }

    fn rewrite(&self, records: &[JournalRecord]) -> Result<(), ClientError> {
        let renumbered: Vec<JournalRecord> = records
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut r = r.clone();
                r.seq = i as u64 + 1;
                r
            })
            .collect();
        write_records(&self.path, &renumbered).map_err(|e| ClientError::Spool(e.to_string()))
    }
}

/// Outcome of flushing the spool.
#[derive(Debug, Default)]
pub struct PushOutcome {
    pub sent: Vec<ShoutId>,
    pub remaining: usize,
    pub error: Option<ClientError>,
}

/// Sends spooled messages in order, one acknowledged request each, dropping
/// every acknowledged entry from the spool before sending the next.
pub fn push_spool<F>(spool: &Spool, mut send: F) -> Result<PushOutcome, ClientError>
where
    F: FnMut(&str, &PushItem) -> Result<Vec<ShoutId>, ClientError>,
{
    let mut records = spool.load()?;
    let mut outcome = PushOutcome::default();
    while let Some(first) = records.first() {
        let Payload::Shout(shout) = &first.payload else {
            records.remove(0);
            spool.rewrite(&records)?;
            continue;
        };
        let item = PushItem {
            msg: shout.message.clone(),
            client_created: shout.client_created.or(Some(shout.created)),
        };
        match send(&shout.nick, &item) {
            Ok(ids) => {
                outcome.sent.extend(ids);
                records.remove(0);
                spool.rewrite(&records)?;
            }
            Err(e) => {
                outcome.error = Some(e);
                break;
            }
        }
    }
    outcome.remaining = records.len();
    Ok(outcome)
}

/// Flushes the spool through the server's push endpoint.
pub fn push(client: &Client, spool: &Spool) -> Result<PushOutcome, ClientError> {
    push_spool(spool, |nick, item| {
        client.push(nick, std::slice::from_ref(item))
    })
}
