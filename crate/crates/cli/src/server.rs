//! HTTP front end of the store.
//!
//! Routing is a plain function from [`Req`] to [`Reply`]; the tiny_http loop
//! only moves bytes. Every mutation goes through one mutex so sequence
//! numbers and arrival stamps are totally ordered.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use aa_core::{
    Journal, ListFormat, PushItem, SessionId, ShoutFilter, Source, Store, StoreError, Timestamp,
};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, Default)]
pub struct Req {
    pub method: String,
    pub path: String,
    pub query: String,
    pub content_type: Option<String>,
    pub body: Vec<u8>,
}

impl Req {
    pub fn new(method: &str, target: &str) -> Req {
        let (path, query) = target.split_once('?').unwrap_or((target, ""));
        Req {
            method: method.to_ascii_uppercase(),
            path: path.to_string(),
            query: query.to_string(),
            ..Default::default()
        }
    }

    pub fn form(mut self, body: &str) -> Req {
        self.content_type = Some("application/x-www-form-urlencoded".into());
        self.body = body.as_bytes().to_vec();
        self
    }

    pub fn json(mut self, body: &Value) -> Req {
        self.content_type = Some("application/json".into());
        self.body = body.to_string().into_bytes();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reply {
    pub status: u16,
    pub content_type: &'static str,
    pub body: String,
}

const JSON: &str = "application/json";
const TEXT: &str = "text/plain; charset=utf-8";

impl Reply {
    fn json<T: Serialize>(status: u16, value: &T) -> Reply {
        Reply {
            status,
            content_type: JSON,
            body: serde_json::to_string(value).expect("reply serializes"),
        }
    }

    fn error(status: u16, code: &str, message: impl Into<String>) -> Reply {
        Reply::json(status, &json!({ "error": code, "message": message.into() }))
    }
}

fn store_error(e: &StoreError) -> Reply {
    let status = match e {
        StoreError::UnknownSession(_) => 404,
        e if e.is_client_error() => 400,
        _ => 500,
    };
    if status == 500 {
        log::error!("{e}");
    }
    Reply::error(status, e.code(), e.to_string())
}

/// Request parameters from the query string and a form or JSON body.
struct Params {
    values: BTreeMap<String, Value>,
}

impl Params {
    fn from_req(req: &Req) -> Result<Params, Reply> {
        let mut values = BTreeMap::new();
        for (k, v) in url::form_urlencoded::parse(req.query.as_bytes()) {
            values.insert(k.into_owned(), Value::String(v.into_owned()));
        }
        let body = req.body.as_slice();
        let is_json = req
            .content_type
            .as_deref()
            .is_some_and(|c| c.starts_with(JSON))
            || body.trim_ascii_start().first() == Some(&b'{');
        if is_json {
            match serde_json::from_slice::<Value>(body) {
                Ok(Value::Object(map)) => values.extend(map),
                _ => return Err(Reply::error(400, "bad_body", "body is not a JSON object")),
            }
        } else if !body.is_empty() {
            for (k, v) in url::form_urlencoded::parse(body) {
                values.insert(k.into_owned(), Value::String(v.into_owned()));
            }
        }
        Ok(Params { values })
    }

    fn text(&self, key: &str) -> Option<String> {
        match self.values.get(key)? {
            Value::String(s) => Some(s.clone()),
            Value::Number(n) => Some(n.to_string()),
            Value::Bool(b) => Some(b.to_string()),
            _ => None,
        }
    }

    fn required(&self, key: &str) -> Result<String, Reply> {
        self.text(key)
            .ok_or_else(|| Reply::error(400, "missing_param", format!("missing parameter {key:?}")))
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, Reply> {
        match self.text(key) {
            None => Ok(None),
            Some(s) if s.trim().is_empty() => Ok(None),
            Some(s) => s.trim().parse().map(Some).map_err(|_| {
                Reply::error(400, "bad_param", format!("bad value for {key:?}: {s:?}"))
            }),
        }
    }

    fn timestamp(&self, key: &str) -> Result<Option<Timestamp>, Reply> {
        match self.text(key) {
            None => Ok(None),
            Some(s) => Timestamp::parse(&s).map(Some).map_err(|_| {
                Reply::error(
                    400,
                    "bad_param",
                    format!("bad timestamp for {key:?}: {s:?}"),
                )
            }),
        }
    }

    fn source(&self) -> Result<Source, Reply> {
        match self.text("source").as_deref() {
            None | Some("http") => Ok(Source::Http),
            Some("chat") => Ok(Source::Chat),
            Some(other) => Err(Reply::error(
                400,
                "bad_param",
                format!("bad source {other:?}"),
            )),
        }
    }
}

pub struct App<J: Journal> {
    store: Mutex<Store<J>>,
}

impl<J: Journal> App<J> {
    pub fn new(store: Store<J>) -> Self {
        App {
            store: Mutex::new(store),
        }
    }

    pub fn with_store<R>(&self, f: impl FnOnce(&mut Store<J>) -> R) -> R {
        let mut guard = self.store.lock().unwrap_or_else(|p| p.into_inner());
        f(&mut guard)
    }

    pub fn handle(&self, req: &Req) -> Reply {
        match self.route(req) {
            Ok(reply) | Err(reply) => reply,
        }
    }

    fn route(&self, req: &Req) -> Result<Reply, Reply> {
        let params = Params::from_req(req)?;
        let segments: Vec<&str> = req.path.trim_matches('/').split('/').collect();
        let method = req.method.as_str();
        match (method, segments.as_slice()) {
            ("GET" | "POST", ["shout"]) => self.message(&params),
            ("POST", ["message"]) => self.message(&params),
            ("GET", ["shouts"]) => self.shouts(&params),
            ("GET", ["report"]) => {
                let n = params.parsed::<usize>("n")?;
                Ok(Reply::json(200, &self.with_store(|s| s.report(n))))
            }
            ("GET", ["session", id]) => self.session(id),
            ("POST", ["session", id, action]) => self.session_action(id, action, &params),
            (_, ["shout" | "message" | "shouts" | "report"]) | (_, ["session", ..]) => {
                Err(Reply::error(
                    405,
                    "method_not_allowed",
                    format!("{method} not allowed here"),
                ))
            }
            _ => Err(Reply::error(
                404,
                "not_found",
                format!("no route for {}", req.path),
            )),
        }
    }

    fn message(&self, params: &Params) -> Result<Reply, Reply> {
        let nick = params.required("nick")?;
        let msg = params.required("msg")?;
        let client_created = params.timestamp("client_created")?;
        let source = params.source()?;
        if let Some(items) = params.values.get("items") {
            let items: Vec<PushItem> = serde_json::from_value(items.clone())
                .map_err(|e| Reply::error(400, "bad_param", format!("bad push items: {e}")))?;
            return match self.with_store(|s| s.push(&nick, &items)) {
                Ok(ids) => Ok(Reply::json(200, &json!({ "action": "pushed", "ids": ids }))),
                Err((accepted, e)) => {
                    let mut reply = store_error(&e);
                    let mut body: Value = serde_json::from_str(&reply.body).expect("json");
                    body["accepted"] = json!(accepted);
                    reply.body = body.to_string();
                    Err(reply)
                }
            };
        }
        self.with_store(|s| s.receive_message(&nick, &msg, client_created, source))
            .map(|action| Reply::json(200, &action))
            .map_err(|e| store_error(&e))
    }

    fn shouts(&self, params: &Params) -> Result<Reply, Reply> {
        let format = match params.text("format").as_deref() {
            None | Some("text") => ListFormat::Text,
            Some("json") => ListFormat::Json,
            Some(other) => {
                return Err(Reply::error(
                    400,
                    "bad_param",
                    format!("bad format {other:?}"),
                ))
            }
        };
        let filter = ShoutFilter::parse(
            params.text("nick").as_deref(),
            params.text("since").as_deref(),
            params.text("until").as_deref(),
        )
        .map_err(|e| store_error(&e))?;
        let body = self.with_store(|s| s.render_listing(format, &filter));
        Ok(Reply {
            status: 200,
            content_type: if format == ListFormat::Json {
                JSON
            } else {
                TEXT
            },
            body,
        })
    }

    fn session(&self, id: &str) -> Result<Reply, Reply> {
        let sid = SessionId(id.to_string());
        self.with_store(|s| {
            let session = s
                .state()
                .session(&sid)
                .cloned()
                .ok_or_else(|| store_error(&StoreError::UnknownSession(id.to_string())))?;
            let conformance = s.conformance(&sid).ok();
            Ok(Reply::json(
                200,
                &json!({ "session": session, "conformance": conformance }),
            ))
        })
    }

    fn session_action(&self, id: &str, action: &str, params: &Params) -> Result<Reply, Reply> {
        let sid = SessionId(id.to_string());
        match action {
            "screencast" => {
                let url = params.required("url")?;
                self.with_store(|s| s.attach_screencast(&sid, &url))
                    .map(|session| Reply::json(200, &session))
                    .map_err(|e| store_error(&e))
            }
            "review" => {
                let reviewer = params.required("reviewer")?;
                let score = params.parsed::<f64>("score")?.ok_or_else(|| {
                    Reply::error(400, "missing_param", "missing parameter \"score\"")
                })?;
                let comment = params.text("comment").filter(|c| !c.trim().is_empty());
                self.with_store(|s| s.record_review(&sid, &reviewer, score, comment))
                    .map(|review| Reply::json(200, &review))
                    .map_err(|e| store_error(&e))
            }
            "lost" => {
                let slot = params.parsed::<u64>("slot")?.ok_or_else(|| {
                    Reply::error(400, "missing_param", "missing parameter \"slot\"")
                })?;
                self.with_store(|s| s.emit_lost_timeslot(&sid, slot))
                    .map(|shout| Reply::json(200, &shout))
                    .map_err(|e| store_error(&e))
            }
            _ => Err(Reply::error(
                404,
                "not_found",
                format!("no session action {action:?}"),
            )),
        }
    }
}

/// A running listener. Dropping the handle does not stop it; call [`ServerHandle::shutdown`].
pub struct ServerHandle {
    addr: SocketAddr,
    server: Arc<tiny_http::Server>,
    workers: Vec<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn shutdown(self) {
        for _ in &self.workers {
            self.server.unblock();
        }
        for w in self.workers {
            let _ = w.join();
        }
    }

    /// Blocks until every worker exits.
    pub fn join(self) {
        for w in self.workers {
            let _ = w.join();
        }
    }
}

fn to_req(request: &mut tiny_http::Request) -> Req {
    let mut req = Req::new(request.method().as_str(), request.url());
    req.content_type = request
        .headers()
        .iter()
        .find(|h| h.field.equiv("Content-Type"))
        .map(|h| h.value.as_str().to_string());
    let mut body = Vec::new();
    if let Err(e) = request.as_reader().read_to_end(&mut body) {
        log::warn!("reading request body: {e}");
    }
    req.body = body;
    req
}

/// Binds `addr` (port 0 picks a free one) and serves on `threads` workers.
pub fn serve<J: Journal + 'static>(
    addr: &str,
    app: Arc<App<J>>,
    threads: usize,
) -> Result<ServerHandle, String> {
    let server = Arc::new(tiny_http::Server::http(addr).map_err(|e| format!("bind {addr}: {e}"))?);
    let bound = server
        .server_addr()
        .to_ip()
        .ok_or_else(|| "listener has no ip address".to_string())?;
    let workers = (0..threads.max(1))
        .map(|_| {
            let server = Arc::clone(&server);
            let app = Arc::clone(&app);
            std::thread::spawn(move || {
                while let Ok(mut request) = server.recv() {
                    let req = to_req(&mut request);
                    let reply = app.handle(&req);
                    log::debug!("{} {} -> {}", req.method, req.path, reply.status);
                    let header = tiny_http::Header::from_bytes("Content-Type", reply.content_type)
                        .expect("static header");
                    let response = tiny_http::Response::from_string(reply.body)
                        .with_status_code(reply.status)
                        .with_header(header);
                    if let Err(e) = request.respond(response) {
                        log::warn!("writing response: {e}");
                    }
                }
            })
        })
        .collect();
    Ok(ServerHandle {
        addr: bound,
        server,
        workers,
    })
}
