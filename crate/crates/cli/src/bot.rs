//! IRC bot that logs `;aa ` channel messages as shouts.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Duration;

use aa_core::model::normalize_nick;
use aa_core::{Source, Timestamp};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::client::{Client, ClientError, Spool};

pub const PREFIX: &str = ";aa ";

const USAGE: &str = "usage: ;aa <what you are doing>  (start, stop and #tags work too)";

const INFO: &[&str] = &[
    "AA: short public notes on what you are doing, every 15 minutes.",
    "AA sessions: send 'start', shout each slot, then 'stop' for peer review.",
    "Tags: #topic or +project anywhere in a shout; #aao0 marks AA from elsewhere.",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReplyMode {
    #[default]
    Channel,
    Notice,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BotConfig {
    /// IRC server `host:port`.
    pub server: String,
    pub tls: bool,
    pub channel: String,
    pub nick: String,
    pub password: Option<String>,
    pub reply_mode: ReplyMode,
    /// Shout server base URL.
    pub aa_server: String,
    pub spool: std::path::PathBuf,
    /// Consecutive failed connection attempts before giving up; 0 retries forever.
    pub max_attempts: u32,
    pub max_backoff_secs: u64,
    /// Silence after which the bot pings the server.
    pub idle_secs: u64,
}

impl Default for BotConfig {
    fn default() -> Self {
        BotConfig {
            server: "irc.libera.chat:6697".into(),
            tls: true,
            channel: "#aa".into(),
            nick: "aabot".into(),
            password: None,
            reply_mode: ReplyMode::Channel,
            aa_server: "http://127.0.0.1:8080".into(),
            spool: std::path::PathBuf::from("aa-bot-spool.jsonl"),
            max_attempts: 10,
            max_backoff_secs: 300,
            idle_secs: 240,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChatEvent {
    pub network: String,
    pub channel: String,
    pub nick: String,
    pub text: String,
    pub received: Timestamp,
}

/// Where the bot sends shouts.
pub trait ShoutSink {
    fn submit(&self, nick: &str, text: &str) -> Result<Value, ClientError>;
}

impl ShoutSink for Client {
    fn submit(&self, nick: &str, text: &str) -> Result<Value, ClientError> {
        self.message(nick, text, None, Source::Chat)
    }
}

pub struct Handler<S: ShoutSink> {
    sink: S,
    spool: Option<Spool>,
    info_index: usize,
}

fn confirmation(action: &Value) -> String {
    let id = &action["id"];
    match action["action"].as_str() {
        Some("started") => format!(
            "session {} started (shout {id})",
            action["session"].as_str().unwrap_or("?")
        ),
        Some("stopped") => {
            let ideal = action["report"]["ideal"].as_bool().unwrap_or(false);
            let validator = action["validator"].as_str().unwrap_or("nobody yet");
            format!("session closed (shout {id}), ideal: {ideal}, validator: {validator}")
        }
        Some("query") => format!(
            "{} is not available here",
            action["topic"].as_str().unwrap_or("query")
        ),
        Some("pushed") => "nothing to push from chat".into(),
        _ => format!("shout {id} logged"),
    }
}

impl<S: ShoutSink> Handler<S> {
    pub fn new(sink: S, spool: Option<Spool>) -> Self {
        Handler {
            sink,
            spool,
            info_index: 0,
        }
    }

    fn next_info(&mut self) -> &'static str {
        let line = INFO[self.info_index % INFO.len()];
        self.info_index += 1;
        line
    }

    /// Replies for one channel line, in order. Lines without the prefix get none.
    pub fn handle_line(&mut self, event: &ChatEvent) -> Vec<String> {
        let Some(rest) = event
            .text
            .strip_prefix(PREFIX)
            .or_else(|| (event.text.trim_end() == PREFIX.trim_end()).then_some(""))
        else {
            return Vec::new();
        };
        if rest.trim().is_empty() {
            return vec![format!("{}: {USAGE}", event.nick)];
        }
        let nick = match normalize_nick(&event.nick) {
            Ok(n) => n,
            Err(e) => return vec![format!("{}: {e}", event.nick)],
        };
        match self.sink.submit(&nick, rest) {
            Ok(action) => vec![
                format!("{}: {}", event.nick, confirmation(&action)),
                self.next_info().to_string(),
            ],
            Err(e) => {
                let mut reply = format!("{}: not logged: {e}", event.nick);
                if e.is_transient() {
                    if let Some(spool) = &self.spool {
                        match spool.append(&nick, rest, event.received, Source::Chat) {
                            Ok(()) => reply.push_str(" (kept for later push)"),
                            Err(se) => log::error!("spooling chat line: {se}"),
                        }
                    }
                }
                vec![reply]
            }
        }
    }
}

/// One parsed IRC protocol line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IrcMessage {
    pub prefix: Option<String>,
    pub command: String,
    pub params: Vec<String>,
}

impl IrcMessage {
    pub fn parse(line: &str) -> Option<IrcMessage> {
        let line = line.trim_end_matches(['\r', '\n']);
        let mut rest = line;
        if rest.starts_with('@') {
            rest = rest.split_once(' ')?.1;
        }
        let prefix = if let Some(r) = rest.strip_prefix(':') {
            let (p, r) = r.split_once(' ')?;
            rest = r;
            Some(p.to_string())
        } else {
            None
        };
        let (head, trailing) = match rest.split_once(" :") {
            Some((h, t)) => (h, Some(t)),
            None => (rest, None),
        };
        let mut words = head.split(' ').filter(|w| !w.is_empty());
        let command = words.next()?.to_ascii_uppercase();
        let mut params: Vec<String> = words.map(str::to_string).collect();
        if let Some(t) = trailing {
            params.push(t.to_string());
        }
        Some(IrcMessage {
            prefix,
            command,
            params,
        })
    }

    pub fn sender_nick(&self) -> Option<&str> {
        self.prefix
            .as_deref()
            .map(|p| p.split('!').next().unwrap_or(p))
    }
}

#[derive(Debug, Error)]
pub enum BotError {
    #[error("connection failed: {0}")]
    Connect(String),
    #[error("rejected by server: {0}")]
    Fatal(String),
    #[error("gave up after {0} failed connection attempts")]
    GaveUp(u32),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

trait Stream: Read + Write + Send {}
impl<T: Read + Write + Send> Stream for T {}

fn connect(config: &BotConfig) -> Result<Box<dyn Stream>, BotError> {
    let tcp = TcpStream::connect(&config.server).map_err(|e| BotError::Connect(e.to_string()))?;
    tcp.set_read_timeout(Some(Duration::from_secs(config.idle_secs.max(1))))?;
    if !config.tls {
        return Ok(Box::new(tcp));
    }
    let host = config
        .server
        .rsplit_once(':')
        .map(|(h, _)| h)
        .unwrap_or(&config.server)
        .to_string();
    let roots = rustls::RootCertStore::from_iter(webpki_roots::TLS_SERVER_ROOTS.iter().cloned());
    let tls = rustls::ClientConfig::builder_with_provider(Arc::new(
        rustls::crypto::ring::default_provider(),
    ))
    .with_safe_default_protocol_versions()
    .map_err(|e| BotError::Connect(e.to_string()))?
    .with_root_certificates(roots)
    .with_no_client_auth();
    let name = rustls::pki_types::ServerName::try_from(host)
        .map_err(|e| BotError::Connect(e.to_string()))?;
    let conn = rustls::ClientConnection::new(Arc::new(tls), name)
        .map_err(|e| BotError::Connect(e.to_string()))?;
    Ok(Box::new(rustls::StreamOwned::new(conn, tcp)))
}

fn send(w: &mut dyn Write, line: &str) -> std::io::Result<()> {
    log::debug!("> {line}");
    w.write_all(line.as_bytes())?;
    w.write_all(b"\r\n")?;
    w.flush()
}

/// Why a connection ended.
enum Ended {
    Disconnected,
    Stopped,
}

/// Keeps the bot connected until `stop` is set or a permanent failure.
pub fn run<S: ShoutSink>(
    config: &BotConfig,
    handler: &mut Handler<S>,
    stop: &AtomicBool,
) -> Result<(), BotError> {
    let mut failures = 0u32;
    while !stop.load(Ordering::Relaxed) {
        match connect(config) {
            Ok(stream) => {
                failures = 0;
                match session(config, handler, stream, stop)? {
                    Ended::Stopped => return Ok(()),
                    Ended::Disconnected => log::warn!("disconnected from {}", config.server),
                }
            }
            Err(e) => {
                failures += 1;
                log::warn!("{e} (attempt {failures})");
                if config.max_attempts > 0 && failures >= config.max_attempts {
                    return Err(BotError::GaveUp(failures));
                }
            }
        }
        let backoff =
            Duration::from_secs((1u64 << failures.min(16)).min(config.max_backoff_secs.max(1)));
        let until = std::time::Instant::now() + backoff;
        while std::time::Instant::now() < until && !stop.load(Ordering::Relaxed) {
            std::thread::sleep(Duration::from_millis(50).min(backoff));
        }
    }
    Ok(())
}

fn session<S: ShoutSink>(
    config: &BotConfig,
    handler: &mut Handler<S>,
    mut stream: Box<dyn Stream>,
    stop: &AtomicBool,
) -> Result<Ended, BotError> {
    let mut nick = config.nick.clone();
    if let Some(pass) = &config.password {
        send(&mut stream, &format!("PASS {pass}"))?;
    }
    send(&mut stream, &format!("NICK {nick}"))?;
    send(&mut stream, &format!("USER {nick} 0 * :AA shout logger"))?;

    let mut pending = Vec::new();
    let mut idle_pinged = false;
    loop {
        if stop.load(Ordering::Relaxed) {
            let _ = send(&mut stream, "QUIT :bye");
            return Ok(Ended::Stopped);
        }
        let line = {
            let mut reader = BufReader::new(ReadHalf(&mut stream, &mut pending));
            let mut line = String::new();
            match reader.read_line(&mut line) {
                Ok(0) => return Ok(Ended::Disconnected),
                Ok(_) => {
                    let leftover = reader.buffer().to_vec();
                    drop(reader);
                    pending = leftover;
                    line
                }
                Err(e)
                    if matches!(
                        e.kind(),
                        std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut
                    ) =>
                {
                    drop(reader);
                    if idle_pinged {
                        return Ok(Ended::Disconnected);
                    }
                    idle_pinged = true;
                    send(&mut stream, "PING :aa-keepalive")?;
                    continue;
                }
                Err(_) => return Ok(Ended::Disconnected),
            }
        };
        idle_pinged = false;
        log::debug!("< {}", line.trim_end());
        let Some(msg) = IrcMessage::parse(&line) else {
            continue;
        };
        match msg.command.as_str() {
            "PING" => send(
                &mut stream,
                &format!(
                    "PONG :{}",
                    msg.params.last().map(String::as_str).unwrap_or("")
                ),
            )?,
            "001" => send(&mut stream, &format!("JOIN {}", config.channel))?,
            "433" => {
                nick.push('_');
                send(&mut stream, &format!("NICK {nick}"))?;
            }
            "464" | "465" => {
                return Err(BotError::Fatal(
                    msg.params.last().cloned().unwrap_or_default(),
                ))
            }
            "ERROR" => return Ok(Ended::Disconnected),
            "PRIVMSG" => {
                let (Some(target), Some(text), Some(sender)) =
                    (msg.params.first(), msg.params.get(1), msg.sender_nick())
                else {
                    continue;
                };
                if !target.eq_ignore_ascii_case(&config.channel) {
                    continue;
                }
                let event = ChatEvent {
                    network: config.server.clone(),
                    channel: target.clone(),
                    nick: sender.to_string(),
                    text: text.clone(),
                    received: Timestamp::now(),
                };
                for reply in handler.handle_line(&event) {
                    let line = match config.reply_mode {
                        ReplyMode::Channel => format!("PRIVMSG {} :{reply}", config.channel),
                        ReplyMode::Notice => format!("NOTICE {sender} :{reply}"),
                    };
                    send(&mut stream, &line)?;
                }
            }
            _ => {}
        }
    }
}

/// Reader over leftover buffered bytes, then the stream.
struct ReadHalf<'a>(&'a mut Box<dyn Stream>, &'a mut Vec<u8>);

impl Read for ReadHalf<'_> {
    fn read(&mut self, buf: &mut [u8]) -> std::io::Result<usize> {
        if !self.1.is_empty() {
            let n = buf.len().min(self.1.len());
            buf[..n].copy_from_slice(&self.1[..n]);
            self.1.drain(..n);
            return Ok(n);
        }
        self.0.read(buf)
    }
}
