//! Interactive timed session: start, one prompt per slot, stop.

use std::io::Write;
use std::sync::mpsc::{Receiver, RecvTimeoutError};
use std::time::{Duration, Instant};

use aa_core::model::IDEAL_SHOUT_COUNT;
use aa_core::{Source, Timestamp};
use serde_json::Value;

use crate::client::{push, Client, ClientError, Spool};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Answer {
    Text(String),
    /// Explicitly skipped prompt.
    Skip,
    Stop,
    /// Nothing before the tolerance ran out.
    Timeout,
}

/// Source of answers to slot prompts.
pub trait Prompter {
    /// Asks for slot `slot`; must return by `deadline`.
    fn ask(&mut self, slot: u64, deadline: Instant) -> Answer;
    fn say(&mut self, line: &str);
}

/// Reads answers from a line channel fed by a stdin thread.
pub struct LinePrompter<W: Write> {
    lines: Receiver<String>,
    out: W,
}

impl<W: Write> LinePrompter<W> {
    pub fn new(lines: Receiver<String>, out: W) -> Self {
        LinePrompter { lines, out }
    }
}

pub fn classify_answer(line: &str) -> Answer {
    match line.trim() {
        "" => Answer::Skip,
        t if t.eq_ignore_ascii_case("stop") => Answer::Stop,
        t => Answer::Text(t.to_string()),
    }
}

impl<W: Write> Prompter for LinePrompter<W> {
    fn ask(&mut self, slot: u64, deadline: Instant) -> Answer {
        let _ = write!(self.out, "[slot {slot}] what are you doing? ");
        let _ = self.out.flush();
        let wait = deadline.saturating_duration_since(Instant::now());
        match self.lines.recv_timeout(wait) {
            Ok(line) => classify_answer(&line),
            Err(RecvTimeoutError::Timeout) => {
                let _ = writeln!(self.out);
                Answer::Timeout
            }
            Err(RecvTimeoutError::Disconnected) => Answer::Stop,
        }
    }

    fn say(&mut self, line: &str) {
        let _ = writeln!(self.out, "{line}");
    }
}

#[derive(Debug, Clone)]
pub struct LoopConfig {
    pub nick: String,
    pub slot: Duration,
    pub tolerance: Duration,
    pub slots: u64,
}

impl LoopConfig {
    pub fn new(nick: &str, slot: Duration, tolerance: Duration) -> Self {
        LoopConfig {
            nick: nick.to_string(),
            slot,
            tolerance,
            slots: IDEAL_SHOUT_COUNT as u64,
        }
    }
}

#[derive(Debug, Default)]
pub struct LoopOutcome {
    pub session: Option<String>,
    pub shouts: usize,
    pub lost: Vec<u64>,
    pub spooled: usize,
    /// The stop response, with the conformance report.
    pub stopped: Option<Value>,
}

fn send_or_spool(
    client: &Client,
    spool: &Spool,
    nick: &str,
    msg: &str,
    outcome: &mut LoopOutcome,
) -> Result<Option<Value>, ClientError> {
    match client.message(nick, msg, Some(Timestamp::now()), Source::Http) {
        Ok(v) => Ok(Some(v)),
        Err(e) if e.is_transient() => {
            log::warn!("{e}; spooling");
            spool.append(nick, msg, Timestamp::now(), Source::Http)?;
            outcome.spooled += 1;
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// Runs one session. Prompts fire at start + k·slot for k in 0..slots and
/// stay open for the tolerance; an unanswered or skipped prompt is reported
/// to the server as a lost slot. Spooled messages are pushed before the stop.
pub fn session_loop<P: Prompter>(
    client: &Client,
    spool: &Spool,
    config: &LoopConfig,
    prompter: &mut P,
) -> Result<LoopOutcome, ClientError> {
    let mut outcome = LoopOutcome::default();
    let started = client.message(&config.nick, "start", Some(Timestamp::now()), Source::Http)?;
    let anchor = Instant::now();
    let session = started["session"]
        .as_str()
        .ok_or_else(|| ClientError::Decode(format!("start reply without session: {started}")))?
        .to_string();
    prompter.say(&format!("session {session} started"));
    outcome.session = Some(session.clone());

    for k in 0..config.slots {
        let mark = anchor + config.slot * k as u32;
        if let Some(wait) = mark.checked_duration_since(Instant::now()) {
            std::thread::sleep(wait);
        }
        match prompter.ask(k, mark + config.tolerance) {
            Answer::Stop => break,
            Answer::Text(text) => {
                send_or_spool(client, spool, &config.nick, &text, &mut outcome)?;
                outcome.shouts += 1;
            }
            Answer::Skip | Answer::Timeout => {
                match client.lost(&session, k) {
                    Ok(_) => prompter.say(&format!("slot {k} recorded as lost")),
                    Err(e) => prompter.say(&format!("slot {k} lost, not recorded: {e}")),
                }
                outcome.lost.push(k);
            }
        }
    }

    if !spool.is_empty()? {
        let pushed = push(client, spool)?;
        if let Some(e) = pushed.error {
            prompter.say(&format!("{} spooled entries left: {e}", pushed.remaining));
        }
    }
    let stopped = client.message(&config.nick, "stop", Some(Timestamp::now()), Source::Http)?;
    if let Some(report) = stopped.get("report").filter(|r| !r.is_null()) {
        prompter.say(&format!(
            "ideal: {}  lost slots: {}",
            report["ideal"], report["lost_slots"]
        ));
    } else {
        prompter.say("session closed with no shouts");
    }
    outcome.stopped = Some(stopped);
    Ok(outcome)
}
