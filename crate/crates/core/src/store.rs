//! The shout store: message dispatch, session state and listings.
//!
//! Every mutation is expressed as a [`JournalRecord`], appended to the
//! journal first and then applied to the in-memory [`State`]. Replaying the
//! journal through the same [`State::apply`] rebuilds identical state.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::journal::{Journal, JournalError, JournalRecord, Payload};
use crate::model::{
    normalize_nick, MessageKind, ModelError, Session, SessionId, SessionOrigin, Shout, ShoutId,
    Source, Timestamp, User, UserId, ValidationReview, DEFAULT_SLOT_SECS, DEFAULT_TOLERANCE_SECS,
};
use crate::parser::{self, ParseError, ParserConfig};
use crate::session::{self, ConformanceReport, SessionError, DEFAULT_GAP_SECS};

pub trait Clock: Send + Sync {
    fn now(&self) -> Timestamp;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> Timestamp {
        Timestamp::now()
    }
}

/// Settable clock for tests and simulations.
#[derive(Debug, Default, Clone)]
pub struct ManualClock(Arc<AtomicI64>);

impl ManualClock {
    pub fn new(start: Timestamp) -> Self {
        ManualClock(Arc::new(AtomicI64::new(start.secs())))
    }

    pub fn set(&self, t: Timestamp) {
        self.0.store(t.secs(), Ordering::SeqCst);
    }

    pub fn advance(&self, secs: i64) {
        self.0.fetch_add(secs, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Timestamp {
        Timestamp::from_secs(self.0.load(Ordering::SeqCst))
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("nick is empty")]
    EmptyNick,
    #[error("message is empty")]
    EmptyMessage,
    #[error("no open session for {0}")]
    NoOpenSession(String),
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("invalid url {0:?}")]
    BadUrl(String),
    #[error("invalid filter: {0}")]
    BadFilter(String),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Journal(#[from] JournalError),
}

impl StoreError {
    /// Machine-readable code carried in error responses.
    pub fn code(&self) -> &'static str {
        match self {
            StoreError::EmptyNick => "empty_nick",
            StoreError::EmptyMessage => "empty_message",
            StoreError::NoOpenSession(_) => "no_open_session",
            StoreError::UnknownSession(_) => "unknown_session",
            StoreError::BadUrl(_) => "bad_url",
            StoreError::BadFilter(_) => "bad_filter",
            StoreError::Session(e) => match e {
                SessionError::BadGrid { .. } => "bad_grid",
                SessionError::BeforeAnchor => "before_anchor",
                SessionError::EmptySession => "empty_session",
                SessionError::NotLost(_) => "not_lost",
                SessionError::MixedUsers => "mixed_users",
                SessionError::Unordered => "unordered",
                SessionError::NoEligibleValidator => "no_eligible_validator",
                SessionError::SelfReview => "self_review",
                SessionError::ScoreOutOfRange(_) => "score_out_of_range",
            },
            StoreError::Journal(_) => "journal_failure",
        }
    }

    /// Client errors are the caller's fault; journal failures are not.
    pub fn is_client_error(&self) -> bool {
        !matches!(self, StoreError::Journal(_))
    }
}

impl From<ModelError> for StoreError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::EmptyNick => StoreError::EmptyNick,
            ModelError::ScoreOutOfRange(v) => SessionError::ScoreOutOfRange(v).into(),
            ModelError::EmptyTagName | ModelError::BadTimestamp(_) => {
                StoreError::BadFilter(e.to_string())
            }
        }
    }
}

impl From<ParseError> for StoreError {
    fn from(e: ParseError) -> Self {
        match e {
            ParseError::EmptyMessage => StoreError::EmptyMessage,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreConfig {
    pub slot_secs: i64,
    pub tolerance_secs: i64,
    pub gap_secs: i64,
    pub report_n: usize,
    pub parser: ParserConfig,
}

impl Default for StoreConfig {
    fn default() -> Self {
        StoreConfig {
            slot_secs: DEFAULT_SLOT_SECS,
            tolerance_secs: DEFAULT_TOLERANCE_SECS,
            gap_secs: DEFAULT_GAP_SECS,
            report_n: 20,
            parser: ParserConfig::default(),
        }
    }
}

/// Materialized view of the journal.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    next_seq: u64,
    /// Slot length given to sessions opened by a start message.
    slot_secs: i64,
    /// Shout ids equal the seq of the record that stored them.
    shouts: BTreeMap<ShoutId, Shout>,
    sessions: BTreeMap<SessionId, Session>,
    open: BTreeMap<UserId, SessionId>,
    users: BTreeMap<UserId, User>,
    /// Latest arrival stamp handed out, keeps ingest times non-decreasing.
    last_arrival: Timestamp,
    review_records: usize,
}

impl Default for State {
    fn default() -> Self {
        State::new(DEFAULT_SLOT_SECS)
    }
}

impl State {
    pub fn new(slot_secs: i64) -> Self {
        State {
            next_seq: 1,
            slot_secs,
            shouts: BTreeMap::new(),
            sessions: BTreeMap::new(),
            open: BTreeMap::new(),
            users: BTreeMap::new(),
            last_arrival: Timestamp::default(),
            review_records: 0,
        }
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq.max(1)
    }

    fn touch_user(&mut self, nick: &str) {
        let id = UserId(nick.to_string());
        self.users.entry(id.clone()).or_insert_with(|| User {
            id,
            nicks: [nick.to_string()].into(),
            emails: Default::default(),
        });
    }

    /// Applies one record. Live operations and replay both go through here.
    pub fn apply(&mut self, record: &JournalRecord) {
        self.next_seq = record.seq + 1;
        match &record.payload {
            Payload::Shout(shout) => self.apply_shout(shout.clone()),
            Payload::Session(session) => {
                if session.open {
                    self.open.insert(session.user.clone(), session.id.clone());
                } else if self.open.get(&session.user) == Some(&session.id) {
                    self.open.remove(&session.user);
                }
                self.sessions.insert(session.id.clone(), session.clone());
            }
            Payload::Review(review) => {
                self.touch_user(&review.reviewer.0);
                self.review_records += 1;
                if let Some(session) = self.sessions.get_mut(&review.session) {
                    session.review = Some(review.clone());
                }
            }
        }
    }

    fn apply_shout(&mut self, shout: Shout) {
        self.touch_user(&shout.nick);
        if shout.source != Source::Mined && shout.kind != MessageKind::LostTimeslot {
            self.last_arrival = self.last_arrival.max(shout.created);
        }
        let user = UserId(shout.nick.clone());
        if let Some(sid) = shout.session_ref.clone() {
            match shout.kind {
                MessageKind::Start => {
                    if let Some(prev) = self.open.remove(&user) {
                        if let Some(s) = self.sessions.get_mut(&prev) {
                            s.open = false;
                        }
                    }
                    self.sessions.insert(
                        sid.clone(),
                        Session {
                            id: sid.clone(),
                            user: user.clone(),
                            origin: SessionOrigin::Explicit,
                            start: shout.created,
                            end: shout.created,
                            slot_secs: self.slot_secs,
                            shouts: Vec::new(),
                            screencast: None,
                            review: None,
                            open: true,
                        },
                    );
                    self.open.insert(user, sid);
                }
                MessageKind::Stop => {
                    if let Some(s) = self.sessions.get_mut(&sid) {
                        s.open = false;
                        s.end = s.end.max(shout.created);
                    }
                    if self.open.get(&user) == Some(&sid) {
                        self.open.remove(&user);
                    }
                }
                _ => {
                    if let Some(s) = self.sessions.get_mut(&sid) {
                        // Sorted by created, equal stamps keep arrival order.
                        let pos = s
                            .shouts
                            .iter()
                            .position(|id| {
                                self.shouts
                                    .get(id)
                                    .is_some_and(|m| m.created > shout.created)
                            })
                            .unwrap_or(s.shouts.len());
                        s.shouts.insert(pos, shout.id);
                        s.end = s.end.max(shout.created);
                    }
                }
            }
        }
        self.shouts.insert(shout.id, shout);
    }

    pub fn shout(&self, id: ShoutId) -> Option<&Shout> {
        self.shouts.get(&id)
    }

    pub fn session(&self, id: &SessionId) -> Option<&Session> {
        self.sessions.get(id)
    }

    pub fn open_session(&self, user: &UserId) -> Option<&Session> {
        self.open.get(user).and_then(|id| self.sessions.get(id))
    }

    pub fn members(&self, session: &Session) -> Vec<&Shout> {
        session
            .shouts
            .iter()
            .filter_map(|id| self.shouts.get(id))
            .collect()
    }

    pub fn users(&self) -> Vec<User> {
        self.users.values().cloned().collect()
    }

    pub fn review_records(&self) -> usize {
        self.review_records
    }

    /// Shouts ordered by created, then by id (record order).
    pub fn shouts_by_created(&self) -> Vec<&Shout> {
        let mut all: Vec<&Shout> = self.shouts.values().collect();
        all.sort_by_key(|s| (s.created, s.id));
        all
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            shouts: self.shouts_by_created().into_iter().cloned().collect(),
            sessions: self.sessions.values().cloned().collect(),
            reviews: self
                .sessions
                .values()
                .filter_map(|s| s.review.clone())
                .collect(),
            users: self.users(),
        }
    }
}

/// Read-only copy of the store consumed by the exporter and statistics.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub shouts: Vec<Shout>,
    pub sessions: Vec<Session>,
    pub reviews: Vec<ValidationReview>,
    pub users: Vec<User>,
}

impl Snapshot {
    /// Replays records without touching any journal.
    pub fn from_records(records: &[JournalRecord], slot_secs: i64) -> Snapshot {
        let mut state = State::new(slot_secs);
        for r in records {
            state.apply(r);
        }
        state.snapshot()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ShoutFilter {
    pub nick: Option<String>,
    pub since: Option<Timestamp>,
    pub until: Option<Timestamp>,
}

impl ShoutFilter {
    /// Builds a filter from raw request parameters.
    pub fn parse(
        nick: Option<&str>,
        since: Option<&str>,
        until: Option<&str>,
    ) -> Result<Self, StoreError> {
        let ts = |s: Option<&str>| -> Result<Option<Timestamp>, StoreError> {
            match s.map(str::trim).filter(|s| !s.is_empty()) {
                None => Ok(None),
                Some(s) => Timestamp::parse(s)
                    .map(Some)
                    .map_err(|_| StoreError::BadFilter(format!("bad timestamp {s:?}"))),
            }
        };
        let filter = ShoutFilter {
            nick: match nick.map(str::trim).filter(|s| !s.is_empty()) {
                None => None,
                Some(n) => Some(normalize_nick(n)?),
            },
            since: ts(since)?,
            until: ts(until)?,
        };
        if let (Some(a), Some(b)) = (filter.since, filter.until) {
            if a > b {
                return Err(StoreError::BadFilter("since is after until".into()));
            }
        }
        Ok(filter)
    }

    pub fn matches(&self, shout: &Shout) -> bool {
        self.nick.as_ref().is_none_or(|n| *n == shout.nick)
            && self.since.is_none_or(|t| shout.created >= t)
            && self.until.is_none_or(|t| shout.created <= t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ListFormat {
    Text,
    Json,
}

/// Listing entry exposed over the wire.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShoutView {
    pub id: ShoutId,
    pub nick: String,
    pub message: String,
    pub created: Timestamp,
    pub kind: String,
    pub tags: Vec<String>,
    pub source: Source,
}

impl From<&Shout> for ShoutView {
    fn from(s: &Shout) -> Self {
        ShoutView {
            id: s.id,
            nick: s.nick.clone(),
            message: s.message.clone(),
            created: s.created,
            kind: s.kind.label(),
            tags: s.tags.iter().map(|t| t.to_string()).collect(),
            source: s.source,
        }
    }
}

fn escape_field(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

/// One line per shout: `created<TAB>nick<TAB>message`, with backslash escapes
/// for tabs and line breaks inside the message.
pub fn render_text(views: &[ShoutView]) -> String {
    let mut out = String::new();
    for v in views {
        out.push_str(&v.created.to_rfc3339());
        out.push('\t');
        out.push_str(&escape_field(&v.nick));
        out.push('\t');
        out.push_str(&escape_field(&v.message));
        out.push('\n');
    }
    out
}

pub fn render_json(views: &[ShoutView]) -> String {
    serde_json::to_string(views).expect("views serialize")
}

/// Outcome of one dispatched message.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    Shout {
        id: ShoutId,
        #[serde(skip_serializing_if = "Option::is_none")]
        session: Option<SessionId>,
    },
    Started {
        id: ShoutId,
        session: SessionId,
        #[serde(skip_serializing_if = "Option::is_none")]
        replaced: Option<SessionId>,
    },
    Stopped {
        id: ShoutId,
        session: Box<Session>,
        /// Absent when the session holds no shouts.
        report: Option<ConformanceReport>,
        validator: Option<UserId>,
    },
    Pushed {
        ids: Vec<ShoutId>,
    },
    Query {
        topic: String,
        items: Vec<String>,
        code: &'static str,
    },
}

/// An offline-authored entry carried by a push.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PushItem {
    pub msg: String,
    #[serde(default)]
    pub client_created: Option<Timestamp>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub latest: Vec<ShoutView>,
    pub open_sessions: Vec<Session>,
    pub latest_reviews: Vec<ValidationReview>,
    pub per_user: BTreeMap<String, usize>,
}

pub struct Store<J: Journal> {
    journal: J,
    clock: Arc<dyn Clock>,
    config: StoreConfig,
    state: State,
}

impl<J: Journal> Store<J> {
    /// Opens a store, replaying every record already in the journal.
    pub fn open(
        mut journal: J,
        clock: Arc<dyn Clock>,
        config: StoreConfig,
    ) -> Result<Self, StoreError> {
        session::check_grid(config.slot_secs, config.tolerance_secs)?;
        let records = journal.load()?;
        let mut state = State::new(config.slot_secs);
        for record in &records {
            state.apply(record);
        }
        Ok(Store {
            journal,
            clock,
            config,
            state,
        })
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn config(&self) -> &StoreConfig {
        &self.config
    }

    pub fn journal(&self) -> &J {
        &self.journal
    }

    fn commit(&mut self, payloads: Vec<Payload>) -> Result<(), StoreError> {
        let written = self.clock.now();
        let first = self.state.next_seq();
        let records: Vec<JournalRecord> = payloads
            .into_iter()
            .enumerate()
            .map(|(i, payload)| JournalRecord {
                seq: first + i as u64,
                written,
                payload,
            })
            .collect();
        self.journal.append(&records)?;
        for record in &records {
            self.state.apply(record);
        }
        Ok(())
    }

    fn arrival(&self) -> Timestamp {
        self.clock.now().max(self.state.last_arrival)
    }

    fn build_shout(
        &self,
        nick: &str,
        message: &str,
        created: Timestamp,
        client_created: Option<Timestamp>,
        source: Source,
    ) -> Result<Shout, StoreError> {
        let nick = normalize_nick(nick)?;
        let parsed = parser::parse(message, &self.config.parser)?;
        let deviation = parser::flag_deviation(&parsed, &self.config.parser);
        Ok(Shout {
            id: ShoutId(self.state.next_seq()),
            nick,
            message: message.to_string(),
            created,
            client_created,
            source,
            kind: parsed.kind,
            tags: parsed.tags,
            session_ref: None,
            deviation,
        })
    }

    /// Stores a message as a plain record, without session semantics.
    pub fn receive_shout(&mut self, nick: &str, message: &str) -> Result<ShoutId, StoreError> {
        let mut shout = self.build_shout(nick, message, self.arrival(), None, Source::Http)?;
        shout.session_ref = self.state.open.get(&UserId(shout.nick.clone())).cloned();
        if matches!(shout.kind, MessageKind::Start | MessageKind::Stop) {
            shout.session_ref = None;
        }
        let id = shout.id;
        self.commit(vec![Payload::Shout(shout)])?;
        Ok(id)
    }

    /// Dispatches a message on its kind.
    pub fn receive_message(
        &mut self,
        nick: &str,
        message: &str,
        client_created: Option<Timestamp>,
        source: Source,
    ) -> Result<Action, StoreError> {
        let shout = self.build_shout(nick, message, self.arrival(), client_created, source)?;
        self.dispatch(shout)
    }

    fn dispatch(&mut self, mut shout: Shout) -> Result<Action, StoreError> {
        let user = UserId(shout.nick.clone());
        let id = shout.id;
        match shout.kind.clone() {
            MessageKind::Start => {
                // A nested start closes the previous session as it stood.
                let replaced = self.state.open.get(&user).cloned();
                let sid = SessionId(format!("session-{id}"));
                shout.session_ref = Some(sid.clone());
                self.commit(vec![Payload::Shout(shout)])?;
                Ok(Action::Started {
                    id,
                    session: sid,
                    replaced,
                })
            }
            MessageKind::Stop => {
                let sid = self
                    .state
                    .open
                    .get(&user)
                    .cloned()
                    .ok_or_else(|| StoreError::NoOpenSession(user.0.clone()))?;
                shout.session_ref = Some(sid.clone());
                let seed = shout.created.secs() as u64 ^ id.0.rotate_left(32);
                self.commit(vec![Payload::Shout(shout)])?;
                let session = self
                    .state
                    .session(&sid)
                    .expect("open session exists")
                    .clone();
                let members = self.state.members(&session);
                let report =
                    match session::conformance(&session, &members, self.config.tolerance_secs) {
                        Ok(r) => Some(r),
                        Err(SessionError::EmptySession) => None,
                        Err(e) => return Err(e.into()),
                    };
                let users = self.state.users();
                let validator = session::assign_validator(&session, &users, seed)
                    .ok()
                    .map(|u| u.id.clone());
                Ok(Action::Stopped {
                    id,
                    session: Box::new(session),
                    report,
                    validator,
                })
            }
            MessageKind::Push => Ok(Action::Pushed { ids: Vec::new() }),
            MessageKind::Query(topic) => Ok(Action::Query {
                topic,
                items: Vec::new(),
                code: "not_implemented",
            }),
            MessageKind::Shout | MessageKind::LostTimeslot => {
                shout.session_ref = self.state.open.get(&user).cloned();
                let session = shout.session_ref.clone();
                self.commit(vec![Payload::Shout(shout)])?;
                Ok(Action::Shout { id, session })
            }
        }
    }

    /// Stores a batch of offline-authored entries in order.
    ///
    /// Entries are dispatched one by one; on error the entries before it stay
    /// stored and the error is returned with their ids.
    pub fn push(
        &mut self,
        nick: &str,
        items: &[PushItem],
    ) -> Result<Vec<ShoutId>, (Vec<ShoutId>, StoreError)> {
        let mut ids = Vec::new();
        for item in items {
            let action = self
                .receive_message(nick, &item.msg, item.client_created, Source::Http)
                .map_err(|e| (ids.clone(), e))?;
            match action {
                Action::Shout { id, .. }
                | Action::Started { id, .. }
                | Action::Stopped { id, .. } => ids.push(id),
                Action::Pushed { .. } | Action::Query { .. } => {}
            }
        }
        Ok(ids)
    }

    pub fn attach_screencast(
        &mut self,
        session: &SessionId,
        url: &str,
    ) -> Result<Session, StoreError> {
        let parsed =
            url::Url::parse(url.trim()).map_err(|_| StoreError::BadUrl(url.to_string()))?;
        if !matches!(parsed.scheme(), "http" | "https") || parsed.host().is_none() {
            return Err(StoreError::BadUrl(url.to_string()));
        }
        let mut updated = self
            .state
            .session(session)
            .cloned()
            .ok_or_else(|| StoreError::UnknownSession(session.0.clone()))?;
        updated.screencast = Some(url.trim().to_string());
        self.commit(vec![Payload::Session(updated.clone())])?;
        Ok(updated)
    }

    /// Records a peer review, replacing any earlier review of the session.
    pub fn record_review(
        &mut self,
        session: &SessionId,
        reviewer: &str,
        score: f64,
        comment: Option<String>,
    ) -> Result<ValidationReview, StoreError> {
        let reviewer = UserId(normalize_nick(reviewer)?);
        let target = self
            .state
            .session(session)
            .ok_or_else(|| StoreError::UnknownSession(session.0.clone()))?;
        let review = session::record_review(target, &reviewer, score, comment, self.clock.now())?;
        self.commit(vec![Payload::Review(review.clone())])?;
        Ok(review)
    }

    /// Conformance of a session, treating an open session as ending now.
    pub fn conformance(&self, session: &SessionId) -> Result<ConformanceReport, StoreError> {
        let s = self.live_view(session)?;
        let members = self.state.members(&s);
        Ok(session::conformance(
            &s,
            &members,
            self.config.tolerance_secs,
        )?)
    }

    fn live_view(&self, session: &SessionId) -> Result<Session, StoreError> {
        let mut s = self
            .state
            .session(session)
            .cloned()
            .ok_or_else(|| StoreError::UnknownSession(session.0.clone()))?;
        if s.open {
            s.end = s.end.max(self.clock.now());
        }
        Ok(s)
    }

    /// Writes the machine marker for an empty slot of a session.
    pub fn emit_lost_timeslot(
        &mut self,
        session: &SessionId,
        slot: u64,
    ) -> Result<Shout, StoreError> {
        let s = self.live_view(session)?;
        let members = self.state.members(&s);
        let lost = session::emit_lost_timeslot(
            &s,
            &members,
            self.config.tolerance_secs,
            slot,
            ShoutId(self.state.next_seq()),
        )?;
        self.commit(vec![Payload::Shout(lost.clone())])?;
        Ok(lost)
    }

    /// Appends mined shouts as one staged batch; nothing becomes visible on failure.
    pub fn import(
        &mut self,
        mined: Vec<(String, String, Timestamp)>,
    ) -> Result<Vec<ShoutId>, StoreError> {
        let mut payloads = Vec::with_capacity(mined.len());
        let first = self.state.next_seq();
        for (i, (nick, message, created)) in mined.into_iter().enumerate() {
            let mut shout = self.build_shout(&nick, &message, created, None, Source::Mined)?;
            shout.id = ShoutId(first + i as u64);
            payloads.push(Payload::Shout(shout));
        }
        let ids = (0..payloads.len() as u64)
            .map(|i| ShoutId(first + i))
            .collect();
        self.commit(payloads)?;
        Ok(ids)
    }

    pub fn list_shouts(&self, filter: &ShoutFilter) -> Vec<ShoutView> {
        self.state
            .shouts_by_created()
            .into_iter()
            .filter(|s| filter.matches(s))
            .map(ShoutView::from)
            .collect()
    }

    pub fn render_listing(&self, format: ListFormat, filter: &ShoutFilter) -> String {
        let views = self.list_shouts(filter);
        match format {
            ListFormat::Text => render_text(&views),
            ListFormat::Json => render_json(&views),
        }
    }

    pub fn report(&self, n: Option<usize>) -> Report {
        let n = n.unwrap_or(self.config.report_n);
        let mut latest: Vec<&Shout> = self.state.shouts.values().collect();
        latest.sort_by_key(|s| std::cmp::Reverse((s.created, s.id)));
        let mut reviews: Vec<ValidationReview> = self
            .state
            .sessions
            .values()
            .filter_map(|s| s.review.clone())
            .collect();
        reviews.sort_by(|a, b| b.created.cmp(&a.created).then(b.session.cmp(&a.session)));
        reviews.truncate(n);
        let mut per_user = BTreeMap::new();
        for s in self.state.shouts.values() {
            *per_user.entry(s.nick.clone()).or_insert(0) += 1;
        }
        Report {
            latest: latest.into_iter().take(n).map(ShoutView::from).collect(),
            open_sessions: self
                .state
                .open
                .values()
                .filter_map(|id| self.state.sessions.get(id).cloned())
                .collect(),
            latest_reviews: reviews,
            per_user,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::journal::{FileJournal, MemoryJournal};

    const NOON: i64 = 1_700_049_600;

    fn store() -> (Store<MemoryJournal>, ManualClock) {
        let clock = ManualClock::new(Timestamp::from_secs(NOON));
        let store = Store::open(
            MemoryJournal::default(),
            Arc::new(clock.clone()),
            StoreConfig::default(),
        )
        .unwrap();
        (store, clock)
    }

    #[test]
    fn receive_shout_parses_and_stamps() {
        let (mut store, _) = store();
        let id = store
            .receive_shout("Bob", "slot grid done #coding")
            .unwrap();
        let shout = store.state().shout(id).unwrap();
        assert_eq!(shout.nick, "bob");
        assert_eq!(shout.kind, MessageKind::Shout);
        assert_eq!(shout.tags[0].to_string(), "#coding");
        assert_eq!(shout.created, Timestamp::from_secs(NOON));
        assert!(matches!(
            store.receive_shout("", "x"),
            Err(StoreError::EmptyNick)
        ));
        assert!(matches!(
            store.receive_shout("bob", "  "),
            Err(StoreError::EmptyMessage)
        ));
    }

    #[test]
    fn duplicates_are_kept_at_ingest() {
        let (mut store, clock) = store();
        let a = store.receive_shout("bob", "same").unwrap();
        clock.advance(10);
        let b = store.receive_shout("bob", "same").unwrap();
        assert_ne!(a, b);
        assert_eq!(store.list_shouts(&ShoutFilter::default()).len(), 2);
    }

    #[test]
    fn arrival_never_goes_backwards() {
        let (mut store, clock) = store();
        store.receive_shout("bob", "one").unwrap();
        clock.advance(-100);
        let id = store.receive_shout("bob", "two").unwrap();
        assert_eq!(
            store.state().shout(id).unwrap().created,
            Timestamp::from_secs(NOON)
        );
    }

    #[test]
    fn listing_formats_and_filters() {
        let (mut store, clock) = store();
        assert_eq!(
            store.render_listing(ListFormat::Json, &ShoutFilter::default()),
            "[]"
        );
        store.receive_shout("bob", "first").unwrap();
        clock.advance(60);
        store.receive_shout("alice", "second\twith tab").unwrap();
        clock.advance(60);
        store.receive_shout("bob", "third").unwrap();
        let text = store.render_listing(ListFormat::Text, &ShoutFilter::default());
        assert_eq!(
            text,
            "2023-11-15T12:00:00Z\tbob\tfirst\n\
             2023-11-15T12:01:00Z\talice\tsecond\\twith tab\n\
             2023-11-15T12:02:00Z\tbob\tthird\n"
        );
        let bob = ShoutFilter::parse(Some("BOB"), None, None).unwrap();
        assert_eq!(store.list_shouts(&bob).len(), 2);
        let window = ShoutFilter::parse(
            None,
            Some("2023-11-15T12:01:00Z"),
            Some("2023-11-15T12:01:30Z"),
        )
        .unwrap();
        assert_eq!(store.list_shouts(&window).len(), 1);
        assert!(matches!(
            ShoutFilter::parse(None, Some("nope"), None),
            Err(StoreError::BadFilter(_))
        ));
        assert!(matches!(
            ShoutFilter::parse(
                None,
                Some("2023-11-15T13:00:00Z"),
                Some("2023-11-15T12:00:00Z")
            ),
            Err(StoreError::BadFilter(_))
        ));
        let json = store.render_listing(ListFormat::Json, &ShoutFilter::default());
        let views: Vec<ShoutView> = serde_json::from_str(&json).unwrap();
        assert_eq!(render_text(&views), text);
    }

    #[test]
    fn start_shout_stop_cycle() {
        let (mut store, clock) = store();
        store.receive_shout("alice", "hi all").unwrap();
        let Action::Started { session, .. } = store
            .receive_message("bob", "start", None, Source::Http)
            .unwrap()
        else {
            panic!("expected start");
        };
        for i in 0..8 {
            if i > 0 {
                clock.advance(15 * 60);
            }
            store
                .receive_message("bob", &format!("step {i} #coding"), None, Source::Http)
                .unwrap();
        }
        clock.advance(30);
        let action = store
            .receive_message("bob", "stop", None, Source::Http)
            .unwrap();
        let Action::Stopped {
            session: s,
            report,
            validator,
            ..
        } = action
        else {
            panic!("expected stop");
        };
        assert_eq!(s.id, session);
        assert!(!s.open);
        assert_eq!(s.shouts.len(), 8);
        assert!(report.unwrap().ideal);
        assert_eq!(validator, Some(UserId("alice".into())));
        assert!(matches!(
            store.receive_message("bob", "stop", None, Source::Http),
            Err(StoreError::NoOpenSession(_))
        ));
    }

    #[test]
    fn stop_without_shouts_has_no_report() {
        let (mut store, clock) = store();
        store
            .receive_message("bob", "start", None, Source::Http)
            .unwrap();
        clock.advance(1);
        let Action::Stopped {
            report, validator, ..
        } = store
            .receive_message("bob", "stop", None, Source::Http)
            .unwrap()
        else {
            panic!()
        };
        assert!(report.is_none());
        assert!(validator.is_none());
    }

    #[test]
    fn nested_start_replaces_open_session() {
        let (mut store, clock) = store();
        let Action::Started { session: first, .. } = store
            .receive_message("bob", "start", None, Source::Http)
            .unwrap()
        else {
            panic!()
        };
        clock.advance(60);
        store
            .receive_message("bob", "doing x", None, Source::Http)
            .unwrap();
        clock.advance(60);
        let Action::Started {
            session: second,
            replaced,
            ..
        } = store
            .receive_message("bob", "start again", None, Source::Http)
            .unwrap()
        else {
            panic!()
        };
        assert_eq!(replaced, Some(first.clone()));
        assert!(!store.state().session(&first).unwrap().open);
        assert_eq!(store.state().session(&first).unwrap().shouts.len(), 1);
        let open = store.state().open_session(&UserId("bob".into())).unwrap();
        assert_eq!(open.id, second);
        assert_eq!(open.start, Timestamp::from_secs(NOON + 120));
    }

    #[test]
    fn query_is_a_stub_and_not_journaled() {
        let (mut store, _) = store();
        let action = store
            .receive_message("bob", "tickets", None, Source::Http)
            .unwrap();
        assert!(matches!(action, Action::Query { ref topic, .. } if topic == "tickets"));
        assert!(store.journal().records.is_empty());
    }

    #[test]
    fn screencast_and_review() {
        let (mut store, clock) = store();
        let Action::Started { session, .. } = store
            .receive_message("bob", "start", None, Source::Http)
            .unwrap()
        else {
            panic!()
        };
        store
            .attach_screencast(&session, "https://v.example/abc")
            .unwrap();
        store
            .attach_screencast(&session, "https://v.example/def")
            .unwrap();
        assert_eq!(
            store
                .state()
                .session(&session)
                .unwrap()
                .screencast
                .as_deref(),
            Some("https://v.example/def")
        );
        let sc_records = store
            .journal()
            .records
            .iter()
            .filter(|r| matches!(r.payload, Payload::Session(_)))
            .count();
        assert_eq!(sc_records, 2);
        assert!(matches!(
            store.attach_screencast(&SessionId("nope".into()), "https://v.example/x"),
            Err(StoreError::UnknownSession(_))
        ));
        assert!(matches!(
            store.attach_screencast(&session, "not a url"),
            Err(StoreError::BadUrl(_))
        ));

        clock.advance(60);
        store.record_review(&session, "alice", 0.9, None).unwrap();
        let e = store.record_review(&session, "bob", 0.5, None).unwrap_err();
        assert_eq!(e.code(), "self_review");
        let e = store
            .record_review(&session, "alice", 1.2, None)
            .unwrap_err();
        assert_eq!(e.code(), "score_out_of_range");
        store
            .record_review(&session, "carol", 0.4, Some("short".into()))
            .unwrap();
        let review = store
            .state()
            .session(&session)
            .unwrap()
            .review
            .clone()
            .unwrap();
        assert_eq!(review.reviewer.0, "carol");
        assert_eq!(store.state().review_records(), 2);
    }

    #[test]
    fn lost_timeslot_through_store() {
        let (mut store, clock) = store();
        let Action::Started { session, .. } = store
            .receive_message("bob", "start", None, Source::Http)
            .unwrap()
        else {
            panic!()
        };
        store
            .receive_message("bob", "slot zero", None, Source::Http)
            .unwrap();
        clock.advance(15 * 60);
        store
            .receive_message("bob", "slot one", None, Source::Http)
            .unwrap();
        clock.advance(15 * 60 + 301);
        let lost = store.emit_lost_timeslot(&session, 2).unwrap();
        assert_eq!(lost.created, Timestamp::from_secs(NOON + 30 * 60));
        assert!(matches!(
            store.emit_lost_timeslot(&session, 2),
            Err(StoreError::Session(SessionError::NotLost(2)))
        ));
        assert!(matches!(
            store.emit_lost_timeslot(&session, 1),
            Err(StoreError::Session(SessionError::NotLost(1)))
        ));
        let s = store.state().session(&session).unwrap();
        assert_eq!(s.shouts.len(), 3);
    }

    #[test]
    fn journal_failure_leaves_state_untouched() {
        let clock = ManualClock::new(Timestamp::from_secs(NOON));
        let journal = MemoryJournal {
            capacity: Some(1),
            ..Default::default()
        };
        let mut store = Store::open(journal, Arc::new(clock), StoreConfig::default()).unwrap();
        store.receive_shout("bob", "one").unwrap();
        let before = store.state().clone();
        let err = store.receive_shout("bob", "two").unwrap_err();
        assert!(!err.is_client_error());
        assert_eq!(store.state(), &before);
    }

    #[test]
    fn report_shape() {
        let (mut store, clock) = store();
        let r = store.report(None);
        assert!(r.latest.is_empty() && r.open_sessions.is_empty() && r.per_user.is_empty());
        for i in 0..5 {
            clock.advance(10);
            store.receive_shout("bob", &format!("m{i}")).unwrap();
        }
        assert_eq!(store.report(None).latest.len(), 5);
        let two = store.report(Some(2));
        let msgs: Vec<&str> = two.latest.iter().map(|v| v.message.as_str()).collect();
        assert_eq!(msgs, vec!["m4", "m3"]);
        assert_eq!(two.per_user["bob"], 5);
    }

    #[test]
    fn replay_rebuilds_state() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("j.jsonl");
        let clock = ManualClock::new(Timestamp::from_secs(NOON));
        let mut store = Store::open(
            FileJournal::new(&path),
            Arc::new(clock.clone()),
            StoreConfig::default(),
        )
        .unwrap();
        store
            .receive_message("bob", "start", None, Source::Http)
            .unwrap();
        clock.advance(900);
        store
            .receive_message("bob", "writing +rust", None, Source::Http)
            .unwrap();
        store.receive_shout("alice", "hello").unwrap();
        clock.advance(900);
        store
            .receive_message("bob", "stop", None, Source::Http)
            .unwrap();
        let sid = SessionId("session-1".into());
        store.record_review(&sid, "alice", 0.7, None).unwrap();
        store
            .attach_screencast(&sid, "https://v.example/s")
            .unwrap();
        let reopened = Store::open(
            FileJournal::new(&path),
            Arc::new(clock),
            StoreConfig::default(),
        )
        .unwrap();
        assert_eq!(reopened.state(), store.state());
    }
}
