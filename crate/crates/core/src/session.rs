//! Slot grid, session assembly, lost timeslots and peer validation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    MessageKind, Score, Session, SessionId, SessionOrigin, Shout, ShoutId, Source, Tag, TagScope,
    Timestamp, User, UserId, ValidationReview, DEFAULT_SLOT_SECS, DEFAULT_TOLERANCE_SECS,
    IDEAL_SHOUT_COUNT, IDEAL_SPAN_SECS,
};

pub const DEFAULT_GAP_SECS: i64 = 30 * 60;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("slot must be positive and tolerance below half a slot (slot {slot}s, tolerance {tolerance}s)")]
    BadGrid { slot: i64, tolerance: i64 },
    #[error("timestamp precedes the grid anchor by more than the tolerance")]
    BeforeAnchor,
    #[error("session has no shouts")]
    EmptySession,
    #[error("slot {0} is not lost")]
    NotLost(u64),
    #[error("shouts belong to more than one user")]
    MixedUsers,
    #[error("shouts are not ordered by creation time")]
    Unordered,
    #[error("no user other than the session owner can validate")]
    NoEligibleValidator,
    #[error("a session cannot be reviewed by its owner")]
    SelfReview,
    #[error("score {0} is outside [0, 1]")]
    ScoreOutOfRange(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotGrid {
    anchor: Timestamp,
    slot_secs: i64,
    tolerance_secs: i64,
}

impl SlotGrid {
    pub fn new(
        anchor: Timestamp,
        slot_secs: i64,
        tolerance_secs: i64,
    ) -> Result<Self, SessionError> {
        check_grid(slot_secs, tolerance_secs)?;
        Ok(SlotGrid {
            anchor,
            slot_secs,
            tolerance_secs,
        })
    }

    pub fn with_defaults(anchor: Timestamp) -> Self {
        SlotGrid {
            anchor,
            slot_secs: DEFAULT_SLOT_SECS,
            tolerance_secs: DEFAULT_TOLERANCE_SECS,
        }
    }

    pub fn anchor(&self) -> Timestamp {
        self.anchor
    }

    pub fn slot_secs(&self) -> i64 {
        self.slot_secs
    }

    pub fn tolerance_secs(&self) -> i64 {
        self.tolerance_secs
    }

    pub fn slot_time(&self, index: u64) -> Timestamp {
        self.anchor.plus_secs(index as i64 * self.slot_secs)
    }
}

/// Grid parameters must leave every timestamp with one candidate slot.
pub fn check_grid(slot_secs: i64, tolerance_secs: i64) -> Result<(), SessionError> {
    if slot_secs <= 0 || tolerance_secs < 0 || 2 * tolerance_secs >= slot_secs {
        return Err(SessionError::BadGrid {
            slot: slot_secs,
            tolerance: tolerance_secs,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotAssignment {
    pub index: u64,
    pub offset_secs: i64,
    pub within_tolerance: bool,
}

/// Nearest grid mark to `t`, so the tolerance window is symmetric.
pub fn assign_slot(grid: &SlotGrid, t: Timestamp) -> Result<SlotAssignment, SessionError> {
    let elapsed = t.secs() - grid.anchor.secs();
    if elapsed < -grid.tolerance_secs {
        return Err(SessionError::BeforeAnchor);
    }
    let index = (elapsed + grid.slot_secs / 2)
        .div_euclid(grid.slot_secs)
        .max(0);
    let offset_secs = elapsed - index * grid.slot_secs;
    Ok(SlotAssignment {
        index: index as u64,
        offset_secs,
        within_tolerance: offset_secs.abs() <= grid.tolerance_secs,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShoutSlot {
    pub shout: ShoutId,
    pub slot: u64,
    pub offset_secs: i64,
    pub within_tolerance: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConformanceReport {
    pub per_shout: Vec<ShoutSlot>,
    pub lost_slots: Vec<u64>,
    pub ideal: bool,
}

/// Checks a session against its slot grid.
///
/// `members` are the session's shouts in session order. Lost-timeslot markers
/// never fill a slot. Slots `0..=floor((end - start) / slot)` are expected.
pub fn conformance(
    session: &Session,
    members: &[&Shout],
    tolerance_secs: i64,
) -> Result<ConformanceReport, SessionError> {
    let grid = SlotGrid::new(session.start, session.slot_secs, tolerance_secs)?;
    let real: Vec<&&Shout> = members
        .iter()
        .filter(|s| s.kind != MessageKind::LostTimeslot)
        .collect();
    if real.is_empty() {
        return Err(SessionError::EmptySession);
    }
    let mut per_shout = Vec::with_capacity(real.len());
    for shout in &real {
        let a = assign_slot(&grid, shout.created)?;
        per_shout.push(ShoutSlot {
            shout: shout.id,
            slot: a.index,
            offset_secs: a.offset_secs,
            within_tolerance: a.within_tolerance,
        });
    }
    let span = session.end.secs() - session.start.secs();
    let last_slot = span.max(0) / session.slot_secs;
    let lost_slots: Vec<u64> = (0..=last_slot as u64)
        .filter(|i| !per_shout.iter().any(|p| p.slot == *i))
        .collect();
    let ideal = lost_slots.is_empty()
        && per_shout.iter().all(|p| p.within_tolerance)
        && per_shout.len() == IDEAL_SHOUT_COUNT
        && span <= IDEAL_SPAN_SECS;
    Ok(ConformanceReport {
        per_shout,
        lost_slots,
        ideal,
    })
}

/// Builds the machine marker for an empty slot.
///
/// Fails with `NotLost` when the slot is filled or outside the session, or
/// when a marker for it already exists among `members`.
pub fn emit_lost_timeslot(
    session: &Session,
    members: &[&Shout],
    tolerance_secs: i64,
    slot_index: u64,
    id: ShoutId,
) -> Result<Shout, SessionError> {
    let grid = SlotGrid::new(session.start, session.slot_secs, tolerance_secs)?;
    let report = match conformance(session, members, tolerance_secs) {
        Ok(report) => report,
        // Every slot of a session without shouts is lost.
        Err(SessionError::EmptySession) => ConformanceReport {
            per_shout: Vec::new(),
            lost_slots: (0..=((session.end.secs() - session.start.secs()).max(0)
                / session.slot_secs) as u64)
                .collect(),
            ideal: false,
        },
        Err(e) => return Err(e),
    };
    if !report.lost_slots.contains(&slot_index) {
        return Err(SessionError::NotLost(slot_index));
    }
    let created = grid.slot_time(slot_index);
    let already = members
        .iter()
        .any(|s| s.kind == MessageKind::LostTimeslot && s.created == created);
    if already {
        return Err(SessionError::NotLost(slot_index));
    }
    Ok(Shout {
        id,
        nick: session.user.0.clone(),
        message: format!("lost timeslot {slot_index}"),
        created,
        client_created: None,
        source: Source::Http,
        kind: MessageKind::LostTimeslot,
        tags: Vec::new(),
        session_ref: Some(session.id.clone()),
        deviation: None,
    })
}

/// Groups one user's time-ordered shouts into contiguous runs.
///
/// A new run starts whenever the gap to the previous shout exceeds
/// `gap_secs`.
pub fn infer_sessions(
    shouts: &[Shout],
    gap_secs: i64,
    slot_secs: i64,
) -> Result<Vec<Session>, SessionError> {
    let Some(first) = shouts.first() else {
        return Ok(Vec::new());
    };
    if shouts.iter().any(|s| s.nick != first.nick) {
        return Err(SessionError::MixedUsers);
    }
    if shouts.windows(2).any(|w| w[1].created < w[0].created) {
        return Err(SessionError::Unordered);
    }
    let mut sessions: Vec<Session> = Vec::new();
    let mut prev: Option<&Shout> = None;
    for shout in shouts {
        let split = prev.is_none_or(|p| shout.created.secs() - p.created.secs() > gap_secs);
        if split {
            sessions.push(Session {
                id: SessionId(format!("inferred-{}-{}", shout.nick, shout.id)),
                user: UserId(shout.nick.clone()),
                origin: SessionOrigin::Inferred,
                start: shout.created,
                end: shout.created,
                slot_secs,
                shouts: Vec::new(),
                screencast: None,
                review: None,
                open: false,
            });
        }
        let current = sessions.last_mut().expect("session pushed above");
        current.end = shout.created;
        current.shouts.push(shout.id);
        prev = Some(shout);
    }
    Ok(sessions)
}

/// Seeded uniform choice of a validator other than the session owner.
pub fn assign_validator<'a>(
    session: &Session,
    users: &'a [User],
    seed: u64,
) -> Result<&'a User, SessionError> {
    let eligible: Vec<&User> = users.iter().filter(|u| u.id != session.user).collect();
    if eligible.is_empty() {
        return Err(SessionError::NoEligibleValidator);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(eligible[rng.random_range(0..eligible.len())])
}

/// Validates and builds a review; replacement is up to the store.
pub fn record_review(
    session: &Session,
    reviewer: &UserId,
    score: f64,
    comment: Option<String>,
    created: Timestamp,
) -> Result<ValidationReview, SessionError> {
    if *reviewer == session.user {
        return Err(SessionError::SelfReview);
    }
    let score = Score::new(score).map_err(|_| SessionError::ScoreOutOfRange(score))?;
    Ok(ValidationReview {
        session: session.id.clone(),
        reviewer: reviewer.clone(),
        score,
        comment,
        created,
    })
}

fn attach(shout: &mut Shout, tag: &Tag) {
    if !shout.tags.iter().any(|t| t.form == tag.form) {
        shout.tags.push(tag.clone());
    }
}

/// Spreads session-wide and carry-forward word tags over member shouts.
///
/// `members` must be in session order. Tags passed with `Session` scope land
/// on every member. `UntilNextTag` tags, whether passed in or carried by a
/// member, cover each following member until one carries its own word tag.
/// Scope never crosses the session boundary.
pub fn apply_session_tags(members: &[Shout], tags: &[Tag]) -> Vec<Shout> {
    let mut out = members.to_vec();
    let mut active: Vec<Tag> = tags
        .iter()
        .filter(|t| t.scope == TagScope::UntilNextTag)
        .cloned()
        .collect();
    for shout in &mut out {
        let own: Vec<Tag> = shout
            .tags
            .iter()
            .filter(|t| t.is_word() && t.scope == TagScope::UntilNextTag)
            .cloned()
            .collect();
        if own.is_empty() {
            for tag in &active {
                attach(shout, tag);
            }
        } else {
            active = own;
        }
        for tag in tags.iter().filter(|t| t.scope == TagScope::Session) {
            attach(shout, tag);
        }
    }
    out
}
