//! Algorithmic Autoregulation: shouts, sessions, the journaled store, log
//! mining, RDF export and statistics.

pub mod config;
pub mod journal;
pub mod miner;
pub mod model;
pub mod parser;
pub mod rdf;
pub mod session;
pub mod stats;
pub mod store;

pub use config::SuiteConfig;
pub use journal::{FileJournal, Journal, JournalError, JournalRecord, MemoryJournal, Payload};
pub use model::{
    DeviationKind, MessageKind, Score, Session, SessionId, SessionOrigin, Shout, ShoutId, Source,
    Tag, TagForm, TagScope, Timestamp, User, UserId, ValidationReview,
};
pub use parser::{parse, ParseResult, ParserConfig};
pub use session::{ConformanceReport, SessionError, SlotGrid};
pub use store::{
    Action, Clock, ListFormat, ManualClock, PushItem, Report, ShoutFilter, Snapshot, State, Store,
    StoreConfig, StoreError, SystemClock,
};
