//! Affect engine for a conversational tourist concierge.
//!
//! Utterances arrive as case frames ([`case_frame`]). Each term is looked up
//! in the favorite-value lexicon ([`fv_store`]), the event is placed in a
//! three-axis emotion space ([`egc`]), and the resulting valence and
//! intensity are turned into named emotions and nine group strengths
//! ([`elicitation`]). The group strengths drive a seven-state mental state
//! machine that learns its transition costs ([`mstn`]) and a smoothed
//! feeling profile used to rank sightseeing spots ([`recommend`]).
//! [`session`] ties the stages together per user.

pub mod case_frame;
pub mod config;
pub mod egc;
pub mod elicitation;
pub mod fixtures;
pub mod fv_store;
pub mod mstn;
pub mod recommend;
pub mod session;
pub mod trace;

use thiserror::Error;

pub use case_frame::{parse_case_frame, CaseFrame, CaseFrameError, EventSignature, SlotRole};
pub use config::EngineConfig;
pub use egc::{egc_evaluate, AxisAssignment, EgcConfig, EgcResult, Valence};
pub use elicitation::{ContextError, ElicitationContext, EmotionInstance, EmotionType, GroupVector};
pub use fv_store::{FavoriteValue, FvDatabase, FvError, FvStore, Layer};
pub use mstn::{MentalState, MstnError, StateMachine, TransitionModel, TransitionTable};
pub use recommend::{rank_spots, FeelingVector6, GeoPoint, RankedSpot, RecommendError, SpotCatalog, UserAffectProfile};
pub use session::{Engine, Session, TurnInput, TurnReport};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    CaseFrame(#[from] CaseFrameError),
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error(transparent)]
    Mstn(#[from] MstnError),
    #[error(transparent)]
    Recommend(#[from] RecommendError),
    #[error(transparent)]
    Fv(#[from] FvError),
    #[error("configuration: {0}")]
    Config(String),
    #[error("session: {0}")]
    Session(String),
    #[error("replay diverged at turn {turn}: {msg}")]
    Replay { turn: usize, msg: String },
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable code, used in HTTP error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            Error::CaseFrame(CaseFrameError::UnknownSignature(_)) => "unknown_signature",
            Error::CaseFrame(_) => "bad_case_frame",
            Error::Context(_) => "context_error",
            Error::Mstn(_) => "transition_error",
            Error::Recommend(RecommendError::MissingLocation) => "missing_location",
            Error::Recommend(RecommendError::Range { .. }) => "out_of_range",
            Error::Recommend(_) => "recommend_error",
            Error::Fv(FvError::Range(_)) => "out_of_range",
            Error::Fv(_) => "fv_error",
            Error::Config(_) => "config_error",
            Error::Session(_) => "bad_request",
            Error::Replay { .. } => "replay_diverged",
            Error::UnknownSession(_) => "unknown_session",
            Error::Json(_) => "bad_json",
            Error::Io(_) => "io_error",
        }
    }

    /// True when the error was caused by the caller's input rather than the
    /// server's state.
    pub fn is_client_error(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Replay { .. } | Error::Config(_))
    }
}
