//! Shared report vocabulary.

use serde::{Deserialize, Serialize};

use crate::error::MflabError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    /// Combines verdicts: any failure fails, otherwise any inconclusive is inconclusive.
    pub fn and(self, other: Status) -> Status {
        match (self, other) {
            (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
            (Status::Inconclusive, _) | (_, Status::Inconclusive) => Status::Inconclusive,
            _ => Status::Pass,
        }
    }

    pub fn all(items: impl IntoIterator<Item = Status>) -> Status {
        items.into_iter().fold(Status::Pass, Status::and)
    }

    /// Maps certification errors to `Inconclusive`; other errors propagate.
    pub fn from_error(e: &MflabError) -> Option<Status> {
        match e {
            MflabError::Inconclusive(_)
            | MflabError::NotStabilized { .. }
            | MflabError::PrecisionTooLow { .. }
            | MflabError::WindowExceeded { .. }
            | MflabError::InfiniteLength(_) => Some(Status::Inconclusive),
            MflabError::Failed(_) => Some(Status::Fail),
            _ => None,
        }
    }
}
