//! Raw per-shot measurement records. One JSONL line per shot; replayable
//! bit-exactly from the stored seed.

use serde::{Deserialize, Serialize};

use crate::circuit::{QubitId, Site};

/// Three-valued MCM outcome.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasValue {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "LOST")]
    Lost,
}

impl MeasValue {
    pub fn from_bit(b: bool) -> Self {
        if b {
            MeasValue::One
        } else {
            MeasValue::Zero
        }
    }

    pub fn bit(self) -> Option<bool> {
        match self {
            MeasValue::Zero => Some(false),
            MeasValue::One => Some(true),
            MeasValue::Lost => None,
        }
    }

    pub fn is_lost(self) -> bool {
        self == MeasValue::Lost
    }
}

/// One recorded MCM outcome.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McmOutcome {
    pub op_index: u32,
    /// Herald attempt this outcome belongs to (0 outside/before a loop).
    pub attempt: u32,
    pub qubit: QubitId,
    pub cycle: Option<u32>,
    pub value: MeasValue,
}

/// Resolution of one conditional-fill move.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillEvent {
    pub op_index: u32,
    pub attempt: u32,
    pub qubit: QubitId,
    pub dst: Site,
    pub success: bool,
}

/// Herald bookkeeping for one loop attempt.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub index: u32,
    pub herald_pass: bool,
}

/// Full raw record of one shot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub seed: u64,
    pub outcomes: Vec<McmOutcome>,
    /// Last recorded measurement per qubit slot (None if never measured).
    pub final_measurements: Vec<Option<MeasValue>>,
    pub fills_performed: Vec<FillEvent>,
    /// Present only for heralded circuits.
    pub attempts: Vec<AttemptRecord>,
    /// True when the retry budget ran out without a herald pass.
    pub herald_exhausted: bool,
}

impl ShotRecord {
    /// Retries used = successful-exit attempt count − 1 (or the full budget
    /// if exhausted).
    pub fn retries(&self) -> u32 {
        (self.attempts.len() as u32).saturating_sub(1)
    }

    /// Outcome recorded for `(qubit, cycle_tag)`, searching a specific
    /// attempt (herald circuits measure the same tag once per attempt).
    pub fn outcome_at(&self, qubit: QubitId, cycle: u32, attempt: u32) -> Option<MeasValue> {
        self.outcomes
            .iter()
            .find(|o| o.qubit == qubit && o.cycle == Some(cycle) && o.attempt == attempt)
            .map(|o| o.value)
    }
}
