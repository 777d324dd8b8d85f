//! Practice module: drag-drop adjudication between the bin and the assembly.
//!
//! Installation drags parts out of the bin onto the assembly; removal drags
//! them off the assembly into the bin. Either way the parts must move in
//! procedure order. A wrong part raises a modal [`Alert`] and nothing moves
//! until the alert is acknowledged and the right part is tried.
//!
//! Only part identity is checked. Tools and torque are not part of practice.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Direction, PartNumber, Procedure, ProcedureId};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PracticeError {
    #[error("procedure has no steps")]
    EmptyProcedure,
    #[error("practice is already complete")]
    SessionComplete,
    #[error("acknowledge the alert before trying another part")]
    AlertPending,
    #[error("part {0} cannot be moved now")]
    PartNotMovable(PartNumber),
    #[error("there is no alert to acknowledge")]
    NoAlert,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alert {
    pub message: String,
    pub offending_part: PartNumber,
    pub expected_part: PartNumber,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum AttemptOutcome {
    Accepted,
    Rejected { alert: Alert },
}

impl AttemptOutcome {
    pub fn is_accepted(&self) -> bool {
        matches!(self, AttemptOutcome::Accepted)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PracticeProgress {
    pub steps_done: usize,
    pub steps_total: usize,
    pub wrong_attempts: u32,
    pub complete: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PracticeState {
    pub procedure_id: ProcedureId,
    pub direction: Direction,
    /// Step parts in procedure order.
    pub order: Vec<PartNumber>,
    /// Installation: parts not yet installed. Removal: parts already removed.
    pub bin: BTreeSet<PartNumber>,
    /// Parts moved so far, always `order[..expected_index]`.
    pub moved: Vec<PartNumber>,
    pub expected_index: usize,
    pub wrong_attempts: u32,
    pub per_step_wrong: Vec<u32>,
    pub complete: bool,
    pub active_alert: Option<Alert>,
}

impl PracticeState {
    pub fn begin(procedure: &Procedure) -> Result<Self, PracticeError> {
        if procedure.steps.is_empty() {
            return Err(PracticeError::EmptyProcedure);
        }
        let order = procedure.step_parts();
        let bin = match procedure.direction {
            Direction::Installation => order.iter().cloned().collect(),
            Direction::Removal => BTreeSet::new(),
        };
        Ok(Self {
            procedure_id: procedure.procedure_id.clone(),
            direction: procedure.direction,
            per_step_wrong: alloc::vec![0; order.len()],
            order,
            bin,
            moved: Vec::new(),
            expected_index: 0,
            wrong_attempts: 0,
            complete: false,
            active_alert: None,
        })
    }

    /// Parts still to be moved, in procedure order. For installation these
    /// sit in the bin; for removal they are still on the assembly.
    pub fn movable(&self) -> &[PartNumber] {
        &self.order[self.expected_index..]
    }

    /// Parts currently on the assembly.
    pub fn on_assembly(&self) -> Vec<PartNumber> {
        match self.direction {
            Direction::Installation => self.moved.clone(),
            Direction::Removal => self.movable().to_vec(),
        }
    }

    pub fn expected_part(&self) -> Option<&PartNumber> {
        self.order.get(self.expected_index)
    }

    pub fn attempt_move(&mut self, part: &PartNumber) -> Result<AttemptOutcome, PracticeError> {
        if self.complete {
            return Err(PracticeError::SessionComplete);
        }
        if self.active_alert.is_some() {
            return Err(PracticeError::AlertPending);
        }
        if !self.movable().contains(part) {
            return Err(PracticeError::PartNotMovable(part.clone()));
        }
        let expected = self.order[self.expected_index].clone();
        if *part != expected {
            let verb = match self.direction {
                Direction::Installation => "installed",
                Direction::Removal => "removed",
            };
            let alert = Alert {
                message: format!("Wrong part {verb}: {part}. The next part to be {verb} is {expected}."),
                offending_part: part.clone(),
                expected_part: expected,
            };
            self.wrong_attempts += 1;
            self.per_step_wrong[self.expected_index] += 1;
            self.active_alert = Some(alert.clone());
            return Ok(AttemptOutcome::Rejected { alert });
        }
        match self.direction {
            Direction::Installation => self.bin.remove(part),
            Direction::Removal => self.bin.insert(part.clone()),
        };
        self.moved.push(expected);
        self.expected_index += 1;
        self.complete = self.expected_index == self.order.len();
        Ok(AttemptOutcome::Accepted)
    }

    pub fn acknowledge_alert(&mut self) -> Result<Alert, PracticeError> {
        self.active_alert.take().ok_or(PracticeError::NoAlert)
    }

    pub fn progress(&self) -> PracticeProgress {
        PracticeProgress {
            steps_done: self.expected_index,
            steps_total: self.order.len(),
            wrong_attempts: self.wrong_attempts,
            complete: self.complete,
        }
    }
}
