//! Procedure module: step-at-a-time animation playback.
//!
//! ```text
//!            mark_complete            advance
//!  PLAYING ─────────────────▶ STEP_DONE ─────▶ PLAYING (next step)
//!    │  ▲                        │    └──────▶ FINISHED (after last step)
//!  pause│ │resume              replay
//!    ▼  │                        ▼
//!  PAUSED ──mark_complete──▶ STEP_DONE       any ──replay──▶ PLAYING (same step)
//! ```
//!
//! Advancing is gated on the current step's animation having finished. The
//! animation clock lives outside the engine; the caller reports completion.
//! Narration never gates.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Assembly, AssetPath, NewtonMeters, PartNumber, Procedure, ProcedureId, SafetyNotice, ToolId};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PlaybackError {
    #[error("procedure has no steps")]
    EmptyProcedure,
    #[error("cannot {action} while {status:?}")]
    InvalidTransition { action: &'static str, status: PlaybackStatus },
    #[error("step {0} has not finished playing")]
    StepNotComplete(usize),
    #[error("step index {index} out of range for {len} steps")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("step part {0} is not in the assembly")]
    UnknownPart(PartNumber),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PlaybackStatus {
    Playing,
    Paused,
    StepDone,
    Finished,
}

/// Media to start when a step begins playing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepCue {
    pub step: usize,
    pub animation_ref: Option<AssetPath>,
    pub narration_ref: Option<AssetPath>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaybackState {
    pub procedure_id: ProcedureId,
    /// Equals the step count once FINISHED.
    pub current_step: usize,
    pub status: PlaybackStatus,
    pub replay_count: Vec<u32>,
    pub steps_seen: BTreeSet<usize>,
    cues: Vec<StepCue>,
}

impl PlaybackState {
    /// Starts at step 0, playing. The step 0 cue is available from
    /// [`current_cue`](Self::current_cue).
    pub fn start(procedure: &Procedure) -> Result<Self, PlaybackError> {
        if procedure.steps.is_empty() {
            return Err(PlaybackError::EmptyProcedure);
        }
        let cues = procedure
            .steps
            .iter()
            .enumerate()
            .map(|(step, s)| StepCue {
                step,
                animation_ref: s.animation_ref.clone(),
                narration_ref: s.narration_ref.clone(),
            })
            .collect();
        Ok(Self {
            procedure_id: procedure.procedure_id.clone(),
            current_step: 0,
            status: PlaybackStatus::Playing,
            replay_count: alloc::vec![0; procedure.steps.len()],
            steps_seen: BTreeSet::from([0]),
            cues,
        })
    }

    pub fn step_count(&self) -> usize {
        self.cues.len()
    }

    pub fn is_finished(&self) -> bool {
        self.status == PlaybackStatus::Finished
    }

    /// Cue for the step on screen; `None` once finished.
    pub fn current_cue(&self) -> Option<&StepCue> {
        self.cues.get(self.current_step)
    }

    pub fn pause(&mut self) -> Result<(), PlaybackError> {
        self.transition("pause", PlaybackStatus::Playing, PlaybackStatus::Paused)
    }

    pub fn resume(&mut self) -> Result<(), PlaybackError> {
        self.transition("resume", PlaybackStatus::Paused, PlaybackStatus::Playing)
    }

    /// External signal that the current step's animation reached its end.
    pub fn mark_step_animation_complete(&mut self) -> Result<(), PlaybackError> {
        match self.status {
            PlaybackStatus::Playing | PlaybackStatus::Paused => {
                self.status = PlaybackStatus::StepDone;
                Ok(())
            }
            status => Err(PlaybackError::InvalidTransition { action: "complete step", status }),
        }
    }

    /// Moves to the next step, or to FINISHED after the last one. Returns the
    /// cue of the step that started playing.
    pub fn advance(&mut self) -> Result<Option<&StepCue>, PlaybackError> {
        if self.status != PlaybackStatus::StepDone {
            return Err(PlaybackError::StepNotComplete(self.current_step));
        }
        self.current_step += 1;
        if self.current_step == self.step_count() {
            self.status = PlaybackStatus::Finished;
            return Ok(None);
        }
        self.status = PlaybackStatus::Playing;
        self.steps_seen.insert(self.current_step);
        Ok(self.current_cue())
    }

    /// Restarts the current step; after FINISHED, restarts the last step.
    /// Allowed in every status.
    pub fn replay_step(&mut self) -> &StepCue {
        if self.status == PlaybackStatus::Finished {
            self.current_step = self.step_count() - 1;
        }
        self.status = PlaybackStatus::Playing;
        self.replay_count[self.current_step] += 1;
        &self.cues[self.current_step]
    }

    fn transition(&mut self, action: &'static str, from: PlaybackStatus, to: PlaybackStatus) -> Result<(), PlaybackError> {
        if self.status != from {
            return Err(PlaybackError::InvalidTransition { action, status: self.status });
        }
        self.status = to;
        Ok(())
    }
}

/// Overlay shown with a step's animation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Callout {
    pub part_number: PartNumber,
    pub nomenclature: alloc::string::String,
    pub tool: Option<ToolId>,
    pub torque: Option<NewtonMeters>,
}

pub fn step_callout(procedure: &Procedure, assembly: &Assembly, index: usize) -> Result<Callout, PlaybackError> {
    let step = procedure
        .steps
        .get(index)
        .ok_or(PlaybackError::IndexOutOfRange { index, len: procedure.steps.len() })?;
    let part = assembly
        .part(&step.part_number)
        .ok_or_else(|| PlaybackError::UnknownPart(step.part_number.clone()))?;
    Ok(Callout {
        part_number: part.part_number.clone(),
        nomenclature: part.nomenclature.clone(),
        tool: step.tool.clone(),
        torque: step.torque,
    })
}

/// Safety notices for a step, warnings first, authored order kept within each
/// kind.
pub fn step_notices(procedure: &Procedure, index: usize) -> Result<Vec<SafetyNotice>, PlaybackError> {
    let step = procedure
        .steps
        .get(index)
        .ok_or(PlaybackError::IndexOutOfRange { index, len: procedure.steps.len() })?;
    let mut notices = step.notices.clone();
    notices.sort_by_key(|n| n.kind);
    Ok(notices)
}
