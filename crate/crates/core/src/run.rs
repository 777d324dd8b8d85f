//! A trainee working through one procedure: the session plus the three
//! engines behind it.
//!
//! Every event is adjudicated against the engines before it is logged, so a
//! client that reports activity cannot put the log out of step with what the
//! engines allow.

use alloc::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::familiarization::{FamiliarizationError, FamiliarizationView};
use crate::metrics::{session_metrics, MetricsError, SessionMetrics};
use crate::model::{CoursePackage, PartNumber, Procedure, ProcedureId};
use crate::playback::{PlaybackError, PlaybackState};
use crate::practice::{AttemptOutcome, PracticeError, PracticeProgress, PracticeState};
use crate::session::{EventKind, Evidence, ModuleId, Session, SessionError, SessionEvent};

#[derive(Debug, PartialEq, Eq, Error)]
pub enum RunError {
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Familiarization(#[from] FamiliarizationError),
    #[error(transparent)]
    Playback(#[from] PlaybackError),
    #[error(transparent)]
    Practice(#[from] PracticeError),
    #[error("event is for step {got}, but step {expected} is on screen")]
    StepMismatch { expected: usize, got: usize },
    #[error("attempt with {part} was {actual}, not {claimed}")]
    ClaimMismatch { part: PartNumber, claimed: &'static str, actual: &'static str },
}

/// Snapshot a client needs to redraw the trainee's screen.
#[derive(Clone, Debug, Serialize)]
pub struct RunSnapshot<'a> {
    pub session: &'a Session,
    pub accessible: alloc::vec::Vec<ModuleId>,
    pub familiarization: &'a FamiliarizationView,
    pub playback: Option<&'a PlaybackState>,
    pub practice: Option<PracticeSnapshot<'a>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PracticeSnapshot<'a> {
    pub progress: PracticeProgress,
    pub alert: Option<&'a crate::practice::Alert>,
    pub on_assembly: alloc::vec::Vec<PartNumber>,
    pub bin: &'a alloc::collections::BTreeSet<PartNumber>,
}

#[derive(Clone, Debug)]
pub struct TraineeRun {
    package: Arc<CoursePackage>,
    session: Session,
    view: FamiliarizationView,
    playback: Option<PlaybackState>,
    practice: Option<PracticeState>,
}

impl TraineeRun {
    pub fn start(
        package: Arc<CoursePackage>,
        session_id: impl Into<alloc::string::String>,
        trainee_id: impl Into<alloc::string::String>,
        procedure_id: &ProcedureId,
    ) -> Result<Self, RunError> {
        let session = Session::start(session_id, trainee_id, &package, procedure_id)?;
        let view = FamiliarizationView::new(&package.assembly);
        Ok(Self { package, session, view, playback: None, practice: None })
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    pub fn practice(&self) -> Option<&PracticeState> {
        self.practice.as_ref()
    }

    pub fn playback(&self) -> Option<&PlaybackState> {
        self.playback.as_ref()
    }

    pub fn view(&self) -> &FamiliarizationView {
        &self.view
    }

    pub fn metrics(&self) -> Result<SessionMetrics, MetricsError> {
        session_metrics(&self.session.event_log)
    }

    pub fn snapshot(&self) -> RunSnapshot<'_> {
        RunSnapshot {
            session: &self.session,
            accessible: ModuleId::ALL.into_iter().filter(|m| self.session.accessible(*m)).collect(),
            familiarization: &self.view,
            playback: self.playback.as_ref(),
            practice: self.practice.as_ref().map(|p| PracticeSnapshot {
                progress: p.progress(),
                alert: p.active_alert.as_ref(),
                on_assembly: p.on_assembly(),
                bin: &p.bin,
            }),
        }
    }

    fn procedure(&self) -> &Procedure {
        self.package.procedure(&self.session.procedure_id).expect("checked at session start")
    }

    /// Adjudicates and logs one event. On error nothing changes.
    pub fn apply(&mut self, event: SessionEvent) -> Result<(), RunError> {
        let t = event.timestamp_ms;
        match &event.kind {
            EventKind::ModuleEnter(module) => {
                self.session.enter_module(*module, t)?;
                match module {
                    ModuleId::Procedure if self.playback.is_none() => {
                        self.playback = Some(PlaybackState::start(self.procedure())?);
                    }
                    ModuleId::Practice if self.practice.is_none() => {
                        self.practice = Some(PracticeState::begin(self.procedure())?);
                    }
                    _ => {}
                }
                return Ok(());
            }
            EventKind::ModuleComplete(module) => {
                let evidence = match module {
                    ModuleId::Familiarization => Evidence::Familiarization { parts: &self.package.assembly.parts },
                    ModuleId::Procedure => match &self.playback {
                        Some(p) => Evidence::Procedure(p),
                        None => return Err(SessionError::NotEntered(*module).into()),
                    },
                    ModuleId::Practice => match &self.practice {
                        Some(p) => Evidence::Practice(p),
                        None => return Err(SessionError::NotEntered(*module).into()),
                    },
                };
                self.session.complete_module(*module, t, evidence)?;
                return Ok(());
            }
            _ => {}
        }

        self.session.check_event(&event)?;
        match &event.kind {
            EventKind::PartSelected(part) => {
                self.view.select_part(part, self.package.dim_opacity)?;
            }
            EventKind::StepViewed(step) => {
                let playback = self.playback.as_mut().expect("procedure entered");
                let step = *step as usize;
                if playback.is_finished() || step != playback.current_step {
                    return Err(RunError::StepMismatch { expected: playback.current_step, got: step });
                }
                let mut next = playback.clone();
                if next.status != crate::playback::PlaybackStatus::StepDone {
                    next.mark_step_animation_complete()?;
                }
                next.advance()?;
                *playback = next;
            }
            EventKind::StepReplayed(step) => {
                let playback = self.playback.as_mut().expect("procedure entered");
                let on_screen = playback.current_step.min(playback.step_count() - 1);
                if *step as usize != on_screen {
                    return Err(RunError::StepMismatch { expected: on_screen, got: *step as usize });
                }
                playback.replay_step();
            }
            EventKind::AttemptAccepted(part) | EventKind::AttemptRejected(part) => {
                let claimed_accept = matches!(event.kind, EventKind::AttemptAccepted(_));
                let practice = self.practice.as_mut().expect("practice entered");
                let mut next = practice.clone();
                let outcome = next.attempt_move(part)?;
                if outcome.is_accepted() != claimed_accept {
                    let name = |accepted: bool| if accepted { "accepted" } else { "rejected" };
                    return Err(RunError::ClaimMismatch {
                        part: part.clone(),
                        claimed: name(claimed_accept),
                        actual: name(outcome.is_accepted()),
                    });
                }
                *practice = next;
            }
            EventKind::AlertAcknowledged => {
                self.practice.as_mut().expect("practice entered").acknowledge_alert()?;
            }
            EventKind::ModuleEnter(_) | EventKind::ModuleComplete(_) => unreachable!(),
        }
        self.session.record_event(event)?;
        Ok(())
    }

    /// Lets the engine decide a practice attempt and logs the result.
    pub fn attempt(&mut self, part: &PartNumber, timestamp_ms: u64) -> Result<AttemptOutcome, RunError> {
        let probe = SessionEvent::new(timestamp_ms, EventKind::AttemptAccepted(part.clone()));
        self.session.check_event(&probe)?;
        let practice = self.practice.as_mut().expect("practice entered");
        let outcome = practice.attempt_move(part)?;
        let kind = if outcome.is_accepted() {
            EventKind::AttemptAccepted(part.clone())
        } else {
            EventKind::AttemptRejected(part.clone())
        };
        self.session.record_event(SessionEvent::new(timestamp_ms, kind))?;
        Ok(outcome)
    }
}
