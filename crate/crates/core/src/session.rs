//! Module gating and the trainee event log.
//!
//! Modules unlock in order: Part Familiarization, then Procedure, then
//! Practice. Going back to a completed module is allowed. Activity events are
//! only accepted inside the module they belong to, so practice activity can
//! never be logged before the Procedure module is complete.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CourseId, CoursePackage, Part, PartNumber, ProcedureId};
use crate::playback::PlaybackState;
use crate::practice::PracticeState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ModuleId {
    Familiarization,
    Procedure,
    Practice,
}

impl ModuleId {
    pub const ALL: [ModuleId; 3] = [ModuleId::Familiarization, ModuleId::Procedure, ModuleId::Practice];

    pub fn prerequisites(self) -> impl Iterator<Item = ModuleId> {
        Self::ALL.into_iter().filter(move |m| *m < self)
    }
}

impl fmt::Display for ModuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModuleId::Familiarization => "FAMILIARIZATION",
            ModuleId::Procedure => "PROCEDURE",
            ModuleId::Practice => "PRACTICE",
        })
    }
}

/// Event kind with its payload. On the wire this is
/// `{"kind": "STEP_VIEWED", "payload": 2}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    ModuleEnter(ModuleId),
    ModuleComplete(ModuleId),
    PartSelected(PartNumber),
    /// The step's animation played through to the end.
    StepViewed(u32),
    StepReplayed(u32),
    AttemptAccepted(PartNumber),
    AttemptRejected(PartNumber),
    AlertAcknowledged,
}

impl EventKind {
    /// The module an activity event belongs to; `None` for module
    /// enter/complete events.
    pub fn module(&self) -> Option<ModuleId> {
        match self {
            EventKind::ModuleEnter(_) | EventKind::ModuleComplete(_) => None,
            EventKind::PartSelected(_) => Some(ModuleId::Familiarization),
            EventKind::StepViewed(_) | EventKind::StepReplayed(_) => Some(ModuleId::Procedure),
            EventKind::AttemptAccepted(_) | EventKind::AttemptRejected(_) | EventKind::AlertAcknowledged => {
                Some(ModuleId::Practice)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionEvent {
    /// Milliseconds since the session started.
    pub timestamp_ms: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

impl SessionEvent {
    pub fn new(timestamp_ms: u64, kind: EventKind) -> Self {
        Self { timestamp_ms, kind }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("unknown course {0}")]
    UnknownCourse(CourseId),
    #[error("unknown procedure {0}")]
    UnknownProcedure(ProcedureId),
    #[error("{module} is locked until {missing} is complete")]
    Locked { module: ModuleId, missing: ModuleId },
    #[error("{0} is not the module in progress")]
    NotEntered(ModuleId),
    #[error("cannot complete {module}: {detail}")]
    EvidenceInsufficient { module: ModuleId, detail: String },
    #[error("event at {timestamp_ms} ms is earlier than the last logged event at {last_ms} ms")]
    NonMonotonicTimestamp { timestamp_ms: u64, last_ms: u64 },
    #[error("{kind} events belong to {module}, but {active} is in progress")]
    OutsideModule { kind: &'static str, module: ModuleId, active: ActiveModule },
    #[error("module completion needs evidence; use complete_module")]
    EvidenceRequired,
}

/// Module in progress, for error messages.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ActiveModule(pub Option<ModuleId>);

impl fmt::Display for ActiveModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(m) => m.fmt(f),
            None => f.write_str("no module"),
        }
    }
}

/// What a module needs to show before it counts as complete.
#[derive(Clone, Copy, Debug)]
pub enum Evidence<'a> {
    /// Every listed part must have a PART_SELECTED event in the log.
    Familiarization { parts: &'a [Part] },
    /// Playback must have reached FINISHED.
    Procedure(&'a PlaybackState),
    /// Practice must be complete.
    Practice(&'a PracticeState),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub trainee_id: String,
    pub course_id: CourseId,
    pub procedure_id: ProcedureId,
    pub completed: BTreeSet<ModuleId>,
    pub active: Option<ModuleId>,
    pub event_log: Vec<SessionEvent>,
}

/// Looks the course up among `packages` and starts a session on it.
pub fn start_session<'a>(
    packages: impl IntoIterator<Item = &'a CoursePackage>,
    session_id: impl Into<String>,
    trainee_id: impl Into<String>,
    course_id: &CourseId,
    procedure_id: &ProcedureId,
) -> Result<Session, SessionError> {
    let pkg = packages
        .into_iter()
        .find(|p| &p.course_id == course_id)
        .ok_or_else(|| SessionError::UnknownCourse(course_id.clone()))?;
    Session::start(session_id, trainee_id, pkg, procedure_id)
}

impl Session {
    /// New session at time 0, inside Part Familiarization.
    pub fn start(
        session_id: impl Into<String>,
        trainee_id: impl Into<String>,
        pkg: &CoursePackage,
        procedure_id: &ProcedureId,
    ) -> Result<Self, SessionError> {
        if pkg.procedure(procedure_id).is_none() {
            return Err(SessionError::UnknownProcedure(procedure_id.clone()));
        }
        Ok(Self {
            session_id: session_id.into(),
            trainee_id: trainee_id.into(),
            course_id: pkg.course_id.clone(),
            procedure_id: procedure_id.clone(),
            completed: BTreeSet::new(),
            active: Some(ModuleId::Familiarization),
            event_log: alloc::vec![SessionEvent::new(0, EventKind::ModuleEnter(ModuleId::Familiarization))],
        })
    }

    pub fn accessible(&self, module: ModuleId) -> bool {
        self.missing_prerequisite(module).is_none()
    }

    pub fn is_complete(&self) -> bool {
        self.completed.len() == ModuleId::ALL.len()
    }

    pub fn last_timestamp_ms(&self) -> u64 {
        self.event_log.last().map_or(0, |e| e.timestamp_ms)
    }

    fn missing_prerequisite(&self, module: ModuleId) -> Option<ModuleId> {
        module.prerequisites().find(|m| !self.completed.contains(m))
    }

    fn check_time(&self, timestamp_ms: u64) -> Result<(), SessionError> {
        let last_ms = self.last_timestamp_ms();
        if timestamp_ms < last_ms {
            return Err(SessionError::NonMonotonicTimestamp { timestamp_ms, last_ms });
        }
        Ok(())
    }

    pub fn enter_module(&mut self, module: ModuleId, timestamp_ms: u64) -> Result<(), SessionError> {
        if let Some(missing) = self.missing_prerequisite(module) {
            return Err(SessionError::Locked { module, missing });
        }
        self.check_time(timestamp_ms)?;
        self.active = Some(module);
        self.event_log.push(SessionEvent::new(timestamp_ms, EventKind::ModuleEnter(module)));
        Ok(())
    }

    /// Marks the module in progress as complete. The trainee leaves the
    /// module and has to enter the next one explicitly.
    pub fn complete_module(
        &mut self,
        module: ModuleId,
        timestamp_ms: u64,
        evidence: Evidence<'_>,
    ) -> Result<(), SessionError> {
        if let Some(missing) = self.missing_prerequisite(module) {
            return Err(SessionError::Locked { module, missing });
        }
        if self.active != Some(module) {
            return Err(SessionError::NotEntered(module));
        }
        self.check_time(timestamp_ms)?;
        self.check_evidence(module, evidence)?;
        self.completed.insert(module);
        self.active = None;
        self.event_log.push(SessionEvent::new(timestamp_ms, EventKind::ModuleComplete(module)));
        Ok(())
    }

    fn check_evidence(&self, module: ModuleId, evidence: Evidence<'_>) -> Result<(), SessionError> {
        let insufficient = |detail: String| SessionError::EvidenceInsufficient { module, detail };
        match (module, evidence) {
            (ModuleId::Familiarization, Evidence::Familiarization { parts }) => {
                let selected: BTreeSet<&PartNumber> = self
                    .event_log
                    .iter()
                    .filter_map(|e| match &e.kind {
                        EventKind::PartSelected(p) => Some(p),
                        _ => None,
                    })
                    .collect();
                let seen = parts.iter().filter(|p| selected.contains(&p.part_number)).count();
                if seen < parts.len() {
                    return Err(insufficient(alloc::format!("{seen} of {} parts selected", parts.len())));
                }
                Ok(())
            }
            (ModuleId::Procedure, Evidence::Procedure(playback)) => {
                if playback.procedure_id != self.procedure_id {
                    return Err(insufficient(alloc::format!("playback is for {}", playback.procedure_id)));
                }
                if !playback.is_finished() {
                    return Err(insufficient(alloc::format!(
                        "playback stopped at step {} of {}",
                        playback.current_step,
                        playback.step_count()
                    )));
                }
                Ok(())
            }
            (ModuleId::Practice, Evidence::Practice(practice)) => {
                if practice.procedure_id != self.procedure_id {
                    return Err(insufficient(alloc::format!("practice is for {}", practice.procedure_id)));
                }
                if !practice.complete {
                    let p = practice.progress();
                    return Err(insufficient(alloc::format!("{} of {} parts moved", p.steps_done, p.steps_total)));
                }
                Ok(())
            }
            _ => Err(insufficient("evidence is for a different module".into())),
        }
    }

    /// Appends an event after checking time order and gating. MODULE_ENTER
    /// goes through [`enter_module`](Self::enter_module); MODULE_COMPLETE is
    /// refused here because it needs evidence.
    pub fn record_event(&mut self, event: SessionEvent) -> Result<(), SessionError> {
        if let EventKind::ModuleEnter(m) = event.kind {
            return self.enter_module(m, event.timestamp_ms);
        }
        self.check_event(&event)?;
        self.event_log.push(event);
        Ok(())
    }

    /// Whether [`record_event`](Self::record_event) would accept an activity
    /// event, without logging it.
    pub fn check_event(&self, event: &SessionEvent) -> Result<(), SessionError> {
        let Some(module) = event.kind.module() else {
            return match event.kind {
                EventKind::ModuleEnter(m) => match self.missing_prerequisite(m) {
                    Some(missing) => Err(SessionError::Locked { module: m, missing }),
                    None => self.check_time(event.timestamp_ms),
                },
                _ => Err(SessionError::EvidenceRequired),
            };
        };
        self.check_time(event.timestamp_ms)?;
        if self.active != Some(module) {
            return Err(SessionError::OutsideModule {
                kind: kind_name(&event.kind),
                module,
                active: ActiveModule(self.active),
            });
        }
        Ok(())
    }
}

fn kind_name(kind: &EventKind) -> &'static str {
    match kind {
        EventKind::ModuleEnter(_) => "MODULE_ENTER",
        EventKind::ModuleComplete(_) => "MODULE_COMPLETE",
        EventKind::PartSelected(_) => "PART_SELECTED",
        EventKind::StepViewed(_) => "STEP_VIEWED",
        EventKind::StepReplayed(_) => "STEP_REPLAYED",
        EventKind::AttemptAccepted(_) => "ATTEMPT_ACCEPTED",
        EventKind::AttemptRejected(_) => "ATTEMPT_REJECTED",
        EventKind::AlertAcknowledged => "ALERT_ACKNOWLEDGED",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit;
    use alloc::vec;

    fn session() -> (CoursePackage, Session) {
        let pkg = testkit::hydraulic_pump();
        let s = Session::start("s1", "t1", &pkg, &"install-pump".into()).unwrap();
        (pkg, s)
    }

    fn finished_playback(pkg: &CoursePackage) -> PlaybackState {
        let mut pb = PlaybackState::start(&pkg.procedures[0]).unwrap();
        while !pb.is_finished() {
            pb.mark_step_animation_complete().unwrap();
            pb.advance().unwrap();
        }
        pb
    }

    fn select_all(pkg: &CoursePackage, s: &mut Session, t: u64) {
        for p in &pkg.assembly.parts {
            s.record_event(SessionEvent::new(t, EventKind::PartSelected(p.part_number.clone()))).unwrap();
        }
    }

    #[test]
    fn fresh_session_only_opens_familiarization() {
        let (pkg, s) = session();
        assert!(s.completed.is_empty());
        assert_eq!(s.event_log, vec![SessionEvent::new(0, EventKind::ModuleEnter(ModuleId::Familiarization))]);
        let open: Vec<_> = ModuleId::ALL.into_iter().filter(|m| s.accessible(*m)).collect();
        assert_eq!(open, vec![ModuleId::Familiarization]);

        let err = start_session([&pkg], "s", "t", &"nope".into(), &"install-pump".into());
        assert_eq!(err, Err(SessionError::UnknownCourse("nope".into())));
        let err = start_session([&pkg], "s", "t", &"hydraulic-pump".into(), &"nope".into());
        assert_eq!(err, Err(SessionError::UnknownProcedure("nope".into())));
    }

    #[test]
    fn practice_locked_until_procedure_done() {
        let (pkg, mut s) = session();
        select_all(&pkg, &mut s, 10);
        s.complete_module(ModuleId::Familiarization, 20, Evidence::Familiarization { parts: &pkg.assembly.parts })
            .unwrap();
        assert_eq!(
            s.enter_module(ModuleId::Practice, 30),
            Err(SessionError::Locked { module: ModuleId::Practice, missing: ModuleId::Procedure })
        );
        s.enter_module(ModuleId::Procedure, 30).unwrap();
        s.enter_module(ModuleId::Familiarization, 31).unwrap();
    }

    #[test]
    fn familiarization_needs_every_part_selected() {
        let (pkg, mut s) = session();
        for p in &pkg.assembly.parts[..2] {
            s.record_event(SessionEvent::new(5, EventKind::PartSelected(p.part_number.clone()))).unwrap();
        }
        let err = s
            .complete_module(ModuleId::Familiarization, 6, Evidence::Familiarization { parts: &pkg.assembly.parts })
            .unwrap_err();
        assert!(matches!(err, SessionError::EvidenceInsufficient { module: ModuleId::Familiarization, .. }));
        assert!(s.completed.is_empty());
    }

    #[test]
    fn full_walkthrough_completes_all_modules() {
        let (pkg, mut s) = session();
        select_all(&pkg, &mut s, 1);
        s.complete_module(ModuleId::Familiarization, 2, Evidence::Familiarization { parts: &pkg.assembly.parts })
            .unwrap();
        s.enter_module(ModuleId::Procedure, 3).unwrap();
        let unfinished = PlaybackState::start(&pkg.procedures[0]).unwrap();
        assert!(s.complete_module(ModuleId::Procedure, 4, Evidence::Procedure(&unfinished)).is_err());
        s.complete_module(ModuleId::Procedure, 4, Evidence::Procedure(&finished_playback(&pkg))).unwrap();
        s.enter_module(ModuleId::Practice, 5).unwrap();
        let mut practice = PracticeState::begin(&pkg.procedures[0]).unwrap();
        for part in practice.order.clone() {
            practice.attempt_move(&part).unwrap();
        }
        s.complete_module(ModuleId::Practice, 6, Evidence::Practice(&practice)).unwrap();
        assert!(s.is_complete());
    }

    #[test]
    fn completion_requires_being_in_module() {
        let (pkg, mut s) = session();
        let pb = finished_playback(&pkg);
        assert_eq!(
            s.complete_module(ModuleId::Procedure, 1, Evidence::Procedure(&pb)),
            Err(SessionError::Locked { module: ModuleId::Procedure, missing: ModuleId::Familiarization })
        );
        select_all(&pkg, &mut s, 1);
        let ev = Evidence::Familiarization { parts: &pkg.assembly.parts };
        s.complete_module(ModuleId::Familiarization, 2, ev).unwrap();
        assert_eq!(s.complete_module(ModuleId::Familiarization, 3, ev), Err(SessionError::NotEntered(ModuleId::Familiarization)));
        assert_eq!(s.complete_module(ModuleId::Procedure, 3, Evidence::Procedure(&pb)), Err(SessionError::NotEntered(ModuleId::Procedure)));
    }

    #[test]
    fn activity_outside_its_module_is_refused() {
        let (_, mut s) = session();
        let err = s.record_event(SessionEvent::new(1, EventKind::AttemptAccepted("P-101".into()))).unwrap_err();
        assert!(matches!(err, SessionError::OutsideModule { module: ModuleId::Practice, .. }));
        assert_eq!(
            s.record_event(SessionEvent::new(1, EventKind::ModuleComplete(ModuleId::Familiarization))),
            Err(SessionError::EvidenceRequired)
        );
    }

    #[test]
    fn timestamps_must_not_regress() {
        let (_, mut s) = session();
        s.record_event(SessionEvent::new(100, EventKind::PartSelected("P-101".into()))).unwrap();
        assert_eq!(
            s.record_event(SessionEvent::new(99, EventKind::PartSelected("P-102".into()))),
            Err(SessionError::NonMonotonicTimestamp { timestamp_ms: 99, last_ms: 100 })
        );
        assert_eq!(s.event_log.len(), 2);
    }

    #[test]
    fn log_is_append_only() {
        let (_, mut s) = session();
        for i in 0..1000u64 {
            s.record_event(SessionEvent::new(i, EventKind::PartSelected(PartNumber::new(alloc::format!("P{i}")))))
                .unwrap();
        }
        assert_eq!(s.event_log.len(), 1001);
        for (i, e) in s.event_log[1..].iter().enumerate() {
            assert_eq!(e.timestamp_ms, i as u64);
        }
    }

    #[test]
    fn event_wire_format() {
        let e = SessionEvent::new(1500, EventKind::StepViewed(2));
        assert_eq!(serde_json::to_string(&e).unwrap(), r#"{"timestamp_ms":1500,"kind":"STEP_VIEWED","payload":2}"#);
        let e = SessionEvent::new(7, EventKind::AlertAcknowledged);
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(json, r#"{"timestamp_ms":7,"kind":"ALERT_ACKNOWLEDGED"}"#);
        assert_eq!(serde_json::from_str::<SessionEvent>(&json).unwrap(), e);
        let e: SessionEvent =
            serde_json::from_str(r#"{"timestamp_ms":3,"kind":"MODULE_ENTER","payload":"PRACTICE"}"#).unwrap();
        assert_eq!(e.kind, EventKind::ModuleEnter(ModuleId::Practice));
    }
}
