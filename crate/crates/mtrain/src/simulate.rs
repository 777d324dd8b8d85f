//! Headless trainee: drives one procedure through all three modules with a
//! fixed time charge per action, so runs are reproducible.
//!
//! The simulator drives the engines directly rather than going through
//! `TraineeRun`, which keeps it usable as an independent reference for the
//! service.

use std::collections::BTreeSet;

use mtrain_core::familiarization::{FamiliarizationError, FamiliarizationView};
use mtrain_core::metrics::{session_metrics, MetricsError, SessionMetrics};
use mtrain_core::playback::{step_callout, step_notices, PlaybackError, PlaybackState};
use mtrain_core::practice::{AttemptOutcome, PracticeError, PracticeState};
use mtrain_core::session::{EventKind, Evidence, ModuleId, Session, SessionError, SessionEvent};
use mtrain_core::{CoursePackage, PartNumber, ProcedureId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// How the simulated trainee picks parts in Practice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum TraineePolicy {
    /// Always the expected part.
    Perfect,
    /// Uniformly among movable parts, never retrying a part already rejected
    /// for the current step.
    Random { seed: u64 },
    /// Like `Perfect`, but at each step tries a uniformly chosen wrong part
    /// first with probability `error_rate`.
    ErrorProne { seed: u64, error_rate: f64 },
}

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("unknown procedure {0}")]
    UnknownProcedure(ProcedureId),
    #[error("error rate must be within [0, 1]")]
    BadErrorRate,
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Familiarization(#[from] FamiliarizationError),
    #[error(transparent)]
    Playback(#[from] PlaybackError),
    #[error(transparent)]
    Practice(#[from] PracticeError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationRun {
    pub session: Session,
    pub metrics: SessionMetrics,
}

struct Chooser {
    policy: TraineePolicy,
    rng: ChaCha8Rng,
}

impl Chooser {
    fn new(policy: TraineePolicy) -> Self {
        let seed = match policy {
            TraineePolicy::Perfect => 0,
            TraineePolicy::Random { seed } | TraineePolicy::ErrorProne { seed, .. } => seed,
        };
        Self { policy, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn pick(&mut self, practice: &PracticeState, rejected: &BTreeSet<PartNumber>) -> PartNumber {
        let expected = practice.expected_part().expect("practice not complete").clone();
        match self.policy {
            TraineePolicy::Perfect => expected,
            TraineePolicy::Random { .. } => {
                let candidates: Vec<&PartNumber> = practice.movable().iter().filter(|p| !rejected.contains(*p)).collect();
                candidates[self.rng.random_range(0..candidates.len())].clone()
            }
            TraineePolicy::ErrorProne { error_rate, .. } => {
                if !rejected.is_empty() {
                    return expected;
                }
                let slip = self.rng.random_bool(error_rate);
                let wrong: Vec<&PartNumber> = practice.movable().iter().filter(|p| **p != expected).collect();
                if slip && !wrong.is_empty() {
                    wrong[self.rng.random_range(0..wrong.len())].clone()
                } else {
                    expected
                }
            }
        }
    }
}

/// Runs a trainee through Part Familiarization (select every part),
/// Procedure (watch each step once) and Practice (per `policy`). Every
/// trainee action costs `step_view_seconds`.
pub fn simulate_trainee(
    pkg: &CoursePackage,
    procedure_id: &ProcedureId,
    policy: TraineePolicy,
    step_view_seconds: f64,
) -> Result<SimulationRun, SimulationError> {
    if let TraineePolicy::ErrorProne { error_rate, .. } = policy {
        if !(0.0..=1.0).contains(&error_rate) {
            return Err(SimulationError::BadErrorRate);
        }
    }
    let procedure = pkg
        .procedure(procedure_id)
        .ok_or_else(|| SimulationError::UnknownProcedure(procedure_id.clone()))?;
    let tick = (step_view_seconds.max(0.0) * 1000.0).round() as u64;
    let mut now = 0;
    let mut session = Session::start("simulated", "simulated-trainee", pkg, procedure_id)?;

    let mut view = FamiliarizationView::new(&pkg.assembly);
    for part in &pkg.assembly.parts {
        now += tick;
        view.select_part(&part.part_number, pkg.dim_opacity)?;
        session.record_event(SessionEvent::new(now, EventKind::PartSelected(part.part_number.clone())))?;
    }
    view.clear_selection();
    session.complete_module(ModuleId::Familiarization, now, Evidence::Familiarization { parts: &pkg.assembly.parts })?;

    session.enter_module(ModuleId::Procedure, now)?;
    let mut playback = PlaybackState::start(procedure)?;
    while !playback.is_finished() {
        let step = playback.current_step;
        step_callout(procedure, &pkg.assembly, step)?;
        step_notices(procedure, step)?;
        now += tick;
        playback.mark_step_animation_complete()?;
        session.record_event(SessionEvent::new(now, EventKind::StepViewed(step as u32)))?;
        playback.advance()?;
    }
    session.complete_module(ModuleId::Procedure, now, Evidence::Procedure(&playback))?;

    session.enter_module(ModuleId::Practice, now)?;
    let mut practice = PracticeState::begin(procedure)?;
    let mut chooser = Chooser::new(policy);
    let mut rejected = BTreeSet::new();
    while !practice.complete {
        let part = chooser.pick(&practice, &rejected);
        now += tick;
        match practice.attempt_move(&part)? {
            AttemptOutcome::Accepted => {
                rejected.clear();
                session.record_event(SessionEvent::new(now, EventKind::AttemptAccepted(part)))?;
            }
            AttemptOutcome::Rejected { .. } => {
                session.record_event(SessionEvent::new(now, EventKind::AttemptRejected(part.clone())))?;
                practice.acknowledge_alert()?;
                session.record_event(SessionEvent::new(now, EventKind::AlertAcknowledged))?;
                rejected.insert(part);
            }
        }
    }
    session.complete_module(ModuleId::Practice, now, Evidence::Practice(&practice))?;

    let metrics = session_metrics(&session.event_log)?;
    Ok(SimulationRun { session, metrics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use mtrain_core::testkit;

    #[test]
    fn perfect_trainee_makes_no_mistakes() {
        let pkg = testkit::hydraulic_pump();
        let run = simulate_trainee(&pkg, &"install-pump".into(), TraineePolicy::Perfect, 60.0).unwrap();
        assert!(run.session.is_complete());
        // 3 selections + 3 steps at one minute each; 3 attempts.
        assert_eq!(
            run.metrics,
            SessionMetrics { training_minutes: 6.0, task_minutes: Some(3.0), wrong_attempts: 0, replays: 0 }
        );
    }

    #[test]
    fn random_trainee_is_reproducible() {
        let pkg = testkit::hydraulic_pump();
        let a = simulate_trainee(&pkg, &"install-pump".into(), TraineePolicy::Random { seed: 7 }, 30.0).unwrap();
        let b = simulate_trainee(&pkg, &"install-pump".into(), TraineePolicy::Random { seed: 7 }, 30.0).unwrap();
        assert_eq!(serde_json::to_vec(&a.session).unwrap(), serde_json::to_vec(&b.session).unwrap());
        assert!(a.metrics.wrong_attempts <= 3);
    }

    #[test]
    fn error_prone_extremes() {
        let pkg = testkit::hydraulic_pump();
        let id = ProcedureId::from("install-pump");
        let never = simulate_trainee(&pkg, &id, TraineePolicy::ErrorProne { seed: 1, error_rate: 0.0 }, 1.0).unwrap();
        assert_eq!(never.metrics.wrong_attempts, 0);
        // Every step with a wrong part available slips once: steps 0 and 1.
        let always = simulate_trainee(&pkg, &id, TraineePolicy::ErrorProne { seed: 1, error_rate: 1.0 }, 1.0).unwrap();
        assert_eq!(always.metrics.wrong_attempts, 2);
        assert!(matches!(
            simulate_trainee(&pkg, &id, TraineePolicy::ErrorProne { seed: 1, error_rate: 1.5 }, 1.0),
            Err(SimulationError::BadErrorRate)
        ));
        assert!(matches!(
            simulate_trainee(&pkg, &"nope".into(), TraineePolicy::Perfect, 1.0),
            Err(SimulationError::UnknownProcedure(_))
        ));
    }
}
