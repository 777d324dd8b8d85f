use std::sync::Arc;

use mtrain_core::familiarization::FULL_OPACITY;
use mtrain_core::run::TraineeRun;
use mtrain_core::session::{EventKind, ModuleId, Session, SessionEvent};
use mtrain_core::{testkit, validate_package, CoursePackage};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn package(seed: u64) -> CoursePackage {
    testkit::valid_package(&mut ChaCha8Rng::seed_from_u64(seed), 7)
}

/// Drives every module the way a careful trainee would, replaying each step
/// once and trying one wrong part whenever there is one to try.
fn careful_run(pkg: Arc<CoursePackage>, proc_index: usize) -> TraineeRun {
    let id = pkg.procedures[proc_index].procedure_id.clone();
    let mut run = TraineeRun::start(pkg.clone(), "s", "t", &id).unwrap();
    let mut t = 0;
    let mut ev = |run: &mut TraineeRun, kind: EventKind| {
        t += 10;
        run.apply(SessionEvent::new(t, kind)).unwrap();
    };
    for part in &pkg.assembly.parts {
        ev(&mut run, EventKind::PartSelected(part.part_number.clone()));
        assert_eq!(run.view().opacity_map[&part.part_number], FULL_OPACITY);
    }
    ev(&mut run, EventKind::ModuleComplete(ModuleId::Familiarization));
    ev(&mut run, EventKind::ModuleEnter(ModuleId::Procedure));
    let steps = pkg.procedures[proc_index].steps.len() as u32;
    for i in 0..steps {
        ev(&mut run, EventKind::StepReplayed(i));
        ev(&mut run, EventKind::StepViewed(i));
    }
    ev(&mut run, EventKind::ModuleComplete(ModuleId::Procedure));
    ev(&mut run, EventKind::ModuleEnter(ModuleId::Practice));
    loop {
        let practice = run.practice().unwrap();
        if practice.complete {
            break;
        }
        let expected = practice.expected_part().unwrap().clone();
        if let Some(wrong) = practice.movable().iter().find(|p| **p != expected).cloned() {
            ev(&mut run, EventKind::AttemptRejected(wrong));
            ev(&mut run, EventKind::AlertAcknowledged);
        }
        ev(&mut run, EventKind::AttemptAccepted(expected));
    }
    ev(&mut run, EventKind::ModuleComplete(ModuleId::Practice));
    run
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn careful_trainee_completes_every_procedure(seed in any::<u64>()) {
        let pkg = Arc::new(package(seed));
        prop_assert!(validate_package(&pkg).is_accepted());
        for i in 0..pkg.procedures.len() {
            let run = careful_run(pkg.clone(), i);
            prop_assert!(run.session().is_complete());
            let n = pkg.procedures[i].steps.len() as u32;
            let m = run.metrics().unwrap();
            prop_assert_eq!(m.replays, n);
            prop_assert_eq!(m.wrong_attempts, n - 1);
            prop_assert_eq!(m.task_minutes.is_some(), true);
        }
    }

    #[test]
    fn session_log_survives_the_wire(seed in any::<u64>()) {
        let pkg = Arc::new(package(seed));
        let run = careful_run(pkg, 0);
        let json = serde_json::to_string(run.session()).unwrap();
        let back: Session = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&back, run.session());
    }
}
