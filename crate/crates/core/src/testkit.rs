//! Fixtures, a seeded generator of valid packages, and single-rule fault
//! injection for property suites.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::*;
use crate::validate::RuleId;

/// The demo hydraulic pump installation: three parts, one procedure.
pub fn hydraulic_pump() -> CoursePackage {
    let part = |number: &str, name: &str, mesh: &str, x: f64| Part {
        part_number: number.into(),
        nomenclature: name.into(),
        mesh_ref: mesh.into(),
        default_transform: Transform { position: [x, 0.0, 0.0], rotation: [0.0, 0.0, 0.0, 1.0] },
    };
    let assembly = Assembly {
        assembly_id: "hydraulic-pump-assy".into(),
        name: "Engine-Driven Hydraulic Pump".into(),
        parts: vec![
            part("P-102", "Pump Mounting Gasket", "meshes/p-102.glb", 0.0),
            part("P-101", "Hydraulic Pump", "meshes/p-101.glb", 0.05),
            part("P-103", "Pressure Line Fitting", "meshes/p-103.glb", 0.12),
        ],
    };
    let steps = vec![
        ProcedureStep {
            index: 0,
            action: StepAction::Install,
            part_number: "P-102".into(),
            tool: None,
            torque: None,
            callout_text: "Seat the gasket on the gearbox mounting pad.".into(),
            notices: vec![SafetyNotice::caution("Do not reuse a gasket that has been removed.")],
            animation_ref: Some("animations/step-0.json".into()),
            narration_ref: Some("audio/step-0.ogg".into()),
        },
        ProcedureStep {
            index: 1,
            action: StepAction::Install,
            part_number: "P-101".into(),
            tool: Some("T-10".into()),
            torque: Some(NewtonMeters(25.0)),
            callout_text: "Install the pump on the mounting pad and torque the nuts.".into(),
            notices: vec![
                SafetyNotice::caution("Support the pump until all nuts are installed."),
                SafetyNotice::warning("Make sure the hydraulic system is depressurized."),
            ],
            animation_ref: Some("animations/step-1.json".into()),
            narration_ref: Some("audio/step-1.ogg".into()),
        },
        ProcedureStep {
            index: 2,
            action: StepAction::Install,
            part_number: "P-103".into(),
            tool: Some("T-42".into()),
            torque: Some(NewtonMeters(40.0)),
            callout_text: "Connect the pressure line fitting.".into(),
            notices: vec![],
            animation_ref: Some("animations/step-2.json".into()),
            narration_ref: None,
        },
    ];
    let procedure = Procedure {
        procedure_id: "install-pump".into(),
        direction: Direction::Installation,
        pre_steps: vec![
            "Depressurize the hydraulic system.".into(),
            "Open the engine cowling.".into(),
        ],
        post_steps: vec!["Run a leak check at system pressure.".into()],
        required_tools: vec!["T-10".into(), "T-42".into(), "T-7".into()],
        consumables: vec!["Hydraulic fluid".into()],
        spares: vec!["Pump mounting gasket".into()],
        steps,
    };
    let asset_index = [
        "meshes/p-101.glb",
        "meshes/p-102.glb",
        "meshes/p-103.glb",
        "animations/step-0.json",
        "animations/step-1.json",
        "animations/step-2.json",
        "audio/step-0.ogg",
        "audio/step-1.ogg",
    ]
    .into_iter()
    .map(AssetPath::from)
    .collect();
    CoursePackage {
        course_id: "hydraulic-pump".into(),
        title: "Hydraulic Pump Installation".into(),
        dim_opacity: DEFAULT_DIM_OPACITY,
        assembly,
        procedures: vec![procedure],
        asset_index,
    }
}

const TEXT_PIECES: [&str; 10] = [
    "pump", "Ventil", "filtre à huile", "\"quoted\"", "back\\slash", "line\nbreak", "tab\there", "λ", "  ", "x",
];

fn text<R: Rng + ?Sized>(rng: &mut R) -> String {
    let n = rng.random_range(1..=3);
    let mut s = String::new();
    for _ in 0..n {
        s.push_str(TEXT_PIECES[rng.random_range(0..TEXT_PIECES.len())]);
    }
    s
}

fn texts<R: Rng + ?Sized>(rng: &mut R, max: usize) -> Vec<String> {
    let n = rng.random_range(0..=max);
    (0..n).map(|_| text(rng)).collect()
}

fn coordinate<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Arbitrary bit patterns exercise float formatting on the wire.
    rng.random_range(-10.0..10.0)
}

/// A random package that passes validation with no errors. Parts count is
/// `1..=max_parts`.
pub fn valid_package<R: Rng + ?Sized>(rng: &mut R, max_parts: usize) -> CoursePackage {
    let n_parts = rng.random_range(1..=max_parts.max(1));
    let mut asset_index = BTreeSet::new();
    let parts: Vec<Part> = (0..n_parts)
        .map(|i| {
            let mesh = AssetPath::new(format!("meshes/part-{i}.glb"));
            asset_index.insert(mesh.clone());
            Part {
                part_number: PartNumber::new(format!("P-{}", 100 + i)),
                nomenclature: text(rng),
                mesh_ref: mesh,
                default_transform: Transform {
                    position: [coordinate(rng), coordinate(rng), coordinate(rng)],
                    rotation: [coordinate(rng), coordinate(rng), coordinate(rng), coordinate(rng)],
                },
            }
        })
        .collect();

    let tool_pool: Vec<ToolId> = (0..4).map(|i| ToolId::new(format!("T-{}", 10 + i))).collect();
    let n_procedures = rng.random_range(1..=3);
    let procedures = (0..n_procedures)
        .map(|pi| {
            let direction = if rng.random_bool(0.5) { Direction::Installation } else { Direction::Removal };
            let mut order: Vec<usize> = (0..n_parts).collect();
            order.shuffle(rng);
            order.truncate(rng.random_range(1..=n_parts));

            let mut required_tools: Vec<ToolId> =
                tool_pool.iter().filter(|_| rng.random_bool(0.5)).cloned().collect();
            let steps = order
                .iter()
                .enumerate()
                .map(|(si, &part)| {
                    let tool = if required_tools.is_empty() || rng.random_bool(0.3) {
                        None
                    } else {
                        Some(required_tools[rng.random_range(0..required_tools.len())].clone())
                    };
                    let torque = match &tool {
                        Some(_) if rng.random_bool(0.6) => Some(NewtonMeters(rng.random_range(0.5..200.0))),
                        _ => None,
                    };
                    let notices = (0..rng.random_range(0..=3))
                        .map(|_| SafetyNotice {
                            kind: if rng.random_bool(0.5) { NoticeKind::Warning } else { NoticeKind::Caution },
                            text: format!("notice {}", text(rng)),
                        })
                        .collect();
                    let mut asset = |dir: &str, ext: &str| {
                        rng.random_bool(0.5).then(|| {
                            let path = AssetPath::new(format!("{dir}/proc-{pi}-step-{si}.{ext}"));
                            asset_index.insert(path.clone());
                            path
                        })
                    };
                    let animation_ref = asset("animations", "json");
                    let narration_ref = asset("audio", "ogg");
                    ProcedureStep {
                        index: si as u32,
                        action: direction.step_action(),
                        part_number: parts[part].part_number.clone(),
                        tool,
                        torque,
                        callout_text: format!("step {si} {}", text(rng)),
                        notices,
                        animation_ref,
                        narration_ref,
                    }
                })
                .collect();
            if rng.random_bool(0.2) {
                required_tools.reverse();
            }
            Procedure {
                procedure_id: ProcedureId::new(format!("proc-{pi}")),
                direction,
                pre_steps: texts(rng, 2),
                post_steps: texts(rng, 2),
                required_tools,
                consumables: texts(rng, 2),
                spares: texts(rng, 2),
                steps,
            }
        })
        .collect();

    CoursePackage {
        course_id: CourseId::new(format!("course-{}", rng.random_range(0..1000u32))),
        title: text(rng),
        dim_opacity: if rng.random_bool(0.5) { DEFAULT_DIM_OPACITY } else { rng.random_range(0.05..0.95) },
        assembly: Assembly { assembly_id: "assy".into(), name: text(rng), parts },
        procedures,
        asset_index,
    }
}

/// Introduces exactly one violation of `rule` into an otherwise valid
/// package. Supports the referential rules V-1 through V-6.
pub fn inject_fault<R: Rng + ?Sized>(pkg: &mut CoursePackage, rule: RuleId, rng: &mut R) {
    let pi = rng.random_range(0..pkg.procedures.len());
    let procedure = &mut pkg.procedures[pi];
    let si = rng.random_range(0..procedure.steps.len());
    match rule {
        RuleId::DuplicatePartNumber => {
            let mut twin = pkg.assembly.parts[0].clone();
            twin.nomenclature.push_str(" (twin)");
            pkg.assembly.parts.push(twin);
        }
        RuleId::UnknownStepPart => procedure.steps[si].part_number = "P-UNKNOWN".into(),
        RuleId::DirectionMismatch => {
            let wrong = match procedure.direction {
                Direction::Installation => StepAction::Remove,
                Direction::Removal => StepAction::Install,
            };
            procedure.steps[si].action = wrong;
        }
        RuleId::UndeclaredTool => procedure.steps[si].tool = Some("T-UNDECLARED".into()),
        RuleId::DanglingAsset => {
            let part = rng.random_range(0..pkg.assembly.parts.len());
            pkg.assembly.parts[part].mesh_ref = "meshes/missing.glb".into();
        }
        RuleId::TorqueWithoutTool => {
            let step = &mut procedure.steps[si];
            step.tool = None;
            step.torque = Some(NewtonMeters(12.5));
        }
        other => panic!("no fault injector for {other}"),
    }
}
