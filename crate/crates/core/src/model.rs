//! Courseware data model.
//!
//! Field names and enum spellings here are the manifest wire format: keys are
//! snake_case, enum values SCREAMING_SNAKE_CASE, and unknown keys are
//! rejected when deserializing.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Opacity applied to non-selected parts in context view when the package
/// does not set one.
pub const DEFAULT_DIM_OPACITY: f64 = 0.2;

macro_rules! identifier {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(value: impl Into<String>) -> Self {
                Self(value.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(value: &str) -> Self {
                Self(value.into())
            }
        }

        impl From<String> for $name {
            fn from(value: String) -> Self {
                Self(value)
            }
        }
    };
}

identifier!(
    /// Part number, unique within an assembly.
    PartNumber
);
identifier!(ToolId);
identifier!(ProcedureId);
identifier!(CourseId);
identifier!(AssemblyId);
identifier!(
    /// Package-relative asset path with `/` separators, e.g. `meshes/pump.glb`.
    AssetPath
);

/// Tightening torque in newton-meters.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NewtonMeters(pub f64);

impl fmt::Display for NewtonMeters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} N·m", self.0)
    }
}

/// Rest pose of a part: position in meters, rotation as an `[x, y, z, w]`
/// quaternion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transform {
    pub position: [f64; 3],
    pub rotation: [f64; 4],
}

impl Default for Transform {
    fn default() -> Self {
        Self {
            position: [0.0; 3],
            rotation: [0.0, 0.0, 0.0, 1.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Part {
    pub part_number: PartNumber,
    pub nomenclature: String,
    pub mesh_ref: AssetPath,
    #[serde(default)]
    pub default_transform: Transform,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assembly {
    pub assembly_id: AssemblyId,
    pub name: String,
    pub parts: Vec<Part>,
}

impl Assembly {
    pub fn part(&self, part_number: &PartNumber) -> Option<&Part> {
        self.parts.iter().find(|p| &p.part_number == part_number)
    }

    pub fn part_numbers(&self) -> impl Iterator<Item = &PartNumber> {
        self.parts.iter().map(|p| &p.part_number)
    }
}

/// Warnings flag hazards to personnel (loss of life, injury, ill health).
/// Cautions flag possible damage to material only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NoticeKind {
    Warning,
    Caution,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SafetyNotice {
    pub kind: NoticeKind,
    pub text: String,
}

impl SafetyNotice {
    pub fn warning(text: impl Into<String>) -> Self {
        Self { kind: NoticeKind::Warning, text: text.into() }
    }

    pub fn caution(text: impl Into<String>) -> Self {
        Self { kind: NoticeKind::Caution, text: text.into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StepAction {
    Install,
    Remove,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Direction {
    Removal,
    Installation,
}

impl Direction {
    /// The only step action allowed in a procedure of this direction.
    pub fn step_action(self) -> StepAction {
        match self {
            Direction::Removal => StepAction::Remove,
            Direction::Installation => StepAction::Install,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Removal => "REMOVAL",
            Direction::Installation => "INSTALLATION",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcedureStep {
    pub index: u32,
    pub action: StepAction,
    pub part_number: PartNumber,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool: Option<ToolId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torque: Option<NewtonMeters>,
    pub callout_text: String,
    #[serde(default)]
    pub notices: Vec<SafetyNotice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub animation_ref: Option<AssetPath>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub narration_ref: Option<AssetPath>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Procedure {
    pub procedure_id: ProcedureId,
    pub direction: Direction,
    #[serde(default)]
    pub pre_steps: Vec<String>,
    #[serde(default)]
    pub post_steps: Vec<String>,
    #[serde(default)]
    pub required_tools: Vec<ToolId>,
    #[serde(default)]
    pub consumables: Vec<String>,
    #[serde(default)]
    pub spares: Vec<String>,
    pub steps: Vec<ProcedureStep>,
}

impl Procedure {
    /// Step parts in procedure order.
    pub fn step_parts(&self) -> Vec<PartNumber> {
        self.steps.iter().map(|s| s.part_number.clone()).collect()
    }
}

fn default_dim_opacity() -> f64 {
    DEFAULT_DIM_OPACITY
}

/// One course unit: an assembly, its procedures and the assets they use.
///
/// `asset_index` is not part of the manifest; it is the set of asset files
/// found next to it in the package directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoursePackage {
    pub course_id: CourseId,
    pub title: String,
    #[serde(default = "default_dim_opacity")]
    pub dim_opacity: f64,
    pub assembly: Assembly,
    pub procedures: Vec<Procedure>,
    #[serde(skip)]
    pub asset_index: BTreeSet<AssetPath>,
}

impl CoursePackage {
    pub fn procedure(&self, id: &ProcedureId) -> Option<&Procedure> {
        self.procedures.iter().find(|p| &p.procedure_id == id)
    }

    /// Every asset path referenced from parts and steps, in manifest order.
    pub fn asset_refs(&self) -> impl Iterator<Item = &AssetPath> {
        let meshes = self.assembly.parts.iter().map(|p| &p.mesh_ref);
        let step_assets = self
            .procedures
            .iter()
            .flat_map(|p| p.steps.iter())
            .flat_map(|s| s.animation_ref.iter().chain(s.narration_ref.iter()));
        meshes.chain(step_assets)
    }
}

/// Tools, consumables and spares a technician has to gather before starting.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequiredResources {
    pub tools: Vec<ToolId>,
    pub consumables: Vec<String>,
    pub spares: Vec<String>,
}

/// Declared tools followed by any tool used in a step, each once, in order of
/// first occurrence.
pub fn required_resources(procedure: &Procedure) -> RequiredResources {
    let mut tools: Vec<ToolId> = Vec::new();
    let declared = procedure.required_tools.iter();
    let used = procedure.steps.iter().filter_map(|s| s.tool.as_ref());
    for tool in declared.chain(used) {
        if !tools.contains(tool) {
            tools.push(tool.clone());
        }
    }
    RequiredResources {
        tools,
        consumables: procedure.consumables.clone(),
        spares: procedure.spares.clone(),
    }
}
