//! Referential-integrity checks for course packages.
//!
//! A package whose report has no errors can be driven through the
//! familiarization, playback and practice engines without any lookup
//! failing.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{CoursePackage, Procedure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RuleId {
    /// Two parts share a part number.
    #[serde(rename = "V-1")]
    DuplicatePartNumber,
    /// A step names a part that is not in the assembly.
    #[serde(rename = "V-2")]
    UnknownStepPart,
    /// A step action does not match the procedure direction.
    #[serde(rename = "V-3")]
    DirectionMismatch,
    /// A step tool is missing from the procedure's required tools.
    #[serde(rename = "V-4")]
    UndeclaredTool,
    /// A part or step references an asset that is not in the package.
    #[serde(rename = "V-5")]
    DanglingAsset,
    /// A step has a torque but no tool.
    #[serde(rename = "V-6")]
    TorqueWithoutTool,
    /// A part is never used by any procedure (warning).
    #[serde(rename = "V-7")]
    UnreferencedPart,
    /// A step has empty callout text (warning).
    #[serde(rename = "V-8")]
    EmptyCallout,
    /// Step indices are not exactly 0..N-1 in order.
    #[serde(rename = "V-9")]
    StepIndexGap,
    /// A part is used by more than one step of the same procedure.
    #[serde(rename = "V-10")]
    RepeatedStepPart,
    /// Torque is not a positive finite number.
    #[serde(rename = "V-11")]
    NonPositiveTorque,
    /// Package has no procedures, assembly has no parts, or a procedure has
    /// no steps.
    #[serde(rename = "V-12")]
    EmptyCollection,
    /// Empty identifier, or two procedures share an id.
    #[serde(rename = "V-13")]
    BadIdentifier,
    /// dim_opacity is outside the open interval (0, 1).
    #[serde(rename = "V-14")]
    DimOpacityRange,
    /// Safety notice with empty text.
    #[serde(rename = "V-15")]
    EmptyNotice,
}

impl RuleId {
    pub const ALL: [RuleId; 15] = [
        RuleId::DuplicatePartNumber,
        RuleId::UnknownStepPart,
        RuleId::DirectionMismatch,
        RuleId::UndeclaredTool,
        RuleId::DanglingAsset,
        RuleId::TorqueWithoutTool,
        RuleId::UnreferencedPart,
        RuleId::EmptyCallout,
        RuleId::StepIndexGap,
        RuleId::RepeatedStepPart,
        RuleId::NonPositiveTorque,
        RuleId::EmptyCollection,
        RuleId::BadIdentifier,
        RuleId::DimOpacityRange,
        RuleId::EmptyNotice,
    ];

    pub fn code(self) -> &'static str {
        match self {
            RuleId::DuplicatePartNumber => "V-1",
            RuleId::UnknownStepPart => "V-2",
            RuleId::DirectionMismatch => "V-3",
            RuleId::UndeclaredTool => "V-4",
            RuleId::DanglingAsset => "V-5",
            RuleId::TorqueWithoutTool => "V-6",
            RuleId::UnreferencedPart => "V-7",
            RuleId::EmptyCallout => "V-8",
            RuleId::StepIndexGap => "V-9",
            RuleId::RepeatedStepPart => "V-10",
            RuleId::NonPositiveTorque => "V-11",
            RuleId::EmptyCollection => "V-12",
            RuleId::BadIdentifier => "V-13",
            RuleId::DimOpacityRange => "V-14",
            RuleId::EmptyNotice => "V-15",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            RuleId::UnreferencedPart | RuleId::EmptyCallout => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub rule_id: RuleId,
    /// Dotted path into the manifest, e.g. `procedures[0].steps[2].tool`.
    pub location: String,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.rule_id, self.location, self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_accepted(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn has(&self, rule: RuleId) -> bool {
        self.errors.iter().chain(&self.warnings).any(|f| f.rule_id == rule)
    }

    fn push(&mut self, rule_id: RuleId, location: String, message: String) {
        let finding = Finding { rule_id, location, message };
        match rule_id.severity() {
            Severity::Error => self.errors.push(finding),
            Severity::Warning => self.warnings.push(finding),
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.errors {
            writeln!(f, "error   {e}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning {w}")?;
        }
        write!(f, "{} error(s), {} warning(s)", self.errors.len(), self.warnings.len())
    }
}

/// Checks every rule and collects all findings; never stops at the first.
pub fn validate_package(pkg: &CoursePackage) -> ValidationReport {
    let mut report = ValidationReport::default();

    if !(pkg.dim_opacity > 0.0 && pkg.dim_opacity < 1.0) {
        report.push(
            RuleId::DimOpacityRange,
            "dim_opacity".into(),
            format!("dim_opacity {} must lie strictly between 0 and 1", pkg.dim_opacity),
        );
    }
    if pkg.course_id.as_str().is_empty() {
        report.push(RuleId::BadIdentifier, "course_id".into(), "course_id is empty".into());
    }

    check_assembly(pkg, &mut report);

    if pkg.procedures.is_empty() {
        report.push(RuleId::EmptyCollection, "procedures".into(), "package has no procedures".into());
    }
    let mut procedure_ids = BTreeSet::new();
    for (pi, procedure) in pkg.procedures.iter().enumerate() {
        let at = format!("procedures[{pi}]");
        if procedure.procedure_id.as_str().is_empty() {
            report.push(RuleId::BadIdentifier, format!("{at}.procedure_id"), "procedure_id is empty".into());
        } else if !procedure_ids.insert(&procedure.procedure_id) {
            report.push(
                RuleId::BadIdentifier,
                format!("{at}.procedure_id"),
                format!("procedure id {} is used twice", procedure.procedure_id),
            );
        }
        check_procedure(pkg, procedure, &at, &mut report);
    }

    for (pi, part) in pkg.assembly.parts.iter().enumerate() {
        if !pkg.asset_index.contains(&part.mesh_ref) {
            report.push(
                RuleId::DanglingAsset,
                format!("assembly.parts[{pi}].mesh_ref"),
                format!("mesh {} is not in the package", part.mesh_ref),
            );
        }
    }

    let used: BTreeSet<_> = pkg
        .procedures
        .iter()
        .flat_map(|p| p.steps.iter().map(|s| &s.part_number))
        .collect();
    for (pi, part) in pkg.assembly.parts.iter().enumerate() {
        if !part.part_number.as_str().is_empty() && !used.contains(&part.part_number) {
            report.push(
                RuleId::UnreferencedPart,
                format!("assembly.parts[{pi}]"),
                format!("part {} is not used by any procedure", part.part_number),
            );
        }
    }

    report
}

fn check_assembly(pkg: &CoursePackage, report: &mut ValidationReport) {
    let assembly = &pkg.assembly;
    if assembly.assembly_id.as_str().is_empty() {
        report.push(RuleId::BadIdentifier, "assembly.assembly_id".into(), "assembly_id is empty".into());
    }
    if assembly.parts.is_empty() {
        report.push(RuleId::EmptyCollection, "assembly.parts".into(), "assembly has no parts".into());
    }
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for (pi, part) in assembly.parts.iter().enumerate() {
        let number = part.part_number.as_str();
        if number.is_empty() {
            report.push(
                RuleId::BadIdentifier,
                format!("assembly.parts[{pi}].part_number"),
                "part_number is empty".into(),
            );
            continue;
        }
        if let Some(first) = seen.insert(number, pi) {
            report.push(
                RuleId::DuplicatePartNumber,
                "assembly.parts".into(),
                format!("part number {number} is used by parts[{first}] and parts[{pi}]"),
            );
        }
    }
}

fn check_procedure(pkg: &CoursePackage, procedure: &Procedure, at: &str, report: &mut ValidationReport) {
    if procedure.steps.is_empty() {
        report.push(RuleId::EmptyCollection, format!("{at}.steps"), "procedure has no steps".into());
    }
    let expected_action = procedure.direction.step_action();
    let mut step_parts = BTreeSet::new();

    for (si, step) in procedure.steps.iter().enumerate() {
        let at = format!("{at}.steps[{si}]");
        if step.index as usize != si {
            report.push(
                RuleId::StepIndexGap,
                format!("{at}.index"),
                format!("step at position {si} has index {}", step.index),
            );
        }
        if pkg.assembly.part(&step.part_number).is_none() {
            report.push(
                RuleId::UnknownStepPart,
                format!("{at}.part_number"),
                format!("part {} is not in the assembly", step.part_number),
            );
        }
        if !step_parts.insert(&step.part_number) {
            report.push(
                RuleId::RepeatedStepPart,
                format!("{at}.part_number"),
                format!("part {} already appears in an earlier step", step.part_number),
            );
        }
        if step.action != expected_action {
            report.push(
                RuleId::DirectionMismatch,
                format!("{at}.action"),
                format!("{:?} step in a {} procedure", step.action, procedure.direction),
            );
        }
        match (&step.tool, step.torque) {
            (Some(tool), _) if !procedure.required_tools.contains(tool) => report.push(
                RuleId::UndeclaredTool,
                format!("{at}.tool"),
                format!("tool {tool} is not in required_tools"),
            ),
            (None, Some(_)) => report.push(
                RuleId::TorqueWithoutTool,
                format!("{at}.torque"),
                "torque given without a tool".into(),
            ),
            _ => {}
        }
        if let Some(torque) = step.torque {
            if !(torque.0.is_finite() && torque.0 > 0.0) {
                report.push(
                    RuleId::NonPositiveTorque,
                    format!("{at}.torque"),
                    format!("torque {} must be positive", torque.0),
                );
            }
        }
        if step.callout_text.trim().is_empty() {
            report.push(RuleId::EmptyCallout, format!("{at}.callout_text"), "callout text is empty".into());
        }
        for (ni, notice) in step.notices.iter().enumerate() {
            if notice.text.trim().is_empty() {
                report.push(
                    RuleId::EmptyNotice,
                    format!("{at}.notices[{ni}].text"),
                    "safety notice text is empty".into(),
                );
            }
        }
        for (field, asset) in [("animation_ref", &step.animation_ref), ("narration_ref", &step.narration_ref)] {
            if let Some(asset) = asset {
                if !pkg.asset_index.contains(asset) {
                    report.push(
                        RuleId::DanglingAsset,
                        format!("{at}.{field}"),
                        format!("asset {asset} is not in the package"),
                    );
                }
            }
        }
    }
}
