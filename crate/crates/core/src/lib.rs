//! Courseware model and training engines for interactive 3D maintenance
//! training.
//!
//! A course is a [`CoursePackage`]: one assembly, one or more removal or
//! installation procedures, and the assets they reference. Trainees move
//! through three modules in a fixed order:
//!
//! 1. Part Familiarization ([`familiarization`]): pick parts from the parts
//!    list, see them isolated in context view.
//! 2. Procedure ([`playback`]): watch the procedure one animated step at a
//!    time, with callouts and safety notices.
//! 3. Practice ([`practice`]): move parts between bin and assembly in the
//!    right order; wrong moves raise a blocking alert.
//!
//! [`session`] enforces that order and keeps the event log that
//! [`metrics`] turns into training and task times.
//!
//! The crate is `no_std` and only needs `alloc`. Reading packages from disk,
//! the HTTP service and the CLI live in the `mtrain` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod familiarization;
pub mod metrics;
pub mod model;
pub mod playback;
pub mod practice;
pub mod run;
pub mod session;
#[cfg(any(test, feature = "testkit"))]
pub mod testkit;
pub mod validate;

pub use model::{
    required_resources, AssemblyId, Assembly, AssetPath, CourseId, CoursePackage, Direction,
    NewtonMeters, NoticeKind, Part, PartNumber, Procedure, ProcedureId, ProcedureStep,
    RequiredResources, SafetyNotice, StepAction, ToolId, Transform, DEFAULT_DIM_OPACITY,
};
pub use validate::{validate_package, Finding, RuleId, Severity, ValidationReport};
