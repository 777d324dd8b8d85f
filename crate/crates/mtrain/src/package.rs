//! Course packages on disk.
//!
//! ```text
//! <root>/manifest.json      course, assembly and procedures
//! <root>/meshes/*.glb       part meshes (mesh_ref)
//! <root>/audio/*.ogg        narration clips (narration_ref)
//! <root>/animations/*.json  keyframe tracks (animation_ref)
//! ```
//!
//! Parsing is strict: unknown manifest keys and duplicate keys are errors.
//! Parsing does not validate references; see `mtrain_core::validate_package`.

use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use mtrain_core::{AssetPath, CoursePackage, PartNumber};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MANIFEST: &str = "manifest.json";

/// Asset directories and the file extension each one holds.
pub const ASSET_DIRS: [(&str, &str); 3] = [("meshes", "glb"), ("audio", "ogg"), ("animations", "json")];

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("no {MANIFEST} in {0}")]
    MissingManifest(PathBuf),
    #[error("malformed manifest at line {line}: {reason}")]
    MalformedManifest { line: usize, reason: String },
    #[error("unknown manifest field {path}")]
    UnknownField { path: String },
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

#[derive(Debug, Error)]
pub enum WriteError {
    #[error("package invariant violated: {0}")]
    InvariantViolation(String),
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

fn io_err<E>(path: &Path, wrap: impl FnOnce(PathBuf, io::Error) -> E) -> impl FnOnce(io::Error) -> E {
    let path = path.to_path_buf();
    move |source| wrap(path, source)
}

/// Deserializes a manifest, mapping serde errors onto [`ParseError`].
pub fn parse_manifest(text: &str) -> Result<CoursePackage, ParseError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let pkg: CoursePackage = serde_path_to_error::deserialize(&mut de).map_err(|err| {
        let inner = err.inner();
        if inner.to_string().starts_with("unknown field") {
            ParseError::UnknownField { path: err.path().to_string() }
        } else {
            ParseError::MalformedManifest { line: inner.line(), reason: inner.to_string() }
        }
    })?;
    de.end().map_err(|e| ParseError::MalformedManifest { line: e.line(), reason: e.to_string() })?;
    Ok(pkg)
}

/// Reads a package directory. `asset_index` is filled from the files found
/// in the asset directories.
pub fn parse_package(root: &Path) -> Result<CoursePackage, ParseError> {
    let manifest_path = root.join(MANIFEST);
    if !manifest_path.is_file() {
        return Err(ParseError::MissingManifest(root.to_path_buf()));
    }
    let text = fs::read_to_string(&manifest_path).map_err(io_err(&manifest_path, |path, source| ParseError::Io { path, source }))?;
    let mut pkg = parse_manifest(&text)?;
    pkg.asset_index = scan_assets(root)?;
    Ok(pkg)
}

fn scan_assets(root: &Path) -> Result<BTreeSet<AssetPath>, ParseError> {
    let mut index = BTreeSet::new();
    for (dir, ext) in ASSET_DIRS {
        let path = root.join(dir);
        if !path.is_dir() {
            continue;
        }
        let entries = fs::read_dir(&path).map_err(io_err(&path, |path, source| ParseError::Io { path, source }))?;
        for entry in entries {
            let entry = entry.map_err(io_err(&path, |path, source| ParseError::Io { path, source }))?;
            let file = entry.path();
            let Some(name) = file.file_name().and_then(|n| n.to_str()) else { continue };
            if file.is_file() && file.extension().is_some_and(|e| e == ext) {
                index.insert(AssetPath::new(format!("{dir}/{name}")));
            }
        }
    }
    Ok(index)
}

/// Checks that an asset path names a file directly inside the asset
/// directory for its kind, e.g. `meshes/pump.glb`.
pub fn asset_path_in_layout(asset: &AssetPath) -> bool {
    let Some((dir, file)) = asset.as_str().split_once('/') else { return false };
    let Some(ext) = ASSET_DIRS.iter().find(|(d, _)| *d == dir).map(|(_, e)| *e) else { return false };
    !file.is_empty()
        && !file.contains(['/', '\\'])
        && file != ".."
        && Path::new(file).extension().is_some_and(|e| e == ext)
}

/// Writes `pkg` under `dest`: the manifest, plus one file per entry of
/// `asset_index`. Asset bytes are copied from `assets_from` when the file
/// exists there, otherwise an empty placeholder is written.
pub fn serialize_package(pkg: &CoursePackage, dest: &Path, assets_from: Option<&Path>) -> Result<(), WriteError> {
    if pkg.procedures.is_empty() {
        return Err(WriteError::InvariantViolation("package has no procedures".into()));
    }
    if pkg.assembly.parts.is_empty() {
        return Err(WriteError::InvariantViolation("assembly has no parts".into()));
    }
    if let Some(bad) = pkg.asset_index.iter().find(|a| !asset_path_in_layout(a)) {
        return Err(WriteError::InvariantViolation(format!("asset path {bad} is outside the package layout")));
    }

    let write_err = |path: &Path| io_err(path, |path, source| WriteError::Io { path, source });
    fs::create_dir_all(dest).map_err(write_err(dest))?;
    let mut json = serde_json::to_string_pretty(pkg).expect("package serializes");
    json.push('\n');
    let manifest = dest.join(MANIFEST);
    fs::write(&manifest, json).map_err(write_err(&manifest))?;

    for asset in &pkg.asset_index {
        let target = dest.join(asset.as_str());
        if let Some(dir) = target.parent() {
            fs::create_dir_all(dir).map_err(write_err(dir))?;
        }
        let source = assets_from.map(|root| root.join(asset.as_str())).filter(|p| p.is_file());
        match source {
            Some(src) if src != target => {
                fs::copy(&src, &target).map_err(write_err(&target))?;
            }
            Some(_) => {}
            None => fs::write(&target, []).map_err(write_err(&target))?,
        }
    }
    Ok(())
}

/// One keyframe of an animation track.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Keyframe {
    pub time_s: f64,
    pub part_number: PartNumber,
    pub position: [f64; 3],
    pub rotation: [f64; 4],
}

#[derive(Debug, Error)]
pub enum AnimationError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("malformed animation track: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("keyframe {index} at {time_s} s goes back in time")]
    TimeRegression { index: usize, time_s: f64 },
}

pub fn parse_animation(text: &str) -> Result<Vec<Keyframe>, AnimationError> {
    let track: Vec<Keyframe> = serde_json::from_str(text)?;
    let mut last = f64::NEG_INFINITY;
    for (index, key) in track.iter().enumerate() {
        if key.time_s.is_nan() || key.time_s < last {
            return Err(AnimationError::TimeRegression { index, time_s: key.time_s });
        }
        last = key.time_s;
    }
    Ok(track)
}

pub fn load_animation(path: &Path) -> Result<Vec<Keyframe>, AnimationError> {
    let text = fs::read_to_string(path).map_err(io_err(path, |path, source| AnimationError::Io { path, source }))?;
    parse_animation(&text)
}

/// Length of a track in seconds.
pub fn animation_duration_s(track: &[Keyframe]) -> f64 {
    track.last().map_or(0.0, |k| k.time_s)
}
