#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

pub fn demo_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../demo")
}

pub fn demo_package() -> PathBuf {
    demo_dir().join("hydraulic-pump")
}

pub fn reports_dir() -> PathBuf {
    demo_dir().join("reports")
}

/// Copies a package directory tree (one level of asset subdirectories).
pub fn copy_package(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let dest = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_package(&entry.path(), &dest);
        } else {
            fs::copy(entry.path(), dest).unwrap();
        }
    }
}
