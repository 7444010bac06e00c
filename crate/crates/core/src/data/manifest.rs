use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::io::Format;
use crate::error::{Error, Result};

/// A class label as written in a manifest: numeric id or name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Id(u32),
    Name(String),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Id(id) => write!(f, "{id}"),
            Label::Name(name) => f.write_str(name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: Label,
    pub fs: f64,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RecordingManifest {
    pub entries: Vec<ManifestEntry>,
    /// Directory that relative entry paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RecordingManifest {
    pub fn new(entries: Vec<ManifestEntry>) -> Self {
        Self {
            entries,
            base_dir: PathBuf::new(),
        }
    }

    /// Reads a manifest. Entry paths are kept as written; relative ones resolve
    /// against the manifest's directory (see [`RecordingManifest::resolve`]).
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Ingestion {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let mut manifest: RecordingManifest =
            serde_json::from_str(&text).map_err(|e| Error::Ingestion {
                path: path.to_path_buf(),
                message: format!("invalid manifest: {e}"),
            })?;
        manifest.base_dir = path.parent().unwrap_or(Path::new("")).to_path_buf();
        Ok(manifest)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    /// Filesystem location of an entry.
    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        self.base_dir.join(&entry.path)
    }

    /// Checks that every file is readable and the class set is usable.
    pub fn validate(&self, min_classes: usize) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::Config("manifest has no entries".into()));
        }
        for e in &self.entries {
            let path = self.resolve(e);
            if let Err(err) = fs::File::open(&path) {
                return Err(Error::Ingestion {
                    path,
                    message: err.to_string(),
                });
            }
            if !(e.fs.is_finite() && e.fs > 0.0) {
                return Err(Error::Config(format!(
                    "{}: sampling rate must be positive",
                    e.path.display()
                )));
            }
        }
        let classes = self.class_names();
        if classes.len() < min_classes {
            return Err(Error::Config(format!(
                "manifest declares {} class(es), need at least {min_classes}",
                classes.len()
            )));
        }
        Ok(())
    }

    /// Distinct labels in order of first appearance.
    pub fn class_names(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for e in &self.entries {
            let name = e.label.to_string();
            if !names.contains(&name) {
                names.push(name);
            }
        }
        names
    }
}
