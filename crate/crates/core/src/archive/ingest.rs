use std::path::Path;

use walkdir::WalkDir;

use super::adapters::{Records, ADAPTERS};
use super::{ArchiveError, ArchiveManifest, IngestWarning, ManifestFile, RecordKind};

pub(super) fn relative(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/")
}

/// Lists every regular file below `dir` in path order and counts its
/// records. Files that fail to parse are kept as kind `other` with zero
/// records and a warning.
pub fn ingest(dir: &Path, service_hint: Option<&str>) -> Result<ArchiveManifest, ArchiveError> {
    if !dir.is_dir() {
        return Err(ArchiveError::io(dir, "not a directory"));
    }
    let mut paths = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| ArchiveError::io(e.path().unwrap_or(dir).to_path_buf(), &e))?;
        if entry.file_type().is_file() {
            paths.push(entry.into_path());
        }
    }
    if paths.is_empty() {
        return Err(ArchiveError::EmptyArchive(dir.to_path_buf()));
    }

    let mut files = Vec::with_capacity(paths.len());
    let mut warnings = Vec::new();
    for path in &paths {
        let relative_path = relative(dir, path);
        let (kind, record_count) = match ADAPTERS.read_records(path) {
            Ok(Records::Unstructured) => (ADAPTERS.kind_of(&relative_path), 0),
            Ok(Records::Parsed(records)) => (ADAPTERS.kind_of(&relative_path), records.len() as u64),
            Err(message) => {
                log::warn!("skipping unreadable file {relative_path}: {message}");
                warnings.push(IngestWarning { relative_path: relative_path.clone(), message });
                (RecordKind::Other, 0)
            }
        };
        files.push(ManifestFile { relative_path, kind, record_count });
    }

    let rel_paths: Vec<String> = files.iter().map(|f| f.relative_path.clone()).collect();
    let service = match service_hint.map(str::trim).filter(|s| !s.is_empty()) {
        Some(hint) => hint.to_string(),
        None => ADAPTERS.detect_service(&rel_paths).unwrap_or_else(|| {
            dir.canonicalize()
                .ok()
                .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
                .unwrap_or_else(|| "unknown".to_string())
        }),
    };
    Ok(ArchiveManifest { service, root: dir.to_path_buf(), files, warnings })
}
