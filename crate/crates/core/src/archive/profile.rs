use std::fs;

use chrono::{DateTime, Utc};
use rayon::prelude::*;

use super::adapters::{Records, ADAPTERS};
use super::{ArchiveError, ArchiveManifest, ArchiveProfile};

struct FileScan {
    records: u64,
    bytes: u64,
    stamps: Vec<DateTime<Utc>>,
}

/// Re-reads every manifest file (in parallel) and aggregates counts,
/// timestamps and sizes. Fails if a file's record count no longer matches
/// the manifest.
pub fn profile(manifest: &ArchiveManifest) -> Result<ArchiveProfile, ArchiveError> {
    let scans: Vec<Result<FileScan, ArchiveError>> = manifest
        .files
        .par_iter()
        .map(|file| {
            let path = manifest.root.join(&file.relative_path);
            let bytes = fs::metadata(&path).map_err(|e| ArchiveError::io(&path, e))?.len();
            let (records, stamps) = match ADAPTERS.read_records(&path) {
                Ok(Records::Parsed(records)) => {
                    let stamps = records.iter().filter_map(|r| ADAPTERS.timestamp_of(r)).collect();
                    (records.len() as u64, stamps)
                }
                Ok(Records::Unstructured) | Err(_) => (0, Vec::new()),
            };
            if records != file.record_count {
                return Err(ArchiveError::ManifestMismatch {
                    path: file.relative_path.clone(),
                    expected: file.record_count,
                    found: records,
                });
            }
            Ok(FileScan { records, bytes, stamps })
        })
        .collect();

    let mut out = ArchiveProfile::empty(manifest.service.clone());
    for (file, scan) in manifest.files.iter().zip(scans) {
        let scan = scan?;
        *out.counts_by_kind.entry(file.kind).or_insert(0) += scan.records;
        out.total_bytes += scan.bytes;
        for t in scan.stamps {
            out.earliest = Some(out.earliest.map_or(t, |e| e.min(t)));
            out.latest = Some(out.latest.map_or(t, |l| l.max(t)));
            *out.monthly_histogram.entry(t.format("%Y-%m").to_string()).or_insert(0) += 1;
        }
    }
    Ok(out)
}
