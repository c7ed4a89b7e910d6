use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, Utc};
use percent_encoding::{percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use transparency_core::annotation::{AnnotationTask, PolicyText};
use transparency_core::tilt::{self, content_hash, to_json_with_hash, to_value, TiltDocument, ValidationError};

use crate::filter::{self, FilterExpr, QueryHit};
use crate::HubError;

/// One stored version of a document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StoreRecord {
    pub doc: TiltDocument,
    pub stored_at: DateTime<Utc>,
    /// Equal to `doc.meta.hash`.
    pub etag: String,
}

struct Entry {
    dir: PathBuf,
    versions: Vec<u64>,
    latest: Arc<StoreRecord>,
    tree: Arc<Value>,
}

/// File-backed document store.
///
/// Layout below the root:
///
/// ```text
/// documents/<id>/v<N>.tilt   canonical form of version N
/// documents/index.json       id -> versions, rebuilt on open
/// policies/<id>.json
/// tasks/<id>.json
/// ```
///
/// Every file is written to a temporary name, synced, renamed into place
/// and the directory synced, so an acknowledged write survives a crash.
/// Reads are served from memory; writes to one id are serialized, writes
/// to different ids are not.
pub struct Store {
    root: PathBuf,
    docs: RwLock<BTreeMap<String, Entry>>,
    id_locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
    policies: RwLock<BTreeMap<String, PolicyText>>,
    tasks: RwLock<BTreeMap<String, AnnotationTask>>,
    annotation_lock: Mutex<()>,
}

const ID_ESCAPES: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'_');

fn encode_id(id: &str) -> String {
    percent_encode(id.as_bytes(), ID_ESCAPES).to_string()
}

fn sync_dir(dir: &Path) -> std::io::Result<()> {
    File::open(dir)?.sync_all()
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().expect("store paths have a parent");
    let name = path.file_name().expect("store paths have a file name").to_string_lossy();
    let tmp = dir.join(format!(".{name}.tmp"));
    let mut f = File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    drop(f);
    fs::rename(&tmp, path)?;
    sync_dir(dir)
}

fn version_of(file_name: &str) -> Option<u64> {
    file_name.strip_prefix('v')?.strip_suffix(".tilt")?.parse().ok()
}

fn read_record(path: &Path) -> Result<StoreRecord, HubError> {
    let text = fs::read_to_string(path)?;
    let doc = tilt::parse(&text)?;
    let stored_at = fs::metadata(path)?.modified().map(DateTime::<Utc>::from)?;
    Ok(StoreRecord { etag: doc.meta.hash.clone(), doc, stored_at })
}

fn remove_temp_files(dir: &Path) -> std::io::Result<()> {
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.starts_with('.') && name.ends_with(".tmp") {
            fs::remove_file(entry.path())?;
        }
    }
    Ok(())
}

fn load_json<T: for<'de> Deserialize<'de>>(dir: &Path) -> Result<Vec<T>, HubError> {
    let mut out = Vec::new();
    remove_temp_files(dir)?;
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?.filter_map(|e| e.ok().map(|e| e.path())).collect();
    paths.sort();
    for path in paths {
        if path.extension().is_some_and(|e| e == "json") {
            let text = fs::read_to_string(&path)?;
            let value = serde_json::from_str(&text).map_err(|e| HubError::Io(format!("{}: {e}", path.display())))?;
            out.push(value);
        }
    }
    Ok(out)
}

impl Store {
    /// Opens (or creates) a store and rebuilds the index from the version
    /// files on disk.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, HubError> {
        let root = root.into();
        for sub in ["documents", "policies", "tasks"] {
            fs::create_dir_all(root.join(sub))?;
        }
        let docs_dir = root.join("documents");
        remove_temp_files(&docs_dir)?;

        let mut docs = BTreeMap::new();
        let mut dirs: Vec<PathBuf> = fs::read_dir(&docs_dir)?
            .filter_map(|e| e.ok())
            .filter(|e| e.file_type().is_ok_and(|t| t.is_dir()))
            .map(|e| e.path())
            .collect();
        dirs.sort();
        for dir in dirs {
            if dir.file_name().is_some_and(|n| n.to_string_lossy().starts_with('.')) {
                fs::remove_dir_all(&dir)?;
                continue;
            }
            remove_temp_files(&dir)?;
            let mut versions: Vec<u64> = fs::read_dir(&dir)?
                .filter_map(|e| e.ok())
                .filter_map(|e| version_of(&e.file_name().to_string_lossy()))
                .collect();
            versions.sort_unstable();
            let Some(&last) = versions.last() else { continue };
            let latest = read_record(&dir.join(format!("v{last}.tilt")))?;
            let tree = Arc::new(to_value(&latest.doc));
            docs.insert(latest.doc.meta.id.clone(), Entry { dir, versions, latest: Arc::new(latest), tree });
        }

        let policies = load_json::<PolicyText>(&root.join("policies"))?.into_iter().map(|p| (p.id.clone(), p)).collect();
        let tasks = load_json::<AnnotationTask>(&root.join("tasks"))?.into_iter().map(|t| (t.id.clone(), t)).collect();
        let store = Self {
            root,
            docs: RwLock::new(docs),
            id_locks: Mutex::new(HashMap::new()),
            policies: RwLock::new(policies),
            tasks: RwLock::new(tasks),
            annotation_lock: Mutex::new(()),
        };
        store.write_index()?;
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn id_lock(&self, id: &str) -> Arc<Mutex<()>> {
        self.id_locks.lock().unwrap().entry(id.to_string()).or_default().clone()
    }

    fn write_index(&self) -> Result<(), HubError> {
        let index: BTreeMap<String, Vec<u64>> =
            self.docs.read().unwrap().iter().map(|(id, e)| (id.clone(), e.versions.clone())).collect();
        let text = serde_json::to_string_pretty(&index).expect("index serializes");
        write_atomic(&self.root.join("documents/index.json"), text.as_bytes())?;
        Ok(())
    }

    /// Stores a new version and returns its etag. The version must be
    /// greater than the latest stored one.
    pub fn put(&self, doc: TiltDocument) -> Result<String, HubError> {
        tilt::validate(&doc)?;
        let hash = content_hash(&doc);
        if !doc.meta.hash.is_empty() && doc.meta.hash != hash {
            return Err(ValidationError::new("meta/hash", "hash does not match document content").into());
        }
        let doc = doc.sealed();
        let id = doc.meta.id.clone();
        let version = doc.meta.version;

        let lock = self.id_lock(&id);
        let _guard = lock.lock().unwrap();
        let dir = match self.docs.read().unwrap().get(&id) {
            Some(e) => {
                let stored = *e.versions.last().expect("entries hold at least one version");
                if version <= stored {
                    return Err(HubError::VersionConflict { id, stored, got: version });
                }
                e.dir.clone()
            }
            None => self.root.join("documents").join(encode_id(&id)),
        };
        if !dir.exists() {
            fs::create_dir_all(&dir)?;
            sync_dir(&self.root.join("documents"))?;
        }
        let path = dir.join(format!("v{version}.tilt"));
        write_atomic(&path, to_json_with_hash(&doc).as_bytes())?;
        let stored_at = fs::metadata(&path)?.modified().map(DateTime::<Utc>::from)?;

        let etag = doc.meta.hash.clone();
        let tree = Arc::new(to_value(&doc));
        let record = Arc::new(StoreRecord { doc, stored_at, etag: etag.clone() });
        {
            let mut docs = self.docs.write().unwrap();
            let entry = docs.entry(id).or_insert_with(|| Entry { dir, versions: Vec::new(), latest: record.clone(), tree: tree.clone() });
            entry.versions.push(version);
            entry.latest = record;
            entry.tree = tree;
        }
        if let Err(e) = self.write_index() {
            log::warn!("index not updated: {e}");
        }
        Ok(etag)
    }

    /// The latest version, or exactly `version`.
    pub fn fetch(&self, id: &str, version: Option<u64>) -> Result<StoreRecord, HubError> {
        let (dir, want) = {
            let docs = self.docs.read().unwrap();
            let entry = docs.get(id).ok_or_else(|| HubError::NotFound(format!("document {id}")))?;
            match version {
                None => return Ok((*entry.latest).clone()),
                Some(v) if v == entry.latest.doc.meta.version => return Ok((*entry.latest).clone()),
                Some(v) if entry.versions.contains(&v) => (entry.dir.clone(), v),
                Some(v) => return Err(HubError::NotFound(format!("document {id} version {v}"))),
            }
        };
        read_record(&dir.join(format!("v{want}.tilt")))
    }

    pub fn versions(&self, id: &str) -> Result<Vec<u64>, HubError> {
        self.docs
            .read()
            .unwrap()
            .get(id)
            .map(|e| e.versions.clone())
            .ok_or_else(|| HubError::NotFound(format!("document {id}")))
    }

    pub fn ids(&self) -> Vec<String> {
        self.docs.read().unwrap().keys().cloned().collect()
    }

    /// Latest versions in id order.
    pub fn latest(&self) -> Vec<Arc<StoreRecord>> {
        self.docs.read().unwrap().values().map(|e| e.latest.clone()).collect()
    }

    /// Removes a document with all its versions.
    pub fn delete(&self, id: &str) -> Result<(), HubError> {
        let lock = self.id_lock(id);
        let _guard = lock.lock().unwrap();
        let entry = self.docs.write().unwrap().remove(id).ok_or_else(|| HubError::NotFound(format!("document {id}")))?;
        let docs_dir = self.root.join("documents");
        let trash = docs_dir.join(format!(".deleted-{}", encode_id(id)));
        fs::rename(&entry.dir, &trash)?;
        sync_dir(&docs_dir)?;
        fs::remove_dir_all(&trash)?;
        self.write_index()
    }

    /// Evaluates `filter` against the latest version of every document.
    pub fn query(&self, filter: &FilterExpr) -> Vec<QueryHit> {
        let snapshot: Vec<(String, u64, Arc<Value>)> = self
            .docs
            .read()
            .unwrap()
            .iter()
            .map(|(id, e)| (id.clone(), e.latest.doc.meta.version, e.tree.clone()))
            .collect();
        snapshot
            .into_iter()
            .filter_map(|(id, version, tree)| {
                filter::evaluate(filter, &tree).map(|matched_paths| QueryHit { id, version, matched_paths })
            })
            .collect()
    }

    /// Stores a policy text. Re-posting an identical policy is a no-op;
    /// a different body under the same id is a conflict.
    pub fn put_policy(&self, policy: PolicyText) -> Result<PolicyText, HubError> {
        let _guard = self.annotation_lock.lock().unwrap();
        if let Some(existing) = self.policies.read().unwrap().get(&policy.id) {
            if existing.body != policy.body {
                return Err(HubError::Conflict(format!("policy {} exists with different text", policy.id)));
            }
            return Ok(existing.clone());
        }
        let path = self.root.join("policies").join(format!("{}.json", encode_id(&policy.id)));
        write_atomic(&path, serde_json::to_string(&policy).expect("policy serializes").as_bytes())?;
        self.policies.write().unwrap().insert(policy.id.clone(), policy.clone());
        Ok(policy)
    }

    pub fn policy(&self, id: &str) -> Result<PolicyText, HubError> {
        self.policies.read().unwrap().get(id).cloned().ok_or_else(|| HubError::NotFound(format!("policy {id}")))
    }

    pub fn policy_ids(&self) -> Vec<String> {
        self.policies.read().unwrap().keys().cloned().collect()
    }

    pub fn task(&self, id: &str) -> Result<AnnotationTask, HubError> {
        self.tasks.read().unwrap().get(id).cloned().ok_or_else(|| HubError::NotFound(format!("task {id}")))
    }

    pub fn task_ids(&self) -> Vec<String> {
        self.tasks.read().unwrap().keys().cloned().collect()
    }

    /// Creates a task, or applies `change` to an existing one, and persists
    /// the result. `change` sees the task's policy.
    pub fn update_task<F>(&self, id: &str, create: Option<AnnotationTask>, change: F) -> Result<AnnotationTask, HubError>
    where
        F: FnOnce(&mut AnnotationTask, &PolicyText) -> Result<(), HubError>,
    {
        let _guard = self.annotation_lock.lock().unwrap();
        let mut task = match (self.tasks.read().unwrap().get(id).cloned(), create) {
            (Some(_), Some(_)) => return Err(HubError::Conflict(format!("task {id} exists"))),
            (Some(t), None) | (None, Some(t)) => t,
            (None, None) => return Err(HubError::NotFound(format!("task {id}"))),
        };
        let policy = self.policy(&task.policy_id)?;
        change(&mut task, &policy)?;
        let path = self.root.join("tasks").join(format!("{}.json", encode_id(id)));
        write_atomic(&path, serde_json::to_string(&task).expect("task serializes").as_bytes())?;
        self.tasks.write().unwrap().insert(id.to_string(), task.clone());
        Ok(task)
    }
}
