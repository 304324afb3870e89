//! Artifacts on disk. Every payload is written atomically next to a
//! manifest recording its kind, schema version, config hash and SHA-256;
//! loads verify all three before a single byte is parsed.
//!
//! ```text
//! data/streams/   data/events/   data/features/
//! models/         reports/       manifests/
//! ```

mod artifacts;

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use artifacts::Layout;

pub const LAYOUT_DIRS: [&str; 6] = ["data/streams", "data/events", "data/features", "models", "reports", "manifests"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArtifactKind {
    Scenario,
    Stream,
    Truth,
    Events,
    Snapshots,
    Features,
    Tables,
    Model,
    ModelCatalog,
    Predictions,
    Report,
    Stats,
}

impl ArtifactKind {
    pub fn name(self) -> &'static str {
        match self {
            ArtifactKind::Scenario => "scenario",
            ArtifactKind::Stream => "stream",
            ArtifactKind::Truth => "truth",
            ArtifactKind::Events => "events",
            ArtifactKind::Snapshots => "snapshots",
            ArtifactKind::Features => "features",
            ArtifactKind::Tables => "tables",
            ArtifactKind::Model => "model",
            ArtifactKind::ModelCatalog => "model-catalog",
            ArtifactKind::Predictions => "predictions",
            ArtifactKind::Report => "report",
            ArtifactKind::Stats => "stats",
        }
    }

    /// Version written by this build; loads of any other version fail.
    pub fn schema_version(self) -> u32 {
        match self {
            ArtifactKind::Features | ArtifactKind::Tables | ArtifactKind::Model => crate::features::SCHEMA_VERSION,
            _ => 1,
        }
    }

    /// The command that writes this kind of artifact.
    pub fn producer(self) -> &'static str {
        match self {
            ArtifactKind::Scenario | ArtifactKind::Stream | ArtifactKind::Truth => "simulate",
            ArtifactKind::Events | ArtifactKind::Snapshots => "detect",
            ArtifactKind::Features => "featurize",
            ArtifactKind::Tables => "build-index",
            ArtifactKind::Model | ArtifactKind::ModelCatalog => "train",
            ArtifactKind::Predictions => "predict",
            ArtifactKind::Report => "evaluate",
            ArtifactKind::Stats => "stats",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactManifest {
    pub kind: ArtifactKind,
    pub schema_version: u32,
    /// Seconds since the epoch; `SOURCE_DATE_EPOCH` when set.
    pub created_at: i64,
    pub config_hash: String,
    /// Relative to the store root, with `/` separators.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Error)]
pub enum StorageError {
    #[error("missing {kind} artifact {path}; run `burstwatch {producer}` first")]
    MissingFile {
        kind: &'static str,
        path: String,
        producer: &'static str,
    },
    #[error("checksum mismatch for {path}: manifest says {expected}, file hashes to {found}")]
    ChecksumMismatch { path: String, expected: String, found: String },
    #[error("{path} has schema version {found}, this build reads version {expected}")]
    VersionMismatch { path: String, expected: u32, found: u32 },
    #[error("{path} is a {found} artifact, expected {expected}")]
    KindMismatch {
        path: String,
        expected: &'static str,
        found: &'static str,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {reason}")]
    Format { path: String, reason: String },
}

impl StorageError {
    fn io(path: &str, source: io::Error) -> Self {
        StorageError::Io {
            path: path.to_string(),
            source,
        }
    }

    pub fn format(path: &str, reason: impl std::fmt::Display) -> Self {
        StorageError::Format {
            path: path.to_string(),
            reason: reason.to_string(),
        }
    }
}

/// Forwards writes while hashing them.
struct HashingWriter<W> {
    inner: W,
    hasher: Sha256,
    bytes: u64,
}

impl<W: Write> Write for HashingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hasher.update(&buf[..n]);
        self.bytes += n as u64;
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

/// Reads `SOURCE_DATE_EPOCH`, falling back to the clock.
pub fn creation_time() -> i64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or_else(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs() as i64)
        })
}

fn sha256_file(path: &Path, rel: &str) -> Result<String, StorageError> {
    let mut f = File::open(path).map_err(|e| StorageError::io(rel, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf).map_err(|e| StorageError::io(rel, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
    created_at: i64,
    config_hash: String,
}

impl Store {
    /// Opens (creating if needed) a store rooted at `root`.
    pub fn open(root: impl Into<PathBuf>, config_hash: impl Into<String>) -> Result<Self, StorageError> {
        let root = root.into();
        for d in LAYOUT_DIRS {
            let p = root.join(d);
            fs::create_dir_all(&p).map_err(|e| StorageError::io(&p.display().to_string(), e))?;
        }
        Ok(Store {
            root,
            created_at: creation_time(),
            config_hash: config_hash.into(),
        })
    }

    pub fn with_created_at(mut self, t: i64) -> Self {
        self.created_at = t;
        self
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    fn manifest_rel(rel: &str) -> String {
        format!("manifests/{}.json", rel.replace('/', "__"))
    }

    /// Writes a payload through `write`, then its manifest. The payload goes
    /// to a temporary file under an exclusive lock and is renamed into
    /// place, so readers never see a partial file.
    pub fn save_with<F, E>(&self, kind: ArtifactKind, rel: &str, write: F) -> Result<ArtifactManifest, E>
    where
        F: FnOnce(&mut dyn Write) -> Result<(), E>,
        E: From<StorageError>,
    {
        let target = self.path(rel);
        if let Some(dir) = target.parent() {
            fs::create_dir_all(dir).map_err(|e| StorageError::io(rel, e))?;
        }
        let lock_path = target.with_extension(match target.extension() {
            Some(ext) => format!("{}.lock", ext.to_string_lossy()),
            None => "lock".into(),
        });
        let lock = File::create(&lock_path).map_err(|e| StorageError::io(rel, e))?;
        lock.lock().map_err(|e| StorageError::io(rel, e))?;
        let tmp = target.with_extension("tmp");
        let file = File::create(&tmp).map_err(|e| StorageError::io(rel, e))?;
        let mut w = HashingWriter {
            inner: BufWriter::new(file),
            hasher: Sha256::new(),
            bytes: 0,
        };
        write(&mut w)?;
        w.flush().map_err(|e| StorageError::io(rel, e))?;
        let HashingWriter { inner, hasher, bytes } = w;
        let file = inner.into_inner().map_err(|e| StorageError::io(rel, e.into_error()))?;
        file.sync_all().map_err(|e| StorageError::io(rel, e))?;
        drop(file);
        fs::rename(&tmp, &target).map_err(|e| StorageError::io(rel, e))?;
        let manifest = ArtifactManifest {
            kind,
            schema_version: kind.schema_version(),
            created_at: self.created_at,
            config_hash: self.config_hash.clone(),
            path: rel.to_string(),
            sha256: hex::encode(hasher.finalize()),
            bytes,
        };
        let mrel = Self::manifest_rel(rel);
        let mtmp = self.path(&mrel).with_extension("tmp");
        let json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        fs::write(&mtmp, json).map_err(|e| StorageError::io(&mrel, e))?;
        fs::rename(&mtmp, self.path(&mrel)).map_err(|e| StorageError::io(&mrel, e))?;
        drop(lock);
        let _ = fs::remove_file(&lock_path);
        Ok(manifest)
    }

    pub fn save_bytes(&self, kind: ArtifactKind, rel: &str, bytes: &[u8]) -> Result<ArtifactManifest, StorageError> {
        self.save_with(kind, rel, |w| w.write_all(bytes).map_err(|e| StorageError::io(rel, e)))
    }

    pub fn save_json<T: Serialize>(&self, kind: ArtifactKind, rel: &str, value: &T) -> Result<ArtifactManifest, StorageError> {
        self.save_with(kind, rel, |w| {
            serde_json::to_writer_pretty(&mut *w, value).map_err(|e| StorageError::format(rel, e))?;
            w.write_all(b"\n").map_err(|e| StorageError::io(rel, e))
        })
    }

    /// One JSON document per line.
    pub fn save_jsonl<'a, T: Serialize + 'a>(
        &self,
        kind: ArtifactKind,
        rel: &str,
        items: impl IntoIterator<Item = &'a T>,
    ) -> Result<ArtifactManifest, StorageError> {
        self.save_with(kind, rel, |w| {
            for item in items {
                serde_json::to_writer(&mut *w, item).map_err(|e| StorageError::format(rel, e))?;
                w.write_all(b"\n").map_err(|e| StorageError::io(rel, e))?;
            }
            Ok(())
        })
    }

    pub fn exists(&self, rel: &str) -> bool {
        self.path(&Self::manifest_rel(rel)).is_file()
    }

    pub fn manifest(&self, kind: ArtifactKind, rel: &str) -> Result<ArtifactManifest, StorageError> {
        let missing = || StorageError::MissingFile {
            kind: kind.name(),
            path: rel.to_string(),
            producer: kind.producer(),
        };
        let mrel = Self::manifest_rel(rel);
        let raw = match fs::read(self.path(&mrel)) {
            Ok(r) => r,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(missing()),
            Err(e) => return Err(StorageError::io(&mrel, e)),
        };
        let m: ArtifactManifest = serde_json::from_slice(&raw).map_err(|e| StorageError::format(&mrel, e))?;
        if m.kind != kind {
            return Err(StorageError::KindMismatch {
                path: rel.to_string(),
                expected: kind.name(),
                found: m.kind.name(),
            });
        }
        if m.schema_version != kind.schema_version() {
            return Err(StorageError::VersionMismatch {
                path: rel.to_string(),
                expected: kind.schema_version(),
                found: m.schema_version,
            });
        }
        if !self.path(rel).is_file() {
            return Err(missing());
        }
        Ok(m)
    }

    /// Checks manifest, version and checksum.
    pub fn verify(&self, kind: ArtifactKind, rel: &str) -> Result<ArtifactManifest, StorageError> {
        let m = self.manifest(kind, rel)?;
        let found = sha256_file(&self.path(rel), rel)?;
        if found != m.sha256 {
            return Err(StorageError::ChecksumMismatch {
                path: rel.to_string(),
                expected: m.sha256,
                found,
            });
        }
        Ok(m)
    }

    /// A reader over a verified artifact.
    pub fn open_verified(&self, kind: ArtifactKind, rel: &str) -> Result<BufReader<File>, StorageError> {
        self.verify(kind, rel)?;
        let f = File::open(self.path(rel)).map_err(|e| StorageError::io(rel, e))?;
        Ok(BufReader::with_capacity(1 << 16, f))
    }

    pub fn load_bytes(&self, kind: ArtifactKind, rel: &str) -> Result<Vec<u8>, StorageError> {
        let m = self.manifest(kind, rel)?;
        let bytes = fs::read(self.path(rel)).map_err(|e| StorageError::io(rel, e))?;
        let found = hex::encode(Sha256::digest(&bytes));
        if found != m.sha256 {
            return Err(StorageError::ChecksumMismatch {
                path: rel.to_string(),
                expected: m.sha256,
                found,
            });
        }
        Ok(bytes)
    }

    pub fn load_json<T: DeserializeOwned>(&self, kind: ArtifactKind, rel: &str) -> Result<T, StorageError> {
        let bytes = self.load_bytes(kind, rel)?;
        serde_json::from_slice(&bytes).map_err(|e| StorageError::format(rel, e))
    }

    pub fn load_jsonl<T: DeserializeOwned>(&self, kind: ArtifactKind, rel: &str) -> Result<Vec<T>, StorageError> {
        use std::io::BufRead;
        let r = self.open_verified(kind, rel)?;
        let mut out = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line.map_err(|e| StorageError::io(rel, e))?;
            if line.is_empty() {
                continue;
            }
            out.push(serde_json::from_str(&line).map_err(|e| StorageError::format(rel, format!("line {}: {e}", i + 1)))?);
        }
        Ok(out)
    }
}
