//! Dataset manifests and the stratified five-fold split.
//!
//! A manifest lists (path, label) rows. The fold plan shuffles each class
//! independently by seed, carves five balanced test chunks that partition
//! the class, and splits the remainder of each fold 80/20 into training
//! and validation.

use crate::seeded::keyed_rng;
use rand::seq::SliceRandom;
use std::collections::HashSet;
use std::io::Read;
use thiserror::Error;

pub const FOLD_COUNT: usize = 5;

#[derive(Debug, Error, PartialEq)]
pub enum DatasetError {
    #[error("malformed manifest header: expected 'path,label', got '{0}'")]
    MalformedHeader(String),
    #[error("malformed manifest row {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("duplicate path '{0}'")]
    DuplicatePath(String),
    #[error("unknown label '{label}' on row {line}")]
    UnknownLabel { label: String, line: usize },
    #[error("manifest is empty")]
    Empty,
    #[error("class '{label}' has {count} rows; five-fold splitting needs at least 5")]
    ClassTooSmall { label: String, count: usize },
    #[error("manifest read failed: {0}")]
    Csv(String),
}

/// One manifest row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRow {
    pub path: String,
    pub label: String,
}

/// Ordered dataset rows plus the declared class list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    rows: Vec<ManifestRow>,
    classes: Vec<String>,
}

impl Manifest {
    pub fn rows(&self) -> &[ManifestRow] {
        &self.rows
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Reads a `path,label` CSV. Rows keep file order. When `declared_classes`
/// is given, labels outside it are rejected; otherwise classes are taken
/// in order of first appearance.
pub fn parse_manifest<R: Read>(
    reader: R,
    declared_classes: Option<&[String]>,
) -> Result<Manifest, DatasetError> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = csv_reader.records();

    let header = records
        .next()
        .ok_or(DatasetError::Empty)?
        .map_err(|e| DatasetError::Csv(e.to_string()))?;
    let header_fields: Vec<&str> = header.iter().map(|f| f.trim()).collect();
    if header_fields != ["path", "label"] {
        return Err(DatasetError::MalformedHeader(header_fields.join(",")));
    }

    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    let mut classes: Vec<String> = declared_classes.map(|c| c.to_vec()).unwrap_or_default();
    for (i, record) in records.enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| DatasetError::Csv(e.to_string()))?;
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        if record.len() != 2 {
            return Err(DatasetError::MalformedRow {
                line,
                reason: format!("expected 2 fields, got {}", record.len()),
            });
        }
        let path = record[0].trim().to_string();
        let label = record[1].trim().to_string();
        if path.is_empty() || label.is_empty() {
            return Err(DatasetError::MalformedRow {
                line,
                reason: "empty path or label".into(),
            });
        }
        if !seen.insert(path.clone()) {
            return Err(DatasetError::DuplicatePath(path));
        }
        if declared_classes.is_some() {
            if !classes.contains(&label) {
                return Err(DatasetError::UnknownLabel { label, line });
            }
        } else if !classes.contains(&label) {
            classes.push(label.clone());
        }
        rows.push(ManifestRow { path, label });
    }
    if rows.is_empty() {
        return Err(DatasetError::Empty);
    }
    Ok(Manifest { rows, classes })
}

/// Row role within one fold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Train,
    Validation,
    Test,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Train => "train",
            Role::Validation => "val",
            Role::Test => "test",
        }
    }
}

/// Train/validation/test row indices (into the manifest) for one class in
/// one fold.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RoleSplit {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

/// Deterministic stratified five-fold assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    classes: Vec<String>,
    folds: Vec<Vec<RoleSplit>>,
}

impl FoldPlan {
    pub fn fold_count(&self) -> usize {
        self.folds.len()
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn split(&self, fold: usize, class_idx: usize) -> &RoleSplit {
        &self.folds[fold][class_idx]
    }

    /// (train, validation, test) sizes for one class in one fold.
    pub fn sizes(&self, fold: usize, class_idx: usize) -> (usize, usize, usize) {
        let s = self.split(fold, class_idx);
        (s.train.len(), s.validation.len(), s.test.len())
    }
}

/// Per-fold counts for a class of `n` rows: the test chunk holds
/// `n - floor(0.8 n)` rows, and the remaining pool splits into
/// `round(0.8 pool)` training and the rest validation.
pub fn fold_counts(n: usize) -> (usize, usize, usize) {
    let pool = 4 * n / 5;
    let test = n - pool;
    let train = (4 * pool + 2) / 5; // round-half-up of 0.8 * pool
    let val = pool - train;
    (train, val, test)
}

/// Shuffles each class by (seed, label) and partitions it into five
/// contiguous test chunks, sized within one row of each other with the
/// larger chunks on the earliest folds. Each fold's remaining rows split
/// 80/20 into training and validation.
pub fn make_folds(manifest: &Manifest, seed: u64) -> Result<FoldPlan, DatasetError> {
    let classes = manifest.classes().to_vec();
    let mut folds: Vec<Vec<RoleSplit>> = vec![vec![RoleSplit::default(); classes.len()]; FOLD_COUNT];

    for (ci, class) in classes.iter().enumerate() {
        let mut indices: Vec<usize> = manifest
            .rows()
            .iter()
            .enumerate()
            .filter(|(_, r)| &r.label == class)
            .map(|(i, _)| i)
            .collect();
        let n = indices.len();
        if n < FOLD_COUNT {
            return Err(DatasetError::ClassTooSmall {
                label: class.clone(),
                count: n,
            });
        }
        let mut rng = keyed_rng(seed, class);
        indices.shuffle(&mut rng);

        let base = n / FOLD_COUNT;
        let extra = n % FOLD_COUNT;
        let mut start = 0usize;
        for (f, fold) in folds.iter_mut().enumerate() {
            let test_size = base + usize::from(f < extra);
            let test: Vec<usize> = indices[start..start + test_size].to_vec();
            let mut pool: Vec<usize> = indices[..start].to_vec();
            pool.extend_from_slice(&indices[start + test_size..]);
            let train_size = (4 * pool.len() + 2) / 5;
            let validation = pool.split_off(train_size);
            fold[ci] = RoleSplit {
                train: pool,
                validation,
                test,
            };
            start += test_size;
        }
    }
    Ok(FoldPlan { classes, folds })
}
