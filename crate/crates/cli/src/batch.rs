//! Manifest-driven batch drivers: enhancement runs, rotation augmentation,
//! mask application, fold-CSV emission, histogram dumps, and the technique
//! benchmark.
//!
//! Per-image failures in a batch are collected into the run summary rather
//! than aborting the run. All per-image randomness is keyed by
//! (seed, manifest path), so output bytes are identical for any worker
//! count.

use crate::config::RunConfig;
use crate::{resolve, PipelineError};
use cxrkit_core::dataset::{make_folds, Manifest, Role, FOLD_COUNT};
use cxrkit_core::enhance::apply_technique;
use cxrkit_core::metrics::{time_block, TimingStats};
use cxrkit_core::preprocess::{
    apply_mask, augment_rotations, resize_bilinear, zscore_normalize, BinaryMask,
};
use cxrkit_core::raster::{decode_image, encode_image, ImageBuffer, ImageFormat};
use cxrkit_core::{compute_histogram, Technique};
use rayon::prelude::*;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Outcome of a batch run: processed count, per-image failures, and the
/// per-image elapsed-time statistics.
#[derive(Debug)]
pub struct RunSummary {
    pub processed: usize,
    pub failures: Vec<(String, String)>,
    pub timing: Option<TimingStats>,
}

impl RunSummary {
    pub fn format_text(&self) -> String {
        let mut out = format!(
            "processed {} image(s), {} failure(s)\n",
            self.processed,
            self.failures.len()
        );
        if let Some(t) = &self.timing {
            out.push_str(&format!(
                "per-image dt: mean {:.6}s  median {:.6}s  min {:.6}s  max {:.6}s\n",
                t.mean(),
                t.median(),
                t.min(),
                t.max()
            ));
        }
        for (path, err) in &self.failures {
            out.push_str(&format!("failed {path}: {err}\n"));
        }
        out
    }
}

/// Manifest rows must stay inside the root/output trees: relative, with no
/// parent-directory components.
fn manifest_rel_path(path: &str) -> Result<PathBuf, PipelineError> {
    let p = PathBuf::from(path);
    if p.is_absolute() || p.components().any(|c| matches!(c, std::path::Component::ParentDir)) {
        return Err(PipelineError::InvalidInput(format!(
            "manifest path '{path}' must be relative and must not contain '..'"
        )));
    }
    Ok(p)
}

fn output_format(path: &Path) -> Result<ImageFormat, PipelineError> {
    path.extension()
        .and_then(|e| e.to_str())
        .and_then(ImageFormat::from_extension)
        .ok_or_else(|| {
            PipelineError::InvalidInput(format!(
                "no supported image extension on '{}'",
                path.display()
            ))
        })
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, bytes)?;
    Ok(())
}

fn run_in_pool<T: Send>(threads: usize, work: impl FnOnce() -> T + Send) -> T {
    if threads == 0 {
        work()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
            .install(work)
    }
}

/// Runs the configured technique over every manifest row, mirroring the
/// manifest's relative paths under `out_dir`. With `emit_zscore`, a
/// Z-scored float image is written next to each output with the `.f32`
/// extension.
pub fn run_enhance_batch(
    manifest: &Manifest,
    cfg: &RunConfig,
    root: &Path,
    out_dir: &Path,
    mask_dir: Option<&Path>,
    emit_zscore: bool,
) -> Result<RunSummary, PipelineError> {
    let params = cfg.enhance_params()?;
    let resize = cfg.resize_spec()?;
    let results: Vec<Result<f64, (String, String)>> = run_in_pool(cfg.threads, || {
        manifest
            .rows()
            .par_iter()
            .map(|row| {
                let process = || -> Result<f64, PipelineError> {
                    let rel = manifest_rel_path(&row.path)?;
                    let in_path = resolve(root, &rel);
                    let out_path = out_dir.join(&rel);
                    let out_format = output_format(&out_path)?;
                    let bytes = fs::read(&in_path)?;
                    let mask_bytes = match mask_dir {
                        Some(dir) => Some(fs::read(dir.join(&rel))?),
                        None => None,
                    };
                    let (produced, dt) = time_block(|| -> Result<_, PipelineError> {
                        let mut img = decode_image(&bytes)?;
                        if let Some(mb) = &mask_bytes {
                            let mask = BinaryMask::from_image(&decode_image(mb)?)?;
                            img = apply_mask(&img, &mask)?;
                        }
                        let resized = resize_bilinear(&img, &resize);
                        let enhanced = apply_technique(&resized, cfg.technique, &params)?;
                        let encoded = encode_image(&enhanced, out_format)?;
                        let z = emit_zscore.then(|| zscore_normalize(&enhanced));
                        Ok((encoded, z))
                    });
                    let (encoded, z) = produced?;
                    write_atomic(&out_path, &encoded)?;
                    if let Some(z) = z {
                        let z_path = out_path.with_extension("f32");
                        if let Some(parent) = z_path.parent() {
                            fs::create_dir_all(parent)?;
                        }
                        let mut f = fs::File::create(&z_path)?;
                        z.write_to(&mut f)?;
                    }
                    Ok(dt)
                };
                process().map_err(|e| (row.path.clone(), e.to_string()))
            })
            .collect()
    });

    let mut failures = Vec::new();
    let mut samples = Vec::new();
    for r in results {
        match r {
            Ok(dt) => samples.push(dt),
            Err(f) => failures.push(f),
        }
    }
    Ok(RunSummary {
        processed: samples.len(),
        failures,
        timing: TimingStats::from_samples(samples),
    })
}

/// Writes rotated variants for every row whose label is flagged for
/// augmentation and emits the combined manifest (original rows plus the
/// generated ones) as `manifest.csv` in `out_dir`.
///
/// `out_dir` must sit under `root` so the emitted manifest stays
/// root-relative.
pub fn run_augment(
    manifest: &Manifest,
    cfg: &RunConfig,
    root: &Path,
    out_dir: &Path,
) -> Result<RunSummary, PipelineError> {
    let spec = cfg.augment_spec()?;
    let out_rel = out_dir.strip_prefix(root).map_err(|_| {
        PipelineError::InvalidInput(format!(
            "augment output '{}' must live under the root '{}'",
            out_dir.display(),
            root.display()
        ))
    })?;

    struct RowOutput {
        new_rows: Vec<(String, String)>,
        dt: f64,
    }

    let results: Vec<Result<RowOutput, (String, String)>> = run_in_pool(cfg.threads, || {
        manifest
            .rows()
            .par_iter()
            .map(|row| {
                let process = || -> Result<RowOutput, PipelineError> {
                    if !cfg.augment_classes.contains(&row.label) {
                        return Ok(RowOutput {
                            new_rows: Vec::new(),
                            dt: 0.0,
                        });
                    }
                    let rel = manifest_rel_path(&row.path)?;
                    let bytes = fs::read(resolve(root, &rel))?;
                    let out_format = output_format(&rel)?;
                    let (variants, dt) = time_block(|| -> Result<_, PipelineError> {
                        let img = decode_image(&bytes)?;
                        Ok(augment_rotations(&img, &spec, &row.path))
                    });
                    let variants = variants?;
                    let mut new_rows = Vec::new();
                    for (k, variant) in variants.iter().enumerate() {
                        let stem = rel
                            .file_stem()
                            .and_then(|s| s.to_str())
                            .unwrap_or("image");
                        let ext = rel.extension().and_then(|e| e.to_str()).unwrap_or("png");
                        let name = format!("{stem}_rot{}.{ext}", k + 1);
                        let rel_out = rel.parent().unwrap_or(Path::new("")).join(&name);
                        let file_path = out_dir.join(&rel_out);
                        write_atomic(&file_path, &encode_image(variant, out_format)?)?;
                        let manifest_path = out_rel.join(&rel_out);
                        new_rows.push((
                            manifest_path.to_string_lossy().into_owned(),
                            row.label.clone(),
                        ));
                    }
                    Ok(RowOutput { new_rows, dt })
                };
                process().map_err(|e| (row.path.clone(), e.to_string()))
            })
            .collect()
    });

    let mut failures = Vec::new();
    let mut samples = Vec::new();
    let mut generated: Vec<(String, String)> = Vec::new();
    for r in results {
        match r {
            Ok(out) => {
                if out.dt > 0.0 {
                    samples.push(out.dt);
                }
                generated.extend(out.new_rows);
            }
            Err(f) => failures.push(f),
        }
    }

    let manifest_path = out_dir.join("manifest.csv");
    if let Some(parent) = manifest_path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(&manifest_path)?;
    w.write_record(["path", "label"])?;
    for row in manifest.rows() {
        w.write_record([&row.path, &row.label])?;
    }
    for (path, label) in &generated {
        w.write_record([path, label])?;
    }
    w.flush()?;

    Ok(RunSummary {
        processed: generated.len(),
        failures,
        timing: TimingStats::from_samples(samples),
    })
}

/// Applies per-image masks (same relative path under `mask_dir`) and
/// writes the masked images under `out_dir`.
pub fn run_mask_batch(
    manifest: &Manifest,
    cfg: &RunConfig,
    root: &Path,
    mask_dir: &Path,
    out_dir: &Path,
) -> Result<RunSummary, PipelineError> {
    let results: Vec<Result<f64, (String, String)>> = run_in_pool(cfg.threads, || {
        manifest
            .rows()
            .par_iter()
            .map(|row| {
                let process = || -> Result<f64, PipelineError> {
                    let rel = manifest_rel_path(&row.path)?;
                    let bytes = fs::read(resolve(root, &rel))?;
                    let mask_bytes = fs::read(mask_dir.join(&rel))?;
                    let out_path = out_dir.join(&rel);
                    let out_format = output_format(&out_path)?;
                    let (encoded, dt) = time_block(|| -> Result<_, PipelineError> {
                        let img = decode_image(&bytes)?;
                        let mask = BinaryMask::from_image(&decode_image(&mask_bytes)?)?;
                        encode_image(&apply_mask(&img, &mask)?, out_format).map_err(Into::into)
                    });
                    write_atomic(&out_path, &encoded?)?;
                    Ok(dt)
                };
                process().map_err(|e| (row.path.clone(), e.to_string()))
            })
            .collect()
    });

    let mut failures = Vec::new();
    let mut samples = Vec::new();
    for r in results {
        match r {
            Ok(dt) => samples.push(dt),
            Err(f) => failures.push(f),
        }
    }
    Ok(RunSummary {
        processed: samples.len(),
        failures,
        timing: TimingStats::from_samples(samples),
    })
}

/// Builds the five-fold plan and writes `fold_0.csv` through `fold_4.csv`
/// (columns `path,label,fold,role`) into `out_dir`.
pub fn write_fold_csvs(
    manifest: &Manifest,
    seed: u64,
    out_dir: &Path,
) -> Result<(), PipelineError> {
    let plan = make_folds(manifest, seed)?;
    fs::create_dir_all(out_dir)?;
    for fold in 0..FOLD_COUNT {
        let mut w = csv::Writer::from_path(out_dir.join(format!("fold_{fold}.csv")))?;
        w.write_record(["path", "label", "fold", "role"])?;
        for (ci, _class) in plan.classes().iter().enumerate() {
            let split = plan.split(fold, ci);
            for (role, indices) in [
                (Role::Train, &split.train),
                (Role::Validation, &split.validation),
                (Role::Test, &split.test),
            ] {
                for &idx in indices {
                    let row = &manifest.rows()[idx];
                    w.write_record([
                        row.path.as_str(),
                        row.label.as_str(),
                        &fold.to_string(),
                        role.as_str(),
                    ])?;
                }
            }
        }
        w.flush()?;
    }
    Ok(())
}

/// Dumps a 256-row `bin,count` histogram CSV per channel. Single-channel
/// images dump to `out` itself; RGB images dump to `<stem>_r/_g/_b.csv`.
pub fn dump_histogram(image_path: &Path, out: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let img = decode_image(&fs::read(image_path)?)?;
    let planes = img.split_channels();
    let suffixes: &[&str] = if planes.len() == 1 {
        &[""]
    } else {
        &["_r", "_g", "_b"]
    };

    let mut written = Vec::new();
    for (plane, suffix) in planes.iter().zip(suffixes) {
        let hist = compute_histogram(plane)?;
        let path = if suffix.is_empty() {
            out.to_path_buf()
        } else {
            let stem = out
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("histogram");
            let ext = out.extension().and_then(|e| e.to_str()).unwrap_or("csv");
            out.with_file_name(format!("{stem}{suffix}.{ext}"))
        };
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent)?;
            }
        }
        let mut f = fs::File::create(&path)?;
        writeln!(f, "bin,count")?;
        for (bin, count) in hist.counts().iter().enumerate() {
            writeln!(f, "{bin},{count}")?;
        }
        written.push(path);
    }
    Ok(written)
}

/// Mean/median/min/max elapsed seconds per technique.
pub struct BenchRow {
    pub technique: Technique,
    pub stats: TimingStats,
}

/// Decodes and resizes every manifest image once, then times each
/// technique `repeats` times over the whole set.
pub fn run_bench(
    manifest: &Manifest,
    cfg: &RunConfig,
    root: &Path,
    repeats: usize,
) -> Result<Vec<BenchRow>, PipelineError> {
    let params = cfg.enhance_params()?;
    let resize = cfg.resize_spec()?;
    let images: Vec<ImageBuffer> = manifest
        .rows()
        .iter()
        .map(|row| -> Result<ImageBuffer, PipelineError> {
            let bytes = fs::read(resolve(root, &manifest_rel_path(&row.path)?))?;
            Ok(resize_bilinear(&decode_image(&bytes)?, &resize))
        })
        .collect::<Result<_, _>>()?;

    let mut rows = Vec::new();
    for technique in Technique::ALL {
        let mut samples = Vec::with_capacity(images.len() * repeats);
        for _ in 0..repeats.max(1) {
            for img in &images {
                let (result, dt) = time_block(|| apply_technique(img, technique, &params));
                result?;
                samples.push(dt);
            }
        }
        rows.push(BenchRow {
            technique,
            stats: TimingStats::from_samples(samples).expect("nonempty manifest"),
        });
    }
    Ok(rows)
}

/// Renders the benchmark table: one row per technique, elapsed seconds.
pub fn format_bench_table(rows: &[BenchRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<12} {:>12} {:>12} {:>12} {:>12}\n",
        "technique", "mean dt (s)", "median (s)", "min (s)", "max (s)"
    ));
    for row in rows {
        out.push_str(&format!(
            "{:<12} {:>12.6} {:>12.6} {:>12.6} {:>12.6}\n",
            row.technique.id(),
            row.stats.mean(),
            row.stats.median(),
            row.stats.min(),
            row.stats.max()
        ));
    }
    out
}
