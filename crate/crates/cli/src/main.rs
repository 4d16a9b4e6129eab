//! `cxrkit` — manifest-driven chest X-ray preprocessing and enhancement.

use clap::{Args, Parser, Subcommand};
use cxrkit_cli::batch::{
    dump_histogram, format_bench_table, run_augment, run_bench, run_enhance_batch, run_mask_batch,
    write_fold_csvs,
};
use cxrkit_cli::config::RunConfig;
use cxrkit_cli::report::write_report;
use cxrkit_cli::{resolve, PipelineError};
use cxrkit_core::dataset::parse_manifest;
use cxrkit_core::dataset::Manifest;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "cxrkit",
    version,
    about = "Chest X-ray preprocessing, enhancement, splitting, and evaluation"
)]
struct Cli {
    /// Base directory against which relative paths are resolved
    #[arg(long, global = true, default_value = ".")]
    root: PathBuf,

    /// Flat key=value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Run seed; overrides the config file and CXRKIT_SEED
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Print the effective configuration and exit
    #[arg(long, global = true)]
    print_config: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

/// Config keys that can be overridden from the command line.
#[derive(Args, Default)]
struct Overrides {
    /// Technique id: original, he, clahe, complement, gamma, bcet
    #[arg(long)]
    technique: Option<String>,
    /// Resize target width
    #[arg(long)]
    resize_w: Option<u32>,
    /// Resize target height
    #[arg(long)]
    resize_h: Option<u32>,
    /// CLAHE tile columns
    #[arg(long)]
    tiles_x: Option<u32>,
    /// CLAHE tile rows
    #[arg(long)]
    tiles_y: Option<u32>,
    /// CLAHE clip factor (multiple of the uniform bin height)
    #[arg(long)]
    clip: Option<f64>,
    /// Gamma weighting factor in [0, 1)
    #[arg(long)]
    gamma_weight: Option<f64>,
    /// BCET target output minimum
    #[arg(long)]
    bcet_min: Option<f64>,
    /// BCET target output maximum
    #[arg(long)]
    bcet_max: Option<f64>,
    /// BCET target output mean
    #[arg(long)]
    bcet_mean: Option<f64>,
    /// Worker threads (0 = rayon default)
    #[arg(long)]
    threads: Option<usize>,
    /// Declared class set, comma-separated
    #[arg(long)]
    classes: Option<String>,
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) -> Result<(), PipelineError> {
        let pairs: [(&str, Option<String>); 12] = [
            ("technique", self.technique.clone()),
            ("resize_w", self.resize_w.map(|v| v.to_string())),
            ("resize_h", self.resize_h.map(|v| v.to_string())),
            ("clahe_tiles_x", self.tiles_x.map(|v| v.to_string())),
            ("clahe_tiles_y", self.tiles_y.map(|v| v.to_string())),
            ("clahe_clip", self.clip.map(|v| v.to_string())),
            ("gamma_weight", self.gamma_weight.map(|v| v.to_string())),
            ("bcet_min", self.bcet_min.map(|v| v.to_string())),
            ("bcet_max", self.bcet_max.map(|v| v.to_string())),
            ("bcet_mean", self.bcet_mean.map(|v| v.to_string())),
            ("threads", self.threads.map(|v| v.to_string())),
            ("classes", self.classes.clone()),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, &v).map_err(PipelineError::Config)?;
            }
        }
        Ok(())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one enhancement technique over a manifest into an output tree
    Enhance {
        /// Manifest CSV with header path,label
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory mirroring the manifest's relative paths
        #[arg(long)]
        out_dir: PathBuf,
        /// Directory of lung masks matched by relative path
        #[arg(long)]
        mask_dir: Option<PathBuf>,
        /// Also write a Z-scored .f32 float image per output
        #[arg(long)]
        zscore: bool,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Write the deterministic five-fold split CSVs
    Split {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Generate rotated variants for the flagged classes plus a combined manifest
    Augment {
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory; must live under --root
        #[arg(long)]
        out_dir: PathBuf,
        /// Classes to augment, comma-separated
        #[arg(long)]
        augment_classes: Option<String>,
        /// Rotated copies per image
        #[arg(long)]
        copies: Option<u32>,
        /// Maximum absolute rotation angle in degrees
        #[arg(long)]
        max_angle: Option<f64>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Apply lung masks (same relative path under --mask-dir) to a manifest
    Mask {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        mask_dir: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Dump a per-channel 256-bin histogram CSV for one image
    Hist {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a classification report from a predictions CSV
    Report {
        /// CSV with header path,true_label,pred_label
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Also print macro-averaged metrics
        #[arg(long = "macro")]
        include_macro: bool,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Time every technique over a manifest and print the dt table
    Bench {
        #[arg(long)]
        manifest: PathBuf,
        /// Times each technique this many times per image
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn load_manifest(cfg: &RunConfig, root: &Path, path: &Path) -> Result<Manifest, PipelineError> {
    let file = std::fs::File::open(resolve(root, path))?;
    Ok(parse_manifest(file, cfg.declared_classes())?)
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    let mut cfg = RunConfig::from_env()?;
    if let Some(config_path) = &cli.config {
        cfg.apply_file(&resolve(&cli.root, config_path))?;
    }

    // subcommand overrides land on top of the file; the global --seed wins last
    match &cli.command {
        Some(Command::Enhance { overrides, .. })
        | Some(Command::Split { overrides, .. })
        | Some(Command::Mask { overrides, .. })
        | Some(Command::Report { overrides, .. })
        | Some(Command::Bench { overrides, .. }) => overrides.apply(&mut cfg)?,
        Some(Command::Augment {
            overrides,
            augment_classes,
            copies,
            max_angle,
            ..
        }) => {
            overrides.apply(&mut cfg)?;
            if let Some(list) = augment_classes {
                cfg.set("augment_classes", list)
                    .map_err(PipelineError::Config)?;
            }
            if let Some(n) = copies {
                cfg.set("copies_per_image", &n.to_string())
                    .map_err(PipelineError::Config)?;
            }
            if let Some(a) = max_angle {
                cfg.set("max_abs_angle", &a.to_string())
                    .map_err(PipelineError::Config)?;
            }
        }
        _ => {}
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }

    if cli.print_config {
        print!("{}", cfg.render());
        return Ok(());
    }

    let root = &cli.root;
    match cli.command {
        None => Err(PipelineError::InvalidInput(
            "no subcommand; see --help".into(),
        )),
        Some(Command::Enhance {
            manifest,
            out_dir,
            mask_dir,
            zscore,
            ..
        }) => {
            let m = load_manifest(&cfg, root, &manifest)?;
            let out = resolve(root, &out_dir);
            let mask = mask_dir.map(|d| resolve(root, &d));
            let summary = run_enhance_batch(&m, &cfg, root, &out, mask.as_deref(), zscore)?;
            print!("{}", summary.format_text());
            Ok(())
        }
        Some(Command::Split {
            manifest, out_dir, ..
        }) => {
            let m = load_manifest(&cfg, root, &manifest)?;
            let out = resolve(root, &out_dir);
            write_fold_csvs(&m, cfg.seed, &out)?;
            println!("wrote fold_0.csv .. fold_4.csv to {}", out.display());
            Ok(())
        }
        Some(Command::Augment {
            manifest, out_dir, ..
        }) => {
            let m = load_manifest(&cfg, root, &manifest)?;
            let out = resolve(root, &out_dir);
            let summary = run_augment(&m, &cfg, root, &out)?;
            print!("{}", summary.format_text());
            println!("augmented manifest: {}", out.join("manifest.csv").display());
            Ok(())
        }
        Some(Command::Mask {
            manifest,
            mask_dir,
            out_dir,
            ..
        }) => {
            let m = load_manifest(&cfg, root, &manifest)?;
            let summary = run_mask_batch(
                &m,
                &cfg,
                root,
                &resolve(root, &mask_dir),
                &resolve(root, &out_dir),
            )?;
            print!("{}", summary.format_text());
            Ok(())
        }
        Some(Command::Hist { image, out }) => {
            let written = dump_histogram(&resolve(root, &image), &resolve(root, &out))?;
            for path in written {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Some(Command::Report {
            predictions,
            out_dir,
            include_macro,
            ..
        }) => {
            let report = write_report(
                &resolve(root, &predictions),
                &cfg.classes,
                &resolve(root, &out_dir),
                include_macro,
            )?;
            print!("{}", report.format_text());
            Ok(())
        }
        Some(Command::Bench {
            manifest, repeats, ..
        }) => {
            let m = load_manifest(&cfg, root, &manifest)?;
            let rows = run_bench(&m, &cfg, root, repeats)?;
            print!("{}", format_bench_table(&rows));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
