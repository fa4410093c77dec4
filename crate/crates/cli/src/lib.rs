//! Subcommand implementations for the `shapeprior` binary.
//!
//! Each command writes its human-readable output to the supplied writer and
//! returns a summary value, so the commands can be driven from tests without
//! spawning a process. Numbers on the console carry six decimals (losses and
//! eigenvalues in scientific notation); files keep full precision.

pub mod overlay;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use shapeprior::asm::{fit_mask, train_asm_detailed, AsmFit, ScoreOptions, ShapeModel};
use shapeprior::error::ShapeError;
use shapeprior::io::{landmarks_to_csv, read_mask, write_mask, MaskFormat};
use shapeprior::landmark::{resample_landmarks, trace_boundary, LandmarkShape};
use shapeprior::metrics::{confusion_and_metrics, EvalReport};
use shapeprior::raster::{largest_component_above, Connectivity};
use shapeprior::synth::{synth_masks, SynthParams};

/// Environment variable capping batch parallelism.
pub const THREADS_ENV: &str = "SHAPEPRIOR_THREADS";

/// Mask files (`.pgm` / `.png`) in `dir`, sorted by file name.
pub fn list_masks(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot read directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && MaskFormat::from_path(p).is_some())
        .collect();
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| p.display().to_string())
}

/// Runs `f` on a pool sized by [`THREADS_ENV`] when set.
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .with_context(|| format!("{THREADS_ENV} must be a positive integer, got {v:?}"))?;
        builder = builder.num_threads(n);
    }
    Ok(builder.build().context("cannot build thread pool")?.install(f))
}

#[derive(Debug, Clone)]
pub struct TrainArgs {
    pub masks: PathBuf,
    pub out: PathBuf,
    pub n: usize,
    pub k: usize,
    pub min_area: usize,
    pub landmarks_out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub used: Vec<String>,
    pub skipped: Vec<String>,
    pub model: ShapeModel,
    pub gpa_iterations: usize,
}

fn mask_to_landmarks(path: &Path, n: usize, min_area: usize) -> Result<LandmarkShape> {
    let mask = read_mask(path)?;
    let region = largest_component_above(&mask, min_area, Connectivity::Eight)
        .ok_or(ShapeError::NoRegion { min_area })?;
    Ok(resample_landmarks(&trace_boundary(&region)?, n)?)
}

pub fn train(args: &TrainArgs, out: &mut impl Write, err: &mut impl Write) -> Result<TrainSummary> {
    let files = list_masks(&args.masks)?;
    let results: Vec<(String, Result<LandmarkShape>)> = with_pool(|| {
        files
            .par_iter()
            .map(|p| (file_name(p), mask_to_landmarks(p, args.n, args.min_area)))
            .collect()
    })?;

    let mut used = Vec::new();
    let mut skipped = Vec::new();
    let mut shapes = Vec::new();
    for (name, r) in results {
        match r {
            Ok(s) => {
                used.push(name);
                shapes.push(s);
            }
            Err(e) => {
                writeln!(err, "warning: skipping {name}: {e:#}")?;
                skipped.push(name);
            }
        }
    }
    if shapes.len() < 2 {
        bail!(ShapeError::InsufficientData {
            needed: 2,
            got: shapes.len()
        });
    }

    let trained = train_asm_detailed(
        &shapes,
        args.k,
        shapeprior::align::DEFAULT_GPA_TOL,
        shapeprior::align::DEFAULT_GPA_MAX_ITER,
    )?;
    let model = trained.model;
    model
        .save(&args.out)
        .with_context(|| format!("cannot write model to {}", args.out.display()))?;
    if let Some(path) = &args.landmarks_out {
        fs::write(path, landmarks_to_csv(&shapes)?)
            .with_context(|| format!("cannot write landmarks to {}", path.display()))?;
    }

    writeln!(out, "shapes N = {}", shapes.len())?;
    writeln!(out, "landmarks n = {}", model.n())?;
    writeln!(out, "modes k = {}", model.k())?;
    writeln!(
        out,
        "gpa iterations = {} (final displacement {:.6e})",
        trained.gpa_iterations, trained.gpa_displacement
    )?;
    writeln!(out, "mode\teigenvalue\tshare")?;
    for (j, (l, s)) in model
        .eigenvalues()
        .iter()
        .zip(model.variance_shares())
        .enumerate()
    {
        writeln!(out, "{}\t{:.6e}\t{:.6}", j + 1, l, s)?;
    }

    Ok(TrainSummary {
        used,
        skipped,
        model,
        gpa_iterations: trained.gpa_iterations,
    })
}

#[derive(Debug, Clone)]
pub struct ScoreArgs {
    pub model: PathBuf,
    pub input: PathBuf,
    pub min_area: usize,
    pub clamp_sigmas: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ScoreSummary {
    /// Per file, `None` when no region exceeded the area threshold.
    pub scores: Vec<(String, Option<f64>)>,
    pub mean: Option<f64>,
}

pub fn load_model(path: &Path) -> Result<ShapeModel> {
    ShapeModel::load(path).with_context(|| format!("cannot load model {}", path.display()))
}

pub fn score(args: &ScoreArgs, out: &mut impl Write) -> Result<ScoreSummary> {
    let model = load_model(&args.model)?;
    let files = if args.input.is_dir() {
        list_masks(&args.input)?
    } else {
        vec![args.input.clone()]
    };
    let opts = ScoreOptions {
        min_area: args.min_area,
        clamp_sigmas: args.clamp_sigmas,
        ..ScoreOptions::default()
    };
    let results: Vec<Result<Option<f64>>> = with_pool(|| {
        files
            .par_iter()
            .map(|p| {
                let mask = read_mask(p).with_context(|| format!("cannot read {}", p.display()))?;
                match fit_mask(&model, &mask, &opts) {
                    Ok(fit) => Ok(Some(fit.loss)),
                    Err(ShapeError::NoRegion { .. }) => Ok(None),
                    Err(e) => Err(anyhow::Error::new(e).context(format!("cannot score {}", p.display()))),
                }
            })
            .collect()
    })?;

    let mut scores = Vec::with_capacity(files.len());
    for (p, r) in files.iter().zip(results) {
        let v = r?;
        match v {
            Some(l) => writeln!(out, "{}\t{:.6e}", file_name(p), l)?,
            None => writeln!(out, "{}\tn/a", file_name(p))?,
        }
        scores.push((file_name(p), v));
    }
    let scored: Vec<f64> = scores.iter().filter_map(|(_, v)| *v).collect();
    let mean = (!scored.is_empty()).then(|| scored.iter().sum::<f64>() / scored.len() as f64);
    match mean {
        Some(m) => writeln!(out, "mean\t{:.6e}\t({} of {} scored)", m, scored.len(), scores.len())?,
        None => writeln!(out, "mean\tn/a\t(0 of {} scored)", scores.len())?,
    }
    Ok(ScoreSummary { scores, mean })
}

#[derive(Debug, Clone)]
pub struct EvalArgs {
    pub pred: PathBuf,
    pub gt: PathBuf,
    pub out: PathBuf,
}

pub fn eval(args: &EvalArgs, out: &mut impl Write, err: &mut impl Write) -> Result<EvalReport> {
    let preds = list_masks(&args.pred)?;
    let gts = list_masks(&args.gt)?;
    let gt_names: Vec<String> = gts.iter().map(|p| file_name(p)).collect();

    let mut pairs = Vec::new();
    for p in &preds {
        let name = file_name(p);
        match gt_names.iter().position(|g| *g == name) {
            Some(i) => pairs.push((name, p.clone(), gts[i].clone())),
            None => writeln!(err, "warning: {name} has no ground truth; skipped")?,
        }
    }
    for g in &gt_names {
        if !preds.iter().any(|p| file_name(p) == *g) {
            writeln!(err, "warning: {g} has no prediction; skipped")?;
        }
    }
    if pairs.is_empty() {
        bail!(
            "no matching file names between {} and {}",
            args.pred.display(),
            args.gt.display()
        );
    }

    let rows: Vec<Result<_>> = with_pool(|| {
        pairs
            .par_iter()
            .map(|(name, p, g)| -> Result<_> {
                let pm = read_mask(p).with_context(|| format!("cannot read {}", p.display()))?;
                let gm = read_mask(g).with_context(|| format!("cannot read {}", g.display()))?;
                let m = confusion_and_metrics(&pm, &gm).with_context(|| format!("case {name}"))?;
                Ok((name.clone(), m))
            })
            .collect()
    })?;
    let mut report = EvalReport::default();
    for r in rows {
        let (name, m) = r?;
        report.push(name, m);
    }
    fs::write(&args.out, report.to_csv())
        .with_context(|| format!("cannot write report {}", args.out.display()))?;

    writeln!(out, "case\tdice\tprecision\trecall")?;
    for (id, m) in &report.cases {
        writeln!(out, "{id}\t{:.6}\t{:.6}\t{:.6}", m.dice, m.precision, m.recall)?;
    }
    let [d, p, r] = report.summary();
    writeln!(
        out,
        "mean±std\t{:.6}±{:.6}\t{:.6}±{:.6}\t{:.6}±{:.6}",
        d.0, d.1, p.0, p.1, r.0, r.1
    )?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Png,
    Pgm,
}

pub fn synth(params: &SynthParams, out_dir: &Path, format: OutputFormat, out: &mut impl Write) -> Result<Vec<PathBuf>> {
    let masks = synth_masks(params)?;
    fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
    let ext = match format {
        OutputFormat::Png => "png",
        OutputFormat::Pgm => "pgm",
    };
    let mut written = Vec::with_capacity(masks.len());
    for (i, m) in masks.iter().enumerate() {
        let path = out_dir.join(format!("synth_{i:04}.{ext}"));
        write_mask(&path, m).with_context(|| format!("cannot write {}", path.display()))?;
        written.push(path);
    }
    writeln!(out, "wrote {} masks to {}", written.len(), out_dir.display())?;
    Ok(written)
}

#[derive(Debug, Clone)]
pub struct ReconstructArgs {
    pub model: PathBuf,
    pub mask: PathBuf,
    pub out: PathBuf,
    pub min_area: usize,
}

pub fn reconstruct(args: &ReconstructArgs, out: &mut impl Write) -> Result<AsmFit> {
    let model = load_model(&args.model)?;
    let mask = read_mask(&args.mask).with_context(|| format!("cannot read {}", args.mask.display()))?;
    let opts = ScoreOptions {
        min_area: args.min_area,
        ..ScoreOptions::default()
    };
    let fit = fit_mask(&model, &mask, &opts)?;
    let region = largest_component_above(&mask, opts.min_area, opts.connectivity)
        .expect("fit_mask succeeded, so a region exists");
    let contour = trace_boundary(&region)?;
    let img = overlay::render(&mask, &contour, &fit.landmarks, &fit.reconstruction_in_image());
    img.save_with_format(&args.out, image::ImageFormat::Png)
        .with_context(|| format!("cannot write overlay {}", args.out.display()))?;

    let b: Vec<String> = fit.coeffs.as_slice().iter().map(|v| format!("{v:.6}")).collect();
    writeln!(out, "b = [{}]", b.join(", "))?;
    writeln!(out, "loss = {:.6e}", fit.loss)?;
    writeln!(out, "overlay written to {}", args.out.display())?;
    Ok(fit)
}
