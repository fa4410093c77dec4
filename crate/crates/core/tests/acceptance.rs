//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Built with `harness = false`, so output is never captured.

mod support;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_distr::StandardNormal;

use shapeprior::align::align_to;
use shapeprior::asm::{asm_loss, train_asm, train_asm_detailed, DeformCoeffs, ScoreOptions, ShapeModel};
use shapeprior::error::ShapeError;
use shapeprior::landmark::{mask_landmarks, resample_landmarks, trace_boundary, Contour, LandmarkShape};
use shapeprior::loss::{mu_schedule, ual_loss, weighted_bce, weighted_iou, WeightMap, DEFAULT_BCE_EPS};
use shapeprior::metrics::confusion_and_metrics;
use shapeprior::raster::{BinaryMask, ProbabilityMap};
use shapeprior::synth::{synth_masks, SynthParams};

use support::*;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn synth(count: usize, size: usize, seed: u64, amps: &[f64]) -> Vec<BinaryMask> {
    synth_masks(&SynthParams {
        count,
        image_size: size,
        seed,
        mode_amplitudes: amps.to_vec(),
        ..SynthParams::default()
    })
    .unwrap()
}

fn landmarks_of(masks: &[BinaryMask], n: usize) -> Vec<LandmarkShape> {
    masks.iter().map(|m| mask_landmarks(m, n).unwrap()).collect()
}

const NINE_AMPS: [f64; 9] = [0.15, 0.10, 0.05, 0.04, 0.03, 0.03, 0.02, 0.02, 0.02];

fn pca_oracle() -> Outcome {
    let shapes = landmarks_of(&synth(20, 96, 11, &NINE_AMPS), 32);
    let start = Instant::now();
    let out = train_asm_detailed(&shapes, 64, 1e-7, 100).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let model = &out.model;

    let rows: Vec<Vec<f64>> = out.aligned.iter().map(|s| s.coords().to_vec()).collect();
    let oracle = jacobi_eigenvalues(gram(&rows, model.mean().coords()));
    check(model.k() == 20, format!("expected N = 20 modes, got {}", model.k()))?;
    let mut worst: f64 = 0.0;
    for (j, (&got, &want)) in model.eigenvalues().iter().zip(&oracle).enumerate() {
        let rel = (got - want).abs() / want.abs();
        worst = worst.max(rel);
        check(rel <= 1e-6, format!("mode {}: {got:e} vs oracle {want:e} (rel {rel:e})", j + 1))?;
    }
    check(
        elapsed < Duration::from_secs(1),
        format!("training took {elapsed:?}"),
    )?;
    Ok(format!("20 eigenvalues, worst rel err {worst:.1e}, train {elapsed:.1?}"))
}

fn trained_reference_model() -> ShapeModel {
    train_asm(&landmarks_of(&synth(30, 128, 5, &NINE_AMPS), 238), 9).unwrap()
}

fn subspace_exactness(model: &ShapeModel) -> Outcome {
    let mut r = rng(99);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let b: Vec<f64> = model
            .eigenvalues()
            .iter()
            .map(|l| 2.0 * l.sqrt() * r.sample::<f64, _>(StandardNormal))
            .collect();
        let s = model.reconstruct(&DeformCoeffs(b)).unwrap();
        let loss = model.shape_loss(&s, None).unwrap();
        worst = worst.max(loss);
    }
    let elapsed = start.elapsed();
    check(worst <= 1e-12, format!("max loss {worst:e}"))?;
    check(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;
    Ok(format!("100 shapes, max L_asm {worst:.1e}, {elapsed:.1?}"))
}

fn monotone_reconstruction(model: &ShapeModel) -> Outcome {
    let test = synth(25, 128, 6, &NINE_AMPS);
    let truncated: Vec<ShapeModel> = (1..=9).map(|k| model.truncated(k).unwrap()).collect();
    let opts = ScoreOptions::default();
    let mut violations = 0;
    for m in &test {
        let losses: Vec<f64> = truncated.iter().map(|t| asm_loss(t, m, &opts).unwrap()).collect();
        violations += losses.windows(2).filter(|w| w[1] > w[0] + 1e-12).count();
    }
    check(violations == 0, format!("{violations} increases"))?;
    Ok(format!("{} shapes x k=1..9, 0 violations", test.len()))
}

fn procrustes_optimality() -> Outcome {
    let mut r = rng(2024);
    let mut worst_gap = f64::NEG_INFINITY;
    for _ in 0..50 {
        let n = r.random_range(5..=24);
        let p: Vec<f64> = (0..2 * n).map(|_| r.random_range(-10.0..10.0)).collect();
        let theta = r.random_range(-PI..PI);
        let scale = r.random_range(0.3..2.0);
        let (s, c) = theta.sin_cos();
        let (tx, ty) = (r.random_range(-5.0..5.0), r.random_range(-5.0..5.0));
        let q: Vec<f64> = (0..n)
            .flat_map(|i| {
                let (x, y) = (p[2 * i], p[2 * i + 1]);
                [scale * (c * x - s * y) + tx, scale * (s * x + c * y) + ty]
            })
            .map(|v| v + r.random_range(-1.0..1.0))
            .collect();
        let ps = LandmarkShape::new(p.clone()).unwrap();
        let qs = LandmarkShape::new(q.clone()).unwrap();
        let (aligned, _) = align_to(&ps, &qs).map_err(|e| e.to_string())?;
        let ours = sq_dist(aligned.coords(), &q);
        let grid = grid_procrustes_residual(&p, &q);
        worst_gap = worst_gap.max(ours - grid);
        check(ours <= grid + 1e-6, format!("residual {ours} exceeds grid {grid}"))?;
    }
    Ok(format!("50 pairs, max(ours - grid) = {worst_gap:.3e}"))
}

fn landmark_contract() -> Outcome {
    let mut worst_cv: f64 = 0.0;
    for radius in [15.0, 25.0, 40.0] {
        let mask = disk(100, 49.0, 50.0, radius);
        let contour = trace_boundary(&mask).map_err(|e| e.to_string())?;
        let lm = resample_landmarks(&contour, 238).map_err(|e| e.to_string())?;
        check(lm.n() == 238, format!("got {} landmarks", lm.n()))?;
        let pos: Vec<f64> = lm.points().map(|p| arc_position(contour.points(), p)).collect();
        let total = polyline_length(contour.points());
        let gaps: Vec<f64> = (0..pos.len())
            .map(|i| (pos[(i + 1) % pos.len()] - pos[i]).rem_euclid(total))
            .collect();
        let v = cv(&gaps);
        worst_cv = worst_cv.max(v);
        check(v < 0.01, format!("traced disk r={radius}: arc spacing CV {v}"))?;
    }

    let circle: Vec<(f64, f64)> = (0..2000)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / 2000.0;
            (50.0 + 30.0 * t.cos(), 50.0 + 30.0 * t.sin())
        })
        .collect();
    let lm = resample_landmarks(&Contour::new(circle.clone()).unwrap(), 238).unwrap();
    let pts: Vec<(f64, f64)> = lm.points().collect();
    let chords: Vec<f64> = (0..238)
        .map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % 238]);
            (b.0 - a.0).hypot(b.1 - a.1)
        })
        .collect();
    let v = cv(&chords);
    worst_cv = worst_cv.max(v);
    check(lm.n() == 238 && v < 0.01, format!("polygon circle chord CV {v}"))?;

    let mut worst_eq: f64 = 0.0;
    let mut r = rng(31);
    for _ in 0..10 {
        let (dx, dy) = (r.random_range(-50.0..50.0), r.random_range(-50.0..50.0));
        let shifted = Contour::new(circle.iter().map(|&(x, y)| (x + dx, y + dy)).collect()).unwrap();
        let a = resample_landmarks(&shifted, 238).unwrap();
        for (p, q) in a.points().zip(lm.points()) {
            worst_eq = worst_eq.max((p.0 - q.0 - dx).abs()).max((p.1 - q.1 - dy).abs());
        }
    }
    let base = disk(100, 40.0, 45.0, 20.0);
    let m0 = mask_landmarks(&base, 238).unwrap();
    for (dx, dy) in [(7isize, -3isize), (-12, 20), (30, 30)] {
        let m1 = mask_landmarks(&base.translated(dx, dy), 238).unwrap();
        for (p, q) in m1.points().zip(m0.points()) {
            worst_eq = worst_eq
                .max((p.0 - q.0 - dx as f64).abs())
                .max((p.1 - q.1 - dy as f64).abs());
        }
    }
    check(worst_eq <= 1e-9, format!("translation error {worst_eq:e}"))?;
    Ok(format!("n=238, worst spacing CV {worst_cv:.2e}, translation err {worst_eq:.1e}"))
}

fn threshold_rule(model: &ShapeModel) -> Outcome {
    let opts = ScoreOptions::default();
    let no_region = |m: &BinaryMask| matches!(asm_loss(model, m, &opts), Err(ShapeError::NoRegion { .. }));

    let mut square50 = filled_rect(64, 64, 10, 10, 10, 5);
    check(square50.area() == 50, "fixture area")?;
    check(no_region(&square50), "area 50 was scored")?;
    let blank = BinaryMask::empty(64, 64).unwrap();
    check(no_region(&blank), "blank mask was scored")?;
    let mut several = filled_rect(64, 64, 2, 2, 10, 5);
    for y in 40..45 {
        for x in 40..50 {
            several.set(x, y, true);
        }
    }
    for y in 20..23 {
        for x in 30..40 {
            several.set(x, y, true);
        }
    }
    check(no_region(&several), "three regions of at most 50 px were scored")?;

    square50.set(20, 12, true);
    check(square50.area() == 51, "fixture area 51")?;
    let loss = asm_loss(model, &square50, &opts).map_err(|e| format!("area 51: {e}"))?;
    check(loss.is_finite(), "area 51 loss not finite")?;
    Ok(format!("area <= 50 -> no-region, area 51 -> loss {loss:.6}"))
}

fn loss_metric_oracles() -> Outcome {
    let (w, h) = (8, 8);
    let mut r = rng(77);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let p: Vec<f64> = (0..w * h)
            .map(|_| if i % 10 == 0 { r.random_range(0..2) as f64 } else { r.random_range(0.0..=1.0) })
            .collect();
        let density = r.random_range(0.0..1.0);
        let g: Vec<bool> = if i % 50 == 1 {
            vec![false; w * h]
        } else {
            (0..w * h).map(|_| r.random_bool(density)).collect()
        };
        let wt: Vec<f64> = (0..w * h).map(|_| r.random_range(1.0..6.0)).collect();
        let pred_bin: Vec<bool> = if i % 50 == 1 {
            vec![false; w * h]
        } else {
            (0..w * h).map(|_| r.random_bool(0.5)).collect()
        };

        let pm = ProbabilityMap::new(w, h, p.clone()).unwrap();
        let gm = BinaryMask::new(w, h, g.clone()).unwrap();
        let wm = WeightMap::new(w, h, wt.clone()).unwrap();
        let pb = BinaryMask::new(w, h, pred_bin.clone()).unwrap();

        let diffs = [
            weighted_bce(&pm, &gm, &wm, DEFAULT_BCE_EPS).unwrap() - naive_bce(&p, &g, &wt, w, h, 1e-7),
            weighted_iou(&pm, &gm, &wm).unwrap() - naive_iou(&p, &g, &wt, w, h),
            ual_loss(&pm) - naive_ual(&p, w, h),
        ];
        let m = confusion_and_metrics(&pb, &gm).unwrap();
        let (d, pr, rc) = naive_metrics(&pred_bin, &g, w, h);
        for (k, diff) in diffs
            .into_iter()
            .chain([m.dice - d, m.precision - pr, m.recall - rc])
            .enumerate()
        {
            worst = worst.max(diff.abs());
            check(diff.abs() <= 1e-12, format!("instance {i}, quantity {k}: diff {diff:e}"))?;
        }
    }
    let half = ual_loss(&ProbabilityMap::uniform(w, h, 0.5).unwrap());
    check(half == 1.0, format!("ual(0.5) = {half}"))?;
    let binary = ProbabilityMap::new(w, h, (0..w * h).map(|i| (i % 3 == 0) as u8 as f64).collect()).unwrap();
    let zero = ual_loss(&binary);
    check(zero == 0.0, format!("ual(binary) = {zero}"))?;
    Ok(format!("200 instances, max |diff| {worst:.1e}; ual(0.5)=1, ual(binary)=0"))
}

fn schedule_endpoints() -> Outcome {
    let mu_max = 0.8;
    let total = 1000;
    let at = |e| mu_schedule(e, total, mu_max).unwrap();
    check(at(0) == 0.0, format!("mu(0) = {}", at(0)))?;
    check(at(total) == mu_max, format!("mu(total) = {}", at(total)))?;
    check((at(total / 2) - mu_max / 2.0).abs() <= 1e-12, format!("mu(mid) = {}", at(total / 2)))?;
    let values: Vec<f64> = (0..=total).map(at).collect();
    check(values.windows(2).all(|w| w[1] >= w[0]), "schedule decreases somewhere")?;
    Ok(format!("mu(0)=0, mu(T)=mu_max, mu(T/2)=mu_max/2, monotone over {} epochs", total + 1))
}

fn persistence(model: &ShapeModel) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p1 = dir.path().join("a.json");
    let p2 = dir.path().join("b.json");
    model.save(&p1).map_err(|e| e.to_string())?;
    let loaded = ShapeModel::load(&p1).map_err(|e| e.to_string())?;
    loaded.save(&p2).map_err(|e| e.to_string())?;
    let same = std::fs::read(&p1).unwrap() == std::fs::read(&p2).unwrap();
    check(same, "resaved file differs")?;

    let opts = ScoreOptions::default();
    let mut worst: f64 = 0.0;
    for m in synth(10, 128, 8, &NINE_AMPS) {
        let a = asm_loss(model, &m, &opts).unwrap();
        let b = asm_loss(&loaded, &m, &opts).unwrap();
        worst = worst.max((a - b).abs());
    }
    check(worst <= 1e-12, format!("score drift {worst:e}"))?;
    Ok(format!("byte-identical resave, score drift {worst:.1e}"))
}

fn bbox(m: &BinaryMask) -> (usize, usize) {
    let (mut x0, mut x1, mut y0, mut y1) = (usize::MAX, 0, usize::MAX, 0);
    for y in 0..m.height() {
        for x in 0..m.width() {
            if m.get(x, y) {
                x0 = x0.min(x);
                x1 = x1.max(x);
                y0 = y0.min(y);
                y1 = y1.max(y);
            }
        }
    }
    (x1 - x0 + 1, y1 - y0 + 1)
}

/// Axis-aligned rectangle with the bounding-box aspect of `like` and its area
/// (rounded to whole rows/columns).
fn rectangle_like(like: &BinaryMask) -> BinaryMask {
    let (bw, bh) = bbox(like);
    let area = like.area() as f64;
    let aspect = bw as f64 / bh as f64;
    let rh = (area / aspect).sqrt().round() as usize;
    let rw = (area / rh as f64).round() as usize;
    let size = like.width();
    filled_rect(size, size, (size - rw) / 2, (size - rh) / 2, rw, rh)
}

fn end_to_end_discrimination() -> Outcome {
    let start = Instant::now();
    let opts = ScoreOptions::default();
    let mut min_margin = f64::INFINITY;
    for trial in 0..20u64 {
        let train: Vec<BinaryMask> = synth(30, 128, 1000 + trial, &shapeprior::synth::DEFAULT_AMPLITUDES);
        let model = train_asm(&landmarks_of(&train, 238), 9).map_err(|e| e.to_string())?;
        let held = synth(10, 128, 5000 + trial, &shapeprior::synth::DEFAULT_AMPLITUDES);
        let mean = |v: Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
        let fam = mean(held.iter().map(|m| asm_loss(&model, m, &opts).unwrap()).collect());
        let rect = mean(held.iter().map(|m| asm_loss(&model, &rectangle_like(m), &opts).unwrap()).collect());
        let margin = rect - fam;
        min_margin = min_margin.min(margin);
        check(margin > 0.0, format!("trial {trial}: family {fam:e} vs rectangles {rect:e}"))?;
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(10), format!("took {elapsed:?}"))?;
    Ok(format!("20 trials, min margin {min_margin:.3e}, {elapsed:.1?}"))
}

fn main() -> ExitCode {
    let model = trained_reference_model();
    let criteria: Vec<Criterion> = vec![
        ("PCA oracle equivalence", Box::new(pca_oracle)),
        ("Subspace exactness", Box::new(|| subspace_exactness(&model))),
        ("Monotone reconstruction", Box::new(|| monotone_reconstruction(&model))),
        ("Procrustes optimality", Box::new(procrustes_optimality)),
        ("Landmark contract", Box::new(landmark_contract)),
        ("Threshold rule", Box::new(|| threshold_rule(&model))),
        ("Loss/metric oracles", Box::new(loss_metric_oracles)),
        ("Schedule endpoints", Box::new(schedule_endpoints)),
        ("Persistence", Box::new(|| persistence(&model))),
        ("End-to-end discrimination", Box::new(end_to_end_discrimination)),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        match run() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {} failed",
        criteria.len() - failed,
        failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
