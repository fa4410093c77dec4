//! Independent reference implementations used by the integration tests.
//!
//! Nothing here calls into the library's numerical code paths; inputs and
//! outputs go through plain slices, and a `BinaryMask` is only read pixel by
//! pixel.

#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shapeprior::raster::BinaryMask;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let diag: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.partial_cmp(x).unwrap());
    ev
}

/// `C = DᵀD` for rows `s_i − mean`.
pub fn gram(rows: &[Vec<f64>], mean: &[f64]) -> Vec<Vec<f64>> {
    let d = mean.len();
    let mut c = vec![vec![0.0; d]; d];
    for r in rows {
        for i in 0..d {
            let di = r[i] - mean[i];
            for j in 0..d {
                c[i][j] += di * (r[j] - mean[j]);
            }
        }
    }
    c
}

/// Component count and areas by recursive flood fill.
pub fn flood_fill_components(mask: &BinaryMask, eight: bool) -> Vec<usize> {
    let (w, h) = (mask.width() as isize, mask.height() as isize);
    let mut seen = vec![false; (w * h) as usize];
    fn fill(
        mask: &BinaryMask,
        seen: &mut [bool],
        x: isize,
        y: isize,
        w: isize,
        h: isize,
        eight: bool,
    ) -> usize {
        if x < 0 || y < 0 || x >= w || y >= h {
            return 0;
        }
        let i = (y * w + x) as usize;
        if seen[i] || !mask.get(x as usize, y as usize) {
            return 0;
        }
        seen[i] = true;
        let mut total = 1;
        for dy in -1..=1 {
            for dx in -1..=1 {
                if (dx, dy) == (0, 0) || (!eight && dx != 0 && dy != 0) {
                    continue;
                }
                total += fill(mask, seen, x + dx, y + dy, w, h, eight);
            }
        }
        total
    }
    let mut areas = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let a = fill(mask, &mut seen, x, y, w, h, eight);
            if a > 0 {
                areas.push(a);
            }
        }
    }
    areas
}

pub fn random_mask(r: &mut impl Rng, w: usize, h: usize, density: f64) -> BinaryMask {
    BinaryMask::from_fn(w, h, |_, _| r.random_bool(density)).unwrap()
}

/// Disk of pixels whose centers lie strictly within `radius + 0.5` of `(cx, cy)`.
pub fn disk(size: usize, cx: f64, cy: f64, radius: f64) -> BinaryMask {
    BinaryMask::from_fn(size, size, |x, y| {
        (x as f64 - cx).hypot(y as f64 - cy) < radius + 0.5
    })
    .unwrap()
}

pub fn filled_rect(w: usize, h: usize, x0: usize, y0: usize, rw: usize, rh: usize) -> BinaryMask {
    BinaryMask::from_fn(w, h, |x, y| x >= x0 && x < x0 + rw && y >= y0 && y < y0 + rh).unwrap()
}

/// Smallest residual over rotations `k°` and scales `0.1·j`, `j = 1..=21`,
/// with the translation that matches centroids.
pub fn grid_procrustes_residual(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len() / 2;
    let centroid = |v: &[f64]| {
        let (mut x, mut y) = (0.0, 0.0);
        for i in 0..n {
            x += v[2 * i];
            y += v[2 * i + 1];
        }
        (x / n as f64, y / n as f64)
    };
    let (px, py) = centroid(p);
    let (qx, qy) = centroid(q);
    let mut best = f64::INFINITY;
    for deg in 0..360 {
        let (s, c) = (deg as f64 * PI / 180.0).sin_cos();
        for j in 1..=21 {
            let scale = 0.1 * j as f64;
            let mut r = 0.0;
            for i in 0..n {
                let (x, y) = (p[2 * i] - px, p[2 * i + 1] - py);
                let tx = scale * (c * x - s * y) + qx;
                let ty = scale * (s * x + c * y) + qy;
                r += (tx - q[2 * i]).powi(2) + (ty - q[2 * i + 1]).powi(2);
            }
            best = best.min(r);
        }
    }
    best
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Arc-length position of `pt` along the closed polyline `poly`, taken at
/// the nearest point of the nearest segment.
pub fn arc_position(poly: &[(f64, f64)], pt: (f64, f64)) -> f64 {
    let mut best = (f64::INFINITY, 0.0);
    let mut acc = 0.0;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let len2 = dx * dx + dy * dy;
        let t = (((pt.0 - a.0) * dx + (pt.1 - a.1) * dy) / len2).clamp(0.0, 1.0);
        let (cx, cy) = (a.0 + t * dx, a.1 + t * dy);
        let d = (pt.0 - cx).hypot(pt.1 - cy);
        if d < best.0 - 1e-12 {
            best = (d, acc + t * len2.sqrt());
        }
        acc += len2.sqrt();
    }
    best.1
}

pub fn polyline_length(poly: &[(f64, f64)]) -> f64 {
    (0..poly.len())
        .map(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % poly.len()];
            (b.0 - a.0).hypot(b.1 - a.1)
        })
        .sum()
}

/// Coefficient of variation (population std over mean).
pub fn cv(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64;
    var.sqrt() / m
}

pub fn naive_bce(p: &[f64], g: &[bool], w: &[f64], width: usize, height: usize, eps: f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for y in 0..height {
        for x in 0..width {
            let i = y * width + x;
            let gv = if g[i] { 1.0 } else { 0.0 };
            num += w[i] * (-gv * (p[i] + eps).ln() - (1.0 - gv) * (1.0 - p[i] + eps).ln());
            den += w[i];
        }
    }
    num / den
}

pub fn naive_iou(p: &[f64], g: &[bool], w: &[f64], width: usize, height: usize) -> f64 {
    let (mut inter, mut union) = (0.0, 0.0);
    for y in 0..height {
        for x in 0..width {
            let i = y * width + x;
            let gv = if g[i] { 1.0 } else { 0.0 };
            inter += w[i] * p[i] * gv;
            union += w[i] * (p[i] + gv - p[i] * gv);
        }
    }
    1.0 - (inter + 1.0) / (union + 1.0)
}

pub fn naive_ual(p: &[f64], width: usize, height: usize) -> f64 {
    let mut s = 0.0;
    for y in 0..height {
        for x in 0..width {
            let v = p[y * width + x];
            s += 1.0 - (2.0 * v - 1.0).abs().powi(2);
        }
    }
    s / (width * height) as f64
}

/// `(dice, precision, recall)` by explicit counting.
pub fn naive_metrics(pred: &[bool], gt: &[bool], width: usize, height: usize) -> (f64, f64, f64) {
    let (mut tp, mut fp, mut fnn) = (0u64, 0u64, 0u64);
    for y in 0..height {
        for x in 0..width {
            let i = y * width + x;
            match (pred[i], gt[i]) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fnn += 1,
                _ => {}
            }
        }
    }
    let empty = !pred.iter().any(|&b| b) && !gt.iter().any(|&b| b);
    let r = |a: u64, b: u64| {
        if b == 0 {
            if empty {
                1.0
            } else {
                0.0
            }
        } else {
            a as f64 / b as f64
        }
    };
    (r(2 * tp, 2 * tp + fp + fnn), r(tp, tp + fp), r(tp, tp + fnn))
}

/// Naive box-mean boundary weights with edge replication.
pub fn naive_weights(g: &[bool], width: usize, height: usize, window: usize, gain: f64) -> Vec<f64> {
    let r = (window / 2) as isize;
    let mut out = vec![0.0; width * height];
    for y in 0..height as isize {
        for x in 0..width as isize {
            let mut s = 0.0;
            for dy in -r..=r {
                for dx in -r..=r {
                    let xx = (x + dx).clamp(0, width as isize - 1) as usize;
                    let yy = (y + dy).clamp(0, height as isize - 1) as usize;
                    if g[yy * width + xx] {
                        s += 1.0;
                    }
                }
            }
            let mean = s / (window * window) as f64;
            let gv = if g[y as usize * width + x as usize] { 1.0 } else { 0.0 };
            out[y as usize * width + x as usize] = 1.0 + gain * (mean - gv).abs();
        }
    }
    out
}
