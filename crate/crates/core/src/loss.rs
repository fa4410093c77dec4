//! Segmentation training losses, evaluated as scalars.
//!
//! The total objective is
//!
//! ```text
//! L_total = L_iou^w + L_bce^w + μ(epoch)·L_ual + τ·L_asm
//! ```
//!
//! where the weighted terms use a boundary-emphasis map
//! `w = 1 + gain·|meanpool(gt) − gt|`, `L_ual` is the mean of
//! `1 − (2p − 1)²`, and μ ramps from 0 to `mu_max` on a half-cosine.

use std::f64::consts::PI;

use crate::error::{mismatch, Result, ShapeError};
use crate::raster::{BinaryMask, ProbabilityMap};

pub const DEFAULT_WEIGHT_WINDOW: usize = 31;
pub const DEFAULT_WEIGHT_GAIN: f64 = 5.0;
pub const DEFAULT_BCE_EPS: f64 = 1e-7;
pub const DEFAULT_IOU_SMOOTH: f64 = 1.0;

/// Per-pixel loss weights, all `>= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMap {
    width: usize,
    height: usize,
    weights: Vec<f64>,
}

impl WeightMap {
    pub fn new(width: usize, height: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != width * height {
            return Err(mismatch(
                format!("{} weights", width * height),
                format!("{} weights", weights.len()),
            ));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 1.0)) {
            return Err(ShapeError::InvalidArgument("weights must be finite and >= 1".into()));
        }
        Ok(WeightMap {
            width,
            height,
            weights,
        })
    }

    pub fn uniform(width: usize, height: usize) -> Self {
        WeightMap {
            width,
            height,
            weights: vec![1.0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Multiplies every weight by `factor`. Unlike [`WeightMap::new`] this
    /// allows weights below one, which the loss normalizations tolerate.
    pub fn rescaled(&self, factor: f64) -> WeightMap {
        WeightMap {
            width: self.width,
            height: self.height,
            weights: self.weights.iter().map(|w| w * factor).collect(),
        }
    }
}

/// `w = 1 + gain·|meanpool_window(gt) − gt|`, pooling with edge replication.
pub fn boundary_weight_map(gt: &BinaryMask, window: usize, gain: f64) -> Result<WeightMap> {
    if window.is_multiple_of(2) {
        return Err(ShapeError::InvalidArgument(format!(
            "pooling window must be odd, got {window}"
        )));
    }
    if !(gain.is_finite() && gain >= 0.0) {
        return Err(ShapeError::InvalidArgument(format!("gain must be >= 0, got {gain}")));
    }
    let (w, h) = (gt.width(), gt.height());
    let r = (window / 2) as isize;
    let src: Vec<f64> = gt.pixels().iter().map(|&p| if p { 1.0 } else { 0.0 }).collect();
    let clamp = |v: isize, hi: usize| v.clamp(0, hi as isize - 1) as usize;

    // Separable box sum; each pass replicates edges.
    let mut rows = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            rows[y * w + x] = (-r..=r).map(|d| src[y * w + clamp(x as isize + d, w)]).sum();
        }
    }
    let area = (window * window) as f64;
    let mut weights = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let s: f64 = (-r..=r).map(|d| rows[clamp(y as isize + d, h) * w + x]).sum();
            weights.push(1.0 + gain * (s / area - src[y * w + x]).abs());
        }
    }
    Ok(WeightMap {
        width: w,
        height: h,
        weights,
    })
}

fn check_pair(pred: &ProbabilityMap, gt: &BinaryMask, w: &WeightMap) -> Result<()> {
    let dims = (gt.width(), gt.height());
    for (what, d) in [
        ("prediction", (pred.width(), pred.height())),
        ("weight map", (w.width(), w.height())),
    ] {
        if d != dims {
            return Err(mismatch(
                format!("{}x{}", dims.0, dims.1),
                format!("{what} {}x{}", d.0, d.1),
            ));
        }
    }
    Ok(())
}

/// `Σ w·[−g·ln(p + eps) − (1 − g)·ln(1 − p + eps)] / Σ w`.
pub fn weighted_bce(pred: &ProbabilityMap, gt: &BinaryMask, w: &WeightMap, eps: f64) -> Result<f64> {
    check_pair(pred, gt, w)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&p, &g), &wt) in pred.values().iter().zip(gt.pixels()).zip(w.weights()) {
        let term = if g { -(p + eps).ln() } else { -(1.0 - p + eps).ln() };
        num += wt * term;
        den += wt;
    }
    Ok(num / den)
}

/// Soft IoU loss `1 − (Σ w·p·g + s) / (Σ w·(p + g − p·g) + s)` with
/// smoothing `s`.
pub fn weighted_iou_smoothed(
    pred: &ProbabilityMap,
    gt: &BinaryMask,
    w: &WeightMap,
    smooth: f64,
) -> Result<f64> {
    check_pair(pred, gt, w)?;
    let mut inter = 0.0;
    let mut union = 0.0;
    for ((&p, &g), &wt) in pred.values().iter().zip(gt.pixels()).zip(w.weights()) {
        let g = if g { 1.0 } else { 0.0 };
        inter += wt * p * g;
        union += wt * (p + g - p * g);
    }
    Ok(1.0 - (inter + smooth) / (union + smooth))
}

/// Soft IoU loss with the default `+1` smoothing.
pub fn weighted_iou(pred: &ProbabilityMap, gt: &BinaryMask, w: &WeightMap) -> Result<f64> {
    weighted_iou_smoothed(pred, gt, w, DEFAULT_IOU_SMOOTH)
}

/// Mean of `1 − (2p − 1)²`.
pub fn ual_loss(pred: &ProbabilityMap) -> f64 {
    let sum: f64 = pred
        .values()
        .iter()
        .map(|&p| {
            let d = 2.0 * p - 1.0;
            1.0 - d * d
        })
        .sum();
    sum / pred.values().len() as f64
}

/// `μ = mu_max · ½(1 − cos(π·epoch/total))`.
pub fn mu_schedule(epoch: usize, total: usize, mu_max: f64) -> Result<f64> {
    if total == 0 || epoch > total {
        return Err(ShapeError::InvalidArgument(format!(
            "epoch {epoch} outside 0..={total} (total must be >= 1)"
        )));
    }
    Ok(mu_max * 0.5 * (1.0 - (PI * epoch as f64 / total as f64).cos()))
}

/// Balance coefficients for the total loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub mu_max: f64,
    pub tau: f64,
    pub epoch: usize,
    pub total_epochs: usize,
}

impl LossWeights {
    pub fn new(mu_max: f64, tau: f64, epoch: usize, total_epochs: usize) -> Result<Self> {
        if !(mu_max >= 0.0 && tau >= 0.0) {
            return Err(ShapeError::InvalidArgument("mu_max and tau must be >= 0".into()));
        }
        if total_epochs == 0 || epoch > total_epochs {
            return Err(ShapeError::InvalidArgument(format!(
                "epoch {epoch} outside 0..={total_epochs}"
            )));
        }
        Ok(LossWeights {
            mu_max,
            tau,
            epoch,
            total_epochs,
        })
    }

    pub fn mu(&self) -> Result<f64> {
        mu_schedule(self.epoch, self.total_epochs, self.mu_max)
    }
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            mu_max: 1.0,
            tau: 1.0,
            epoch: 0,
            total_epochs: 1,
        }
    }
}

/// The four-term objective. `asm_term` is supplied by the caller (zero when
/// the prediction has no usable region).
pub fn total_loss(
    pred: &ProbabilityMap,
    gt: &BinaryMask,
    w: &WeightMap,
    asm_term: f64,
    lw: &LossWeights,
) -> Result<f64> {
    let iou = weighted_iou(pred, gt, w)?;
    let bce = weighted_bce(pred, gt, w, DEFAULT_BCE_EPS)?;
    Ok(iou + bce + lw.mu()? * ual_loss(pred) + lw.tau * asm_term)
}
