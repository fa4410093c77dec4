//! Point-distribution shape model.
//!
//! Training aligns the landmark set with generalized Procrustes analysis,
//! stacks the aligned shapes as rows of `S`, subtracts the mean shape to get
//! `D`, and takes the principal directions of `C = DᵀD` from the singular
//! value decomposition of `D` (each eigenvalue of `C` is a squared singular
//! value of `D`). No `1/N` factor is applied.
//!
//! A shape `s` in the model frame is encoded as `b = Pᵀ(s − s̄)` and decoded as
//! `s' = s̄ + Pb`. The shape-prior loss of a mask is the mean squared error
//! between its aligned landmarks and their reconstruction.

mod persist;

pub use persist::FORMAT_VERSION;

use nalgebra::DMatrix;

use crate::align::{align_to, generalized_procrustes, SimilarityTransform, DEFAULT_GPA_MAX_ITER, DEFAULT_GPA_TOL};
use crate::error::{mismatch, Result, ShapeError};
use crate::landmark::{resample_landmarks, trace_boundary, LandmarkShape};
use crate::raster::{largest_component_above, BinaryMask, Connectivity, DEFAULT_MIN_AREA};

/// Retained mode count used unless overridden.
pub const DEFAULT_MODES: usize = 9;

// Singular values at or below this are treated as zero variance. Shapes live
// in the unit-norm aligned frame, so an absolute cutoff is meaningful.
const RANK_TOL: f64 = 1e-12;

/// Mean shape plus `k` orthonormal modes of variation.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeModel {
    mean: LandmarkShape,
    modes: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
}

/// Deformation coefficients `b`, one per retained mode.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformCoeffs(pub Vec<f64>);

impl DeformCoeffs {
    pub fn zeros(k: usize) -> Self {
        DeformCoeffs(vec![0.0; k])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl ShapeModel {
    /// Assembles a model from its parts, checking every structural
    /// invariant: matching lengths, finite values, non-negative descending
    /// eigenvalues, and orthonormal modes (to `1e-9`).
    pub fn new(mean: LandmarkShape, modes: Vec<Vec<f64>>, mut eigenvalues: Vec<f64>) -> Result<Self> {
        let dim = mean.coords().len();
        if modes.len() != eigenvalues.len() {
            return Err(mismatch(
                format!("{} eigenvalues", modes.len()),
                format!("{} eigenvalues", eigenvalues.len()),
            ));
        }
        if modes.is_empty() {
            return Err(ShapeError::InvalidArgument("model needs at least one mode".into()));
        }
        for (j, m) in modes.iter().enumerate() {
            if m.len() != dim {
                return Err(mismatch(
                    format!("mode of length {dim}"),
                    format!("mode {j} of length {}", m.len()),
                ));
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(ShapeError::InvalidArgument(format!("mode {j} is not finite")));
            }
        }
        for (j, l) in eigenvalues.iter_mut().enumerate() {
            if !l.is_finite() || *l < -1e-12 {
                return Err(ShapeError::InvalidArgument(format!(
                    "eigenvalue {j} is {l}; must be non-negative"
                )));
            }
            *l = l.max(0.0);
        }
        if eigenvalues.windows(2).any(|w| w[1] > w[0]) {
            return Err(ShapeError::InvalidArgument("eigenvalues must be sorted descending".into()));
        }
        for a in 0..modes.len() {
            for b in a..modes.len() {
                let d: f64 = modes[a].iter().zip(&modes[b]).map(|(x, y)| x * y).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                if (d - want).abs() > 1e-9 {
                    return Err(ShapeError::InvalidArgument(format!(
                        "modes {a} and {b} are not orthonormal (dot = {d})"
                    )));
                }
            }
        }
        Ok(ShapeModel {
            mean,
            modes,
            eigenvalues,
        })
    }

    /// Landmark count.
    pub fn n(&self) -> usize {
        self.mean.n()
    }

    /// Retained mode count.
    pub fn k(&self) -> usize {
        self.modes.len()
    }

    pub fn mean(&self) -> &LandmarkShape {
        &self.mean
    }

    /// Mode `j` as a length-`2n` column of `P`.
    pub fn mode(&self, j: usize) -> &[f64] {
        &self.modes[j]
    }

    pub fn modes(&self) -> &[Vec<f64>] {
        &self.modes
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Each eigenvalue divided by their sum; zeros if the model has no
    /// variance.
    pub fn variance_shares(&self) -> Vec<f64> {
        let total: f64 = self.eigenvalues.iter().sum();
        self.eigenvalues
            .iter()
            .map(|l| if total > 0.0 { l / total } else { 0.0 })
            .collect()
    }

    /// The same model restricted to its leading `k` modes.
    pub fn truncated(&self, k: usize) -> Result<ShapeModel> {
        if k == 0 || k > self.k() {
            return Err(ShapeError::InvalidArgument(format!(
                "cannot truncate a {}-mode model to {k} modes",
                self.k()
            )));
        }
        Ok(ShapeModel {
            mean: self.mean.clone(),
            modes: self.modes[..k].to_vec(),
            eigenvalues: self.eigenvalues[..k].to_vec(),
        })
    }

    /// `b = Pᵀ(s − s̄)`. The shape must already be in the model frame.
    pub fn project(&self, shape: &LandmarkShape) -> Result<DeformCoeffs> {
        shape.check_same_n(&self.mean)?;
        let diff: Vec<f64> = shape
            .coords()
            .iter()
            .zip(self.mean.coords())
            .map(|(s, m)| s - m)
            .collect();
        Ok(DeformCoeffs(
            self.modes
                .iter()
                .map(|p| p.iter().zip(&diff).map(|(a, b)| a * b).sum())
                .collect(),
        ))
    }

    /// `s' = s̄ + Pb`.
    pub fn reconstruct(&self, coeffs: &DeformCoeffs) -> Result<LandmarkShape> {
        if coeffs.len() != self.k() {
            return Err(ShapeError::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                self.k(),
                coeffs.len()
            )));
        }
        let mut out = self.mean.coords().to_vec();
        for (p, &b) in self.modes.iter().zip(coeffs.as_slice()) {
            for (o, v) in out.iter_mut().zip(p) {
                *o += b * v;
            }
        }
        LandmarkShape::new(out)
    }

    /// Clamps each coefficient to `±sigmas·√λⱼ`.
    pub fn clamp_coeffs(&self, coeffs: &DeformCoeffs, sigmas: f64) -> DeformCoeffs {
        DeformCoeffs(
            coeffs
                .as_slice()
                .iter()
                .zip(&self.eigenvalues)
                .map(|(&b, &l)| {
                    let lim = sigmas * l.sqrt();
                    b.clamp(-lim, lim)
                })
                .collect(),
        )
    }

    /// Reconstruction MSE over all `2n` coordinates for a shape already in
    /// the model frame.
    pub fn shape_loss(&self, aligned: &LandmarkShape, clamp_sigmas: Option<f64>) -> Result<f64> {
        let mut b = self.project(aligned)?;
        if let Some(sig) = clamp_sigmas {
            b = self.clamp_coeffs(&b, sig);
        }
        let rec = self.reconstruct(&b)?;
        Ok(rec.squared_distance(aligned)? / aligned.coords().len() as f64)
    }
}

/// Training diagnostics returned alongside the model.
#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub model: ShapeModel,
    pub num_shapes: usize,
    pub gpa_iterations: usize,
    pub gpa_displacement: f64,
    /// The GPA-aligned training shapes, in input order.
    pub aligned: Vec<LandmarkShape>,
}

/// Trains a model with default Procrustes settings.
pub fn train_asm(shapes: &[LandmarkShape], k: usize) -> Result<ShapeModel> {
    train_asm_detailed(shapes, k, DEFAULT_GPA_TOL, DEFAULT_GPA_MAX_ITER).map(|o| o.model)
}

/// Trains a model, keeping `min(k, N, 2n)` modes.
///
/// Shapes are aligned by generalized Procrustes; `D` holds their deviations
/// from the unit-norm Procrustes mean, which becomes the model mean.
/// Modes are the leading right singular vectors of `D`, each signed so its
/// largest-magnitude entry is positive (first index wins ties).
pub fn train_asm_detailed(
    shapes: &[LandmarkShape],
    k: usize,
    gpa_tol: f64,
    gpa_max_iter: usize,
) -> Result<TrainOutput> {
    if k == 0 {
        return Err(ShapeError::InvalidArgument("mode count must be at least 1".into()));
    }
    if shapes.len() < 2 {
        return Err(ShapeError::InsufficientData {
            needed: 2,
            got: shapes.len(),
        });
    }
    let gpa = generalized_procrustes(shapes, gpa_tol, gpa_max_iter)?;
    let rows = shapes.len();
    let dim = gpa.mean.coords().len();
    let d = DMatrix::from_fn(rows, dim, |i, j| gpa.aligned[i].coords()[j] - gpa.mean.coords()[j]);

    let svd = d.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| ShapeError::InvalidArgument("singular value decomposition failed".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    let keep = k.min(rows).min(dim);
    let mut modes = Vec::with_capacity(keep);
    let mut eigenvalues = Vec::with_capacity(keep);
    for &idx in order.iter().take(keep) {
        let sigma = svd.singular_values[idx];
        let mut v: Vec<f64> = v_t.row(idx).iter().copied().collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        let lead = v
            .iter()
            .enumerate()
            .fold(0, |best, (i, x)| if x.abs() > v[best].abs() { i } else { best });
        if v[lead] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        modes.push(v);
        eigenvalues.push(if sigma > RANK_TOL { sigma * sigma } else { 0.0 });
    }

    let model = ShapeModel::new(gpa.mean, modes, eigenvalues)?;
    Ok(TrainOutput {
        model,
        num_shapes: rows,
        gpa_iterations: gpa.iterations,
        gpa_displacement: gpa.displacement,
        aligned: gpa.aligned,
    })
}

/// Settings for scoring a mask against a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreOptions {
    /// Largest component must be strictly larger than this.
    pub min_area: usize,
    pub connectivity: Connectivity,
    /// When set, coefficients are clamped to `±sigmas·√λ`.
    pub clamp_sigmas: Option<f64>,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        ScoreOptions {
            min_area: DEFAULT_MIN_AREA,
            connectivity: Connectivity::Eight,
            clamp_sigmas: None,
        }
    }
}

/// Every intermediate of scoring one mask.
#[derive(Debug, Clone)]
pub struct AsmFit {
    /// Landmarks in image coordinates.
    pub landmarks: LandmarkShape,
    /// Transform taking `landmarks` into the model frame.
    pub transform: SimilarityTransform,
    /// Landmarks in the model frame.
    pub aligned: LandmarkShape,
    pub coeffs: DeformCoeffs,
    /// Reconstruction in the model frame.
    pub reconstruction: LandmarkShape,
    pub loss: f64,
}

impl AsmFit {
    /// The reconstruction mapped back into image coordinates.
    pub fn reconstruction_in_image(&self) -> LandmarkShape {
        self.transform.inverse().apply(&self.reconstruction)
    }
}

/// Runs the full pipeline on a mask: largest region, boundary trace,
/// landmark resampling, alignment to the mean, projection, reconstruction.
pub fn fit_mask(model: &ShapeModel, mask: &BinaryMask, opts: &ScoreOptions) -> Result<AsmFit> {
    let region = largest_component_above(mask, opts.min_area, opts.connectivity).ok_or(
        ShapeError::NoRegion {
            min_area: opts.min_area,
        },
    )?;
    let contour = trace_boundary(&region)?;
    let landmarks = resample_landmarks(&contour, model.n())?;
    let (aligned, transform) = align_to(&landmarks, model.mean())?;
    let mut coeffs = model.project(&aligned)?;
    if let Some(sig) = opts.clamp_sigmas {
        coeffs = model.clamp_coeffs(&coeffs, sig);
    }
    let reconstruction = model.reconstruct(&coeffs)?;
    let loss = reconstruction.squared_distance(&aligned)? / aligned.coords().len() as f64;
    Ok(AsmFit {
        landmarks,
        transform,
        aligned,
        coeffs,
        reconstruction,
        loss,
    })
}

/// Shape-prior loss of a mask. Fails with [`ShapeError::NoRegion`] when no
/// component exceeds `opts.min_area`.
pub fn asm_loss(model: &ShapeModel, mask: &BinaryMask, opts: &ScoreOptions) -> Result<f64> {
    fit_mask(model, mask, opts).map(|f| f.loss)
}
