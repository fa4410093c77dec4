//! Similarity alignment of landmark shapes.
//!
//! [`align_to`] solves the two-dimensional similarity Procrustes problem in
//! closed form. For centered shapes `p` (moving) and `q` (reference), write
//! each landmark as a complex number. The least-squares scaled rotation is
//!
//! ```text
//! a = Σ (px·qx + py·qy) / |p|²
//! b = Σ (px·qy − py·qx) / |p|²
//! scale = √(a² + b²),  rotation = atan2(b, a)
//! ```
//!
//! and the translation maps the moving centroid onto the reference centroid.
//! Reflections are never produced.
//!
//! [`generalized_procrustes`] iterates alignment against an evolving mean,
//! renormalized to unit centroid norm each round.

use crate::error::{Result, ShapeError};
use crate::landmark::LandmarkShape;

pub const DEFAULT_GPA_TOL: f64 = 1e-7;
pub const DEFAULT_GPA_MAX_ITER: usize = 100;

/// `x ↦ scale · R(rotation) · x + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityTransform {
    pub scale: f64,
    /// Radians, counter-clockwise in a y-up frame.
    pub rotation: f64,
    pub translation: (f64, f64),
}

impl SimilarityTransform {
    pub fn identity() -> Self {
        SimilarityTransform {
            scale: 1.0,
            rotation: 0.0,
            translation: (0.0, 0.0),
        }
    }

    pub fn new(scale: f64, rotation: f64, translation: (f64, f64)) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(ShapeError::InvalidArgument(format!(
                "similarity scale must be positive, got {scale}"
            )));
        }
        Ok(SimilarityTransform {
            scale,
            rotation,
            translation,
        })
    }

    pub fn apply_point(&self, (x, y): (f64, f64)) -> (f64, f64) {
        let (s, c) = self.rotation.sin_cos();
        let k = self.scale;
        (
            k * (c * x - s * y) + self.translation.0,
            k * (s * x + c * y) + self.translation.1,
        )
    }

    pub fn apply(&self, shape: &LandmarkShape) -> LandmarkShape {
        let coords = shape
            .points()
            .flat_map(|p| {
                let (x, y) = self.apply_point(p);
                [x, y]
            })
            .collect();
        LandmarkShape::new(coords).expect("similarity of a finite shape is finite")
    }

    pub fn inverse(&self) -> SimilarityTransform {
        let inv_scale = 1.0 / self.scale;
        let rotation = -self.rotation;
        let (s, c) = rotation.sin_cos();
        let (tx, ty) = self.translation;
        SimilarityTransform {
            scale: inv_scale,
            rotation,
            translation: (
                -inv_scale * (c * tx - s * ty),
                -inv_scale * (s * tx + c * ty),
            ),
        }
    }
}

/// Finds the similarity transform minimizing the summed squared distance from
/// `shape` to `reference`; returns the transformed shape and the transform.
pub fn align_to(
    shape: &LandmarkShape,
    reference: &LandmarkShape,
) -> Result<(LandmarkShape, SimilarityTransform)> {
    shape.check_same_n(reference)?;
    let (pcx, pcy) = shape.centroid();
    let (qcx, qcy) = reference.centroid();

    let mut pp = 0.0;
    let mut qq = 0.0;
    let mut dot = 0.0;
    let mut cross = 0.0;
    for ((px, py), (qx, qy)) in shape.points().zip(reference.points()) {
        let (px, py) = (px - pcx, py - pcy);
        let (qx, qy) = (qx - qcx, qy - qcy);
        pp += px * px + py * py;
        qq += qx * qx + qy * qy;
        dot += px * qx + py * qy;
        cross += px * qy - py * qx;
    }
    if pp <= 0.0 {
        return Err(ShapeError::DegenerateShape("moving shape has zero centroid norm".into()));
    }
    if qq <= 0.0 {
        return Err(ShapeError::DegenerateShape("reference shape has zero centroid norm".into()));
    }
    let a = dot / pp;
    let b = cross / pp;
    let scale = a.hypot(b);
    if scale <= 0.0 {
        return Err(ShapeError::DegenerateShape(
            "shapes are uncorrelated; no positive scale aligns them".into(),
        ));
    }
    let rotation = b.atan2(a);
    let (s, c) = rotation.sin_cos();
    let translation = (
        qcx - scale * (c * pcx - s * pcy),
        qcy - scale * (s * pcx + c * pcy),
    );
    let transform = SimilarityTransform {
        scale,
        rotation,
        translation,
    };
    Ok((transform.apply(shape), transform))
}

/// Output of [`generalized_procrustes`].
#[derive(Debug, Clone)]
pub struct GpaResult {
    /// Input shapes, each aligned to `mean`, in input order.
    pub aligned: Vec<LandmarkShape>,
    /// Zero-centroid, unit-norm mean shape.
    pub mean: LandmarkShape,
    pub iterations: usize,
    /// Norm of the last mean update.
    pub displacement: f64,
}

/// Generalized Procrustes analysis.
///
/// The mean starts as the first shape, centered and scaled to unit norm.
/// Each round aligns every shape to the mean, averages, and renormalizes;
/// iteration stops once the mean moves by less than `tol`. The mean's
/// rotation is then fixed so it carries no net rotation relative to the
/// first input shape, and all shapes are aligned to that final mean.
pub fn generalized_procrustes(
    shapes: &[LandmarkShape],
    tol: f64,
    max_iter: usize,
) -> Result<GpaResult> {
    if shapes.len() < 2 {
        return Err(ShapeError::InsufficientData {
            needed: 2,
            got: shapes.len(),
        });
    }
    let n = shapes[0].n();
    for s in &shapes[1..] {
        s.check_same_n(&shapes[0])?;
    }
    for (i, s) in shapes.iter().enumerate() {
        if s.centroid_norm() <= 0.0 {
            return Err(ShapeError::DegenerateShape(format!(
                "shape {i} has zero centroid norm"
            )));
        }
    }

    let normalize = |s: &LandmarkShape| -> Result<LandmarkShape> {
        let c = s.centered();
        let norm = c.norm();
        if norm <= 0.0 {
            return Err(ShapeError::DegenerateShape("mean shape collapsed to a point".into()));
        }
        Ok(c.scaled(1.0 / norm))
    };

    let mut mean = normalize(&shapes[0])?;
    let mut iterations = 0;
    let mut displacement = f64::INFINITY;
    while iterations < max_iter {
        iterations += 1;
        let mut acc = vec![0.0; 2 * n];
        for s in shapes {
            let (aligned, _) = align_to(s, &mean)?;
            for (a, c) in acc.iter_mut().zip(aligned.coords()) {
                *a += c;
            }
        }
        let inv = 1.0 / shapes.len() as f64;
        let next = normalize(&LandmarkShape::new(acc.into_iter().map(|v| v * inv).collect())?)?;
        displacement = next.squared_distance(&mean)?.sqrt();
        mean = next;
        if displacement < tol {
            break;
        }
    }

    // Rotation gauge: the mean's orientation is otherwise arbitrary.
    let (_, to_first) = align_to(&mean, &shapes[0])?;
    let gauge = SimilarityTransform {
        scale: 1.0,
        rotation: to_first.rotation,
        translation: (0.0, 0.0),
    };
    let mean = gauge.apply(&mean).centered();

    let aligned = shapes
        .iter()
        .map(|s| align_to(s, &mean).map(|(a, _)| a))
        .collect::<Result<Vec<_>>>()?;

    Ok(GpaResult {
        aligned,
        mean,
        iterations,
        displacement,
    })
}
