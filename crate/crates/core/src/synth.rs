//! Synthetic shape families for testing and demos.
//!
//! Each shape is star-shaped around the image center with boundary radius
//! `R(θ)`. The base outline (ellipse, superellipse, or bean) is deformed
//! along analytic modes:
//!
//! - mode 1 scales the horizontal semi-axis by `1 + c₁`
//! - mode 2 scales the vertical semi-axis by `1 + c₂`
//! - mode `j ≥ 3` multiplies the radius by `1 + c_j·cos(jθ)`
//!
//! with `c_j = amplitude_j · z_j` and `z_j` a standard normal draw clamped to
//! `±2.5`. Draws come from a ChaCha8 stream seeded with `seed`, so output is
//! reproducible.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, ShapeError};
use crate::landmark::LandmarkShape;
use crate::raster::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BaseShape {
    #[default]
    Ellipse,
    Superellipse,
    Bean,
}

impl std::str::FromStr for BaseShape {
    type Err = ShapeError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ellipse" => Ok(BaseShape::Ellipse),
            "superellipse" => Ok(BaseShape::Superellipse),
            "bean" => Ok(BaseShape::Bean),
            other => Err(ShapeError::InvalidArgument(format!(
                "unknown base shape {other:?} (ellipse, superellipse, bean)"
            ))),
        }
    }
}

/// Horizontal and vertical semi-axes as fractions of the image size.
const SEMI_X: f64 = 0.30;
const SEMI_Y: f64 = 0.18;
const Z_CLAMP: f64 = 2.5;

pub const DEFAULT_AMPLITUDES: [f64; 3] = [0.15, 0.10, 0.05];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub count: usize,
    pub image_size: usize,
    pub base: BaseShape,
    pub mode_amplitudes: Vec<f64>,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            count: 20,
            image_size: 128,
            base: BaseShape::Ellipse,
            mode_amplitudes: DEFAULT_AMPLITUDES.to_vec(),
            seed: 0,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        if self.count < 1 {
            return Err(ShapeError::InvalidArgument("count must be at least 1".into()));
        }
        if self.image_size < 32 {
            return Err(ShapeError::InvalidArgument(format!(
                "image size must be at least 32, got {}",
                self.image_size
            )));
        }
        if self.mode_amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(ShapeError::InvalidArgument("mode amplitudes must be finite".into()));
        }
        Ok(())
    }
}

/// One deformed outline, centered at the origin, in pixel units.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthShape {
    pub base: BaseShape,
    pub semi_x: f64,
    pub semi_y: f64,
    /// `(order, coefficient)` radial harmonics.
    pub harmonics: Vec<(u32, f64)>,
}

impl SynthShape {
    /// Outline for mode coefficients `c` at the given image size.
    pub fn from_coeffs(base: BaseShape, image_size: usize, coeffs: &[f64]) -> Self {
        let size = image_size as f64;
        let c = |j: usize| coeffs.get(j).copied().unwrap_or(0.0);
        SynthShape {
            base,
            semi_x: SEMI_X * size * (1.0 + c(0)).max(0.1),
            semi_y: SEMI_Y * size * (1.0 + c(1)).max(0.1),
            harmonics: (2..coeffs.len()).map(|j| (j as u32 + 1, coeffs[j])).collect(),
        }
    }

    /// Boundary radius in direction `theta` (radians, image frame).
    pub fn radius(&self, theta: f64) -> f64 {
        let (a, b) = (self.semi_x, self.semi_y);
        let (s, c) = theta.sin_cos();
        let ellipse = a * b / ((b * c).powi(2) + (a * s).powi(2)).sqrt();
        let base = match self.base {
            BaseShape::Ellipse => ellipse,
            BaseShape::Superellipse => ((c / a).abs().powi(4) + (s / b).abs().powi(4)).powf(-0.25),
            BaseShape::Bean => {
                // Dent on the lower side (y grows downward).
                let d = (theta - PI / 2.0 + PI).rem_euclid(2.0 * PI) - PI;
                ellipse * (1.0 - 0.3 * (-d * d / 0.25).exp())
            }
        };
        let mut factor = 1.0;
        for &(order, coeff) in &self.harmonics {
            factor *= 1.0 + coeff * (order as f64 * theta).cos();
        }
        base * factor.max(0.05)
    }

    /// Rasterizes with the outline centered on the canvas; a pixel is
    /// foreground when its center lies within the boundary radius.
    pub fn rasterize(&self, image_size: usize) -> BinaryMask {
        let c = (image_size as f64 - 1.0) / 2.0;
        BinaryMask::from_fn(image_size, image_size, |x, y| {
            let dx = x as f64 - c;
            let dy = y as f64 - c;
            dx.hypot(dy) <= self.radius(dy.atan2(dx))
        })
        .expect("image size is validated to be positive")
    }

    /// `n` boundary points at equal angular steps, starting straight up and
    /// running clockwise on screen.
    pub fn landmarks(&self, n: usize) -> LandmarkShape {
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let theta = -PI / 2.0 + 2.0 * PI * i as f64 / n as f64;
                let r = self.radius(theta);
                (r * theta.cos(), r * theta.sin())
            })
            .collect();
        LandmarkShape::from_points(&pts).expect("synthetic landmarks are finite")
    }
}

/// Deterministic stream of deformation coefficients.
pub struct CoeffSampler {
    rng: ChaCha8Rng,
    amplitudes: Vec<f64>,
}

impl CoeffSampler {
    pub fn new(seed: u64, amplitudes: &[f64]) -> Self {
        CoeffSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            amplitudes: amplitudes.to_vec(),
        }
    }

    pub fn next_coeffs(&mut self) -> Vec<f64> {
        self.amplitudes
            .iter()
            .map(|&a| {
                let z: f64 = self.rng.sample(StandardNormal);
                a * z.clamp(-Z_CLAMP, Z_CLAMP)
            })
            .collect()
    }
}

/// The outlines described by `params`, in generation order.
pub fn synth_shapes(params: &SynthParams) -> Result<Vec<SynthShape>> {
    params.validate()?;
    let mut sampler = CoeffSampler::new(params.seed, &params.mode_amplitudes);
    Ok((0..params.count)
        .map(|_| SynthShape::from_coeffs(params.base, params.image_size, &sampler.next_coeffs()))
        .collect())
}

/// Rasterized masks for `params`.
pub fn synth_masks(params: &SynthParams) -> Result<Vec<BinaryMask>> {
    Ok(synth_shapes(params)?
        .iter()
        .map(|s| s.rasterize(params.image_size))
        .collect())
}
