//! Statistical shape priors for binary segmentation masks.
//!
//! The crate trains an active shape model (a point-distribution model) from
//! example masks and uses it to score how plausible a predicted mask's shape
//! is. It also evaluates the segmentation losses and overlap metrics that
//! usually accompany such a prior.
//!
//! The pipeline for one mask:
//!
//! 1. keep the largest connected region above a minimum area
//!    ([`raster::largest_component_above`]),
//! 2. trace its outer boundary and resample it to `n` landmarks
//!    ([`landmark`]),
//! 3. align the landmarks to the model mean with a similarity transform
//!    ([`align`]),
//! 4. project onto the model's modes and reconstruct ([`asm`]).
//!
//! The reconstruction error is the shape-prior loss.
//!
//! ```
//! use shapeprior::{asm, landmark, synth};
//!
//! let params = synth::SynthParams { count: 12, image_size: 96, seed: 7, ..Default::default() };
//! let masks = synth::synth_masks(&params).unwrap();
//! let shapes: Vec<_> = masks
//!     .iter()
//!     .map(|m| landmark::mask_landmarks(m, 64).unwrap())
//!     .collect();
//! let model = asm::train_asm(&shapes, 5).unwrap();
//! let loss = asm::asm_loss(&model, &masks[0], &Default::default()).unwrap();
//! assert!(loss < 1e-3);
//! ```

pub mod align;
pub mod asm;
pub mod error;
pub mod io;
pub mod landmark;
pub mod loss;
pub mod metrics;
pub mod raster;
pub mod synth;

pub use align::{align_to, generalized_procrustes, GpaResult, SimilarityTransform};
pub use asm::{asm_loss, fit_mask, train_asm, AsmFit, DeformCoeffs, ScoreOptions, ShapeModel};
pub use error::{Result, ShapeError};
pub use landmark::{resample_landmarks, sobel_magnitude, trace_boundary, Contour, LandmarkShape};
pub use loss::{
    boundary_weight_map, mu_schedule, total_loss, ual_loss, weighted_bce, weighted_iou, LossWeights,
    WeightMap,
};
pub use metrics::{confusion_and_metrics, ConfusionCounts, Metrics};
pub use raster::{
    connected_components, largest_component_above, threshold_probability, BinaryMask, ComponentSet,
    Connectivity, ProbabilityMap,
};

// The guide's code listings run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/masks.md")]
    mod masks {}
    #[doc = include_str!("../../../book/src/landmarks.md")]
    mod landmarks {}
    #[doc = include_str!("../../../book/src/alignment.md")]
    mod alignment {}
    #[doc = include_str!("../../../book/src/shape_model.md")]
    mod shape_model {}
    #[doc = include_str!("../../../book/src/losses.md")]
    mod losses {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
}
