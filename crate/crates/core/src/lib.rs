//! Synthetic face-image datasets from a statistical 3D face model, and
//! face-verification metrics.
// `!(x > 0.0)` is used deliberately so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod camera;
pub mod cli;
pub mod dataset;
pub mod eval;
pub mod illumination;
pub mod model;
pub mod render;
pub mod stream;

mod fsutil;
