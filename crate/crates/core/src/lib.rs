//! Segmentation of top-view depth frames into human body parts and furniture.
//!
//! The crate synthesizes labeled depth scenes from a human-object interaction
//! model, trains a random decision forest on depth-difference features, and
//! refines its per-pixel posteriors with a Potts CRF minimized by
//! alpha-expansion.

pub mod class;
pub mod commands;
pub mod config;
pub mod crf;
pub mod error;
pub mod eval;
pub mod features;
pub mod forest;
pub mod geometry;
pub mod raster;
pub mod render;
pub mod scene;
pub mod seed;

mod par;

pub use class::{Family, ObjectClass, CLASS_COUNT, FOREGROUND_COUNT};
pub use config::PipelineConfig;
pub use error::{Error, Result};
pub use render::{add_noise, render, Camera, DepthFrame, LabelFrame, NoiseParams, Projection};
