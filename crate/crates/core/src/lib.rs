//! Virtual light transport matrices for non-line-of-sight (NLOS) scenes.
//!
//! A relay wall is scanned with a pulsed laser at points `x_l` while SPADs
//! record time-resolved responses at points `x_s`. From that impulse
//! response this crate builds virtual projector/camera pairs that focus on
//! hidden voxels and estimates the transport matrix between them:
//!
//! - [`sim`]: path-sum transient simulator that produces impulse responses
//!   for small analytic scenes.
//! - [`phasor`]: thin lenses, temporal gates, convolution and the imaging
//!   operator.
//! - [`ltm`]: direct image, indirect columns, occupancy masking and band
//!   decomposition of the transport matrix.
//! - [`io`]: binary formats, PGM export, scene and run configuration files.
//! - [`cli`]: the `nlos-ltm` command-line pipeline.

pub mod cli;
pub mod error;
pub mod geometry;
pub mod io;
pub mod ltm;
pub mod phasor;
pub mod sim;

pub use error::{Error, FormatError, Result};
pub use geometry::Vec3;
