//! Content-adaptive Pannini projection for rendering viewports from
//! 360 degree equirectangular images.

pub mod config;
pub mod global;
pub mod imaging;
pub mod measures;
pub mod mesh;
pub mod pceval;
pub mod pipeline;
pub mod projections;
pub mod segmentation;
pub mod sheet;
pub mod synthetic;
pub mod warp;
