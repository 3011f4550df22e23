pub mod attacker;
pub mod circuit;
pub mod commands;
pub mod config;
pub mod error;
pub mod field;
pub mod geometry;
pub mod locator;
pub mod rng;
pub mod screen;
pub mod susceptibility;

pub use error::{Error, Result};
pub use geometry::{Point, ScreenPose};
