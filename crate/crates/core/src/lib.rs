//! Feature extraction for marked point patterns from segmented histopathology
//! images: K/L/G/F/J/PCF summary functions, quadrat-based areal indices,
//! witness-complex persistent homology and functional PCA across images.

pub mod areal;
pub mod error;
pub mod functional;
pub mod generators;
pub mod index;
pub mod pattern;
pub mod pipeline;
pub mod summaries;
pub mod topology;

pub use error::{Error, Result};
pub use pattern::{
    default_rgrid, parse_csv, CellType, DistanceGrid, MarkedPointPattern, ObservationWindow, Point,
};
