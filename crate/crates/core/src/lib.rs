//! Room geometry reconstruction and self-localization from first-order
//! acoustic echoes measured at three points.

pub mod acoustic;
pub mod ambiguity;
pub mod formats;
pub mod forward;
pub mod geometry;
pub mod peaks;
pub mod pipeline;
pub mod reconstruct;
pub mod scenario;
pub mod svg;

pub use forward::EchoSet;
pub use geometry::{ConvexRoom, Point2, Wall};
pub use reconstruct::{slam, CandidateSolution, SlamConfig};
