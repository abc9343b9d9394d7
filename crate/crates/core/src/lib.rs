//! Periodic orbits and periodic measures of piecewise monotonic interval maps.
//!
//! The crate builds, for a concrete map `T` of `[0, 1]`:
//!
//! * cylinders of the refined partitions (intervals of points sharing an
//!   itinerary prefix), in floating point or exact rational arithmetic;
//! * a tracker that follows a cylinder and its forward image along an orbit
//!   and reports *covering times*, when the cylinder closure lies inside its
//!   image;
//! * periodic points inside covering cylinders (intermediate value theorem,
//!   realized by bisection or an exact affine solve);
//! * Wasserstein-1 and cylinder-mass distances between the resulting
//!   periodic measures and empirical orbit measures, plus block-entropy
//!   estimators on itineraries.

pub mod error;
pub mod exact;
pub mod harness;
pub mod map;
pub mod measure;
pub mod periodic;
pub mod scalar;
pub mod symbolic;
pub mod tower;

pub use error::{Error, Result};
pub use exact::RationalAffineMap;
pub use map::{BranchKind, BranchMap, BranchSpec, Direction, OrbitTrace, PiecewiseMonotonicMap};
pub use measure::{DiscreteMeasure, EntropyEstimate};
pub use periodic::{PeriodicOrbit, FixedPointSolver};
pub use scalar::{Interval, Scalar};
pub use symbolic::{Cylinder, Itinerary};
pub use tower::TowerTracker;
