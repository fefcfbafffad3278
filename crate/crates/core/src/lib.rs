//! Extrinsic geometry of hypersurfaces in `S²×S²`.
//!
//! The core is generic over the scalar (`f32` or `f64`); the `*64` aliases
//! below fix it to `f64`, which every tolerance in the test suite assumes.

pub mod ambient;
pub mod catalog;
pub mod eigen;
pub mod error;
pub mod flow;
pub mod jets;
pub mod linalg;
pub mod rng;
pub mod scalar;
pub mod shape;

pub use ambient::{AmbientIsometry, ProductPoint, ProductTangent, SpherePoint};
pub use error::{GeomError, Result};
pub use jets::{Chart, Coords, Jet1, Jet2, JetSteps};
pub use linalg::{Mat3, Vec3, Vec6, Vector};
pub use rng::SplitMix64;
pub use scalar::Real;
pub use shape::{CIdentityResiduals, LambdaSystem, LocalDerivatives, ShapeData, ShapeOptions};

pub type Point64 = ProductPoint<f64>;
pub type Tangent64 = ProductTangent<f64>;
pub type Isometry64 = AmbientIsometry<f64>;
pub type Chart64 = Chart<f64>;
pub type ShapeData64 = ShapeData<f64>;
