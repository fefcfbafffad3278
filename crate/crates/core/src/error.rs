use thiserror::Error;

/// Failure modes of the geometry pipeline.
///
/// Numeric payloads are carried as `f64` so the type is independent of the
/// working scalar.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("vector is not tangent: inner product with base point is {inner:e}")]
    NotTangent { inner: f64 },
    #[error("tangent vectors are attached to different base points (distance {distance:e})")]
    BaseMismatch { distance: f64 },
    #[error("vectors are not orthonormal (defect {defect:e})")]
    NotOrthonormal { defect: f64 },
    #[error("parameter {coord} = {value} is within {margin} of the chart boundary")]
    OutsideDomain { coord: usize, value: f64, margin: f64 },
    #[error("chart evaluation produced a non-finite value")]
    NonFinite,
    #[error("chart differential is rank deficient (smallest singular value {singular_value:e})")]
    SingularChart { singular_value: f64 },
    #[error("chart evaluated on an excluded singular locus: {0}")]
    SingularLocus(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("E-frame undefined: C^2 = 1 at this point (|X| = {x_norm:e})")]
    EFrameUndefined { x_norm: f64 },
    #[error("principal curvatures are not distinct (gap {gap:e})")]
    DegenerateSpectrum { gap: f64 },
    #[error("principal frame flipped across the stencil (alignment {alignment})")]
    FrameContinuity { alignment: f64 },
}

pub type Result<T, E = GeomError> = std::result::Result<T, E>;
