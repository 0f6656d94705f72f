//! Harmonic maps near a corner, their asymptotics, and Winslow grids.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix `f64` for the common case.

pub mod asymptotics;
pub mod corner;
pub mod error;
pub mod io;
pub mod scalar;
pub mod series;
pub mod tracer;
pub mod winslow;

pub use asymptotics::{AngleLaw, AngleLawKind, AsymptoticKit, AsymptoticValue, Jump, PowerLaw};
pub use corner::{CornerConfig, CornerKind, DerivedParams};
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use series::{FitOptions, HarmonicCornerMap, Jacobian, SeriesCoefficients};
pub use tracer::{
    CurveKind, DiscrepancyReport, ExitAngleEstimate, Frame, MeshImages, MeshSpec, Polyline,
    TracedCurve,
};
pub use winslow::{
    CompositionOptions, CompositionReport, DomainBoundary, SectorTestCase, SolveOptions, SolveReport,
    SweepOrdering, WinslowGrid,
};

pub type CornerConfig64 = CornerConfig<f64>;
pub type SeriesCoefficients64 = SeriesCoefficients<f64>;
pub type HarmonicCornerMap64 = HarmonicCornerMap<f64>;
pub type AsymptoticKit64 = AsymptoticKit<f64>;
pub type TracedCurve64 = TracedCurve<f64>;
pub type DomainBoundary64 = DomainBoundary<f64>;
pub type WinslowGrid64 = WinslowGrid<f64>;
