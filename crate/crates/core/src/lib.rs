//! Numerical verification engine for surfaces immersed in Sol³, the solvable
//! Thurston geometry: ℝ³ carrying the metric e^{2z}dx² + e^{−2z}dy² + dz².
//!
//! The crate computes the full second-order geometric data of parametric
//! immersed surfaces — fundamental forms, unit normal, shape operator,
//! curvatures, canonical-frame decomposition — and certifies a family of
//! Laplacian, divergence and gradient identities together with curvature-gap
//! predicates, each against an independent finite-difference oracle with
//! grid-refinement studies.
//!
//! Modules, bottom-up:
//! - [`ambient`] — exact geometry of the model space (metric, frame,
//!   connection, curvature tensor, geodesic flow);
//! - [`immersion`] — the surface catalog and pointwise second-order data;
//! - [`surfcalc`] — chart-grid calculus: gradient, divergence,
//!   Laplace–Beltrami, induced Christoffel symbols, ∇A, quadrature;
//! - [`simons`] — closed-form right-hand sides of the identities and the
//!   residual harness comparing them with finite-difference left-hand sides;
//! - [`gapscan`] — pinching predicates, the quartic identity and gap reports.

pub mod ambient;
pub mod gapscan;
pub mod immersion;
pub mod simons;
pub mod surfcalc;

/// Scalar type the whole engine is generic over; `f64` everywhere in
/// practice, `f32` compiles but fails the tighter tolerances.
pub trait Real:
    num_traits::Float + num_traits::FromPrimitive + std::fmt::Debug + std::fmt::Display + 'static
{
}

impl<T> Real for T where
    T: num_traits::Float + num_traits::FromPrimitive + std::fmt::Debug + std::fmt::Display + 'static
{
}

/// Shorthand for embedding `f64` literals into the generic scalar.
pub(crate) fn lit<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("literal must be representable in the scalar type")
}

/// Double-precision aliases used by the CLI and the test suites.
pub type Point = ambient::AmbientPoint<f64>;
pub type FrameVec = ambient::AmbientVector<f64>;
pub type CoordVec = ambient::CoordinateVector<f64>;
pub type SurfaceChart = immersion::Chart<f64>;
pub type PointData = immersion::SurfacePointData<f64>;
pub type ScalarField = surfcalc::GridField<f64>;
