//! Numerical workbench for the W-volume and renormalized-volume calculus of
//! surfaces in hyperbolic 3-space.
//!
//! Everything is generic over the scalar type through [`Real`]; the `*F64`
//! aliases below fix it to `f64`.

pub mod ambient;
pub mod equidistant;
pub mod error;
pub mod extremize;
pub mod grid;
pub mod infinity;
pub mod linalg;
pub mod liouville;
pub mod patch;
pub mod scalar;
pub mod variational;
pub mod verify;
pub mod wvolume;

pub use ambient::{geodesic_flow, hyperbolic_distance, normal_geodesic_flow, AmbientPoint, FlowState};
pub use error::{Error, Result};
pub use extremize::{run_extremization, ConformalState, ExtremizeOptions, ExtremizeReport};
pub use grid::{DiffScheme, Grid, Topology};
pub use infinity::{from_infinity, to_infinity, InfinityData};
pub use linalg::{Mat2, Vec3};
pub use liouville::{schwarzian, ComplexPatch, Convexity, LiouvilleDomain, LiouvilleField};
pub use patch::{analytic_family, AnalyticKind, FormField, GraphSurface, Moments, Orientation, SurfacePatch, TrigSeries};
pub use scalar::Real;
pub use variational::{BallFamily, DeformationFamily, EpsteinFamily, GraphDirection, GraphFamily};
pub use wvolume::{w_volume, SlabSpec, VolumeReport};

pub type AmbientPointF64 = AmbientPoint<f64>;
pub type GridF64 = Grid<f64>;
pub type Mat2F64 = Mat2<f64>;
pub type Vec3F64 = Vec3<f64>;
pub type SurfacePatchF64 = SurfacePatch<f64>;
pub type FormFieldF64 = FormField<f64>;
pub type InfinityDataF64 = InfinityData<f64>;
pub type LiouvilleFieldF64 = LiouvilleField<f64>;
pub type ConformalStateF64 = ConformalState<f64>;
pub type GraphSurfaceF64 = GraphSurface<f64>;
